//! Integration engines for the Hardy and Rellich functionals of a trial
//! function over `ℝ^d`, and Rayleigh quotients with error bars.
//!
//! Three methods are available:
//!
//! * `MonteCarloImportance`: radial importance sampling matched to the trial
//!   profile, uniform directions. Samples are split into independently
//!   seeded ChaCha streams and reduced in a fixed tree order, so results are
//!   bit-identical for a given seed and partition count.
//! * `RadialAngularProduct`: hyperspherical Gauss–Legendre × trapezoid
//!   angular rule times a log-mapped composite Gauss–Legendre radial rule.
//!   The error bar is the change under doubling both resolutions.
//! * `RadialFactorized`: for `u = Fψ` the angular moment `∫_S |F|^p`
//!   factors out, leaving one-dimensional radial integrals (Rellich for all
//!   `p`, Hardy for `p = 2`).

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::constants::{FunctionClass, Params};
use crate::error::{Error, Result};
use crate::fields::SectorDomain;
use crate::trials::{RadialProfile, TrialFunction};

/// Fraction of non-finite samples above which a Monte Carlo run aborts.
pub const MAX_DEGENERATE_FRACTION: f64 = 1e-3;

/// Points per Gauss–Legendre panel in the radial rules.
const PANEL_POINTS: usize = 16;

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// `|S^{d−1}| = 2π^{d/2}/Γ(d/2)`.
pub fn sphere_area(d: usize) -> f64 {
    (2.0f64.ln() + d as f64 / 2.0 * PI.ln() - ln_gamma(d as f64 / 2.0)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Hardy,
    Rellich,
}

impl Functional {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Hardy => "hardy",
            Self::Rellich => "rellich",
        }
    }

    pub fn numerator(self) -> Integral {
        match self {
            Self::Hardy => Integral::HardyNumerator,
            Self::Rellich => Integral::RellichNumerator,
        }
    }

    pub fn denominator(self) -> Integral {
        match self {
            Self::Hardy => Integral::HardyDenominator,
            Self::Rellich => Integral::RellichDenominator,
        }
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hardy" => Ok(Self::Hardy),
            "rellich" => Ok(Self::Rellich),
            other => Err(Error::Usage(format!("unknown functional `{other}`"))),
        }
    }
}

/// The four integrals entering the quotients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Integral {
    /// `∫ |∇u|^p |x|^{−γ}`
    HardyNumerator,
    /// `∫ |u|^p |x|^{−p−γ}`
    HardyDenominator,
    /// `∫ |Δu|^p |x|^{−γ}`
    RellichNumerator,
    /// `∫ |u|^p |x|^{−2p−γ}`
    RellichDenominator,
}

impl Integral {
    fn functional(self) -> Functional {
        match self {
            Self::HardyNumerator | Self::HardyDenominator => Functional::Hardy,
            Self::RellichNumerator | Self::RellichDenominator => Functional::Rellich,
        }
    }

    /// Exponent `k` in `∫ f(x/a) dx = a^k ∫ f(y) dy` for dilated trials.
    fn dilation_exponent(self, d: usize, p: f64, gamma: f64) -> f64 {
        match self.functional() {
            Functional::Hardy => d as f64 - p - gamma,
            Functional::Rellich => d as f64 - 2.0 * p - gamma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    MonteCarloImportance,
    RadialAngularProduct,
    RadialFactorized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub method: Method,
    pub samples: u64,
    pub seed: u64,
    pub partitions: usize,
    /// Radial range `(r_min, r_max)` for the deterministic rules; chosen from
    /// the trial profile when absent.
    pub radial_cutoffs: Option<(f64, f64)>,
    pub radial_nodes: usize,
    pub angular_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            method: Method::MonteCarloImportance,
            samples: 1_000_000,
            seed: 0,
            partitions: 64,
            radial_cutoffs: None,
            radial_nodes: 256,
            angular_nodes: 24,
        }
    }
}

impl QuadratureConfig {
    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            ..Self::default()
        }
    }

    pub fn product(radial_nodes: usize, angular_nodes: usize) -> Self {
        Self {
            method: Method::RadialAngularProduct,
            radial_nodes,
            angular_nodes,
            ..Self::default()
        }
    }

    pub fn factorized() -> Self {
        Self {
            method: Method::RadialFactorized,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Estimates of several integrals from one run, with their covariance.
#[derive(Debug, Clone, PartialEq)]
struct Joint {
    values: Vec<f64>,
    cov: Vec<Vec<f64>>,
    degenerate: u64,
}

impl Joint {
    fn estimate(&self, i: usize) -> Estimate {
        Estimate {
            value: self.values[i],
            error: self.cov[i][i].max(0.0).sqrt(),
        }
    }
}

// ---------------------------------------------------------------------------
// Integrands
// ---------------------------------------------------------------------------

/// The integrand at `x = rω` as `(log scale, unit part)`.
fn integrand(u: &TrialFunction, which: Integral, p: f64, gamma: f64, r: f64, omega: &[f64]) -> (f64, f64) {
    let s = u.polar(r, omega);
    let ln_r = r.ln();
    match which {
        Integral::HardyNumerator => {
            let g = s.gradient.iter().map(|v| v * v).sum::<f64>().sqrt();
            (p * s.log_gradient - gamma * ln_r, g.powf(p))
        }
        Integral::HardyDenominator => (p * s.log_value - (p + gamma) * ln_r, s.value.abs().powf(p)),
        Integral::RellichNumerator => (p * s.log_laplacian - gamma * ln_r, s.laplacian.abs().powf(p)),
        Integral::RellichDenominator => (p * s.log_value - (2.0 * p + gamma) * ln_r, s.value.abs().powf(p)),
    }
}

fn combine(log: f64, val: f64) -> f64 {
    if val == 0.0 {
        0.0
    } else {
        val * log.exp()
    }
}

/// Power `m` with integrand `~ r^{m−1}` near the origin for the denominator
/// of `functional`, ignoring the profile.
fn origin_exponent(u: &TrialFunction, functional: Functional, p: f64, gamma: f64) -> f64 {
    let d = u.dim() as f64;
    let base = p * u.homogeneity() + d - gamma;
    match functional {
        Functional::Hardy => base - p,
        Functional::Rellich => base - 2.0 * p,
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum RadialSampler {
    /// `r = width·√s`, `s ~ Gamma(k, 1)`.
    Gamma { k: f64, width: f64 },
    /// `ln r ~ Laplace(center, 1/rate)`.
    LogLaplace { center: f64, rate: f64 },
}

impl RadialSampler {
    fn for_trial(u: &TrialFunction, functional: Functional, p: f64, gamma: f64) -> Result<Self> {
        let m0 = origin_exponent(u, functional, p, gamma);
        match &u.radial_profile {
            RadialProfile::Gaussian { sigma } => {
                let k = m0 / 2.0;
                if !(k > 0.0) {
                    return Err(Error::OutOfRange(format!(
                        "the {} denominator diverges at the origin (radial exponent {m0})",
                        functional.as_str()
                    )));
                }
                Ok(Self::Gamma {
                    k,
                    width: sigma * u.scale * (2.0 / p).sqrt(),
                })
            }
            RadialProfile::PiecewisePower(prof) => {
                let m_in = m0 - p * prof.rho_in;
                let m_out = m0 - p * prof.rho_out;
                if !(m_in > 0.0) {
                    return Err(Error::OutOfRange(format!(
                        "the {} denominator diverges at the origin (radial exponent {m_in})",
                        functional.as_str()
                    )));
                }
                let rate = if m_out < 0.0 { m_in.min(-m_out) } else { m_in };
                Ok(Self::LogLaplace {
                    center: u.scale.ln(),
                    rate,
                })
            }
            RadialProfile::Custom(_) => Ok(Self::LogLaplace {
                center: u.scale.ln(),
                rate: 1.0,
            }),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Self::Gamma { k, width } => {
                let s: f64 = Gamma::new(k, 1.0).expect("k > 0").sample(rng);
                width * s.sqrt()
            }
            Self::LogLaplace { center, rate } => {
                let v: f64 = rng.random::<f64>() - 0.5;
                (center - v.signum() * (1.0 - 2.0 * v.abs()).ln() / rate).exp()
            }
        }
    }

    fn ln_density(&self, r: f64) -> f64 {
        match *self {
            Self::Gamma { k, width } => {
                let s = (r / width).powi(2);
                (k - 1.0) * s.ln() - s - ln_gamma(k) + (2.0 * s / r).ln()
            }
            Self::LogLaplace { center, rate } => {
                let l = r.ln();
                -rate * (l - center).abs() + (rate / 2.0).ln() - l
            }
        }
    }
}

fn uniform_direction(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    loop {
        let mut n2 = 0.0;
        for o in out.iter_mut() {
            *o = rng.sample(StandardNormal);
            n2 += *o * *o;
        }
        if n2 > 0.0 {
            let n = n2.sqrt();
            out.iter_mut().for_each(|o| *o /= n);
            return;
        }
    }
}

#[derive(Debug, Clone)]
struct Accumulator {
    n: u64,
    bad: u64,
    sum: Vec<f64>,
    cross: Vec<f64>,
}

impl Accumulator {
    fn new(k: usize) -> Self {
        Self {
            n: 0,
            bad: 0,
            sum: vec![0.0; k],
            cross: vec![0.0; k * k],
        }
    }

    fn push(&mut self, v: &[f64]) {
        if v.iter().any(|x| !x.is_finite()) {
            self.bad += 1;
            return;
        }
        self.n += 1;
        let k = v.len();
        for i in 0..k {
            self.sum[i] += v[i];
            for j in 0..k {
                self.cross[i * k + j] += v[i] * v[j];
            }
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        self.n += other.n;
        self.bad += other.bad;
        self.sum.iter_mut().zip(&other.sum).for_each(|(a, b)| *a += b);
        self.cross.iter_mut().zip(&other.cross).for_each(|(a, b)| *a += b);
        self
    }
}

/// Pairwise reduction in a fixed order.
fn tree_reduce(parts: &[Accumulator]) -> Accumulator {
    match parts.len() {
        1 => parts[0].clone(),
        n => {
            let (a, b) = parts.split_at(n / 2);
            tree_reduce(a).merge(&tree_reduce(b))
        }
    }
}

/// Estimates `∫_{ℝ^d} g_i(x) dx` for `k` integrands evaluated jointly.
fn monte_carlo<F>(d: usize, k: usize, sampler: RadialSampler, cfg: &QuadratureConfig, eval: F) -> Result<Joint>
where
    F: Fn(f64, &[f64], &mut [f64]) + Sync,
{
    if cfg.samples == 0 {
        return Err(Error::Usage("need at least one sample".into()));
    }
    let parts = (cfg.partitions.max(1) as u64).min(cfg.samples);
    let per = cfg.samples / parts;
    let rem = cfg.samples % parts;
    let ln_area = sphere_area(d).ln();
    let accs: Vec<Accumulator> = (0..parts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i);
            let n = per + u64::from(i < rem);
            let mut acc = Accumulator::new(k);
            let mut omega = vec![0.0; d];
            let mut vals = vec![0.0; k];
            for _ in 0..n {
                let r = sampler.sample(&mut rng);
                uniform_direction(&mut rng, &mut omega);
                if !(r > 0.0) || !r.is_finite() {
                    acc.bad += 1;
                    continue;
                }
                eval(r, &omega, &mut vals);
                let w = (ln_area + (d as f64 - 1.0) * r.ln() - sampler.ln_density(r)).exp();
                vals.iter_mut().for_each(|v| *v *= w);
                acc.push(&vals);
            }
            acc
        })
        .collect();
    let acc = tree_reduce(&accs);
    let total = acc.n + acc.bad;
    if acc.bad as f64 > MAX_DEGENERATE_FRACTION * total as f64 || acc.n == 0 {
        return Err(Error::DegenerateSamples { bad: acc.bad, total });
    }
    let n = acc.n as f64;
    let mean: Vec<f64> = acc.sum.iter().map(|s| s / n).collect();
    let cov = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (acc.cross[i * k + j] / n - mean[i] * mean[j]) / n)
                .collect()
        })
        .collect();
    Ok(Joint {
        values: mean,
        cov,
        degenerate: acc.bad,
    })
}

fn mc_integrals(u: &TrialFunction, which: &[Integral], p: f64, gamma: f64, cfg: &QuadratureConfig) -> Result<Joint> {
    let sampler = RadialSampler::for_trial(u, which[0].functional(), p, gamma)?;
    monte_carlo(u.dim(), which.len(), sampler, cfg, |r, omega, out| {
        for (o, w) in out.iter_mut().zip(which) {
            let (l, v) = integrand(u, *w, p, gamma, r, omega);
            *o = combine(l, v);
        }
    })
}

// ---------------------------------------------------------------------------
// Deterministic rules
// ---------------------------------------------------------------------------

/// Hyperspherical product rule on `S^{d−1}`: Gauss–Legendre in each polar
/// angle (with its `sin^k` Jacobian), trapezoid with `2n` points in the
/// azimuth. Returns `(directions, weights)`.
pub fn angular_rule(d: usize, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if d == 1 {
        return (vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0]);
    }
    let (gx, gw) = gauss_legendre(n);
    // (partial coordinates, weight, product of sines so far)
    let mut acc: Vec<(Vec<f64>, f64, f64)> = vec![(Vec::new(), 1.0, 1.0)];
    for j in 0..d - 2 {
        let power = (d - 2 - j) as i32;
        let mut next = Vec::with_capacity(acc.len() * n);
        for (c, w, s) in &acc {
            for (x, wx) in gx.iter().zip(&gw) {
                let theta = PI * (x + 1.0) / 2.0;
                let mut c2 = c.clone();
                c2.push(s * theta.cos());
                next.push((c2, w * wx * PI / 2.0 * theta.sin().powi(power), s * theta.sin()));
            }
        }
        acc = next;
    }
    let m = 2 * n;
    let mut dirs = Vec::with_capacity(acc.len() * m);
    let mut weights = Vec::with_capacity(acc.len() * m);
    for (c, w, s) in &acc {
        for i in 0..m {
            let phi = 2.0 * PI * (i as f64 + 0.5) / m as f64;
            let mut c2 = c.clone();
            c2.push(s * phi.cos());
            c2.push(s * phi.sin());
            dirs.push(c2);
            weights.push(w * 2.0 * PI / m as f64);
        }
    }
    (dirs, weights)
}

/// Composite Gauss–Legendre in `ln r` over `[lo, hi]`, split at `breaks`.
/// Returns `(r_j, w_j)` with `Σ w_j g(r_j) ≈ ∫ g(r) dr`.
fn radial_rule(lo: f64, hi: f64, breaks: &[f64], panel_width: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![lo.ln()];
    for b in breaks {
        if *b > lo && *b < hi {
            edges.push(b.ln());
        }
    }
    edges.push(hi.ln());
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let (gx, gw) = gauss_legendre(PANEL_POINTS);
    let mut out = Vec::new();
    for seg in edges.windows(2) {
        let len = seg[1] - seg[0];
        let panels = ((len / panel_width).ceil() as usize).max(4);
        let h = len / panels as f64;
        for k in 0..panels {
            let a = seg[0] + k as f64 * h;
            for (x, w) in gx.iter().zip(&gw) {
                let l = a + h * (x + 1.0) / 2.0;
                let r = l.exp();
                out.push((r, w * h / 2.0 * r));
            }
        }
    }
    out
}

/// Default radial range `[r_min, r_max]` of the deterministic rules, in the
/// unscaled variable.
fn default_range(profile: &RadialProfile, m0: f64, p: f64) -> (f64, f64) {
    match profile {
        RadialProfile::Gaussian { sigma } => {
            let k = (m0 / 2.0).max(1.0);
            (1e-6 * sigma, sigma * (2.0 * (k + 80.0) / p).sqrt())
        }
        RadialProfile::PiecewisePower(prof) => (1e-8, 2.0 * prof.cutoff),
        RadialProfile::Custom(_) => (1e-6, 1e3),
    }
}

/// End corrections `∫_0^{r_min} g` and `∫_{r_max}^∞ g` from local power-law
/// fits of a radial density `g`.
fn end_corrections(g: impl Fn(f64) -> f64, lo: f64, hi: f64, compact: bool) -> Result<f64> {
    let mut extra = 0.0;
    let (g1, g2) = (g(lo), g(2.0 * lo));
    if g1 != 0.0 && g2 != 0.0 {
        let m = (g2 / g1).abs().ln() / 2.0f64.ln();
        if m <= -1.0 {
            return Err(Error::OutOfRange(format!(
                "integrand is not integrable at the origin (local power {m:.3})"
            )));
        }
        extra += g1 * lo / (m + 1.0);
    }
    if !compact {
        let (h1, h2) = (g(hi / 2.0), g(hi));
        if h2.abs() > 1e-300 && h1 != 0.0 {
            let m = (h2 / h1).abs().ln() / 2.0f64.ln();
            if m >= -1.0 {
                return Err(Error::OutOfRange(format!(
                    "integrand is not integrable at infinity (local power {m:.3})"
                )));
            }
            extra -= h2 * hi / (m + 1.0);
        }
    }
    Ok(extra)
}

fn product_once(
    u: &TrialFunction,
    which: &[Integral],
    p: f64,
    gamma: f64,
    range: (f64, f64),
    panel_width: f64,
    angular_nodes: usize,
) -> Result<Vec<f64>> {
    let d = u.dim();
    let (dirs, weights) = angular_rule(d, angular_nodes);
    let breaks: Vec<f64> = u.radial_profile.breakpoints().iter().map(|b| b * u.scale).collect();
    let nodes = radial_rule(range.0, range.1, &breaks, panel_width);
    let shell = |r: f64, w: Integral| -> f64 {
        let lr = (d as f64 - 1.0) * r.ln();
        dirs.iter()
            .zip(&weights)
            .map(|(om, wt)| {
                let (l, v) = integrand(u, w, p, gamma, r, om);
                wt * combine(l + lr, v)
            })
            .sum()
    };
    let compact = u.radial_profile.support().is_some();
    which
        .iter()
        .map(|&w| {
            let body: f64 = nodes
                .par_iter()
                .map(|&(r, wr)| wr * shell(r, w))
                .collect::<Vec<_>>()
                .iter()
                .sum();
            Ok(body + end_corrections(|r| shell(r, w), range.0, range.1, compact)?)
        })
        .collect()
}

fn product_integrals(
    u: &TrialFunction,
    which: &[Integral],
    p: f64,
    gamma: f64,
    cfg: &QuadratureConfig,
) -> Result<Joint> {
    let m0 = origin_exponent(u, which[0].functional(), p, gamma);
    let range = cfg.radial_cutoffs.unwrap_or_else(|| {
        let (a, b) = default_range(&u.radial_profile, m0, p);
        (a * u.scale, b * u.scale)
    });
    let span = (range.1 / range.0).ln();
    let width = span * PANEL_POINTS as f64 / cfg.radial_nodes.max(PANEL_POINTS) as f64;
    let n = cfg.angular_nodes.max(2);
    let coarse = product_once(u, which, p, gamma, range, width, n)?;
    let fine = product_once(u, which, p, gamma, range, width / 2.0, 2 * n)?;
    let k = which.len();
    let mut cov = vec![vec![0.0; k]; k];
    for i in 0..k {
        let delta = (fine[i] - coarse[i]).abs() + 1e-15 * fine[i].abs();
        cov[i][i] = delta * delta;
    }
    Ok(Joint {
        values: fine,
        cov,
        degenerate: 0,
    })
}

// ---------------------------------------------------------------------------
// Factorized radial integrals
// ---------------------------------------------------------------------------

/// `∫_{S^{d−1}} |F(ω)|^p dσ` by the angular product rule, with the change
/// under doubling the resolution as error.
pub fn angular_moment(u: &TrialFunction, p: f64, angular_nodes: usize) -> Estimate {
    let m = |n: usize| {
        let (dirs, w) = angular_rule(u.dim(), n);
        dirs.iter()
            .zip(&w)
            .map(|(om, wt)| wt * u.angular.value(om).abs().powf(p))
            .sum::<f64>()
    };
    let coarse = m(angular_nodes);
    let fine = m(2 * angular_nodes);
    Estimate {
        value: fine,
        error: (fine - coarse).abs(),
    }
}

/// Radial kernel of `which` in the unscaled variable `s`, angular moment
/// removed.
fn radial_kernel(u: &TrialFunction, which: Integral, p: f64, gamma: f64, s: f64) -> Result<(f64, f64)> {
    let d = u.dim() as f64;
    let lam = u.homogeneity();
    let j = u.radial_profile.jet(s);
    let ln_s = s.ln();
    Ok(match which {
        Integral::HardyDenominator => (
            p * j.log_scale + (p * lam - p - gamma + d - 1.0) * ln_s,
            j.v.abs().powf(p),
        ),
        Integral::HardyNumerator => {
            if p != 2.0 {
                return Err(Error::OutOfRange(format!(
                    "the factorized Hardy numerator needs p = 2 (got {p})"
                )));
            }
            (
                2.0 * j.log_scale + (2.0 * lam - gamma + d - 3.0) * ln_s,
                lam * (2.0 * lam + d - 2.0) * j.v * j.v + 2.0 * lam * j.v * j.v1 * s + j.v1 * j.v1 * s * s,
            )
        }
        Integral::RellichNumerator => (
            p * j.log_scale + (p * lam - gamma + d - 1.0) * ln_s,
            (j.v2 + (d - 1.0 + 2.0 * lam) * j.v1 / s).abs().powf(p),
        ),
        Integral::RellichDenominator => (
            p * j.log_scale + (p * lam - 2.0 * p - gamma + d - 1.0) * ln_s,
            j.v.abs().powf(p),
        ),
    })
}

/// One-dimensional radial integral of `which` (unscaled, no angular moment)
/// with its refinement delta.
pub fn radial_integral(
    u: &TrialFunction,
    which: Integral,
    p: f64,
    gamma: f64,
    cfg: &QuadratureConfig,
) -> Result<Estimate> {
    radial_kernel(u, which, p, gamma, 1.0)?;
    let m0 = origin_exponent(u, which.functional(), p, gamma);
    let range = cfg
        .radial_cutoffs
        .map(|(a, b)| (a / u.scale, b / u.scale))
        .unwrap_or_else(|| default_range(&u.radial_profile, m0, p));
    let breaks = u.radial_profile.breakpoints();
    let compact = u.radial_profile.support().is_some();
    let g = |s: f64| {
        let (l, v) = radial_kernel(u, which, p, gamma, s).expect("checked above");
        combine(l, v)
    };
    let once = |width: f64| -> Result<f64> {
        let body: f64 = radial_rule(range.0, range.1, &breaks, width)
            .iter()
            .map(|&(s, w)| w * g(s))
            .sum();
        Ok(body + end_corrections(g, range.0, range.1, compact)?)
    };
    let coarse = once(0.5)?;
    let fine = once(0.25)?;
    Ok(Estimate {
        value: fine,
        error: (fine - coarse).abs() + 1e-15 * fine.abs(),
    })
}

fn factorized_integrals(
    u: &TrialFunction,
    which: &[Integral],
    p: f64,
    gamma: f64,
    cfg: &QuadratureConfig,
) -> Result<(Joint, Vec<Estimate>)> {
    let moment = angular_moment(u, p, cfg.angular_nodes.max(8));
    let d = u.dim();
    let mut values = Vec::new();
    let mut radial = Vec::new();
    for &w in which {
        let r = radial_integral(u, w, p, gamma, cfg)?;
        let scale = u.scale.powf(w.dilation_exponent(d, p, gamma));
        values.push(moment.value * r.value * scale);
        radial.push(r);
    }
    let k = which.len();
    let mut cov = vec![vec![0.0; k]; k];
    for i in 0..k {
        let rel = radial[i].error / radial[i].value.abs().max(1e-300) + moment.error / moment.value.abs().max(1e-300);
        cov[i][i] = (rel * values[i]).powi(2);
    }
    Ok((
        Joint {
            values,
            cov,
            degenerate: 0,
        },
        radial,
    ))
}

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

fn check_dims(u: &TrialFunction, params: &Params) -> Result<()> {
    if u.dim() != params.d {
        return Err(Error::InvalidDimension {
            d: u.dim(),
            reason: "trial dimension does not match the parameters",
        });
    }
    Ok(())
}

fn integrals(u: &TrialFunction, which: &[Integral], params: &Params, cfg: &QuadratureConfig) -> Result<Joint> {
    check_dims(u, params)?;
    match cfg.method {
        Method::MonteCarloImportance => mc_integrals(u, which, params.p, params.gamma, cfg),
        Method::RadialAngularProduct => product_integrals(u, which, params.p, params.gamma, cfg),
        Method::RadialFactorized => Ok(factorized_integrals(u, which, params.p, params.gamma, cfg)?.0),
    }
}

/// Estimate of one of the four integrals with the configured method.
pub fn integrate(u: &TrialFunction, which: Integral, params: &Params, cfg: &QuadratureConfig) -> Result<Estimate> {
    Ok(integrals(u, &[which], params, cfg)?.estimate(0))
}

/// `∫ |∇u|^p |x|^{−γ} dx`.
pub fn hardy_numerator(u: &TrialFunction, params: &Params, cfg: &QuadratureConfig) -> Result<Estimate> {
    integrate(u, Integral::HardyNumerator, params, cfg)
}

/// `∫ |u|^p |x|^{−p−γ} dx`.
pub fn hardy_denominator(u: &TrialFunction, params: &Params, cfg: &QuadratureConfig) -> Result<Estimate> {
    integrate(u, Integral::HardyDenominator, params, cfg)
}

/// `∫ |Δu|^p |x|^{−γ} dx`.
pub fn rellich_numerator(u: &TrialFunction, params: &Params, cfg: &QuadratureConfig) -> Result<Estimate> {
    integrate(u, Integral::RellichNumerator, params, cfg)
}

/// `∫ |u|^p |x|^{−2p−γ} dx`.
pub fn rellich_denominator(u: &TrialFunction, params: &Params, cfg: &QuadratureConfig) -> Result<Estimate> {
    integrate(u, Integral::RellichDenominator, params, cfg)
}

/// Cross-check of [`hardy_denominator`]: the same integral as angular moment
/// times a radial integral, plus the gap in combined error bars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FactorizationCheck {
    pub direct: Estimate,
    pub factorized: Estimate,
    pub gap_in_errors: f64,
}

pub fn hardy_denominator_checked(
    u: &TrialFunction,
    params: &Params,
    cfg: &QuadratureConfig,
) -> Result<FactorizationCheck> {
    let direct = hardy_denominator(u, params, cfg)?;
    let factorized = hardy_denominator(
        u,
        params,
        &QuadratureConfig {
            method: Method::RadialFactorized,
            ..*cfg
        },
    )?;
    let err = direct.error.hypot(factorized.error);
    Ok(FactorizationCheck {
        direct,
        factorized,
        gap_in_errors: (direct.value - factorized.value).abs() / err.max(1e-300),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Quotient exceeds the constant by at least two error bars.
    Holds,
    /// Within two error bars; no claim either way.
    Inconclusive,
    /// Quotient below the constant by more than two error bars.
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientReport {
    pub functional: Functional,
    pub method: Method,
    pub numerator: Estimate,
    pub denominator: Estimate,
    pub quotient: f64,
    pub quotient_error: f64,
    pub reference_constant: f64,
    /// `(quotient − constant) / quotient_error`.
    pub margin: f64,
    pub verdict: Verdict,
    pub degenerate_samples: u64,
    pub heuristic: bool,
}

impl QuotientReport {
    /// No violation beyond two error bars.
    pub fn consistent(&self) -> bool {
        self.margin >= -2.0
    }
}

/// Rayleigh quotient of `u` against the class constant of `params`.
///
/// Refuses trials outside the declared class and inadmissible parameters.
pub fn rayleigh_quotient(
    u: &TrialFunction,
    functional: Functional,
    params: &Params,
    cfg: &QuadratureConfig,
) -> Result<QuotientReport> {
    check_dims(u, params)?;
    if params.class != FunctionClass::General {
        u.check_class(params.class)?;
    }
    let constant = match functional {
        Functional::Hardy => params.hardy_constant()?,
        Functional::Rellich => params.rellich_constant()?,
    };
    if !constant.admissible {
        return Err(Error::OutOfRange(format!(
            "inadmissible parameters for the {} constant: condition residual {}",
            functional.as_str(),
            constant.condition_residual
        )));
    }
    let which = [functional.numerator(), functional.denominator()];
    let (joint, quotient, quotient_error) = if cfg.method == Method::RadialFactorized {
        let (joint, radial) = factorized_integrals(u, &which, params.p, params.gamma, cfg)?;
        let q = radial[0].value / radial[1].value;
        let e = q.abs() * (radial[0].error / radial[0].value.abs() + radial[1].error / radial[1].value.abs());
        (joint, q, e)
    } else {
        let joint = integrals(u, &which, params, cfg)?;
        let (n, dn) = (joint.values[0], joint.values[1]);
        if dn == 0.0 {
            return Err(Error::Domain("denominator vanishes".into()));
        }
        let q = n / dn;
        let rel2 = joint.cov[0][0] / (n * n) + joint.cov[1][1] / (dn * dn) - 2.0 * joint.cov[0][1] / (n * dn);
        (joint.clone(), q, q.abs() * rel2.max(0.0).sqrt())
    };
    let c = constant.value;
    let margin = (quotient - c) / quotient_error.max(1e-15 * quotient.abs().max(1.0));
    let verdict = if margin >= 2.0 {
        Verdict::Holds
    } else if margin < -2.0 {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    Ok(QuotientReport {
        functional,
        method: cfg.method,
        numerator: joint.estimate(0),
        denominator: joint.estimate(1),
        quotient,
        quotient_error,
        reference_constant: c,
        margin,
        verdict,
        degenerate_samples: joint.degenerate,
        heuristic: u.heuristic,
    })
}

/// `∫_{ℝ^d}` against `multiplicity · ∫_{sector}` from the same samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorReduction {
    pub full: Estimate,
    pub sector: Estimate,
    pub multiplicity: f64,
    /// `|multiplicity · sector − full|` in units of its standard error.
    pub gap_in_errors: f64,
}

/// Checks `∫_{ℝ^d} = d!·∫_Ω` (antisymmetric) or `= 2·∫_{Ω₊}` (odd) by Monte
/// Carlo with a sector indicator.
pub fn sector_reduction(
    u: &TrialFunction,
    which: Integral,
    params: &Params,
    cfg: &QuadratureConfig,
) -> Result<SectorReduction> {
    check_dims(u, params)?;
    let (domain, multiplicity) = match params.class {
        FunctionClass::Antisymmetric => (
            SectorDomain::ordered(params.d)?,
            (1..=params.d).product::<usize>() as f64,
        ),
        FunctionClass::Odd => (SectorDomain::positive_half(u.angular.clone()), 2.0),
        FunctionClass::General => {
            return Err(Error::Usage("sector reduction needs the antisym or odd class".into()));
        }
    };
    let (p, gamma) = (params.p, params.gamma);
    let sampler = RadialSampler::for_trial(u, which.functional(), p, gamma)?;
    let joint = monte_carlo(u.dim(), 2, sampler, cfg, |r, omega, out| {
        let (l, v) = integrand(u, which, p, gamma, r, omega);
        out[0] = combine(l, v);
        out[1] = if domain.contains(omega) { out[0] } else { 0.0 };
    })?;
    let m = multiplicity;
    let var = m * m * joint.cov[1][1] + joint.cov[0][0] - 2.0 * m * joint.cov[0][1];
    let gap = (m * joint.values[1] - joint.values[0]).abs();
    Ok(SectorReduction {
        full: joint.estimate(0),
        sector: joint.estimate(1),
        multiplicity,
        gap_in_errors: gap / var.max(0.0).sqrt().max(1e-300),
    })
}

// ---------------------------------------------------------------------------
// Sharpness sweeps
// ---------------------------------------------------------------------------

/// Allowed departure from the unsmoothed bracket per unit collar half-width.
pub const COLLAR_TOLERANCE_PER_DELTA: f64 = 10.0;

/// `[((m−ε)(m−2−ε))², ((m+ε)(m−2+ε))²]` with `m = d/2 + λ`, the range of the
/// unsmoothed Rellich quotient of the power family at `p = 2`.
pub fn rellich_bracket(d: usize, lambda: f64, epsilon: f64) -> (f64, f64) {
    let m = d as f64 / 2.0 + lambda;
    (
        ((m - epsilon) * (m - 2.0 - epsilon)).powi(2),
        ((m + epsilon) * (m - 2.0 + epsilon)).powi(2),
    )
}

/// Rellich quotient of the unsmoothed, untruncated family: the two power
/// laws carry equal weight `1/(2ε)`, so it is the mean of their squared
/// Laplacian factors.
pub fn unsmoothed_rellich_quotient(d: usize, lambda: f64, epsilon: f64) -> f64 {
    let m = d as f64 / 2.0 + lambda;
    let c_in = (m - 2.0 - epsilon) * (m + epsilon);
    let c_out = (m - 2.0 + epsilon) * (m - epsilon);
    (c_in * c_in + c_out * c_out) / 2.0
}

/// Hardy analogue: `(λ + (d−2)/2)² + ε²`.
pub fn unsmoothed_hardy_quotient(d: usize, lambda: f64, epsilon: f64) -> f64 {
    (lambda + (d as f64 - 2.0) / 2.0).powi(2) + epsilon * epsilon
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpnessRow {
    pub functional: Functional,
    pub epsilon: f64,
    pub delta: f64,
    pub quotient: f64,
    pub quotient_error: f64,
    pub lower: f64,
    pub upper: f64,
    pub unsmoothed: f64,
    /// `quotient − unsmoothed`.
    pub collar_correction: f64,
    pub tolerance: f64,
    pub in_bracket: bool,
    pub constant: f64,
    pub heuristic: bool,
}

/// One row of a sharpness sweep at `p = 2`, `γ = 0`, via the factorized
/// radial integrals.
///
/// Rellich rows use the bracket above widened by
/// `COLLAR_TOLERANCE_PER_DELTA·δ`; Hardy rows use `[C_H, C_H + ε²]` with
/// the same widening and are marked heuristic.
pub fn sharpness_row(
    factor: &crate::polynomials::AngularFactor,
    functional: Functional,
    epsilon: f64,
    delta: f64,
) -> Result<SharpnessRow> {
    use crate::trials::{class_of, hardy_near_extremal_family, sharpness_family};
    let d = factor.dim();
    let lambda = factor.homogeneity();
    let params = Params::new(d, 2.0, 0.0, class_of(factor))?;
    let (u, lower, upper, unsmoothed) = match functional {
        Functional::Rellich => {
            let (lo, hi) = rellich_bracket(d, lambda, epsilon);
            (
                sharpness_family(factor, epsilon, delta)?,
                lo,
                hi,
                unsmoothed_rellich_quotient(d, lambda, epsilon),
            )
        }
        Functional::Hardy => {
            let q0 = unsmoothed_hardy_quotient(d, lambda, epsilon);
            let c = q0 - epsilon * epsilon;
            (hardy_near_extremal_family(factor, epsilon, delta)?, c, q0, q0)
        }
    };
    let report = rayleigh_quotient(&u, functional, &params, &QuadratureConfig::factorized())?;
    let tolerance = COLLAR_TOLERANCE_PER_DELTA * delta;
    let q = report.quotient;
    Ok(SharpnessRow {
        functional,
        epsilon,
        delta,
        quotient: q,
        quotient_error: report.quotient_error,
        lower,
        upper,
        unsmoothed,
        collar_correction: q - unsmoothed,
        tolerance,
        in_bracket: q >= lower - tolerance && q <= upper + tolerance,
        constant: report.reference_constant,
        heuristic: report.heuristic,
    })
}
