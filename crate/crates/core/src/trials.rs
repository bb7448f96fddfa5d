//! Separable trial functions `u(x) = F(x/a) ψ(|x|/a)` with analytic
//! gradient and Laplacian, and the symmetry projectors.
//!
//! Values are carried in a scaled form `e^{E}·(moderate number)` so that the
//! power-law families stay finite far from the origin, where `F` and `ψ`
//! individually overflow.

use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::constants::FunctionClass;
use crate::error::{Error, Result};
use crate::polynomials::{AngularFactor, FactorKind};

/// Largest dimension for which `A[u]` enumerates all `d!` permutations.
pub const MAX_ANTISYMMETRIZE_DIM: usize = 8;

/// Tolerance on the sampled projector residual `‖u − A[u]‖`.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Tail mass beyond the outer cutoff `R`, relative to the outer shell.
pub const TAIL_FRACTION: f64 = 1e-4;

/// `ψ = e^{log_scale}·v`, `ψ' = e^{log_scale}·v1`, `ψ'' = e^{log_scale}·v2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialJet {
    pub log_scale: f64,
    pub v: f64,
    pub v1: f64,
    pub v2: f64,
}

impl RadialJet {
    const ZERO: Self = Self {
        log_scale: 0.0,
        v: 0.0,
        v1: 0.0,
        v2: 0.0,
    };
}

/// Two power laws `r^{−ρ_in}`, `r^{−ρ_out}` joined on the collar
/// `[1−δ, 1+δ]` and cut off smoothly on `[R, 2R]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerProfile {
    pub rho_in: f64,
    pub rho_out: f64,
    pub delta: f64,
    pub cutoff: f64,
}

/// Quintic smoothstep `S(τ) = 6τ⁵ − 15τ⁴ + 10τ³` and its two derivatives.
fn smoothstep(tau: f64) -> (f64, f64, f64) {
    if tau <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if tau >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let t2 = tau * tau;
        (
            t2 * tau * (10.0 + tau * (-15.0 + 6.0 * tau)),
            30.0 * t2 * (1.0 - tau) * (1.0 - tau),
            60.0 * tau * (1.0 - tau) * (1.0 - 2.0 * tau),
        )
    }
}

impl PowerProfile {
    /// `ρ(r)`, `ρ'(r)`, `ρ''(r)`.
    pub fn exponent(&self, r: f64) -> (f64, f64, f64) {
        let w = 2.0 * self.delta;
        let (s, s1, s2) = smoothstep((r - (1.0 - self.delta)) / w);
        let jump = self.rho_out - self.rho_in;
        (self.rho_in + jump * s, jump * s1 / w, jump * s2 / (w * w))
    }

    /// Cutoff `χ = 1 − S((r−R)/R)` and its derivatives.
    fn cutoff(&self, r: f64) -> (f64, f64, f64) {
        let big = self.cutoff;
        let (s, s1, s2) = smoothstep((r - big) / big);
        (1.0 - s, -s1 / big, -s2 / (big * big))
    }

    fn jet(&self, r: f64) -> RadialJet {
        if r >= 2.0 * self.cutoff {
            return RadialJet::ZERO;
        }
        let (rho, rho1, rho2) = self.exponent(r);
        let ln = r.ln();
        let g = -rho1 * ln - rho / r;
        let g1 = -rho2 * ln - 2.0 * rho1 / r + rho / (r * r);
        let h = g * g + g1;
        let (c, c1, c2) = self.cutoff(r);
        RadialJet {
            log_scale: -rho * ln,
            v: c,
            v1: g * c + c1,
            v2: h * c + 2.0 * g * c1 + c2,
        }
    }
}

pub type ProfileFn = dyn Fn(f64) -> [f64; 3] + Send + Sync;

/// A user radial profile returning `[ψ(r), ψ'(r), ψ''(r)]`.
pub struct CustomProfile {
    pub label: String,
    jet: Box<ProfileFn>,
}

#[derive(Clone)]
pub enum RadialProfile {
    Gaussian { sigma: f64 },
    PiecewisePower(PowerProfile),
    Custom(Arc<CustomProfile>),
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian { sigma } => write!(f, "Gaussian(σ={sigma})"),
            Self::PiecewisePower(p) => write!(f, "{p:?}"),
            Self::Custom(c) => write!(f, "Custom({})", c.label),
        }
    }
}

impl RadialProfile {
    pub fn custom(label: impl Into<String>, jet: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(CustomProfile {
            label: label.into(),
            jet: Box::new(jet),
        }))
    }

    pub fn jet(&self, r: f64) -> RadialJet {
        match self {
            Self::Gaussian { sigma } => {
                let s2 = sigma * sigma;
                RadialJet {
                    log_scale: -r * r / (2.0 * s2),
                    v: 1.0,
                    v1: -r / s2,
                    v2: r * r / (s2 * s2) - 1.0 / s2,
                }
            }
            Self::PiecewisePower(p) => p.jet(r),
            Self::Custom(c) => {
                let [v, v1, v2] = (c.jet)(r);
                RadialJet {
                    log_scale: 0.0,
                    v,
                    v1,
                    v2,
                }
            }
        }
    }

    /// Radii where the profile changes form (unscaled).
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::PiecewisePower(p) => vec![1.0 - p.delta, 1.0 + p.delta, p.cutoff, 2.0 * p.cutoff],
            _ => Vec::new(),
        }
    }

    /// Outer edge of the support (unscaled), if compact.
    pub fn support(&self) -> Option<f64> {
        match self {
            Self::PiecewisePower(p) => Some(2.0 * p.cutoff),
            _ => None,
        }
    }
}

/// `u`, `∇u`, `Δu` at one point, each as `e^{log}·(unit part)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledDerivatives {
    pub log_value: f64,
    pub value: f64,
    pub log_gradient: f64,
    pub gradient: Vec<f64>,
    pub log_laplacian: f64,
    pub laplacian: f64,
}

fn scaled(log: f64, v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * log.exp()
    }
}

/// `u(x) = F(x/a)·ψ(|x|/a)`.
#[derive(Debug, Clone)]
pub struct TrialFunction {
    pub angular: AngularFactor,
    pub radial_profile: RadialProfile,
    pub class_tag: FunctionClass,
    /// Dilation `a`.
    pub scale: f64,
    /// Set for families whose near-extremality is conjectural.
    pub heuristic: bool,
    pub label: String,
}

/// Class a factor naturally belongs to.
pub fn class_of(factor: &AngularFactor) -> FunctionClass {
    match factor.kind() {
        FactorKind::Vandermonde => FunctionClass::Antisymmetric,
        FactorKind::OddLinear => FunctionClass::Odd,
        FactorKind::Custom => {
            let l = factor.homogeneity();
            if l.fract() == 0.0 && (l as i64) % 2 == 1 {
                FunctionClass::Odd
            } else {
                FunctionClass::General
            }
        }
    }
}

impl TrialFunction {
    pub fn new(angular: AngularFactor, radial_profile: RadialProfile, class_tag: FunctionClass) -> Self {
        let label = format!("{angular:?}·{radial_profile:?}");
        Self {
            angular,
            radial_profile,
            class_tag,
            scale: 1.0,
            heuristic: false,
            label,
        }
    }

    pub fn dim(&self) -> usize {
        self.angular.dim()
    }

    pub fn homogeneity(&self) -> f64 {
        self.angular.homogeneity()
    }

    /// `x ↦ u(x/a)`.
    pub fn dilate(&self, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::OutOfRange(format!("dilation must be positive (got {a})")));
        }
        let mut out = self.clone();
        out.scale *= a;
        Ok(out)
    }

    /// Polar evaluation at `x = r ω`, `|ω| = 1`.
    pub fn polar(&self, r: f64, omega: &[f64]) -> ScaledDerivatives {
        let a = self.scale;
        let s = r / a;
        let lam = self.homogeneity();
        let d = self.dim() as f64;
        let jet = self.radial_profile.jet(s);
        let f = self.angular.value(omega);
        let grad_f = self.angular.gradient(omega);
        let ln_s = s.ln();
        let base = jet.log_scale + lam * ln_s;
        let gradient = grad_f
            .iter()
            .zip(omega)
            .map(|(g, w)| jet.v * g + jet.v1 * s * f * w)
            .collect();
        ScaledDerivatives {
            log_value: base,
            value: f * jet.v,
            log_gradient: base - ln_s - a.ln(),
            gradient,
            log_laplacian: base - 2.0 * a.ln(),
            laplacian: f * (jet.v2 + (d - 1.0 + 2.0 * lam) * jet.v1 / s),
        }
    }

    fn split(x: &[f64]) -> (f64, Vec<f64>) {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        (r, x.iter().map(|v| v / r).collect())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let (r, w) = Self::split(x);
        if r == 0.0 {
            return self.value_at_origin();
        }
        let p = self.polar(r, &w);
        scaled(p.log_value, p.value)
    }

    fn value_at_origin(&self) -> f64 {
        if self.homogeneity() > 0.0 {
            0.0
        } else {
            let j = self.radial_profile.jet(0.0);
            self.angular.value(&vec![0.0; self.dim()]) * scaled(j.log_scale, j.v)
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (r, w) = Self::split(x);
        let p = self.polar(r, &w);
        p.gradient.iter().map(|g| scaled(p.log_gradient, *g)).collect()
    }

    pub fn laplacian(&self, x: &[f64]) -> f64 {
        let (r, w) = Self::split(x);
        let p = self.polar(r, &w);
        scaled(p.log_laplacian, p.laplacian)
    }

    /// Largest sampled `|u − P[u]|` relative to `max |u|`, where `P` is the
    /// projector of `class` (antisymmetrization or odd part).
    pub fn symmetry_residual(&self, class: FunctionClass, points: usize, seed: u64) -> Result<f64> {
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        let mut size = 0.0f64;
        let u = |y: &[f64]| self.value(y);
        for _ in 0..points {
            let x: Vec<f64> = (0..d)
                .map(|_| self.scale * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let v = u(&x);
            let proj = match class {
                FunctionClass::General => v,
                FunctionClass::Antisymmetric => antisymmetrize(u, &x)?,
                FunctionClass::Odd => odd_project(u, &x),
            };
            worst = worst.max((v - proj).abs());
            size = size.max(v.abs());
        }
        Ok(if size > 0.0 { worst / size } else { worst })
    }

    /// Errors with [`Error::SymmetryViolation`] unless `u` lies in `class`.
    pub fn check_class(&self, class: FunctionClass) -> Result<()> {
        let residual = self.symmetry_residual(class, 100, 0x5eed)?;
        if residual < SYMMETRY_TOL {
            Ok(())
        } else {
            Err(Error::SymmetryViolation { residual })
        }
    }
}

/// `F(x)·exp(−|x|²/(2σ²))`.
pub fn gaussian_trial(factor: &AngularFactor, sigma: f64) -> Result<TrialFunction> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::OutOfRange(format!("σ must be positive (got {sigma})")));
    }
    Ok(TrialFunction::new(
        factor.clone(),
        RadialProfile::Gaussian { sigma },
        class_of(factor),
    ))
}

fn check_family_args(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::OutOfRange(format!("need 0 < ε < 1 (got {epsilon})")));
    }
    if delta == 0.0 {
        return Err(Error::NonSmooth);
    }
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::OutOfRange(format!("need 0 < δ < 0.5 (got {delta})")));
    }
    Ok(())
}

/// `R` with `R^{−2ε} = TAIL_FRACTION`.
fn cutoff_radius(epsilon: f64) -> f64 {
    TAIL_FRACTION.powf(-1.0 / (2.0 * epsilon)).max(4.0)
}

fn power_family(factor: &AngularFactor, center: f64, epsilon: f64, delta: f64, label: &str) -> Result<TrialFunction> {
    check_family_args(epsilon, delta)?;
    let profile = PowerProfile {
        rho_in: center - epsilon,
        rho_out: center + epsilon,
        delta,
        cutoff: cutoff_radius(epsilon),
    };
    let mut u = TrialFunction::new(factor.clone(), RadialProfile::PiecewisePower(profile), class_of(factor));
    u.label = format!("{label}({factor:?}, ε={epsilon}, δ={delta})");
    Ok(u)
}

/// `F(x)|x|^{−ρ(|x|)}` with `ρ = d/2 + λ − 2 ∓ ε` inside/outside the unit
/// sphere: the near-extremal Rellich family at `p = 2`.
pub fn sharpness_family(factor: &AngularFactor, epsilon: f64, delta: f64) -> Result<TrialFunction> {
    let d = factor.dim() as f64;
    let center = d / 2.0 + factor.homogeneity() - 2.0;
    power_family(factor, center, epsilon, delta, "rellich-sharpness")
}

/// `F(x)|x|^{−ρ(|x|)}` with `ρ = λ + (d−2)/2 ∓ ε`: a Hardy analogue of the
/// Rellich family at `p = 2`. Heuristic.
pub fn hardy_near_extremal_family(factor: &AngularFactor, epsilon: f64, delta: f64) -> Result<TrialFunction> {
    let d = factor.dim() as f64;
    let center = factor.homogeneity() + (d - 2.0) / 2.0;
    let mut u = power_family(factor, center, epsilon, delta, "hardy-near-extremal")?;
    u.heuristic = true;
    Ok(u)
}

/// Sign of a permutation by inversion count.
fn parity(perm: &[usize]) -> f64 {
    let inversions = (0..perm.len())
        .flat_map(|i| (i + 1..perm.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| perm[i] > perm[j])
        .count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `A[u](x) = (1/d!) Σ_σ sgn(σ) u(σx)`.
pub fn antisymmetrize(u: impl Fn(&[f64]) -> f64, x: &[f64]) -> Result<f64> {
    let d = x.len();
    if d > MAX_ANTISYMMETRIZE_DIM {
        return Err(Error::Budget {
            d,
            max: MAX_ANTISYMMETRIZE_DIM,
        });
    }
    let mut y = vec![0.0; d];
    let mut total = 0.0;
    let mut count = 0usize;
    for perm in (0..d).permutations(d) {
        for (yi, &j) in y.iter_mut().zip(&perm) {
            *yi = x[j];
        }
        total += parity(&perm) * u(&y);
        count += 1;
    }
    Ok(total / count as f64)
}

/// `O[u](x) = (u(x) − u(−x))/2`.
pub fn odd_project(u: impl Fn(&[f64]) -> f64, x: &[f64]) -> f64 {
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    (u(x) - u(&neg)) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomials::laplacian_fd;

    fn fd_gradient(u: &TrialFunction, x: &[f64]) -> Vec<f64> {
        let h = 1e-6 * x.iter().map(|v| v * v).sum::<f64>().sqrt();
        (0..x.len())
            .map(|k| {
                let mut a = x.to_vec();
                let mut b = x.to_vec();
                a[k] += h;
                b[k] -= h;
                (u.value(&a) - u.value(&b)) / (2.0 * h)
            })
            .collect()
    }

    fn check_derivatives(u: &TrialFunction, points: &[Vec<f64>]) {
        for x in points {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let g = u.gradient(x);
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = gn + u.value(x).abs() / r;
            for (a, b) in g.iter().zip(fd_gradient(u, x)) {
                assert!((a - b).abs() <= 1e-6 * scale, "{}: grad {a} vs {b} at {x:?}", u.label);
            }
            let lap = u.laplacian(x);
            let fd = laplacian_fd(|y| u.value(y), x);
            let scale = lap.abs() + gn / r + u.value(x).abs() / (r * r);
            assert!(
                (lap - fd).abs() <= 1e-4 * scale,
                "{}: lap {lap} vs {fd} at {x:?}",
                u.label
            );
        }
    }

    fn random_points(d: usize, n: usize, seed: u64, spread: f64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (0..d).map(|_| spread * rng.sample::<f64, _>(StandardNormal)).collect())
            .collect()
    }

    #[test]
    fn gaussian_gradient_example() {
        let u = gaussian_trial(&AngularFactor::vandermonde(2).unwrap(), 1.0).unwrap();
        let g = u.gradient(&[1.0, 2.0]);
        let e = (-2.5f64).exp();
        // ∇u = e^{-r²/2}(∇𝒱 − 𝒱 x)
        assert!((g[0] - e * (-1.0 - 1.0)).abs() < 1e-15);
        assert!((g[1] - e * (1.0 - 2.0)).abs() < 1e-15);
        check_derivatives(&u, &[vec![1.0, 2.0]]);
    }

    #[test]
    fn laplacian_on_zero_set_is_cross_term() {
        let f = AngularFactor::vandermonde(3).unwrap();
        let u = gaussian_trial(&f, 1.3).unwrap();
        let x = [0.5, 0.5, -1.0];
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let psi1_over_r = -(-r2 / (2.0 * 1.69)).exp() / 1.69;
        let g = f.gradient(&x);
        let cross = 2.0 * psi1_over_r * g.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        assert_eq!(u.value(&x), 0.0);
        assert!((u.laplacian(&x) - cross).abs() < 1e-14);
    }

    #[test]
    fn shipped_trials_pass_fd_checks() {
        for d in 2..=4 {
            let v = AngularFactor::vandermonde(d).unwrap();
            let h = AngularFactor::odd_linear(d).unwrap();
            let pts = random_points(d, 100, d as u64, 1.0);
            for f in [&v, &h] {
                check_derivatives(&gaussian_trial(f, 0.8).unwrap(), &pts);
                check_derivatives(&gaussian_trial(f, 1.0).unwrap().dilate(1.7).unwrap(), &pts);
                // stay off the collar and the cutoff, where the blend has
                // O(ε/δ²) curvature and second differences lose accuracy
                let s = sharpness_family(f, 0.2, 0.1).unwrap();
                let far: Vec<Vec<f64>> = pts
                    .iter()
                    .map(|x| {
                        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                        let target = if r < 0.9 { r.max(0.05) } else { r.max(1.1) + 0.05 };
                        x.iter().map(|v| v * target / r).collect()
                    })
                    .collect();
                check_derivatives(&s, &far);
                check_derivatives(&hardy_near_extremal_family(f, 0.3, 0.2).unwrap(), &far);
            }
        }
    }

    #[test]
    fn collar_and_cutoff_derivatives() {
        let f = AngularFactor::vandermonde(3).unwrap();
        let u = sharpness_family(&f, 0.5, 0.2).unwrap();
        let big = match &u.radial_profile {
            RadialProfile::PiecewisePower(p) => p.cutoff,
            _ => unreachable!(),
        };
        let w = [0.2f64, -0.5, 0.8];
        let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        let dir: Vec<f64> = w.iter().map(|v| v / n).collect();
        let pts: Vec<Vec<f64>> = [0.85, 0.95, 1.0, 1.1, 1.17, 1.3 * big, 1.8 * big]
            .iter()
            .map(|r| dir.iter().map(|v| v * r).collect())
            .collect();
        check_derivatives(&u, &pts);
        let out: Vec<f64> = dir.iter().map(|v| v * 2.5 * big).collect();
        assert_eq!(u.value(&out), 0.0);
        assert_eq!(u.laplacian(&out), 0.0);
    }

    #[test]
    fn power_laplacian_closed_form_off_collar() {
        for (f, d) in [
            (AngularFactor::vandermonde(3).unwrap(), 3.0),
            (AngularFactor::odd_linear(4).unwrap(), 4.0),
        ] {
            let lam = f.homogeneity();
            let u = sharpness_family(&f, 0.1, 0.05).unwrap();
            let (rho_in, rho_out) = match &u.radial_profile {
                RadialProfile::PiecewisePower(p) => (p.rho_in, p.rho_out),
                _ => unreachable!(),
            };
            let n = f.dim();
            for (x, rho) in [
                (vec![0.1, 0.3, -0.2, 0.05][..n].to_vec(), rho_in),
                (vec![1.4, -2.0, 0.7, 0.3][..n].to_vec(), rho_out),
            ] {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let expect = rho * (rho + 2.0 - d - 2.0 * lam) * f.value(&x) * r.powf(-rho - 2.0);
                let got = u.laplacian(&x);
                assert!((got - expect).abs() <= 1e-8 * expect.abs(), "{got} vs {expect}");
            }
        }
    }

    #[test]
    fn family_exponents_and_errors() {
        let f = AngularFactor::vandermonde(3).unwrap();
        let u = sharpness_family(&f, 0.1, 0.01).unwrap();
        let RadialProfile::PiecewisePower(p) = u.radial_profile else {
            unreachable!()
        };
        assert!((p.rho_in - 2.4).abs() < 1e-15 && (p.rho_out - 2.6).abs() < 1e-15);
        assert!((p.cutoff.powf(-0.2) - TAIL_FRACTION).abs() < 1e-12);
        let o = sharpness_family(&AngularFactor::odd_linear(3).unwrap(), 0.1, 0.01).unwrap();
        let RadialProfile::PiecewisePower(p) = o.radial_profile else {
            unreachable!()
        };
        assert!((p.rho_in - 0.4).abs() < 1e-15);
        assert_eq!(sharpness_family(&f, 0.1, 0.0).unwrap_err(), Error::NonSmooth);
        assert!(matches!(sharpness_family(&f, 1.5, 0.1), Err(Error::OutOfRange(_))));
        assert!(matches!(sharpness_family(&f, 0.1, 0.6), Err(Error::OutOfRange(_))));
        let h = hardy_near_extremal_family(&f, 0.1, 0.01).unwrap();
        assert!(h.heuristic);
    }

    #[test]
    fn families_are_in_their_class() {
        for d in 2..=5 {
            let v = AngularFactor::vandermonde(d).unwrap();
            let h = AngularFactor::odd_linear(d).unwrap();
            for u in [
                gaussian_trial(&v, 1.0).unwrap(),
                sharpness_family(&v, 0.2, 0.05).unwrap(),
                hardy_near_extremal_family(&v, 0.2, 0.05).unwrap(),
            ] {
                assert!(u.symmetry_residual(FunctionClass::Antisymmetric, 100, 1).unwrap() < SYMMETRY_TOL);
                assert!(u.check_class(FunctionClass::Antisymmetric).is_ok());
            }
            for u in [
                gaussian_trial(&h, 1.0).unwrap(),
                sharpness_family(&h, 0.2, 0.05).unwrap(),
            ] {
                assert!(u.symmetry_residual(FunctionClass::Odd, 100, 1).unwrap() < SYMMETRY_TOL);
            }
            let radial = gaussian_trial(&AngularFactor::unit(d).unwrap(), 1.0).unwrap();
            assert!(matches!(
                radial.check_class(FunctionClass::Antisymmetric),
                Err(Error::SymmetryViolation { .. })
            ));
        }
    }

    #[test]
    fn projector_examples() {
        let x = [0.3, -1.2];
        let a = antisymmetrize(|y| y[0], &x).unwrap();
        assert!((a - (x[0] - x[1]) / 2.0).abs() < 1e-15);
        let u = |y: &[f64]| y[0] * y[1].powi(2) + y[2].sin() + 0.3 * y[1];
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
            let once = antisymmetrize(u, &x).unwrap();
            let twice = antisymmetrize(|y| antisymmetrize(u, y).unwrap(), &x).unwrap();
            assert!((once - twice).abs() < 1e-12);
            assert_eq!(odd_project(|y| y.iter().map(|v| v * v).sum(), &x), 0.0);
        }
        assert!(matches!(
            antisymmetrize(|_| 0.0, &[0.0; 9]),
            Err(Error::Budget { d: 9, max: 8 })
        ));
    }
}
