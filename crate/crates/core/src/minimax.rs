//! The scalar optimization behind the vector-field Hardy certificate.
//!
//! With `T(x) = αx/|x|^p − β∇F/(F|x|^{p−2})` the pointwise certificate
//! reduces to a function of the single quantity `t = (|x||∇F|/F)² ≥ λ²`:
//!
//! ```text
//! f(t; α, β) = α(d−p−γ) + β(p−2+γ)λ + βt − (p−1)(α² − 2αβλ + β²t)^{p/(2(p−1))}
//! ```
//!
//! The best constant is `max_{α,β} min_{t≥λ²} f`. The inner minimum is
//! analytic (f is convex in t for p ≥ 2); the outer maximum has a closed
//! form which this module also recovers numerically.

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{hardy_from_lambda, Params};
use crate::error::{Error, Result};

/// `(d, p, γ, λ)` for one certificate optimization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateProblem {
    pub d: usize,
    pub p: f64,
    pub gamma: f64,
    pub lambda: f64,
}

impl CertificateProblem {
    pub fn new(d: usize, p: f64, gamma: f64, lambda: f64) -> Result<Self> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(Error::OutOfRange(format!(
                "the certificate optimization needs p >= 2 (got {p})"
            )));
        }
        if d == 0 || lambda < 0.0 {
            return Err(Error::OutOfRange(format!(
                "need d >= 1 and λ >= 0 (d = {d}, λ = {lambda})"
            )));
        }
        Ok(Self { d, p, gamma, lambda })
    }

    pub fn from_params(params: &Params) -> Result<Self> {
        Self::new(params.d, params.p, params.gamma, params.lambda())
    }

    fn is_linear_branch(&self) -> bool {
        self.p == 2.0
    }

    /// `(2/p)^p [ (p−2+γ)λ + ((d−p−γ+2λ)/2)² ]^{p/2}`.
    pub fn closed_form_value(&self) -> f64 {
        hardy_from_lambda(self.d, self.p, self.gamma, self.lambda).0
    }

    /// `A = (p−2+γ)λ + ((d−p−γ+2λ)/2)²`.
    fn curvature_term(&self) -> f64 {
        let m = self.shift();
        (self.p - 2.0 + self.gamma) * self.lambda + m * m
    }

    /// `(d−p−γ+2λ)/2`, the ratio `α₀/β₀` at the optimum.
    fn shift(&self) -> f64 {
        (self.d as f64 - self.p - self.gamma + 2.0 * self.lambda) / 2.0
    }
}

/// `α² − 2αβλ + β²t`.
fn radicand(t: f64, alpha: f64, beta: f64, lambda: f64) -> f64 {
    alpha * alpha - 2.0 * alpha * beta * lambda + beta * beta * t
}

/// `f(t; α, β, γ)`.
pub fn f_certificate(t: f64, alpha: f64, beta: f64, problem: &CertificateProblem) -> Result<f64> {
    let CertificateProblem { d, p, gamma, lambda } = *problem;
    let r = radicand(t, alpha, beta, lambda);
    if r < 0.0 || t < 0.0 {
        return Err(Error::Domain(format!(
            "α² − 2αβλ + β²t = {r:.6e} < 0 at t = {t}, α = {alpha}, β = {beta}"
        )));
    }
    Ok(
        alpha * (d as f64 - p - gamma) + beta * (p - 2.0 + gamma) * lambda + beta * t
            - (p - 1.0) * r.powf(p / (2.0 * (p - 1.0))),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TMinimizer {
    /// Stationary point of `t ↦ f(t)`; may lie below `λ²`.
    pub unconstrained: f64,
    /// `max(t₀, λ²)`, the minimizer over the admissible range.
    pub clamped: f64,
}

/// `t₀ = ((pβ/2)^{2(p−1)/(p−2)} − α² + 2αβλ)/β²`.
pub fn t_minimizer(alpha: f64, beta: f64, problem: &CertificateProblem) -> Result<TMinimizer> {
    if problem.is_linear_branch() {
        return Err(Error::Domain(
            "p = 2: f is linear in t, minimum at t = λ² when β ≤ 1 (see inner_minimum)".into(),
        ));
    }
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("t₀ needs β > 0 (got {beta})")));
    }
    let p = problem.p;
    let r0 = (p * beta / 2.0).powf(2.0 * (p - 1.0) / (p - 2.0));
    let t0 = (r0 - alpha * alpha + 2.0 * alpha * beta * problem.lambda) / (beta * beta);
    Ok(TMinimizer {
        unconstrained: t0,
        clamped: t0.max(problem.lambda * problem.lambda),
    })
}

/// `|α−λβ| ≤ (pβ/2)^{(p−1)/(p−2)}`, i.e. `t₀ ≥ λ²`. For `p = 2` a pair is
/// feasible when the inner minimum is finite (`β ≤ 1`).
pub fn is_feasible(alpha: f64, beta: f64, problem: &CertificateProblem) -> bool {
    if beta < 0.0 {
        return false;
    }
    if problem.is_linear_branch() {
        return beta <= 1.0;
    }
    let p = problem.p;
    (alpha - problem.lambda * beta).abs() <= (p * beta / 2.0).powf((p - 1.0) / (p - 2.0))
}

/// `G(α, β) = f(t₀; α, β)` for feasible pairs with `p > 2`.
pub fn envelope_g(alpha: f64, beta: f64, problem: &CertificateProblem) -> f64 {
    let CertificateProblem { d, p, gamma, lambda } = *problem;
    let q = p / (p - 2.0);
    alpha * (d as f64 - p - gamma) + beta * (p - 2.0 + gamma) * lambda + 2.0 * alpha * lambda
        - alpha * alpha / beta
        - beta.powf(q) * (p / 2.0).powf(q) * (p / 2.0 - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnerMinimum {
    pub t: f64,
    pub value: f64,
}

/// `min_{t ≥ λ²} f(t; α, β)`, analytically.
///
/// Returns `-∞` when the minimum is unbounded (`p = 2`, `β > 1`).
pub fn inner_minimum(alpha: f64, beta: f64, problem: &CertificateProblem) -> Result<InnerMinimum> {
    if beta < 0.0 {
        return Err(Error::Domain(format!("β must be nonnegative (got {beta})")));
    }
    let lambda2 = problem.lambda * problem.lambda;
    if problem.is_linear_branch() {
        if beta > 1.0 {
            return Ok(InnerMinimum {
                t: f64::INFINITY,
                value: f64::NEG_INFINITY,
            });
        }
        return Ok(InnerMinimum {
            t: lambda2,
            value: f_certificate(lambda2, alpha, beta, problem)?,
        });
    }
    if beta == 0.0 {
        // constant in t
        return Ok(InnerMinimum {
            t: lambda2,
            value: f_certificate(lambda2, alpha, 0.0, problem)?,
        });
    }
    let tm = t_minimizer(alpha, beta, problem)?;
    let value = if tm.unconstrained >= lambda2 {
        // evaluate with the radicand known exactly: R(t₀) = (pβ/2)^{2(p−1)/(p−2)}
        let p = problem.p;
        let r0 = (p * beta / 2.0).powf(2.0 * (p - 1.0) / (p - 2.0));
        alpha * (problem.d as f64 - p - problem.gamma)
            + beta * (p - 2.0 + problem.gamma) * problem.lambda
            + (r0 - alpha * alpha + 2.0 * alpha * beta * problem.lambda) / beta
            - (p - 1.0) * r0.powf(p / (2.0 * (p - 1.0)))
    } else {
        f_certificate(lambda2, alpha, beta, problem)?
    };
    Ok(InnerMinimum { t: tm.clamped, value })
}

/// A certificate `(α, β)` together with the problem it was built for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertificateParams {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub d: usize,
    pub p: f64,
    pub gamma: f64,
    pub feasible: bool,
}

impl CertificateParams {
    pub fn problem(&self) -> CertificateProblem {
        CertificateProblem {
            d: self.d,
            p: self.p,
            gamma: self.gamma,
            lambda: self.lambda,
        }
    }
}

/// `β₀ = A^{(p−2)/2}(2/p)^{p−1}`, `α₀ = ((d−p−γ+2λ)/2) β₀`.
///
/// At `p = 2` this gives `β₀ = 1`, which is also the optimum of the linear
/// branch.
pub fn closed_form_optimum(problem: &CertificateProblem) -> Result<CertificateParams> {
    let p = problem.p;
    let a = problem.curvature_term();
    if a < 0.0 {
        return Err(Error::OutOfRange(format!(
            "no admissible certificate: (p−2+γ)λ + ((d−p−γ+2λ)/2)² = {a} < 0"
        )));
    }
    let beta = a.powf((p - 2.0) / 2.0) * (2.0 / p).powf(p - 1.0);
    let alpha = problem.shift() * beta;
    let separation = (alpha - problem.lambda * beta).abs();
    let expected = (problem.d as f64 - p - problem.gamma).abs() / 2.0 * beta;
    debug_assert!((separation - expected).abs() <= 1e-9 * (1.0 + expected));
    Ok(CertificateParams {
        alpha,
        beta,
        lambda: problem.lambda,
        d: problem.d,
        p,
        gamma: problem.gamma,
        feasible: is_feasible(alpha, beta, problem),
    })
}

// ---------------------------------------------------------------------------
// Numeric max–min
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    pub starts: usize,
    /// The search box is `box_scale` times the closed-form optimum.
    pub box_scale: f64,
    pub max_iterations: usize,
    pub restarts: usize,
    pub ftol: f64,
    pub xtol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            starts: 16,
            box_scale: 3.0,
            max_iterations: 4000,
            restarts: 3,
            ftol: 1e-15,
            xtol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimaxResult {
    pub alpha_star: f64,
    pub beta_star: f64,
    pub t_star: f64,
    pub value_numeric: f64,
    pub value_closed_form: f64,
    pub gap: f64,
    pub converged: bool,
    pub evaluations: usize,
    /// Finite-difference Hessian of `G` at the closed-form optimum (`p > 2`).
    pub hessian: Option<[[f64; 2]; 2]>,
    pub hessian_negative_definite: Option<bool>,
}

#[derive(Debug, Clone, Copy)]
struct SearchBox {
    alpha: (f64, f64),
    beta: (f64, f64),
}

impl SearchBox {
    fn project(&self, x: [f64; 2]) -> ([f64; 2], f64) {
        let a = x[0].clamp(self.alpha.0, self.alpha.1);
        let b = x[1].clamp(self.beta.0, self.beta.1);
        let dist = (x[0] - a).abs() + (x[1] - b).abs();
        ([a, b], dist)
    }
}

struct Simplex {
    points: [[f64; 2]; 3],
    values: [f64; 3],
}

#[derive(Debug, Clone, Copy)]
struct LocalResult {
    x: [f64; 2],
    value: f64,
    converged: bool,
    evaluations: usize,
}

/// Nelder–Mead maximization of `h` on a box (projection plus linear penalty).
fn nelder_mead_max(
    h: &dyn Fn([f64; 2]) -> f64,
    start: [f64; 2],
    step: [f64; 2],
    bx: &SearchBox,
    cfg: &SearchConfig,
) -> LocalResult {
    let penalized = |x: [f64; 2]| {
        let (y, dist) = bx.project(x);
        let v = h(y);
        if dist > 0.0 {
            v - 1e3 * dist * (1.0 + v.abs())
        } else {
            v
        }
    };
    let mut evaluations = 0usize;
    let mut eval = |x: [f64; 2]| {
        evaluations += 1;
        penalized(x)
    };
    let mut s = Simplex {
        points: [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]],
        values: [0.0; 3],
    };
    for i in 0..3 {
        s.values[i] = eval(s.points[i]);
    }
    let mut converged = false;
    for _ in 0..cfg.max_iterations {
        // order: best (largest) first
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| s.values[b].total_cmp(&s.values[a]));
        s.points = idx.map(|i| s.points[i]);
        s.values = idx.map(|i| s.values[i]);

        let spread = (s.values[0] - s.values[2]).abs();
        let diam = (1..3)
            .map(|i| {
                (s.points[i][0] - s.points[0][0])
                    .abs()
                    .max((s.points[i][1] - s.points[0][1]).abs())
            })
            .fold(0.0, f64::max);
        let scale = 1.0 + s.points[0][0].abs().max(s.points[0][1].abs());
        if spread.is_finite() && spread <= cfg.ftol * (1.0 + s.values[0].abs()) && diam <= cfg.xtol * scale {
            converged = true;
            break;
        }

        let centroid = [
            (s.points[0][0] + s.points[1][0]) / 2.0,
            (s.points[0][1] + s.points[1][1]) / 2.0,
        ];
        let along = |c: f64| {
            [
                centroid[0] + c * (s.points[2][0] - centroid[0]),
                centroid[1] + c * (s.points[2][1] - centroid[1]),
            ]
        };
        let xr = along(-1.0);
        let fr = eval(xr);
        if fr > s.values[0] {
            let xe = along(-2.0);
            let fe = eval(xe);
            if fe > fr {
                s.points[2] = xe;
                s.values[2] = fe;
            } else {
                s.points[2] = xr;
                s.values[2] = fr;
            }
        } else if fr > s.values[1] {
            s.points[2] = xr;
            s.values[2] = fr;
        } else {
            let (xc, fc) = if fr > s.values[2] {
                let xc = along(-0.5);
                (xc, eval(xc))
            } else {
                let xc = along(0.5);
                (xc, eval(xc))
            };
            if fc > s.values[2].max(fr) {
                s.points[2] = xc;
                s.values[2] = fc;
            } else {
                for i in 1..3 {
                    s.points[i] = [
                        s.points[0][0] + 0.5 * (s.points[i][0] - s.points[0][0]),
                        s.points[0][1] + 0.5 * (s.points[i][1] - s.points[0][1]),
                    ];
                    s.values[i] = eval(s.points[i]);
                }
            }
        }
    }
    let best = (0..3).max_by(|&a, &b| s.values[a].total_cmp(&s.values[b])).unwrap();
    let (x, _) = bx.project(s.points[best]);
    LocalResult {
        x,
        value: h(x),
        converged,
        evaluations,
    }
}

fn fd_hessian(g: impl Fn(f64, f64) -> f64, a: f64, b: f64) -> [[f64; 2]; 2] {
    let ha = 1e-4 * (1.0 + a.abs());
    let hb = 1e-4 * b.abs().max(1e-3);
    let f0 = g(a, b);
    let faa = (g(a + ha, b) - 2.0 * f0 + g(a - ha, b)) / (ha * ha);
    let fbb = (g(a, b + hb) - 2.0 * f0 + g(a, b - hb)) / (hb * hb);
    let fab = (g(a + ha, b + hb) - g(a + ha, b - hb) - g(a - ha, b + hb) + g(a - ha, b - hb)) / (4.0 * ha * hb);
    [[faa, fab], [fab, fbb]]
}

/// Multi-start derivative-free search for `max_{α,β} min_{t≥λ²} f`.
///
/// Starts lie on a log-spaced β grid with `α = λβ`; the box is
/// `box_scale` times the closed-form optimum. The best start wins, ties
/// broken by the smaller gap to the closed form.
pub fn numeric_minimax(problem: &CertificateProblem, cfg: &SearchConfig) -> Result<MinimaxResult> {
    let optimum = closed_form_optimum(problem)?;
    let closed = problem.closed_form_value();
    let s = cfg.box_scale.max(1.0);
    let alpha_half = s * optimum.alpha.abs() + 1.0;
    let bx = SearchBox {
        alpha: (-alpha_half, alpha_half),
        beta: (0.0, s * optimum.beta.max(1e-6)),
    };
    let h = |x: [f64; 2]| {
        inner_minimum(x[0], x[1], problem)
            .map(|m| m.value)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let step = [0.1 * (bx.alpha.1 - bx.alpha.0), 0.1 * (bx.beta.1 - bx.beta.0)];
    let n = cfg.starts.max(1);
    let (b_lo, b_hi) = (bx.beta.1 * 1e-3, bx.beta.1 * 0.9);
    let starts: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let frac = if n == 1 { 0.5 } else { i as f64 / (n - 1) as f64 };
            let b = b_lo * (b_hi / b_lo).powf(frac);
            [(problem.lambda * b).clamp(bx.alpha.0, bx.alpha.1), b]
        })
        .collect();

    let results: Vec<LocalResult> = starts
        .par_iter()
        .map(|&x0| {
            let mut r = nelder_mead_max(&h, x0, step, &bx, cfg);
            let mut total = r.evaluations;
            for _ in 0..cfg.restarts {
                let shrink = [step[0] * 1e-3, step[1] * 1e-3];
                let again = nelder_mead_max(&h, r.x, shrink, &bx, cfg);
                total += again.evaluations;
                let improved = again.value > r.value;
                if improved {
                    r = again;
                }
                if !improved || (again.value - r.value).abs() <= cfg.ftol * (1.0 + r.value.abs()) {
                    r.converged = r.converged || again.converged;
                    break;
                }
            }
            r.evaluations = total;
            r
        })
        .collect();

    let evaluations = results.iter().map(|r| r.evaluations).sum();
    let best = results
        .iter()
        .copied()
        .reduce(|a, b| {
            let tie = (a.value - b.value).abs() <= 1e-12 * (1.0 + a.value.abs());
            if tie {
                if (b.value - closed).abs() < (a.value - closed).abs() {
                    b
                } else {
                    a
                }
            } else if b.value > a.value {
                b
            } else {
                a
            }
        })
        .expect("at least one start");

    let t_star = inner_minimum(best.x[0], best.x[1], problem)?.t;
    let (hessian, negdef) = if problem.is_linear_branch() {
        (None, None)
    } else {
        let hm = fd_hessian(|a, b| envelope_g(a, b, problem), optimum.alpha, optimum.beta);
        let det = hm[0][0] * hm[1][1] - hm[0][1] * hm[1][0];
        (Some(hm), Some(hm[0][0] < 0.0 && det > 0.0))
    };
    Ok(MinimaxResult {
        alpha_star: best.x[0],
        beta_star: best.x[1],
        t_star,
        value_numeric: best.value,
        value_closed_form: closed,
        gap: (best.value - closed).abs(),
        converged: best.converged,
        evaluations,
        hessian,
        hessian_negative_definite: negdef,
    })
}
