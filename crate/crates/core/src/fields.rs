//! The certificate vector field `T(x) = αx/|x|^p − β∇F/(F|x|^{p−2})` on the
//! symmetry domains, its divergence and the pointwise Hardy certificate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::constants::Params;
use crate::error::{Error, Result};
use crate::polynomials::{AngularFactor, FactorKind};

/// Distance kept from `∂Ω` and from the origin when sampling interior points.
pub const INTERIOR_TUBE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DomainKind {
    /// `Ω = {x₁ < x₂ < … < x_d}`, where `𝒱_d > 0`.
    OrderedSector,
    /// `Ω₊ = {h(x) > 0}` for an odd factor `h`.
    PositiveHalf,
}

#[derive(Debug, Clone)]
pub struct SectorDomain {
    pub kind: DomainKind,
    pub angular_factor: AngularFactor,
}

impl SectorDomain {
    pub fn ordered(d: usize) -> Result<Self> {
        Ok(Self {
            kind: DomainKind::OrderedSector,
            angular_factor: AngularFactor::vandermonde(d)?,
        })
    }

    pub fn positive_half(factor: AngularFactor) -> Self {
        Self {
            kind: DomainKind::PositiveHalf,
            angular_factor: factor,
        }
    }

    /// The natural domain of a factor: `Ω` for the Vandermonde, `{F > 0}`
    /// otherwise.
    pub fn for_factor(factor: &AngularFactor) -> Self {
        let kind = match factor.kind() {
            FactorKind::Vandermonde => DomainKind::OrderedSector,
            _ => DomainKind::PositiveHalf,
        };
        Self {
            kind,
            angular_factor: factor.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.angular_factor.dim()
    }

    /// Interior membership. Points of `Ω` have `𝒱_d > 0`; the converse
    /// holds only for `d = 2`.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self.kind {
            DomainKind::OrderedSector => x.windows(2).all(|w| w[0] < w[1]),
            DomainKind::PositiveHalf => self.angular_factor.value(x) > 0.0,
        }
    }

    /// Lower bound on the distance from `x` to `∂Ω`.
    pub fn boundary_distance(&self, x: &[f64]) -> f64 {
        match self.kind {
            DomainKind::OrderedSector => x
                .windows(2)
                .map(|w| (w[1] - w[0]) / std::f64::consts::SQRT_2)
                .fold(f64::INFINITY, f64::min),
            DomainKind::PositiveHalf => {
                let g = self.angular_factor.gradient(x);
                let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                if gn == 0.0 {
                    f64::INFINITY
                } else {
                    self.angular_factor.value(x) / gn
                }
            }
        }
    }

    /// `n` standard-normal points folded into the domain (sorting for `Ω`,
    /// reflection `x ↦ −x` for `Ω₊`), rejecting a tube of width `tube`
    /// around `∂Ω` and the ball of radius `tube` at the origin.
    pub fn sample_interior(&self, n: usize, seed: u64, tube: f64) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let mut x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            match self.kind {
                DomainKind::OrderedSector => x.sort_by(f64::total_cmp),
                DomainKind::PositiveHalf => {
                    if self.angular_factor.value(&x) < 0.0 {
                        x.iter_mut().for_each(|v| *v = -*v);
                    }
                }
            }
            let r = norm(&x);
            if r > tube && self.contains(&x) && self.boundary_distance(&x) > tube {
                out.push(x);
            }
        }
        out
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Frame {
    r: f64,
    f: f64,
    grad: Vec<f64>,
}

fn frame(x: &[f64], beta: f64, factor: &AngularFactor) -> Result<Frame> {
    if x.len() != factor.dim() {
        return Err(Error::InvalidDimension {
            d: x.len(),
            reason: "point dimension does not match the factor",
        });
    }
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::SingularPoint("origin"));
    }
    let f = factor.value(x);
    if beta != 0.0 && f == 0.0 {
        return Err(Error::SingularPoint("zero set of the angular factor"));
    }
    let grad = if beta != 0.0 {
        factor.gradient(x)
    } else {
        vec![0.0; x.len()]
    };
    Ok(Frame { r, f, grad })
}

/// `T(x) = αx/|x|^p − β∇F(x)/(F(x)|x|^{p−2})`.
pub fn field_t(x: &[f64], alpha: f64, beta: f64, params: &Params, factor: &AngularFactor) -> Result<Vec<f64>> {
    let fr = frame(x, beta, factor)?;
    let p = params.p;
    let a = alpha / fr.r.powf(p);
    let b = if beta != 0.0 {
        beta / (fr.f * fr.r.powf(p - 2.0))
    } else {
        0.0
    };
    Ok(x.iter().zip(&fr.grad).map(|(xi, gi)| a * xi - b * gi).collect())
}

/// `div T = (α(d−p) + β(p−2)λ)/|x|^p + β|∇F|²/(F²|x|^{p−2})` for harmonic,
/// `λ`-homogeneous `F`.
pub fn divergence_t(x: &[f64], alpha: f64, beta: f64, params: &Params, factor: &AngularFactor) -> Result<f64> {
    let fr = frame(x, beta, factor)?;
    let p = params.p;
    let d = x.len() as f64;
    let lambda = factor.homogeneity();
    let mut div = (alpha * (d - p) + beta * (p - 2.0) * lambda) / fr.r.powf(p);
    if beta != 0.0 {
        let g2 = dot(&fr.grad, &fr.grad);
        div += beta * g2 / (fr.f * fr.f * fr.r.powf(p - 2.0));
    }
    Ok(div)
}

/// `|x|^p [div T − (p−1)|T|^{p/(p−1)} − γ⟨x, T⟩/|x|²]`.
///
/// At the closed-form optimum this is bounded below by the Hardy constant
/// of the class throughout the domain.
pub fn pointwise_certificate(x: &[f64], alpha: f64, beta: f64, params: &Params, factor: &AngularFactor) -> Result<f64> {
    let p = params.p;
    if p < 2.0 {
        return Err(Error::OutOfRange(format!("certificate needs p >= 2 (got {p})")));
    }
    if p == 2.0 {
        return certificate_p2(x, alpha, beta, params, factor);
    }
    let t = field_t(x, alpha, beta, params, factor)?;
    let div = divergence_t(x, alpha, beta, params, factor)?;
    let r = norm(x);
    let tn = norm(&t);
    let xt = dot(x, &t);
    Ok(r.powf(p) * (div - (p - 1.0) * tn.powf(p / (p - 1.0)) - params.gamma * xt / (r * r)))
}

// At p = 2 the |∇F/F|² parts of div T and |T|² have coefficients β and β²
// and both grow like 1/dist(x, ∂Ω)²; they are combined before rounding so
// the optimum β = 1 cancels them exactly.
fn certificate_p2(x: &[f64], alpha: f64, beta: f64, params: &Params, factor: &AngularFactor) -> Result<f64> {
    let fr = frame(x, beta, factor)?;
    let d = x.len() as f64;
    let r2 = fr.r * fr.r;
    let (s, g) = if beta != 0.0 {
        let q: Vec<f64> = fr.grad.iter().map(|v| v / fr.f).collect();
        (dot(x, &q), dot(&q, &q))
    } else {
        (0.0, 0.0)
    };
    // r²·div T = α(d−2) + β r² g,  r²·|T|² = α² − 2αβ s + β² r² g,
    // r²·⟨x,T⟩/r² = α − β s
    Ok(
        alpha * (d - 2.0) + (beta - beta * beta) * r2 * g - alpha * alpha + 2.0 * alpha * beta * s
            - params.gamma * (alpha - beta * s),
    )
}

/// Central-difference divergence of `field_t`, for cross-checks.
pub fn divergence_fd(
    x: &[f64],
    alpha: f64,
    beta: f64,
    params: &Params,
    factor: &AngularFactor,
    rel_step: f64,
) -> Result<f64> {
    let h = rel_step * norm(x);
    let mut y = x.to_vec();
    let mut div = 0.0;
    for k in 0..x.len() {
        y[k] = x[k] + h;
        let plus = field_t(&y, alpha, beta, params, factor)?[k];
        y[k] = x[k] - h;
        let minus = field_t(&y, alpha, beta, params, factor)?[k];
        y[k] = x[k];
        div += (plus - minus) / (2.0 * h);
    }
    Ok(div)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::FunctionClass;
    use crate::minimax::{closed_form_optimum, f_certificate, CertificateProblem};

    fn params(d: usize, p: f64, gamma: f64, class: FunctionClass) -> Params {
        Params::new(d, p, gamma, class).unwrap()
    }

    #[test]
    fn field_example_d2() {
        let f = AngularFactor::vandermonde(2).unwrap();
        let pr = params(2, 2.0, 0.0, FunctionClass::Antisymmetric);
        let t = field_t(&[1.0, 2.0], 1.0, 1.0, &pr, &f).unwrap();
        assert!((t[0] - 1.2).abs() < 1e-15 && (t[1] + 0.6).abs() < 1e-15);
        let div = divergence_t(&[1.0, 2.0], 0.0, 1.0, &pr, &f).unwrap();
        assert!((div - 2.0).abs() < 1e-14);
    }

    #[test]
    fn beta_zero_is_radial_field() {
        let f = AngularFactor::vandermonde(3).unwrap();
        let pr = params(3, 3.0, 0.0, FunctionClass::Antisymmetric);
        let x = [0.3, -1.0, 0.3];
        // β = 0 does not need F ≠ 0
        let t = field_t(&x, 2.0, 0.0, &pr, &f).unwrap();
        let r = norm(&x);
        for k in 0..3 {
            assert!((t[k] - 2.0 * x[k] / r.powi(3)).abs() < 1e-14);
        }
        let div = divergence_t(&x, 2.0, 0.0, &pr, &f).unwrap();
        assert!((div - 2.0 * 0.0 / r.powi(3)).abs() < 1e-14);
        assert!(matches!(field_t(&x, 2.0, 1.0, &pr, &f), Err(Error::SingularPoint(_))));
        assert!(matches!(
            field_t(&[0.0; 3], 2.0, 0.0, &pr, &f),
            Err(Error::SingularPoint(_))
        ));
    }

    #[test]
    fn scale_covariance() {
        let f = AngularFactor::vandermonde(3).unwrap();
        let pr = params(3, 3.0, 0.0, FunctionClass::Antisymmetric);
        let x = [-0.4, 0.1, 1.3];
        let t1 = field_t(&x, 0.7, 0.3, &pr, &f).unwrap();
        let a = 2.5;
        let xa: Vec<f64> = x.iter().map(|v| a * v).collect();
        let t2 = field_t(&xa, 0.7, 0.3, &pr, &f).unwrap();
        for k in 0..3 {
            assert!((t2[k] - a.powf(1.0 - 3.0) * t1[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn divergence_matches_finite_differences() {
        for (factor, class) in [
            (AngularFactor::vandermonde(3).unwrap(), FunctionClass::Antisymmetric),
            (AngularFactor::odd_linear(3).unwrap(), FunctionClass::Odd),
        ] {
            let dom = SectorDomain::for_factor(&factor);
            for p in [2.0, 3.0, 4.0] {
                let pr = params(3, p, 0.0, class);
                for x in dom.sample_interior(50, 11, 1e-2) {
                    let a = divergence_t(&x, 0.8, 0.4, &pr, &factor).unwrap();
                    let b = divergence_fd(&x, 0.8, 0.4, &pr, &factor, 1e-5).unwrap();
                    assert!((a - b).abs() <= 1e-5 * a.abs().max(1e-3), "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn euler_identity_of_the_field() {
        for factor in [
            AngularFactor::vandermonde(4).unwrap(),
            AngularFactor::odd_linear(4).unwrap(),
        ] {
            let lam = factor.homogeneity();
            let dom = SectorDomain::for_factor(&factor);
            let pr = params(4, 3.0, 0.0, FunctionClass::Odd);
            for x in dom.sample_interior(1000, 5, INTERIOR_TUBE) {
                let t = field_t(&x, 1.1, 0.6, &pr, &factor).unwrap();
                let r = norm(&x);
                let lhs = dot(&x, &t) * r;
                let scale = 1.1 + 0.6 * factor.schwarz_ratio(&x).unwrap().sqrt();
                assert!((lhs - (1.1 - 0.6 * lam)).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn certificate_matches_scalar_function() {
        let factor = AngularFactor::vandermonde(3).unwrap();
        let dom = SectorDomain::for_factor(&factor);
        let pr = params(3, 3.0, 1.0, FunctionClass::Antisymmetric);
        let prob = CertificateProblem::from_params(&pr).unwrap();
        let c = closed_form_optimum(&prob).unwrap();
        for x in dom.sample_interior(200, 9, INTERIOR_TUBE) {
            let a = pointwise_certificate(&x, c.alpha, c.beta, &pr, &factor).unwrap();
            let t = factor.schwarz_ratio(&x).unwrap();
            let b = f_certificate(t, c.alpha, c.beta, &prob).unwrap();
            assert!((a - b).abs() <= 1e-10 * (1.0 + c.beta * t), "{a} vs {b}");
            assert!(a >= prob.closed_form_value() - 1e-8);
        }
    }

    #[test]
    fn p2_grouping_matches_vector_form() {
        for (factor, class) in [
            (AngularFactor::vandermonde(3).unwrap(), FunctionClass::Antisymmetric),
            (AngularFactor::odd_linear(3).unwrap(), FunctionClass::Odd),
        ] {
            let dom = SectorDomain::for_factor(&factor);
            for gamma in [-1.0, 0.0, 1.0] {
                let pr = params(3, 2.0, gamma, class);
                for x in dom.sample_interior(100, 4, 1e-1) {
                    let (a, b) = (0.9, 0.7);
                    let t = field_t(&x, a, b, &pr, &factor).unwrap();
                    let div = divergence_t(&x, a, b, &pr, &factor).unwrap();
                    let r2 = dot(&x, &x);
                    let vector = r2 * (div - dot(&t, &t) - gamma * dot(&x, &t) / r2);
                    let grouped = pointwise_certificate(&x, a, b, &pr, &factor).unwrap();
                    let scale = 1.0 + factor.schwarz_ratio(&x).unwrap();
                    assert!((vector - grouped).abs() <= 1e-12 * scale, "{vector} vs {grouped}");
                }
            }
        }
    }

    #[test]
    fn membership_agrees_with_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let half = SectorDomain::positive_half(AngularFactor::odd_linear(4).unwrap());
        let d2 = SectorDomain::ordered(2).unwrap();
        let dom = SectorDomain::ordered(4).unwrap();
        for _ in 0..500 {
            let x: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
            assert_eq!(half.contains(&x), x.iter().sum::<f64>() > 0.0);
            assert_eq!(d2.contains(&x[..2]), d2.angular_factor.value(&x[..2]) > 0.0);
            // 𝒱_d is positive on every even-permutation image of Ω, so only
            // one direction holds for d ≥ 3
            if dom.contains(&x) {
                assert!(dom.angular_factor.value(&x) > 0.0);
            }
        }
        for x in dom.sample_interior(100, 2, 1e-3) {
            assert!(dom.boundary_distance(&x) > 1e-3 && norm(&x) > 1e-3);
        }
    }
}
