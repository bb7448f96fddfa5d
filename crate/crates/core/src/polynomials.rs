//! Angular factors: the Vandermonde determinant, the odd linear form, and
//! user-supplied homogeneous harmonic polynomials.
//!
//! All of them share three properties used everywhere else in the crate:
//! they are homogeneous of a known degree `λ` (so `Σ x_i ∂_i F = λ F`),
//! they are harmonic, and their sign determines the symmetry sector.

use std::fmt;
use std::sync::{Arc, OnceLock};

use itertools::Itertools;
use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest dimension for which the expanded (d!-term) Vandermonde is built.
pub const MAX_EXPANSION_DIM: usize = 6;

/// Largest dimension supported by the exact rational backend.
pub const MAX_EXACT_DIM: usize = 4;

/// Step used by [`laplacian_fd`], relative to `|x|`.
pub const FD_LAPLACIAN_REL_STEP: f64 = 1e-4;

/// Documented tolerance of the finite-difference Laplacian, relative to the
/// second-derivative scale returned by [`second_derivative_scale`].
pub const FD_LAPLACIAN_TOL: f64 = 1e-4;

// ---------------------------------------------------------------------------
// Sparse multivariate polynomials
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial<T> {
    pub exponents: Vec<u32>,
    pub coeff: T,
}

/// A sparse polynomial with generic coefficients; used with `f64` for the
/// floating-point expansion backend and with `BigRational` for exact checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    dim: usize,
    terms: Vec<Monomial<T>>,
}

fn scale_by_count<T: Clone + Zero>(c: &T, n: u32) -> T {
    (0..n).fold(T::zero(), |acc, _| acc + c.clone())
}

fn sign_of(perm: &[usize]) -> i64 {
    let inversions = (0..perm.len())
        .flat_map(|i| (i + 1..perm.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| perm[i] > perm[j])
        .count();
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

impl<T> Polynomial<T>
where
    T: Clone + Zero + One + std::ops::Neg<Output = T> + std::ops::Mul<Output = T>,
{
    /// Leibniz expansion of `det[x_i^j]`: one monomial `sgn σ ∏ x_i^{σ(i)}` per
    /// permutation.
    pub fn vandermonde(d: usize) -> Self {
        let terms = (0..d)
            .permutations(d)
            .map(|perm| {
                let coeff = if sign_of(&perm) > 0 { T::one() } else { -T::one() };
                Monomial {
                    exponents: perm.iter().map(|&e| e as u32).collect(),
                    coeff,
                }
            })
            .collect();
        Self { dim: d, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Monomial<T>] {
        &self.terms
    }

    pub fn eval(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for m in &self.terms {
            let mut v = m.coeff.clone();
            for (xi, &e) in x.iter().zip(&m.exponents) {
                for _ in 0..e {
                    v = v * xi.clone();
                }
            }
            acc = acc + v;
        }
        acc
    }

    pub fn derivative(&self, k: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|m| m.exponents[k] > 0)
            .map(|m| {
                let mut exponents = m.exponents.clone();
                let e = exponents[k];
                exponents[k] -= 1;
                Monomial {
                    exponents,
                    coeff: scale_by_count(&m.coeff, e),
                }
            })
            .collect();
        Self { dim: self.dim, terms }
    }
}

struct Expansion {
    gradient: Vec<Polynomial<f64>>,
    second: Vec<Polynomial<f64>>,
}

fn expansion(d: usize) -> &'static Expansion {
    static CACHE: OnceLock<Vec<Expansion>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        (2..=MAX_EXPANSION_DIM)
            .map(|d| {
                let v = Polynomial::<f64>::vandermonde(d);
                let gradient: Vec<_> = (0..d).map(|k| v.derivative(k)).collect();
                let second = gradient.iter().enumerate().map(|(k, g)| g.derivative(k)).collect();
                Expansion { gradient, second }
            })
            .collect()
    });
    &cache[d - 2]
}

// ---------------------------------------------------------------------------
// Vandermonde determinant
// ---------------------------------------------------------------------------

fn require_vandermonde_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension {
            d,
            reason: "the Vandermonde determinant needs d >= 2",
        });
    }
    Ok(())
}

/// `∏_{i<j} (x_j − x_i)`.
pub fn vandermonde_value(x: &[f64]) -> Result<f64> {
    require_vandermonde_dim(x.len())?;
    Ok(vandermonde_product(x))
}

fn vandermonde_product(x: &[f64]) -> f64 {
    let mut v = 1.0;
    for j in 1..x.len() {
        for i in 0..j {
            v *= x[j] - x[i];
        }
    }
    v
}

fn has_distinct_coordinates(x: &[f64]) -> bool {
    (0..x.len()).all(|i| (i + 1..x.len()).all(|j| x[i] != x[j]))
}

/// Gradient of the Vandermonde determinant.
///
/// Off the coincidence set this uses `∂_k V = V Σ_{j≠k} 1/(x_k − x_j)`; on it
/// the expanded polynomial (d ≤ 6) or a leave-one-factor-out product.
pub fn vandermonde_gradient(x: &[f64]) -> Result<Vec<f64>> {
    require_vandermonde_dim(x.len())?;
    let mut out = vec![0.0; x.len()];
    vandermonde_gradient_into(x, &mut out);
    Ok(out)
}

fn vandermonde_gradient_into(x: &[f64], out: &mut [f64]) {
    let d = x.len();
    if has_distinct_coordinates(x) {
        let v = vandermonde_product(x);
        for k in 0..d {
            let s: f64 = (0..d).filter(|&j| j != k).map(|j| 1.0 / (x[k] - x[j])).sum();
            out[k] = v * s;
        }
    } else if d <= MAX_EXPANSION_DIM {
        let e = expansion(d);
        for (o, g) in out.iter_mut().zip(&e.gradient) {
            *o = g.eval(x);
        }
    } else {
        gradient_leave_one_out(x, out);
    }
}

/// `∂_k V = Σ_{j≠k} ∏_{pairs ≠ {k,j}} (x_b − x_a)`, valid everywhere.
fn gradient_leave_one_out(x: &[f64], out: &mut [f64]) {
    let d = x.len();
    for k in 0..d {
        let mut total = 0.0;
        for j in (0..d).filter(|&j| j != k) {
            let (skip_a, skip_b) = (k.min(j), k.max(j));
            // derivative of (x_b − x_a) w.r.t. x_k is +1 when k = b, −1 when k = a
            let mut prod = if k == skip_b { 1.0 } else { -1.0 };
            for b in 1..d {
                for a in 0..b {
                    if (a, b) != (skip_a, skip_b) {
                        prod *= x[b] - x[a];
                    }
                }
            }
            total += prod;
        }
        out[k] = total;
    }
}

/// `Σ x_i ∂_i V − λ V` with `λ = d(d−1)/2`.
pub fn euler_residual(x: &[f64]) -> Result<f64> {
    AngularFactor::vandermonde(x.len())?.euler_residual(x)
}

/// Laplacian of the Vandermonde determinant from the expanded polynomial's
/// second derivatives. Zero up to rounding.
pub fn laplacian_residual(x: &[f64]) -> Result<f64> {
    let d = x.len();
    require_vandermonde_dim(d)?;
    if d > MAX_EXPANSION_DIM {
        return Err(Error::UnsupportedDimension {
            d,
            backend: "polynomial expansion",
            max: MAX_EXPANSION_DIM,
        });
    }
    Ok(expansion(d).second.iter().map(|p| p.eval(x)).sum())
}

/// Central second differences of `f`, with step
/// `FD_LAPLACIAN_REL_STEP · max(|x|, 1)`.
pub fn laplacian_fd(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = FD_LAPLACIAN_REL_STEP * norm.max(1.0);
    let f0 = f(x);
    let mut y = x.to_vec();
    let mut total = 0.0;
    for k in 0..x.len() {
        y[k] = x[k] + h;
        let fp = f(&y);
        y[k] = x[k] - h;
        let fm = f(&y);
        y[k] = x[k];
        total += (fp - 2.0 * f0 + fm) / (h * h);
    }
    total
}

/// Magnitude scale of the second derivatives of a degree-`λ` homogeneous
/// function: `1 + (λ−1)·‖∇F‖₁ / |x|`.
pub fn second_derivative_scale(factor: &AngularFactor, x: &[f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let g1: f64 = factor.gradient(x).iter().map(|g| g.abs()).sum();
    1.0 + (factor.homogeneity() - 1.0).abs() * g1 / norm.max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------------------
// Angular factors
// ---------------------------------------------------------------------------

pub type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
pub type GradientFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// A user-supplied homogeneous harmonic factor.
pub struct CustomFactor {
    pub label: String,
    pub dim: usize,
    pub homogeneity: f64,
    value: Box<ValueFn>,
    gradient: Box<GradientFn>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorKind {
    Vandermonde,
    OddLinear,
    Custom,
}

/// The angular part `F` of a separable function `F(x)ψ(|x|)`.
#[derive(Clone)]
pub enum AngularFactor {
    /// `𝒱_d(x) = ∏_{i<j}(x_j − x_i)`, degree `d(d−1)/2`.
    Vandermonde {
        d: usize,
    },
    /// `H_d(x) = Σ x_k`, degree 1.
    OddLinear {
        d: usize,
    },
    Custom(Arc<CustomFactor>),
}

impl fmt::Debug for AngularFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Vandermonde { d } => write!(f, "Vandermonde(d={d})"),
            Self::OddLinear { d } => write!(f, "OddLinear(d={d})"),
            Self::Custom(c) => write!(f, "Custom({}, d={}, λ={})", c.label, c.dim, c.homogeneity),
        }
    }
}

/// Number of random points used to screen a custom factor.
const CUSTOM_CHECK_POINTS: usize = 256;

impl AngularFactor {
    pub fn vandermonde(d: usize) -> Result<Self> {
        require_vandermonde_dim(d)?;
        Ok(Self::Vandermonde { d })
    }

    pub fn odd_linear(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension {
                d,
                reason: "dimension must be at least 1",
            });
        }
        Ok(Self::OddLinear { d })
    }

    /// Wraps user callables after checking, at random points drawn from
    /// `seed`, that the Euler identity holds with the declared degree and
    /// that the finite-difference Laplacian vanishes.
    pub fn custom<V, G>(
        label: impl Into<String>,
        dim: usize,
        homogeneity: f64,
        value: V,
        gradient: G,
        seed: u64,
    ) -> Result<Self>
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::InvalidDimension {
                d: dim,
                reason: "dimension must be at least 1",
            });
        }
        let factor = Self::Custom(Arc::new(CustomFactor {
            label: label.into(),
            dim,
            homogeneity,
            value: Box::new(value),
            gradient: Box::new(gradient),
        }));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..CUSTOM_CHECK_POINTS {
            let x: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let v = factor.value(&x);
            let g = factor.gradient(&x);
            let scale = 1.0 + v.abs() + g.iter().zip(&x).map(|(a, b)| (a * b).abs()).sum::<f64>();
            let euler = factor.euler_residual(&x)?;
            if euler.abs() > 1e-8 * scale {
                return Err(Error::FactorCheck(format!(
                    "Euler identity fails with λ = {homogeneity}: residual {euler:.3e}"
                )));
            }
            let lap = laplacian_fd(|y| factor.value(y), &x);
            if lap.abs() > FD_LAPLACIAN_TOL * second_derivative_scale(&factor, &x) * 10.0 {
                return Err(Error::FactorCheck(format!(
                    "factor is not harmonic: Laplacian {lap:.3e}"
                )));
            }
        }
        Ok(factor)
    }

    /// The linear form `⟨a, x⟩` as a custom odd factor of degree 1.
    pub fn linear_form(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().all(|c| *c == 0.0) {
            return Err(Error::FactorCheck("linear form is identically zero".into()));
        }
        let dim = coeffs.len();
        let a = coeffs.clone();
        Self::custom(
            "linear-form",
            dim,
            1.0,
            move |x| x.iter().zip(&coeffs).map(|(xi, ci)| xi * ci).sum(),
            move |_, out| out.copy_from_slice(&a),
            0,
        )
    }

    /// The constant function 1 (degree 0), used for unrestricted radial trials.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::custom(
            "unit",
            dim,
            0.0,
            |_| 1.0,
            |_, out| out.iter_mut().for_each(|o| *o = 0.0),
            0,
        )
    }

    pub fn kind(&self) -> FactorKind {
        match self {
            Self::Vandermonde { .. } => FactorKind::Vandermonde,
            Self::OddLinear { .. } => FactorKind::OddLinear,
            Self::Custom(_) => FactorKind::Custom,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Vandermonde { d } | Self::OddLinear { d } => *d,
            Self::Custom(c) => c.dim,
        }
    }

    /// Homogeneity order `λ`.
    pub fn homogeneity(&self) -> f64 {
        match self {
            Self::Vandermonde { d } => (d * (d - 1) / 2) as f64,
            Self::OddLinear { .. } => 1.0,
            Self::Custom(c) => c.homogeneity,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            Self::Vandermonde { .. } => vandermonde_product(x),
            Self::OddLinear { .. } => x.iter().sum(),
            Self::Custom(c) => (c.value)(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.gradient_into(x, &mut out);
        out
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            Self::Vandermonde { .. } => vandermonde_gradient_into(x, out),
            Self::OddLinear { .. } => out.iter_mut().for_each(|o| *o = 1.0),
            Self::Custom(c) => (c.gradient)(x, out),
        }
    }

    /// `ΔF(x)`: analytic for the built-in factors, finite differences for
    /// custom ones.
    pub fn laplacian(&self, x: &[f64]) -> Result<f64> {
        match self {
            Self::Vandermonde { d } if *d <= MAX_EXPANSION_DIM => laplacian_residual(x),
            Self::Vandermonde { .. } | Self::Custom(_) => Ok(laplacian_fd(|y| self.value(y), x)),
            Self::OddLinear { .. } => Ok(0.0),
        }
    }

    /// `Σ x_i ∂_i F(x) − λ F(x)`.
    pub fn euler_residual(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::InvalidDimension {
                d: x.len(),
                reason: "point dimension does not match the factor",
            });
        }
        let g = self.gradient(x);
        let radial: f64 = x.iter().zip(&g).map(|(a, b)| a * b).sum();
        Ok(radial - self.homogeneity() * self.value(x))
    }

    /// The Schwarz ratio `t = (|x| |∇F(x)| / F(x))²`, which is at least `λ²`.
    pub fn schwarz_ratio(&self, x: &[f64]) -> Result<f64> {
        let f = self.value(x);
        if f == 0.0 {
            return Err(Error::OnBoundary);
        }
        let g = self.gradient(x);
        let x2: f64 = x.iter().map(|v| v * v).sum();
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let t = x2 * g2 / (f * f);
        let lambda2 = self.homogeneity().powi(2);
        if t < lambda2 * (1.0 - 1e-9) - 1e-12 {
            return Err(Error::FactorCheck(format!(
                "Schwarz bound violated: t = {t} < λ² = {lambda2}"
            )));
        }
        Ok(t)
    }
}

/// Free-function form of [`AngularFactor::schwarz_ratio`].
pub fn schwarz_ratio(x: &[f64], factor: &AngularFactor) -> Result<f64> {
    factor.schwarz_ratio(x)
}

// ---------------------------------------------------------------------------
// Exact rational backend
// ---------------------------------------------------------------------------

/// Exact evaluation on rational points, `d ≤ 4`.
pub mod exact {
    use num::{BigRational, Zero};

    use super::{Polynomial, MAX_EXACT_DIM};
    use crate::error::{Error, Result};

    fn check_dim(d: usize) -> Result<()> {
        if d < 2 {
            return Err(Error::InvalidDimension {
                d,
                reason: "the Vandermonde determinant needs d >= 2",
            });
        }
        if d > MAX_EXACT_DIM {
            return Err(Error::UnsupportedDimension {
                d,
                backend: "exact rational",
                max: MAX_EXACT_DIM,
            });
        }
        Ok(())
    }

    pub fn vandermonde_value(x: &[BigRational]) -> Result<BigRational> {
        check_dim(x.len())?;
        let mut v = BigRational::from_integer(1.into());
        for j in 1..x.len() {
            for i in 0..j {
                v *= &x[j] - &x[i];
            }
        }
        Ok(v)
    }

    pub fn vandermonde_gradient(x: &[BigRational]) -> Result<Vec<BigRational>> {
        check_dim(x.len())?;
        let poly = Polynomial::<BigRational>::vandermonde(x.len());
        Ok((0..x.len()).map(|k| poly.derivative(k).eval(x)).collect())
    }

    pub fn laplacian(x: &[BigRational]) -> Result<BigRational> {
        check_dim(x.len())?;
        let poly = Polynomial::<BigRational>::vandermonde(x.len());
        Ok((0..x.len()).fold(BigRational::zero(), |acc, k| {
            acc + poly.derivative(k).derivative(k).eval(x)
        }))
    }

    pub fn euler_residual(x: &[BigRational]) -> Result<BigRational> {
        let d = x.len();
        let g = vandermonde_gradient(x)?;
        let v = vandermonde_value(x)?;
        let radial = x.iter().zip(&g).fold(BigRational::zero(), |acc, (a, b)| acc + a * b);
        let lambda = BigRational::from_integer(((d * (d - 1) / 2) as i64).into());
        Ok(radial - lambda * v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
        // partial-pivot Gaussian elimination, independent of the product formula
        let n = m.len();
        let mut det = 1.0;
        for c in 0..n {
            let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
            if m[p][c] == 0.0 {
                return 0.0;
            }
            if p != c {
                m.swap(p, c);
                det = -det;
            }
            det *= m[c][c];
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
        det
    }

    fn moment_matrix(x: &[f64]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|&xi| (0..x.len()).map(|j| xi.powi(j as i32)).collect())
            .collect()
    }

    fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
        let mut y = x.to_vec();
        (0..x.len())
            .map(|k| {
                y[k] = x[k] + h;
                let p = f(&y);
                y[k] = x[k] - h;
                let m = f(&y);
                y[k] = x[k];
                (p - m) / (2.0 * h)
            })
            .collect()
    }

    fn random_point(rng: &mut ChaCha8Rng, d: usize, half_width: f64) -> Vec<f64> {
        (0..d).map(|_| rng.random_range(-half_width..half_width)).collect()
    }

    fn q(n: i64, m: i64) -> BigRational {
        BigRational::new(n.into(), m.into())
    }

    #[test]
    fn small_values() {
        assert_eq!(vandermonde_value(&[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(vandermonde_value(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert!(matches!(vandermonde_value(&[1.0]), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn value_matches_moment_determinant() {
        let x = [0.3, -1.2, 2.5, 0.7];
        let v = vandermonde_value(&x).unwrap();
        let det = determinant(moment_matrix(&x));
        assert!((v - det).abs() <= 1e-10 * det.abs());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 2..=6 {
            for _ in 0..50 {
                let x = random_point(&mut rng, d, 10.0);
                let v = vandermonde_value(&x).unwrap();
                let det = determinant(moment_matrix(&x));
                assert!((v - det).abs() <= 1e-10 * det.abs().max(1e-300), "d={d}");
            }
        }
    }

    #[test]
    fn expansion_matches_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=6 {
            let p = Polynomial::<f64>::vandermonde(d);
            assert_eq!(p.terms().len(), (1..=d).product::<usize>());
            for _ in 0..20 {
                let x = random_point(&mut rng, d, 3.0);
                let a = p.eval(&x);
                let b = vandermonde_product(&x);
                // bounds the sum of |terms| in the expansion
                let mut scale = 1.0;
                for j in 0..d {
                    for i in 0..j {
                        scale *= x[i].abs() + x[j].abs();
                    }
                }
                assert!((a - b).abs() <= 1e-13 * scale.max(1.0), "d={d}");
            }
        }
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(vandermonde_gradient(&[1.0, 2.0]).unwrap(), vec![-1.0, 1.0]);
        let x = [0.0, 1.0, 3.0];
        let g = vandermonde_gradient(&x).unwrap();
        let fd = fd_gradient(vandermonde_product, &x, 1e-5);
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
        }
    }

    #[test]
    fn gradient_on_coincidence_set() {
        // x_1 = x_2: log-differentiation is undefined, expansion takes over
        for x in [vec![1.0, 1.0, 3.0], vec![0.5, 2.0, 0.5, -1.0], vec![2.0; 5]] {
            let g = vandermonde_gradient(&x).unwrap();
            let mut loo = vec![0.0; x.len()];
            gradient_leave_one_out(&x, &mut loo);
            let fd = fd_gradient(vandermonde_product, &x, 1e-5);
            for k in 0..x.len() {
                assert!((g[k] - loo[k]).abs() <= 1e-12 * (1.0 + g[k].abs()));
                assert!((g[k] - fd[k]).abs() <= 1e-6 * (1.0 + g[k].abs()));
            }
        }
        // d = 7 coincidence uses the product fallback
        let x = [0.0, 1.0, 1.0, 2.0, 3.0, -1.0, 0.5];
        let g = vandermonde_gradient(&x).unwrap();
        let fd = fd_gradient(vandermonde_product, &x, 1e-5);
        for k in 0..7 {
            assert!((g[k] - fd[k]).abs() <= 1e-6 * (1.0 + g[k].abs()));
        }
    }

    #[test]
    fn gradient_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..=5 {
            let lambda = (d * (d - 1) / 2) as i32;
            let x = random_point(&mut rng, d, 2.0);
            let a = 1.7;
            let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
            let g = vandermonde_gradient(&x).unwrap();
            let ga = vandermonde_gradient(&ax).unwrap();
            for k in 0..d {
                let expect = a.powi(lambda - 1) * g[k];
                assert!((ga[k] - expect).abs() <= 1e-10 * (1.0 + expect.abs()));
            }
        }
    }

    #[test]
    fn euler_examples() {
        assert_eq!(euler_residual(&[1.0, 2.0]).unwrap(), 0.0);
        assert!(euler_residual(&[1.0, 2.0, 3.0]).unwrap().abs() < 1e-9);
        assert!(euler_residual(&[-2.0, 0.5, 4.0, 7.0]).unwrap().abs() < 1e-8);
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(laplacian_residual(&[0.3, -4.0]).unwrap(), 0.0);
        assert!(laplacian_residual(&[1.0, 2.0, 3.0]).unwrap().abs() < 1e-8);
        assert!(matches!(
            laplacian_residual(&[0.0; 7]),
            Err(Error::UnsupportedDimension { .. })
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let x = random_point(&mut rng, 4, 5.0);
            let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(laplacian_residual(&x).unwrap().abs() < 1e-6 * (1.0 + r.powi(4)));
        }
    }

    #[test]
    fn fd_laplacian_fallback_for_large_d() {
        let f = AngularFactor::vandermonde(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let x = random_point(&mut rng, 7, 2.0);
            let lap = f.laplacian(&x).unwrap();
            assert!(lap.abs() <= FD_LAPLACIAN_TOL * second_derivative_scale(&f, &x));
        }
    }

    #[test]
    fn schwarz_examples() {
        let v2 = AngularFactor::vandermonde(2).unwrap();
        assert!((v2.schwarz_ratio(&[1.0, 2.0]).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(v2.schwarz_ratio(&[1.0, 1.0]), Err(Error::OnBoundary));

        let h = AngularFactor::odd_linear(3).unwrap();
        let x = [0.4, -1.0, 2.0];
        let s: f64 = x.iter().sum();
        let x2: f64 = x.iter().map(|v| v * v).sum();
        assert!((h.schwarz_ratio(&x).unwrap() - x2 * 3.0 / (s * s)).abs() < 1e-12);
        // equality in Cauchy–Schwarz along the diagonal
        assert!((h.schwarz_ratio(&[2.0, 2.0, 2.0]).unwrap() - 1.0).abs() < 1e-12);

        let v4 = AngularFactor::vandermonde(4).unwrap();
        let ray = [1.0, 2.0, 3.0, 4.0];
        let t1 = v4.schwarz_ratio(&ray).unwrap();
        for c in [0.01, 3.0, 250.0] {
            let y: Vec<f64> = ray.iter().map(|v| c * v).collect();
            assert!((v4.schwarz_ratio(&y).unwrap() - t1).abs() <= 1e-12 * t1);
        }
    }

    #[test]
    fn exact_backend_anchors_float_results() {
        let xs = [q(1, 3), q(-2, 1), q(5, 7), q(9, 4)];
        let v = exact::vandermonde_value(&xs).unwrap();
        assert_eq!(exact::euler_residual(&xs).unwrap(), BigRational::zero());
        assert_eq!(exact::laplacian(&xs).unwrap(), BigRational::zero());

        let xf: Vec<f64> = [1.0 / 3.0, -2.0, 5.0 / 7.0, 9.0 / 4.0].to_vec();
        let vf = vandermonde_value(&xf).unwrap();
        let v_exact = num::ToPrimitive::to_f64(&v).unwrap();
        assert!((vf - v_exact).abs() <= 1e-14 * v_exact.abs());

        let g = exact::vandermonde_gradient(&xs).unwrap();
        let gf = vandermonde_gradient(&xf).unwrap();
        for (a, b) in g.iter().zip(&gf) {
            let a = num::ToPrimitive::to_f64(a).unwrap();
            assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
        }
        assert!(matches!(
            exact::vandermonde_value(&vec![q(1, 1); 5]),
            Err(Error::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn custom_factor_checks_euler_identity() {
        let lf = AngularFactor::linear_form(vec![1.0, -2.0, 0.5]).unwrap();
        assert_eq!(lf.homogeneity(), 1.0);
        assert_eq!(lf.value(&[1.0, 1.0, 2.0]), 0.0);
        // wrong declared degree is refused
        let bad = AngularFactor::custom(
            "x1",
            2,
            2.0,
            |x| x[0],
            |_, g| {
                g[0] = 1.0;
                g[1] = 0.0
            },
            1,
        );
        assert!(matches!(bad, Err(Error::FactorCheck(_))));
        // non-harmonic x1^2 is refused even with the right degree
        let nonharmonic = AngularFactor::custom(
            "x1^2",
            2,
            2.0,
            |x| x[0] * x[0],
            |x, g| {
                g[0] = 2.0 * x[0];
                g[1] = 0.0
            },
            1,
        );
        assert!(matches!(nonharmonic, Err(Error::FactorCheck(_))));
        // harmonic x1 x2 passes
        let ok = AngularFactor::custom(
            "x1 x2",
            2,
            2.0,
            |x| x[0] * x[1],
            |x, g| {
                g[0] = x[1];
                g[1] = x[0]
            },
            1,
        );
        assert!(ok.is_ok());
    }
}
