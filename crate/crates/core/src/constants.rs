//! Closed-form Hardy and Rellich constants.
//!
//! Every formula reports its value together with an admissibility flag.
//! Inadmissible parameter choices still return the algebraic value so that
//! sweeps can locate the admissibility boundary; only hard preconditions of
//! the Hardy constants (`p ≥ 2`, `d ≥ 2` for the antisymmetric class) are
//! refused with an error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetry class of the functions an inequality is stated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionClass {
    General,
    #[serde(rename = "antisym")]
    Antisymmetric,
    Odd,
}

impl FunctionClass {
    /// Homogeneity order of the angular factor the proofs use for this class:
    /// `d(d−1)/2` (Vandermonde), `1` (linear form), `0` (no factor).
    pub fn homogeneity(self, d: usize) -> f64 {
        match self {
            Self::General => 0.0,
            Self::Antisymmetric => (d * d.saturating_sub(1) / 2) as f64,
            Self::Odd => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::General => "general",
            Self::Antisymmetric => "antisym",
            Self::Odd => "odd",
        }
    }
}

impl std::str::FromStr for FunctionClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Self::General),
            "antisym" | "antisymmetric" => Ok(Self::Antisymmetric),
            "odd" => Ok(Self::Odd),
            other => Err(Error::Usage(format!("unknown class `{other}`"))),
        }
    }
}

/// The triple `(d, p, γ)` plus the function class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub d: usize,
    pub p: f64,
    pub gamma: f64,
    pub class: FunctionClass,
}

impl Params {
    pub fn new(d: usize, p: f64, gamma: f64, class: FunctionClass) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension {
                d,
                reason: "dimension must be at least 1",
            });
        }
        if class == FunctionClass::Antisymmetric && d < 2 {
            return Err(Error::InvalidDimension {
                d,
                reason: "antisymmetric functions need d >= 2",
            });
        }
        if !(p > 1.0) || !p.is_finite() || !gamma.is_finite() {
            return Err(Error::OutOfRange(format!(
                "need p > 1, finite γ; got p = {p}, γ = {gamma}"
            )));
        }
        Ok(Self { d, p, gamma, class })
    }

    pub fn lambda(&self) -> f64 {
        self.class.homogeneity(self.d)
    }

    /// Sharp-or-best-known Hardy constant for this class.
    pub fn hardy_constant(&self) -> Result<ConstantValue> {
        match self.class {
            FunctionClass::General => Ok(weighted_classical_hardy(self.d, self.p, self.gamma)),
            FunctionClass::Antisymmetric => hardy_antisymmetric(self.d, self.p, self.gamma),
            FunctionClass::Odd => hardy_odd(self.d, self.p, self.gamma),
        }
    }

    pub fn rellich_constant(&self) -> Result<ConstantValue> {
        match self.class {
            FunctionClass::General => Ok(rellich_mitidieri(self.d, self.p, self.gamma)),
            FunctionClass::Antisymmetric => rellich_antisymmetric(self.d, self.p, self.gamma),
            FunctionClass::Odd => rellich_odd(self.d, self.p, self.gamma),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    ClassicalHardy,
    HardyAntisymmetric,
    HardyOdd,
    RellichMitidieri,
    RellichAntisymmetric,
    RellichOdd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantValue {
    pub value: f64,
    pub formula: FormulaId,
    pub admissible: bool,
    /// The quantity that must be nonnegative for the formula to apply.
    pub condition_residual: f64,
}

/// `x^e` for a possibly negative base: real when `e` is an integer, NaN otherwise.
fn signed_pow(base: f64, e: f64) -> f64 {
    if base >= 0.0 {
        base.powf(e)
    } else if e.fract() == 0.0 {
        base.powi(e as i32)
    } else {
        f64::NAN
    }
}

fn require_hardy_p(p: f64) -> Result<()> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::OutOfRange(format!(
            "the improved Hardy constants need p >= 2 (got p = {p}); 1 < p < 2 is open"
        )));
    }
    Ok(())
}

/// `(|d−p|/p)^p`, zero at `p = d`.
pub fn classical_hardy(d: usize, p: f64) -> ConstantValue {
    weighted_classical_hardy(d, p, 0.0)
}

/// `(|d−p−γ|/p)^p`: the best one-parameter (radial field) certificate.
pub fn weighted_classical_hardy(d: usize, p: f64, gamma: f64) -> ConstantValue {
    let gap = (d as f64 - p - gamma).abs();
    ConstantValue {
        value: (gap / p).powf(p),
        formula: FormulaId::ClassicalHardy,
        admissible: p >= 1.0 && d >= 1,
        condition_residual: gap,
    }
}

/// `((4A)/p²)^{p/2}` with `A = (p−2+γ)λ + ((d−p−γ+2λ)/2)²`: the common shape
/// of both improved Hardy constants.
pub(crate) fn hardy_from_lambda(d: usize, p: f64, gamma: f64, lambda: f64) -> (f64, f64) {
    let d = d as f64;
    let m = (d - p - gamma + 2.0 * lambda) / 2.0;
    let base = 4.0 * ((p - 2.0 + gamma) * lambda + m * m) / (p * p);
    (signed_pow(base, p / 2.0), base)
}

/// `C_H(d,p,γ) = (2(p−2+γ)d(d−1)/p² + ((d²−p−γ)/p)²)^{p/2}`.
pub fn hardy_antisymmetric(d: usize, p: f64, gamma: f64) -> Result<ConstantValue> {
    require_hardy_p(p)?;
    if d < 2 {
        return Err(Error::InvalidDimension {
            d,
            reason: "antisymmetric functions need d >= 2",
        });
    }
    Ok(hardy_antisymmetric_formula(d, p, gamma))
}

/// The `C_H` expression without precondition checks (e.g. `d = 1`, where it
/// reduces to `((p−1)/p)^p`).
pub fn hardy_antisymmetric_formula(d: usize, p: f64, gamma: f64) -> ConstantValue {
    let df = d as f64;
    let base = 2.0 * (p - 2.0 + gamma) * df * (df - 1.0) / (p * p) + ((df * df - p - gamma) / p).powi(2);
    ConstantValue {
        value: signed_pow(base, p / 2.0),
        formula: FormulaId::HardyAntisymmetric,
        admissible: base >= 0.0 && p >= 2.0 && d >= 2,
        condition_residual: base,
    }
}

/// `D_H(d,p,γ) = (4(p−2+γ)/p² + ((d−p−γ+2)/p)²)^{p/2}`.
pub fn hardy_odd(d: usize, p: f64, gamma: f64) -> Result<ConstantValue> {
    require_hardy_p(p)?;
    if d < 1 {
        return Err(Error::InvalidDimension {
            d,
            reason: "dimension must be at least 1",
        });
    }
    let df = d as f64;
    let base = 4.0 * (p - 2.0 + gamma) / (p * p) + ((df - p - gamma + 2.0) / p).powi(2);
    Ok(ConstantValue {
        value: signed_pow(base, p / 2.0),
        formula: FormulaId::HardyOdd,
        admissible: base >= 0.0,
        condition_residual: base,
    })
}

/// Mitidieri's sharp weighted Rellich constant
/// `((d−γ−2p)((p−1)d+γ)/p²)^p`, admissible for `−(p−1)d < γ < d−2p`.
pub fn rellich_mitidieri(d: usize, p: f64, gamma: f64) -> ConstantValue {
    let df = d as f64;
    let upper = df - gamma - 2.0 * p;
    let lower = (p - 1.0) * df + gamma;
    ConstantValue {
        value: signed_pow(upper * lower / (p * p), p),
        formula: FormulaId::RellichMitidieri,
        admissible: p > 1.0 && upper > 0.0 && lower > 0.0,
        condition_residual: upper.min(lower),
    }
}

fn rellich_from_numerator(numerator: f64, p: f64, formula: FormulaId) -> ConstantValue {
    ConstantValue {
        value: signed_pow(numerator / (p * p), p),
        formula,
        admissible: numerator >= 0.0 && p > 1.0,
        condition_residual: numerator,
    }
}

/// `C_R(d,p,γ) = (N/p²)^p`,
/// `N = (γ+2p−2)(2(p−1)d(d−1) + p(d−γ−2p)) + (p−1)(d²−γ−2p)²`.
pub fn rellich_antisymmetric(d: usize, p: f64, gamma: f64) -> Result<ConstantValue> {
    if d < 2 {
        return Err(Error::InvalidDimension {
            d,
            reason: "antisymmetric functions need d >= 2",
        });
    }
    let df = d as f64;
    let n = (gamma + 2.0 * p - 2.0) * (2.0 * (p - 1.0) * df * (df - 1.0) + p * (df - gamma - 2.0 * p))
        + (p - 1.0) * (df * df - gamma - 2.0 * p).powi(2);
    Ok(rellich_from_numerator(n, p, FormulaId::RellichAntisymmetric))
}

/// `D_R(d,p,γ) = (N/p²)^p`,
/// `N = (γ+2p−2)(4(p−1) + p(d−γ−2p)) + (p−1)(d−γ−2p+2)²`.
pub fn rellich_odd(d: usize, p: f64, gamma: f64) -> Result<ConstantValue> {
    if d < 1 {
        return Err(Error::InvalidDimension {
            d,
            reason: "dimension must be at least 1",
        });
    }
    let df = d as f64;
    let n = (gamma + 2.0 * p - 2.0) * (4.0 * (p - 1.0) + p * (df - gamma - 2.0 * p))
        + (p - 1.0) * (df - gamma - 2.0 * p + 2.0).powi(2);
    Ok(rellich_from_numerator(n, p, FormulaId::RellichOdd))
}

// ---------------------------------------------------------------------------
// Asymptotics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct LargePRow {
    pub p: f64,
    pub classical_gap: f64,
    /// `None` for `d = 1`, where the antisymmetric class is empty.
    pub antisymmetric_gap: Option<f64>,
    pub odd_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthRow {
    pub d: usize,
    pub p: f64,
    /// `C_H(d,p) / (d²/p)^p`
    pub antisymmetric_ratio: f64,
    /// `(|d−p|/p)^p / (d/p)^p`
    pub classical_ratio: f64,
    /// `C_R(d,p,0) / ((p−1)d⁴/p²)^p`
    pub rellich_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticReport {
    pub d: usize,
    pub limit: f64,
    pub large_p: Vec<LargePRow>,
    pub gaps_decreasing: bool,
    pub growth: Vec<GrowthRow>,
    /// `C_H(d,p) > (|d−p|/p)^p` for every `p` of the strictness grid.
    pub strictly_improved: bool,
}

pub const LARGE_P_GRID: [f64; 3] = [1e2, 1e3, 1e4];

/// Large-`p` limits at fixed `d`, growth ratios as `d` increases, and the
/// strict improvement over the classical constant.
pub fn asymptotic_checks(d: usize) -> Result<AsymptoticReport> {
    if d == 0 {
        return Err(Error::InvalidDimension {
            d,
            reason: "dimension must be at least 1",
        });
    }
    let limit = (-(d as f64)).exp();
    let large_p: Vec<LargePRow> = LARGE_P_GRID
        .iter()
        .map(|&p| LargePRow {
            p,
            classical_gap: (classical_hardy(d, p).value - limit).abs(),
            antisymmetric_gap: (d >= 2).then(|| (hardy_antisymmetric_formula(d, p, 0.0).value - limit).abs()),
            odd_gap: (hardy_odd(d, p, 0.0).map(|c| c.value).unwrap_or(f64::NAN) - limit).abs(),
        })
        .collect();
    let gaps_decreasing = large_p.windows(2).all(|w| {
        w[1].odd_gap <= w[0].odd_gap
            && match (w[0].antisymmetric_gap, w[1].antisymmetric_gap) {
                (Some(a), Some(b)) => b <= a,
                _ => true,
            }
    });

    let growth = [d, 10 * d, 100 * d, 1000 * d]
        .iter()
        .flat_map(|&dd| [2.0, 3.0].map(move |p| (dd, p)))
        .filter(|&(dd, _)| dd >= 2)
        .map(|(dd, p)| {
            let df = dd as f64;
            GrowthRow {
                d: dd,
                p,
                antisymmetric_ratio: hardy_antisymmetric_formula(dd, p, 0.0).value / (df * df / p).powf(p),
                classical_ratio: classical_hardy(dd, p).value / (df / p).powf(p),
                rellich_ratio: rellich_antisymmetric(dd, p, 0.0).map(|c| c.value).unwrap_or(f64::NAN)
                    / ((p - 1.0) * df.powi(4) / (p * p)).powf(p),
            }
        })
        .collect();

    let strictly_improved = d < 2
        || [2.0, 2.5, 3.0, 4.0, 6.0, 10.0]
            .iter()
            .all(|&p| hardy_antisymmetric_formula(d, p, 0.0).value > classical_hardy(d, p).value);

    Ok(AsymptoticReport {
        d,
        limit,
        large_p,
        gaps_decreasing,
        growth,
        strictly_improved,
    })
}

// ---------------------------------------------------------------------------
// Exact rational evaluation
// ---------------------------------------------------------------------------

/// Exact evaluation for rational `p`, `γ` when the outer exponent is an
/// integer (`p/2` for Hardy, `p` for Rellich).
pub mod exact {
    use num::{BigRational, Signed, ToPrimitive};

    use crate::error::{Error, Result};

    fn rat(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn integer_exponent(e: &BigRational, what: &str) -> Result<u32> {
        if !e.is_integer() || e.is_negative() {
            return Err(Error::OutOfRange(format!(
                "{what} must be a nonnegative integer for the exact path, got {e}"
            )));
        }
        e.to_integer()
            .to_u32()
            .ok_or_else(|| Error::OutOfRange(format!("{what} too large")))
    }

    fn pow(b: &BigRational, e: u32) -> BigRational {
        num::pow(b.clone(), e as usize)
    }

    /// `C_H(d,p,γ)` exactly; `p/2` must be an integer.
    pub fn hardy_antisymmetric(d: u32, p: &BigRational, gamma: &BigRational) -> Result<BigRational> {
        let e = integer_exponent(&(p / rat(2)), "p/2")?;
        let d = rat(d as i64);
        let base = rat(2) * (p - rat(2) + gamma) * &d * (&d - rat(1)) / (p * p) + pow(&((&d * &d - p - gamma) / p), 2);
        Ok(pow(&base, e))
    }

    /// `D_H(d,p,γ)` exactly; `p/2` must be an integer.
    pub fn hardy_odd(d: u32, p: &BigRational, gamma: &BigRational) -> Result<BigRational> {
        let e = integer_exponent(&(p / rat(2)), "p/2")?;
        let d = rat(d as i64);
        let base = rat(4) * (p - rat(2) + gamma) / (p * p) + pow(&((&d - p - gamma + rat(2)) / p), 2);
        Ok(pow(&base, e))
    }

    /// `C_R(d,p,γ)` exactly; `p` must be an integer.
    pub fn rellich_antisymmetric(d: u32, p: &BigRational, gamma: &BigRational) -> Result<BigRational> {
        let e = integer_exponent(p, "p")?;
        let d = rat(d as i64);
        let n = (gamma + rat(2) * p - rat(2))
            * (rat(2) * (p - rat(1)) * &d * (&d - rat(1)) + p * (&d - gamma - rat(2) * p))
            + (p - rat(1)) * pow(&(&d * &d - gamma - rat(2) * p), 2);
        Ok(pow(&(n / (p * p)), e))
    }

    /// `D_R(d,p,γ)` exactly; `p` must be an integer.
    pub fn rellich_odd(d: u32, p: &BigRational, gamma: &BigRational) -> Result<BigRational> {
        let e = integer_exponent(p, "p")?;
        let d = rat(d as i64);
        let n = (gamma + rat(2) * p - rat(2)) * (rat(4) * (p - rat(1)) + p * (&d - gamma - rat(2) * p))
            + (p - rat(1)) * pow(&(&d - gamma - rat(2) * p + rat(2)), 2);
        Ok(pow(&(n / (p * p)), e))
    }
}
