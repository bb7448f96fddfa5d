//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines always print.

use std::f64::consts::E;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hardy_core::constants::{
    asymptotic_checks, hardy_antisymmetric, hardy_antisymmetric_formula, hardy_odd, rellich_antisymmetric, rellich_odd,
    FunctionClass, Params,
};
use hardy_core::fields::{pointwise_certificate, SectorDomain, INTERIOR_TUBE};
use hardy_core::minimax::{closed_form_optimum, f_certificate, numeric_minimax, CertificateProblem, SearchConfig};
use hardy_core::polynomials::{laplacian_residual, AngularFactor};
use hardy_core::quadrature::{rayleigh_quotient, rellich_bracket, sharpness_row, Functional, QuadratureConfig};
use hardy_core::trials::gaussian_trial;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1. Constant ledger -------------------------------------------------------

const SPOT_TOL: f64 = 1e-12;

fn constant_ledger() -> Outcome {
    let (mut admissible, mut inadmissible) = (0, 0);
    for d in 1..=6usize {
        for p in [2.0, 2.5, 3.0, 4.0] {
            for gamma in [-1.0, 0.0, 1.0, 2.0] {
                let mut values = vec![hardy_odd(d, p, gamma), rellich_odd(d, p, gamma)];
                if d >= 2 {
                    values.push(hardy_antisymmetric(d, p, gamma));
                    values.push(rellich_antisymmetric(d, p, gamma));
                } else {
                    values.push(Ok(hardy_antisymmetric_formula(d, p, gamma)));
                }
                for v in values {
                    let v = v.map_err(|e| format!("d={d} p={p} γ={gamma}: {e}"))?;
                    // a negative base under a fractional power has no real value
                    if v.admissible {
                        ensure(v.value.is_finite(), || {
                            format!("d={d} p={p} γ={gamma}: non-finite {v:?}")
                        })?;
                        admissible += 1;
                    } else {
                        ensure(v.condition_residual < 0.0 || !v.value.is_nan(), || {
                            format!("d={d} p={p} γ={gamma}: {v:?}")
                        })?;
                        inadmissible += 1;
                    }
                }
            }
        }
    }

    let mut spots = 0;
    for d in 1..=6usize {
        let df = d as f64;
        let dh = hardy_odd(d, 2.0, 0.0).unwrap().value;
        ensure(rel(dh, df * df / 4.0) <= SPOT_TOL, || format!("D_H({d},2,0) = {dh}"))?;
        let dr = rellich_odd(d, 2.0, 0.0).unwrap().value;
        let dr_ref = (df * df - 4.0).powi(2) / 16.0;
        ensure((dr - dr_ref).abs() <= SPOT_TOL * dr_ref.max(1.0), || {
            format!("D_R({d},2,0) = {dr}")
        })?;
        spots += 2;
        if d >= 2 {
            let ch = hardy_antisymmetric(d, 2.0, 0.0).unwrap().value;
            let ch_ref = ((df * df - 2.0) / 2.0).powi(2);
            ensure(rel(ch, ch_ref) <= SPOT_TOL, || format!("C_H({d},2,0) = {ch}"))?;
            let cr = rellich_antisymmetric(d, 2.0, 0.0).unwrap().value;
            let cr_ref = df.powi(4) * (df * df - 4.0).powi(2) / 16.0;
            ensure((cr - cr_ref).abs() <= SPOT_TOL * cr_ref.max(1.0), || {
                format!("C_R({d},2,0) = {cr}")
            })?;
            spots += 2;
        }
    }
    for p in [2.0, 2.5, 3.0, 4.0, 7.0] {
        let v = hardy_odd(1, p, 0.0).unwrap().value;
        let r = ((p - 1.0) / p).powf(p);
        ensure(rel(v, r) <= SPOT_TOL, || format!("D_H(1,{p},0) = {v} vs {r}"))?;
        for gamma in [-1.0, 0.0, 1.0, 2.0] {
            let c = hardy_antisymmetric(2, p, gamma).unwrap().value;
            let o = hardy_odd(2, p, gamma).unwrap().value;
            ensure(rel(c, o) <= SPOT_TOL, || {
                format!("C_H(2,{p},{gamma}) = {c} ≠ D_H = {o}")
            })?;
        }
        spots += 5;
    }
    Ok(format!(
        "{} constants evaluated ({inadmissible} flagged inadmissible), {spots} spot values within {SPOT_TOL:e}",
        admissible + inadmissible
    ))
}

// 2. Minimax equivalence ---------------------------------------------------

const MINIMAX_TOL: f64 = 1e-5;

fn minimax_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for d in 2..=4usize {
        for p in [2.5, 3.0, 4.0] {
            for gamma in [-1.0, 0.0, 1.0] {
                for class in [FunctionClass::Antisymmetric, FunctionClass::Odd] {
                    let params = Params::new(d, p, gamma, class).unwrap();
                    let constant = params.hardy_constant().map_err(|e| e.to_string())?.value;
                    let prob = CertificateProblem::from_params(&params).map_err(|e| e.to_string())?;
                    let r = numeric_minimax(&prob, &SearchConfig::default()).map_err(|e| e.to_string())?;
                    let err = (r.value_numeric - constant).abs();
                    ensure(err <= MINIMAX_TOL, || {
                        format!(
                            "d={d} p={p} γ={gamma} {}: numeric {} vs {constant}",
                            class.as_str(),
                            r.value_numeric
                        )
                    })?;
                    worst = worst.max(err);
                    cases += 1;
                }
            }
        }
    }
    Ok(format!(
        "{cases} cases, worst |numeric − closed form| = {worst:.2e} (tol {MINIMAX_TOL:e})"
    ))
}

// 3. Pointwise certificate -------------------------------------------------

const CERT_SLACK: f64 = 1e-8;
const IDENTITY_TOL: f64 = 1e-10;
const CERT_POINTS: usize = 10_000;

fn pointwise_certificate_check() -> Outcome {
    let mut worst_identity: f64 = 0.0;
    let mut min_margin = f64::INFINITY;
    let mut evaluated = 0;
    for d in [2usize, 3] {
        for (factor, class) in [
            (AngularFactor::vandermonde(d).unwrap(), FunctionClass::Antisymmetric),
            (AngularFactor::odd_linear(d).unwrap(), FunctionClass::Odd),
        ] {
            let domain = SectorDomain::for_factor(&factor);
            let points = domain.sample_interior(CERT_POINTS, 0x0c3 + d as u64, INTERIOR_TUBE);
            for p in [2.0, 3.0] {
                for gamma in [-1.0, 0.0, 1.0] {
                    let params = Params::new(d, p, gamma, class).unwrap();
                    let constant = params.hardy_constant().map_err(|e| e.to_string())?.value;
                    let prob = CertificateProblem::from_params(&params).map_err(|e| e.to_string())?;
                    let c = closed_form_optimum(&prob).map_err(|e| e.to_string())?;
                    for x in &points {
                        let v =
                            pointwise_certificate(x, c.alpha, c.beta, &params, &factor).map_err(|e| e.to_string())?;
                        let t = factor.schwarz_ratio(x).map_err(|e| e.to_string())?;
                        let f = f_certificate(t, c.alpha, c.beta, &prob).map_err(|e| e.to_string())?;
                        // relative to the size of the summands in f
                        let scale = c.alpha.abs() * d as f64 + c.beta.abs() * (p * factor.homogeneity() + t) + f.abs();
                        let id = (v - f).abs() / scale;
                        ensure(id <= IDENTITY_TOL, || {
                            format!("d={d} p={p} γ={gamma} x={x:?}: {v} vs f = {f}")
                        })?;
                        ensure(v >= constant - CERT_SLACK, || {
                            format!("d={d} p={p} γ={gamma} x={x:?}: certificate {v} < constant {constant}")
                        })?;
                        worst_identity = worst_identity.max(id);
                        min_margin = min_margin.min(v - constant);
                        evaluated += 1;
                    }
                }
            }
        }
    }
    Ok(format!(
        "{evaluated} points, min(certificate − constant) = {min_margin:.2e}, worst identity gap = {worst_identity:.2e}"
    ))
}

// 4. Inequality verification by quadrature ---------------------------------

const MC_SAMPLES: u64 = 1_000_000;
const MC_SEED: u64 = 0;
const MC_SIGMAS: f64 = 2.0;

fn quadrature_verification() -> Outcome {
    let cfg = QuadratureConfig::monte_carlo(MC_SAMPLES, MC_SEED);
    let mut min_z = f64::INFINITY;
    let mut cases = 0;
    for d in [2usize, 3] {
        for (factor, class) in [
            (AngularFactor::vandermonde(d).unwrap(), FunctionClass::Antisymmetric),
            (AngularFactor::odd_linear(d).unwrap(), FunctionClass::Odd),
        ] {
            let u = gaussian_trial(&factor, 1.0).unwrap();
            for p in [2.0, 2.5, 3.0] {
                let params = Params::new(d, p, 0.0, class).unwrap();
                let r = rayleigh_quotient(&u, Functional::Hardy, &params, &cfg).map_err(|e| e.to_string())?;
                let z = (r.quotient - r.reference_constant) / r.quotient_error;
                ensure(
                    r.quotient >= r.reference_constant - MC_SIGMAS * r.quotient_error,
                    || {
                        format!(
                            "d={d} p={p} {}: Q = {} ± {} < {}",
                            class.as_str(),
                            r.quotient,
                            r.quotient_error,
                            r.reference_constant
                        )
                    },
                )?;
                min_z = min_z.min(z);
                cases += 1;
            }
        }
    }
    let radial = gaussian_trial(&AngularFactor::unit(3).unwrap(), 1.0).unwrap();
    let params = Params::new(3, 2.0, 0.0, FunctionClass::General).unwrap();
    let r = rayleigh_quotient(&radial, Functional::Hardy, &params, &cfg).map_err(|e| e.to_string())?;
    let c_h = hardy_antisymmetric(3, 2.0, 0.0).unwrap().value;
    ensure(r.quotient + MC_SIGMAS * r.quotient_error < c_h, || {
        format!(
            "radial Gaussian Q = {} ± {} is not below C_H(3,2) = {c_h}",
            r.quotient, r.quotient_error
        )
    })?;
    Ok(format!(
        "{cases} class trials hold (min z = {min_z:.1}); radial Gaussian Q = {:.4} ± {:.1e} < C_H(3,2) = {c_h}",
        r.quotient, r.quotient_error
    ))
}

// 5. Rellich sharpness bracket ----------------------------------------------

const TREND_TOL: f64 = 0.05;

fn rellich_sharpness() -> Outcome {
    let factor = AngularFactor::vandermonde(3).unwrap();
    let lambda = factor.homogeneity();
    let mut lines = Vec::new();
    for eps in [0.2, 0.1] {
        let (lo, hi) = rellich_bracket(3, lambda, eps);
        let mut corrections = Vec::new();
        for delta in [0.05, 0.02, 0.01] {
            let row = sharpness_row(&factor, Functional::Rellich, eps, delta).map_err(|e| e.to_string())?;
            ensure(row.in_bracket, || {
                format!(
                    "ε={eps} δ={delta}: Q = {} outside [{lo}, {hi}] ± {}",
                    row.quotient, row.tolerance
                )
            })?;
            ensure(row.quotient >= lo && row.quotient <= hi, || {
                format!("ε={eps} δ={delta}: Q = {} outside the unwidened bracket", row.quotient)
            })?;
            corrections.push(format!(
                "δ={delta}: Q={:.3} corr={:+.3}",
                row.quotient, row.collar_correction
            ));
        }
        lines.push(format!("ε={eps} bracket [{lo:.2}, {hi:.2}] {}", corrections.join(", ")));
    }
    let target = 126.5625;
    let row = sharpness_row(&factor, Functional::Rellich, 0.05, 0.01).map_err(|e| e.to_string())?;
    ensure(rel(row.quotient, target) <= TREND_TOL, || {
        format!("ε=0.05: Q = {} not within {TREND_TOL} of {target}", row.quotient)
    })?;
    lines.push(format!(
        "ε=0.05 δ=0.01: Q={:.4}, {:.2}% from {target}",
        row.quotient,
        100.0 * rel(row.quotient, target)
    ));
    Ok(lines.join("; "))
}

// 6. Polynomial identities -------------------------------------------------

const EULER_TOL: f64 = 1e-9;
const HARMONIC_TOL: f64 = 1e-6;
const GRADIENT_TOL: f64 = 1e-6;
const FD_STEP: f64 = 1e-5;

fn polynomial_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_grad: f64 = 0.0;
    for d in 2..=6usize {
        let v = AngularFactor::vandermonde(d).unwrap();
        let lambda = v.homogeneity();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let val = v.value(&x);
            let e = v.euler_residual(&x).unwrap();
            ensure(e.abs() <= EULER_TOL * (1.0 + val.abs()), || {
                format!("Euler d={d} x={x:?}: {e}")
            })?;
            let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            let lap = laplacian_residual(&x).unwrap();
            ensure(lap.abs() <= HARMONIC_TOL * (1.0 + norm.powf(lambda - 2.0)), || {
                format!("Laplacian d={d} x={x:?}: {lap}")
            })?;
        }
        for _ in 0..100 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let g = v.gradient(&x);
            let gnorm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
            let mut y = x.clone();
            for k in 0..d {
                y[k] = x[k] + FD_STEP;
                let fp = v.value(&y);
                y[k] = x[k] - FD_STEP;
                let fm = v.value(&y);
                y[k] = x[k];
                let fd = (fp - fm) / (2.0 * FD_STEP);
                let err = (g[k] - fd).abs() / gnorm;
                ensure(err <= GRADIENT_TOL, || {
                    format!("gradient d={d} k={k} x={x:?}: {} vs {fd}", g[k])
                })?;
                worst_grad = worst_grad.max(err);
            }
        }
    }
    Ok(format!(
        "d=2..6, 1000 points each; worst gradient FD error {worst_grad:.1e}"
    ))
}

// 7. Asymptotics ----------------------------------------------------------

const LARGE_P: f64 = 1e4;
const LARGE_P_TOL: f64 = 1e-3;
const GROWTH_TOL: f64 = 0.01;

fn asymptotics() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in 1..=3usize {
        let limit = E.powf(-(d as f64));
        let c = hardy_antisymmetric_formula(d, LARGE_P, 0.0).value;
        let o = hardy_odd(d, LARGE_P, 0.0).unwrap().value;
        ensure((c - limit).abs() < LARGE_P_TOL, || {
            format!("C_H({d},1e4) = {c} vs e^-{d}")
        })?;
        ensure((o - limit).abs() < LARGE_P_TOL, || {
            format!("D_H({d},1e4) = {o} vs e^-{d}")
        })?;
        worst = worst.max((c - limit).abs()).max((o - limit).abs());
        let report = asymptotic_checks(d).map_err(|e| e.to_string())?;
        ensure(report.gaps_decreasing, || format!("d={d}: large-p gaps not decreasing"))?;
    }
    let d = 1000.0_f64;
    let ratio = hardy_antisymmetric(1000, 2.0, 0.0).unwrap().value / (d * d / 2.0).powi(2);
    ensure((ratio - 1.0).abs() < GROWTH_TOL, || {
        format!("C_H(1000,2)/(d²/2)² = {ratio}")
    })?;
    Ok(format!(
        "max |C − e^-d| at p=1e4: {worst:.2e}; C_H(1000,2)/(d²/2)² = {ratio:.8}"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("constant ledger", constant_ledger, Duration::from_secs(1)),
        ("minimax equivalence", minimax_equivalence, Duration::from_secs(30)),
        (
            "pointwise certificate",
            pointwise_certificate_check,
            Duration::from_secs(10),
        ),
        (
            "quadrature verification",
            quadrature_verification,
            Duration::from_secs(120),
        ),
        ("rellich sharpness", rellich_sharpness, Duration::from_secs(300)),
        ("polynomial identities", polynomial_identities, Duration::from_secs(5)),
        ("asymptotics", asymptotics, Duration::from_secs(1)),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(msg) if elapsed <= *budget => ("PASS", msg),
            Ok(msg) => ("FAIL", format!("{msg} (took {elapsed:.2?}, budget {budget:?})")),
            Err(msg) => ("FAIL", msg),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {}: {status} [{name}] {detail} ({elapsed:.2?})", i + 1);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
