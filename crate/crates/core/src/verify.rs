//! Acceptance checks run by `sqzmetro verify` and the acceptance test target.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::error::{MetroError, Result};
use crate::fock_oracle::{apply_network, expectation, Truncation, LEAKAGE_TOLERANCE};
use crate::interferometer::{mz_network, Family, SourceConfig, WorkingPoint};
use crate::metrology::{
    asymptote_report, classical_fisher, oracle_qfi, oracle_sensitivity, qfi, sensitivity,
    sensitivity_difference, threshold_gamma_qfi, threshold_gamma_qfi_bisect,
    threshold_gamma_sens, MzObservables, SensitivityRecord,
};
use crate::moment_engine::OperatorPolynomial;
use crate::sweep::{db_convert, DbDirection};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Force this single-mode basis size on every truncated-Fock computation.
    pub dims: Option<usize>,
}

impl VerifyOptions {
    fn truncation(&self) -> Truncation {
        self.dims.map_or(Truncation::Auto, Truncation::Fixed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub runtime_ms: f64,
    pub budget_ms: Option<f64>,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "{} [{}] {} ({:.1} ms): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.runtime_ms,
            self.detail
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

/// Outcome of a check body: pass flag and a one-line summary.
type Outcome = Result<(bool, String)>;

fn timed(id: &str, name: &str, budget: Option<Duration>, body: impl FnOnce() -> Outcome) -> CheckResult {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = budget {
        if elapsed > limit {
            passed = false;
            detail = format!("{detail}; over the {:.0} s budget", limit.as_secs_f64());
        }
    }
    CheckResult {
        id: id.to_string(),
        name: name.to_string(),
        passed,
        detail,
        runtime_ms: elapsed.as_secs_f64() * 1e3,
        budget_ms: budget.map(|d| d.as_secs_f64() * 1e3),
    }
}

const ETAS: [f64; 3] = [0.4, 0.8, 1.0];

/// Coherent benchmark: `Q_F = 2 N_tot` and `s = (eta N_tot)^{-1/2}`.
pub fn check_coherent_benchmark() -> CheckResult {
    timed("1", "coherent benchmark", Some(Duration::from_secs(1)), || {
        let obs = MzObservables::at(FRAC_PI_2);
        let mut worst_q: f64 = 0.0;
        let mut worst_s: f64 = 0.0;
        for n in 1..=100 {
            let n = n as f64;
            for eta in ETAS {
                let c = SourceConfig::from_energy(Family::Ch, 0.0, n, eta)?;
                worst_q = worst_q.max((qfi(&c)? - 2.0 * n).abs());
                worst_s = worst_s.max((obs.sensitivity(&c)?.s - 1.0 / (eta * n).sqrt()).abs());
            }
        }
        Ok((
            worst_q <= 1e-10 && worst_s <= 1e-10,
            format!("max |Q_F - 2N| = {worst_q:.2e}, max |s - (eta N)^-1/2| = {worst_s:.2e} (tol 1e-10)"),
        ))
    })
}

/// Closed-form QFI threshold against bisection, plus the `r = 0` anchor.
pub fn check_qfi_threshold(opts: &VerifyOptions) -> CheckResult {
    timed("2", "QFI threshold closed form vs root-find", Some(Duration::from_secs(5)), || {
        let mut worst: f64 = 0.0;
        for k in 0..=6 {
            let r = 0.25 * k as f64;
            worst = worst.max((threshold_gamma_qfi(r) - threshold_gamma_qfi_bisect(r)?).abs());
        }
        let exact_origin = threshold_gamma_qfi(0.0) == FRAC_1_SQRT_2;
        let mut anchor: f64 = 0.0;
        for fam in [Family::SqSPh, Family::SqVac] {
            let c = SourceConfig::new(fam, 0.0, FRAC_1_SQRT_2, 1.0)?;
            anchor = anchor
                .max((qfi(&c)? - 3.0).abs())
                .max((oracle_qfi(&c, opts.truncation())? - 3.0).abs());
        }
        Ok((
            worst <= 1e-6 && exact_origin && anchor <= 1e-8,
            format!(
                "max |closed - bisect| = {worst:.2e} (tol 1e-6); gamma_th(0) exact: {exact_origin}; \
                 max |Q_F - 3| at anchor = {anchor:.2e}"
            ),
        ))
    })
}

fn oracle_grid() -> Vec<(Family, f64, f64, f64, f64)> {
    let mut grid = Vec::new();
    for r in [0.0, 0.5, 1.0] {
        for gamma in [0.0, 1.0, 2.0] {
            for eta in [0.6, 1.0] {
                for phi in [FRAC_PI_4, FRAC_PI_2] {
                    for fam in Family::ALL {
                        grid.push((fam, r, gamma, eta, phi));
                    }
                }
            }
        }
    }
    grid
}

fn compare_records(a: &SensitivityRecord, b: &SensitivityRecord) -> f64 {
    let rel = |x: f64, y: f64, floor: f64| (x - y).abs() / x.abs().max(y.abs()).max(floor);
    // unit floor on O, which vanishes at quadrature for symmetric inputs
    rel(a.o, b.o, 1.0)
        .max(rel(a.do_dphi, b.do_dphi, f64::MIN_POSITIVE))
        .max(rel(a.var_o, b.var_o, f64::MIN_POSITIVE))
        .max(rel(a.s, b.s, f64::MIN_POSITIVE))
}

/// Moment engine against truncated-Fock brute force.
pub fn check_oracle_equivalence(opts: &VerifyOptions) -> CheckResult {
    timed("3", "oracle equivalence", Some(Duration::from_secs(60)), || {
        let truncation = opts.truncation();
        let mut worst: f64 = 0.0;
        let mut degenerate = 0;
        let grid = oracle_grid();
        for &(fam, r, gamma, eta, phi) in &grid {
            let c = SourceConfig::new(fam, r, gamma, eta)?;
            let wp = WorkingPoint::new(phi)?;
            let (q, q_oracle) = (qfi(&c)?, oracle_qfi(&c, truncation)?);
            worst = worst.max((q - q_oracle).abs() / q.abs().max(f64::MIN_POSITIVE));
            match (sensitivity(&c, wp), oracle_sensitivity(&c, wp, truncation)) {
                (Ok(a), Ok(b)) => worst = worst.max(compare_records(&a, &b)),
                (Err(MetroError::DegenerateWorkingPoint(_)), Err(MetroError::DegenerateWorkingPoint(_))) => {
                    degenerate += 1
                }
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
        Ok((
            worst <= 1e-8,
            format!(
                "{} points, max relative deviation {worst:.2e} (tol 1e-8); \
                 {degenerate} fringe-extremum points flagged degenerate by both paths",
                grid.len()
            ),
        ))
    })
}

/// Bare squeezed single photon reaches the coherent shot-noise sensitivity.
pub fn check_degenerate_identity() -> CheckResult {
    timed("4", "gamma = 0 shot-noise identity", None, || {
        let obs = MzObservables::at(FRAC_PI_2);
        let mut worst: f64 = 0.0;
        for k in 1..=7 {
            let r = 0.2 * k as f64;
            for eta in ETAS {
                let c = SourceConfig::new(Family::SqSPh, r, 0.0, eta)?;
                let expected = 1.0 / (eta * c.n_tot()).sqrt();
                worst = worst.max((obs.sensitivity(&c)?.s - expected).abs());
            }
        }
        Ok((worst <= 1e-10, format!("max |s - (eta N)^-1/2| = {worst:.2e} (tol 1e-10)")))
    })
}

/// `Q_F / N_tot^2` tends to 2/3 and 10/9 at fixed `gamma = 1`.
pub fn check_heisenberg_asymptotes() -> CheckResult {
    timed("5", "Heisenberg-scaling asymptotes", None, || {
        let mut ok = true;
        let mut parts = Vec::new();
        for fam in [Family::SqSPh, Family::SqVac] {
            let rep = asymptote_report(fam, 1.0, 1.0, 7.0)?;
            let last = rep.rows.last().expect("non-empty");
            let within = rep.qfi_within == Some(true);
            let monotone = rep.qfi_monotone == Some(true);
            ok &= within && monotone;
            parts.push(format!(
                "{fam}: Q_F/N^2 = {:.6} vs {:.6}, monotone {monotone}",
                last.qfi_ratio,
                rep.qfi_limit.expect("squeezed families have a limit")
            ));
        }
        Ok((ok, parts.join("; ")))
    })
}

/// `s sqrt(eta N)` tends to 1 and to `sqrt(3 (3 - 2 eta))`.
pub fn check_shot_noise_asymptotes() -> CheckResult {
    timed("6", "shot-noise asymptotes", None, || {
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for eta in ETAS {
            for fam in [Family::SqSPh, Family::SqVac] {
                let rep = asymptote_report(fam, 1.0, eta, 7.0)?;
                let last = rep.rows.last().expect("non-empty");
                worst = worst.max((rep.sens_metric(last) - 1.0).abs());
                ok &= rep.sens_within;
            }
        }
        Ok((ok, format!("max relative deviation at r = 7: {worst:.2e} (tol 5e-2)")))
    })
}

/// `s >= (1 - 1e-4)/sqrt(F)` and `1/sqrt(F) >= (1 - 1e-4)/sqrt(Q_F)`, with `F`
/// from the photocount distribution. The slack applies to each link; the
/// report also counts points where `F` exceeds `Q_F` at all.
pub fn check_bound_chain(opts: &VerifyOptions) -> CheckResult {
    timed("7", "bound chain s >= 1/sqrt(F) >= 1/sqrt(Q_F)", Some(Duration::from_secs(120)), || {
        let slack = 1.0 - 1e-4;
        let mut violations = Vec::new();
        let grid = oracle_grid();
        let mut tightest: f64 = f64::INFINITY;
        let mut excess: f64 = 0.0;
        let mut strict_misses = 0;
        for &(fam, r, gamma, eta, phi) in &grid {
            let c = SourceConfig::new(fam, r, gamma, eta)?;
            let wp = WorkingPoint::new(phi)?;
            let f = classical_fisher(&c, wp, opts.truncation())?;
            let q = qfi(&c)?;
            let s = match sensitivity(&c, wp) {
                Ok(rec) => rec.s,
                Err(MetroError::DegenerateWorkingPoint(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            if !(s >= slack / f.sqrt() && 1.0 / f.sqrt() >= slack / q.sqrt()) {
                violations.push(format!("{fam} r={r} gamma={gamma} eta={eta} phi={phi:.4}"));
            }
            if f > q {
                strict_misses += 1;
                excess = excess.max(f / q - 1.0);
            }
            if s.is_finite() {
                tightest = tightest.min(s * f.sqrt());
            }
        }
        let detail = if violations.is_empty() {
            format!(
                "{} points, min s sqrt(F) = {tightest:.6}; F > Q_F at {strict_misses} saturated points, \
                 max F/Q_F - 1 = {excess:.1e}",
                grid.len()
            )
        } else {
            format!("violated at {}", violations.join(", "))
        };
        Ok((violations.is_empty(), detail))
    })
}

/// Sensitivity threshold shrinks as the efficiency grows.
pub fn check_threshold_monotonicity() -> CheckResult {
    timed("8", "sensitivity threshold nonincreasing in eta", None, || {
        let mut ok = true;
        let mut parts = Vec::new();
        let obs = MzObservables::at(FRAC_PI_2);
        for r in [0.5, 1.0, 1.5] {
            let th: Vec<f64> = ETAS
                .iter()
                .map(|&eta| threshold_gamma_sens(r, eta))
                .collect::<Result<_>>()?;
            ok &= th.windows(2).all(|w| w[0] >= w[1]);
            for (&eta, &g) in ETAS.iter().zip(&th) {
                if g.is_finite() && g > 0.0 {
                    let sph = SourceConfig::new(Family::SqSPh, r, g, eta)?;
                    let s = obs.sensitivity(&sph)?.s;
                    ok &= sensitivity_difference(&obs, r, g, eta)?.abs() <= 1e-6 * s;
                }
            }
            parts.push(format!("r={r}: [{:.6}, {:.6}, {:.6}]", th[0], th[1], th[2]));
        }
        Ok((ok, format!("gamma_th at eta = 0.4, 0.8, 1.0: {}", parts.join("; "))))
    })
}

/// Single crossover in `r` from squeezed vacuum to squeezed single photon.
pub fn check_regime_structure() -> CheckResult {
    timed("9", "high-energy regime crossover", None, || {
        let obs = MzObservables::at(FRAC_PI_2);
        let rs: Vec<f64> = (1..200).map(|k| k as f64 * 1e-2).collect();
        let signs = rs
            .iter()
            .map(|&r| Ok(sensitivity_difference(&obs, r, 1.0, 1.0)?.signum()))
            .collect::<Result<Vec<f64>>>()?;
        // sensitivity_difference = s(SqVac) - s(SqSPh)
        let changes: Vec<usize> = (1..signs.len()).filter(|&k| signs[k] != signs[k - 1]).collect();
        let ok = changes.len() == 1 && signs[0] < 0.0 && signs[signs.len() - 1] > 0.0;
        let detail = match changes.as_slice() {
            [k] => format!("single sign change, r* in ({:.2}, {:.2})", rs[k - 1], rs[*k]),
            _ => format!("{} sign changes on the grid", changes.len()),
        };
        Ok((ok, detail))
    })
}

pub fn check_unit_anchor() -> CheckResult {
    timed("10", "12 dB unit anchor", None, || {
        let db = db_convert(1.38, DbDirection::RToDb)?;
        Ok(((11.9..=12.1).contains(&db), format!("r = 1.38 -> {db:.4} dB")))
    })
}

/// Leakage control on the oracle grid: prepared and evolved states keep
/// their norm, and doubling the basis leaves photon moments unchanged.
pub fn check_truncation(opts: &VerifyOptions) -> CheckResult {
    timed("T", "truncation control", None, || {
        let n_a = OperatorPolynomial::number_a();
        let n_b = OperatorPolynomial::number_b();
        let n_a2 = n_a.mul(&n_a)?;
        let mut worst_deficit: f64 = 0.0;
        let mut worst_shift: f64 = 0.0;
        for r in [0.0, 0.5, 1.0] {
            for gamma in [0.0, 1.0, 2.0] {
                for fam in Family::ALL {
                    let c = SourceConfig::new(fam, r, gamma, 1.0)?;
                    let u = mz_network(FRAC_PI_4);
                    let small = c.oracle_input(opts.truncation())?;
                    let (da, db) = small.dims();
                    let large = c.oracle_input(Truncation::Fixed(2 * da.max(db)))?;
                    let (small, large) = (apply_network(&small, &u), apply_network(&large, &u));
                    worst_deficit = worst_deficit.max(small.norm_deficit().abs());
                    for p in [&n_a, &n_b, &n_a2] {
                        worst_shift = worst_shift.max((expectation(&small, p) - expectation(&large, p)).norm());
                    }
                }
            }
        }
        Ok((
            worst_deficit <= LEAKAGE_TOLERANCE && worst_shift <= 10.0 * LEAKAGE_TOLERANCE,
            format!("max norm deficit {worst_deficit:.2e}, max moment shift on doubling {worst_shift:.2e}"),
        ))
    })
}

pub fn run_verification(opts: &VerifyOptions) -> VerifyReport {
    let checks = vec![
        check_coherent_benchmark(),
        check_qfi_threshold(opts),
        check_oracle_equivalence(opts),
        check_degenerate_identity(),
        check_heisenberg_asymptotes(),
        check_shot_noise_asymptotes(),
        check_bound_chain(opts),
        check_threshold_monotonicity(),
        check_regime_structure(),
        check_unit_anchor(),
        check_truncation(opts),
    ];
    VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
