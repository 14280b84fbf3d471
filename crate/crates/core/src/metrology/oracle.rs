//! Brute-force figures of merit on truncated Fock spaces.
//!
//! Loss enters only through binomial thinning of the simulated photocount
//! distribution; the closed-form loss model is not used here.

use num_complex::Complex64 as C64;

use crate::error::{MetroError, Result};
use crate::fock_oracle::{apply_network, expectation, photocount_distribution, thin_joint, Truncation, TwoModeKet};
use crate::interferometer::{SourceConfig, WorkingPoint};
use crate::metrology::{SensitivityRecord, DEGENERATE_SLOPE};
use crate::moment_engine::OperatorPolynomial;
use crate::network::NetworkUnitary;

/// Central-difference step for the classical Fisher information.
pub const FD_STEP: f64 = 1e-4;

/// Required relative agreement of `F` computed with steps `h` and `h/2`.
pub const FD_AGREEMENT: f64 = 1e-6;

/// Outcomes with lower probability are left out of the Fisher sum.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

fn after_first_splitter(config: &SourceConfig, truncation: Truncation) -> Result<TwoModeKet> {
    let input = config.oracle_input(truncation)?;
    Ok(apply_network(&input, &NetworkUnitary::beam_splitter()))
}

fn phase(state: &TwoModeKet, phi: f64) -> TwoModeKet {
    let u = C64::from_polar(1.0, phi);
    state.scaled(|n_a, _| u.powi(n_a as i32))
}

/// `4 Var(n_a)` in the arm that picks up the phase.
pub fn oracle_qfi(config: &SourceConfig, truncation: Truncation) -> Result<f64> {
    let arm = after_first_splitter(config, truncation)?;
    let n = OperatorPolynomial::number_a();
    let n2 = n.mul(&n)?;
    let mean = expectation(&arm, &n).re;
    let second = expectation(&arm, &n2).re;
    Ok(4.0 * (second - mean * mean))
}

/// Output state at phase `phi` given the state after the first splitter.
fn output_state(arm: &TwoModeKet, phi: f64) -> TwoModeKet {
    apply_network(&phase(arm, phi), &NetworkUnitary::beam_splitter())
}

/// Photocurrent-difference statistics from the thinned joint photocount
/// distribution; the slope uses the exact state derivative
/// `d|psi>/dphi = BS (i n_a) P(phi) |arm>`.
pub fn oracle_sensitivity(
    config: &SourceConfig,
    working_point: WorkingPoint,
    truncation: Truncation,
) -> Result<SensitivityRecord> {
    let phi = working_point.phi();
    let arm = after_first_splitter(config, truncation)?;
    let shifted = phase(&arm, phi);
    let tangent = shifted.scaled(|n_a, _| C64::new(0.0, n_a as f64));
    let bs = NetworkUnitary::beam_splitter();
    let out = apply_network(&shifted, &bs);
    let d_out = apply_network(&tangent, &bs);
    let (dim_a, dim_b) = out.dims();
    debug_assert_eq!(out.dims(), d_out.dims());

    let dist = photocount_distribution(&out, config.eta())?;
    let raw_slope: Vec<f64> = out
        .amplitudes()
        .iter()
        .zip(d_out.amplitudes())
        .map(|(c, dc)| 2.0 * (c.conj() * dc).re)
        .collect();
    let slope_dist = thin_joint(&raw_slope, dim_a, dim_b, config.eta());

    let (o, var_o) = dist.difference_moments();
    let mut slope = 0.0;
    for n_a in 0..dim_a {
        for n_b in 0..dim_b {
            slope += slope_dist[n_a * dim_b + n_b] * (n_a as f64 - n_b as f64);
        }
    }
    if !(slope.abs() >= DEGENERATE_SLOPE) {
        return Err(MetroError::DegenerateWorkingPoint(slope.abs()));
    }
    Ok(SensitivityRecord {
        o,
        do_dphi: slope,
        var_o,
        s: var_o.max(0.0).sqrt() / slope.abs(),
    })
}

/// Classical Fisher information of the joint photocount distribution seen by
/// detectors of efficiency `eta`.
///
/// `dp/dphi` is a Richardson combination of central differences at `h` and
/// `h/2`; the Fisher sums at the two steps must agree to [`FD_AGREEMENT`].
pub fn classical_fisher(
    config: &SourceConfig,
    working_point: WorkingPoint,
    truncation: Truncation,
) -> Result<f64> {
    let phi = working_point.phi();
    let arm = after_first_splitter(config, truncation)?;
    let eta = config.eta();
    let probs = |p: f64| -> Result<Vec<f64>> {
        Ok(photocount_distribution(&output_state(&arm, p), eta)?
            .probabilities()
            .to_vec())
    };
    let center = probs(phi)?;
    let h = FD_STEP;
    let (plus, minus) = (probs(phi + h)?, probs(phi - h)?);
    let (plus_half, minus_half) = (probs(phi + 0.5 * h)?, probs(phi - 0.5 * h)?);

    let mut coarse = 0.0;
    let mut fine = 0.0;
    let mut combined = 0.0;
    for k in 0..center.len() {
        let p = center[k];
        if p <= PROBABILITY_FLOOR {
            continue;
        }
        let d_h = (plus[k] - minus[k]) / (2.0 * h);
        let d_half = (plus_half[k] - minus_half[k]) / h;
        let d_rich = (4.0 * d_half - d_h) / 3.0;
        coarse += d_h * d_h / p;
        fine += d_half * d_half / p;
        combined += d_rich * d_rich / p;
    }
    if (coarse - fine).abs() > FD_AGREEMENT * fine.abs().max(f64::MIN_POSITIVE) {
        return Err(MetroError::UnstableDerivative { coarse, fine });
    }
    Ok(combined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::Family;
    use crate::metrology::{qfi, sensitivity};
    use approx::assert_relative_eq;

    #[test]
    fn coherent_probe_fisher() {
        // two independent Poisson outputs: F = N_tot, half of Q_F = 2 N_tot
        let c = SourceConfig::from_energy(Family::Ch, 0.0, 1.0, 1.0).unwrap();
        let wp = WorkingPoint::default();
        let f = classical_fisher(&c, wp, Truncation::Auto).unwrap();
        assert!((f - 1.0).abs() < 1e-7, "{f}");
        let s = oracle_sensitivity(&c, wp, Truncation::Auto).unwrap().s;
        assert!((1.0 / (s * s) - f).abs() < 1e-7);
    }

    #[test]
    fn oracle_qfi_single_photon() {
        let c = SourceConfig::new(Family::SqSPh, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(oracle_qfi(&c, Truncation::Auto).unwrap(), 5.0, max_relative = 1e-10);
    }

    #[test]
    fn oracle_tracks_analytic_with_loss() {
        let wp = WorkingPoint::new(0.9).unwrap();
        for fam in Family::ALL {
            let c = SourceConfig::new(fam, 0.5, 1.0, 0.6).unwrap();
            let brute = oracle_sensitivity(&c, wp, Truncation::Auto).unwrap();
            let exact = sensitivity(&c, wp).unwrap();
            for (x, y) in [
                (brute.o, exact.o),
                (brute.do_dphi, exact.do_dphi),
                (brute.var_o, exact.var_o),
                (brute.s, exact.s),
            ] {
                assert!((x - y).abs() <= 1e-8 * y.abs().max(1.0), "{fam}: {x} vs {y}");
            }
            let q = oracle_qfi(&c, Truncation::Auto).unwrap();
            assert!((q - qfi(&c).unwrap()).abs() <= 1e-8 * q);
        }
    }

    #[test]
    fn fisher_respects_bounds() {
        let wp = WorkingPoint::default();
        for fam in [Family::SqSPh, Family::SqVac] {
            let c = SourceConfig::new(fam, 0.6, 0.5, 0.8).unwrap();
            let f = classical_fisher(&c, wp, Truncation::Auto).unwrap();
            let q = qfi(&c).unwrap();
            let s = sensitivity(&c, wp).unwrap().s;
            assert!(f <= q + 1e-6, "{fam}: F={f} Q={q}");
            assert!(1.0 / f.sqrt() <= s + 1e-6, "{fam}: F={f} s={s}");
        }
    }

    #[test]
    fn tiny_truncation_is_reported() {
        let c = SourceConfig::new(Family::SqSPh, 0.5, 1.0, 1.0).unwrap();
        assert!(matches!(
            oracle_qfi(&c, Truncation::Fixed(4)),
            Err(MetroError::TruncationOverflow { .. })
        ));
    }
}
