//! Crossover amplitudes between the squeezed-single-photon and
//! squeezed-vacuum configurations at equal squeezing and equal `N_tot`.

use serde::Serialize;

use crate::error::{MetroError, Result};
use crate::interferometer::{Family, SourceConfig, WorkingPoint};
use crate::metrology::{qfi, MzObservables};
use crate::roots::bisect;

/// Upper end of the amplitude bracket searched for the sensitivity crossover.
pub const SENS_BRACKET_MAX: f64 = 50.0;

/// Bisection tolerance on the amplitude for the sensitivity crossover,
/// tight enough that the residual stays below `1e-6 s`.
pub const SENS_TOLERANCE: f64 = 1e-9;

/// Grid spacing used to locate sign changes before bisecting.
const SENS_SCAN_STEP: f64 = 0.05;

/// `gamma_th(r) = e^{-r} sqrt(2 + sinh 4r) / 2`: above it the squeezed single
/// photon has the larger quantum Fisher information.
pub fn threshold_gamma_qfi(r: f64) -> f64 {
    0.5 * (-r).exp() * (2.0 + (4.0 * r).sinh()).sqrt()
}

/// `Q_F(SqSPh) - Q_F(SqVac)` at shared `(r, gamma)`.
pub fn qfi_difference(r: f64, gamma: f64) -> Result<f64> {
    let sph = SourceConfig::new(Family::SqSPh, r, gamma, 1.0)?;
    let vac = sph.with_family(Family::SqVac)?;
    Ok(qfi(&sph)? - qfi(&vac)?)
}

/// Root of [`qfi_difference`] in `gamma`, found by bisection; independent of
/// the closed form.
pub fn threshold_gamma_qfi_bisect(r: f64) -> Result<f64> {
    let below = qfi_difference(r, 0.0)?;
    if below >= 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while qfi_difference(r, hi)? <= 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(MetroError::BracketFailure {
                lo: 0.0,
                hi,
                reason: "quantum Fisher information difference never turns positive",
            });
        }
    }
    let mut failure = None;
    let root = bisect(
        |g| match qfi_difference(r, g) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        hi,
        1e-12,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(root),
    }
}

/// `s(SqVac) - s(SqSPh)` at shared `(r, gamma, eta)`; positive where the
/// squeezed single photon is more sensitive.
pub fn sensitivity_difference(obs: &MzObservables, r: f64, gamma: f64, eta: f64) -> Result<f64> {
    let sph = SourceConfig::new(Family::SqSPh, r, gamma, eta)?;
    let vac = sph.with_family(Family::SqVac)?;
    Ok(obs.sensitivity(&vac)?.s - obs.sensitivity(&sph)?.s)
}

/// Largest `gamma` in `[0, 50]` up to which the squeezed single photon is at
/// least as sensitive as squeezed vacuum, at `phi = pi/2`.
///
/// Returns `0` when squeezed vacuum wins on the whole bracket and
/// `f64::INFINITY` when the squeezed single photon does.
pub fn threshold_gamma_sens(r: f64, eta: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(MetroError::ParameterRange {
            name: "r",
            value: r,
            reason: "sensitivity threshold needs r > 0",
        });
    }
    let obs = MzObservables::at(WorkingPoint::default().phi());
    let diff = |g: f64| sensitivity_difference(&obs, r, g, eta);
    let steps = (SENS_BRACKET_MAX / SENS_SCAN_STEP).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 * SENS_SCAN_STEP).collect();
    let values = grid.iter().map(|&g| diff(g)).collect::<Result<Vec<f64>>>()?;

    if values.iter().all(|v| *v < 0.0) {
        return Ok(0.0);
    }
    if values.iter().all(|v| *v >= 0.0) {
        return Ok(f64::INFINITY);
    }
    let crossings: Vec<usize> = values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[0] >= 0.0) != (w[1] >= 0.0))
        .map(|(k, _)| k)
        .collect();
    if crossings.len() != 1 || values[0] < 0.0 {
        return Err(MetroError::BracketFailure {
            lo: 0.0,
            hi: SENS_BRACKET_MAX,
            reason: "sensitivity difference does not change sign exactly once from SqSPh to SqVac",
        });
    }
    let k = crossings[0];
    bisect(
        |g| diff(g).unwrap_or(f64::NAN),
        grid[k],
        grid[k + 1],
        SENS_TOLERANCE,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdKind {
    Qfi,
    Sensitivity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdCurve {
    pub kind: ThresholdKind,
    pub eta: Option<f64>,
    /// `(r, gamma_threshold)`
    pub points: Vec<(f64, f64)>,
}

pub fn qfi_threshold_curve(rs: &[f64]) -> ThresholdCurve {
    ThresholdCurve {
        kind: ThresholdKind::Qfi,
        eta: None,
        points: rs.iter().map(|&r| (r, threshold_gamma_qfi(r))).collect(),
    }
}

pub fn sensitivity_threshold_curve(rs: &[f64], eta: f64) -> Result<ThresholdCurve> {
    let points = rs
        .iter()
        .map(|&r| Ok((r, threshold_gamma_sens(r, eta)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ThresholdCurve {
        kind: ThresholdKind::Sensitivity,
        eta: Some(eta),
        points,
    })
}
