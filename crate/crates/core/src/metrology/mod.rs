//! Figures of merit for phase estimation.
//!
//! The analytic functions here ([`qfi`], [`sensitivity`]) go through the
//! moment engine. [`oracle`] holds the brute-force counterparts and the
//! classical Fisher information of the photocount distribution.

mod asymptote;
pub mod oracle;
mod threshold;

pub use asymptote::{asymptote_report, AsymptoteReport, AsymptoteRow, ASYMPTOTE_TOLERANCE};
pub use oracle::{classical_fisher, oracle_qfi, oracle_sensitivity};
pub use threshold::{
    qfi_difference, qfi_threshold_curve, sensitivity_difference, sensitivity_threshold_curve,
    threshold_gamma_qfi, threshold_gamma_qfi_bisect, threshold_gamma_sens, ThresholdCurve,
    ThresholdKind, SENS_BRACKET_MAX,
};

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{MetroError, Result};
use crate::interferometer::{mz_network, mz_network_derivative, Family, SourceConfig, WorkingPoint};
use crate::moment_engine::{
    evaluate, heisenberg_derivative, heisenberg_substitute, OperatorPolynomial,
};
use crate::network::NetworkUnitary;

/// `|dO/dphi|` below this is treated as a fringe extremum.
pub const DEGENERATE_SLOPE: f64 = 1e-12;

/// Generator `G = a_BS^dag a_BS` and `G^2`, written in the input modes.
fn generator_moments() -> &'static (OperatorPolynomial, OperatorPolynomial) {
    static CELL: OnceLock<(OperatorPolynomial, OperatorPolynomial)> = OnceLock::new();
    CELL.get_or_init(|| {
        let n = OperatorPolynomial::number_a();
        let n2 = n.mul(&n).expect("degree 4");
        let bs = NetworkUnitary::beam_splitter();
        (heisenberg_substitute(&n, &bs), heisenberg_substitute(&n2, &bs))
    })
}

/// Quantum Fisher information `4 Var(G)` of the lossless probe.
///
/// Independent of the phase and of the detector efficiency.
pub fn qfi(config: &SourceConfig) -> Result<f64> {
    let (ta, tb) = config.moment_tables()?;
    let (g, g2) = generator_moments();
    let mean = evaluate(g, &ta, &tb)?.re;
    let second = evaluate(g2, &ta, &tb)?.re;
    Ok(4.0 * (second - mean * mean))
}

/// Photocurrent difference statistics at the interferometer output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityRecord {
    /// Mean of `N_a - N_b` at the output.
    pub o: f64,
    pub do_dphi: f64,
    pub var_o: f64,
    /// `sqrt(var_o) / |do_dphi|`
    pub s: f64,
}

/// `N_a - N_b`, its square and its phase derivative pulled back through the
/// Mach-Zehnder network at a fixed phase.
#[derive(Debug, Clone)]
pub struct MzObservables {
    phi: f64,
    difference: OperatorPolynomial,
    difference_sq: OperatorPolynomial,
    slope: OperatorPolynomial,
}

impl MzObservables {
    pub fn at(phi: f64) -> Self {
        let d = OperatorPolynomial::number_a().sub(&OperatorPolynomial::number_b());
        let d2 = d.mul(&d).expect("degree 4");
        let u = mz_network(phi);
        let du = mz_network_derivative(phi);
        Self {
            phi,
            difference: heisenberg_substitute(&d, &u),
            difference_sq: heisenberg_substitute(&d2, &u),
            slope: heisenberg_derivative(&d, &u, &du),
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Lossless `(O, dO/dphi, Var O, N_tot)` from the moment tables.
    pub fn ideal(&self, config: &SourceConfig) -> Result<(f64, f64, f64, f64)> {
        let (ta, tb) = config.moment_tables()?;
        let o = evaluate(&self.difference, &ta, &tb)?.re;
        let o2 = evaluate(&self.difference_sq, &ta, &tb)?.re;
        let slope = evaluate(&self.slope, &ta, &tb)?.re;
        let n = ta.mean_photons() + tb.mean_photons();
        Ok((o, slope, o2 - o * o, n))
    }

    pub fn sensitivity(&self, config: &SourceConfig) -> Result<SensitivityRecord> {
        let (o, slope, var, n) = self.ideal(config)?;
        let eta = config.eta();
        // binomial thinning at both detectors
        let o_eta = eta * o;
        let slope_eta = eta * slope;
        let var_eta = eta * eta * var + eta * (1.0 - eta) * n;
        if !(slope_eta.abs() >= DEGENERATE_SLOPE) {
            return Err(MetroError::DegenerateWorkingPoint(slope_eta.abs()));
        }
        Ok(SensitivityRecord {
            o: o_eta,
            do_dphi: slope_eta,
            var_o: var_eta,
            s: var_eta.max(0.0).sqrt() / slope_eta.abs(),
        })
    }
}

/// Difference-photocurrent sensitivity at the working point, including
/// detector inefficiency.
pub fn sensitivity(config: &SourceConfig, working_point: WorkingPoint) -> Result<SensitivityRecord> {
    MzObservables::at(working_point.phi()).sensitivity(config)
}

/// One row of a sweep dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRecord {
    pub family: Family,
    pub r: f64,
    pub gamma: Option<f64>,
    pub eta: f64,
    pub phi: f64,
    pub n_tot: Option<f64>,
    pub q_f: Option<f64>,
    pub o: Option<f64>,
    pub do_dphi: Option<f64>,
    pub var_o: Option<f64>,
    pub s: Option<f64>,
    pub f: Option<f64>,
    pub error: Option<String>,
}

impl MetricRecord {
    pub fn empty(config: &SourceConfig, phi: f64) -> Self {
        Self {
            family: config.family(),
            r: config.r(),
            gamma: config.gamma(),
            eta: config.eta(),
            phi,
            n_tot: Some(config.n_tot()),
            q_f: None,
            o: None,
            do_dphi: None,
            var_o: None,
            s: None,
            f: None,
            error: None,
        }
    }

    pub fn with_sensitivity(mut self, rec: SensitivityRecord) -> Self {
        self.o = Some(rec.o);
        self.do_dphi = Some(rec.do_dphi);
        self.var_o = Some(rec.var_o);
        self.s = Some(rec.s);
        self
    }
}

/// `(1/sqrt(F), 1/sqrt(Q_F))` lower bounds on the sensitivity.
pub fn bound_chain(f: f64, q_f: f64) -> (f64, f64) {
    (1.0 / f.sqrt(), 1.0 / q_f.sqrt())
}
