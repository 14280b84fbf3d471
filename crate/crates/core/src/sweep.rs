//! Parameter sweeps producing flat datasets, and squeezing unit conversion.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{MetroError, Result};
use crate::fock_oracle::Truncation;
use crate::interferometer::{Family, SourceConfig, WorkingPoint};
use crate::metrology::{
    classical_fisher, oracle_qfi, oracle_sensitivity, qfi, threshold_gamma_qfi,
    threshold_gamma_qfi_bisect, threshold_gamma_sens, MetricRecord, MzObservables,
};
use crate::moment_engine::MAX_SQUEEZING;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Qfi,
    Sensitivity,
    Fisher,
    ThresholdQfi,
    ThresholdSens,
}

impl Metric {
    pub fn is_threshold(self) -> bool {
        matches!(self, Metric::ThresholdQfi | Metric::ThresholdSens)
    }
}

impl FromStr for Metric {
    type Err = MetroError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qfi" => Ok(Metric::Qfi),
            "sensitivity" => Ok(Metric::Sensitivity),
            "fisher" => Ok(Metric::Fisher),
            "threshold-qfi" => Ok(Metric::ThresholdQfi),
            "threshold-sens" => Ok(Metric::ThresholdSens),
            _ => Err(MetroError::InvalidSpec(format!("unknown metric '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = MetroError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(MetroError::InvalidSpec(format!("unknown format '{s}'"))),
        }
    }
}

fn default_families() -> Vec<Family> {
    Family::ALL.to_vec()
}

fn default_eta() -> Vec<f64> {
    vec![1.0]
}

fn default_phi() -> f64 {
    FRAC_PI_2
}

/// A grid of source configurations and the quantity to evaluate on it.
///
/// Points are laid out on `r x gamma x eta x family`. When `n_tot` is
/// given it replaces the `gamma` axis and every family carries that many
/// photons; points below a family's energy floor become error rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub metric: Metric,
    #[serde(default = "default_families")]
    pub families: Vec<Family>,
    pub r_min: f64,
    pub r_max: f64,
    pub r_step: f64,
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_tot: Option<Vec<f64>>,
    #[serde(default = "default_eta")]
    pub eta: Vec<f64>,
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(default)]
    pub format: OutputFormat,
    /// Evaluate on the truncated-Fock path instead of the moment engine.
    #[serde(default)]
    pub oracle: bool,
    /// Fixed single-mode basis size for the truncated-Fock path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<usize>,
}

fn invalid(msg: impl Into<String>) -> MetroError {
    MetroError::InvalidSpec(msg.into())
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_step > 0.0) || !self.r_step.is_finite() {
            return Err(invalid(format!("r_step must be positive, got {}", self.r_step)));
        }
        if !(0.0 <= self.r_min && self.r_min <= self.r_max && self.r_max <= MAX_SQUEEZING) {
            return Err(invalid(format!(
                "r range [{}, {}] must satisfy 0 <= r_min <= r_max <= {MAX_SQUEEZING}",
                self.r_min, self.r_max
            )));
        }
        if self.families.is_empty() {
            return Err(invalid("family list is empty"));
        }
        if self.eta.is_empty() {
            return Err(invalid("eta list is empty"));
        }
        if let Some(bad) = self.eta.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
            return Err(invalid(format!("eta = {bad} outside (0, 1]")));
        }
        if !(self.phi > 0.0 && self.phi < PI) {
            return Err(invalid(format!("phi = {} outside (0, pi)", self.phi)));
        }
        if self.dims == Some(0) {
            return Err(invalid("dims must be at least 1"));
        }
        if self.metric.is_threshold() {
            return Ok(());
        }
        match &self.n_tot {
            Some(_) if !self.gamma.is_empty() => {
                Err(invalid("give either a gamma list or an n_tot list, not both"))
            }
            Some(list) if list.is_empty() => Err(invalid("n_tot list is empty")),
            Some(list) => match list.iter().find(|n| !(**n >= 0.0) || !n.is_finite()) {
                Some(bad) => Err(invalid(format!("n_tot = {bad} must be finite and >= 0"))),
                None => Ok(()),
            },
            None if self.gamma.is_empty() => Err(invalid("gamma list is empty")),
            None => match self.gamma.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
                Some(bad) => Err(invalid(format!("gamma = {bad} must be finite and >= 0"))),
                None => Ok(()),
            },
        }
    }

    /// `r_min, r_min + r_step, ...` up to `r_max`, tolerant to rounding at the end.
    pub fn r_grid(&self) -> Vec<f64> {
        let span = (self.r_max - self.r_min) / self.r_step;
        let count = (span + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| self.r_min + k as f64 * self.r_step)
            .collect()
    }

    fn truncation(&self) -> Truncation {
        self.dims.map_or(Truncation::Auto, Truncation::Fixed)
    }
}

/// Energy coordinate of a grid point.
#[derive(Debug, Clone, Copy)]
enum Energy {
    Gamma(f64),
    Total(f64),
}

/// Crossover amplitude at one `(r, eta)` point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub kind: Metric,
    pub r: f64,
    pub eta: Option<f64>,
    #[serde(serialize_with = "finite_or_inf")]
    pub gamma_th: Option<f64>,
    pub error: Option<String>,
}

fn finite_or_inf<S: Serializer>(value: &Option<f64>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    match value {
        Some(v) if v.is_infinite() => ser.serialize_str("inf"),
        Some(v) => ser.serialize_f64(*v),
        None => ser.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Metrics(Vec<MetricRecord>),
    Thresholds(Vec<ThresholdRow>),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Metrics(rows) => rows.len(),
            Dataset::Thresholds(rows) => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn error_count(&self) -> usize {
        match self {
            Dataset::Metrics(rows) => rows.iter().filter(|r| r.error.is_some()).count(),
            Dataset::Thresholds(rows) => rows.iter().filter(|r| r.error.is_some()).count(),
        }
    }

    pub fn write(&self, format: OutputFormat, out: impl Write) -> Result<()> {
        match self {
            Dataset::Metrics(rows) => write_rows(rows, format, out),
            Dataset::Thresholds(rows) => write_rows(rows, format, out),
        }
    }

    pub fn to_bytes(&self, format: OutputFormat) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write(format, &mut buf)?;
        Ok(buf)
    }
}

fn write_rows<T: Serialize>(rows: &[T], format: OutputFormat, mut out: impl Write) -> Result<()> {
    let fail = |e: &dyn fmt::Display| MetroError::Output(e.to_string());
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row).map_err(|e| fail(&e))?;
            }
            w.flush().map_err(|e| fail(&e))
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows).map_err(|e| fail(&e))?;
            writeln!(out).map_err(|e| fail(&e))
        }
    }
}

/// Fixed CSV header of metric datasets.
pub const METRIC_HEADER: &str = "family,r,gamma,eta,phi,n_tot,q_f,o,do_dphi,var_o,s,f,error";

fn metric_row(spec: &SweepSpec, obs: &MzObservables, family: Family, r: f64, energy: Energy, eta: f64) -> MetricRecord {
    let config = match energy {
        Energy::Gamma(g) => SourceConfig::new(family, r, g, eta),
        Energy::Total(n) => SourceConfig::from_energy(family, r, n, eta),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => {
            let (gamma, n_tot) = match energy {
                Energy::Gamma(g) => (Some(g), None),
                Energy::Total(n) => (None, Some(n)),
            };
            return MetricRecord {
                family,
                r,
                gamma,
                eta,
                phi: spec.phi,
                n_tot,
                q_f: None,
                o: None,
                do_dphi: None,
                var_o: None,
                s: None,
                f: None,
                error: Some(e.to_string()),
            };
        }
    };
    let mut row = MetricRecord::empty(&config, spec.phi);
    if let Err(e) = fill_metric(spec, obs, &config, &mut row) {
        row.error = Some(e.to_string());
    }
    row
}

fn fill_metric(spec: &SweepSpec, obs: &MzObservables, config: &SourceConfig, row: &mut MetricRecord) -> Result<()> {
    let wp = WorkingPoint::new(spec.phi)?;
    let truncation = spec.truncation();
    let with_sens = |row: &mut MetricRecord| -> Result<()> {
        let rec = if spec.oracle {
            oracle_sensitivity(config, wp, truncation)?
        } else {
            obs.sensitivity(config)?
        };
        *row = row.clone().with_sensitivity(rec);
        Ok(())
    };
    match spec.metric {
        Metric::Qfi => {
            row.q_f = Some(if spec.oracle {
                oracle_qfi(config, truncation)?
            } else {
                qfi(config)?
            });
        }
        Metric::Sensitivity => with_sens(row)?,
        Metric::Fisher => {
            row.f = Some(classical_fisher(config, wp, truncation)?);
            row.q_f = Some(qfi(config)?);
            with_sens(row)?;
        }
        Metric::ThresholdQfi | Metric::ThresholdSens => unreachable!("threshold metrics use their own rows"),
    }
    Ok(())
}

fn threshold_row(spec: &SweepSpec, r: f64, eta: Option<f64>) -> ThresholdRow {
    let value = match (spec.metric, eta) {
        (Metric::ThresholdQfi, _) if spec.oracle => threshold_gamma_qfi_bisect(r),
        (Metric::ThresholdQfi, _) => Ok(threshold_gamma_qfi(r)),
        (_, Some(eta)) => threshold_gamma_sens(r, eta),
        (_, None) => unreachable!("sensitivity thresholds carry an efficiency"),
    };
    let (gamma_th, error) = match value {
        Ok(g) => (Some(g), None),
        Err(e) => (None, Some(e.to_string())),
    };
    ThresholdRow {
        kind: spec.metric,
        r,
        eta,
        gamma_th,
        error,
    }
}

/// Evaluate the spec on its grid.
///
/// Rows come out r-major, then gamma (or `n_tot`), then eta, then family,
/// independent of how the work is scheduled.
pub fn run_sweep(spec: &SweepSpec) -> Result<Dataset> {
    spec.validate()?;
    let rs = spec.r_grid();
    match spec.metric {
        Metric::ThresholdQfi => {
            let rows = rs.par_iter().map(|&r| threshold_row(spec, r, None)).collect();
            Ok(Dataset::Thresholds(rows))
        }
        Metric::ThresholdSens => {
            let points: Vec<(f64, f64)> = rs
                .iter()
                .flat_map(|&r| spec.eta.iter().map(move |&eta| (r, eta)))
                .collect();
            let rows = points
                .par_iter()
                .map(|&(r, eta)| threshold_row(spec, r, Some(eta)))
                .collect();
            Ok(Dataset::Thresholds(rows))
        }
        _ => {
            let energies: Vec<Energy> = match &spec.n_tot {
                Some(list) => list.iter().map(|&n| Energy::Total(n)).collect(),
                None => spec.gamma.iter().map(|&g| Energy::Gamma(g)).collect(),
            };
            let mut points = Vec::with_capacity(rs.len() * energies.len() * spec.eta.len() * spec.families.len());
            for &r in &rs {
                for &energy in &energies {
                    for &eta in &spec.eta {
                        for &family in &spec.families {
                            points.push((family, r, energy, eta));
                        }
                    }
                }
            }
            let obs = MzObservables::at(spec.phi);
            let rows = points
                .par_iter()
                .map(|&(family, r, energy, eta)| metric_row(spec, &obs, family, r, energy, eta))
                .collect();
            Ok(Dataset::Metrics(rows))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbDirection {
    DbToR,
    RToDb,
}

impl FromStr for DbDirection {
    type Err = MetroError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "db-to-r" => Ok(DbDirection::DbToR),
            "r-to-db" => Ok(DbDirection::RToDb),
            _ => Err(invalid(format!("unknown direction '{s}' (db-to-r or r-to-db)"))),
        }
    }
}

/// `dB = 10 log10(e^{2r})` and its inverse.
pub fn db_convert(value: f64, direction: DbDirection) -> Result<f64> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(MetroError::ParameterRange {
            name: "value",
            value,
            reason: "squeezing must be finite and non-negative",
        });
    }
    let per_r = 20.0 * std::f64::consts::LOG10_E;
    Ok(match direction {
        DbDirection::RToDb => per_r * value,
        DbDirection::DbToR => value / per_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(metric: Metric) -> SweepSpec {
        SweepSpec {
            metric,
            families: Family::ALL.to_vec(),
            r_min: 0.0,
            r_max: 0.5,
            r_step: 0.25,
            gamma: vec![1.0],
            n_tot: None,
            eta: vec![1.0, 0.8],
            phi: FRAC_PI_2,
            format: OutputFormat::Csv,
            oracle: false,
            dims: None,
        }
    }

    #[test]
    fn db_anchor_and_round_trip() {
        let db = db_convert(1.38, DbDirection::RToDb).unwrap();
        assert_eq!(format!("{db:.2}"), "11.99");
        assert_eq!(db_convert(0.0, DbDirection::RToDb).unwrap(), 0.0);
        let r = db_convert(12.0, DbDirection::DbToR).unwrap();
        assert_eq!(format!("{r:.4}"), "1.3816");
        for r in [0.0, 0.3, 1.38, 7.0] {
            let back = db_convert(db_convert(r, DbDirection::RToDb).unwrap(), DbDirection::DbToR).unwrap();
            assert!((back - r).abs() <= 1e-12);
        }
        assert!(db_convert(-1.0, DbDirection::DbToR).is_err());
    }

    #[test]
    fn empty_gamma_is_rejected() {
        let mut s = spec(Metric::Qfi);
        s.gamma.clear();
        assert!(matches!(s.validate(), Err(MetroError::InvalidSpec(_))));
        assert!(run_sweep(&s).is_err());
    }

    #[test]
    fn grid_includes_endpoint() {
        let mut s = spec(Metric::Qfi);
        s.r_min = 0.0;
        s.r_max = 2.0;
        s.r_step = 0.1;
        let g = s.r_grid();
        assert_eq!(g.len(), 21);
        assert!((g[20] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn row_order_is_r_major() {
        let rows = match run_sweep(&spec(Metric::Qfi)).unwrap() {
            Dataset::Metrics(rows) => rows,
            _ => unreachable!(),
        };
        assert_eq!(rows.len(), 3 * 2 * 3);
        let keys: Vec<(f64, f64, Family)> = rows.iter().map(|r| (r.r, r.eta, r.family)).collect();
        assert_eq!(keys[0], (0.0, 1.0, Family::SqSPh));
        assert_eq!(keys[1], (0.0, 1.0, Family::SqVac));
        assert_eq!(keys[3], (0.0, 0.8, Family::SqSPh));
        assert_eq!(keys[6], (0.25, 1.0, Family::SqSPh));
    }

    #[test]
    fn bare_squeezed_photon_rows_hit_shot_noise() {
        let mut s = spec(Metric::Sensitivity);
        s.gamma = vec![0.0];
        s.eta = vec![1.0, 0.8, 0.4];
        s.families = vec![Family::SqSPh];
        s.r_min = 0.1;
        s.r_max = 1.3;
        s.r_step = 0.3;
        let Dataset::Metrics(rows) = run_sweep(&s).unwrap() else { unreachable!() };
        for row in rows {
            let expected = 1.0 / (row.eta * row.n_tot.unwrap()).sqrt();
            assert!((row.s.unwrap() - expected).abs() <= 1e-12 * expected);
        }
    }

    #[test]
    fn infeasible_energy_becomes_error_row() {
        let mut s = spec(Metric::Qfi);
        s.gamma.clear();
        s.n_tot = Some(vec![0.5]);
        s.r_min = 0.5;
        s.r_max = 0.5;
        let Dataset::Metrics(rows) = run_sweep(&s).unwrap() else { unreachable!() };
        assert_eq!(rows.len(), 6);
        let by_family = |f: Family| rows.iter().find(|r| r.family == f).unwrap();
        assert!(by_family(Family::SqSPh).error.as_deref().unwrap().contains("infeasible"));
        assert!(by_family(Family::SqVac).error.is_none());
        assert!(by_family(Family::Ch).q_f.is_some());
    }

    #[test]
    fn csv_header_is_fixed() {
        let data = run_sweep(&spec(Metric::Sensitivity)).unwrap();
        let text = String::from_utf8(data.to_bytes(OutputFormat::Csv).unwrap()).unwrap();
        assert_eq!(text.lines().next().unwrap(), METRIC_HEADER);
        let json: serde_json::Value =
            serde_json::from_slice(&data.to_bytes(OutputFormat::Json).unwrap()).unwrap();
        let keys: Vec<&str> = json[0].as_object().unwrap().keys().map(String::as_str).collect();
        let mut expected: Vec<&str> = METRIC_HEADER.split(',').collect();
        expected.sort_unstable();
        assert_eq!(keys, expected);
    }

    #[test]
    fn sensitivity_threshold_rows() {
        let mut s = spec(Metric::ThresholdSens);
        s.r_min = 0.0;
        s.r_max = 1.0;
        s.r_step = 0.5;
        s.eta = vec![0.4];
        let Dataset::Thresholds(rows) = run_sweep(&s).unwrap() else { unreachable!() };
        assert_eq!(rows.len(), 3);
        assert!(rows[0].error.is_some());
        assert!(rows[2].gamma_th.unwrap() > 0.0);
    }

    #[test]
    fn infinity_is_written_as_text() {
        let rows = vec![ThresholdRow {
            kind: Metric::ThresholdSens,
            r: 2.0,
            eta: Some(0.4),
            gamma_th: Some(f64::INFINITY),
            error: None,
        }];
        let data = Dataset::Thresholds(rows);
        let csv = String::from_utf8(data.to_bytes(OutputFormat::Csv).unwrap()).unwrap();
        assert_eq!(csv, "kind,r,eta,gamma_th,error\nthreshold-sens,2.0,0.4,inf,\n");
        let json = String::from_utf8(data.to_bytes(OutputFormat::Json).unwrap()).unwrap();
        assert!(json.contains("\"gamma_th\": \"inf\""));
    }
}
