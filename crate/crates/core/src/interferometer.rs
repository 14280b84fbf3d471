//! Source families, the shared energy bookkeeping, and the Mach-Zehnder
//! network.
//!
//! All three families are parametrized by the squeezing `r` and the
//! coherent amplitude `gamma` that accompanies the squeezed single photon,
//! so that every family at the same `(r, gamma)` carries the same total
//! photon number `N_tot = gamma^2 + cosh 2r + sinh^2 r`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{MetroError, Result};
use crate::fock_oracle::{coherent_ket, squeezed_fock_ket, Seed, Truncation, TwoModeKet};
use crate::moment_engine::{bogoliubov_moments, coherent_moments, MomentTable, MAX_SQUEEZING};
use crate::network::NetworkUnitary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Squeezed single photon `S(r)|1>` with a coherent state.
    #[serde(alias = "sqsph")]
    SqSPh,
    /// Squeezed vacuum `S(r)|0>` with a brighter coherent state.
    #[serde(alias = "sqvac")]
    SqVac,
    /// Coherent state mixed with vacuum.
    #[serde(alias = "ch", alias = "coherent")]
    Ch,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::SqSPh, Family::SqVac, Family::Ch];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::SqSPh => "SqSPh",
            Family::SqVac => "SqVac",
            Family::Ch => "Ch",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = MetroError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sqsph" => Ok(Family::SqSPh),
            "sqvac" => Ok(Family::SqVac),
            "ch" | "coherent" => Ok(Family::Ch),
            _ => Err(MetroError::InvalidSpec(format!("unknown family '{s}'"))),
        }
    }
}

/// Mean photon number of `S(r)|1>`, also the floor of `N_tot` for the
/// single-photon family.
pub fn squeezed_photon_energy(r: f64) -> f64 {
    (2.0 * r).cosh() + r.sinh().powi(2)
}

/// State fed to port `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PortA {
    Squeezed { r: f64, seed: Seed },
    Vacuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceConfig {
    family: Family,
    r: f64,
    n_tot: f64,
    eta: f64,
}

fn check_r(r: f64) -> Result<()> {
    if r.is_finite() && (0.0..=MAX_SQUEEZING).contains(&r) {
        Ok(())
    } else {
        Err(MetroError::ParameterRange {
            name: "r",
            value: r,
            reason: "squeezing must lie in [0, 10]",
        })
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(MetroError::InvalidEfficiency(eta))
    }
}

impl SourceConfig {
    /// Configuration at squeezing `r` and single-photon-convention amplitude `gamma`.
    pub fn new(family: Family, r: f64, gamma: f64, eta: f64) -> Result<Self> {
        check_r(r)?;
        check_eta(eta)?;
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(MetroError::ParameterRange {
                name: "gamma",
                value: gamma,
                reason: "coherent amplitude must be finite and non-negative",
            });
        }
        Ok(Self {
            family,
            r,
            n_tot: gamma * gamma + squeezed_photon_energy(r),
            eta,
        })
    }

    /// Configuration carrying `n_tot` photons in total.
    pub fn from_energy(family: Family, r: f64, n_tot: f64, eta: f64) -> Result<Self> {
        check_r(r)?;
        check_eta(eta)?;
        let minimum = Self::minimum_energy(family, r);
        if !n_tot.is_finite() || n_tot < minimum {
            return Err(MetroError::InfeasibleEnergy {
                requested: n_tot,
                minimum,
            });
        }
        Ok(Self {
            family,
            r,
            n_tot,
            eta,
        })
    }

    pub fn minimum_energy(family: Family, r: f64) -> f64 {
        match family {
            Family::SqSPh => squeezed_photon_energy(r),
            Family::SqVac => r.sinh().powi(2),
            Family::Ch => 0.0,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn n_tot(&self) -> f64 {
        self.n_tot
    }

    pub fn with_family(&self, family: Family) -> Result<Self> {
        Self::from_energy(family, self.r, self.n_tot, self.eta)
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self { eta, ..*self })
    }

    /// The shared coherent amplitude, when `N_tot` reaches the single-photon floor.
    pub fn gamma(&self) -> Option<f64> {
        let g2 = self.n_tot - squeezed_photon_energy(self.r);
        if g2 >= 0.0 {
            Some(g2.sqrt())
        } else if g2 >= -1e-12 * self.n_tot {
            Some(0.0)
        } else {
            None
        }
    }

    pub fn port_a(&self) -> PortA {
        match self.family {
            Family::SqSPh => PortA::Squeezed {
                r: self.r,
                seed: Seed::SinglePhoton,
            },
            Family::SqVac => PortA::Squeezed {
                r: self.r,
                seed: Seed::Vacuum,
            },
            Family::Ch => PortA::Vacuum,
        }
    }

    /// Mean photon number entering port `a`.
    pub fn mode_a_energy(&self) -> f64 {
        match self.family {
            Family::SqSPh => squeezed_photon_energy(self.r),
            Family::SqVac => self.r.sinh().powi(2),
            Family::Ch => 0.0,
        }
    }

    /// Real coherent amplitude entering port `b`.
    pub fn mode_b_amplitude(&self) -> f64 {
        (self.n_tot - self.mode_a_energy()).max(0.0).sqrt()
    }

    pub fn moment_tables(&self) -> Result<(MomentTable, MomentTable)> {
        let a = match self.port_a() {
            PortA::Squeezed { r, seed } => bogoliubov_moments(r, seed)?,
            PortA::Vacuum => coherent_moments(0.0)?,
        };
        Ok((a, coherent_moments(self.mode_b_amplitude())?))
    }

    /// Truncated product input state; `Fixed` dims apply to both modes.
    pub fn oracle_input(&self, truncation: Truncation) -> Result<TwoModeKet> {
        let a = match self.port_a() {
            PortA::Squeezed { r, seed } => squeezed_fock_ket(r, seed, truncation)?,
            PortA::Vacuum => coherent_ket(0.0, truncation)?,
        };
        let b = coherent_ket(self.mode_b_amplitude(), truncation)?;
        Ok(TwoModeKet::product(&a, &b))
    }
}

/// Phase at which the interferometer is operated, in `(0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkingPoint(f64);

impl WorkingPoint {
    pub fn new(phi: f64) -> Result<Self> {
        if phi > 0.0 && phi < PI {
            Ok(Self(phi))
        } else {
            Err(MetroError::ParameterRange {
                name: "phi",
                value: phi,
                reason: "working point must lie in (0, pi)",
            })
        }
    }

    pub fn phi(&self) -> f64 {
        self.0
    }
}

impl Default for WorkingPoint {
    fn default() -> Self {
        Self(FRAC_PI_2)
    }
}

/// Beam splitter, phase shift on arm `a`, and the same beam splitter again.
pub fn mz_network(phi: f64) -> NetworkUnitary {
    let bs = NetworkUnitary::beam_splitter();
    bs.after(&NetworkUnitary::phase_shift(phi)).after(&bs)
}

/// `d/dphi` of [`mz_network`].
pub fn mz_network_derivative(phi: f64) -> Matrix2<C64> {
    let bs = *NetworkUnitary::beam_splitter().matrix();
    let zero = C64::new(0.0, 0.0);
    let dphase = Matrix2::new(C64::new(0.0, 1.0) * C64::from_polar(1.0, phi), zero, zero, zero);
    bs * dphase * bs
}
