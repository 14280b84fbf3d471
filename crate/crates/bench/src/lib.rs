//! Shared inputs for the benchmarks.

use sqzmetro_core::{Family, SourceConfig};

/// One configuration per family at moderate squeezing and loss.
pub fn representative_configs(r: f64, gamma: f64, eta: f64) -> Vec<SourceConfig> {
    Family::ALL
        .iter()
        .map(|&fam| SourceConfig::new(fam, r, gamma, eta).expect("valid benchmark point"))
        .collect()
}
