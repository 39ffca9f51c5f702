//! Finite-blocklength achievability for energy-harvesting channels under
//! the save-and-transmit scheme: analytic bounds, capacity-cost
//! computation for discrete channels, and seeded Monte Carlo validation.

pub mod bounds;
pub mod capacity;
pub mod config;
pub mod dmc;
pub mod energy;
pub mod error;
pub mod normal;
pub mod seed;
pub mod sim;
pub mod sweep;

pub use bounds::{BoundReport, CodebookSize, EhRate, LogMTerms, NormalApproxReport, Validity};
pub use capacity::{capacity_cost, CapacityCostResult};
pub use config::AwgnEhConfig;
pub use dmc::DmcSpec;
pub use energy::{make_energy_process, EnergyKind, EnergyProcess};
pub use error::{Error, Result};
pub use sim::{Mode, Scenario, SimConfig, SimReport};
pub use sweep::{run_sweep, SweepSpec};

/// Formats `x` with 12 significant digits, without trailing zeros.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    rounded.to_string()
}
