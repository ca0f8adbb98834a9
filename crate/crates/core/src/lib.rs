//! Forward-link system simulator for full-duplex massive MIMO cellular
//! networks with low-resolution converters.
//!
//! The pipeline is: [`scenario`] parameters, [`geometry`] drops on a
//! hexagonal lattice, [`channel`] large-scale gains and per-user link
//! budgets, closed-form [`sqinr`], and [`montecarlo`] campaigns over many
//! drops. [`asymptotics`] evaluates the large-system limits and
//! [`hardening`] is a signal-level oracle for the closed forms.

pub mod asymptotics;
pub mod channel;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod hardening;
pub mod montecarlo;
pub mod quantization;
pub mod rng;
pub mod scenario;
pub mod sqinr;

pub use channel::{assemble_link_budget, LinkBudget, NetworkRealization};
pub use error::{Error, Result};
pub use exec::{with_workers, Execution};
pub use montecarlo::{empirical_cdf, run_campaign, run_drop, DropStatistics, EmpiricalCdf};
pub use quantization::{rho_for_bits, QuantizationModel, Resolution};
pub use scenario::{default_scenario, Scenario};
pub use sqinr::{sqinr_theorem6, SqinrBreakdown};
