//! Link-level models for multi-transmitter diffusive molecular communication
//! with concentration shift keying.
//!
//! Two modulation designs are supported: CSK-CT, where every transmitter
//! shares one set of `M - 1` detection thresholds derived from the distance
//! limits of the network, and a benchmark CSK that computes a geometric-mean
//! threshold set per transmitter. Error probabilities are available in closed
//! form (Gaussian tails) and from a Binomial slot simulator.
//!
//! Units: micrometres and seconds throughout.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN. Reference
// constants keep every digit of their source.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod channel;
pub mod detection;
mod error;
pub mod link;
pub mod modulation;
pub mod montecarlo;
pub mod numeric;

pub use channel::{
    averaged_cir, build_cir_table, cir, cum_hit, hit_rate, ChannelParams, CirTable, Position,
    Topology,
};
pub use detection::{decode, network_error_prob, symbol_error_prob, CsvContext, ErrorReport};
pub use error::{Error, Result};
pub use link::{
    conditional_moments, expected_isi, expected_signal, ConcentrationSet, SignalMoments,
};
pub use modulation::{
    count_threshold_computations, design_concentrations, design_thresholds_benchmark,
    design_thresholds_cskct, gamma_ratio, limits_spacing, ComplexityCount, ModulationDesign,
    Scheme, Thresholds,
};
pub use montecarlo::{estimate_cir_empirical, ArrivalModel, SimResult, SymbolSource, TrialConfig};
