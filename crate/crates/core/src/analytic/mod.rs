//! Closed-form probabilities.
//!
//! - [`sic`]: decoding, cancellation, the full chain, TSD fit, kurtosis.
//! - [`load`]: load law, order statistics, rate coverage.
//! - [`maxsir`]: maximum instantaneous SIR association.
//! - [`rea`]: range-expanded area users.

pub mod load;
pub mod maxsir;
pub mod rea;
pub mod sic;

pub use load::{
    aps_in_range, load_order_statistic_pmf, load_pmf, rate_coverage_max_sir, rate_coverage_min_load,
    rate_coverage_min_load_sic, LoadTable,
};
pub use maxsir::{max_inst_sir_gain_integral, outage_max_inst_sir, ps_sic_max_inst_sir};
pub use rea::ps_ic_rea;
pub use sic::{
    kurtosis_after_cancellation, ps_can, ps_can_tsd, ps_ic, ps_ic_with, ps_plain, ps_sic, ps_sic_with,
    tsd_conditional_cancel, tsd_cumulant, IcOptions, SicGainBreakdown, SicLevel, TsdParams,
};
