//! Measurements of a conversion run: discounted regret against oracle
//! comparators, the deterministic regret and variance bounds, witness
//! stationarity of the EMA iterates, and the closed-form parameter
//! calculators and converters.

mod params;
mod regret;
mod run;
mod stationarity;

pub use params::{
    complexity_tables, convert_goldstein, convert_second_order, convert_smooth, l1_l2_reduction,
    theorem1_params, theorem2_params, ComplexityInputs, ComplexityReport, SmoothConversion,
    TheoremParams,
};
pub use regret::{comparator_direction, BoundCheck, Flavor, RegretLedger, REGRET_SLACK};
pub use run::{AnalyzingSink, RunAnalyzer, RunSummary, StepReport};
pub use stationarity::{
    stationarity_report, variance_bound_check, StationarityAccumulator, StationarityReport,
    VarianceCheck, VARIANCE_CLAMP,
};
