//! Reference implementations the analyzer is checked against.

mod naive;
mod sld;

pub use naive::naive_analyze;
pub use sld::{
    check_soundness, entry_instances, ground_universe, sld_solutions, ConcreteSolution, SldConfig, SldOutcome,
    SoundnessReport,
};
