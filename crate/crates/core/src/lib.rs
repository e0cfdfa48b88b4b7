//! Interlaced execution of LTI digital controllers.
//!
//! A fast single-rate controller is split into fast and slow modes, the slow
//! modes become staggered slow-rate blocks executed one per fast instant,
//! and the resulting periodic time-varying loop is analyzed two ways: an
//! exact lifted LTI model over the metaperiod (with its dual-rate frequency
//! response) and a fast-rate switched simulation that executes the schedule
//! exactly as a constrained device would.
//!
//! Pipeline: [`decomposition`] splits the controller, [`interlace`] converts
//! slow blocks across rates and models the schedule, [`lifting`] builds the
//! metaperiod LTI models, [`freqresp`] sweeps and reads margins, and [`sim`]
//! provides the ground-truth runs. [`tfcore`] holds the shared numeric
//! types.

pub mod decomposition;
pub mod error;
pub mod freqresp;
pub mod interlace;
pub mod lifting;
pub mod sim;
pub mod tfcore;

pub use decomposition::{
    classify_poles, decompose, partial_fractions, series_decompose, slow_single_rate_check,
    BlockSet, DecompositionKind, PoleGroup, PoleGroupKind, StabilityReport,
};
pub use error::{Error, Result};
pub use freqresp::{
    bode_sweep, dual_rate_response, log_grid, margins, ripple_index, t0_sum_response, BodeData,
    FreqComponents, MarginReport,
};
pub use interlace::{
    build_w_polynomial, compute_load_profile, to_dual_rate_block, to_slow_block, validate_schedule,
    DualRateBlock, InputStrategy, InterlaceSchedule, LoadProfile, OutputStrategy, SlowBlock,
    ValidationReport,
};
pub use lifting::{
    augment_block, close_loop, compose_open_loop, input_selector, lift_dual_rate,
    output_hold_pattern, series, spectral_radius, AugmentedBlock, LiftedSystem,
};
pub use sim::{
    overshoot_percent, probe_interlaced, run_interlaced, run_single_rate, settling_time,
    sinusoid_probe, InterlacedController, SimRun,
};
pub use tfcore::{Polynomial, RationalTF, SignalSeq, StateSpace};
