//! Fixtures shared by the pipeline benchmarks.

use interlace_core::*;

pub const T_FAST: f64 = 0.1;
pub const N: usize = 3;

/// Sixth-order benchmark controller: double integrator, lightly damped
/// pair, slow and fast real poles.
pub fn benchmark_controller() -> RationalTF {
    let t = T_FAST;
    let fast = RationalTF::from_descending(&[0.2798], &[1.0, -0.7056], t).unwrap();
    let b12 = RationalTF::from_descending(&[0.4793, -0.4782], &[1.0, -2.0, 1.0], t).unwrap();
    let b34 = RationalTF::from_descending(&[-0.2567, 0.2591], &[1.0, -1.973, 0.9732], t).unwrap();
    let b5 = RationalTF::from_descending(&[-0.03991], &[1.0, -0.9072], t).unwrap();
    fast.add(&b12).unwrap().add(&b34).unwrap().add(&b5).unwrap()
}

pub fn benchmark_plant() -> StateSpace {
    RationalTF::from_descending(&[1.0, 1.0], &[1.0, 2.0, 1.5], 0.0)
        .unwrap()
        .to_state_space()
        .unwrap()
        .c2d_zoh(T_FAST)
        .unwrap()
}

pub fn benchmark_setup() -> (BlockSet, InterlaceSchedule, StateSpace) {
    let blocks = decompose(&benchmark_controller(), 0.85).unwrap();
    let sched =
        InterlaceSchedule::from_order(N, &[2, 0, 1], InputStrategy::Fast, OutputStrategy::Fast)
            .unwrap();
    (blocks, sched, benchmark_plant())
}
