//! Shared fixtures for the integration suites: the worked-example system,
//! seeded random stable systems, and lifted-versus-switched comparisons.

#![allow(dead_code)]

use interlace_core::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const T_FAST: f64 = 0.1;
pub const N_REF: usize = 3;

/// The reference controller, assembled exactly from its golden parallel
/// terms (the self-consistent print of the worked example).
pub fn reference_controller() -> RationalTF {
    let t = T_FAST;
    let fast = RationalTF::from_descending(&[0.2798], &[1.0, -0.7056], t).unwrap();
    let b12 = RationalTF::from_descending(&[0.4793, -0.4782], &[1.0, -2.0, 1.0], t).unwrap();
    let b34 = RationalTF::from_descending(&[-0.2567, 0.2591], &[1.0, -1.973, 0.9732], t).unwrap();
    let b5 = RationalTF::from_descending(&[-0.03991], &[1.0, -0.9072], t).unwrap();
    fast.add(&b12).unwrap().add(&b34).unwrap().add(&b5).unwrap()
}

/// Continuous plant (s + 1) / (s^2 + 2 s + 1.5), discretized with the
/// zero-order hold at the fast period.
pub fn reference_plant() -> StateSpace {
    let cont = RationalTF::from_descending(&[1.0, 1.0], &[1.0, 2.0, 1.5], 0.0).unwrap();
    cont.to_state_space().unwrap().c2d_zoh(T_FAST).unwrap()
}

pub fn reference_blocks() -> BlockSet {
    decompose(&reference_controller(), 0.85).unwrap()
}

/// Published execution order: the simple real-pole block first, then the
/// double-integrator block, then the resonant pair.
pub fn reference_schedule(input: InputStrategy, output: OutputStrategy) -> InterlaceSchedule {
    InterlaceSchedule::from_order(N_REF, &[2, 0, 1], input, output).unwrap()
}

pub const ALL_STRATEGIES: [(InputStrategy, OutputStrategy); 4] = [
    (InputStrategy::Fast, OutputStrategy::Fast),
    (InputStrategy::Fast, OutputStrategy::Slow),
    (InputStrategy::Slow, OutputStrategy::Fast),
    (InputStrategy::Slow, OutputStrategy::Slow),
];

/// Maximum pointwise difference between the de-lifted closed-loop response
/// and the switched simulation for the same reference.
pub fn lifted_vs_sim_error(
    blocks: &BlockSet,
    sched: &InterlaceSchedule,
    plant: &StateSpace,
    reference: &SignalSeq,
) -> f64 {
    let k = compose_open_loop(blocks, sched).unwrap();
    let g = lift_dual_rate(plant, sched.n, sched.n).unwrap();
    let cl = close_loop(&k, &g).unwrap();
    let lifted = cl.simulate(&reference.values);
    let run = run_interlaced(blocks, sched, plant, reference, lifted.len()).unwrap();
    lifted
        .iter()
        .zip(run.output.values.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Open-loop lifted model (controller followed by the lifted plant).
pub fn open_loop_lifted(
    blocks: &BlockSet,
    sched: &InterlaceSchedule,
    plant: &StateSpace,
) -> LiftedSystem {
    let k = compose_open_loop(blocks, sched).unwrap();
    let g = lift_dual_rate(plant, sched.n, sched.n).unwrap();
    series(&k, &g).unwrap()
}

pub fn closed_loop_lifted(
    blocks: &BlockSet,
    sched: &InterlaceSchedule,
    plant: &StateSpace,
) -> LiftedSystem {
    let k = compose_open_loop(blocks, sched).unwrap();
    let g = lift_dual_rate(plant, sched.n, sched.n).unwrap();
    close_loop(&k, &g).unwrap()
}

/// -3 dB bandwidth of the closed loop's metaperiod-sum response.
pub fn closed_loop_bandwidth(cl: &LiftedSystem) -> f64 {
    let dc = t0_sum_response(&dual_rate_response(cl, 1.0e-6).unwrap()).norm();
    let limit = dc * 10f64.powf(-3.0 / 20.0);
    let grid = log_grid(1.0e-3, std::f64::consts::PI / T_FAST * 0.999, 2000);
    for w in grid {
        let g = t0_sum_response(&dual_rate_response(cl, w).unwrap()).norm();
        if g < limit {
            return w;
        }
    }
    f64::INFINITY
}

pub struct RandomSystem {
    pub controller: RationalTF,
    pub blocks: BlockSet,
    pub plant: StateSpace,
    pub n: usize,
}

fn random_plant(rng: &mut ChaCha8Rng) -> StateSpace {
    let p1: f64 = rng.random_range(0.3..0.85);
    let p2: f64 = rng.random_range(0.1..0.75);
    let z: f64 = rng.random_range(-0.4..0.6);
    let gain: f64 = rng.random_range(0.3..1.2);
    let num = Polynomial::linear(z).scale(gain);
    let den = &Polynomial::linear(p1) * &Polynomial::linear(p2);
    RationalTF::new(num, den, T_FAST)
        .unwrap()
        .to_state_space()
        .unwrap()
}

fn random_slow_groups(
    rng: &mut ChaCha8Rng,
    count: usize,
    allow_second_order: bool,
) -> Vec<PoleGroup> {
    loop {
        let mut groups = Vec::with_capacity(count);
        for _ in 0..count {
            let kind: f64 = rng.random_range(0.0..1.0);
            if !allow_second_order || kind < 0.55 {
                groups.push(PoleGroup::real(rng.random_range(0.86..0.98)));
            } else if kind < 0.85 {
                let r: f64 = rng.random_range(0.86..0.97);
                let theta: f64 = rng.random_range(0.04..0.45);
                groups.push(PoleGroup::complex_pair(num_complex::Complex64::from_polar(
                    r, theta,
                )));
            } else {
                groups.push(PoleGroup::repeated_real(rng.random_range(0.88..0.97), 2));
            }
        }
        // keep groups comfortably separated so clustering cannot merge them
        let mut ok = true;
        let roots: Vec<_> = groups.iter().flat_map(|g| g.all_roots()).collect();
        'outer: for (i, a) in roots.iter().enumerate() {
            for b in roots.iter().skip(i + 1) {
                if (a - b).norm() < 8.0e-3 && (a - b.conj()).norm() > 1.0e-9 {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if ok {
            return groups;
        }
    }
}

/// Random stable controller/plant pair with a full schedule of `n` slow
/// blocks. The controller gain is backed off until every strategy's closed
/// loop has spectral radius below `rho_max`.
pub fn random_system(
    rng: &mut ChaCha8Rng,
    n: usize,
    rho_max: f64,
    allow_second_order: bool,
) -> RandomSystem {
    let plant = random_plant(rng);
    'regen: loop {
        let slow = random_slow_groups(rng, n, allow_second_order);
        let fast_pole: f64 = rng.random_range(0.1..0.6);
        let mut den = Polynomial::linear(fast_pole);
        for g in &slow {
            den = &den * &g.characteristic();
        }
        let deg = den.degree();
        let num = Polynomial::new((0..deg).map(|_| rng.random_range(-1.0..1.0)).collect());
        if num.degree() == 0 && num.coeff(0).abs() < 1.0e-3 {
            continue 'regen;
        }
        let mut gain: f64 = rng.random_range(0.2..1.0);
        for _ in 0..60 {
            let controller = match RationalTF::new(num.scale(gain), den.clone(), T_FAST) {
                Ok(c) => c,
                Err(_) => continue 'regen,
            };
            let blocks = match decompose(&controller, 0.85) {
                Ok(b) => b,
                Err(_) => continue 'regen,
            };
            if blocks.slow_blocks.len() != n {
                continue 'regen;
            }
            let mut all_stable = true;
            for (i, o) in ALL_STRATEGIES {
                let sched = InterlaceSchedule::new(n, (0..n).collect(), i, o).unwrap();
                let k = compose_open_loop(&blocks, &sched).unwrap();
                let g = lift_dual_rate(&plant, n, n).unwrap();
                let cl = close_loop(&k, &g).unwrap();
                if spectral_radius(&cl).unwrap() >= rho_max {
                    all_stable = false;
                    break;
                }
            }
            if all_stable {
                return RandomSystem {
                    controller,
                    blocks,
                    plant,
                    n,
                };
            }
            gain *= 0.5;
        }
        // pathological draw; try a new one
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Least-squares fit accuracy target helper: relative error between two
/// component vectors, normalized by the larger vector magnitude.
pub fn component_error(a: &[num_complex::Complex64], b: &[num_complex::Complex64]) -> f64 {
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|c| c.norm())
        .fold(0.0, f64::max)
        .max(1.0e-30);
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / scale
}
