//! Ground-truth fast-rate simulation: executes the interlaced controller as
//! a resource-constrained device would (one slow block fired per fast
//! instant, strategy-selected inputs, held or boundary-injected outputs),
//! closes the loop with the zero-order-hold plant, and tracks per-instant
//! multiply-accumulate counts.

use std::io::Write;

use nalgebra::DVector;

use crate::decomposition::{BlockSet, DecompositionKind};
use crate::error::{Error, Result};
use crate::interlace::{
    mac_cost, to_slow_block, validate_schedule, InputStrategy, InterlaceSchedule, OutputStrategy,
};
use crate::tfcore::{RationalTF, SignalSeq, StateSpace};

const DIVERGENCE_LIMIT: f64 = 1.0e9;

/// One closed-loop run at the fast rate.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub reference: SignalSeq,
    pub output: SignalSeq,
    pub control: SignalSeq,
    /// Multiply-accumulate count charged at each fast instant.
    pub mac_counts: Vec<u64>,
}

impl SimRun {
    pub fn len(&self) -> usize {
        self.output.len()
    }

    pub fn is_empty(&self) -> bool {
        self.output.is_empty()
    }

    /// CSV columns: t_seconds, reference, output, control, mac_count.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t_seconds,reference,output,control,mac_count")?;
        let t = self.output.period;
        for k in 0..self.len() {
            writeln!(
                w,
                "{:.12e},{:.12e},{:.12e},{:.12e},{}",
                k as f64 * t,
                self.reference.values[k],
                self.output.values[k],
                self.control.values[k],
                self.mac_counts[k]
            )?;
        }
        Ok(())
    }
}

struct SlowBlockState {
    ss: StateSpace,
    x: DVector<f64>,
    /// Output computed at the block's last firing.
    held: f64,
    phase: usize,
    cost: u64,
}

/// Stepper for the interlaced controller: call once per fast instant.
pub struct InterlacedController {
    fast: StateSpace,
    fast_cost: u64,
    x_fast: DVector<f64>,
    blocks: Vec<SlowBlockState>,
    n: usize,
    input: InputStrategy,
    output: OutputStrategy,
    series: bool,
    step: usize,
    latched_error: f64,
    injected_sum: f64,
}

impl InterlacedController {
    pub fn new(blocks: &BlockSet, sched: &InterlaceSchedule) -> Result<Self> {
        let report = validate_schedule(sched, blocks);
        if !report.is_valid() {
            return Err(Error::InvalidSchedule(report.violations.join("; ")));
        }
        let fast = blocks.fast.to_state_space()?;
        let mut slow = Vec::with_capacity(blocks.slow_blocks.len());
        for (bi, b) in blocks.slow_blocks.iter().enumerate() {
            let tf = to_slow_block(b, sched.n)?.tf;
            let cost = mac_cost(&tf);
            let ss = tf.to_state_space()?;
            let x = DVector::zeros(ss.order());
            slow.push(SlowBlockState {
                ss,
                x,
                held: 0.0,
                phase: sched.phase_of_block[bi],
                cost,
            });
        }
        Ok(InterlacedController {
            fast_cost: mac_cost(&blocks.fast),
            x_fast: DVector::zeros(fast.order()),
            fast,
            blocks: slow,
            n: sched.n,
            input: sched.input,
            output: sched.output,
            series: blocks.decomposition == DecompositionKind::Series,
            step: 0,
            latched_error: 0.0,
            injected_sum: 0.0,
        })
    }

    /// Advances one fast instant with error sample `e`; returns the control
    /// value and the multiply-accumulate count charged at this instant.
    pub fn step(&mut self, e: f64) -> (f64, u64) {
        let phase = self.step % self.n;
        let mut macs = 0u64;
        if phase == 0 {
            self.latched_error = e;
            // boundary injection uses the outputs computed during the
            // previous metaperiod, before any block fires in this one
            self.injected_sum = self.blocks.iter().map(|b| b.held).sum();
        }
        for block in self.blocks.iter_mut() {
            if block.phase == phase {
                let v = match self.input {
                    InputStrategy::Fast => e,
                    InputStrategy::Slow => self.latched_error,
                };
                let vin = DVector::from_vec(vec![v]);
                let w = block.ss.step(&mut block.x, &vin);
                block.held = w[0];
                macs += block.cost;
            }
        }
        let slow_part = match self.output {
            OutputStrategy::Fast => self.blocks.iter().map(|b| b.held).sum(),
            OutputStrategy::Slow => self.injected_sum,
        };
        let fast_in = if self.series { slow_part } else { e };
        let uin = DVector::from_vec(vec![fast_in]);
        let uf = self.fast.step(&mut self.x_fast, &uin)[0];
        macs += self.fast_cost;
        let u = if self.series { uf } else { uf + slow_part };
        self.step += 1;
        (u, macs)
    }
}

/// Closed-loop interlaced run: the plant output is sampled, the error formed,
/// the fast part executes every instant, the slow block at phase
/// `k mod N` fires with its strategy-selected input, and the control goes
/// through the fast zero-order hold.
pub fn run_interlaced(
    blocks: &BlockSet,
    sched: &InterlaceSchedule,
    plant: &StateSpace,
    reference: &SignalSeq,
    steps: usize,
) -> Result<SimRun> {
    require_strictly_proper(plant)?;
    let mut ctrl = InterlacedController::new(blocks, sched)?;
    let mut xp = DVector::<f64>::zeros(plant.order());
    let mut out = Vec::with_capacity(steps);
    let mut control = Vec::with_capacity(steps);
    let mut macs = Vec::with_capacity(steps);
    let mut refs = Vec::with_capacity(steps);
    for k in 0..steps {
        let r = reference.values.get(k).copied().unwrap_or(0.0);
        let y = output_of(plant, &xp);
        if y.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Diverged {
                step: k,
                value: y.abs(),
            });
        }
        let (u, m) = ctrl.step(r - y);
        plant.step(&mut xp, &DVector::from_vec(vec![u]));
        refs.push(r);
        out.push(y);
        control.push(u);
        macs.push(m);
    }
    let t = plant.period;
    Ok(SimRun {
        reference: SignalSeq::new(refs, t),
        output: SignalSeq::new(out, t),
        control: SignalSeq::new(control, t),
        mac_counts: macs,
    })
}

fn output_of(plant: &StateSpace, x: &DVector<f64>) -> f64 {
    // strictly proper sampling: feedthrough would need the current control
    let mut y = 0.0;
    for i in 0..plant.order() {
        y += plant.c[(0, i)] * x[i];
    }
    y
}

fn require_strictly_proper(plant: &StateSpace) -> Result<()> {
    if plant.is_continuous() {
        return Err(Error::ExpectedDiscrete);
    }
    if plant.d.iter().any(|&v| v != 0.0) {
        return Err(Error::Dimension(
            "plant must be strictly proper (no direct feedthrough)".into(),
        ));
    }
    Ok(())
}

/// Standard single-rate closed loop. The controller may run at the plant
/// period or at an integer multiple of it; in the slow case the controller
/// fires at metaperiod boundaries and its control is held on the fast grid.
pub fn run_single_rate(
    controller: &RationalTF,
    plant: &StateSpace,
    reference: &SignalSeq,
    steps: usize,
) -> Result<SimRun> {
    require_strictly_proper(plant)?;
    let t = plant.period;
    let ratio = controller.period / t;
    let n = ratio.round() as usize;
    if n < 1 || (ratio - n as f64).abs() > 1.0e-9 {
        return Err(Error::PeriodMismatch(format!(
            "controller period {} is not an integer multiple of the plant period {}",
            controller.period, t
        )));
    }
    let k = controller.to_state_space()?;
    let cost = mac_cost(controller);
    let mut xk = DVector::<f64>::zeros(k.order());
    let mut xp = DVector::<f64>::zeros(plant.order());
    let mut held_u = 0.0;
    let mut out = Vec::with_capacity(steps);
    let mut control = Vec::with_capacity(steps);
    let mut macs = Vec::with_capacity(steps);
    let mut refs = Vec::with_capacity(steps);
    for step in 0..steps {
        let r = reference.values.get(step).copied().unwrap_or(0.0);
        let y = output_of(plant, &xp);
        if y.abs() > DIVERGENCE_LIMIT {
            return Err(Error::Diverged {
                step,
                value: y.abs(),
            });
        }
        let fired = step % n == 0;
        if fired {
            let e = DVector::from_vec(vec![r - y]);
            held_u = k.step(&mut xk, &e)[0];
        }
        plant.step(&mut xp, &DVector::from_vec(vec![held_u]));
        refs.push(r);
        out.push(y);
        control.push(held_u);
        macs.push(if fired { cost } else { 0 });
    }
    Ok(SimRun {
        reference: SignalSeq::new(refs, t),
        output: SignalSeq::new(out, t),
        control: SignalSeq::new(control, t),
        mac_counts: macs,
    })
}

/// Drives a runner with `sin(w k T)` (a constant reference when `w == 0`),
/// discards the transient, and least-squares fits the steady-state output
/// at the component frequencies `w + r 2 pi / (N T)`.
///
/// The fit basis carries constant and linear drift columns so marginally
/// stable loops (integrating open loops) fit cleanly. Returns the complex
/// gain per component.
pub fn sinusoid_probe<F>(
    mut run: F,
    omega: f64,
    n: usize,
    period: f64,
    metaperiods: usize,
    discard: usize,
) -> Result<Vec<num_complex::Complex64>>
where
    F: FnMut(&SignalSeq) -> Result<SignalSeq>,
{
    use num_complex::Complex64;
    if metaperiods <= discard {
        return Err(Error::Dimension(
            "probe needs more metaperiods than the discarded transient".into(),
        ));
    }
    let steps = metaperiods * n;
    let reference = SignalSeq::new(
        (0..steps)
            .map(|k| {
                if omega == 0.0 {
                    1.0
                } else {
                    (omega * k as f64 * period).sin()
                }
            })
            .collect(),
        period,
    );
    let y = run(&reference)?;
    if y.len() < steps {
        return Err(Error::Dimension("runner returned a short output".into()));
    }

    let ks: Vec<usize> = (discard * n..steps).collect();
    let rows = ks.len();
    // per component: cos and sin columns (sin dropped for the dc component),
    // plus per-phase-lane constant and ramp columns so integrating loops fit
    // cleanly (the homogeneous drift of a periodic loop is lane-dependent)
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut layout = Vec::new(); // (component, has_sin)
    for r in 0..n {
        let wr = omega + 2.0 * std::f64::consts::PI * r as f64 / (n as f64 * period);
        let is_dc = omega == 0.0 && r == 0;
        columns.push(ks.iter().map(|&k| (wr * k as f64 * period).cos()).collect());
        if !is_dc {
            columns.push(ks.iter().map(|&k| (wr * k as f64 * period).sin()).collect());
        }
        layout.push((r, !is_dc));
    }
    if omega != 0.0 {
        for lane in 0..n {
            columns.push(
                ks.iter()
                    .map(|&k| if k % n == lane { 1.0 } else { 0.0 })
                    .collect(),
            );
            columns.push(
                ks.iter()
                    .map(|&k| {
                        if k % n == lane {
                            k as f64 / steps as f64
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            );
        }
    }
    let mut m = nalgebra::DMatrix::<f64>::zeros(rows, columns.len());
    for (j, colv) in columns.iter().enumerate() {
        for (i, &v) in colv.iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    let rhs = nalgebra::DVector::<f64>::from_iterator(rows, ks.iter().map(|&k| y.values[k]));
    let svd = m.svd(true, true);
    let sol = svd
        .solve(&rhs, 1.0e-12)
        .map_err(|_| Error::Dimension("least-squares fit failed".into()))?;

    let mut gains = Vec::with_capacity(n);
    let mut col = 0usize;
    for (_, has_sin) in layout {
        let a = sol[col]; // cos coefficient
        col += 1;
        let b = if has_sin {
            let b = sol[col];
            col += 1;
            b
        } else {
            0.0
        };
        // y_r(k) = a cos + b sin = Im((b + j a) exp(j w_r k T))
        gains.push(if omega == 0.0 {
            Complex64::new(a, 0.0)
        } else {
            Complex64::new(b, a)
        });
    }
    Ok(gains)
}

/// Convenience probe for the interlaced closed loop.
pub fn probe_interlaced(
    blocks: &BlockSet,
    sched: &InterlaceSchedule,
    plant: &StateSpace,
    omega: f64,
    metaperiods: usize,
    discard: usize,
) -> Result<Vec<num_complex::Complex64>> {
    let n = sched.n;
    let period = plant.period;
    sinusoid_probe(
        |reference| {
            run_interlaced(blocks, sched, plant, reference, reference.len()).map(|run| run.output)
        },
        omega,
        n,
        period,
        metaperiods,
        discard,
    )
}

/// Time after which the output stays inside `band` (relative) of its final
/// value.
pub fn settling_time(run: &SimRun, band: f64) -> Option<f64> {
    if run.is_empty() {
        return None;
    }
    let y_final = *run.output.values.last().unwrap();
    let tol = band * y_final.abs().max(1.0e-12);
    let mut last_outside = None;
    for (k, &y) in run.output.values.iter().enumerate() {
        if (y - y_final).abs() > tol {
            last_outside = Some(k);
        }
    }
    Some(match last_outside {
        Some(k) => (k + 1) as f64 * run.output.period,
        None => 0.0,
    })
}

/// Peak overshoot above the final value, in percent.
pub fn overshoot_percent(run: &SimRun) -> Option<f64> {
    if run.is_empty() {
        return None;
    }
    let y_final = *run.output.values.last().unwrap();
    if y_final.abs() < 1.0e-12 {
        return None;
    }
    let peak = run.output.values.iter().cloned().fold(f64::MIN, f64::max);
    Some(((peak - y_final) / y_final.abs() * 100.0).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interlace::InterlaceSchedule;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn simple_plant(t: f64) -> StateSpace {
        // one-pole lag with unit dc gain
        StateSpace::new(
            nalgebra::DMatrix::from_element(1, 1, 0.6),
            nalgebra::DMatrix::from_element(1, 1, 0.4),
            nalgebra::DMatrix::from_element(1, 1, 1.0),
            nalgebra::DMatrix::zeros(1, 1),
            t,
        )
        .unwrap()
    }

    fn one_block_set(t: f64) -> BlockSet {
        BlockSet {
            fast: RationalTF::from_descending(&[0.3], &[1.0, -0.4], t).unwrap(),
            slow_blocks: vec![RationalTF::from_descending(&[0.2], &[1.0, -0.9], t).unwrap()],
            decomposition: DecompositionKind::Parallel,
        }
    }

    #[test]
    fn zero_reference_stays_zero() {
        let t = 0.1;
        let blocks = one_block_set(t);
        let sched =
            InterlaceSchedule::new(3, vec![0], InputStrategy::Fast, OutputStrategy::Fast).unwrap();
        let r = SignalSeq::new(vec![0.0; 30], t);
        let run = run_interlaced(&blocks, &sched, &simple_plant(t), &r, 30).unwrap();
        assert!(run.output.values.iter().all(|&y| y == 0.0));
        assert!(run.control.values.iter().all(|&u| u == 0.0));
    }

    #[test]
    fn degenerate_schedule_equals_single_rate() {
        let t = 0.1;
        let blocks = one_block_set(t);
        let sched =
            InterlaceSchedule::new(1, vec![0], InputStrategy::Fast, OutputStrategy::Fast).unwrap();
        let plant = simple_plant(t);
        let r = SignalSeq::new(vec![1.0; 60], t);
        let run = run_interlaced(&blocks, &sched, &plant, &r, 60).unwrap();
        let combined = blocks.recombined().unwrap();
        let single = run_single_rate(&combined, &plant, &r, 60).unwrap();
        for k in 0..60 {
            assert_abs_diff_eq!(
                run.output.values[k],
                single.output.values[k],
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn first_order_loop_closed_form() {
        // plant 1/(z - 0.5) with gain controller k: y_ss = k / (z - 0.5 + k) at z = 1
        let t = 0.1;
        let plant = StateSpace::new(
            nalgebra::DMatrix::from_element(1, 1, 0.5),
            nalgebra::DMatrix::from_element(1, 1, 1.0),
            nalgebra::DMatrix::from_element(1, 1, 1.0),
            nalgebra::DMatrix::zeros(1, 1),
            t,
        )
        .unwrap();
        let kgain = 0.3;
        let ctrl = RationalTF::constant(kgain, t);
        let steps = 400;
        let r = SignalSeq::new(vec![1.0; steps], t);
        let run = run_single_rate(&ctrl, &plant, &r, steps).unwrap();
        let expect = kgain / (1.0 - 0.5 + kgain);
        assert_abs_diff_eq!(*run.output.values.last().unwrap(), expect, epsilon = 1e-9);
    }

    #[test]
    fn zero_controller_zero_output() {
        let t = 0.1;
        let plant = simple_plant(t);
        let ctrl = RationalTF::zero(t);
        let r = SignalSeq::new(vec![1.0; 20], t);
        let run = run_single_rate(&ctrl, &plant, &r, 20).unwrap();
        assert!(run.output.values.iter().all(|&y| y == 0.0));
    }

    #[test]
    fn runs_are_bit_identical() {
        let t = 0.1;
        let blocks = one_block_set(t);
        let sched =
            InterlaceSchedule::new(3, vec![1], InputStrategy::Slow, OutputStrategy::Slow).unwrap();
        let plant = simple_plant(t);
        let r = SignalSeq::new((0..90).map(|k| (k as f64 * 0.31).sin()).collect(), t);
        let a = run_interlaced(&blocks, &sched, &plant, &r, 90).unwrap();
        let b = run_interlaced(&blocks, &sched, &plant, &r, 90).unwrap();
        assert_eq!(a.output.values, b.output.values);
        assert_eq!(a.control.values, b.control.values);
        assert_eq!(a.mac_counts, b.mac_counts);
    }

    #[test]
    fn divergence_guard_fires() {
        let t = 0.1;
        // unstable positive-feedback pairing
        let plant = StateSpace::new(
            nalgebra::DMatrix::from_element(1, 1, 1.1),
            nalgebra::DMatrix::from_element(1, 1, 1.0),
            nalgebra::DMatrix::from_element(1, 1, 1.0),
            nalgebra::DMatrix::zeros(1, 1),
            t,
        )
        .unwrap();
        let ctrl = RationalTF::constant(-10.0, t);
        let r = SignalSeq::new(vec![1.0; 4000], t);
        assert!(matches!(
            run_single_rate(&ctrl, &plant, &r, 4000),
            Err(Error::Diverged { .. })
        ));
    }

    #[test]
    fn probe_recovers_lti_gain() {
        let t = 0.1;
        let tf = RationalTF::from_descending(&[0.5], &[1.0, -0.6], t).unwrap();
        let ss = tf.to_state_space().unwrap();
        let omega = 2.0;
        let gains = sinusoid_probe(
            |reference| {
                let mut x = nalgebra::DVector::zeros(ss.order());
                Ok(SignalSeq::new(
                    reference
                        .values
                        .iter()
                        .map(|&u| ss.step(&mut x, &nalgebra::DVector::from_vec(vec![u]))[0])
                        .collect(),
                    t,
                ))
            },
            omega,
            1,
            t,
            120,
            60,
        )
        .unwrap();
        let z = Complex64::new(0.0, omega * t).exp();
        let want = tf.eval(z).unwrap();
        assert!((gains[0] - want).norm() < 1e-8);
    }

    #[test]
    fn probe_dc_reference() {
        let t = 0.1;
        let blocks = one_block_set(t);
        let sched =
            InterlaceSchedule::new(2, vec![0], InputStrategy::Fast, OutputStrategy::Fast).unwrap();
        let plant = simple_plant(t);
        let gains = probe_interlaced(&blocks, &sched, &plant, 0.0, 300, 200).unwrap();
        // dc of the closed loop; others nearly zero
        assert!(gains[0].im.abs() < 1e-9);
        for g in gains.iter().skip(1) {
            assert!(g.norm() < 1e-7);
        }
        let dc = gains[0].re;
        assert!(dc > 0.3 && dc < 1.0, "dc = {dc}");
    }

    #[test]
    fn mac_counts_follow_phases() {
        let t = 0.1;
        let blocks = BlockSet {
            fast: RationalTF::from_descending(&[0.3], &[1.0, -0.4], t).unwrap(), // cost 2
            slow_blocks: vec![
                RationalTF::from_descending(&[0.2], &[1.0, -0.9], t).unwrap(), // slow cost 2
                RationalTF::from_descending(&[0.1, 0.0], &[1.0, -1.8, 0.81], t).unwrap(), // cost 4
            ],
            decomposition: DecompositionKind::Parallel,
        };
        let sched =
            InterlaceSchedule::new(3, vec![0, 2], InputStrategy::Fast, OutputStrategy::Fast)
                .unwrap();
        let r = SignalSeq::new(vec![1.0; 9], t);
        let run = run_interlaced(&blocks, &sched, &simple_plant(t), &r, 9).unwrap();
        assert_eq!(run.mac_counts, vec![4, 2, 6, 4, 2, 6, 4, 2, 6]);
    }
}
