//! Lifted LTI models over the metaperiod `T0 = N T`: dual-rate plant
//! lifting, dummy-state augmentation of interlaced blocks, selector-vector
//! composition for each input/output strategy, and closed-loop assembly.
//!
//! Lifted output index `q` corresponds to time `k T0 + q T`.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::decomposition::{BlockSet, DecompositionKind};
use crate::error::{Error, Result};
use crate::interlace::{
    to_slow_block, validate_schedule, InputStrategy, InterlaceSchedule, OutputStrategy, SlowBlock,
};
use crate::tfcore::{spectral_radius_of, StateSpace};

/// LTI state-space model at the metaperiod rate with `nu` stacked inputs and
/// `ny` stacked outputs per metaperiod.
#[derive(Debug, Clone)]
pub struct LiftedSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub t0: f64,
    pub nu: usize,
    pub ny: usize,
}

impl LiftedSystem {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        t0: f64,
        nu: usize,
        ny: usize,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n
            || b.nrows() != n
            || b.ncols() != nu
            || c.ncols() != n
            || c.nrows() != ny
            || d.nrows() != ny
            || d.ncols() != nu
        {
            return Err(Error::Dimension(format!(
                "lifted dimensions inconsistent with nu = {nu}, ny = {ny}"
            )));
        }
        Ok(LiftedSystem {
            a,
            b,
            c,
            d,
            t0,
            nu,
            ny,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    /// Runs the lifted recursion over a fast-rate input, de-lifting the
    /// output back to the fast rate. The input length is truncated to whole
    /// metaperiods.
    pub fn simulate(&self, input: &[f64]) -> Vec<f64> {
        let metaperiods = input.len() / self.nu;
        let mut x = DVector::<f64>::zeros(self.state_dim());
        let mut out = Vec::with_capacity(metaperiods * self.ny);
        for m in 0..metaperiods {
            let u = DVector::from_column_slice(&input[m * self.nu..(m + 1) * self.nu]);
            let y = &self.c * &x + &self.d * &u;
            out.extend(y.iter());
            x = &self.a * &x + &self.b * &u;
        }
        out
    }
}

/// Largest eigenvalue magnitude of the lifted state matrix.
pub fn spectral_radius(sys: &LiftedSystem) -> Result<f64> {
    spectral_radius_of(&sys.a)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Lifts a discrete SISO system at the base period `T` to the metaperiod,
/// with `nu` input updates and `ny` output samples per metaperiod.
///
/// For `ny` output samples at the base rate the stacking is causal: row `p`
/// is the output at `k T0 + p T`, so the feedthrough is lower triangular.
/// For a single slow output sample (`ny == 1`, output period `T0`), the row
/// follows the end-of-metaperiod stacking `y = C x(k T0) + [C A^(n-1) B ...
/// C B] u_l`. Input updates slower than the base rate are expanded by the
/// zero-order hold (each lifted input column sums its hold interval).
pub fn lift_dual_rate(sys: &StateSpace, nu: usize, ny: usize) -> Result<LiftedSystem> {
    if sys.is_continuous() {
        return Err(Error::ExpectedDiscrete);
    }
    if nu < 1 || ny < 1 {
        return Err(Error::InvalidFactor(nu.min(ny)));
    }
    if sys.n_inputs() != 1 || sys.n_outputs() != 1 {
        return Err(Error::Dimension("lifting expects a SISO system".into()));
    }
    let n_steps = nu / gcd(nu, ny) * ny;
    let su = n_steps / nu;
    let sy = n_steps / ny;
    if sy > 1 && ny != 1 {
        return Err(Error::PeriodMismatch(format!(
            "unsupported sampling pattern nu = {nu}, ny = {ny}"
        )));
    }
    let nx = sys.order();
    let d0 = sys.d[(0, 0)];

    // powers of A up to n_steps
    let mut pows = Vec::with_capacity(n_steps + 1);
    pows.push(DMatrix::<f64>::identity(nx, nx));
    for k in 1..=n_steps {
        pows.push(&pows[k - 1] * &sys.a);
    }

    let a_l = pows[n_steps].clone();
    let mut b_l = DMatrix::<f64>::zeros(nx, nu);
    for q in 0..nu {
        let mut col = DMatrix::<f64>::zeros(nx, 1);
        for k in q * su..(q + 1) * su {
            col += &pows[n_steps - 1 - k] * &sys.b;
        }
        b_l.set_column(q, &col.column(0));
    }

    let mut c_l = DMatrix::<f64>::zeros(ny, nx);
    let mut d_l = DMatrix::<f64>::zeros(ny, nu);
    if sy == 1 {
        for p in 0..ny {
            c_l.row_mut(p).copy_from(&(&sys.c * &pows[p]).row(0));
            for q in 0..nu {
                let mut acc = 0.0;
                for k in q * su..(q + 1) * su {
                    if k < p {
                        acc += (&sys.c * &pows[p - 1 - k] * &sys.b)[(0, 0)];
                    }
                }
                if q * su <= p && p < (q + 1) * su {
                    acc += d0;
                }
                d_l[(p, q)] = acc;
            }
        }
    } else {
        // ny == 1: the single output row keeps C against x(k T0) and
        // accumulates every input of the metaperiod to its end
        c_l.row_mut(0).copy_from(&sys.c.row(0));
        for q in 0..nu {
            let mut acc = 0.0;
            for k in q * su..(q + 1) * su {
                acc += (&sys.c * &pows[n_steps - 1 - k] * &sys.b)[(0, 0)];
            }
            d_l[(0, q)] = acc;
        }
    }
    LiftedSystem::new(a_l, b_l, c_l, d_l, sys.period * n_steps as f64, nu, ny)
}

/// Slow block augmented with one dummy state holding the previous
/// metaperiod's input; see the stale/fresh output rows.
///
/// With realization `(A_i, B_i, C_i, D_i)` at period `N T`, the augmented
/// state is `(x, chi)` with update `[[A_i, B_i], [0, 0]]` and input column
/// `(0, 1)`. The stale row `[C_i, D_i]` reads the output the block computed
/// in the previous metaperiod; the fresh row `[C_i A_i, C_i B_i]` plus a
/// `D_i` feedthrough on the current input reads the newly fired value.
#[derive(Debug, Clone)]
pub struct AugmentedBlock {
    pub a: DMatrix<f64>,
    pub input: DVector<f64>,
    pub stale_row: RowDVector<f64>,
    pub fresh_row: RowDVector<f64>,
    pub fresh_feedthrough: f64,
}

impl AugmentedBlock {
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }
}

pub fn augment_block(block: &SlowBlock) -> Result<AugmentedBlock> {
    if !block.tf.is_proper() {
        return Err(Error::Improper {
            num: block.tf.num().degree(),
            den: block.tf.den().degree(),
        });
    }
    let ss = block.tf.to_state_space()?;
    let n = ss.order();
    let mut a = DMatrix::<f64>::zeros(n + 1, n + 1);
    a.view_mut((0, 0), (n, n)).copy_from(&ss.a);
    a.view_mut((0, n), (n, 1)).copy_from(&ss.b);
    // dummy row stays zero: chi is overwritten every metaperiod
    let mut input = DVector::<f64>::zeros(n + 1);
    input[n] = 1.0;
    let mut stale = RowDVector::<f64>::zeros(n + 1);
    stale.view_mut((0, 0), (1, n)).copy_from(&ss.c);
    stale[n] = ss.d[(0, 0)];
    let ca = &ss.c * &ss.a;
    let cb = (&ss.c * &ss.b)[(0, 0)];
    let mut fresh = RowDVector::<f64>::zeros(n + 1);
    fresh.view_mut((0, 0), (1, n)).copy_from(&ca);
    fresh[n] = cb;
    Ok(AugmentedBlock {
        a,
        input,
        stale_row: stale,
        fresh_row: fresh,
        fresh_feedthrough: ss.d[(0, 0)],
    })
}

/// Length-`n` 0/1 row with a single 1 at `phase`: the input-instant selector
/// within the metaperiod.
pub fn input_selector(phase: usize, n: usize) -> Result<Vec<f64>> {
    if phase >= n {
        return Err(Error::InvalidSchedule(format!(
            "phase {phase} out of range for N = {n}"
        )));
    }
    let mut row = vec![0.0; n];
    row[phase] = 1.0;
    Ok(row)
}

/// 0/1 column masks `(stale, fresh)` describing which fast instants of the
/// metaperiod read a block's held previous output versus its newly fired
/// one.
///
/// Fast output change (O-1): stale below the phase, fresh at and after it.
/// Slow output change (O-2): every instant reads the held sum refreshed at
/// the metaperiod boundary, so the stale mask is all ones.
pub fn output_hold_pattern(
    phase: usize,
    n: usize,
    strategy: OutputStrategy,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if phase >= n {
        return Err(Error::InvalidSchedule(format!(
            "phase {phase} out of range for N = {n}"
        )));
    }
    match strategy {
        OutputStrategy::Fast => {
            let stale: Vec<f64> = (0..n).map(|q| if q < phase { 1.0 } else { 0.0 }).collect();
            let fresh: Vec<f64> = (0..n).map(|q| if q >= phase { 1.0 } else { 0.0 }).collect();
            Ok((stale, fresh))
        }
        OutputStrategy::Slow => Ok((vec![1.0; n], vec![0.0; n])),
    }
}

/// Assembles the lifted interlaced controller over one metaperiod: the fast
/// part lifted at every instant plus one augmented block per slow block,
/// routed through its input selector and output hold pattern.
pub fn compose_open_loop(blocks: &BlockSet, sched: &InterlaceSchedule) -> Result<LiftedSystem> {
    let report = validate_schedule(sched, blocks);
    if !report.is_valid() {
        return Err(Error::InvalidSchedule(report.violations.join("; ")));
    }
    let n = sched.n;
    let slow_sum = compose_slow_sum(blocks, sched)?;
    let fast_lifted = lift_dual_rate(&blocks.fast.to_state_space()?, n, n)?;
    match blocks.decomposition {
        DecompositionKind::Parallel => parallel_join(&slow_sum, &fast_lifted),
        DecompositionKind::Series => series(&slow_sum, &fast_lifted),
    }
}

/// Lifted model of the interlaced slow part alone (no fast block).
fn compose_slow_sum(blocks: &BlockSet, sched: &InterlaceSchedule) -> Result<LiftedSystem> {
    let n = sched.n;
    let t = blocks.fast.period;
    let augmented: Vec<AugmentedBlock> = blocks
        .slow_blocks
        .iter()
        .map(|b| augment_block(&to_slow_block(b, n)?))
        .collect::<Result<_>>()?;
    let total: usize = augmented.iter().map(|a| a.state_dim()).sum();
    let mut a = DMatrix::<f64>::zeros(total, total);
    let mut b = DMatrix::<f64>::zeros(total, n);
    let mut c = DMatrix::<f64>::zeros(n, total);
    let mut d = DMatrix::<f64>::zeros(n, n);
    let mut off = 0usize;
    for (bi, aug) in augmented.iter().enumerate() {
        let nb = aug.state_dim();
        let phase = sched.phase_of_block[bi];
        a.view_mut((off, off), (nb, nb)).copy_from(&aug.a);
        let sel = match sched.input {
            InputStrategy::Fast => phase,
            InputStrategy::Slow => 0,
        };
        for (i, v) in aug.input.iter().enumerate() {
            b[(off + i, sel)] += v;
        }
        let (stale, fresh) = output_hold_pattern(phase, n, sched.output)?;
        for q in 0..n {
            for i in 0..nb {
                c[(q, off + i)] += stale[q] * aug.stale_row[i] + fresh[q] * aug.fresh_row[i];
            }
            d[(q, sel)] += fresh[q] * aug.fresh_feedthrough;
        }
        off += nb;
    }
    LiftedSystem::new(a, b, c, d, t * n as f64, n, n)
}

/// Sum of two lifted systems sharing the same input (parallel paths).
fn parallel_join(s1: &LiftedSystem, s2: &LiftedSystem) -> Result<LiftedSystem> {
    if s1.nu != s2.nu || s1.ny != s2.ny {
        return Err(Error::Dimension(
            "parallel join needs matching shapes".into(),
        ));
    }
    let (n1, n2) = (s1.state_dim(), s2.state_dim());
    let mut a = DMatrix::<f64>::zeros(n1 + n2, n1 + n2);
    a.view_mut((0, 0), (n1, n1)).copy_from(&s1.a);
    a.view_mut((n1, n1), (n2, n2)).copy_from(&s2.a);
    let mut b = DMatrix::<f64>::zeros(n1 + n2, s1.nu);
    b.view_mut((0, 0), (n1, s1.nu)).copy_from(&s1.b);
    b.view_mut((n1, 0), (n2, s1.nu)).copy_from(&s2.b);
    let mut c = DMatrix::<f64>::zeros(s1.ny, n1 + n2);
    c.view_mut((0, 0), (s1.ny, n1)).copy_from(&s1.c);
    c.view_mut((0, n1), (s1.ny, n2)).copy_from(&s2.c);
    LiftedSystem::new(a, b, c, &s1.d + &s2.d, s1.t0, s1.nu, s1.ny)
}

/// Series interconnection: the output of `first` drives `second`.
pub fn series(first: &LiftedSystem, second: &LiftedSystem) -> Result<LiftedSystem> {
    if first.ny != second.nu {
        return Err(Error::Dimension(format!(
            "series needs first.ny == second.nu, got {} vs {}",
            first.ny, second.nu
        )));
    }
    let (n1, n2) = (first.state_dim(), second.state_dim());
    let mut a = DMatrix::<f64>::zeros(n1 + n2, n1 + n2);
    a.view_mut((0, 0), (n1, n1)).copy_from(&first.a);
    a.view_mut((n1, n1), (n2, n2)).copy_from(&second.a);
    a.view_mut((n1, 0), (n2, n1))
        .copy_from(&(&second.b * &first.c));
    let mut b = DMatrix::<f64>::zeros(n1 + n2, first.nu);
    b.view_mut((0, 0), (n1, first.nu)).copy_from(&first.b);
    b.view_mut((n1, 0), (n2, first.nu))
        .copy_from(&(&second.b * &first.d));
    let mut c = DMatrix::<f64>::zeros(second.ny, n1 + n2);
    c.view_mut((0, 0), (second.ny, n1))
        .copy_from(&(&second.d * &first.c));
    c.view_mut((0, n1), (second.ny, n2)).copy_from(&second.c);
    LiftedSystem::new(a, b, c, &second.d * &first.d, first.t0, first.nu, second.ny)
}

/// Closes the unity negative feedback loop `e = r - y`, `u = K e`,
/// `y = G u`, returning the lifted map from the stacked reference to the
/// stacked plant output. Rejects ill-posed feedthrough loops.
pub fn close_loop(controller: &LiftedSystem, plant: &LiftedSystem) -> Result<LiftedSystem> {
    if controller.ny != plant.nu || controller.nu != plant.ny {
        return Err(Error::Dimension(
            "controller and plant lifted shapes are incompatible".into(),
        ));
    }
    let n = controller.nu;
    let (nk, ng) = (controller.state_dim(), plant.state_dim());
    let ident = DMatrix::<f64>::identity(n, n);
    let loop_d = &ident + &plant.d * &controller.d;
    let m = loop_d
        .clone()
        .lu()
        .solve(&ident)
        .ok_or(Error::AlgebraicLoop)?;

    // y = M (Cg xg + Dg Ck xk + Dg Dk r)
    let cy_k = &m * &plant.d * &controller.c;
    let cy_g = &m * &plant.c;
    let dy = &m * &plant.d * &controller.d;
    // e = r - y; u = Ck xk + Dk e
    let ce_k = -&cy_k;
    let ce_g = -&cy_g;
    let de = &ident - &dy;
    let cu_k = &controller.c + &(&controller.d * &ce_k);
    let cu_g = &controller.d * &ce_g;
    let du = &controller.d * &de;

    let mut a = DMatrix::<f64>::zeros(nk + ng, nk + ng);
    a.view_mut((0, 0), (nk, nk))
        .copy_from(&(&controller.a + &(&controller.b * &ce_k)));
    a.view_mut((0, nk), (nk, ng))
        .copy_from(&(&controller.b * &ce_g));
    a.view_mut((nk, 0), (ng, nk)).copy_from(&(&plant.b * &cu_k));
    a.view_mut((nk, nk), (ng, ng))
        .copy_from(&(&plant.a + &(&plant.b * &cu_g)));
    let mut b = DMatrix::<f64>::zeros(nk + ng, n);
    b.view_mut((0, 0), (nk, n))
        .copy_from(&(&controller.b * &de));
    b.view_mut((nk, 0), (ng, n)).copy_from(&(&plant.b * &du));
    let mut c = DMatrix::<f64>::zeros(n, nk + ng);
    c.view_mut((0, 0), (n, nk)).copy_from(&cy_k);
    c.view_mut((0, nk), (n, ng)).copy_from(&cy_g);
    LiftedSystem::new(a, b, c, dy, controller.t0, n, n)
}
