//! Converts slow blocks at period `T` into dual-rate and pure slow-rate
//! forms through the `W` and hold polynomials, and models the executable
//! interlacing schedule (phase assignment plus input/output strategies).

use crate::decomposition::{group_poles, BlockSet, PoleGroup, PoleGroupKind};
use crate::error::{Error, Result};
use crate::tfcore::{Polynomial, RationalTF};

/// Slow-block input strategy: each block reads the current error at its own
/// phase (`Fast`, I-1) or every block reads the metaperiod's first error
/// sample (`Slow`, I-2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputStrategy {
    Fast,
    Slow,
}

/// Slow-block output strategy: a block's output changes the control as soon
/// as the block fires and is held (`Fast`, O-1), or all block outputs are
/// stored and their sum enters the control at the next metaperiod boundary,
/// held for the whole metaperiod (`Slow`, O-2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputStrategy {
    Fast,
    Slow,
}

/// Executable interlacing schedule: metaperiod ratio `n`, the phase offset
/// of each slow block, and the input/output strategies.
#[derive(Debug, Clone)]
pub struct InterlaceSchedule {
    pub n: usize,
    pub phase_of_block: Vec<usize>,
    pub input: InputStrategy,
    pub output: OutputStrategy,
}

impl InterlaceSchedule {
    pub fn new(
        n: usize,
        phase_of_block: Vec<usize>,
        input: InputStrategy,
        output: OutputStrategy,
    ) -> Result<Self> {
        let sched = InterlaceSchedule {
            n,
            phase_of_block,
            input,
            output,
        };
        if n < 1 {
            return Err(Error::InvalidFactor(n));
        }
        let report = sched.validate_phases();
        if let Some(v) = report.first() {
            return Err(Error::InvalidSchedule(v.clone()));
        }
        Ok(sched)
    }

    /// Schedule from an execution order: `order[phase] = block index`.
    pub fn from_order(
        n: usize,
        order: &[usize],
        input: InputStrategy,
        output: OutputStrategy,
    ) -> Result<Self> {
        let n_blocks = order.len();
        let mut phases = vec![usize::MAX; n_blocks];
        for (phase, &b) in order.iter().enumerate() {
            if b >= n_blocks {
                return Err(Error::InvalidSchedule(format!(
                    "order references block {b}, but only {n_blocks} blocks are listed"
                )));
            }
            if phases[b] != usize::MAX {
                return Err(Error::InvalidSchedule(format!(
                    "block {b} appears twice in the order"
                )));
            }
            phases[b] = phase;
        }
        Self::new(n, phases, input, output)
    }

    /// Default phase assignment: blocks sorted by descending dc-gain
    /// magnitude run first. Integrating blocks (infinite dc gain) lead.
    pub fn default_for(
        blocks: &BlockSet,
        n: usize,
        input: InputStrategy,
        output: OutputStrategy,
    ) -> Result<Self> {
        let mut idx: Vec<usize> = (0..blocks.slow_blocks.len()).collect();
        idx.sort_by(|&a, &b| {
            let ga = blocks.slow_blocks[a].dc_gain().abs();
            let gb = blocks.slow_blocks[b].dc_gain().abs();
            gb.partial_cmp(&ga).unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut phases = vec![0usize; blocks.slow_blocks.len()];
        for (phase, &b) in idx.iter().enumerate() {
            phases[b] = phase;
        }
        Self::new(n, phases, input, output)
    }

    fn validate_phases(&self) -> Vec<String> {
        let mut violations = Vec::new();
        if self.phase_of_block.len() > self.n {
            violations.push(format!(
                "more blocks than phases: {} blocks, N = {}",
                self.phase_of_block.len(),
                self.n
            ));
        }
        for (b, &p) in self.phase_of_block.iter().enumerate() {
            if p >= self.n {
                violations.push(format!("block {b} assigned phase {p} >= N = {}", self.n));
            }
        }
        for b in 0..self.phase_of_block.len() {
            for b2 in b + 1..self.phase_of_block.len() {
                if self.phase_of_block[b] == self.phase_of_block[b2] {
                    violations.push(format!(
                        "blocks {b} and {b2} share phase {}",
                        self.phase_of_block[b]
                    ));
                }
            }
        }
        violations
    }
}

/// Outcome of checking a schedule against a block set; empty means valid.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks block count against `N`, phase uniqueness and range. Report-style:
/// never errors.
pub fn validate_schedule(sched: &InterlaceSchedule, blocks: &BlockSet) -> ValidationReport {
    let mut violations = sched.validate_phases();
    if sched.phase_of_block.len() != blocks.slow_blocks.len() {
        violations.push(format!(
            "schedule lists {} blocks but the decomposition has {}",
            sched.phase_of_block.len(),
            blocks.slow_blocks.len()
        ));
    }
    if blocks.slow_blocks.len() > sched.n {
        violations.push(format!(
            "more blocks than phases: {} blocks, N = {}",
            blocks.slow_blocks.len(),
            sched.n
        ));
    }
    ValidationReport { violations }
}

/// Dual-rate form of a slow block: fast numerator `num * W` over the
/// denominator `den * W` reindexed in the slow variable `z^n`.
#[derive(Debug, Clone)]
pub struct DualRateBlock {
    pub num_fast: Polynomial,
    pub den_slow: Polynomial,
    pub n: usize,
    /// Fast sampling period `T`; the slow denominator lives at `n * T`.
    pub fast_period: f64,
}

impl DualRateBlock {
    pub fn slow_period(&self) -> f64 {
        self.fast_period * self.n as f64
    }
}

/// Pure slow block `num^(NT)(z^N) / den^(NT)(z^N)` at period `N T`.
#[derive(Debug, Clone)]
pub struct SlowBlock {
    pub tf: RationalTF,
}

/// The geometric factor `z^(n-1) + a z^(n-2) + ... + a^(n-1)` satisfying
/// `(z - a) * factor = z^n - a^n`.
fn geometric_factor(a: f64, n: usize) -> Polynomial {
    Polynomial::new((0..n).rev().map(|i| a.powi(i as i32)).collect())
}

/// Builds the `W` polynomial of one pole group: the real multiplier that
/// turns the group's characteristic polynomial into a polynomial in `z^n`.
///
/// Real pole: the geometric factor. Repeated real pole: the factor raised to
/// the multiplicity. Conjugate pair: `(z^n - a^n)(z^n - conj(a)^n)` divided
/// exactly by the original quadratic, keeping all coefficients real.
pub fn build_w_polynomial(group: &PoleGroup, n: usize) -> Result<Polynomial> {
    if n < 1 {
        return Err(Error::InvalidFactor(n));
    }
    if n == 1 {
        return Ok(Polynomial::one());
    }
    match group.kind {
        PoleGroupKind::Real => Ok(geometric_factor(group.poles[0].re, n)),
        PoleGroupKind::RepeatedReal => {
            if group.multiplicity > 2 {
                return Err(Error::UnsupportedMultiplicity(group.multiplicity));
            }
            let g = geometric_factor(group.poles[0].re, n);
            let mut w = Polynomial::one();
            for _ in 0..group.multiplicity {
                w = &w * &g;
            }
            Ok(w)
        }
        PoleGroupKind::ComplexPair => {
            let a = group.poles[0];
            let an = a.powu(n as u32);
            let mut top = vec![0.0; 2 * n + 1];
            top[0] = an.norm_sqr();
            top[n] = -2.0 * an.re;
            top[2 * n] = 1.0;
            let (w, rem) = Polynomial::new(top).div_rem(&group.characteristic())?;
            debug_assert!(
                rem.coeffs().iter().all(|c| c.abs() < 1.0e-9),
                "pair division remainder {rem}"
            );
            Ok(w)
        }
    }
}

/// Recovers the single pole group of a block denominator.
fn single_group_of(den: &Polynomial) -> Result<PoleGroup> {
    let groups = group_poles(den)?;
    if groups.len() != 1 {
        return Err(Error::NotSingleGroup);
    }
    Ok(groups.into_iter().next().unwrap())
}

/// `W` for an arbitrary denominator: product of each pole group's `W`.
fn w_for_denominator(den: &Polynomial, n: usize) -> Result<Polynomial> {
    let mut w = Polynomial::one();
    for g in group_poles(den)? {
        w = &w * &build_w_polynomial(&g, n)?;
    }
    Ok(w)
}

/// Converts one slow block to its dual-rate form: fast input, slow
/// denominator recursion.
pub fn to_dual_rate_block(block: &RationalTF, n: usize) -> Result<DualRateBlock> {
    if n < 1 {
        return Err(Error::InvalidFactor(n));
    }
    if !block.is_proper() {
        return Err(Error::Improper {
            num: block.num().degree(),
            den: block.den().degree(),
        });
    }
    let lead = block.den().leading();
    let den = block.den().monic();
    let num = block.num().scale(1.0 / lead);
    if n == 1 {
        return Ok(DualRateBlock {
            num_fast: num,
            den_slow: den,
            n,
            fast_period: block.period,
        });
    }
    let group = single_group_of(&den)?;
    let w = build_w_polynomial(&group, n)?;
    let num_fast = &num * &w;
    let den_slow = (&den * &w).downsample(n)?;
    Ok(DualRateBlock {
        num_fast,
        den_slow,
        n,
        fast_period: block.period,
    })
}

/// Blocked-sum downsample of `p`: index `m` collects coefficients
/// `p[m n .. m n + n - 1]`. Equals picking the exponents divisible by `n`
/// out of the product of `p` with the hold sum `1 + z^-1 + ... + z^-(n-1)`.
fn hold_and_downsample(p: &Polynomial, n: usize) -> Polynomial {
    let mut out = vec![0.0; p.degree() / n + 1];
    for (i, &c) in p.coeffs().iter().enumerate() {
        out[i / n] += c;
    }
    Polynomial::new(out)
}

/// Converts one slow block to its pure slow form at period `n T`.
pub fn to_slow_block(block: &RationalTF, n: usize) -> Result<SlowBlock> {
    let dual = to_dual_rate_block(block, n)?;
    let num_slow = hold_and_downsample(&dual.num_fast, n);
    let slow_period = dual.slow_period();
    Ok(SlowBlock {
        tf: RationalTF::new(num_slow, dual.den_slow, slow_period)?,
    })
}

/// Resamples an arbitrary proper transfer function to `n` times its period
/// through the same hold-and-downsample route, without the single-group
/// restriction. Used for the all-slow single-rate baseline.
pub fn resample_slow_tf(tf: &RationalTF, n: usize) -> Result<RationalTF> {
    if n < 1 {
        return Err(Error::InvalidFactor(n));
    }
    if tf.is_zero() {
        return Ok(RationalTF::zero(tf.period * n as f64));
    }
    if !tf.is_proper() {
        return Err(Error::Improper {
            num: tf.num().degree(),
            den: tf.den().degree(),
        });
    }
    if tf.den().degree() == 0 {
        return Ok(RationalTF::constant(
            tf.num().coeff(0) / tf.den().coeff(0),
            tf.period * n as f64,
        ));
    }
    let lead = tf.den().leading();
    let den = tf.den().monic();
    let num = tf.num().scale(1.0 / lead);
    let w = w_for_denominator(&den, n)?;
    let num_slow = hold_and_downsample(&(&num * &w), n);
    let den_slow = (&den * &w).downsample(n)?;
    RationalTF::new(num_slow, den_slow, tf.period * n as f64)
}

/// Per-fast-instant multiply-accumulate counts over one metaperiod.
#[derive(Debug, Clone)]
pub struct LoadProfile {
    /// Monolithic fast controller: the same count at every instant.
    pub monolithic: Vec<u64>,
    /// Interlaced implementation: fast-part cost plus the cost of the one
    /// block firing at each phase.
    pub interlaced: Vec<u64>,
}

impl LoadProfile {
    pub fn max_interlaced(&self) -> u64 {
        self.interlaced.iter().copied().max().unwrap_or(0)
    }
}

/// Difference-equation cost of a transfer function: one multiply per
/// numerator coefficient plus one per (monic) denominator lag.
pub fn mac_cost(tf: &RationalTF) -> u64 {
    if tf.is_zero() {
        return 0;
    }
    (tf.num().degree() + tf.den().degree() + 1) as u64
}

/// Builds the load profile of a schedule: monolithic fast controller versus
/// the interlaced implementation with each slow block executed (in its slow
/// form) at its phase.
pub fn compute_load_profile(blocks: &BlockSet, sched: &InterlaceSchedule) -> Result<LoadProfile> {
    let report = validate_schedule(sched, blocks);
    if !report.is_valid() {
        return Err(Error::InvalidSchedule(report.violations.join("; ")));
    }
    let mono_cost = mac_cost(&blocks.recombined()?);
    let fast_cost = mac_cost(&blocks.fast);
    let mut interlaced = vec![fast_cost; sched.n];
    for (b, &phase) in sched.phase_of_block.iter().enumerate() {
        let slow = to_slow_block(&blocks.slow_blocks[b], sched.n)?;
        interlaced[phase] += mac_cost(&slow.tf);
    }
    Ok(LoadProfile {
        monolithic: vec![mono_cost; sched.n],
        interlaced,
    })
}
