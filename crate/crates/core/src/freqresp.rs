//! Exact dual-rate frequency response: per-frequency component gains, the
//! metaperiod-sum recombination, Bode data, margins, and ripple detection.
//!
//! Driving a lifted system with `exp(j w Tu k)` produces `Ny` output
//! sinusoids at `w_r = w + 2 pi r / (Ny Ty)`. Each complex gain comes from
//! the factored form `row(exp(j w_r Ty)) . G(exp(j w T0)) . col(exp(j w Tu))
//! / Ny`.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lifting::LiftedSystem;

/// Component gains of a dual-rate system at one drive frequency.
#[derive(Debug, Clone)]
pub struct FreqComponents {
    pub omega: f64,
    /// Complex gain of the output component at `omegas_r[r]`.
    pub components: Vec<Complex64>,
    pub omegas_r: Vec<f64>,
}

/// Evaluates the lifted transfer matrix at `z0 = exp(j w T0)` and projects
/// it onto the per-component gains.
pub fn dual_rate_response(sys: &LiftedSystem, omega: f64) -> Result<FreqComponents> {
    let ty = sys.t0 / sys.ny as f64;
    let tu = sys.t0 / sys.nu as f64;
    let z0 = Complex64::new(0.0, omega * sys.t0).exp();
    let g = eval_lifted(sys, z0).ok_or(Error::SingularResponse(omega))?;

    let col = DVector::<Complex64>::from_iterator(
        sys.nu,
        (0..sys.nu).map(|q| Complex64::new(0.0, omega * tu * q as f64).exp()),
    );
    let v = &g * &col;
    let mut components = Vec::with_capacity(sys.ny);
    let mut omegas_r = Vec::with_capacity(sys.ny);
    for r in 0..sys.ny {
        let wr = omega + 2.0 * std::f64::consts::PI * r as f64 / (sys.ny as f64 * ty);
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..sys.ny {
            acc += Complex64::new(0.0, -wr * ty * p as f64).exp() * v[p];
        }
        components.push(acc / sys.ny as f64);
        omegas_r.push(wr);
    }
    Ok(FreqComponents {
        omega,
        components,
        omegas_r,
    })
}

/// `C (z I - A)^-1 B + D` with a residual check against near-singular
/// shifts (unit-circle poles).
fn eval_lifted(sys: &LiftedSystem, z: Complex64) -> Option<DMatrix<Complex64>> {
    let n = sys.state_dim();
    let d_c = sys.d.map(|v| Complex64::new(v, 0.0));
    if n == 0 {
        return Some(d_c);
    }
    let mut zia = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            zia[(i, j)] = Complex64::new(-sys.a[(i, j)], 0.0);
        }
        zia[(i, i)] += z;
    }
    let b_c = sys.b.map(|v| Complex64::new(v, 0.0));
    let x = zia.clone().lu().solve(&b_c)?;
    let resid = (&zia * &x - &b_c).norm();
    if !resid.is_finite() || resid > 1.0e-6 * b_c.norm().max(1.0) {
        return None;
    }
    Some(sys.c.map(|v| Complex64::new(v, 0.0)) * x + d_c)
}

/// Complex gain of the metaperiod-downsampled output: at `k T0` sampling all
/// components alias onto the drive frequency, so the gains add directly and
/// the result is a pure sinusoid again.
pub fn t0_sum_response(fc: &FreqComponents) -> Complex64 {
    fc.components.iter().sum()
}

/// Ratio of non-fundamental component energy to the fundamental:
/// `sum_(r>=1) |y_r| / |y_0|`. Zero for single-rate systems.
pub fn ripple_index(fc: &FreqComponents) -> Result<f64> {
    let fundamental = fc.components[0].norm();
    if fundamental < 1.0e-15 {
        return Err(Error::RippleUndefined(fundamental));
    }
    Ok(fc.components.iter().skip(1).map(|c| c.norm()).sum::<f64>() / fundamental)
}

/// Frequency sweep of a lifted system: per-frequency components and the
/// metaperiod-sum gain, with magnitudes in dB and unwrapped phases in
/// degrees.
#[derive(Debug, Clone)]
pub struct BodeData {
    pub omegas: Vec<f64>,
    pub points: Vec<Option<FreqComponents>>,
    /// Indices of grid points where the response was singular.
    pub singular: Vec<usize>,
    pub ny: usize,
}

impl BodeData {
    /// Magnitude of component `r` in dB over the grid (NaN at singular
    /// points).
    pub fn mag_db(&self, r: usize) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| {
                p.as_ref()
                    .map(|fc| 20.0 * fc.components[r].norm().log10())
                    .unwrap_or(f64::NAN)
            })
            .collect()
    }

    /// Unwrapped phase of component `r` in degrees.
    pub fn phase_deg(&self, r: usize) -> Vec<f64> {
        unwrap_deg(
            self.points
                .iter()
                .map(|p| p.as_ref().map(|fc| fc.components[r].arg()))
                .collect(),
        )
    }

    pub fn t0_mag_db(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| {
                p.as_ref()
                    .map(|fc| 20.0 * t0_sum_response(fc).norm().log10())
                    .unwrap_or(f64::NAN)
            })
            .collect()
    }

    pub fn t0_phase_deg(&self) -> Vec<f64> {
        unwrap_deg(
            self.points
                .iter()
                .map(|p| p.as_ref().map(|fc| t0_sum_response(fc).arg()))
                .collect(),
        )
    }

    /// CSV columns: omega_rad_s, then per component r: mag_db_r,
    /// phase_deg_r, then t0_mag_db, t0_phase_deg.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "omega_rad_s")?;
        for r in 0..self.ny {
            write!(w, ",mag_db_{r},phase_deg_{r}")?;
        }
        writeln!(w, ",t0_mag_db,t0_phase_deg")?;
        let mags: Vec<Vec<f64>> = (0..self.ny).map(|r| self.mag_db(r)).collect();
        let phases: Vec<Vec<f64>> = (0..self.ny).map(|r| self.phase_deg(r)).collect();
        let t0m = self.t0_mag_db();
        let t0p = self.t0_phase_deg();
        for (i, &omega) in self.omegas.iter().enumerate() {
            write!(w, "{omega:.12e}")?;
            for r in 0..self.ny {
                write!(w, ",{:.12e},{:.12e}", mags[r][i], phases[r][i])?;
            }
            writeln!(w, ",{:.12e},{:.12e}", t0m[i], t0p[i])?;
        }
        Ok(())
    }
}

fn unwrap_deg(raw: Vec<Option<f64>>) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for v in raw {
        match v {
            Some(phi) => {
                if let Some(p) = prev {
                    let mut cur = phi + offset;
                    while cur - p > std::f64::consts::PI {
                        offset -= 2.0 * std::f64::consts::PI;
                        cur = phi + offset;
                    }
                    while cur - p < -std::f64::consts::PI {
                        offset += 2.0 * std::f64::consts::PI;
                        cur = phi + offset;
                    }
                }
                let cur = phi + offset;
                prev = Some(cur);
                out.push(cur.to_degrees());
            }
            None => out.push(f64::NAN),
        }
    }
    out
}

/// Logarithmic grid with `points` entries from `omega_min` to `omega_max`.
pub fn log_grid(omega_min: f64, omega_max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![omega_min];
    }
    let (l0, l1) = (omega_min.ln(), omega_max.ln());
    (0..points)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

/// Sweeps the grid; singular points are recorded and skipped, the sweep
/// continues.
pub fn bode_sweep(sys: &LiftedSystem, grid: &[f64]) -> Result<BodeData> {
    let nyq = std::f64::consts::PI * sys.ny as f64 / sys.t0;
    for w in grid.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Dimension(
                "frequency grid must be strictly increasing".into(),
            ));
        }
    }
    if let (Some(&first), Some(&last)) = (grid.first(), grid.last()) {
        if first <= 0.0 || last > nyq * (1.0 + 1.0e-12) {
            return Err(Error::Dimension(format!(
                "frequency grid must lie in (0, {nyq:.6}] rad/s"
            )));
        }
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut singular = Vec::new();
    for (i, &w) in grid.iter().enumerate() {
        match dual_rate_response(sys, w) {
            Ok(fc) => points.push(Some(fc)),
            Err(Error::SingularResponse(_)) => {
                singular.push(i);
                points.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(BodeData {
        omegas: grid.to_vec(),
        points,
        singular,
        ny: sys.ny,
    })
}

/// Gain and phase margins read off the metaperiod-sum curve of an open-loop
/// sweep.
#[derive(Debug, Clone, Copy)]
pub struct MarginReport {
    /// Phase margin in degrees at the first downward 0 dB crossing.
    pub phase_margin_deg: Option<f64>,
    pub gain_crossover: Option<f64>,
    /// Gain margin in dB at the first -180 degree crossing.
    pub gain_margin_db: Option<f64>,
    pub phase_crossover: Option<f64>,
}

impl MarginReport {
    pub fn infinite_gain_margin(&self) -> bool {
        self.gain_margin_db.is_none()
    }

    pub fn infinite_phase_margin(&self) -> bool {
        self.phase_margin_deg.is_none()
    }
}

/// Locates the first 0 dB crossing (phase margin) and the first -180 degree
/// crossing (gain margin) of the metaperiod-sum response, interpolating in
/// log frequency. Missing crossovers are reported as infinite margins.
pub fn margins(open_loop: &BodeData) -> MarginReport {
    let mags = open_loop.t0_mag_db();
    let phases = open_loop.t0_phase_deg();
    let omegas = &open_loop.omegas;

    let mut phase_margin_deg = None;
    let mut gain_crossover = None;
    for i in 0..mags.len().saturating_sub(1) {
        if !mags[i].is_finite() || !mags[i + 1].is_finite() {
            continue;
        }
        if mags[i] >= 0.0 && mags[i + 1] < 0.0 {
            let f = mags[i] / (mags[i] - mags[i + 1]);
            let wc = omegas[i] * (omegas[i + 1] / omegas[i]).powf(f);
            let phi = phases[i] + f * (phases[i + 1] - phases[i]);
            phase_margin_deg = Some(180.0 + phi);
            gain_crossover = Some(wc);
            break;
        }
    }
    let mut gain_margin_db = None;
    let mut phase_crossover = None;
    for i in 0..phases.len().saturating_sub(1) {
        if !phases[i].is_finite() || !phases[i + 1].is_finite() {
            continue;
        }
        let (a, b) = (phases[i] + 180.0, phases[i + 1] + 180.0);
        if a >= 0.0 && b < 0.0 {
            let f = a / (a - b);
            let wg = omegas[i] * (omegas[i + 1] / omegas[i]).powf(f);
            let m = mags[i] + f * (mags[i + 1] - mags[i]);
            gain_margin_db = Some(-m);
            phase_crossover = Some(wg);
            break;
        }
    }
    MarginReport {
        phase_margin_deg,
        gain_crossover,
        gain_margin_db,
        phase_crossover,
    }
}
