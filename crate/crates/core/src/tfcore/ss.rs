use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::expm::expm;
use crate::error::{Error, Result};

/// State-space quadruple `(A, B, C, D)` with a sampling-period tag.
/// `period == 0.0` marks a continuous-time system.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub period: f64,
}

impl StateSpace {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        period: f64,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n || c.ncols() != n || d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::Dimension(format!(
                "inconsistent state-space dimensions: A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        Ok(StateSpace { a, b, c, d, period })
    }

    /// SISO system with no states: a pure gain.
    pub fn gain(k: f64, period: f64) -> Self {
        StateSpace {
            a: DMatrix::zeros(0, 0),
            b: DMatrix::zeros(0, 1),
            c: DMatrix::zeros(1, 0),
            d: DMatrix::from_element(1, 1, k),
            period,
        }
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn is_continuous(&self) -> bool {
        self.period == 0.0
    }

    /// Zero-order-hold discretization via the augmented matrix exponential:
    /// `exp([[A, B], [0, 0]] T) = [[A_d, B_d], [0, I]]`.
    pub fn c2d_zoh(&self, t: f64) -> Result<StateSpace> {
        if !self.is_continuous() {
            return Err(Error::ExpectedContinuous);
        }
        if t <= 0.0 || t.is_nan() {
            return Err(Error::PeriodMismatch(format!(
                "discretization period must be positive, got {t}"
            )));
        }
        if self.a.iter().any(|v| !v.is_finite()) || self.b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("c2d_zoh input"));
        }
        let n = self.order();
        let m = self.n_inputs();
        let mut aug = DMatrix::<f64>::zeros(n + m, n + m);
        aug.view_mut((0, 0), (n, n)).copy_from(&self.a);
        aug.view_mut((0, n), (n, m)).copy_from(&self.b);
        aug *= t;
        let e = expm(&aug).ok_or(Error::NonFinite("matrix exponential"))?;
        if e.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix exponential"));
        }
        let ad = e.view((0, 0), (n, n)).into_owned();
        let bd = e.view((0, n), (n, m)).into_owned();
        StateSpace::new(ad, bd, self.c.clone(), self.d.clone(), t)
    }

    /// Resamples a discrete system to `n` times its period under the same
    /// hold: `A -> A^n`, `B -> (I + A + ... + A^(n-1)) B`.
    pub fn resample_slow(&self, n: usize) -> Result<StateSpace> {
        if self.is_continuous() {
            return Err(Error::ExpectedDiscrete);
        }
        if n < 1 {
            return Err(Error::InvalidFactor(n));
        }
        let order = self.order();
        let mut an = DMatrix::<f64>::identity(order, order);
        let mut acc = DMatrix::<f64>::zeros(order, order);
        for _ in 0..n {
            acc += &an;
            an = &an * &self.a;
        }
        StateSpace::new(
            an,
            &acc * &self.b,
            self.c.clone(),
            self.d.clone(),
            self.period * n as f64,
        )
    }

    /// Transfer value `C (zI - A)^-1 B + D` for SISO systems.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        if self.n_inputs() != 1 || self.n_outputs() != 1 {
            return Err(Error::Dimension("eval expects a SISO system".into()));
        }
        let n = self.order();
        if n == 0 {
            return Ok(Complex64::new(self.d[(0, 0)], 0.0));
        }
        let mut zia = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                zia[(i, j)] = -Complex64::new(self.a[(i, j)], 0.0);
            }
            zia[(i, i)] += z;
        }
        let b = DVector::<Complex64>::from_iterator(n, self.b.iter().map(|&v| v.into()));
        let x = zia.lu().solve(&b).ok_or(Error::SingularResponse(z.arg()))?;
        let mut acc = Complex64::new(self.d[(0, 0)], 0.0);
        for i in 0..n {
            acc += Complex64::new(self.c[(0, i)], 0.0) * x[i];
        }
        Ok(acc)
    }

    /// Eigenvalues of `A`.
    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        eigenvalues(&self.a)
    }

    /// One step of `x' = A x + B u`, returning the output `y = C x + D u`.
    pub fn step(&self, x: &mut DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        let y = &self.c * &*x + &self.d * u;
        *x = &self.a * &*x + &self.b * u;
        y
    }
}

/// Eigenvalues of a square real matrix through the real Schur form.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(vec![]);
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), 1.0e-14, 50_000)
        .ok_or(Error::EigenvalueFailure)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Largest eigenvalue magnitude of a square matrix.
pub fn spectral_radius_of(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|e| e.norm()).fold(0.0, f64::max))
}
