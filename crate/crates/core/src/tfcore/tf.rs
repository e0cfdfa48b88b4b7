use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::poly::Polynomial;
use super::ss::StateSpace;
use crate::error::{Error, Result};

/// Root distance below which a shared numerator/denominator root is
/// cancelled during construction.
pub const CANCEL_TOL: f64 = 1.0e-8;

/// Discrete (or continuous, `period == 0`) rational transfer function
/// `num(z) / den(z)`. Common roots are cancelled on construction.
#[derive(Debug, Clone)]
pub struct RationalTF {
    num: Polynomial,
    den: Polynomial,
    pub period: f64,
}

impl RationalTF {
    pub fn new(num: Polynomial, den: Polynomial, period: f64) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let (num, den) = reduce(num, den)?;
        Ok(RationalTF { num, den, period })
    }

    /// Convenience constructor from descending coefficient slices.
    pub fn from_descending(num: &[f64], den: &[f64], period: f64) -> Result<Self> {
        Self::new(
            Polynomial::from_descending(num),
            Polynomial::from_descending(den),
            period,
        )
    }

    pub fn constant(k: f64, period: f64) -> Self {
        RationalTF {
            num: Polynomial::constant(k),
            den: Polynomial::one(),
            period,
        }
    }

    pub fn zero(period: f64) -> Self {
        RationalTF {
            num: Polynomial::zero(),
            den: Polynomial::one(),
            period,
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_proper(&self) -> bool {
        self.is_zero() || self.num.degree() <= self.den.degree()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.is_zero() || self.num.degree() < self.den.degree()
    }

    /// num(z) / den(z), rejecting evaluation too close to a pole.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let dv = self.den.eval(z);
        let scale = self
            .den
            .coeffs()
            .iter()
            .map(|c| c.abs())
            .fold(0.0, f64::max)
            .max(1.0);
        if dv.norm() < 1.0e-12 * scale {
            return Err(Error::PoleEvaluation {
                magnitude: dv.norm(),
            });
        }
        Ok(self.num.eval(z) / dv)
    }

    /// Gain at z = 1 (dc for discrete systems); infinite for integrating
    /// blocks.
    pub fn dc_gain(&self) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let dv = self.den.eval(one);
        let nv = self.num.eval(one);
        if dv.norm() < 1.0e-12 {
            return f64::INFINITY * nv.re.signum();
        }
        (nv / dv).re
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        self.den.roots()
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num.is_zero() {
            return Ok(vec![]);
        }
        self.num.roots()
    }

    /// Rational addition with the same period; the result is reduced.
    pub fn add(&self, other: &RationalTF) -> Result<RationalTF> {
        if (self.period - other.period).abs() > 1.0e-12 * self.period.abs().max(1.0) {
            return Err(Error::PeriodMismatch(format!(
                "{} vs {}",
                self.period, other.period
            )));
        }
        let num = &(&self.num * &other.den) + &(&other.num * &self.den);
        let den = &self.den * &other.den;
        RationalTF::new(num, den, self.period)
    }

    pub fn scale(&self, k: f64) -> RationalTF {
        RationalTF {
            num: self.num.scale(k),
            den: self.den.clone(),
            period: self.period,
        }
    }

    /// Controllable canonical realization. Requires a proper function.
    ///
    /// With monic denominator `z^n + a_(n-1) z^(n-1) + ... + a_0`, the last
    /// state row carries `-a_i`, `B` is the unit vector on the last state,
    /// `C_i = b_i - b_n a_i`, and `D = b_n`. A constant yields an empty
    /// state with `D = k`.
    pub fn to_state_space(&self) -> Result<StateSpace> {
        if !self.is_proper() {
            return Err(Error::Improper {
                num: self.num.degree(),
                den: self.den.degree(),
            });
        }
        if self.is_zero() {
            return Ok(StateSpace::gain(0.0, self.period));
        }
        let lead = self.den.leading();
        let n = self.den.degree();
        let d_coeff = if self.num.degree() == n {
            self.num.coeff(n) / lead
        } else {
            0.0
        };
        if n == 0 {
            return Ok(StateSpace::gain(self.num.coeff(0) / lead, self.period));
        }
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = 1.0;
        }
        for i in 0..n {
            a[(n - 1, i)] = -self.den.coeff(i) / lead;
        }
        let mut b = DMatrix::<f64>::zeros(n, 1);
        b[(n - 1, 0)] = 1.0;
        let mut c = DMatrix::<f64>::zeros(1, n);
        for i in 0..n {
            c[(0, i)] = self.num.coeff(i) / lead - d_coeff * self.den.coeff(i) / lead;
        }
        StateSpace::new(a, b, c, DMatrix::from_element(1, 1, d_coeff), self.period)
    }
}

fn reduce(num: Polynomial, den: Polynomial) -> Result<(Polynomial, Polynomial)> {
    if num.is_zero() {
        return Ok((Polynomial::zero(), Polynomial::one()));
    }
    if num.degree() == 0 || den.degree() == 0 {
        return Ok((num, den));
    }
    let nroots = num.roots()?;
    let droots = den.roots()?;
    let mut keep_n = vec![true; nroots.len()];
    let mut keep_d = vec![true; droots.len()];
    let mut cancelled = false;
    for (i, rn) in nroots.iter().enumerate() {
        for (j, rd) in droots.iter().enumerate() {
            if keep_d[j] && keep_n[i] && (rn - rd).norm() < CANCEL_TOL {
                keep_n[i] = false;
                keep_d[j] = false;
                cancelled = true;
                break;
            }
        }
    }
    if !cancelled {
        return Ok((num, den));
    }
    let rn: Vec<Complex64> = nroots
        .into_iter()
        .zip(&keep_n)
        .filter(|(_, k)| **k)
        .map(|(r, _)| r)
        .collect();
    let rd: Vec<Complex64> = droots
        .into_iter()
        .zip(&keep_d)
        .filter(|(_, k)| **k)
        .map(|(r, _)| r)
        .collect();
    Ok((
        Polynomial::from_roots(&rn, num.leading()),
        Polynomial::from_roots(&rd, den.leading()),
    ))
}

impl fmt::Display for RationalTF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}
