use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Real-coefficient polynomial in `z`, stored ascending: `coeffs[i]` multiplies `z^i`.
///
/// The leading coefficient is nonzero unless the polynomial is identically
/// zero (a single `0.0` entry). Display prints descending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, trimming exact-zero
    /// leading terms.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Polynomial { coeffs };
        p.trim();
        p
    }

    /// Builds from descending coefficients (the usual display order).
    pub fn from_descending(coeffs: &[f64]) -> Self {
        let mut c: Vec<f64> = coeffs.to_vec();
        c.reverse();
        Self::new(c)
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Polynomial { coeffs: vec![1.0] }
    }

    pub fn constant(k: f64) -> Self {
        Self::new(vec![k])
    }

    /// Monic `z - r`.
    pub fn linear(root: f64) -> Self {
        Polynomial {
            coeffs: vec![-root, 1.0],
        }
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `z^i`, zero beyond the stored degree.
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 1.0
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Divides all coefficients by the leading one.
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(1.0 / self.leading())
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative at `z` in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect(),
        )
    }

    /// Keeps only coefficients at exponents divisible by `n`, reindexing to
    /// the slow variable: output coefficient `j` is the input coefficient at
    /// exponent `j * n`. All other coefficients are discarded.
    pub fn downsample(&self, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidFactor(n));
        }
        Ok(Self::new(self.coeffs.iter().copied().step_by(n).collect()))
    }

    /// Long division: returns `(quotient, remainder)` with
    /// `self = quotient * divisor + remainder`.
    pub fn div_rem(&self, divisor: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        if divisor.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let dd = divisor.degree();
        if self.degree() < dd || self.is_zero() {
            return Ok((Self::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0.0; self.degree() - dd + 1];
        let lead = divisor.leading();
        for k in (0..quot.len()).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for j in 0..=dd {
                rem[k + j] -= q * divisor.coeffs[j];
            }
        }
        rem.truncate(dd.max(1));
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Roots via the companion matrix, polished with a few Newton steps.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let d = self.degree();
        if self.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if d == 0 {
            return Ok(vec![]);
        }
        let lead = self.leading();
        let mut comp = DMatrix::<f64>::zeros(d, d);
        for i in 1..d {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..d {
            comp[(i, d - 1)] = -self.coeffs[i] / lead;
        }
        let schur = nalgebra::linalg::Schur::try_new(comp, 1.0e-14, 20_000)
            .ok_or(Error::EigenvalueFailure)?;
        let mut roots: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
        // repeated roots converge only linearly, so give Newton enough
        // budget to walk a poor defective-block eigenvalue back in
        for r in roots.iter_mut() {
            for _ in 0..80 {
                let (p, dp) = self.eval_with_derivative(*r);
                if dp.norm() < 1.0e-300 {
                    break;
                }
                let step = p / dp;
                *r -= step;
                if step.norm() <= 1.0e-15 * r.norm().max(1.0) {
                    break;
                }
            }
        }
        Ok(roots)
    }

    /// Real polynomial with the given roots (conjugates paired into
    /// quadratics) and leading coefficient.
    pub fn from_roots(roots: &[Complex64], leading: f64) -> Self {
        let mut p = Polynomial::constant(leading);
        let mut used = vec![false; roots.len()];
        for i in 0..roots.len() {
            if used[i] {
                continue;
            }
            let r = roots[i];
            if r.im.abs() <= 1.0e-9 * r.re.abs().max(1.0) {
                p = &p * &Polynomial::linear(r.re);
                used[i] = true;
            } else {
                // find the conjugate partner
                let mut partner = None;
                for (j, rj) in roots.iter().enumerate().skip(i + 1) {
                    if !used[j] && (rj.conj() - r).norm() <= 1.0e-6 * r.norm().max(1.0) {
                        partner = Some(j);
                        break;
                    }
                }
                let quad = Polynomial::new(vec![r.norm_sqr(), -2.0 * r.re, 1.0]);
                p = &p * &quad;
                used[i] = true;
                if let Some(j) = partner {
                    used[j] = true;
                }
            }
        }
        p
    }

    /// Formats with a custom variable name, descending powers.
    pub fn display_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            let body = match i {
                0 => format!("{}", Abbrev(c.abs())),
                1 => {
                    if c.abs() == 1.0 {
                        var.to_string()
                    } else {
                        format!("{}{}", Abbrev(c.abs()), var)
                    }
                }
                _ => {
                    if c.abs() == 1.0 {
                        format!("{}^{}", var, i)
                    } else {
                        format!("{}{}^{}", Abbrev(c.abs()), var, i)
                    }
                }
            };
            if terms.is_empty() {
                terms.push(if c < 0.0 { format!("-{}", body) } else { body });
            } else {
                terms.push(format!("{} {}", if c < 0.0 { "-" } else { "+" }, body));
            }
        }
        terms.join(" ")
    }
}

struct Abbrev(f64);

impl fmt::Display for Abbrev {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = format!("{:.6}", self.0);
        let s = s.trim_end_matches('0').trim_end_matches('.');
        write!(f, "{}", s)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with("z"))
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![0.0; self.coeffs.len().max(rhs.coeffs.len())];
        for (i, &a) in self.coeffs.iter().enumerate() {
            out[i] += a;
        }
        for (i, &b) in rhs.coeffs.iter().enumerate() {
            out[i] += b;
        }
        Polynomial::new(out)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs.clone())
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn telescoping_product() {
        // (z - 1)(z^2 + z + 1) = z^3 - 1
        let a = Polynomial::linear(1.0);
        let b = Polynomial::new(vec![1.0, 1.0, 1.0]);
        let p = &a * &b;
        assert_eq!(p.coeffs(), &[-1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn one_is_multiplicative_identity() {
        let p = Polynomial::new(vec![3.0, -2.0, 0.5]);
        assert_eq!(&Polynomial::one() * &p, p);
    }

    #[test]
    fn geometric_factor_collapses_middle_terms() {
        let p = 0.9072;
        let a = Polynomial::linear(p);
        let b = Polynomial::new(vec![p * p, p, 1.0]);
        let prod = &a * &b;
        assert!(prod.coeff(1).abs() < 1e-12);
        assert!(prod.coeff(2).abs() < 1e-12);
        assert_abs_diff_eq!(prod.coeff(0), -p.powi(3), epsilon = 1e-15);
        assert_abs_diff_eq!(prod.coeff(0), -0.7465, epsilon = 1e-3);
        assert_abs_diff_eq!(prod.coeff(3), 1.0, epsilon = 0.0);
    }

    #[test]
    fn downsample_strides_exponents() {
        // z^6 - 2 z^3 + 1 at n = 3 becomes z^2 - 2 z + 1 in the slow variable
        let p = Polynomial::new(vec![1.0, 0.0, 0.0, -2.0, 0.0, 0.0, 1.0]);
        let q = p.downsample(3).unwrap();
        assert_eq!(q.coeffs(), &[1.0, -2.0, 1.0]);
        assert_eq!(p.downsample(1).unwrap(), p);
        assert!(p.downsample(0).is_err());
    }

    #[test]
    fn division_round_trips() {
        let a = Polynomial::new(vec![1.0, -2.5, 0.0, 3.0, 1.0]);
        let d = Polynomial::new(vec![0.5, 1.0, 1.0]);
        let (q, r) = a.div_rem(&d).unwrap();
        let back = &(&q * &d) + &r;
        for i in 0..=a.degree() {
            assert_abs_diff_eq!(back.coeff(i), a.coeff(i), epsilon = 1e-12);
        }
        assert!(r.degree() < d.degree());
    }

    #[test]
    fn roots_of_cubic() {
        let p = &(&Polynomial::linear(0.5) * &Polynomial::linear(-0.25)) * &Polynomial::linear(0.9);
        let mut roots: Vec<f64> = p.roots().unwrap().iter().map(|r| r.re).collect();
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(roots[0], -0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(roots[1], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(roots[2], 0.9, epsilon = 1e-10);
    }

    #[test]
    fn from_roots_pairs_conjugates() {
        let roots = vec![
            Complex64::new(0.9, 0.1),
            Complex64::new(0.9, -0.1),
            Complex64::new(-0.5, 0.0),
        ];
        let p = Polynomial::from_roots(&roots, 2.0);
        assert_eq!(p.degree(), 3);
        for r in &roots {
            assert!(p.eval(*r).norm() < 1e-12);
        }
    }

    #[test]
    fn displays_descending() {
        let p = Polynomial::new(vec![1.0, -2.0, 1.0]);
        assert_eq!(p.to_string(), "z^2 - 2z + 1");
    }
}
