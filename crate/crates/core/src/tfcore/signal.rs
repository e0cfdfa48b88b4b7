use crate::error::{Error, Result};

/// A uniformly sampled real signal with its sampling period in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSeq {
    pub values: Vec<f64>,
    pub period: f64,
}

impl SignalSeq {
    pub fn new(values: Vec<f64>, period: f64) -> Self {
        SignalSeq { values, period }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Inserts `n - 1` zeros between consecutive samples: the output at index
    /// `k` is `values[k / n]` when `n` divides `k` and zero otherwise. The
    /// period shrinks to `period / n`.
    pub fn upsample(&self, n: usize) -> Result<SignalSeq> {
        if n < 1 {
            return Err(Error::InvalidFactor(n));
        }
        let mut out = vec![0.0; self.values.len() * n];
        for (k, &v) in self.values.iter().enumerate() {
            out[k * n] = v;
        }
        // keep exact length semantics for n = 1
        if n == 1 {
            return Ok(self.clone());
        }
        Ok(SignalSeq::new(out, self.period / n as f64))
    }

    /// Keeps every `n`-th sample starting at index 0; the period grows to
    /// `period * n`.
    pub fn downsample(&self, n: usize) -> Result<SignalSeq> {
        if n < 1 {
            return Err(Error::InvalidFactor(n));
        }
        Ok(SignalSeq::new(
            self.values.iter().copied().step_by(n).collect(),
            self.period * n as f64,
        ))
    }
}
