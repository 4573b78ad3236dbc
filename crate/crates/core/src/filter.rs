//! The prototype filter type shared by every module.

use crate::error::{Error, Result};

/// A real FIR pulse of length L_p together with its (K, M) context.
#[derive(Debug, Clone, PartialEq)]
pub struct PrototypeFilter {
    samples: Vec<f64>,
    k: usize,
    m: usize,
    label: String,
}

impl PrototypeFilter {
    /// Wraps `samples`, checking that M is even and L_p ∈ {KM−1, KM, KM+1}.
    pub fn new(samples: Vec<f64>, k: usize, m: usize, label: impl Into<String>) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("overlapping factor K must be positive"));
        }
        if m == 0 || m % 2 != 0 {
            return Err(Error::domain(format!("subcarrier count M={m} must be even and positive")));
        }
        let km = k * m;
        let len = samples.len();
        if len + 1 != km && len != km && len != km + 1 {
            return Err(Error::domain(format!("filter length {len} not in {{KM-1, KM, KM+1}} for K={k}, M={m}")));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("filter samples must be finite"));
        }
        Ok(PrototypeFilter { samples, k, m, label: label.into() })
    }

    /// Same as [`new`](Self::new) followed by scaling to unit energy.
    pub fn normalized(samples: Vec<f64>, k: usize, m: usize, label: impl Into<String>) -> Result<Self> {
        let mut f = Self::new(samples, k, m, label)?;
        f.normalize()?;
        Ok(f)
    }

    /// Unit impulse at the centre of a length-(KM+1) filter.
    pub fn centered_impulse(k: usize, m: usize) -> Result<Self> {
        let len = k * m + 1;
        let mut s = vec![0.0; len];
        s[(len - 1) / 2] = 1.0;
        Self::new(s, k, m, "impulse")
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let e = self.energy();
        if !(e > 0.0) {
            return Err(Error::numeric("cannot normalize a zero filter"));
        }
        let s = e.sqrt().recip();
        self.samples.iter_mut().for_each(|x| *x *= s);
        Ok(())
    }

    /// Largest |p[k] − p[L_p−1−k]|.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.samples.len();
        (0..n / 2).map(|i| (self.samples[i] - self.samples[n - 1 - i]).abs()).fold(0.0, f64::max)
    }
}

/// Centred index k̲ = k − (L_p−1)/2.
pub fn centered_index(k: usize, len: usize) -> f64 {
    k as f64 - (len as f64 - 1.0) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_the_three_lengths() {
        for len in [127, 128, 129] {
            assert!(PrototypeFilter::new(vec![0.1; len], 4, 32, "x").is_ok());
        }
        assert!(PrototypeFilter::new(vec![0.1; 130], 4, 32, "x").is_err());
        assert!(PrototypeFilter::new(vec![0.1; 13], 4, 3, "x").is_err());
    }

    #[test]
    fn normalization_gives_unit_energy() {
        let f = PrototypeFilter::normalized(vec![3.0; 33], 4, 8, "c").unwrap();
        assert!((f.energy() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn centred_index_is_symmetric() {
        assert_eq!(centered_index(0, 129), -64.0);
        assert_eq!(centered_index(128, 129), 64.0);
        assert_eq!(centered_index(0, 128), -63.5);
    }
}
