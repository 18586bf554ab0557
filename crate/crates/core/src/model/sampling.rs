use rand::Rng;

use super::link::logistic_link;
use super::rng::RngSeed;
use super::types::{Dataset, InverseTemperature, Label, UnitVector};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Draws `(x, y)` pairs from the logistic model with standard normal design.
#[derive(Clone, Debug)]
pub struct ModelSampler<T: Real = f64> {
    truth: UnitVector<T>,
    beta: InverseTemperature<T>,
}

impl<T: Real> ModelSampler<T> {
    pub fn new(truth: UnitVector<T>, beta: InverseTemperature<T>) -> Self {
        Self { truth, beta }
    }

    pub fn truth(&self) -> &UnitVector<T> {
        &self.truth
    }

    pub fn dim(&self) -> usize {
        self.truth.dim()
    }

    /// Label for a covariate with truth score `s = x^T theta*`.
    #[inline]
    pub fn label_for_score<R: Rng + ?Sized>(&self, score: T, rng: &mut R) -> Label {
        match self.beta {
            InverseTemperature::Infinite => Label::from_score(score),
            InverseTemperature::Finite(b) => {
                let p = logistic_link(b * score);
                if T::unit_uniform(rng) < p {
                    Label::Positive
                } else {
                    Label::Negative
                }
            }
        }
    }

    /// Fills `x` with a fresh covariate and returns its label.
    #[inline]
    pub fn draw_into<R: Rng + ?Sized>(&self, x: &mut [T], rng: &mut R) -> Label {
        for v in x.iter_mut() {
            *v = T::standard_normal(rng);
        }
        let score = self.truth.dot_slice(x);
        self.label_for_score(score, rng)
    }

    pub fn dataset<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset<T>> {
        if n == 0 {
            return Err(Error::ZeroSamples);
        }
        let d = self.dim();
        let mut ds = Dataset::with_capacity(d, n)?;
        let mut x = vec![T::zero(); d];
        for _ in 0..n {
            let y = self.draw_into(&mut x, rng);
            ds.push(&x, y)?;
        }
        Ok(ds)
    }
}

/// `n` i.i.d. samples from the model with parameter `truth`.
pub fn sample_dataset<T: Real>(
    truth: &UnitVector<T>,
    beta: InverseTemperature<T>,
    n: usize,
    seed: RngSeed,
) -> Result<Dataset<T>> {
    let mut rng = seed.rng();
    ModelSampler::new(truth.clone(), beta).dataset(n, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth(d: usize) -> UnitVector {
        UnitVector::uniform(d, &mut RngSeed::new(99, 0).rng()).unwrap()
    }

    #[test]
    fn rejects_zero_samples() {
        let t = truth(3);
        assert_eq!(
            sample_dataset(&t, InverseTemperature::Infinite, 0, RngSeed::new(1, 1)),
            Err(Error::ZeroSamples)
        );
    }

    #[test]
    fn noiseless_labels_are_consistent() {
        let t = truth(4);
        let ds = sample_dataset(&t, InverseTemperature::Infinite, 5000, RngSeed::new(1, 2)).unwrap();
        for (x, y) in ds.iter() {
            let margin = y.sign::<f64>() * t.dot_slice(x);
            assert!(margin > 0.0);
            assert_eq!(Label::from_score(t.dot_slice(x)), y);
        }
    }

    #[test]
    fn high_temperature_labels_are_fair_coins() {
        let t = truth(3);
        let n = 100_000;
        let beta = InverseTemperature::finite(1e-4).unwrap();
        let ds = sample_dataset(&t, beta, n, RngSeed::new(5, 5)).unwrap();
        let mean: f64 = ds.iter().map(|(_, y)| y.sign::<f64>()).sum::<f64>() / n as f64;
        assert!(mean.abs() <= 3.0 / (n as f64).sqrt(), "mean label {mean}");
    }

    #[test]
    fn deterministic_given_seed() {
        let t = truth(5);
        let beta = InverseTemperature::finite(2.0).unwrap();
        let a = sample_dataset(&t, beta, 300, RngSeed::new(3, 4)).unwrap();
        let b = sample_dataset(&t, beta, 300, RngSeed::new(3, 4)).unwrap();
        let c = sample_dataset(&t, beta, 300, RngSeed::new(3, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn works_in_single_precision() {
        let t: UnitVector<f32> = truth(3).cast();
        let ds = sample_dataset(&t, InverseTemperature::Infinite, 100, RngSeed::new(3, 4)).unwrap();
        assert_eq!(ds.len(), 100);
        assert!(ds.iter().all(|(x, y)| y.sign::<f32>() * t.dot_slice(x) >= 0.0));
    }
}
