use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// A reproducible source of variates identified by `(seed, stream_id)`.
///
/// Streams sharing a seed but differing in `stream_id` are disjoint ChaCha
/// streams, so one stream per replicate gives independent, order-free
/// replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RandomStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Standardized entry distributions used to simulate data matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variate {
    Gaussian,
    /// `√(3/5)·t₅`: mean 0, variance 1, fourth moment 9.
    ScaledT5,
}

impl Variate {
    /// `E x⁴ − 3` of the distribution.
    pub fn excess_kurtosis(self) -> f64 {
        match self {
            Variate::Gaussian => 0.0,
            Variate::ScaledT5 => 6.0,
        }
    }

    pub fn fill<R: Rng + ?Sized>(self, rng: &mut R, out: &mut [f64]) {
        match self {
            Variate::Gaussian => {
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
            }
            Variate::ScaledT5 => {
                let chi = ChiSquared::<f64>::new(5.0).expect("5 degrees of freedom is valid");
                let scale = (3.0f64 / 5.0).sqrt();
                for v in out.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    let w: f64 = chi.sample(rng);
                    *v = scale * z / (w / 5.0).sqrt();
                }
            }
        }
    }

    pub fn sample(self, stream: RandomStream, count: usize) -> Vec<f64> {
        let mut rng = stream.rng();
        let mut out = vec![0.0; count];
        self.fill(&mut rng, &mut out);
        out
    }
}

pub fn sample_standard_normal(stream: RandomStream, count: usize) -> Vec<f64> {
    Variate::Gaussian.sample(stream, count)
}

pub fn sample_scaled_t5(stream: RandomStream, count: usize) -> Vec<f64> {
    Variate::ScaledT5.sample(stream, count)
}
