use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Sensor noise model. Range noise is multiplicative (1% under 3 m, 2% at or
/// beyond); odometry noise scales with the commanded motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorNoise {
    pub range_noise_rel: f64,
    pub range_noise_rel_far: f64,
    /// Relative standard deviations applied to (v, w) each step.
    pub odom_noise_std: (f64, f64),
    pub rng_seed: u64,
}

impl SensorNoise {
    pub const NEAR_FAR_SPLIT: f64 = 3.0;

    pub fn off(seed: u64) -> Self {
        Self {
            range_noise_rel: 0.0,
            range_noise_rel_far: 0.0,
            odom_noise_std: (0.0, 0.0),
            rng_seed: seed,
        }
    }

    pub fn range_sigma_rel(&self, range: f64) -> f64 {
        if range < Self::NEAR_FAR_SPLIT {
            self.range_noise_rel
        } else {
            self.range_noise_rel_far
        }
    }

    pub fn is_valid(&self) -> bool {
        self.range_noise_rel >= 0.0
            && self.range_noise_rel_far >= 0.0
            && self.odom_noise_std.0 >= 0.0
            && self.odom_noise_std.1 >= 0.0
    }
}

impl Default for SensorNoise {
    fn default() -> Self {
        Self {
            range_noise_rel: 0.01,
            range_noise_rel_far: 0.02,
            odom_noise_std: (0.0, 0.0),
            rng_seed: 0,
        }
    }
}

/// Independent seeded streams so enabling one noise source does not shift the
/// draws of another.
#[derive(Debug, Clone)]
pub struct NoiseStreams {
    pub scan: ChaCha8Rng,
    pub odom: ChaCha8Rng,
}

impl NoiseStreams {
    pub fn new(seed: u64) -> Self {
        let mut scan = ChaCha8Rng::seed_from_u64(seed);
        scan.set_stream(1);
        let mut odom = ChaCha8Rng::seed_from_u64(seed);
        odom.set_stream(2);
        Self { scan, odom }
    }
}
