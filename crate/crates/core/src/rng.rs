//! Seeded random streams with a fixed, language-independent contract.
//!
//! Generator: `splitmix64` (Steele, Lea & Flood), version `sm64/1`. Every
//! stream is identified by a root seed plus a path of 64-bit labels; the
//! same seed and path always produce the same draws, in any implementation
//! of this contract.
//!
//! Contract:
//!
//! * `mix(z)`: the splitmix64 finalizer
//!   `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`,
//!   `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`,
//!   `z ^ (z >> 31)` (all wrapping).
//! * stream key: starting from `key = mix(seed ^ 0x5DEECE66D)`, each path
//!   label `e` updates `key = mix(key.rotate_left(1) ^ mix(e))`.
//! * draws: the i-th raw value of a stream is
//!   `mix(key + (i + 1) * 0x9E3779B97F4A7C15)` (wrapping), i.e. splitmix64
//!   seeded with the key.
//! * `uniform()`: `(raw >> 11) * 2^-53`, in `[0, 1)`.
//! * `normal()`: Box-Muller on two uniforms, `u1` shifted into `(0, 1]` as
//!   `((raw >> 11) + 1) * 2^-53`; returns
//!   `sqrt(-2 ln u1) * cos(2 pi u2)` (the sine companion is discarded).

const GOLDEN: u64 = 0x9E3779B97F4A7C15;
const SEED_SALT: u64 = 0x5DEECE66D;

/// Generator identifier, recorded in generated artifacts.
pub const RNG_VERSION: &str = "sm64/1";

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// One deterministic stream of draws.
#[derive(Debug, Clone)]
pub struct StreamRng {
    key: u64,
    counter: u64,
}

impl StreamRng {
    /// Root stream of a seed (empty path).
    pub fn from_seed(seed: u64) -> Self {
        StreamRng {
            key: mix(seed ^ SEED_SALT),
            counter: 0,
        }
    }

    /// Child stream under a path label.
    pub fn derive(&self, label: u64) -> Self {
        StreamRng {
            key: mix(self.key.rotate_left(1) ^ mix(label)),
            counter: 0,
        }
    }

    /// Child stream under a path of labels.
    pub fn derive_path(&self, path: &[u64]) -> Self {
        path.iter().fold(self.clone(), |rng, &e| rng.derive(e))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal draw (Box-Muller, cosine branch).
    pub fn normal(&mut self) -> f64 {
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    /// Normal draw with the given mean and standard deviation.
    pub fn normal_with(&mut self, mean: f64, std_dev: f64) -> f64 {
        mean + std_dev * self.normal()
    }
}
