//! Portable seeded random source.
//!
//! Samples must be reproducible by any implementation reading a descriptor
//! cache, so the generator is fixed here rather than borrowed from a crate
//! whose output may change between releases:
//!
//! * state initialization: one SplitMix64 step applied to the seed; a zero
//!   result is replaced by `0x9E37_79B9_7F4A_7C15`.
//! * step: xorshift64* (shifts 12, 25, 27; multiplier `0x2545_F491_4F6C_DD1D`).
//! * unit real: the top 53 bits of a step scaled by 2^-53, giving `[0, 1)`.
//!
//! Per-model seeds are `seed ^ fnv1a64(model_id)`.

/// Algorithm string recorded in the descriptor cache header.
pub const ALGORITHM: &str = "xorshift64star;init=splitmix64;unit=top53;model-seed=seed^fnv1a64(id)";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        let state = match splitmix64(seed) {
            0 => GOLDEN,
            s => s,
        };
        XorShift64Star { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform real in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// 64-bit FNV-1a over the UTF-8 bytes of `s`.
pub fn fnv1a64(s: &str) -> u64 {
    s.bytes().fold(0xCBF2_9CE4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Seed for one model, derived from the run seed and its id.
pub fn model_seed(seed: u64, model_id: &str) -> u64 {
    seed ^ fnv1a64(model_id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(""), 0xCBF2_9CE4_8422_2325);
        assert_eq!(fnv1a64("a"), 0xAF63_DC4C_8601_EC8C);
        assert_eq!(fnv1a64("foobar"), 0x8594_4171_F739_67E8);
    }

    #[test]
    fn splitmix_reference_value() {
        // first output of the reference SplitMix64 seeded with 0
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn deterministic_and_in_unit_interval() {
        let mut a = XorShift64Star::new(42);
        let mut b = XorShift64Star::new(42);
        for _ in 0..10_000 {
            let x = a.next_f64();
            assert_eq!(x.to_bits(), b.next_f64().to_bits());
            assert!((0.0..1.0).contains(&x));
        }
        let mut c = XorShift64Star::new(43);
        assert_ne!(XorShift64Star::new(42).next_u64(), c.next_u64());
    }

    #[test]
    fn unit_mean_is_half() {
        let mut r = XorShift64Star::new(7);
        let n = 200_000;
        let mean = (0..n).map(|_| r.next_f64()).sum::<f64>() / n as f64;
        // sd of the mean is 1/sqrt(12 n) ~ 6.5e-4
        assert!((mean - 0.5).abs() < 3e-3, "{mean}");
    }
}
