//! Variate generation on top of a raw 64-bit stream.
//!
//! Uniforms take the top 52 bits of one `u64` and are centred in their bin,
//! so they lie strictly inside (0, 1). Normals use the inverse CDF, so one
//! normal consumes exactly one `u64` and results are reproducible bit for
//! bit on every platform.

use crate::specfun::normal_quantile_unchecked;
use rand_core::RngCore;

const TWO_POW_M52: f64 = 1.0 / 4_503_599_627_370_496.0;

/// Uniform variate on the open interval (0, 1).
#[inline]
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * TWO_POW_M52
}

/// Standard normal variate.
#[inline]
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    normal_quantile_unchecked(uniform(rng))
}

/// Exponential variate with the given rate.
#[inline]
pub fn exponential<R: RngCore + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    -libm::log(uniform(rng)) / rate
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    #[test]
    fn uniform_is_open_and_centred() {
        struct Fixed(u64);
        impl RngCore for Fixed {
            fn next_u32(&mut self) -> u32 {
                self.0 as u32
            }
            fn next_u64(&mut self) -> u64 {
                self.0
            }
            fn fill_bytes(&mut self, _: &mut [u8]) {}
        }
        let lo = uniform(&mut Fixed(0));
        let hi = uniform(&mut Fixed(u64::MAX));
        assert!(lo > 0.0 && hi < 1.0);
        assert_eq!(lo, 1.0 - hi);
    }

    #[test]
    fn normal_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z = standard_normal(&mut rng);
            s1 += z;
            s2 += z * z;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.01);
    }
}
