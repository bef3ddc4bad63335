//! Scalar types used for densities and thresholds.
//!
//! Everything combinatorial in this crate is integer-valued; the only place a
//! field type shows up is when a count is compared against a fraction of a
//! product of set sizes (densities, expansion thresholds, slack fractions).
//! Those comparisons are written once against [`Scalar`] so they can run
//! exactly over rationals or approximately over floats.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Num, ToPrimitive};

/// A number type density comparisons can be carried out in.
pub trait Scalar: Num + PartialOrd + Clone + Debug + Send + Sync + 'static {
    /// `numer / denom`, exact where the type allows it.
    fn from_ratio(numer: u64, denom: u64) -> Self;

    /// Best-effort conversion from a float (exact rationals approximate it).
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// Smallest integer `k` with `k >= self * n`; negative values give 0.
    fn ceil_mul(&self, n: usize) -> usize;

    fn from_count(k: usize) -> Self {
        Self::from_ratio(k as u64, 1)
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_ratio(numer: u64, denom: u64) -> Self {
                (numer as f64 / denom as f64) as $t
            }
            fn from_f64(x: f64) -> Self {
                x as $t
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn ceil_mul(&self, n: usize) -> usize {
                let v = (*self as f64) * n as f64;
                if v <= 0.0 {
                    0
                } else {
                    v.ceil() as usize
                }
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

macro_rules! ratio_scalar {
    ($t:ty) => {
        impl Scalar for Ratio<$t> {
            fn from_ratio(numer: u64, denom: u64) -> Self {
                Ratio::new(numer as $t, denom as $t)
            }
            fn from_f64(x: f64) -> Self {
                // Decimal literals such as 0.7 should come back as 7/10, not as
                // the nearest dyadic fraction.
                for digits in 0..=9u32 {
                    let scale = 10f64.powi(digits as i32);
                    let scaled = x * scale;
                    if (scaled - scaled.round()).abs() < 1e-9 {
                        return Ratio::new(scaled.round() as $t, scale as $t);
                    }
                }
                Ratio::approximate_float(x).unwrap_or_else(|| Ratio::from_integer(0))
            }
            fn to_f64(&self) -> f64 {
                self.numer().to_f64().unwrap_or(f64::NAN) / self.denom().to_f64().unwrap_or(f64::NAN)
            }
            fn ceil_mul(&self, n: usize) -> usize {
                let v = self * Ratio::from_integer(n as $t);
                let c = v.ceil().to_integer();
                if c <= 0 {
                    0
                } else {
                    c as usize
                }
            }
        }
    };
}

ratio_scalar!(i64);
ratio_scalar!(i128);

/// `count >= frac * total`, evaluated in `S`.
pub fn at_least<S: Scalar>(count: usize, frac: &S, total: usize) -> bool {
    S::from_count(count) >= frac.clone() * S::from_count(total)
}

/// Parses `"7/10"`, `"0.7"` or `"3"` into a scalar.
pub fn parse_scalar<S: Scalar>(text: &str) -> Option<S> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once('/') {
        let a: u64 = a.trim().parse().ok()?;
        let b: u64 = b.trim().parse().ok()?;
        if b == 0 {
            return None;
        }
        return Some(S::from_ratio(a, b));
    }
    let x: f64 = text.parse().ok()?;
    x.is_finite().then(|| S::from_f64(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = Ratio<i64>;

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(Q::from_f64(0.7), Q::new(7, 10));
        assert_eq!(Q::from_f64(0.05), Q::new(1, 20));
        assert_eq!(parse_scalar::<Q>("5/9"), Some(Q::new(5, 9)));
        assert_eq!(parse_scalar::<Q>("0.25"), Some(Q::new(1, 4)));
        assert_eq!(parse_scalar::<Q>("1/0"), None);
    }

    #[test]
    fn ceil_mul_matches_between_types() {
        for (num, den) in [(1u64, 5u64), (1, 3), (2, 7), (9, 10)] {
            for n in 0..50 {
                let exact = Q::from_ratio(num, den).ceil_mul(n);
                let expect = (num as usize * n).div_ceil(den as usize);
                assert_eq!(exact, expect);
            }
        }
        assert_eq!(0.2f64.ceil_mul(40), 8);
    }

    #[test]
    fn at_least_is_exact_on_the_boundary() {
        assert!(at_least(7, &Q::new(7, 10), 10));
        assert!(!at_least(6, &Q::new(7, 10), 10));
    }
}
