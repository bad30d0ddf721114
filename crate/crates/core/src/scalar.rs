//! Scalar abstraction: all numeric code works over any floating-point type.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar: f32 or f64.
///
/// Tolerances and other literals are written as `f64` and converted with
/// [`Scalar::c`]; random draws are made in `f64` and converted, so generated
/// instances have the same structure regardless of the scalar in use.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Serialize + DeserializeOwned + Send + Sync + 'static
{
    /// Converts an `f64` literal (tolerance, probability, step size).
    fn c(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    fn lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Sums in pairwise (cascade) order for stable means over long sample runs.
pub fn pairwise_sum<S: Scalar>(values: &[S]) -> S {
    if values.len() <= 8 {
        return values.iter().fold(S::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Derives a per-subsystem or per-sample seed from a base seed and a label.
///
/// splitmix64 over the label bytes folded into the base seed; cheap, stable
/// across platforms, and good enough to decorrelate RNG streams.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    let mut h = splitmix(base);
    for chunk in label.as_bytes().chunks(8) {
        let mut buf = [0u8; 8];
        buf[..chunk.len()].copy_from_slice(chunk);
        h = splitmix(h ^ u64::from_le_bytes(buf));
    }
    h
}

/// Derives the seed for one sample (or one estimate) inside a stream, so
/// parallel evaluation order cannot change results.
pub fn counter_seed(stream: u64, index: u64) -> u64 {
    let mut z = stream ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93);
    z = (z ^ (z >> 32)).wrapping_mul(0xd6e8_feb8_6659_fd93);
    z = (z ^ (z >> 32)).wrapping_mul(0xd6e8_feb8_6659_fd93);
    z ^ (z >> 32)
}
