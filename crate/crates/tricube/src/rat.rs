//! Exact rational arithmetic helpers.
//!
//! Knot coordinates and blending weights are kept as arbitrary-precision
//! rationals so that grid topology, refinement coefficients, and the merge
//! weight tables are exact; evaluation converts to `f64` at the last moment.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn ri(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn r0() -> Rat {
    Rat::zero()
}

pub fn r1() -> Rat {
    Rat::one()
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

pub fn half(r: &Rat) -> Rat {
    r / ri(2)
}

/// Exact midpoint of two rationals.
pub fn midpoint(a: &Rat, b: &Rat) -> Rat {
    half(&(a + b))
}

pub fn abs(r: &Rat) -> Rat {
    r.abs()
}

/// Parses "n/d" or plain integer text.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Rat::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(Rat::from_integer(n))
    }
}

/// Renders a rational as "n/d" (or "n" when integral).
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
