//! Scalar cubic B-spline basis kernel.
//!
//! Everything downstream (grid refinement, merging weights, evaluation) rests
//! on three operations over a 5-knot window: basis evaluation, analytic
//! derivatives, and exact knot-insertion splitting.
//!
//! Conventions: the 0/0 case in the Cox-de Boor recursion evaluates to 0;
//! evaluation is right-continuous at interior knots and left-continuous at
//! the window's last knot, so clamped end windows attain value 1 on the
//! boundary.

use crate::rat::{ri, Rat};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BsplineError {
    #[error("knot vector must be non-decreasing")]
    NonDecreasing,
    #[error("knot value repeated more than 4 times")]
    TooManyRepeats,
    #[error("non-finite input")]
    NonFinite,
    #[error("insertion knot {0} outside [{1}, {2}]")]
    OutOfRange(f64, f64, f64),
    #[error("derivative order must be 1 or 2")]
    InvalidOrder,
    #[error("cannot split a zero-width knot window")]
    DegenerateWindow,
}

/// Five non-decreasing knots defining one cubic basis function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnotVector5(pub [f64; 5]);

impl KnotVector5 {
    pub fn new(knots: [f64; 5]) -> Result<Self, BsplineError> {
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(BsplineError::NonFinite);
        }
        if knots.windows(2).any(|w| w[0] > w[1]) {
            return Err(BsplineError::NonDecreasing);
        }
        if knots[0] == knots[4] {
            // 5-fold repetition is a zero-width window; 4-fold is the legal max.
            return Err(BsplineError::TooManyRepeats);
        }
        Ok(KnotVector5(knots))
    }

    pub fn support(&self) -> (f64, f64) {
        (self.0[0], self.0[4])
    }

    /// Central knot; the anchor parameter of the associated control point.
    pub fn anchor(&self) -> f64 {
        self.0[2]
    }
}

/// Degree-0 indicator with the half-open span convention; the span ending at
/// `top` (the full window's last knot) is closed so end windows reach 1.
fn n0(t: &[f64], j: usize, u: f64, top: f64) -> f64 {
    let (a, b) = (t[j], t[j + 1]);
    if a == b {
        return 0.0;
    }
    if u >= a && (u < b || (u == b && b == top)) {
        1.0
    } else {
        0.0
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// N_{j,p} over the knot slice, half-open spans closed at `top`.
fn eval_deg(t: &[f64], j: usize, p: usize, u: f64, top: f64) -> f64 {
    if p == 0 {
        return n0(t, j, u, top);
    }
    let left = ratio(u - t[j], t[j + p] - t[j]) * eval_deg(t, j, p - 1, u, top);
    let right = ratio(t[j + p + 1] - u, t[j + p + 1] - t[j + 1]) * eval_deg(t, j + 1, p - 1, u, top);
    left + right
}

/// Value of the degree-3 basis on `knots` at `u`; 0 outside the support.
pub fn eval_basis(knots: &KnotVector5, u: f64) -> Result<f64, BsplineError> {
    if !u.is_finite() {
        return Err(BsplineError::NonFinite);
    }
    let t = &knots.0;
    if u < t[0] || u > t[4] {
        return Ok(0.0);
    }
    Ok(eval_deg(t, 0, 3, u, t[4]))
}

/// Analytic derivative of the cubic basis, order 1 or 2.
pub fn eval_basis_derivative(knots: &KnotVector5, u: f64, order: u8) -> Result<f64, BsplineError> {
    if !u.is_finite() {
        return Err(BsplineError::NonFinite);
    }
    let t = &knots.0;
    if u < t[0] || u > t[4] {
        return match order {
            1 | 2 => Ok(0.0),
            _ => Err(BsplineError::InvalidOrder),
        };
    }
    let top = t[4];
    // N'_{0,3} = 3/(t3-t0) N_{0,2} - 3/(t4-t1) N_{1,2}
    let d1 = |j: usize, p: usize| -> f64 {
        ratio(p as f64, t[j + p] - t[j]) * eval_deg(t, j, p - 1, u, top)
            - ratio(p as f64, t[j + p + 1] - t[j + 1]) * eval_deg(t, j + 1, p - 1, u, top)
    };
    match order {
        1 => Ok(d1(0, 3)),
        2 => {
            // Differentiate the degree-2 pieces once more.
            let a = ratio(3.0, t[3] - t[0]);
            let b = ratio(3.0, t[4] - t[1]);
            Ok(a * d1(0, 2) - b * d1(1, 2))
        }
        _ => Err(BsplineError::InvalidOrder),
    }
}

/// Product of three univariate cubic basis values.
pub fn blend(
    ku: &KnotVector5,
    kv: &KnotVector5,
    kw: &KnotVector5,
    u: f64,
    v: f64,
    w: f64,
) -> Result<f64, BsplineError> {
    Ok(eval_basis(ku, u)? * eval_basis(kv, v)? * eval_basis(kw, w)?)
}

/// Result of inserting one knot into a 5-knot window: N = c1 N1 + c2 N2.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitResult {
    pub c1: f64,
    pub knots1: KnotVector5,
    pub c2: f64,
    pub knots2: KnotVector5,
}

/// Exact-rational window and split used by the refinement engine.
pub type RatKnots5 = [Rat; 5];

#[derive(Debug, Clone, PartialEq)]
pub struct SplitRat {
    pub c1: Rat,
    pub knots1: RatKnots5,
    pub c2: Rat,
    pub knots2: RatKnots5,
}

/// Case table for inserting `k` into `[r0..r4]`: child windows per the span
/// that contains `k`, with ties resolved by evaluating the cases in order.
fn split_windows(r: &RatKnots5, k: &Rat) -> ([Rat; 5], [Rat; 5]) {
    let [r0, r1, r2, r3, r4] = r.clone();
    if *k < r1 {
        (
            [r0.clone(), k.clone(), r1.clone(), r2.clone(), r3.clone()],
            [k.clone(), r1, r2, r3, r4],
        )
    } else if *k < r2 {
        (
            [r0.clone(), r1.clone(), k.clone(), r2.clone(), r3.clone()],
            [r1, k.clone(), r2, r3, r4],
        )
    } else if *k < r3 {
        (
            [r0.clone(), r1.clone(), r2.clone(), k.clone(), r3.clone()],
            [r1, r2, k.clone(), r3, r4],
        )
    } else {
        (
            [r0.clone(), r1.clone(), r2.clone(), r3.clone(), k.clone()],
            [r1, r2, r3, k.clone(), r4],
        )
    }
}

/// Insertion weight with the min(·, 1) cap; a vanishing denominator means the
/// capped value 1 (standard Oslo convention for fully clamped spans).
fn split_coeff(num: Rat, den: Rat) -> Rat {
    if den.is_zero() || num >= den {
        ri(1)
    } else {
        num / den
    }
}

/// Exact split of a rational knot window by inserting `k`.
pub fn split_basis_rat(r: &RatKnots5, k: &Rat) -> Result<SplitRat, BsplineError> {
    if *k < r[0] || *k > r[4] {
        return Err(BsplineError::OutOfRange(
            crate::rat::to_f64(k),
            crate::rat::to_f64(&r[0]),
            crate::rat::to_f64(&r[4]),
        ));
    }
    if r[0] == r[4] {
        return Err(BsplineError::DegenerateWindow);
    }
    let (knots1, knots2) = split_windows(r, k);
    let c1 = split_coeff(k - &r[0], &r[3] - &r[0]);
    let c2 = split_coeff(&r[4] - k, &r[4] - &r[1]);
    Ok(SplitRat { c1, knots1, c2, knots2 })
}

/// f64 wrapper over the exact split, for callers outside the rational engine.
pub fn split_basis(knots: &KnotVector5, k: f64) -> Result<SplitResult, BsplineError> {
    if !k.is_finite() {
        return Err(BsplineError::NonFinite);
    }
    let r: RatKnots5 = core::array::from_fn(|i| {
        Rat::from_float(knots.0[i]).expect("finite knot")
    });
    let kr = Rat::from_float(k).expect("finite insertion knot");
    let s = split_basis_rat(&r, &kr)?;
    let tof = |w: &RatKnots5| KnotVector5(core::array::from_fn(|i| crate::rat::to_f64(&w[i])));
    Ok(SplitResult {
        c1: crate::rat::to_f64(&s.c1),
        knots1: tof(&s.knots1),
        c2: crate::rat::to_f64(&s.c2),
        knots2: tof(&s.knots2),
    })
}

pub fn rat_window_to_f64(w: &RatKnots5) -> KnotVector5 {
    KnotVector5(core::array::from_fn(|i| crate::rat::to_f64(&w[i])))
}

/// A rational window is zero-width (the zero function) when its ends meet.
pub fn window_is_vacuous(w: &RatKnots5) -> bool {
    w[0] == w[4]
}
