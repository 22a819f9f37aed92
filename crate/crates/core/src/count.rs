//! Integer types usable as counters.
//!
//! Intermediate inclusion–exclusion sums can be negative, so counters are
//! signed. Arithmetic is checked: machine integers report overflow instead of
//! wrapping, while `BigInt` never overflows.

use std::fmt::{Debug, Display};

use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, Signed, Zero};
use thiserror::Error;

pub trait Count:
    Clone
    + Debug
    + Display
    + PartialEq
    + Eq
    + Signed
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + Send
    + Sync
    + 'static
{
}

impl<T> Count for T where
    T: Clone
        + Debug
        + Display
        + PartialEq
        + Eq
        + Signed
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + Send
        + Sync
        + 'static
{
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("count does not fit the counter type")]
pub struct Overflow;

pub(crate) fn add<C: Count>(a: &C, b: &C) -> Result<C, Overflow> {
    a.checked_add(b).ok_or(Overflow)
}

pub(crate) fn sub<C: Count>(a: &C, b: &C) -> Result<C, Overflow> {
    a.checked_sub(b).ok_or(Overflow)
}

pub(crate) fn mul<C: Count>(a: &C, b: &C) -> Result<C, Overflow> {
    a.checked_mul(b).ok_or(Overflow)
}

/// `2^exp`.
pub fn pow2<C: Count>(exp: usize) -> Result<C, Overflow> {
    let two = C::one() + C::one();
    let mut acc = C::one();
    for _ in 0..exp {
        acc = mul(&acc, &two)?;
    }
    Ok(acc)
}

/// `(-1)^(n-1)`, the inclusion–exclusion sign of an `n`-element term.
pub(crate) fn alternating<C: Count>(n: u32) -> C {
    if n % 2 == 1 {
        C::one()
    } else {
        -C::one()
    }
}

pub(crate) fn is_zero<C: Count>(c: &C) -> bool {
    Zero::is_zero(c)
}

pub(crate) fn one<C: Count>() -> C {
    One::one()
}
