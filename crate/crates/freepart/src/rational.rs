//! Exact scalar field used everywhere: arbitrary-precision rationals.
//!
//! Rationals cross external interfaces as `"p/q"` strings (`"p"` is accepted
//! on input and means `p/1`). Decimal rendering is normalized scientific
//! notation with a fixed number of significant digits.

use num_bigint::{BigInt, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The exact scalar type for all moment and cumulant values.
pub type Rat = num_rational::BigRational;

/// `n/d` as a `Rat`. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer `n` as a `Rat`.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parse `"p/q"` or `"p"` (optionally signed) into a `Rat`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let make_err = || Error::Config(format!("invalid rational {s:?}, expected \"p/q\" or \"p\""));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| make_err())?;
    let den: BigInt = den.parse().map_err(|_| make_err())?;
    if den.is_zero() {
        return Err(Error::Config(format!("zero denominator in rational {s:?}")));
    }
    Ok(Rat::new(num, den))
}

/// Canonical `"p/q"` form, denominator always written (e.g. `"2/1"`).
pub fn rat_str(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Normalized scientific decimal with `sig` significant digits, e.g.
/// `"1.9000000000000000000e0"`. Zero renders as `"0"`.
pub fn rat_dec(x: &Rat, sig: usize) -> String {
    assert!(sig >= 1);
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let abs = x.abs();
    // Decimal exponent: largest e with 10^e <= abs.
    let ten = BigInt::from(10);
    let mut exp: i64 = 0;
    let mut scaled = abs.clone();
    let one = Rat::from_integer(BigInt::from(1));
    while scaled >= Rat::from_integer(ten.clone()) {
        scaled /= Rat::from_integer(ten.clone());
        exp += 1;
    }
    while scaled < one {
        scaled *= Rat::from_integer(ten.clone());
        exp -= 1;
    }
    // scaled in [1, 10); round to sig digits.
    let pow = ten.pow((sig - 1) as u32);
    let mut digits = round_half_even(&(scaled * Rat::from_integer(pow)));
    // Rounding may carry over to sig+1 digits (e.g. 9.99 -> 10.0).
    if digits >= ten.pow(sig as u32) {
        digits /= &ten;
        exp += 1;
    }
    let ds = digits.to_string();
    let (head, tail) = ds.split_at(1);
    let sign = if neg { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{exp}")
    } else {
        format!("{sign}{head}.{tail}e{exp}")
    }
}

/// Round to nearest integer, ties to even.
pub fn round_half_even(x: &Rat) -> BigInt {
    let floor = x.floor().to_integer();
    let frac = x - Rat::from_integer(floor.clone());
    let half = rat(1, 2);
    if frac < half {
        floor
    } else if frac > half {
        floor + 1
    } else if (&floor % 2) == BigInt::zero() {
        floor
    } else {
        floor + 1
    }
}

/// Best-effort f64 conversion (used only in floating oracles and rendering).
pub fn rat_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Out-of-range intermediate; fall back on sign-preserving infinity.
        match x.numer().sign() {
            Sign::Minus => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        }
    })
}
