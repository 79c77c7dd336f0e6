//! High-precision transcendental evaluation on top of exact rational inputs.
//!
//! All logs and powers in the analysis layers go through [`Ctx`], a thin
//! wrapper around `astro-float` pinned to a configurable significand size
//! (default 100 decimal digits). Exactness ends at the logs; everything
//! upstream of a `Ctx` call is rational or field arithmetic.

use std::cell::RefCell;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

pub const DEFAULT_DIGITS: u32 = 100;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

/// Evaluation context carrying the working precision in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ctx {
    bits: usize,
}

impl Default for Ctx {
    fn default() -> Self {
        Self::from_digits(DEFAULT_DIGITS)
    }
}

impl Ctx {
    /// Context with roughly `digits` decimal digits of significand.
    pub fn from_digits(digits: u32) -> Self {
        let digits = digits.clamp(15, 10_000);
        // 1 digit ~ 3.322 bits, plus guard bits for chained operations.
        Ctx { bits: digits as usize * 3322 / 1000 + 64 }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
        CONSTS.with(|cc| f(&mut cc.borrow_mut()))
    }

    pub fn zero(&self) -> BigFloat {
        BigFloat::from_i8(0, self.bits)
    }

    pub fn from_i64(&self, v: i64) -> BigFloat {
        BigFloat::from_i64(v, self.bits)
    }

    pub fn from_f64(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.bits)
    }

    pub fn from_bigint(&self, v: &BigInt) -> BigFloat {
        let p = self.bits.max(v.bits() as usize + 64);
        let mag = Self::with_consts(|cc| {
            BigFloat::parse(&v.magnitude().to_str_radix(16), Radix::Hex, p, RM, cc)
        });
        if v.is_negative() {
            mag.neg()
        } else {
            mag
        }
    }

    pub fn from_rational(&self, v: &BigRational) -> BigFloat {
        let num = self.from_bigint(v.numer());
        let den = self.from_bigint(v.denom());
        num.div(&den, self.bits, RM)
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, self.bits, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, self.bits, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, self.bits, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, self.bits, RM)
    }

    pub fn ln(&self, a: &BigFloat) -> BigFloat {
        Self::with_consts(|cc| a.ln(self.bits, RM, cc))
    }

    /// ln of an exact positive rational.
    pub fn ln_rational(&self, v: &BigRational) -> BigFloat {
        assert!(v.is_positive(), "ln of non-positive rational");
        self.ln(&self.from_rational(v))
    }

    pub fn exp(&self, a: &BigFloat) -> BigFloat {
        Self::with_consts(|cc| a.exp(self.bits, RM, cc))
    }

    /// `base^e` for positive `base`.
    pub fn pow(&self, base: &BigFloat, e: &BigFloat) -> BigFloat {
        Self::with_consts(|cc| base.pow(e, self.bits, RM, cc))
    }

    /// `v^e` for an exact positive rational base.
    pub fn pow_rational(&self, v: &BigRational, e: &BigFloat) -> BigFloat {
        self.pow(&self.from_rational(v), e)
    }

    pub fn mid(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        let two = BigFloat::from_i8(2, self.bits);
        self.add(a, b).div(&two, self.bits, RM)
    }

    pub fn abs(&self, a: &BigFloat) -> BigFloat {
        a.abs()
    }
}

/// Deterministic conversion to `f64` (truncating the mantissa past 128 bits).
pub fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    let Some((words, _len, sign, exp, _inexact)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    // Words are little-endian; the top word has its high bit set.
    let mut acc = 0.0f64;
    let mut shift = exp as i64 - 64;
    for w in words.iter().rev().take(2) {
        acc += (*w as f64) * pow2(shift);
        shift -= 64;
    }
    if sign == Sign::Neg {
        -acc
    } else {
        acc
    }
}

fn pow2(e: i64) -> f64 {
    // f64 exponent range is ample for every quantity we produce here.
    if (-1022..=1023).contains(&e) {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        2f64.powi(e.clamp(-2100, 2100) as i32)
    }
}

/// Convenience: ln of a rational, straight to f64.
pub fn ln_f64(ctx: &Ctx, v: &BigRational) -> f64 {
    to_f64(&ctx.ln_rational(v))
}
