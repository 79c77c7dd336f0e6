//! Exact arithmetic in Q(rho) for a designated real root rho of an integer
//! polynomial, with decidable comparison.
//!
//! Every geometric quantity in the net-interval machinery (endpoints,
//! normalized lengths, neighbour offsets) lives in one of these fields, so
//! endpoint coincidence is decided exactly, never by floating point. The
//! degree-1 case is plain rational arithmetic and short-circuits everywhere.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::precision::{self, Ctx};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("minimal polynomial must be monic with degree >= 1")]
    NonMonic,
    #[error("interval does not isolate exactly one real root (count = {0})")]
    NotIsolating(usize),
    #[error("division by zero field element")]
    DivByZero,
    #[error("operands belong to different number fields")]
    FieldMismatch,
    #[error("invalid rational literal: {0}")]
    BadRational(String),
}

/// Parse a rational from `"p/q"` or plain integer text.
pub fn parse_rational(s: &str) -> Result<BigRational, FieldError> {
    let s = s.trim();
    let bad = || FieldError::BadRational(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(BigRational::from_integer(n))
    }
}

/// Render a rational as `"p/q"` (or `"p"` for integers).
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod rational_serde {
    use super::{format_rational, parse_rational};
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for q in v {
                seq.serialize_element(&format_rational(q))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Vec<BigRational>, D::Error> {
            let raw = Vec::<String>::deserialize(d)?;
            raw.iter()
                .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

/// A real algebraic number field Q(rho), rho pinned down by an isolating
/// interval of its minimal polynomial.
#[derive(Debug)]
pub struct NumberField {
    /// Monic integer polynomial, coefficients `[c0, ..., cg]` with `cg = 1`.
    minpoly: Vec<BigInt>,
    degree: usize,
    iso_lo: BigRational,
    iso_hi: BigRational,
    /// Set when the degree is 1: the root itself.
    rational_root: Option<BigRational>,
    /// Construction-time warning (suspected reducibility).
    warning: Option<String>,
    /// Monotone refinement memo for the isolating interval. Refining is
    /// idempotent, so the field stays logically immutable and shareable.
    refined: Mutex<(BigRational, BigRational)>,
}

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        self.minpoly == other.minpoly && self.iso_lo == other.iso_lo && self.iso_hi == other.iso_hi
    }
}
impl Eq for NumberField {}

impl NumberField {
    /// Validate and build a field context (`field_make`).
    pub fn new(
        minpoly: Vec<BigInt>,
        lo: BigRational,
        hi: BigRational,
    ) -> Result<Arc<Self>, FieldError> {
        if minpoly.len() < 2 || !minpoly.last().unwrap().is_one() {
            return Err(FieldError::NonMonic);
        }
        let degree = minpoly.len() - 1;
        if lo >= hi {
            return Err(FieldError::NotIsolating(0));
        }
        let ratpoly: Vec<BigRational> =
            minpoly.iter().map(|c| BigRational::from_integer(c.clone())).collect();
        if !eval_poly(&ratpoly, &lo).is_zero() && !eval_poly(&ratpoly, &hi).is_zero() {
            let count = sturm_root_count(&ratpoly, &lo, &hi);
            if count != 1 {
                return Err(FieldError::NotIsolating(count));
            }
        } else {
            // Endpoint roots make the open-interval count ambiguous.
            return Err(FieldError::NotIsolating(0));
        }

        let rational_root =
            (degree == 1).then(|| -BigRational::from_integer(minpoly[0].clone()));

        // Irreducibility is taken on trust; an integer root of a monic integer
        // polynomial of degree >= 2 proves reducibility, so flag that case.
        let mut warning = None;
        if degree >= 2 {
            if let Some(r) = integer_root(&minpoly) {
                warning = Some(format!(
                    "minimal polynomial has rational root {r}; it is reducible and \
                     comparisons of equal values may not terminate"
                ));
            }
        }

        Ok(Arc::new(NumberField {
            minpoly,
            degree,
            refined: Mutex::new((lo.clone(), hi.clone())),
            iso_lo: lo,
            iso_hi: hi,
            rational_root,
            warning,
        }))
    }

    /// The rationals, presented as the degree-1 field of `x - 1`.
    pub fn rationals() -> Arc<Self> {
        Self::new(
            vec![BigInt::from(-1), BigInt::one()],
            BigRational::new(BigInt::one(), BigInt::from(2)),
            BigRational::new(BigInt::from(3), BigInt::from(2)),
        )
        .expect("rational field")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn minpoly(&self) -> &[BigInt] {
        &self.minpoly
    }

    pub fn isolating_interval(&self) -> (&BigRational, &BigRational) {
        (&self.iso_lo, &self.iso_hi)
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    pub fn is_rational(&self) -> bool {
        self.degree == 1
    }

    /// Build an element from raw coefficients (reduced modulo the minimal
    /// polynomial if over-long).
    pub fn scalar(self: &Arc<Self>, coeffs: Vec<BigRational>) -> FieldScalar {
        let mut c = coeffs;
        self.reduce(&mut c);
        FieldScalar { coeffs: c, field: Arc::clone(self) }
    }

    pub fn from_rational(self: &Arc<Self>, q: BigRational) -> FieldScalar {
        let mut coeffs = vec![BigRational::zero(); self.degree];
        coeffs[0] = q;
        FieldScalar { coeffs, field: Arc::clone(self) }
    }

    pub fn from_integer(self: &Arc<Self>, n: i64) -> FieldScalar {
        self.from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero(self: &Arc<Self>) -> FieldScalar {
        self.from_integer(0)
    }

    pub fn one(self: &Arc<Self>) -> FieldScalar {
        self.from_integer(1)
    }

    /// The generator rho itself.
    pub fn generator(self: &Arc<Self>) -> FieldScalar {
        let mut coeffs = vec![BigRational::zero(); self.degree.max(1)];
        if self.degree == 1 {
            coeffs[0] = self.rational_root.clone().unwrap();
        } else {
            coeffs[1] = BigRational::one();
        }
        FieldScalar { coeffs, field: Arc::clone(self) }
    }

    fn reduce(&self, coeffs: &mut Vec<BigRational>) {
        while coeffs.len() > self.degree {
            let top = coeffs.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            // x^g = -(c0 + c1 x + ... + c_{g-1} x^{g-1}) for monic minpoly.
            let at = coeffs.len() - self.degree;
            for i in 0..self.degree {
                let sub = &top * BigRational::from_integer(self.minpoly[i].clone());
                coeffs[at + i] -= sub;
            }
        }
        coeffs.resize(self.degree, BigRational::zero());
    }

    fn refined_interval(&self) -> (BigRational, BigRational) {
        self.refined.lock().unwrap().clone()
    }

    fn store_refinement(&self, lo: &BigRational, hi: &BigRational) {
        let mut memo = self.refined.lock().unwrap();
        if (hi - lo) < (&memo.1 - &memo.0) {
            *memo = (lo.clone(), hi.clone());
        }
    }

    /// Sign of the polynomial `g` evaluated at the root, `g` already reduced.
    fn sign_at_root(&self, g: &[BigRational]) -> Ordering {
        if g.iter().all(Zero::is_zero) {
            return Ordering::Equal;
        }
        if let Some(root) = &self.rational_root {
            return eval_poly(g, root).cmp(&BigRational::zero());
        }
        let ratpoly: Vec<BigRational> =
            self.minpoly.iter().map(|c| BigRational::from_integer(c.clone())).collect();
        let (mut lo, mut hi) = self.refined_interval();
        let mut sign_lo = eval_poly(&ratpoly, &lo).cmp(&BigRational::zero());
        // g(rho) != 0 whenever the minimal polynomial is irreducible, so this
        // terminates; a cap guards against reducible inputs accepted on trust.
        for _ in 0..100_000 {
            let (glo, ghi) = interval_eval(g, &lo, &hi);
            if glo.is_positive() {
                self.store_refinement(&lo, &hi);
                return Ordering::Greater;
            }
            if ghi.is_negative() {
                self.store_refinement(&lo, &hi);
                return Ordering::Less;
            }
            let mid = (&lo + &hi) / BigRational::from_integer(BigInt::from(2));
            let pm = eval_poly(&ratpoly, &mid);
            if pm.is_zero() {
                return eval_poly(g, &mid).cmp(&BigRational::zero());
            }
            let sign_mid = pm.cmp(&BigRational::zero());
            if sign_mid != sign_lo {
                hi = mid;
            } else {
                lo = mid;
                sign_lo = sign_mid;
            }
        }
        panic!("field comparison did not terminate; is the minimal polynomial irreducible?");
    }

    /// Evaluate `g` at the root to the context precision.
    fn eval_at_root(&self, g: &[BigRational], ctx: &Ctx) -> astro_float::BigFloat {
        if let Some(root) = &self.rational_root {
            return ctx.from_rational(&eval_poly(g, root));
        }
        let ratpoly: Vec<BigRational> =
            self.minpoly.iter().map(|c| BigRational::from_integer(c.clone())).collect();
        let (mut lo, mut hi) = self.refined_interval();
        let mut sign_lo = eval_poly(&ratpoly, &lo).cmp(&BigRational::zero());
        let two = BigRational::from_integer(BigInt::from(2));
        // Interval width shrinks by half per step; stop once the image of g
        // is tight relative to the requested precision.
        let mut result = None;
        for _ in 0..(ctx.bits() + 128) {
            let (glo, ghi) = interval_eval(g, &lo, &hi);
            let width = &ghi - &glo;
            let scale = glo.abs().max(ghi.abs());
            if scale.is_zero() {
                result = Some(BigRational::zero());
                break;
            }
            // width / scale <= 2^-(bits + 8)
            if &width * BigRational::from_integer(BigInt::one() << (ctx.bits() + 8)) <= scale {
                result = Some((&glo + &ghi) / &two);
                break;
            }
            let mid = (&lo + &hi) / &two;
            let pm = eval_poly(&ratpoly, &mid);
            if pm.is_zero() {
                result = Some(eval_poly(g, &mid));
                break;
            }
            let sign_mid = pm.cmp(&BigRational::zero());
            if sign_mid != sign_lo {
                hi = mid;
            } else {
                lo = mid;
                sign_lo = sign_mid;
            }
        }
        self.store_refinement(&lo, &hi);
        ctx.from_rational(&result.expect("root refinement converged"))
    }
}

/// An element of Q(rho): `value = sum coeffs[i] * rho^i`, always reduced.
#[derive(Clone)]
pub struct FieldScalar {
    coeffs: Vec<BigRational>,
    field: Arc<NumberField>,
}

impl FieldScalar {
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The value as an exact rational, when it is one.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check_field(&self, other: &Self) -> Result<(), FieldError> {
        if Arc::ptr_eq(&self.field, &other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_field(other)?;
        let coeffs =
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(FieldScalar { coeffs, field: Arc::clone(&self.field) })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_field(other)?;
        let coeffs =
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(FieldScalar { coeffs, field: Arc::clone(&self.field) })
    }

    pub fn neg(&self) -> Self {
        FieldScalar {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
            field: Arc::clone(&self.field),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_field(other)?;
        let g = self.field.degree;
        let mut prod = vec![BigRational::zero(); 2 * g];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        Ok(self.field.scalar(prod))
    }

    /// Division via the extended-gcd inverse modulo the minimal polynomial.
    pub fn div(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_field(other)?;
        if other.is_zero() {
            return Err(FieldError::DivByZero);
        }
        if self.field.degree == 1 {
            return Ok(FieldScalar {
                coeffs: vec![&self.coeffs[0] / &other.coeffs[0]],
                field: Arc::clone(&self.field),
            });
        }
        let modulus: Vec<BigRational> = self
            .field
            .minpoly
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let inv = poly_mod_inverse(&other.coeffs, &modulus).ok_or(FieldError::DivByZero)?;
        let inv = self.field.scalar(inv);
        self.mul(&inv)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        FieldScalar {
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
            field: Arc::clone(&self.field),
        }
    }

    /// Decidable three-way comparison (`field_compare`).
    pub fn compare(&self, other: &Self) -> Ordering {
        debug_assert!(self.check_field(other).is_ok());
        if self.coeffs == other.coeffs {
            return Ordering::Equal;
        }
        let diff: Vec<BigRational> =
            self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        self.field.sign_at_root(&diff)
    }

    pub fn sign(&self) -> Ordering {
        self.field.sign_at_root(&self.coeffs)
    }

    /// High-precision numeric value.
    pub fn to_big(&self, ctx: &Ctx) -> astro_float::BigFloat {
        self.field.eval_at_root(&self.coeffs, ctx)
    }

    pub fn to_f64(&self) -> f64 {
        precision::to_f64(&self.to_big(&Ctx::from_digits(25)))
    }

    /// Natural log of a (strictly positive) element.
    pub fn ln_big(&self, ctx: &Ctx) -> astro_float::BigFloat {
        ctx.ln(&self.to_big(ctx))
    }
}

impl PartialEq for FieldScalar {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}
impl Eq for FieldScalar {}

impl Hash for FieldScalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.coeffs.hash(state);
    }
}

impl PartialOrd for FieldScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Numeric order (exact).
impl Ord for FieldScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

impl fmt::Debug for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for FieldScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_rational() {
            return write!(f, "{}", format_rational(q));
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", format_rational(c))?,
                1 => write!(f, "{}*x", format_rational(c))?,
                _ => write!(f, "{}*x^{}", format_rational(c), i)?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Serialize for FieldScalar {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("FieldScalar", 1)?;
        let coeffs: Vec<String> = self.coeffs.iter().map(format_rational).collect();
        s.serialize_field("coeffs", &coeffs)?;
        s.end()
    }
}

/// Lexicographic key on coefficient vectors, used for canonical node ids.
pub fn coeff_lex_cmp(a: &FieldScalar, b: &FieldScalar) -> Ordering {
    a.coeffs.cmp(&b.coeffs)
}

// ---- polynomial helpers over BigRational ----

fn eval_poly(p: &[BigRational], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Interval image of `p` over `[lo, hi]` by interval Horner.
fn interval_eval(p: &[BigRational], lo: &BigRational, hi: &BigRational) -> (BigRational, BigRational) {
    let mut alo = BigRational::zero();
    let mut ahi = BigRational::zero();
    for c in p.iter().rev() {
        let c1 = &alo * lo;
        let c2 = &alo * hi;
        let c3 = &ahi * lo;
        let c4 = &ahi * hi;
        let mut nlo = c1.clone();
        let mut nhi = c1;
        for v in [c2, c3, c4] {
            if v < nlo {
                nlo = v.clone();
            }
            if v > nhi {
                nhi = v;
            }
        }
        alo = nlo + c;
        ahi = nhi + c;
    }
    (alo, ahi)
}

fn poly_trim(p: &mut Vec<BigRational>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn poly_deg(p: &[BigRational]) -> usize {
    p.len() - 1
}

fn poly_is_zero(p: &[BigRational]) -> bool {
    p.iter().all(Zero::is_zero)
}

/// Remainder of `a` divided by `b` (b nonzero).
fn poly_rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = poly_deg(b);
    let lead = b[db].clone();
    while !poly_is_zero(&r) && poly_deg(&r) >= db {
        let dr = poly_deg(&r);
        let f = &r[dr] / &lead;
        for i in 0..=db {
            let sub = &f * &b[i];
            r[dr - db + i] -= sub;
        }
        poly_trim(&mut r);
        if dr == 0 {
            break;
        }
    }
    r
}

fn poly_derivative(p: &[BigRational]) -> Vec<BigRational> {
    if p.len() <= 1 {
        return vec![BigRational::zero()];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect()
}

/// Number of distinct real roots of `p` in the open interval `(lo, hi)`,
/// assuming neither endpoint is a root.
pub(crate) fn sturm_root_count(p: &[BigRational], lo: &BigRational, hi: &BigRational) -> usize {
    let mut chain: Vec<Vec<BigRational>> = Vec::new();
    let mut p0 = p.to_vec();
    poly_trim(&mut p0);
    let mut p1 = poly_derivative(&p0);
    poly_trim(&mut p1);
    chain.push(p0.clone());
    if !poly_is_zero(&p1) {
        chain.push(p1.clone());
        loop {
            let mut r = poly_rem(&p0, &p1);
            if poly_is_zero(&r) {
                break;
            }
            for c in r.iter_mut() {
                *c = -c.clone();
            }
            chain.push(r.clone());
            p0 = p1;
            p1 = r;
        }
    }
    let variations = |x: &BigRational| {
        let mut count = 0usize;
        let mut last: Option<Ordering> = None;
        for q in &chain {
            let s = eval_poly(q, x).cmp(&BigRational::zero());
            if s == Ordering::Equal {
                continue;
            }
            if let Some(prev) = last {
                if prev != s {
                    count += 1;
                }
            }
            last = Some(s);
        }
        count
    };
    let va = variations(lo);
    let vb = variations(hi);
    va.saturating_sub(vb)
}

/// An integer root of a monic integer polynomial, if any (reducibility witness).
fn integer_root(p: &[BigInt]) -> Option<BigInt> {
    let c0 = &p[0];
    if c0.is_zero() {
        return Some(BigInt::zero());
    }
    let eval = |x: &BigInt| -> BigInt {
        let mut acc = BigInt::zero();
        for c in p.iter().rev() {
            acc = acc * x + c;
        }
        acc
    };
    let limit = c0.abs();
    let mut d = BigInt::one();
    while &d * &d <= limit {
        if (&limit % &d).is_zero() {
            let q = &limit / &d;
            for cand in [d.clone(), -d.clone(), q.clone(), -q] {
                if eval(&cand).is_zero() {
                    return Some(cand);
                }
            }
        }
        d += 1;
    }
    None
}

/// Inverse of `a` modulo `m` in Q[x], by the extended Euclidean algorithm.
fn poly_mod_inverse(a: &[BigRational], m: &[BigRational]) -> Option<Vec<BigRational>> {
    // Invariants: r0 = s0 * a (mod m), r1 = s1 * a (mod m).
    let mut r0 = m.to_vec();
    let mut r1 = a.to_vec();
    poly_trim(&mut r0);
    poly_trim(&mut r1);
    let mut s0 = vec![BigRational::zero()];
    let mut s1 = vec![BigRational::one()];
    while !poly_is_zero(&r1) && poly_deg(&r1) > 0 {
        let (q, r) = poly_divmod(&r0, &r1);
        let s = poly_sub(&s0, &poly_mul(&q, &s1));
        r0 = r1;
        r1 = r;
        poly_trim(&mut r1);
        s0 = s1;
        s1 = s;
    }
    if poly_is_zero(&r1) {
        return None; // common factor with the modulus: zero divisor
    }
    let inv_lead = BigRational::one() / r1[0].clone();
    Some(s1.iter().map(|c| c * &inv_lead).collect())
}

fn poly_divmod(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let db = poly_deg(b);
    let lead = b[db].clone();
    if poly_is_zero(&r) || poly_deg(&r) < db {
        return (vec![BigRational::zero()], r);
    }
    let mut q = vec![BigRational::zero(); poly_deg(&r) - db + 1];
    while !poly_is_zero(&r) && poly_deg(&r) >= db {
        let dr = poly_deg(&r);
        let f = &r[dr] / &lead;
        q[dr - db] = f.clone();
        for i in 0..=db {
            let sub = &f * &b[i];
            r[dr - db + i] -= sub;
        }
        poly_trim(&mut r);
        if dr == 0 {
            break;
        }
    }
    (q, r)
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    out
}
