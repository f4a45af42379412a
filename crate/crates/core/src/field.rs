//! Arithmetic in GF(p^m).
//!
//! Elements are stored by their canonical index: for a prime field the
//! residue itself, for an extension field the coefficient vector
//! `c_0 + c_1 x + ... + c_{m-1} x^{m-1}` packed as `sum c_i p^i`. Every
//! index in `[0, q)` is a fully reduced element.
//!
//! Fields of order at most 256 carry full addition, multiplication,
//! negation and inverse tables; larger fields compute on the fly.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use thiserror::Error;

/// Largest field order accepted unless a caller asks for more.
pub const DEFAULT_MAX_ORDER: u64 = 1 << 20;

/// Orders up to this bound get precomputed tables.
const TABLE_LIMIT: u32 = 256;

/// Highest extension degree representable (2^20 is the default cap).
const MAX_DEGREE: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u64),
    #[error("extension degree {0} is out of range")]
    DegreeOutOfRange(u32),
    #[error("field order {order} exceeds the maximum {max}")]
    OrderTooLarge { order: u128, max: u64 },
    #[error("{0} is not a prime power")]
    NotAPrimePower(u64),
    #[error("elements belong to different fields: GF({left}) vs GF({right})")]
    FieldMismatch { left: u32, right: u32 },
    #[error("zero has no multiplicative inverse")]
    InverseOfZero,
    #[error("value {value} is not an element of GF({order})")]
    ElementOutOfRange { value: u64, order: u32 },
    #[error("cannot parse field `{0}`: expected gf(q)")]
    Parse(String),
}

/// An element of some GF(q). The field is identified by its order, which
/// determines the canonical field uniquely.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u32,
    order: u32,
}

impl FieldElement {
    /// Canonical index of the element.
    pub fn value(self) -> u32 {
        self.value
    }

    /// Order of the field the element belongs to.
    pub fn order(self) -> u32 {
        self.order
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

struct Tables {
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
}

struct Inner {
    p: u32,
    m: u32,
    q: u32,
    /// Monic modulus, low-degree coefficient first, length `m + 1`.
    modulus: Option<Vec<u32>>,
    tables: Option<Tables>,
}

/// A finite field GF(p^m) with its canonical modulus. Cheap to clone.
#[derive(Clone)]
pub struct FieldSpec {
    inner: Arc<Inner>,
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.inner.q == other.inner.q
    }
}

impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.inner.q)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gf({})", self.inner.q)
    }
}

impl FieldSpec {
    /// Builds GF(p^m) with the default order cap.
    pub fn new(p: u64, m: u32) -> Result<Self, FieldError> {
        Self::with_max_order(p, m, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(p: u64, m: u32, max_order: u64) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NonPrimeCharacteristic(p));
        }
        if m == 0 || m as usize > MAX_DEGREE {
            return Err(FieldError::DegreeOutOfRange(m));
        }
        let order = (p as u128).checked_pow(m).unwrap_or(u128::MAX);
        if order > max_order as u128 || order > u32::MAX as u128 {
            return Err(FieldError::OrderTooLarge { order, max: max_order });
        }
        let p = p as u32;
        let q = order as u32;
        let modulus = (m > 1).then(|| smallest_irreducible(p, m as usize));
        let mut inner = Inner { p, m, q, modulus, tables: None };
        if q <= TABLE_LIMIT {
            inner.tables = Some(build_tables(&inner));
        }
        Ok(Self { inner: Arc::new(inner) })
    }

    /// Builds the field of order `q`, which must be a prime power.
    pub fn of_order(q: u64) -> Result<Self, FieldError> {
        let (p, m) = prime_power_decomposition(q).ok_or(FieldError::NotAPrimePower(q))?;
        Self::new(p, m)
    }

    /// Parses `gf(q)` and builds the field.
    pub fn parse(text: &str) -> Result<Self, FieldError> {
        Self::of_order(parse_field_order(text)?)
    }

    pub fn characteristic(&self) -> u32 {
        self.inner.p
    }

    pub fn degree(&self) -> u32 {
        self.inner.m
    }

    pub fn order(&self) -> u32 {
        self.inner.q
    }

    /// Monic modulus polynomial, low-degree coefficient first; `None` for
    /// prime fields.
    pub fn modulus_polynomial(&self) -> Option<&[u32]> {
        self.inner.modulus.as_deref()
    }

    pub fn zero(&self) -> FieldElement {
        self.wrap(0)
    }

    pub fn one(&self) -> FieldElement {
        self.wrap(1)
    }

    pub fn element(&self, value: u64) -> Result<FieldElement, FieldError> {
        if value >= self.inner.q as u64 {
            return Err(FieldError::ElementOutOfRange { value, order: self.inner.q });
        }
        Ok(self.wrap(value as u32))
    }

    /// Element with the given polynomial coefficients (low degree first).
    /// Coefficients are reduced mod p; missing high coefficients are zero.
    pub fn from_coefficients(&self, coefficients: &[u32]) -> Result<FieldElement, FieldError> {
        if coefficients.len() > self.inner.m as usize {
            return Err(FieldError::DegreeOutOfRange(coefficients.len() as u32));
        }
        let p = self.inner.p;
        let value = coefficients.iter().rev().fold(0u32, |acc, &c| acc * p + c % p);
        Ok(self.wrap(value))
    }

    /// Coefficient vector of length m, low degree first.
    pub fn coefficients(&self, a: FieldElement) -> Result<Vec<u32>, FieldError> {
        self.check(a)?;
        let digits = self.digits(a.value);
        Ok(digits[..self.inner.m as usize].to_vec())
    }

    /// All q elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.inner.q).map(|v| self.wrap(v))
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check2(a, b)?;
        Ok(self.wrap(self.add_raw(a.value, b.value)))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check2(a, b)?;
        Ok(self.wrap(self.sub_raw(a.value, b.value)))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> Result<FieldElement, FieldError> {
        self.check2(a, b)?;
        Ok(self.wrap(self.mul_raw(a.value, b.value)))
    }

    pub fn neg(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        Ok(self.wrap(self.neg_raw(a.value)))
    }

    pub fn inv(&self, a: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(a)?;
        if a.value == 0 {
            return Err(FieldError::InverseOfZero);
        }
        Ok(self.wrap(self.inv_raw(a.value)))
    }

    /// Uniform element by rejection sampling on 32-bit words.
    pub fn sample_uniform<R: RngCore + ?Sized>(&self, rng: &mut R) -> FieldElement {
        self.wrap(self.sample_raw(rng))
    }

    pub(crate) fn wrap(&self, value: u32) -> FieldElement {
        debug_assert!(value < self.inner.q);
        FieldElement { value, order: self.inner.q }
    }

    pub(crate) fn check(&self, a: FieldElement) -> Result<(), FieldError> {
        if a.order != self.inner.q {
            return Err(FieldError::FieldMismatch { left: self.inner.q, right: a.order });
        }
        Ok(())
    }

    fn check2(&self, a: FieldElement, b: FieldElement) -> Result<(), FieldError> {
        if a.order != b.order {
            return Err(FieldError::FieldMismatch { left: a.order, right: b.order });
        }
        self.check(a)
    }

    pub(crate) fn sample_raw<R: RngCore + ?Sized>(&self, rng: &mut R) -> u32 {
        let q = self.inner.q as u64;
        let zone = (1u64 << 32) / q * q;
        loop {
            let x = rng.next_u32() as u64;
            if x < zone {
                return (x % q) as u32;
            }
        }
    }

    #[inline]
    pub(crate) fn add_raw(&self, a: u32, b: u32) -> u32 {
        if let Some(t) = &self.inner.tables {
            return t.add[(a * self.inner.q + b) as usize] as u32;
        }
        self.add_slow(a, b)
    }

    #[inline]
    pub(crate) fn sub_raw(&self, a: u32, b: u32) -> u32 {
        self.add_raw(a, self.neg_raw(b))
    }

    #[inline]
    pub(crate) fn neg_raw(&self, a: u32) -> u32 {
        if let Some(t) = &self.inner.tables {
            return t.neg[a as usize] as u32;
        }
        self.neg_slow(a)
    }

    #[inline]
    pub(crate) fn mul_raw(&self, a: u32, b: u32) -> u32 {
        if let Some(t) = &self.inner.tables {
            return t.mul[(a * self.inner.q + b) as usize] as u32;
        }
        self.mul_slow(a, b)
    }

    /// Inverse of a nonzero index; returns 0 for 0.
    pub(crate) fn inv_raw(&self, a: u32) -> u32 {
        if let Some(t) = &self.inner.tables {
            return t.inv[a as usize] as u32;
        }
        self.inv_slow(a)
    }

    fn digits(&self, mut v: u32) -> [u32; MAX_DEGREE] {
        let p = self.inner.p;
        let mut d = [0u32; MAX_DEGREE];
        for slot in d.iter_mut().take(self.inner.m as usize) {
            *slot = v % p;
            v /= p;
        }
        d
    }

    fn undigits(&self, d: &[u32]) -> u32 {
        let p = self.inner.p;
        d[..self.inner.m as usize].iter().rev().fold(0, |acc, &c| acc * p + c)
    }

    fn add_slow(&self, a: u32, b: u32) -> u32 {
        let p = self.inner.p;
        if self.inner.m == 1 {
            return ((a as u64 + b as u64) % p as u64) as u32;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let mut out = [0u32; MAX_DEGREE];
        for i in 0..self.inner.m as usize {
            out[i] = (da[i] + db[i]) % p;
        }
        self.undigits(&out)
    }

    fn neg_slow(&self, a: u32) -> u32 {
        let p = self.inner.p;
        if self.inner.m == 1 {
            return (p - a) % p;
        }
        let mut d = self.digits(a);
        for c in d.iter_mut().take(self.inner.m as usize) {
            *c = (p - *c) % p;
        }
        self.undigits(&d)
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        let p = self.inner.p as u64;
        let m = self.inner.m as usize;
        if m == 1 {
            return ((a as u64 * b as u64) % p) as u32;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..m {
            if da[i] == 0 {
                continue;
            }
            for j in 0..m {
                prod[i + j] = (prod[i + j] + da[i] as u64 * db[j] as u64) % p;
            }
        }
        let modulus = self.inner.modulus.as_ref().expect("extension field has a modulus");
        for deg in (m..2 * m - 1).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            // subtract c * x^(deg - m) * modulus; the leading term cancels
            for (k, &mk) in modulus.iter().enumerate().take(m) {
                let idx = deg - m + k;
                prod[idx] = (prod[idx] + (p - c) * mk as u64) % p;
            }
            prod[deg] = 0;
        }
        let mut out = [0u32; MAX_DEGREE];
        for i in 0..m {
            out[i] = prod[i] as u32;
        }
        self.undigits(&out)
    }

    fn inv_slow(&self, a: u32) -> u32 {
        if a == 0 {
            return 0;
        }
        // a^(q-2)
        let mut exp = self.inner.q - 2;
        let mut base = a;
        let mut acc = 1u32;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_slow(acc, base);
            }
            base = self.mul_slow(base, base);
            exp >>= 1;
        }
        acc
    }
}

fn build_tables(inner: &Inner) -> Tables {
    let q = inner.q as usize;
    // Borrow the slow routines through a temporary table-free spec.
    let spec = FieldSpec {
        inner: Arc::new(Inner {
            p: inner.p,
            m: inner.m,
            q: inner.q,
            modulus: inner.modulus.clone(),
            tables: None,
        }),
    };
    let mut add = vec![0u8; q * q];
    let mut mul = vec![0u8; q * q];
    for a in 0..q {
        for b in 0..q {
            add[a * q + b] = spec.add_slow(a as u32, b as u32) as u8;
            mul[a * q + b] = spec.mul_slow(a as u32, b as u32) as u8;
        }
    }
    let neg = (0..q).map(|a| spec.neg_slow(a as u32) as u8).collect();
    let inv = (0..q).map(|a| spec.inv_slow(a as u32) as u8).collect();
    Tables { add, mul, neg, inv }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Returns `(p, m)` with `q = p^m`, or `None` if `q` is not a prime power.
pub fn prime_power_decomposition(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..)
        .take_while(|d: &u64| d.saturating_mul(*d) <= q)
        .find(|d| q.is_multiple_of(*d))
        .unwrap_or(q);
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

pub fn is_prime_power(q: u64) -> bool {
    prime_power_decomposition(q).is_some()
}

/// Parses `gf(q)` (case-insensitive, surrounding whitespace allowed) into q.
/// The order is not required to be a prime power here.
pub fn parse_field_order(text: &str) -> Result<u64, FieldError> {
    let t = text.trim().to_ascii_lowercase();
    let inner = t
        .strip_prefix("gf(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| FieldError::Parse(text.to_string()))?;
    let q: u64 = inner.trim().parse().map_err(|_| FieldError::Parse(text.to_string()))?;
    if q < 2 {
        return Err(FieldError::Parse(text.to_string()));
    }
    Ok(q)
}

/// Remainder of `a` modulo the monic polynomial `b` over GF(p).
fn poly_rem(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    let db = b.len() - 1;
    let p = p as u64;
    while r.len() > db {
        let lead = r.pop().unwrap();
        if lead == 0 {
            continue;
        }
        let shift = r.len() - db;
        for k in 0..db {
            r[shift + k] = (r[shift + k] + (p - lead) * b[k] as u64) % p;
        }
    }
    r.into_iter().map(|c| c as u32).collect()
}

fn monic_with_low_index(p: u32, degree: usize, mut index: u64) -> Vec<u32> {
    let mut poly = Vec::with_capacity(degree + 1);
    for _ in 0..degree {
        poly.push((index % p as u64) as u32);
        index /= p as u64;
    }
    poly.push(1);
    poly
}

/// Trial division by every monic polynomial of degree 1..=m/2.
pub(crate) fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let m = poly.len() - 1;
    for d in 1..=m / 2 {
        let count = (p as u64).pow(d as u32);
        for idx in 0..count {
            let divisor = monic_with_low_index(p, d, idx);
            if poly_rem(poly, &divisor, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Smallest monic irreducible of degree m, ordering candidates by the
/// integer `sum c_i p^i` of their non-leading coefficients.
fn smallest_irreducible(p: u32, m: usize) -> Vec<u32> {
    let count = (p as u64).pow(m as u32);
    (0..count)
        .map(|idx| monic_with_low_index(p, m, idx))
        .find(|poly| is_irreducible(poly, p))
        .expect("an irreducible polynomial exists for every degree")
}
