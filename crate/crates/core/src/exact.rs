//! Exact rationals, polynomials over them, and decimal rendering.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision reduced rational.
pub type ExactRational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{0}` as a rational (expected a/b, an integer, or a decimal)")]
pub struct ParseRationalError(pub String);

pub fn rational(numer: i64, denom: i64) -> ExactRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(n: u64) -> ExactRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `a/b`, `n`, or a plain decimal such as `0.125` exactly.
pub fn parse_rational(text: &str) -> Result<ExactRational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let t = text.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    let all_digits = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if !all_digits(int_part) || !all_digits(frac_part) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| err())? };
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let value = BigRational::new(numer, denom);
    Ok(if neg { -value } else { value })
}

/// Nearest integer, ties to even.
pub fn round_half_even(x: &ExactRational) -> BigInt {
    let (floor, rem) = x.numer().div_mod_floor(x.denom());
    let twice = rem * 2u32;
    match twice.cmp(x.denom()) {
        std::cmp::Ordering::Less => floor,
        std::cmp::Ordering::Greater => floor + 1u32,
        std::cmp::Ordering::Equal => {
            if floor.is_even() {
                floor
            } else {
                floor + 1u32
            }
        }
    }
}

fn pow10(k: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), k as usize)
}

/// Renders `x` to `significant` significant digits with round-half-even,
/// trimming trailing zeros after the decimal point.
pub fn render_decimal(x: &ExactRational, significant: usize) -> String {
    let significant = significant.max(1);
    if x.is_zero() {
        return "0".to_string();
    }
    let sign = if x.is_negative() { "-" } else { "" };
    let a = x.abs();
    // exponent e with 10^e <= a < 10^(e+1)
    let mut e: i64 = a.numer().to_string().len() as i64 - a.denom().to_string().len() as i64;
    let ten_pow = |k: i64| -> ExactRational {
        if k >= 0 {
            BigRational::from_integer(pow10(k as u32))
        } else {
            BigRational::new(BigInt::one(), pow10((-k) as u32))
        }
    };
    while ten_pow(e) > a {
        e -= 1;
    }
    while ten_pow(e + 1) <= a {
        e += 1;
    }
    let shift = significant as i64 - 1 - e;
    let mut n = round_half_even(&(&a * ten_pow(shift)));
    if n == pow10(significant as u32) {
        n = pow10(significant as u32 - 1);
        e += 1;
    }
    let digits = n.to_string();
    let body = if e >= significant as i64 - 1 {
        format!("{digits}{}", "0".repeat((e - (significant as i64 - 1)) as usize))
    } else if e >= 0 {
        let split = (e + 1) as usize;
        trim_fraction(format!("{}.{}", &digits[..split], &digits[split..]))
    } else {
        trim_fraction(format!("0.{}{digits}", "0".repeat((-e - 1) as usize)))
    };
    format!("{sign}{body}")
}

fn trim_fraction(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// Exact value of a finite double.
pub fn from_f64(x: f64) -> ExactRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

pub fn to_f64(x: &ExactRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Uniform draw from `[0, bound)` by rejection on whole words.
pub(crate) fn uniform_below<R: rand::RngCore + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    if let Some(b) = bound.to_u64() {
        // 2^64 mod b values at the top of the word range are rejected
        let reject = (u64::MAX % b + 1) % b;
        loop {
            let x = rng.next_u64();
            if x <= u64::MAX - reject {
                return BigUint::from(x % b);
            }
        }
    }
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let top_mask = if bits.is_multiple_of(32) { u32::MAX } else { (1u32 << (bits % 32)) - 1 };
    loop {
        let mut digits: Vec<u32> = (0..words).map(|_| rng.next_u32()).collect();
        if let Some(last) = digits.last_mut() {
            *last &= top_mask;
        }
        let candidate = BigUint::new(digits);
        if &candidate < bound {
            return candidate;
        }
    }
}

/// Polynomial in one variable with exact rational coefficients, stored
/// low degree first with no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coefficients: Vec<ExactRational>,
}

impl Polynomial {
    pub fn new(mut coefficients: Vec<ExactRational>) -> Self {
        while coefficients.last().is_some_and(|c| c.is_zero()) {
            coefficients.pop();
        }
        Self { coefficients }
    }

    pub fn zero() -> Self {
        Self { coefficients: Vec::new() }
    }

    pub fn constant(c: ExactRational) -> Self {
        Self::new(vec![c])
    }

    /// `c * x^k * (1 - x)^n`
    pub fn binomial_term(c: ExactRational, k: usize, n: usize) -> Self {
        let mut coefficients = vec![ExactRational::zero(); k + n + 1];
        let mut binom = BigInt::one();
        for j in 0..=n {
            let sign = if j % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            coefficients[k + j] = &c * BigRational::from_integer(&binom * sign);
            binom = binom * BigInt::from(n - j) / BigInt::from(j + 1);
        }
        Self::new(coefficients)
    }

    /// `(1 - x)^n`
    pub fn one_minus_x_pow(n: usize) -> Self {
        Self::binomial_term(ExactRational::one(), 0, n)
    }

    pub fn coefficients(&self) -> &[ExactRational] {
        &self.coefficients
    }

    /// Degree, with the zero polynomial reported as `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn eval(&self, x: &ExactRational) -> ExactRational {
        self.coefficients
            .iter()
            .rev()
            .fold(ExactRational::zero(), |acc, c| acc * x + c)
    }

    pub fn scale(&self, c: &ExactRational) -> Self {
        Self::new(self.coefficients.iter().map(|a| a * c).collect())
    }

    /// `1 - self`
    pub fn complement(&self) -> Self {
        &Self::constant(ExactRational::one()) - self
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coefficients.len().max(rhs.coefficients.len());
        let zero = ExactRational::zero();
        Polynomial::new(
            (0..n)
                .map(|i| {
                    self.coefficients.get(i).unwrap_or(&zero) + rhs.coefficients.get(i).unwrap_or(&zero)
                })
                .collect(),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &rhs.scale(&-ExactRational::one())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.coefficients.is_empty() || rhs.coefficients.is_empty() {
            return Polynomial::zero();
        }
        let mut out = vec![ExactRational::zero(); self.coefficients.len() + rhs.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in rhs.coefficients.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficients.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (sep, mag) = match (first, c.is_negative()) {
                (true, true) => ("-", c.abs()),
                (true, false) => ("", c.clone()),
                (false, true) => (" - ", c.abs()),
                (false, false) => (" + ", c.clone()),
            };
            first = false;
            match k {
                0 => write!(f, "{sep}{mag}")?,
                1 => write!(f, "{sep}{mag}*p")?,
                _ => write!(f, "{sep}{mag}*p^{k}")?,
            }
        }
        Ok(())
    }
}

/// `x^n` for a rational base.
pub fn pow(x: &ExactRational, n: u32) -> ExactRational {
    num_traits::pow(x.clone(), n as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/10").unwrap(), rational(1, 10));
        assert_eq!(parse_rational("0.1").unwrap(), rational(1, 10));
        assert_eq!(parse_rational(".5").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("1").unwrap(), rational(1, 1));
        assert_eq!(parse_rational("6/4").unwrap(), rational(3, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), rational(-1, 4));
        for bad in ["", "1/0", "abc", "1.2.3", ".", "1e-3"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn renders_significant_digits_half_even() {
        assert_eq!(render_decimal(&rational(3, 2048), 6), "0.00146484");
        // 0.9765625 -> 976562|5 ties to even
        assert_eq!(render_decimal(&rational(125, 128), 6), "0.976562");
        assert_eq!(render_decimal(&rational(1, 8), 2), "0.12");
        assert_eq!(render_decimal(&rational(3, 8), 2), "0.38");
        assert_eq!(render_decimal(&rational(1, 1), 6), "1");
        assert_eq!(render_decimal(&rational(0, 1), 6), "0");
        assert_eq!(render_decimal(&rational(9_999_997, 10_000_000), 6), "1");
        assert_eq!(render_decimal(&rational(125, 64), 6), "1.95312");
        assert_eq!(render_decimal(&rational(123_456_789, 1), 3), "123000000");
        assert_eq!(render_decimal(&rational(-1, 3), 3), "-0.333");
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(round_half_even(&rational(5, 2)), BigInt::from(2));
        assert_eq!(round_half_even(&rational(7, 2)), BigInt::from(4));
        assert_eq!(round_half_even(&rational(-5, 2)), BigInt::from(-2));
        assert_eq!(round_half_even(&rational(26, 10)), BigInt::from(3));
    }

    #[test]
    fn binomial_expansion() {
        let p = Polynomial::one_minus_x_pow(3);
        let expected: Vec<_> = [1, -3, 3, -1].iter().map(|&c| rational(c, 1)).collect();
        assert_eq!(p.coefficients(), expected.as_slice());
        let x = rational(1, 10);
        assert_eq!(p.eval(&x), pow(&rational(9, 10), 3));
        let t = Polynomial::binomial_term(rational(2, 1), 2, 1);
        assert_eq!(t.coefficients(), &[rational(0, 1), rational(0, 1), rational(2, 1), rational(-2, 1)]);
        let prod = &Polynomial::one_minus_x_pow(2) * &Polynomial::one_minus_x_pow(1);
        assert_eq!(prod, Polynomial::one_minus_x_pow(3));
        assert_eq!(Polynomial::one_minus_x_pow(0).complement(), Polynomial::zero());
    }

    #[test]
    fn uniform_below_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let small = BigUint::from(10u32);
        let big: BigUint = "340282366920938463463374607431768211457".parse().unwrap();
        for _ in 0..1000 {
            assert!(uniform_below(&mut rng, &small) < small);
            assert!(uniform_below(&mut rng, &big) < big);
        }
    }
}
