//! Closed-form failure probabilities of random coding on the butterfly.
//!
//! With `q = |F|` and channel failure probability `p`:
//!
//! ```text
//! sink / average failure:  1 - (q+1)(q-1)^6  / q^7  * (1-p)^6
//! network failure:         1 - (q+1)(q-1)^10 / q^11 * (1-p)^9
//! ```
//!
//! The formulas are evaluated for any integer `q >= 2`; whether a field of
//! that order exists is a separate question ([`crate::field::is_prime_power`]).

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{self, integer, ExactRational};
use crate::field::is_prime_power;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosedFormError {
    #[error("matrix dimension must be at least 1, got {0}")]
    InvalidDimension(u32),
    #[error("field order must be at least 2, got {0}")]
    InvalidOrder(u64),
    #[error("probability must lie in [0, 1], got {0}")]
    InvalidProbability(ExactRational),
    #[error("target success probability must lie strictly between 0 and 1, got {0}")]
    InvalidTarget(ExactRational),
}

/// Which failure probability to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Sink,
    Network,
    Average,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Sink, Target::Network, Target::Average];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sink => "sink",
            Self::Network => "network",
            Self::Average => "average",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaInput {
    q: u64,
    p: ExactRational,
}

impl FormulaInput {
    pub fn new(q: u64, p: ExactRational) -> Result<Self, ClosedFormError> {
        if q < 2 {
            return Err(ClosedFormError::InvalidOrder(q));
        }
        check_probability(&p)?;
        Ok(Self { q, p })
    }

    /// Order `q` with no erasures.
    pub fn order(q: u64) -> Result<Self, ClosedFormError> {
        Self::new(q, ExactRational::zero())
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> &ExactRational {
        &self.p
    }
}

fn check_probability(p: &ExactRational) -> Result<(), ClosedFormError> {
    if *p < ExactRational::zero() || *p > ExactRational::one() {
        return Err(ClosedFormError::InvalidProbability(p.clone()));
    }
    Ok(())
}

/// Probability that a uniformly random `n x n` matrix over GF(q) is
/// invertible: `prod_{i=1..n} (1 - q^-i)`.
pub fn invertible_probability(n: u32, q: u64) -> Result<ExactRational, ClosedFormError> {
    if n == 0 {
        return Err(ClosedFormError::InvalidDimension(n));
    }
    if q < 2 {
        return Err(ClosedFormError::InvalidOrder(q));
    }
    let inv_q = ExactRational::one() / integer(q);
    Ok((1..=n).fold(ExactRational::one(), |acc, i| acc * (ExactRational::one() - exact::pow(&inv_q, i))))
}

/// Success probability without erasures for a sink (`(q+1)(q-1)^6/q^7`) or
/// the whole network (`(q+1)(q-1)^10/q^11`).
fn success_without_erasure(q: u64, target: Target) -> ExactRational {
    let e = match target {
        Target::Sink | Target::Average => 6,
        Target::Network => 10,
    };
    let qq = BigInt::from(q);
    let numer = (&qq + 1u32) * num_traits::pow(&qq - 1u32, e);
    let denom = num_traits::pow(qq, e + 1);
    ExactRational::new(numer, denom)
}

/// Exponent of `(1-p)`: the number of channels that must survive.
fn surviving_channels(target: Target) -> u32 {
    match target {
        Target::Sink | Target::Average => 6,
        Target::Network => 9,
    }
}

pub fn butterfly_success(input: &FormulaInput, target: Target) -> ExactRational {
    let survive = exact::pow(&(ExactRational::one() - &input.p), surviving_channels(target));
    success_without_erasure(input.q, target) * survive
}

pub fn butterfly_failure(input: &FormulaInput, target: Target) -> ExactRational {
    ExactRational::one() - butterfly_success(input, target)
}

/// Failure probability as `q` grows without bound.
pub fn limit_failure(p: &ExactRational, target: Target) -> Result<ExactRational, ClosedFormError> {
    check_probability(p)?;
    Ok(ExactRational::one() - exact::pow(&(ExactRational::one() - p), surviving_channels(target)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RateRow {
    pub q: u64,
    /// `q * failure(q, p = 0)`
    pub scaled_failure: ExactRational,
}

/// `q * P(q)` at `p = 0` for each `q`; tends to 5 for sinks and the
/// average, 9 for the network.
pub fn convergence_rate_check(target: Target, q_list: &[u64]) -> Result<Vec<RateRow>, ClosedFormError> {
    q_list
        .iter()
        .map(|&q| {
            let input = FormulaInput::order(q)?;
            Ok(RateRow { q, scaled_failure: integer(q) * butterfly_failure(&input, target) })
        })
        .collect()
}

/// The limit `q * P(q)` approaches.
pub fn asymptotic_rate(target: Target) -> u32 {
    match target {
        Target::Sink | Target::Average => 5,
        Target::Network => 9,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Threshold {
    pub minimal_integer_q: u64,
    pub minimal_prime_power_q: u64,
}

/// Least `q >= 2` whose network success probability reaches
/// `target_success`, and the least field order at or above it.
///
/// Network success is increasing in `q`, so a doubling bracket followed by
/// bisection finds the crossing exactly.
pub fn threshold_search(target_success: &ExactRational) -> Result<Threshold, ClosedFormError> {
    if *target_success <= ExactRational::zero() || *target_success >= ExactRational::one() {
        return Err(ClosedFormError::InvalidTarget(target_success.clone()));
    }
    let passes = |q: u64| success_without_erasure(q, Target::Network) >= *target_success;
    let mut lo = 1u64; // fails (or is below the domain)
    let mut hi = 2u64;
    while !passes(hi) {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let minimal_prime_power_q = (hi..).find(|&q| is_prime_power(q)).expect("prime powers are unbounded");
    Ok(Threshold { minimal_integer_q: hi, minimal_prime_power_q })
}

/// Network success probability without erasures, `(q+1)(q-1)^10/q^11`.
pub fn network_success(q: u64) -> ExactRational {
    success_without_erasure(q, Target::Network)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rational, render_decimal};

    fn input(q: u64, p: ExactRational) -> FormulaInput {
        FormulaInput::new(q, p).unwrap()
    }

    #[test]
    fn invertible_probability_examples() {
        assert_eq!(invertible_probability(2, 2).unwrap(), rational(3, 8));
        for q in 2..20u64 {
            assert_eq!(invertible_probability(1, q).unwrap(), rational(q as i64 - 1, q as i64));
            let expected = integer(q + 1) * exact::pow(&integer(q - 1), 2) / exact::pow(&integer(q), 3);
            assert_eq!(invertible_probability(2, q).unwrap(), expected);
        }
        assert_eq!(invertible_probability(3, 2).unwrap(), rational(168, 512));
        assert_eq!(invertible_probability(0, 2).unwrap_err(), ClosedFormError::InvalidDimension(0));
    }

    #[test]
    fn invertible_3x3_over_gf2_by_count() {
        // 3x3 binary matrices as 9-bit masks; determinant by cofactor expansion mod 2
        let count = (0u32..512)
            .filter(|m| {
                let a = |r: u32, c: u32| (m >> (3 * r + c)) & 1;
                let det = a(0, 0) * (a(1, 1) * a(2, 2) + a(1, 2) * a(2, 1))
                    + a(0, 1) * (a(1, 0) * a(2, 2) + a(1, 2) * a(2, 0))
                    + a(0, 2) * (a(1, 0) * a(2, 1) + a(1, 1) * a(2, 0));
                det % 2 == 1
            })
            .count();
        assert_eq!(count, 168);
    }

    #[test]
    fn network_success_values() {
        let zero = ExactRational::zero();
        assert_eq!(butterfly_success(&input(2, zero.clone()), Target::Network), rational(3, 2048));
        assert_eq!(butterfly_failure(&input(2, zero.clone()), Target::Network), rational(2045, 2048));
        assert_eq!(butterfly_success(&input(3, zero.clone()), Target::Network), rational(4096, 177147));
        assert_eq!(butterfly_success(&input(4, zero.clone()), Target::Network), rational(295245, 4194304));
        assert_eq!(render_decimal(&network_success(3), 2), "0.023");
        assert_eq!(render_decimal(&network_success(89), 6), "0.90319");
        for t in Target::ALL {
            assert_eq!(butterfly_failure(&input(2, rational(1, 1)), t), rational(1, 1));
        }
    }

    #[test]
    fn sink_and_average_agree() {
        for q in 2..30 {
            let i = input(q, rational(1, 7));
            assert_eq!(butterfly_failure(&i, Target::Sink), butterfly_failure(&i, Target::Average));
        }
    }

    #[test]
    fn limits() {
        assert_eq!(limit_failure(&rational(0, 1), Target::Network).unwrap(), rational(0, 1));
        assert_eq!(limit_failure(&rational(1, 1), Target::Sink).unwrap(), rational(1, 1));
        assert_eq!(
            limit_failure(&rational(1, 10), Target::Network).unwrap(),
            rational(612_579_511, 1_000_000_000)
        );
        assert!(limit_failure(&rational(2, 1), Target::Sink).is_err());
    }

    #[test]
    fn rates() {
        let rows = convergence_rate_check(Target::Sink, &[2, 1_000_000]).unwrap();
        assert_eq!(rows[0].scaled_failure, rational(125, 64));
        let big = exact::to_f64(&rows[1].scaled_failure);
        assert!((big - 5.0).abs() < 1e-4, "{big}");
        let net = convergence_rate_check(Target::Network, &[1_000_000]).unwrap();
        assert!((exact::to_f64(&net[0].scaled_failure) - 9.0).abs() < 1e-4);
        assert!(convergence_rate_check(Target::Network, &[1]).is_err());
    }

    #[test]
    fn threshold_for_ninety_percent() {
        let t = threshold_search(&rational(9, 10)).unwrap();
        assert_eq!(t.minimal_integer_q, 87);
        assert_eq!(t.minimal_prime_power_q, 89);
        assert!(network_success(86) < rational(9, 10));
        assert!(network_success(87) >= rational(9, 10));
    }

    #[test]
    fn threshold_brackets_by_linear_scan() {
        for target in [rational(1, 1000), rational(1, 2), rational(99, 100), rational(999, 1000)] {
            let t = threshold_search(&target).unwrap();
            let linear = (2u64..).find(|&q| network_success(q) >= target).unwrap();
            assert_eq!(t.minimal_integer_q, linear);
        }
        assert!(threshold_search(&rational(1, 1)).is_err());
        assert!(threshold_search(&rational(0, 1)).is_err());
    }
}
