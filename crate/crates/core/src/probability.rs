//! Failure probabilities of random linear network coding: per sink, for
//! the whole network (some sink fails), and averaged over sinks.
//!
//! Two independent routes are provided. [`enumerate_exact`] walks every
//! coefficient assignment (and every erasure pattern) and returns reduced
//! rationals; [`monte_carlo`] samples trials from seeded substreams and
//! returns estimates with standard errors.
//!
//! Both split their index space into fixed contiguous chunks and merge
//! integer tallies, so results are bit-identical for any worker count.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;
use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{CodingPlan, EngineError};
use crate::exact::{self, ExactRational, Polynomial};
use crate::field::FieldSpec;
use crate::network::NetworkSpec;
use crate::rng::StreamFactory;

/// Default cap on evaluations (assignments x erasure patterns).
pub const DEFAULT_BUDGET: u64 = 1 << 26;

const ENUMERATION_CHUNK: u64 = 1 << 12;
const TRIAL_CHUNK: u64 = 1 << 13;

#[derive(Debug, Error)]
pub enum ProbabilityError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("search space too large: {required} evaluations required, {allowed} allowed")]
    SearchSpaceTooLarge { required: u128, allowed: u64 },
    #[error("erasure probability must lie in [0, 1], got {0}")]
    InvalidErasureProbability(ExactRational),
    #[error("at least one trial is required")]
    NoTrials,
}

/// i.i.d. deletion of each real channel with probability `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasureModel {
    p: ExactRational,
}

impl ErasureModel {
    pub fn new(p: ExactRational) -> Result<Self, ProbabilityError> {
        if p < ExactRational::zero() || p > ExactRational::one() {
            return Err(ProbabilityError::InvalidErasureProbability(p));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> &ExactRational {
        &self.p
    }

    /// Probability of one specific pattern with `erased` of `total` channels deleted.
    pub fn pattern_weight(&self, erased: usize, total: usize) -> ExactRational {
        let q = ExactRational::one() - &self.p;
        exact::pow(&self.p, erased as u32) * exact::pow(&q, (total - erased) as u32)
    }
}

/// Monte Carlo estimate of a failure probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub trials: u64,
    pub std_error: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalMethod {
    Normal,
    Wilson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub low: f64,
    pub high: f64,
    pub method: IntervalMethod,
}

impl Estimate {
    pub fn from_mean(mean: f64, trials: u64, seed: u64) -> Self {
        let std_error = (mean * (1.0 - mean) / trials as f64).sqrt();
        Self { mean, trials, std_error, seed }
    }

    /// Normal interval `mean ± z·se`, or the Wilson score interval when
    /// fewer than 10 trials land on either side.
    pub fn confidence_interval(&self, z: f64) -> ConfidenceInterval {
        let n = self.trials as f64;
        if self.mean * n < 10.0 || (1.0 - self.mean) * n < 10.0 {
            let z2 = z * z;
            let denom = 1.0 + z2 / n;
            let center = (self.mean + z2 / (2.0 * n)) / denom;
            let half = z * (self.mean * (1.0 - self.mean) / n + z2 / (4.0 * n * n)).sqrt() / denom;
            return ConfidenceInterval {
                low: (center - half).max(0.0),
                high: (center + half).min(1.0),
                method: IntervalMethod::Wilson,
            };
        }
        ConfidenceInterval {
            low: (self.mean - z * self.std_error).max(0.0),
            high: (self.mean + z * self.std_error).min(1.0),
            method: IntervalMethod::Normal,
        }
    }

    /// `|mean - value|` in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (self.mean - value).abs();
        if self.std_error == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / self.std_error
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Probability {
    Exact(ExactRational),
    Estimate(Estimate),
}

impl Probability {
    pub fn as_exact(&self) -> Option<&ExactRational> {
        match self {
            Self::Exact(r) => Some(r),
            Self::Estimate(_) => None,
        }
    }

    pub fn as_estimate(&self) -> Option<&Estimate> {
        match self {
            Self::Estimate(e) => Some(e),
            Self::Exact(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Exact(r) => exact::to_f64(r),
            Self::Estimate(e) => e.mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailureProbabilities {
    pub per_sink: Vec<(String, Probability)>,
    pub network: Probability,
    pub average: Probability,
}

impl FailureProbabilities {
    pub fn sink(&self, name: &str) -> Option<&Probability> {
        self.per_sink.iter().find(|(s, _)| s == name).map(|(_, p)| p)
    }
}

/// Success counts bucketed by the number of erased channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    /// `per_sink[s][k]`: (assignment, pattern) pairs with `k` erasures that decode at sink `s`.
    pub per_sink: Vec<Vec<u64>>,
    /// `network[k]`: pairs with `k` erasures that decode at every sink.
    pub network: Vec<u64>,
}

impl Tally {
    fn zero(sinks: usize, buckets: usize) -> Self {
        Self { per_sink: vec![vec![0; buckets]; sinks], network: vec![0; buckets] }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.per_sink.iter_mut().zip(other.per_sink) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (x, y) in self.network.iter_mut().zip(other.network) {
            *x += y;
        }
        self
    }
}

/// Result of an exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct ExactEnumeration {
    pub failure: FailureProbabilities,
    /// `q^pairs` coefficient assignments.
    pub assignments: u64,
    /// Erasure patterns visited per assignment.
    pub patterns: u64,
    pub tally: Tally,
}

impl ExactEnumeration {
    /// Assignments decoding at every sink, when exactly one erasure pattern
    /// was visited (no erasure model, or `p` of 0 or 1).
    pub fn network_success_count(&self) -> Option<u64> {
        (self.patterns == 1).then(|| self.tally.network.iter().sum())
    }

    pub fn sink_success_count(&self, sink: usize) -> Option<u64> {
        (self.patterns == 1).then(|| self.tally.per_sink[sink].iter().sum())
    }
}

enum Patterns {
    NoneErased,
    AllErased,
    All,
}

impl Patterns {
    fn count(&self, n_real: usize) -> u128 {
        match self {
            Self::All if n_real >= 127 => u128::MAX,
            Self::All => 1u128 << n_real,
            _ => 1,
        }
    }
}

fn required_evaluations(q: u32, pairs: usize, patterns: u128) -> u128 {
    (0..pairs).fold(patterns, |acc, _| acc.saturating_mul(q as u128))
}

/// Number of assignments, provided assignments x patterns fits the budget.
fn budgeted_assignments(
    plan: &CodingPlan,
    field: &FieldSpec,
    patterns: u128,
    budget: u64,
) -> Result<u64, ProbabilityError> {
    let required = required_evaluations(field.order(), plan.pair_count(), patterns);
    if required > budget as u128 {
        return Err(ProbabilityError::SearchSpaceTooLarge { required, allowed: budget });
    }
    Ok((required / patterns) as u64)
}

fn run_tally(plan: &CodingPlan, field: &FieldSpec, patterns: &Patterns, assignments: u64) -> Tally {
    let n_real = plan.real_channel_count();
    let flags_for = |erased: &dyn Fn(usize) -> bool| {
        let mut flags = vec![false; plan.channel_count()];
        let mut k = 0;
        for (bit, &c) in plan.real_channels().iter().enumerate() {
            flags[c] = erased(bit);
            k += flags[c] as usize;
        }
        (k, flags)
    };
    let flag_sets: Vec<(usize, Vec<bool>)> = match patterns {
        Patterns::NoneErased => vec![flags_for(&|_| false)],
        Patterns::AllErased => vec![flags_for(&|_| true)],
        // within budget, so n_real < 64
        Patterns::All => (0..1u64 << n_real).map(|mask| flags_for(&|bit| mask >> bit & 1 == 1)).collect(),
    };
    let q = field.order();
    let pairs = plan.pair_count();
    let sinks = plan.sink_count();
    let w = plan.rate();
    let chunks = assignments.div_ceil(ENUMERATION_CHUNK);

    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut tally = Tally::zero(sinks, n_real + 1);
            let start = chunk * ENUMERATION_CHUNK;
            let end = (start + ENUMERATION_CHUNK).min(assignments);
            let mut coeffs = vec![0u32; pairs];
            let mut idx = start;
            for c in coeffs.iter_mut() {
                *c = (idx % q as u64) as u32;
                idx /= q as u64;
            }
            let mut kernels = vec![0u32; plan.channel_count() * w];
            let mut scratch = Vec::new();
            for _ in start..end {
                for (k, flags) in &flag_sets {
                    plan.propagate_into(field, &coeffs, flags, &mut kernels);
                    let mut all = true;
                    for s in 0..sinks {
                        if plan.sink_rank(field, &kernels, s, &mut scratch) == w {
                            tally.per_sink[s][*k] += 1;
                        } else {
                            all = false;
                        }
                    }
                    if all {
                        tally.network[*k] += 1;
                    }
                }
                // mixed-radix increment, pair 0 least significant
                for c in coeffs.iter_mut() {
                    *c += 1;
                    if *c < q {
                        break;
                    }
                    *c = 0;
                }
            }
            tally
        })
        .reduce(|| Tally::zero(sinks, n_real + 1), Tally::merge)
}

fn weighted_success(counts: &[u64], weights: &[ExactRational], assignments: u64) -> ExactRational {
    let sum = counts
        .iter()
        .zip(weights)
        .filter(|(c, _)| **c > 0)
        .fold(ExactRational::zero(), |acc, (&c, w)| acc + w * ExactRational::from_integer(BigInt::from(c)));
    sum / ExactRational::from_integer(BigInt::from(assignments))
}

fn exact_failures(spec: &NetworkSpec, tally: &Tally, weights: &[ExactRational], assignments: u64) -> FailureProbabilities {
    let one = ExactRational::one();
    let per_sink: Vec<(String, ExactRational)> = spec
        .sinks
        .iter()
        .zip(&tally.per_sink)
        .map(|(name, counts)| (name.clone(), &one - weighted_success(counts, weights, assignments)))
        .collect();
    let network = &one - weighted_success(&tally.network, weights, assignments);
    let average = per_sink.iter().fold(ExactRational::zero(), |acc, (_, p)| acc + p)
        / ExactRational::from_integer(BigInt::from(per_sink.len()));
    FailureProbabilities {
        per_sink: per_sink.into_iter().map(|(n, p)| (n, Probability::Exact(p))).collect(),
        network: Probability::Exact(network),
        average: Probability::Exact(average),
    }
}

/// Exact failure probabilities by exhaustive enumeration with the default budget.
pub fn enumerate_exact(
    spec: &NetworkSpec,
    field: &FieldSpec,
    erasure: Option<&ErasureModel>,
) -> Result<ExactEnumeration, ProbabilityError> {
    enumerate_exact_with_budget(spec, field, erasure, DEFAULT_BUDGET)
}

/// As [`enumerate_exact`], visiting at most `budget` (assignment, pattern)
/// pairs. With `p` equal to 0 or 1 only the single pattern of nonzero
/// weight is visited.
pub fn enumerate_exact_with_budget(
    spec: &NetworkSpec,
    field: &FieldSpec,
    erasure: Option<&ErasureModel>,
    budget: u64,
) -> Result<ExactEnumeration, ProbabilityError> {
    let plan = CodingPlan::new(spec)?;
    let n_real = plan.real_channel_count();
    let patterns = match erasure {
        None => Patterns::NoneErased,
        Some(m) if m.p.is_zero() => Patterns::NoneErased,
        Some(m) if m.p.is_one() => Patterns::AllErased,
        Some(_) => Patterns::All,
    };
    let pattern_count = patterns.count(n_real);
    let assignments = budgeted_assignments(&plan, field, pattern_count, budget)?;
    let tally = run_tally(&plan, field, &patterns, assignments);
    let model = erasure.cloned().unwrap_or_else(|| ErasureModel { p: ExactRational::zero() });
    let weights: Vec<ExactRational> = (0..=n_real).map(|k| model.pattern_weight(k, n_real)).collect();
    let failure = exact_failures(spec, &tally, &weights, assignments);
    Ok(ExactEnumeration { failure, assignments, patterns: pattern_count as u64, tally })
}

/// Failure probabilities as exact polynomials in the erasure probability `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasurePolynomials {
    pub per_sink: Vec<(String, Polynomial)>,
    pub network: Polynomial,
    pub average: Polynomial,
}

impl ErasurePolynomials {
    pub fn sink(&self, name: &str) -> Option<&Polynomial> {
        self.per_sink.iter().find(|(s, _)| s == name).map(|(_, p)| p)
    }
}

/// Enumerates every assignment under every erasure pattern and accumulates
/// `sum_k count_k / q^pairs * p^k (1-p)^(n-k)` for each failure type.
pub fn erasure_polynomial(spec: &NetworkSpec, field: &FieldSpec) -> Result<ErasurePolynomials, ProbabilityError> {
    erasure_polynomial_with_budget(spec, field, DEFAULT_BUDGET)
}

pub fn erasure_polynomial_with_budget(
    spec: &NetworkSpec,
    field: &FieldSpec,
    budget: u64,
) -> Result<ErasurePolynomials, ProbabilityError> {
    let plan = CodingPlan::new(spec)?;
    let n_real = plan.real_channel_count();
    let assignments = budgeted_assignments(&plan, field, Patterns::All.count(n_real), budget)?;
    let tally = run_tally(&plan, field, &Patterns::All, assignments);
    let total = ExactRational::from_integer(BigInt::from(assignments));
    let success = |counts: &[u64]| {
        counts.iter().enumerate().fold(Polynomial::zero(), |acc, (k, &c)| {
            let coefficient = ExactRational::from_integer(BigInt::from(c)) / &total;
            &acc + &Polynomial::binomial_term(coefficient, k, n_real - k)
        })
    };
    let per_sink: Vec<(String, Polynomial)> = spec
        .sinks
        .iter()
        .zip(&tally.per_sink)
        .map(|(name, counts)| (name.clone(), success(counts).complement()))
        .collect();
    let network = success(&tally.network).complement();
    let sum = per_sink.iter().fold(Polynomial::zero(), |acc, (_, p)| &acc + p);
    let average = sum.scale(&(ExactRational::one() / ExactRational::from_integer(BigInt::from(per_sink.len()))));
    Ok(ErasurePolynomials { per_sink, network, average })
}

/// Exact Bernoulli(p) sampler for rational p.
enum Bernoulli {
    Small { numer: u64, denom: u64 },
    Big { numer: BigUint, denom: BigUint },
}

impl Bernoulli {
    fn new(p: &ExactRational) -> Self {
        let numer = p.numer().to_biguint().expect("p >= 0");
        let denom = p.denom().to_biguint().expect("denominator > 0");
        match (numer.to_u64(), denom.to_u64()) {
            (Some(numer), Some(denom)) => Self::Small { numer, denom },
            _ => Self::Big { numer, denom },
        }
    }

    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> bool {
        match self {
            Self::Small { numer, denom } => {
                let reject = (u64::MAX % denom + 1) % denom;
                loop {
                    let x = rng.next_u64();
                    if x <= u64::MAX - reject {
                        return x % denom < *numer;
                    }
                }
            }
            Self::Big { numer, denom } => &exact::uniform_below(rng, denom) < numer,
        }
    }
}

/// Monte Carlo estimates from `trials` independent trials. Trial `t` draws
/// its code (in sampling order) and then, if an erasure model is given,
/// one Bernoulli(p) deletion per real channel in channel-id order, all
/// from substream `t` of `seed`.
pub fn monte_carlo(
    spec: &NetworkSpec,
    field: &FieldSpec,
    erasure: Option<&ErasureModel>,
    trials: u64,
    seed: u64,
) -> Result<FailureProbabilities, ProbabilityError> {
    if trials == 0 {
        return Err(ProbabilityError::NoTrials);
    }
    let plan = CodingPlan::new(spec)?;
    let bernoulli = erasure.map(|m| Bernoulli::new(&m.p));
    let factory = StreamFactory::new(seed);
    let sinks = plan.sink_count();
    let w = plan.rate();
    let chunks = trials.div_ceil(TRIAL_CHUNK);

    // failures per sink, then network failures
    let failures: Vec<u64> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut counts = vec![0u64; sinks + 1];
            let mut coeffs = vec![0u32; plan.pair_count()];
            let mut flags = vec![false; plan.channel_count()];
            let mut kernels = vec![0u32; plan.channel_count() * w];
            let mut scratch = Vec::new();
            let start = chunk * TRIAL_CHUNK;
            for t in start..(start + TRIAL_CHUNK).min(trials) {
                let mut rng = factory.stream(t);
                plan.sample_into(field, &mut rng, &mut coeffs);
                if let Some(b) = &bernoulli {
                    for &c in plan.real_channels() {
                        flags[c] = b.sample(&mut rng);
                    }
                }
                plan.propagate_into(field, &coeffs, &flags, &mut kernels);
                let mut any = false;
                for (s, count) in counts[..sinks].iter_mut().enumerate() {
                    if plan.sink_rank(field, &kernels, s, &mut scratch) < w {
                        *count += 1;
                        any = true;
                    }
                }
                if any {
                    counts[sinks] += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; sinks + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let n = trials as f64;
    let per_sink: Vec<(String, Probability)> = spec
        .sinks
        .iter()
        .zip(&failures)
        .map(|(name, &f)| (name.clone(), Probability::Estimate(Estimate::from_mean(f as f64 / n, trials, seed))))
        .collect();
    let average_mean = failures[..sinks].iter().map(|&f| f as f64 / n).sum::<f64>() / sinks as f64;
    Ok(FailureProbabilities {
        per_sink,
        network: Probability::Estimate(Estimate::from_mean(failures[sinks] as f64 / n, trials, seed)),
        average: Probability::Estimate(Estimate::from_mean(average_mean, trials, seed)),
    })
}
