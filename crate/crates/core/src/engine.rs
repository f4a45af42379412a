//! Random linear network codes: coefficient sampling, propagation of
//! (active) global encoding kernels, and rank-based decodability.
//!
//! A network is compiled once into a [`CodingPlan`] that works on raw
//! field indices; the public functions wrap it with checked types. The
//! enumeration and Monte Carlo drivers call the plan directly.

use std::collections::BTreeSet;

use rand::RngCore;
use thiserror::Error;

use crate::field::{FieldElement, FieldError, FieldSpec};
use crate::network::{build_butterfly, ChannelKind, NetworkError, NetworkSpec};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid network: {0}")]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("coefficient assignment does not match the network's adjacent channel pairs")]
    CoefficientSetMismatch,
    #[error("erasure pattern names `{0}`, which is not a real channel")]
    InvalidErasure(String),
    #[error("kernel table does not match the network")]
    KernelTableMismatch,
    #[error("coefficient assignment is not for the butterfly network")]
    NotButterfly,
}

/// An ordered pair of channels `(input, output)` with `head(input) = tail(output)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AdjacentPair {
    pub input: String,
    pub output: String,
}

/// One realization of every local encoding coefficient, stored in sampling
/// order (output channel in topological order, then input channel id).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientAssignment {
    field: FieldSpec,
    pairs: Vec<AdjacentPair>,
    values: Vec<FieldElement>,
}

impl CoefficientAssignment {
    /// Assignment with `values` given in sampling order.
    pub fn new(spec: &NetworkSpec, field: &FieldSpec, values: Vec<FieldElement>) -> Result<Self, EngineError> {
        let plan = CodingPlan::new(spec)?;
        if values.len() != plan.pairs.len() {
            return Err(EngineError::CoefficientSetMismatch);
        }
        for &v in &values {
            field.check(v)?;
        }
        Ok(Self { field: field.clone(), pairs: plan.pair_names(spec), values })
    }

    /// Assignment with every coefficient chosen by `f(input, output)`.
    pub fn from_fn(
        spec: &NetworkSpec,
        field: &FieldSpec,
        mut f: impl FnMut(&str, &str) -> FieldElement,
    ) -> Result<Self, EngineError> {
        let plan = CodingPlan::new(spec)?;
        let pairs = plan.pair_names(spec);
        let values = pairs.iter().map(|p| f(&p.input, &p.output)).collect();
        Self::new(spec, field, values)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn pairs(&self) -> &[AdjacentPair] {
        &self.pairs
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, input: &str, output: &str) -> Option<FieldElement> {
        self.position(input, output).map(|i| self.values[i])
    }

    pub fn set(&mut self, input: &str, output: &str, value: FieldElement) -> Result<(), EngineError> {
        self.field.check(value)?;
        let i = self.position(input, output).ok_or(EngineError::CoefficientSetMismatch)?;
        self.values[i] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AdjacentPair, FieldElement)> {
        self.pairs.iter().zip(self.values.iter().copied())
    }

    fn position(&self, input: &str, output: &str) -> Option<usize> {
        self.pairs.iter().position(|p| p.input == input && p.output == output)
    }

    fn raw(&self) -> Vec<u32> {
        self.values.iter().map(|v| v.value()).collect()
    }
}

/// Set of deleted real channels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ErasurePattern {
    erased: BTreeSet<String>,
}

impl ErasurePattern {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_ids<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> Self {
        Self { erased: ids.into_iter().map(Into::into).collect() }
    }

    /// Every real channel of `spec`.
    pub fn all(spec: &NetworkSpec) -> Self {
        Self::from_ids(spec.real_channels().map(|c| c.id.clone()))
    }

    pub fn insert(&mut self, id: &str) -> bool {
        self.erased.insert(id.to_string())
    }

    pub fn remove(&mut self, id: &str) -> bool {
        self.erased.remove(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.erased.contains(id)
    }

    pub fn len(&self) -> usize {
        self.erased.len()
    }

    pub fn is_empty(&self) -> bool {
        self.erased.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.erased.iter().map(String::as_str)
    }

    fn flags(&self, spec: &NetworkSpec) -> Result<Vec<bool>, EngineError> {
        let mut flags = vec![false; spec.channels.len()];
        for id in &self.erased {
            match spec.channel_index(id) {
                Some(i) if spec.channels[i].kind == ChannelKind::Real => flags[i] = true,
                _ => return Err(EngineError::InvalidErasure(id.clone())),
            }
        }
        Ok(flags)
    }
}

/// Active global encoding kernel of every channel, each a vector in F^w.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelTable {
    rate: usize,
    channels: Vec<String>,
    kernels: Vec<Vec<FieldElement>>,
}

impl KernelTable {
    pub fn rate(&self) -> usize {
        self.rate
    }

    pub fn get(&self, channel: &str) -> Option<&[FieldElement]> {
        self.channels.iter().position(|c| c == channel).map(|i| self.kernels[i].as_slice())
    }

    /// Kernel values as plain indices, convenient in tests.
    pub fn values(&self, channel: &str) -> Option<Vec<u32>> {
        self.get(channel).map(|k| k.iter().map(|e| e.value()).collect())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[FieldElement])> {
        self.channels.iter().map(String::as_str).zip(self.kernels.iter().map(Vec::as_slice))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinkDecoding {
    pub sink: String,
    /// `rate` rows; column `j` is the kernel of the sink's `j`-th incoming channel.
    pub matrix: Vec<Vec<FieldElement>>,
    pub rank: usize,
    pub success: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodingReport {
    pub sinks: Vec<SinkDecoding>,
}

impl DecodingReport {
    pub fn sink(&self, name: &str) -> Option<&SinkDecoding> {
        self.sinks.iter().find(|s| s.sink == name)
    }

    pub fn all_success(&self) -> bool {
        self.sinks.iter().all(|s| s.success)
    }
}

/// A network compiled for repeated evaluation on raw field indices.
#[derive(Debug, Clone)]
pub struct CodingPlan {
    rate: usize,
    channel_count: usize,
    imaginary: Vec<usize>,
    real_order: Vec<usize>,
    /// Real channels in channel-id order.
    real_ids: Vec<usize>,
    /// `(input channel, output channel)` in sampling order.
    pairs: Vec<(usize, usize)>,
    /// Per channel: `(pair index, input channel)` feeding it.
    inputs: Vec<Vec<(usize, usize)>>,
    sinks: Vec<Vec<usize>>,
}

impl CodingPlan {
    pub fn new(spec: &NetworkSpec) -> Result<Self, EngineError> {
        let report = spec.validate();
        if !report.is_valid() {
            return Err(NetworkError::Invalid(report).into());
        }
        let order = spec.topological_indices()?;
        let n = spec.channels.len();
        let imaginary = spec
            .imaginary_channels
            .iter()
            .map(|id| spec.channel_index(id).expect("validated"))
            .collect();
        let real_order: Vec<usize> =
            order.iter().copied().filter(|&c| spec.channels[c].kind == ChannelKind::Real).collect();
        let real_ids = (0..n).filter(|&c| spec.channels[c].kind == ChannelKind::Real).collect();

        let mut pairs = Vec::new();
        let mut inputs = vec![Vec::new(); n];
        for &out in &real_order {
            for inp in spec.incoming(&spec.channels[out].tail) {
                inputs[out].push((pairs.len(), inp));
                pairs.push((inp, out));
            }
        }
        let sinks = spec
            .sinks
            .iter()
            .map(|s| {
                spec.incoming(s)
                    .into_iter()
                    .filter(|&c| spec.channels[c].kind == ChannelKind::Real)
                    .collect()
            })
            .collect();
        Ok(Self { rate: spec.rate, channel_count: n, imaginary, real_order, real_ids, pairs, inputs, sinks })
    }

    pub fn rate(&self) -> usize {
        self.rate
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn real_channel_count(&self) -> usize {
        self.real_ids.len()
    }

    pub fn sink_count(&self) -> usize {
        self.sinks.len()
    }

    pub fn channel_count(&self) -> usize {
        self.channel_count
    }

    /// Real channel indices in channel-id order; bit `j` of an erasure mask
    /// refers to the `j`-th of these.
    pub fn real_channels(&self) -> &[usize] {
        &self.real_ids
    }

    fn pair_names(&self, spec: &NetworkSpec) -> Vec<AdjacentPair> {
        self.pairs
            .iter()
            .map(|&(i, o)| AdjacentPair {
                input: spec.channels[i].id.clone(),
                output: spec.channels[o].id.clone(),
            })
            .collect()
    }

    /// Draws one coefficient per pair, in sampling order.
    pub fn sample_into<R: RngCore + ?Sized>(&self, field: &FieldSpec, rng: &mut R, coeffs: &mut [u32]) {
        for c in coeffs.iter_mut().take(self.pairs.len()) {
            *c = field.sample_raw(rng);
        }
    }

    /// Fills `out` (channel-major, `rate` entries per channel) with active
    /// global kernels. `erased` is indexed by channel.
    pub fn propagate_into(&self, field: &FieldSpec, coeffs: &[u32], erased: &[bool], out: &mut [u32]) {
        let w = self.rate;
        out.fill(0);
        for (k, &d) in self.imaginary.iter().enumerate() {
            out[d * w + k] = 1;
        }
        for &c in &self.real_order {
            if erased[c] {
                // the combination is dropped entirely, so skip computing it
                continue;
            }
            for &(pair, inp) in &self.inputs[c] {
                let k = coeffs[pair];
                if k == 0 {
                    continue;
                }
                for r in 0..w {
                    let x = out[inp * w + r];
                    if x != 0 {
                        let acc = out[c * w + r];
                        out[c * w + r] = field.add_raw(acc, field.mul_raw(k, x));
                    }
                }
            }
        }
    }

    /// Rank of sink `s`'s decoding matrix built from `kernels`.
    pub fn sink_rank(&self, field: &FieldSpec, kernels: &[u32], s: usize, scratch: &mut Vec<u32>) -> usize {
        let w = self.rate;
        let cols = self.sinks[s].len();
        scratch.clear();
        scratch.resize(w * cols, 0);
        for (j, &c) in self.sinks[s].iter().enumerate() {
            for r in 0..w {
                scratch[r * cols + j] = kernels[c * w + r];
            }
        }
        rank_raw(field, scratch, w, cols)
    }
}

/// Rank of a row-major `rows x cols` matrix by fraction-free elimination.
/// The matrix is overwritten.
pub(crate) fn rank_raw(field: &FieldSpec, m: &mut [u32], rows: usize, cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(pivot) = (rank..rows).find(|&r| m[r * cols + col] != 0) else {
            continue;
        };
        if pivot != rank {
            for j in 0..cols {
                m.swap(pivot * cols + j, rank * cols + j);
            }
        }
        let p = m[rank * cols + col];
        for r in rank + 1..rows {
            let a = m[r * cols + col];
            if a == 0 {
                continue;
            }
            // row_r <- p * row_r - a * row_pivot
            for j in col..cols {
                let lhs = field.mul_raw(p, m[r * cols + j]);
                let rhs = field.mul_raw(a, m[rank * cols + j]);
                m[r * cols + j] = field.sub_raw(lhs, rhs);
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of a matrix given as rows.
pub fn rank(field: &FieldSpec, matrix: &[Vec<FieldElement>]) -> Result<usize, EngineError> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    let mut flat = Vec::with_capacity(rows * cols);
    for row in matrix {
        if row.len() != cols {
            return Err(EngineError::KernelTableMismatch);
        }
        for &e in row {
            field.check(e)?;
            flat.push(e.value());
        }
    }
    Ok(rank_raw(field, &mut flat, rows, cols))
}

/// Draws every local encoding coefficient independently and uniformly
/// from the whole field (zero included).
pub fn sample_code<R: RngCore + ?Sized>(
    spec: &NetworkSpec,
    field: &FieldSpec,
    rng: &mut R,
) -> Result<CoefficientAssignment, EngineError> {
    let plan = CodingPlan::new(spec)?;
    let values = (0..plan.pair_count()).map(|_| field.sample_uniform(rng)).collect();
    Ok(CoefficientAssignment { field: field.clone(), pairs: plan.pair_names(spec), values })
}

pub fn propagate(
    spec: &NetworkSpec,
    code: &CoefficientAssignment,
    erasure: &ErasurePattern,
) -> Result<KernelTable, EngineError> {
    let plan = CodingPlan::new(spec)?;
    if code.pairs != plan.pair_names(spec) {
        return Err(EngineError::CoefficientSetMismatch);
    }
    let flags = erasure.flags(spec)?;
    let field = &code.field;
    let w = plan.rate;
    let mut out = vec![0u32; plan.channel_count * w];
    plan.propagate_into(field, &code.raw(), &flags, &mut out);
    Ok(KernelTable {
        rate: w,
        channels: spec.channels.iter().map(|c| c.id.clone()).collect(),
        kernels: out.chunks(w).map(|k| k.iter().map(|&v| field.wrap(v)).collect()).collect(),
    })
}

pub fn decoding_report(spec: &NetworkSpec, kernels: &KernelTable) -> Result<DecodingReport, EngineError> {
    let w = spec.rate;
    if kernels.rate != w || kernels.kernels.iter().any(|k| k.len() != w) {
        return Err(EngineError::KernelTableMismatch);
    }
    let field = match kernels.kernels.first().and_then(|k| k.first()) {
        Some(e) => FieldSpec::of_order(e.order() as u64)?,
        None => return Err(EngineError::KernelTableMismatch),
    };
    let mut sinks = Vec::new();
    for sink in &spec.sinks {
        let mut columns = Vec::new();
        for c in spec.incoming(sink) {
            let ch = &spec.channels[c];
            if ch.kind != ChannelKind::Real {
                continue;
            }
            columns.push(kernels.get(&ch.id).ok_or(EngineError::KernelTableMismatch)?);
        }
        let matrix: Vec<Vec<FieldElement>> =
            (0..w).map(|r| columns.iter().map(|col| col[r]).collect()).collect();
        let rank = if columns.is_empty() { 0 } else { rank(&field, &matrix)? };
        sinks.push(SinkDecoding { sink: sink.clone(), matrix, rank, success: rank == w });
    }
    Ok(DecodingReport { sinks })
}

/// Checks `F_t1 = K_s B1` and `F_t2 = K_s B2` for a butterfly code, where
/// `K_s` holds the source coefficients and
/// `B1 = [[k13, k14 k47 k78], [0, k25 k57 k78]]`,
/// `B2 = [[0, k14 k47 k79], [k26, k25 k57 k79]]`.
pub fn structural_factorization_check(code: &CoefficientAssignment) -> Result<bool, EngineError> {
    let butterfly = build_butterfly();
    let plan = CodingPlan::new(&butterfly)?;
    if code.pairs != plan.pair_names(&butterfly) {
        return Err(EngineError::NotButterfly);
    }
    let f = &code.field;
    let k = |a: &str, b: &str| code.get(a, b).expect("butterfly pair").value();
    let mul = |xs: &[u32]| xs.iter().fold(1u32, |acc, &x| f.mul_raw(acc, x));

    let ks = [[k("d1", "e1"), k("d1", "e2")], [k("d2", "e1"), k("d2", "e2")]];
    let b1 = [
        [k("e1", "e3"), mul(&[k("e1", "e4"), k("e4", "e7"), k("e7", "e8")])],
        [0, mul(&[k("e2", "e5"), k("e5", "e7"), k("e7", "e8")])],
    ];
    let b2 = [
        [0, mul(&[k("e1", "e4"), k("e4", "e7"), k("e7", "e9")])],
        [k("e2", "e6"), mul(&[k("e2", "e5"), k("e5", "e7"), k("e7", "e9")])],
    ];
    let product = |b: &[[u32; 2]; 2]| -> [[u32; 2]; 2] {
        let mut out = [[0u32; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = f.add_raw(f.mul_raw(ks[r][0], b[0][c]), f.mul_raw(ks[r][1], b[1][c]));
            }
        }
        out
    };

    let kernels = propagate(&butterfly, code, &ErasurePattern::none())?;
    let report = decoding_report(&butterfly, &kernels)?;
    let matches = |sink: &str, expected: [[u32; 2]; 2]| {
        let m = &report.sink(sink).expect("butterfly sink").matrix;
        (0..2).all(|r| (0..2).all(|c| m[r][c].value() == expected[r][c]))
    };
    Ok(matches("t1", product(&b1)) && matches("t2", product(&b2)))
}
