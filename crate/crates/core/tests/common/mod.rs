#![allow(dead_code)]

use rlnc_lab::engine::CodingPlan;
use rlnc_lab::{build_butterfly, CoefficientAssignment, FieldSpec, NetworkSpec};

pub fn gf(q: u64) -> FieldSpec {
    FieldSpec::of_order(q).unwrap()
}

/// Every coefficient assignment of `spec` over `field`, pair 0 least significant.
pub fn all_codes<'a>(spec: &'a NetworkSpec, field: &'a FieldSpec) -> impl Iterator<Item = CoefficientAssignment> + 'a {
    let plan = CodingPlan::new(spec).unwrap();
    let pairs = plan.pair_count() as u32;
    let q = field.order() as u64;
    (0..q.pow(pairs)).map(move |mut idx| {
        let values = (0..pairs)
            .map(|_| {
                let v = idx % q;
                idx /= q;
                field.element(v).unwrap()
            })
            .collect();
        CoefficientAssignment::new(spec, field, values).unwrap()
    })
}

/// Decoding outcome of every sink for every erasure mask (bit j = j-th real
/// channel in id order), for one code given as raw coefficient indices.
pub struct OutcomeTable {
    plan: CodingPlan,
    field: FieldSpec,
}

impl OutcomeTable {
    pub fn butterfly(field: &FieldSpec) -> Self {
        Self { plan: CodingPlan::new(&build_butterfly()).unwrap(), field: field.clone() }
    }

    pub fn plan(&self) -> &CodingPlan {
        &self.plan
    }

    /// `table[mask][sink]`
    pub fn outcomes(&self, coeffs: &[u32]) -> Vec<Vec<bool>> {
        let w = self.plan.rate();
        let n = self.plan.real_channel_count();
        let mut kernels = vec![0u32; self.plan.channel_count() * w];
        let mut scratch = Vec::new();
        (0..1u64 << n)
            .map(|mask| {
                let mut flags = vec![false; self.plan.channel_count()];
                for (bit, &c) in self.plan.real_channels().iter().enumerate() {
                    flags[c] = mask >> bit & 1 == 1;
                }
                self.plan.propagate_into(&self.field, coeffs, &flags, &mut kernels);
                (0..self.plan.sink_count())
                    .map(|s| self.plan.sink_rank(&self.field, &kernels, s, &mut scratch) == w)
                    .collect()
            })
            .collect()
    }
}

/// Raw coefficients for assignment index `idx` over GF(q).
pub fn raw_code(mut idx: u64, q: u64, pairs: usize) -> Vec<u32> {
    (0..pairs)
        .map(|_| {
            let v = (idx % q) as u32;
            idx /= q;
            v
        })
        .collect()
}
