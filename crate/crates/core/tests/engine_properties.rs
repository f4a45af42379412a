mod common;

use common::{gf, raw_code, OutcomeTable};
use proptest::prelude::*;
use rlnc_lab::engine::{rank, CodingPlan};
use rlnc_lab::{build_butterfly, FieldSpec, NetworkSpec};

const E3: usize = 2;
const E4: usize = 3;
const E5: usize = 4;
const E6: usize = 5;
const E8: usize = 7;
const E9: usize = 8;

#[test]
fn adding_erasures_never_repairs_a_sink() {
    let f = gf(2);
    let table = OutcomeTable::butterfly(&f);
    for idx in 0..4096u64 {
        let out = table.outcomes(&raw_code(idx, 2, 12));
        for mask in 0..512usize {
            for bit in 0..9 {
                let bigger = mask | 1 << bit;
                for (after, before) in out[bigger].iter().zip(&out[mask]) {
                    assert!(!after || *before, "code {idx} mask {mask:#b} bit {bit}");
                }
            }
        }
    }
}

#[test]
fn irrelevant_channels_gf3_sampled() {
    // The GF(2) exhaustive version lives in the acceptance suite.
    let f = gf(3);
    let table = OutcomeTable::butterfly(&f);
    let q = 3u64;
    for idx in (0..q.pow(12)).step_by(4099) {
        let out = table.outcomes(&raw_code(idx, q, 12));
        for mask in 0..512usize {
            for bit in [E4, E6, E9] {
                assert_eq!(out[mask][0], out[mask ^ 1 << bit][0]);
            }
            for bit in [E3, E5, E8] {
                assert_eq!(out[mask][1], out[mask ^ 1 << bit][1]);
            }
        }
    }
}

#[test]
fn scaling_k13_preserves_t1_outcome() {
    let b = build_butterfly();
    let plan = CodingPlan::new(&b).unwrap();
    // k_{1,3} sits at pair index 4 in sampling order
    let k13 = 4;
    for q in [2u64, 3, 4] {
        let f = gf(q);
        let mut kernels = vec![0u32; plan.channel_count() * 2];
        let mut scratch = Vec::new();
        let flags = vec![false; plan.channel_count()];
        let mut t1_ok = |coeffs: &[u32]| {
            plan.propagate_into(&f, coeffs, &flags, &mut kernels);
            plan.sink_rank(&f, &kernels, 0, &mut scratch) == 2
        };
        let scalars: Vec<u32> = (1..q as u32).collect();
        for idx in 0..q.pow(12) {
            let mut coeffs = raw_code(idx, q, 12);
            let base = t1_ok(&coeffs);
            let original = coeffs[k13];
            for &s in &scalars {
                coeffs[k13] = f.mul(f.element(original as u64).unwrap(), f.element(s as u64).unwrap()).unwrap().value();
                assert_eq!(t1_ok(&coeffs), base);
            }
        }
    }
}

fn field_strategy() -> impl Strategy<Value = FieldSpec> {
    prop::sample::select(vec![2u64, 4, 7, 9, 16, 27, 64, 125, 251, 256, 257, 343, 1024, 6561, 65536, 1 << 20])
        .prop_map(|q| FieldSpec::of_order(q).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms_random(f in field_strategy(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>()) {
        let q = f.order();
        let (a, b, c) = (f.element((a % q) as u64).unwrap(), f.element((b % q) as u64).unwrap(), f.element((c % q) as u64).unwrap());
        prop_assert_eq!(f.add(a, b).unwrap(), f.add(b, a).unwrap());
        prop_assert_eq!(f.mul(a, b).unwrap(), f.mul(b, a).unwrap());
        prop_assert_eq!(f.add(f.add(a, b).unwrap(), c).unwrap(), f.add(a, f.add(b, c).unwrap()).unwrap());
        prop_assert_eq!(f.mul(f.mul(a, b).unwrap(), c).unwrap(), f.mul(a, f.mul(b, c).unwrap()).unwrap());
        prop_assert_eq!(
            f.mul(a, f.add(b, c).unwrap()).unwrap(),
            f.add(f.mul(a, b).unwrap(), f.mul(a, c).unwrap()).unwrap()
        );
        prop_assert_eq!(f.add(a, f.neg(a).unwrap()).unwrap(), f.zero());
        prop_assert_eq!(f.sub(a, b).unwrap(), f.add(a, f.neg(b).unwrap()).unwrap());
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()).unwrap(), f.one());
        }
    }

    #[test]
    fn rank_ignores_column_order(
        q in prop::sample::select(vec![2u64, 3, 4, 5, 8, 9]),
        rows in 1usize..4,
        cols in 1usize..5,
        seed in any::<u64>(),
        perm_seed in any::<u64>(),
    ) {
        let f = FieldSpec::of_order(q).unwrap();
        let mut s = seed;
        let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 33) % q };
        let m: Vec<Vec<_>> = (0..rows).map(|_| (0..cols).map(|_| f.element(next()).unwrap()).collect()).collect();
        let mut order: Vec<usize> = (0..cols).collect();
        let mut t = perm_seed;
        for i in (1..cols).rev() {
            t = t.wrapping_mul(6364136223846793005).wrapping_add(1);
            order.swap(i, (t >> 33) as usize % (i + 1));
        }
        let permuted: Vec<Vec<_>> = m.iter().map(|row| order.iter().map(|&j| row[j]).collect()).collect();
        let r = rank(&f, &m).unwrap();
        prop_assert_eq!(r, rank(&f, &permuted).unwrap());
        prop_assert!(r <= rows.min(cols));
    }

    #[test]
    fn topological_order_respects_precedence(n in 2usize..8, edges in prop::collection::vec((0usize..8, 0usize..8), 1..20)) {
        // orient every edge from lower to higher node to stay acyclic
        let nodes: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let mut chans = Vec::new();
        for (k, (a, b)) in edges.into_iter().enumerate() {
            let (a, b) = (a % n, b % n);
            if a == b { continue; }
            let (t, h) = if a < b { (a, b) } else { (b, a) };
            chans.push((format!("c{k}"), nodes[t].clone(), nodes[h].clone()));
        }
        let mut spec = NetworkSpec::new(nodes.clone(), Vec::<(String, String, String)>::new(), nodes[0].clone(), vec![nodes[n - 1].clone()], 1);
        for (id, t, h) in &chans { spec.add_channel(id, t, h); }
        let order = spec.topological_order().unwrap();
        let mut ids: Vec<&str> = spec.channels.iter().map(|c| c.id.as_str()).collect();
        let mut sorted = order.clone();
        sorted.sort();
        ids.sort();
        prop_assert_eq!(sorted, ids);
        prop_assert_eq!(order[0], "d1");
        let pos = |id: &str| order.iter().position(|&c| c == id).unwrap();
        for c in spec.real_channels() {
            for u in spec.real_channels() {
                if u.head == c.tail {
                    prop_assert!(pos(&u.id) < pos(&c.id));
                }
            }
        }
    }
}
