//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{all_codes, gf, raw_code, OutcomeTable};
use num_traits::ToPrimitive;
use rlnc_lab::closed_form::{
    butterfly_failure, convergence_rate_check, invertible_probability, limit_failure, network_success, threshold_search,
    FormulaInput, Target,
};
use rlnc_lab::exact::{self, integer, rational, round_half_even, ExactRational, Polynomial};
use rlnc_lab::field::is_prime_power;
use rlnc_lab::probability::{enumerate_exact, erasure_polynomial, monte_carlo, ErasureModel, Probability};
use rlnc_lab::rng::substream;
use rlnc_lab::{build_butterfly, sample_code, structural_factorization_check, FieldSpec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn exact_of(p: &Probability) -> ExactRational {
    p.as_exact().expect("exact probability").clone()
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("{what} took {elapsed:.2?}, limit {limit:?}"))
    }
}

fn ac1() -> Outcome {
    let start = Instant::now();
    let e = enumerate_exact(&build_butterfly(), &gf(2), None).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let success = ExactRational::from_integer(1.into()) - exact_of(&e.failure.network);
    ensure!(success == rational(3, 2048), "network success {success}");
    ensure!(e.network_success_count() == Some(6), "count {:?}", e.network_success_count());
    ensure!(e.assignments == 4096, "assignments {}", e.assignments);
    within(elapsed, Duration::from_secs(1), "GF(2) enumeration")?;
    Ok(format!("success 3/2048, 6 of 4096 codes, {elapsed:.2?}"))
}

fn ac2() -> Outcome {
    let b = build_butterfly();
    let mut notes = Vec::new();
    for q in [2u64, 3, 4] {
        let start = Instant::now();
        let e = enumerate_exact(&b, &gf(q), None).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let input = FormulaInput::order(q).unwrap();
        ensure!(exact_of(&e.failure.network) == butterfly_failure(&input, Target::Network), "q={q} network");
        ensure!(exact_of(&e.failure.average) == butterfly_failure(&input, Target::Average), "q={q} average");
        for (name, p) in &e.failure.per_sink {
            ensure!(exact_of(p) == butterfly_failure(&input, Target::Sink), "q={q} sink {name}");
        }
        if q == 4 {
            within(elapsed, Duration::from_secs(60), "GF(4) enumeration")?;
        }
        notes.push(format!("q={q} {elapsed:.2?}"));
    }
    Ok(notes.join(", "))
}

fn ac3() -> Outcome {
    let thousandths = |q| round_half_even(&(network_success(q) * integer(1000)));
    let (s3, s4) = (thousandths(3), thousandths(4));
    ensure!(s3 == 23.into(), "q=3 rounds to {s3}/1000");
    ensure!(s4 == 70.into(), "q=4 rounds to {s4}/1000");
    Ok("0.023 and 0.070".into())
}

fn ac4() -> Outcome {
    let t = threshold_search(&rational(9, 10)).map_err(|e| e.to_string())?;
    ensure!(t.minimal_integer_q == 87, "minimal integer {}", t.minimal_integer_q);
    ensure!(t.minimal_prime_power_q == 89, "minimal field order {}", t.minimal_prime_power_q);
    ensure!(network_success(86) < rational(9, 10), "q=86 passes");
    ensure!(network_success(87) >= rational(9, 10), "q=87 fails");
    ensure!(is_prime_power(89) && !is_prime_power(87) && !is_prime_power(88), "prime power check");
    Ok("87 (86 fails, 87 passes), field order 89".into())
}

fn ac5() -> Outcome {
    let start = Instant::now();
    let polys = erasure_polynomial(&build_butterfly(), &gf(2)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let network = Polynomial::one_minus_x_pow(9).scale(&rational(3, 2048));
    let sink = Polynomial::one_minus_x_pow(6).scale(&rational(3, 128));
    ensure!(polys.network.complement() == network, "network success {}", polys.network.complement());
    for name in ["t1", "t2"] {
        let got = polys.sink(name).ok_or("missing sink")?.complement();
        ensure!(got == sink, "{name} success {got}");
    }
    within(elapsed, Duration::from_secs(60), "erasure polynomial")?;
    Ok(format!("(3/2048)(1-p)^9 and (3/128)(1-p)^6, {elapsed:.2?}"))
}

fn ac6() -> Outcome {
    // bit j of the mask is the j-th real channel e_{j+1}
    let (t1_free, t2_free) = ([3usize, 5, 8], [2usize, 4, 7]);
    let f = gf(2);
    let table = OutcomeTable::butterfly(&f);
    let mut checks = 0u64;
    for idx in 0..4096u64 {
        let out = table.outcomes(&raw_code(idx, 2, 12));
        for mask in 0..512usize {
            for bit in t1_free {
                ensure!(out[mask][0] == out[mask ^ 1 << bit][0], "t1 code {idx} mask {mask:#011b} e{}", bit + 1);
            }
            for bit in t2_free {
                ensure!(out[mask][1] == out[mask ^ 1 << bit][1], "t2 code {idx} mask {mask:#011b} e{}", bit + 1);
            }
            checks += 6;
        }
    }
    Ok(format!("{checks} toggles over 4096 codes x 512 patterns"))
}

fn ac7() -> Outcome {
    let b = build_butterfly();
    let trials = 1_000_000;
    let mut worst = 0.0f64;
    for q in [2u64, 3, 4] {
        let f = gf(q);
        for p in [rational(0, 1), rational(1, 10)] {
            let input = FormulaInput::new(q, p.clone()).unwrap();
            let model = ErasureModel::new(p.clone()).unwrap();
            let mc = monte_carlo(&b, &f, Some(&model), trials, 20_240 + q).map_err(|e| e.to_string())?;
            let mut checks = vec![(&mc.network, Target::Network), (&mc.average, Target::Average)];
            checks.extend(mc.per_sink.iter().map(|(_, est)| (est, Target::Sink)));
            for (est, target) in checks {
                let truth = exact::to_f64(&butterfly_failure(&input, target));
                let z = est.as_estimate().ok_or("not an estimate")?.z_score(truth);
                ensure!(z <= 5.0, "q={q} p={p} {} z={z:.2}", target.name());
                worst = worst.max(z);
            }
        }
    }
    let f = gf(3);
    let model = ErasureModel::new(rational(1, 10)).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo(&b, &f, Some(&model), 100_000, 9).unwrap())
    };
    let reference = run(1);
    for threads in [2, 4, 7] {
        ensure!(run(threads) == reference, "{threads} workers differ from 1");
    }
    Ok(format!("max z {worst:.2}, replay identical for 1/2/4/7 workers"))
}

fn ac8() -> Outcome {
    let sink = convergence_rate_check(Target::Sink, &[10_000]).map_err(|e| e.to_string())?;
    let net = convergence_rate_check(Target::Network, &[10_000]).map_err(|e| e.to_string())?;
    let (s, n) = (
        sink[0].scaled_failure.to_f64().unwrap_or(f64::NAN),
        net[0].scaled_failure.to_f64().unwrap_or(f64::NAN),
    );
    ensure!((4.99..=5.01).contains(&s), "q*P_sink = {s}");
    ensure!((8.99..=9.01).contains(&n), "q*P_network = {n}");
    let mut gap = ExactRational::from_integer(0.into());
    for p in [rational(0, 1), rational(1, 10), rational(1, 2)] {
        for t in Target::ALL {
            let limit = limit_failure(&p, t).map_err(|e| e.to_string())?;
            let far = butterfly_failure(&FormulaInput::new(1_000_000_000, p.clone()).unwrap(), t);
            let d = if limit > far { &limit - &far } else { &far - &limit };
            ensure!(d <= rational(1, 1_000_000), "p={p} {} gap {}", t.name(), exact::to_f64(&d));
            gap = gap.max(d);
        }
    }
    Ok(format!("q*P = {s:.4} / {n:.4} at q=10^4, max limit gap {:.1e}", exact::to_f64(&gap)))
}

fn ac9() -> Outcome {
    let b = build_butterfly();
    let f2 = gf(2);
    let mut count = 0;
    for code in all_codes(&b, &f2) {
        ensure!(structural_factorization_check(&code).map_err(|e| e.to_string())?, "GF(2) code {count}");
        count += 1;
    }
    ensure!(count == 4096, "{count} GF(2) codes");
    let f5 = gf(5);
    for t in 0..10_000u64 {
        let code = sample_code(&b, &f5, &mut substream(5, t)).map_err(|e| e.to_string())?;
        ensure!(structural_factorization_check(&code).map_err(|e| e.to_string())?, "GF(5) sample {t}");
    }
    Ok("4096 GF(2) codes, 10^4 GF(5) codes".into())
}

fn ac10() -> Outcome {
    for q in 2..=5u64 {
        let f = gf(q);
        let elements: Vec<_> = f.elements().collect();
        let mut invertible = 0u64;
        for &a in &elements {
            for &b in &elements {
                for &c in &elements {
                    for &d in &elements {
                        let det = f.sub(f.mul(a, d).unwrap(), f.mul(b, c).unwrap()).unwrap();
                        invertible += u64::from(!det.is_zero());
                    }
                }
            }
        }
        let counted = rational(invertible as i64, q.pow(4) as i64);
        let formula = invertible_probability(2, q).map_err(|e| e.to_string())?;
        ensure!(counted == formula, "q={q}: counted {counted}, formula {formula}");
    }
    Ok("q = 2..5".into())
}

fn field_axioms(f: &FieldSpec) -> Result<(), String> {
    let els: Vec<_> = f.elements().collect();
    let (zero, one) = (f.zero(), f.one());
    for &a in &els {
        ensure!(f.add(a, zero).unwrap() == a && f.mul(a, one).unwrap() == a, "identity at {}", a.value());
        ensure!(f.add(a, f.neg(a).unwrap()).unwrap() == zero, "negation at {}", a.value());
        if !a.is_zero() {
            ensure!(f.mul(a, f.inv(a).unwrap()).unwrap() == one, "inverse at {}", a.value());
        }
        for &b in &els {
            let ab = f.add(a, b).unwrap();
            let m = f.mul(a, b).unwrap();
            ensure!(ab == f.add(b, a).unwrap() && m == f.mul(b, a).unwrap(), "commutativity");
            for &c in &els {
                ensure!(f.add(ab, c).unwrap() == f.add(a, f.add(b, c).unwrap()).unwrap(), "additive associativity");
                ensure!(f.mul(m, c).unwrap() == f.mul(a, f.mul(b, c).unwrap()).unwrap(), "multiplicative associativity");
                ensure!(
                    f.mul(a, f.add(b, c).unwrap()).unwrap() == f.add(m, f.mul(a, c).unwrap()).unwrap(),
                    "distributivity"
                );
            }
        }
    }
    Ok(())
}

fn ac11() -> Outcome {
    let b = build_butterfly();
    for sink in ["t1", "t2"] {
        let cut = b.min_cut(sink).map_err(|e| e.to_string())?;
        ensure!(cut == 2, "min cut to {sink} is {cut}");
    }
    let orders: Vec<u64> = (2..=64).filter(|&q| is_prime_power(q)).collect();
    for &q in &orders {
        field_axioms(&gf(q)).map_err(|e| format!("GF({q}): {e}"))?;
    }
    Ok(format!("min cuts 2/2, axioms on {} fields up to GF(64)", orders.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("exact q=2 network success", ac1),
        ("enumeration matches formulas, q=2,3,4", ac2),
        ("decimal success at q=3,4", ac3),
        ("threshold for 0.9 network success", ac4),
        ("erasure polynomials at q=2", ac5),
        ("erasure irrelevance", ac6),
        ("Monte Carlo consistency and replay", ac7),
        ("limits and rates", ac8),
        ("structural factorization", ac9),
        ("2x2 invertible fraction", ac10),
        ("min cuts and field axioms", ac11),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS AC{:<2} {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL AC{:<2} {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
