//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use zccs_core::exactnum::CycloSum;
use zccs_core::gbf::Gbf;
use zccs_core::pbf::{check_h_condition, ConstructionParams, HFunction, ParamSpec};
use zccs_core::pmepr::check_pmepr_bound;
use zccs_core::seqgen::{generate_ccc, generate_zccs, plan_parameters, CodeSet, PhaseSequence};
use zccs_core::verify::{
    accf, check_ccc, check_optimality, check_zccs, correlate_fft, measure_zcz, CheckOptions,
    Engine, Optimality,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn example_one() -> CodeSet {
    let params = ConstructionParams::new(ParamSpec {
        g: Gbf::new(2, 3, [((1, 2), 1)], [(0, 1)], 0).unwrap(),
        n: 1,
        delete: vec![0],
        gamma: 1,
        primes: vec![3, 2, 2],
        widths: Some(vec![2, 1, 1]),
        // h(v0, v1) = v0·v1
        h: HFunction::from_table(2, 2, vec![0, 0, 0, 1]).unwrap(),
        strict_widths: false,
        literal_bar: false,
    })
    .unwrap();
    generate_zccs(&params).unwrap()
}

/// Single-prime sets for `(p, m, n)`; `h` takes values in `{c, c + q/2}`.
fn single_prime_set(p: u32, m: usize, n: usize) -> CodeSet {
    let (g, delete, gamma, h) = match (p, m, n) {
        (5, 2, 0) => (
            Gbf::new(4, 2, [((0, 1), 2)], [(0, 1)], 0).unwrap(),
            vec![],
            0,
            HFunction::from_table(4, 1, vec![1, 3]).unwrap(),
        ),
        (_, 2, 0) => (
            Gbf::new(2, 2, [((0, 1), 1)], [], 0).unwrap(),
            vec![],
            0,
            HFunction::from_path(2, &[0], &[1], 0).unwrap(),
        ),
        (_, 3, 1) => (
            Gbf::new(2, 3, [((1, 2), 1)], [(0, 1)], 0).unwrap(),
            vec![0],
            1,
            HFunction::from_path(2, &[0, 1], &[0, 0], 0).unwrap(),
        ),
        _ => unreachable!(),
    };
    assert!(check_h_condition(&h, g.q()).ok);
    let params = ConstructionParams::new(ParamSpec {
        g,
        n,
        delete,
        gamma,
        primes: vec![p],
        widths: None,
        h,
        strict_widths: false,
        literal_bar: false,
    })
    .unwrap();
    generate_zccs(&params).unwrap()
}

const SWEEP: [(u32, usize, usize); 4] = [(3, 2, 0), (5, 2, 0), (3, 3, 1), (7, 2, 0)];

fn criterion_1() -> Outcome {
    let set = example_one();
    let p = set.params();
    ensure(
        (p.num_codes, p.rows, p.len, p.sigma) == (48, 4, 96, 6),
        || format!("shape {p:?}"),
    )?;
    let report = check_zccs(&set, 8, CheckOptions::exact());
    ensure(report.passed && report.violations.is_empty(), || {
        format!("{} violations, first {:?}", report.violations.len(), report.violations.first())
    })?;
    ensure(report.peak_value == Some(384), || format!("peak {:?}", report.peak_value))?;
    let opt = check_optimality(48, 4, 96, 8).map_err(|e| e.to_string())?;
    ensure(opt == Optimality::Optimal, || format!("{opt:?}"))?;
    Ok("48 codes 4x96, sigma 6, Z=8 with no violations, peak 384, optimal".into())
}

fn criterion_2() -> Outcome {
    let z = measure_zcz(&example_one(), Engine::Exact);
    ensure(z == 8, || format!("measured {z}"))?;
    Ok("measured Z = 8".into())
}

fn criterion_3() -> Outcome {
    for (p, m, n) in SWEEP {
        let set = single_prime_set(p, m, n);
        let sp = set.params();
        let z = 1 << m;
        let report = check_zccs(&set, z, CheckOptions::exact());
        ensure(report.passed, || {
            format!("(p,m,n)=({p},{m},{n}): {:?}", report.violations.first())
        })?;
        let opt = check_optimality(sp.num_codes, sp.rows, sp.len, z).map_err(|e| e.to_string())?;
        ensure(opt == Optimality::Optimal, || format!("({p},{m},{n}): {opt:?}"))?;
        ensure(sp.num_codes == p as usize * (2 << n), || {
            format!("({p},{m},{n}): M = {}", sp.num_codes)
        })?;
    }
    Ok("(3,2,0) (5,2,0) (3,3,1) (7,2,0) pass with Z = 2^m and are optimal".into())
}

fn criterion_4() -> Outcome {
    let cases: [(usize, usize, Gbf, Vec<usize>, usize); 4] = [
        (2, 0, Gbf::new(2, 2, [((0, 1), 1)], [], 0).unwrap(), vec![], 0),
        (3, 0, Gbf::new(2, 3, [((0, 1), 1), ((1, 2), 1)], [], 0).unwrap(), vec![], 0),
        (3, 1, Gbf::new(2, 3, [((1, 2), 1)], [(0, 1)], 0).unwrap(), vec![0], 1),
        (
            4,
            2,
            Gbf::new(2, 4, [((2, 3), 1), ((0, 2), 1)], [(1, 1)], 0).unwrap(),
            vec![0, 1],
            2,
        ),
    ];
    for (m, n, g, delete, gamma) in cases {
        let set = generate_ccc(&g, n, &delete, gamma).map_err(|e| e.to_string())?;
        let p = set.params();
        ensure((p.num_codes, p.rows, p.len) == (2 << n, 2 << n, 1 << m), || {
            format!("(m,n)=({m},{n}) shape {p:?}")
        })?;
        let report = check_ccc(&set, CheckOptions::exact());
        ensure(report.passed, || format!("(m,n)=({m},{n}): {:?}", report.violations.first()))?;
    }
    Ok("(2,0) (3,0) (3,1) (4,2) are complete complementary codes".into())
}

fn criterion_5() -> Outcome {
    let mut sets = vec![("example", example_one())];
    for (p, m, n) in SWEEP {
        sets.push(("sweep", single_prime_set(p, m, n)));
    }
    let mut worst = 0.0f64;
    let mut columns = 0;
    for (name, set) in &sets {
        let report = check_pmepr_bound(set, 2.0, 64).map_err(|e| e.to_string())?;
        ensure(report.passed, || format!("{name}: max {} at {:?}", report.max_value, report.worst))?;
        worst = worst.max(report.max_value);
        columns += report.columns.len();
    }
    Ok(format!("{columns} columns, max PMEPR {worst:.9} <= 2 + 1e-6"))
}

fn criterion_6() -> Outcome {
    let mut sums = 0;
    for p in [2u32, 3, 5, 7, 11, 13] {
        // also embedded in a larger σ, as inside a mixed-prime set
        for sigma in [p, 4 * p, 6 * p] {
            let step = sigma / p;
            for t in 0..p {
                for t2 in 0..p {
                    let mut s = CycloSum::zero(sigma);
                    for j in 0..p {
                        let e = ((t + p - t2) * j % p) * step;
                        s.add_root(e, 1).map_err(|e| e.to_string())?;
                    }
                    if t == t2 {
                        ensure(s.as_integer() == Some(i64::from(p)), || {
                            format!("p={p} sigma={sigma} t={t}: {:?}", s.as_integer())
                        })?;
                    } else {
                        ensure(s.is_zero_exact(), || format!("p={p} sigma={sigma} t={t} t'={t2}"))?;
                    }
                    sums += 1;
                }
            }
        }
    }
    Ok(format!("{sums} root sums exact for all primes <= 13"))
}

fn criterion_7() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    let mut worst = 0.0f64;
    for trial in 0..200 {
        let len = rng.gen_range(1..=256usize);
        let sigma = rng.gen_range(1..=60u32);
        let mut draw = || {
            PhaseSequence::new(sigma, (0..len).map(|_| rng.gen_range(0..sigma)).collect()).unwrap()
        };
        let (x, y) = (draw(), draw());
        let spectral = correlate_fft(&x.to_complex(), &y.to_complex()).map_err(|e| e.to_string())?;
        for tau in -(len as i64 - 1)..len as i64 {
            let exact = accf(&x, &y, tau).map_err(|e| e.to_string())?.to_complex();
            let err = (exact - spectral[(tau + len as i64 - 1) as usize]).norm();
            worst = worst.max(err / len as f64);
            ensure(err <= 1e-9 * len as f64, || {
                format!("trial {trial}: N={len} sigma={sigma} tau={tau} error {err:e}")
            })?;
        }
    }
    Ok(format!("200 pairs agree, worst error {worst:.2e} * N"))
}

fn criterion_8() -> Outcome {
    let mut set = example_one();
    let p = set.params();
    let opts = CheckOptions {
        stop_at_first: true,
        ..CheckOptions::exact()
    };
    let mut perturbations = 0;
    for code in 0..p.num_codes {
        for row in 0..p.rows {
            for col in 0..p.len {
                let orig = set.codes()[code].rows()[row].exponents()[col];
                for d in 1..p.sigma {
                    set.set_exponent(code, row, col, (orig + d) % p.sigma).unwrap();
                    let passed = check_zccs(&set, 8, opts).passed;
                    ensure(!passed, || format!("code {code} row {row} col {col} +{d} still passes"))?;
                    perturbations += 1;
                }
                set.set_exponent(code, row, col, orig).unwrap();
            }
        }
    }
    ensure(check_zccs(&set, 8, opts).passed, || "restored set fails".into())?;
    let h = HFunction::from_table(4, 1, vec![0, 1]).unwrap();
    ensure(!check_h_condition(&h, 4).ok, || "q=4 table {0,1} accepted".into())?;
    Ok(format!(
        "all {perturbations} single-entry perturbations fail Z=8; q=4 h table {{0,1}} rejected"
    ))
}

fn criterion_9() -> Outcome {
    for len in (2..=40u64).step_by(2) {
        let plan = plan_parameters(len, 1).map_err(|e| format!("L={len}: {e}"))?;
        let params = ConstructionParams::new(ParamSpec {
            g: Gbf::zero(2, 1).unwrap(),
            n: 0,
            delete: vec![],
            gamma: 0,
            primes: plan.primes.clone(),
            widths: Some(plan.widths.clone()),
            h: HFunction::zero(2, 1).unwrap(),
            strict_widths: false,
            literal_bar: false,
        })
        .map_err(|e| format!("L={len}: {e}"))?;
        let set = generate_zccs(&params).map_err(|e| format!("L={len}: {e}"))?;
        let p = set.params();
        ensure(p.len == len as usize, || format!("L={len}: got length {}", p.len))?;
        let report = check_zccs(&set, 2, CheckOptions::exact());
        ensure(report.passed, || format!("L={len}: {:?}", report.violations.first()))?;
        let opt = check_optimality(p.num_codes, p.rows, p.len, 2).map_err(|e| e.to_string())?;
        ensure(opt == Optimality::Optimal, || format!("L={len}: {opt:?}"))?;
    }
    Ok("every even length 2..=40 gives an optimal set with Z = 2".into())
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failures = 0;
    for (id, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = fmt_duration(start.elapsed());
        match outcome {
            Ok(msg) => println!("PASS criterion {id}: {msg} [{took}]"),
            Err(msg) => {
                failures += 1;
                println!("FAIL criterion {id}: {msg} [{took}]");
            }
        }
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn fmt_duration(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}
