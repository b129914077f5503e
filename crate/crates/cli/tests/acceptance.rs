//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use dfs_qkd_core::adversary::table_rows;
use dfs_qkd_core::codewords::{bell_product, overlap_table};
use dfs_qkd_core::noise::{
    collective_dephasing, collective_rotation, DephasingParam, RotationParam,
};
use dfs_qkd_core::oracle::{exact_error_rates, mc_error_rates, reproduce_table, TableRow};
use dfs_qkd_core::statevector::BellOutcome;
use dfs_qkd_core::{
    build_codeword, run_session, Attack, AttackKind, LogicalState, MeasBasis, NoisePolicy,
    SessionConfig, SpatialBasis, StateVector, Variant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const EXACT: f64 = 1e-9;
const FID: f64 = 1e-12;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || {
        format!("took {elapsed:.2?}, limit {limit:.0?}")
    })
}

fn check_rows(rows: &[TableRow], expected: &[(AttackKind, f64, f64)]) -> Result<(), String> {
    ensure(rows.len() == expected.len(), || {
        format!("{} rows, expected {}", rows.len(), expected.len())
    })?;
    for (row, &(kind, ex, ez)) in rows.iter().zip(expected) {
        ensure(row.attack == kind, || {
            format!("row order: {} vs {kind}", row.attack)
        })?;
        ensure(
            (row.e_x - ex).abs() <= EXACT && (row.e_z - ez).abs() <= EXACT,
            || format!("{kind}: ({}, {}) vs ({ex}, {ez})", row.e_x, row.e_z),
        )?;
        let mean = (ex + ez) / 2.0;
        ensure((row.e_a_computed - mean).abs() <= EXACT, || {
            format!("{kind}: e_a {}", row.e_a_computed)
        })?;
    }
    Ok(())
}

fn dephasing_table() -> Outcome {
    use AttackKind::*;
    let start = Instant::now();
    let rows = reproduce_table(Variant::Dephasing).map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(1))?;
    check_rows(
        &rows,
        &[
            (MeasureResendProduct(MeasBasis::X), 0.0, 0.5),
            (MeasureResendEntangled(MeasBasis::X), 0.25, 0.25),
            (BellResend, 0.25, 0.125),
            (CnotParity(MeasBasis::X), 0.0, 0.25),
        ],
    )?;
    let bell = &rows[2];
    ensure(!bell.match_flag && bell.e_a_paper == 0.1925, || {
        "bell row not flagged against 0.1925".into()
    })?;
    ensure(rows.iter().filter(|r| !r.match_flag).count() == 1, || {
        "unexpected mismatches".into()
    })?;
    Ok(format!(
        "4 rows exact; bell e_A computed {:.4} vs printed {:.4} (flagged); {:.1?}",
        bell.e_a_computed,
        bell.e_a_paper,
        start.elapsed()
    ))
}

fn rotation_table() -> Outcome {
    use AttackKind::*;
    let start = Instant::now();
    let rows = reproduce_table(Variant::Rotation).map_err(|e| e.to_string())?;
    within(start.elapsed(), Duration::from_secs(1))?;
    check_rows(
        &rows,
        &[
            (MeasureResendProduct(MeasBasis::X), 0.0, 0.5),
            (MeasureResendEntangled(MeasBasis::X), 0.25, 0.25),
            (MeasureResendProduct(MeasBasis::Z), 0.5, 0.0),
            (MeasureResendEntangled(MeasBasis::Z), 0.25, 0.25),
            (BellResend, 0.25, 0.25),
            (CnotParity(MeasBasis::Z), 0.25, 0.0),
        ],
    )?;
    ensure(rows.iter().all(|r| r.match_flag), || {
        "a rotation row is flagged".into()
    })?;
    let swapped = |a: &TableRow, b: &TableRow| {
        (a.e_x - b.e_z).abs() <= EXACT && (a.e_z - b.e_x).abs() <= EXACT
    };
    ensure(
        swapped(&rows[0], &rows[2]) && swapped(&rows[1], &rows[3]),
        || "X/Z symmetry broken".into(),
    )?;
    Ok(format!(
        "6 rows exact, rows 1<->3 and 2<->4 X/Z-symmetric; {:.1?}",
        start.elapsed()
    ))
}

fn monte_carlo() -> Outcome {
    const TRIALS: usize = 100_000;
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_clustered = 0.0f64;
    for variant in Variant::ALL {
        for (i, &kind) in table_rows(variant).iter().enumerate() {
            let attack = Attack::new(kind);
            let exact = exact_error_rates(variant, &attack).map_err(|e| e.to_string())?;
            let mc = mc_error_rates(variant, &attack, TRIALS, 1000 + i as u64)
                .map_err(|e| e.to_string())?;
            let pairs = 2.0 * mc.trials as f64;
            for (label, got, want, clustered) in [
                ("e_X", mc.rates.e_x, exact.e_x, mc.se_x),
                ("e_Z", mc.rates.e_z, exact.e_z, mc.se_z),
            ] {
                // Binomial standard error over pair checks at the exact rate.
                let se = (want * (1.0 - want) / pairs).sqrt();
                let dev = (got - want).abs();
                if se == 0.0 {
                    ensure(dev == 0.0, || {
                        format!("{variant} {kind} {label}: {got} but exact {want}")
                    })?;
                    continue;
                }
                worst = worst.max(dev / se);
                worst_clustered = worst_clustered.max(dev / clustered);
                ensure(dev <= 3.0 * se, || {
                    format!(
                        "{variant} {kind} {label}: {got} vs {want}, {:.2} binomial sigma",
                        dev / se
                    )
                })?;
            }
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "10 rows x {TRIALS} trials; worst deviation {worst:.2} binomial sigma ({worst_clustered:.2} clustered); {:.1?}",
        start.elapsed()
    ))
}

fn dfs_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let all = [0, 1, 2, 3];
    let mut worst = 0.0f64;
    let mut witness_min = 1.0f64;
    let witness = StateVector::basis_state(4, "++++").map_err(|e| e.to_string())?;
    for _ in 0..100 {
        let phi = rng.random_range(0.0..TAU);
        let theta = rng.random_range(0.0..TAU);
        for variant in Variant::ALL {
            for ls in LogicalState::all(variant) {
                let c = build_codeword(ls);
                let out = match variant {
                    Variant::Dephasing => collective_dephasing(&c, &all, DephasingParam(phi)),
                    Variant::Rotation => collective_rotation(&c, &all, RotationParam(theta)),
                }
                .map_err(|e| e.to_string())?;
                worst = worst.max((1.0 - c.fidelity(&out).unwrap()).abs());
            }
        }
        let moved = collective_dephasing(&witness, &all, DephasingParam(phi)).unwrap();
        witness_min = witness_min.min(witness.fidelity(&moved).unwrap());
    }
    ensure(worst <= FID, || {
        format!("codeword fidelity off by {worst:e}")
    })?;
    let at_pi = collective_dephasing(&witness, &all, DephasingParam(PI)).unwrap();
    let f_pi = witness.fidelity(&at_pi).unwrap();
    ensure(f_pi < FID && witness_min < 0.5, || {
        format!("|++++> not disturbed: F(pi) = {f_pi}")
    })?;
    Ok(format!(
        "8 codewords x 100 parameters, max |1-F| = {worst:.1e}; |++++> fidelity {witness_min:.3} at worst, {f_pi:.0e} at phi=pi"
    ))
}

fn honest_end_to_end() -> Outcome {
    let start = Instant::now();
    let (n, delta) = (256, 64);
    for variant in Variant::ALL {
        let cfg = SessionConfig::new(variant, n, delta, 256)
            .with_noise(NoisePolicy::UniformPerQuartet { lo: 0.0, hi: TAU });
        let res = run_session(&cfg, &Attack::none()).map_err(|e| e.to_string())?;
        ensure(res.observed_e_x == 0.0 && res.observed_e_z == 0.0, || {
            format!("{variant}: nonzero error")
        })?;
        ensure(!res.aborted, || format!("{variant}: aborted"))?;
        ensure(
            res.alice_raw_key.len() == n && res.alice_raw_key == res.bob_raw_key,
            || format!("{variant}: keys differ or wrong length"),
        )?;
        let expected = n as f64 / (n + 2 * delta) as f64;
        ensure(res.sifted_fraction() == expected, || {
            format!(
                "{variant}: sifted fraction {} vs {expected}",
                res.sifted_fraction()
            )
        })?;
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!(
        "both variants: 256-bit keys identical, no error, sifted fraction 256/384; {:.1?}",
        start.elapsed()
    ))
}

fn detectability_floor() -> Outcome {
    let mut floor = (f64::INFINITY, String::new());
    for variant in Variant::ALL {
        for &kind in table_rows(variant) {
            let e_a = exact_error_rates(variant, &Attack::new(kind))
                .map_err(|e| e.to_string())?
                .e_a;
            if e_a < floor.0 {
                floor = (e_a, format!("{variant} {kind}"));
            }
        }
    }
    ensure(floor.0 >= 0.125 - EXACT, || {
        format!("{} gives e_A = {}", floor.1, floor.0)
    })?;
    Ok(format!("min e_A = {:.4} ({})", floor.0, floor.1))
}

fn overlap_structure() -> Outcome {
    for variant in Variant::ALL {
        let table = overlap_table(variant);
        let states = LogicalState::all(variant);
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let want = match (a.spatial == b.spatial, a.key_bit == b.key_bit) {
                    (true, true) => Some(1.0),
                    (true, false) => Some(0.0),
                    (false, true) => Some(0.5),
                    (false, false) => None,
                };
                if let Some(w) = want {
                    ensure((table[i][j] - w).abs() <= FID, || {
                        format!("{variant} |<{a}|{b}>| = {}", table[i][j])
                    })?;
                }
            }
        }
    }
    Ok("same basis, different bit: 0; different basis, same bit: 1/2 (both variants)".into())
}

fn entanglement_swapping() -> Outcome {
    let phi0 = build_codeword(LogicalState::new(
        Variant::Dephasing,
        SpatialBasis::Crossing,
        false,
    ));
    let pairs = SpatialBasis::Neighboring.pairs();
    let mut p_phi = 0.0;
    for b in [BellOutcome::PhiPlus, BellOutcome::PhiMinus] {
        p_phi += phi0
            .bell_projection(pairs[0].0, pairs[0].1, b)
            .map_err(|e| e.to_string())?
            .0;
    }
    ensure((p_phi - 0.5).abs() <= FID, || {
        format!("P(phi+-) on photons 1,2 = {p_phi}")
    })?;
    for first in BellOutcome::ALL {
        for second in BellOutcome::ALL {
            let p = bell_product(pairs, first, second).fidelity(&phi0).unwrap();
            let want = if first == second { 0.25 } else { 0.0 };
            ensure((p - want).abs() <= FID, || {
                format!("P({first},{second}) = {p}")
            })?;
        }
    }
    Ok(format!(
        "P(phi+-) = {p_phi:.12}; joint outcomes uniform 1/4 over matching Bell pairs"
    ))
}

fn cli_determinism() -> Outcome {
    let cases: &[&[&str]] = &[
        &[
            "run",
            "--variant",
            "dephasing",
            "--attack",
            "mre-x",
            "--p",
            "0.5",
            "--noise",
            "random",
            "--seed",
            "42",
        ],
        &[
            "run",
            "--variant",
            "rotation",
            "--n",
            "256",
            "--delta",
            "64",
            "--noise",
            "random",
            "--format",
            "csv",
            "--seed",
            "42",
        ],
        &[
            "sweep",
            "--variant",
            "dephasing",
            "--attack",
            "bell",
            "--trials",
            "1000",
            "--seed",
            "42",
        ],
        &["oracle", "--variant", "rotation", "--attack", "bell"],
        &["tables", "--format", "csv"],
    ];
    for args in cases {
        let a = common::run(args);
        let b = common::run(args);
        ensure(!a.stdout.is_empty(), || format!("{args:?}: no output"))?;
        ensure(
            a.stdout == b.stdout && a.status.code() == b.status.code(),
            || format!("{args:?} differs"),
        )?;
    }
    Ok(format!(
        "{} invocations byte-identical on repeat",
        cases.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("dephasing attack table", dephasing_table),
        ("rotation attack table", rotation_table),
        ("monte carlo convergence", monte_carlo),
        ("DFS invariance", dfs_invariance),
        ("honest end-to-end", honest_end_to_end),
        ("detectability floor", detectability_floor),
        ("overlap structure", overlap_structure),
        ("entanglement swapping", entanglement_swapping),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
