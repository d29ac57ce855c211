//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use mgonal::arith::{pow_rational, rational_from_ratio};
use mgonal::constructions::verify_grid;
use mgonal::escalator::{build_tree, EscalatorTree, TreeConfig};
use mgonal::lattice::{lattice_from_form, represents_equivalence_check, ShiftedDiagonalLattice};
use mgonal::localdensity::{
    classify_universality_pattern, density_p_dividing_n, jordan_decompose, local_density_checked,
    tau_gauss_sum, tau_lemma_value, verify_case_bounds, DensityMethod, UniversalityCase,
};
use mgonal::polygonal::{represented_set, Truant};
use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn full_tree(m: u64, bound: u64) -> Result<EscalatorTree, String> {
    let config = TreeConfig {
        bound,
        max_depth: 64,
        node_cap: 1_000_000,
    };
    build_tree(m, &config).map_err(|e| e.to_string())
}

fn gamma_is(m: u64, bound: u64, expected: u64) -> Outcome {
    let tree = full_tree(m, bound)?;
    if !tree.is_complete() {
        return Err(format!("tree for m={m} has non-universal frontier nodes"));
    }
    let gamma = tree.max_truant();
    if gamma != expected {
        return Err(format!("max truant {gamma}, expected {expected}"));
    }
    Ok(format!(
        "{} nodes, {} B-universal leaves, max truant {gamma}",
        tree.node_count(),
        tree.leaf_count()
    ))
}

/// The depth-4 tree shared by every m >= 12: node -> (truant, child range).
type ExpectedTree = (Vec<(Vec<u64>, u64)>, BTreeSet<Vec<u64>>);

fn expected_quaternary_tree() -> ExpectedTree {
    let internal = vec![
        (vec![], 1),
        (vec![1], 2),
        (vec![1, 1], 3),
        (vec![1, 2], 4),
        (vec![1, 1, 1], 4),
        (vec![1, 1, 2], 5),
        (vec![1, 1, 3], 6),
        (vec![1, 2, 2], 6),
        (vec![1, 2, 3], 7),
        (vec![1, 2, 4], 8),
    ];
    // Children of a depth-3 node [.., a3] with truant T are [.., a3, k] for a3 <= k <= T.
    let leaves = internal
        .iter()
        .filter(|(c, _)| c.len() == 3)
        .flat_map(|(c, t)| {
            (c[2]..=*t).map(move |k| {
                let mut v = c.clone();
                v.push(k);
                v
            })
        })
        .collect();
    (internal, leaves)
}

fn c6_depth_four_tree() -> Outcome {
    let (internal, leaves) = expected_quaternary_tree();
    if leaves.len() != 27 {
        return Err(format!("expected set has {} forms", leaves.len()));
    }
    let mut worst = Duration::ZERO;
    for m in [12, 15, 20, 101] {
        let start = Instant::now();
        let config = TreeConfig {
            bound: 100_000,
            max_depth: 4,
            node_cap: 1_000_000,
        };
        let tree = build_tree(m, &config).map_err(|e| e.to_string())?;
        worst = worst.max(start.elapsed());
        let got: BTreeSet<Vec<u64>> = tree
            .nodes_at_depth(4)
            .map(|n| n.form.coeffs().to_vec())
            .collect();
        if got != leaves {
            return Err(format!("m={m}: depth-4 set differs ({} forms)", got.len()));
        }
        for (coeffs, truant) in &internal {
            let node = tree
                .nodes()
                .iter()
                .find(|n| n.form.coeffs() == coeffs.as_slice())
                .ok_or_else(|| format!("m={m}: node {coeffs:?} missing"))?;
            if node.truant != Truant::Value(*truant) {
                return Err(format!(
                    "m={m}: {coeffs:?} has truant {:?}, expected {truant}",
                    node.truant
                ));
            }
        }
        if tree.node_count() != internal.len() + 27 {
            return Err(format!("m={m}: {} nodes", tree.node_count()));
        }
        if start.elapsed() > Duration::from_secs(5) {
            return Err(format!("m={m} took {:?}", start.elapsed()));
        }
    }
    Ok(format!(
        "27 forms and 10 internal truants for m=12,15,20,101; slowest {worst:.2?}"
    ))
}

fn c7_closed_forms() -> Outcome {
    // Expected value from the valuation, computed here by repeated division.
    let valuation = |mut n: u64, p: u64| {
        let mut k = 0i64;
        while n.is_multiple_of(p) {
            n /= p;
            k += 1;
        }
        k
    };
    let conductors = [
        3u64, 9, 27, 5, 25, 125, 15, 45, 75, 7, 49, 21, 63, 11, 121, 2, 6, 10, 14, 18, 30, 4, 8,
        16, 32, 12, 24, 20, 40, 48,
    ];
    let mut cases = 0;
    for &n in &conductors {
        for p in [2u64, 3, 5, 7, 11].into_iter().filter(|p| n % p == 0) {
            let k = valuation(n, p);
            let expected = match (p, k) {
                (2, 1) => rational_from_ratio(2, 1),
                (2, _) => pow_rational(2, -(k - 1)),
                _ => pow_rational(p, -k),
            };
            let got = density_p_dividing_n(p, n).map_err(|e| e.to_string())?;
            if got.value != expected || got.method != DensityMethod::ClosedForm {
                return Err(format!("p={p} N={n}: {} != {expected}", got.value));
            }
            cases += 1;
        }
    }
    if cases < 30 {
        return Err(format!("only {cases} cases"));
    }
    Ok(format!("{cases} (p, N) cases exact"))
}

fn c8_tau_lemmas() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    let mut worst = 0f64;
    // Conductors covering p | N for odd p, 2 ∥ N and 4 | N.
    let regimes: [(u64, &[u64]); 3] = [
        (2, &[2, 6, 10, 4, 12, 8, 40]),
        (3, &[3, 9, 6, 15]),
        (5, &[5, 25, 10, 15]),
    ];
    for (p, conductors) in regimes {
        for &n in conductors {
            for t in 1..=5u32 {
                let modulus = p.pow(t);
                for _ in 0..50 {
                    let alpha = loop {
                        let a = rng.gen_range(1..modulus.max(2) * 7);
                        if a % p != 0 {
                            break a;
                        }
                    };
                    let c = loop {
                        let c = rng.gen_range(1..1000i64);
                        if num_integer::gcd(c as u64, n) == 1 {
                            break c;
                        }
                    };
                    let value = tau_gauss_sum(p, t, alpha, n, c).map_err(|e| e.to_string())?;
                    let predicted = tau_lemma_value(p, t, n).ok_or("no prediction")?;
                    let err = (value - Complex64::new(predicted as f64, 0.0)).norm();
                    worst = worst.max(err);
                    if err >= 1e-9 {
                        return Err(format!(
                            "p={p} t={t} α={alpha} N={n} c={c}: {value} vs {predicted}"
                        ));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} sums, max error {worst:.1e}"))
}

fn c9_yang_vs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut compared = 0;
    let mut lattices = 0;
    while lattices < 100 {
        let n = if rng.gen_bool(0.5) { 4 } else { 6 };
        let gram: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=50)).collect();
        if gram.iter().fold(0, |g, &a| num_integer::gcd(g, a)) != 1 {
            continue;
        }
        lattices += 1;
        let x = ShiftedDiagonalLattice::new(gram.clone(), 0, 1).map_err(|e| e.to_string())?;
        for _ in 0..20 {
            // With ν = 0 the admissible targets are 8Z.
            let h = BigRational::from_integer((8 * rng.gen_range(1..=250i64)).into());
            for p in [2u64, 3, 5, 7] {
                let check = local_density_checked(&x, &h, p)
                    .map_err(|e| format!("{gram:?} h={h} p={p}: {e}"))?;
                let oracle = check.oracle.as_ref().ok_or("missing oracle")?;
                if !matches!(
                    oracle.method,
                    DensityMethod::Oracle {
                        stabilized: true,
                        ..
                    }
                ) || !check.agrees()
                {
                    return Err(format!(
                        "{gram:?} h={h} p={p}: formula {} oracle {}",
                        check.formula.value, oracle.value
                    ));
                }
                compared += 1;
            }
        }
    }
    Ok(format!(
        "{lattices} lattices, {compared} exact formula/oracle matches"
    ))
}

fn classified_lattices() -> Vec<(u64, Vec<u64>)> {
    let mut out: Vec<(u64, Vec<u64>)> = vec![
        (5, vec![1, 1, 1, 25, 25, 25]),
        (3, vec![1, 2, 3, 9, 9, 9]),
        (3, vec![1, 1, 3, 3, 3, 3]),
        (7, vec![1, 3, 7, 49, 7, 7]),
        (5, vec![1, 1, 5, 5, 5, 5]),
        (2, vec![1, 1, 1, 4, 4, 4]),
        (2, vec![1, 3, 2, 8, 64, 128]),
        (2, vec![1, 2, 2, 4, 32, 32]),
        (2, vec![1, 2, 4, 8, 8, 256]),
        (2, vec![1, 1, 1, 1, 1, 1, 1, 1]),
        (2, vec![1, 1, 2, 8, 16, 1024]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for p in [2u64, 3, 5, 7] {
        let mut found = 0;
        while found < 10 {
            let n = if rng.gen_bool(0.5) { 6 } else { 8 };
            let gram: Vec<u64> = (0..n)
                .map(|_| rng.gen_range(1..=20) * p.pow(rng.gen_range(0..4)))
                .collect();
            let jd = jordan_decompose(p, &gram).unwrap();
            if classify_universality_pattern(&jd).unwrap() != UniversalityCase::Unclassified {
                out.push((p, gram));
                found += 1;
            }
        }
    }
    out
}

fn c10_case_bounds() -> Outcome {
    let sweep: Vec<BigRational> = (1..=200)
        .map(|k| BigRational::from_integer(k.into()))
        .collect();
    let mut rows = 0;
    let mut cases = BTreeSet::new();
    for (p, gram) in classified_lattices() {
        let jd = jordan_decompose(p, &gram).map_err(|e| e.to_string())?;
        cases.insert(format!(
            "{p}:{:?}",
            classify_universality_pattern(&jd).unwrap()
        ));
        for row in verify_case_bounds(&jd, &sweep).map_err(|e| e.to_string())? {
            if !row.pass {
                return Err(format!(
                    "p={p} {gram:?}: {} fails at h={:?} with {}",
                    row.check, row.h, row.value
                ));
            }
            rows += 1;
        }
    }
    Ok(format!(
        "{rows} bound rows over {} distinct cases, zero failures",
        cases.len()
    ))
}

fn c11_guy_grid() -> Outcome {
    let grid = verify_grid(6..=30, 5000).map_err(|e| e.to_string())?;
    if let Some(bad) = grid.iter().find(|g| !g.report.pass || !g.witness) {
        return Err(format!("{} witness={}", bad.report.summary(), bad.witness));
    }
    Ok(format!(
        "{} (m, ℓ) pairs miss exactly {{ℓ}} up to 5000; all witnesses hold",
        grid.len()
    ))
}

fn c12_equivalence() -> Outcome {
    let mut checked = 0;
    for m in [7u64, 12] {
        let config = TreeConfig {
            bound: 2000,
            max_depth: 3,
            node_cap: 100_000,
        };
        let tree = build_tree(m, &config).map_err(|e| e.to_string())?;
        // The root has no lattice; every other node is checked.
        for node in tree.nodes().iter().filter(|n| n.depth() > 0) {
            let set = represented_set(&node.form, 200).map_err(|e| e.to_string())?;
            lattice_from_form(&node.form).map_err(|e| e.to_string())?;
            for ell in 1..=200 {
                represents_equivalence_check(&node.form, ell, &set).map_err(|e| e.to_string())?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (node, ℓ) pairs agree"))
}

fn main() {
    let criteria = [
        Criterion {
            id: 1,
            name: "gamma_3 = 8",
            limit: Duration::from_secs(10),
            run: || gamma_is(3, 2000, 8),
        },
        Criterion {
            id: 2,
            name: "gamma_6 = 8",
            limit: Duration::from_secs(10),
            run: || gamma_is(6, 2000, 8),
        },
        Criterion {
            id: 3,
            name: "gamma_4 = 15",
            limit: Duration::from_secs(600),
            run: || gamma_is(4, 100_000, 15),
        },
        Criterion {
            id: 4,
            name: "gamma_8 = 60",
            limit: Duration::from_secs(600),
            run: || gamma_is(8, 100_000, 60),
        },
        Criterion {
            id: 5,
            name: "gamma_5 = 109",
            limit: Duration::from_secs(3600),
            run: || gamma_is(5, 100_000, 109),
        },
        Criterion {
            id: 6,
            name: "depth-4 tree for m >= 12",
            limit: Duration::from_secs(20),
            run: c6_depth_four_tree,
        },
        Criterion {
            id: 7,
            name: "closed-form densities",
            limit: Duration::from_secs(10),
            run: c7_closed_forms,
        },
        Criterion {
            id: 8,
            name: "Gauss sums follow the lemmas",
            limit: Duration::from_secs(60),
            run: c8_tau_lemmas,
        },
        Criterion {
            id: 9,
            name: "Yang formulas = residue counts",
            limit: Duration::from_secs(300),
            run: c9_yang_vs_oracle,
        },
        Criterion {
            id: 10,
            name: "case bounds",
            limit: Duration::from_secs(60),
            run: c10_case_bounds,
        },
        Criterion {
            id: 11,
            name: "Guy grid and gamma_m >= m-4",
            limit: Duration::from_secs(300),
            run: c11_guy_grid,
        },
        Criterion {
            id: 12,
            name: "form/lattice equivalence",
            limit: Duration::from_secs(300),
            run: c12_equivalence,
        },
    ];
    let mut failures = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.limit => Err(format!("{detail}; exceeded {:?}", c.limit)),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {}: {detail} ({elapsed:.2?})", c.id, c.name),
            Err(reason) => {
                failures += 1;
                println!("FAIL [{:>2}] {}: {reason} ({elapsed:.2?})", c.id, c.name);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
