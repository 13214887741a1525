//! Acceptance criteria, one line of output each. Runs as a plain binary so the
//! lines are always visible under `cargo test`.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::Instant;

use common::{brute_force_facets, euclidean_by_cayley_menger, random_mass, random_permutation, rng};
use krpoly::census::{run_census, SamplerParams};
use krpoly::combinatorics::{
    combinatorial_type, induces_polytope_automorphism, isometry_induced_automorphisms,
};
use krpoly::exact_math::{int, rat, Rational};
use krpoly::kr_norm::{extension_check, gauge_norm, transport_norm, MassVector};
use krpoly::metric_space::{
    euclidean_type_test, extremality_metric_test, parse_distance_matrix, random_metric, random_strict_metric,
    validate_metric, DistanceMatrix, SamplerMode,
};
use krpoly::polytope::{root_polytope, FundamentalPolytope};
use num_traits::Signed;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn root_hexagon() -> Outcome {
    let p = FundamentalPolytope::from_vrep(root_polytope(3).unwrap()).unwrap();
    let fv = p.f_vector().unwrap();
    check(fv.to_string() == "(6,6)", || format!("f-vector {fv}"))?;
    check(p.vrep.num_vertices() == 6, || format!("{} vertices", p.vrep.num_vertices()))?;
    let t = combinatorial_type(&DistanceMatrix::unit(3).unwrap()).unwrap();
    check(t.automorphism_order == 12, || format!("automorphism order {}", t.automorphism_order))?;
    Ok(format!("f-vector {fv}, 6 vertices, |Aut| = 12"))
}

fn root_cuboctahedron() -> Outcome {
    let p = FundamentalPolytope::from_vrep(root_polytope(4).unwrap()).unwrap();
    let fv = p.f_vector().unwrap();
    check(fv.to_string() == "(12,24,14)", || format!("f-vector {fv}"))?;
    let hist = p.incidence.facet_size_histogram();
    check(hist == BTreeMap::from([(3, 8), (4, 6)]), || format!("facet sizes {hist:?}"))?;
    Ok(format!("f-vector {fv}, facet sizes {hist:?}"))
}

fn weyl_containment() -> Outcome {
    let mut summary = Vec::new();
    for n in 3..=5usize {
        let d = DistanceMatrix::unit(n).unwrap();
        let perms = isometry_induced_automorphisms(&d).unwrap();
        let expected: usize = (1..=n).product();
        check(perms.len() == expected, || format!("n = {n}: {} isometries", perms.len()))?;
        let p = FundamentalPolytope::new(&d).unwrap();
        check(perms.iter().all(|perm| induces_polytope_automorphism(&p, perm)), || {
            format!("n = {n}: an isometry does not preserve incidence")
        })?;
        let t = combinatorial_type(&d).unwrap();
        check(t.automorphism_order.is_multiple_of(expected as u64), || {
            format!("n = {n}: |Aut| = {} not divisible by {expected}", t.automorphism_order)
        })?;
        summary.push(format!("n={n}: {} isometries, |Aut|={}", perms.len(), t.automorphism_order));
    }
    Ok(summary.join("; "))
}

/// A closure metric with one distance pushed past a triangle bound (or, for
/// some draws, perturbed within it).
fn perturbed(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> DistanceMatrix {
    let base = random_metric(n, rng.gen(), 20, SamplerMode::Closure).unwrap();
    let i = rng.gen_range(0..n);
    let j = (i + rng.gen_range(1..n)) % n;
    let k = (0..n).find(|&k| k != i && k != j).unwrap();
    let bound = base.get(i, k) + base.get(k, j);
    let bump = rat(rng.gen_range(-3..=6), rng.gen_range(1..=8));
    let value = (bound + bump).max(rat(1, 100));
    DistanceMatrix::from_fn(n, |a, b| {
        if (a, b) == (i.min(j), i.max(j)) {
            value.clone()
        } else {
            base.get(a, b).clone()
        }
    })
    .unwrap()
}

fn triangle_extremality_equivalence() -> Outcome {
    let mut rng = rng(1004);
    let (mut metrics, mut non_metrics) = (0, 0);
    for t in 0..600 {
        let n = 3 + t % 3;
        let d = if t % 2 == 0 {
            random_metric(n, rng.gen(), 20, SamplerMode::Closure).unwrap()
        } else {
            perturbed(&mut rng, n)
        };
        let axioms = validate_metric(&d).is_valid;
        let extremal = extremality_metric_test(&d).unwrap();
        check(axioms == extremal, || {
            format!("disagreement on {d:?}: axioms {axioms}, extremality {extremal}")
        })?;
        if axioms {
            metrics += 1;
        } else {
            non_metrics += 1;
        }
    }
    check(non_metrics >= 100, || format!("only {non_metrics} non-metrics generated"))?;
    Ok(format!("600 matrices agree ({metrics} metrics, {non_metrics} non-metrics)"))
}

fn norm_oracle() -> Outcome {
    let mut rng = rng(1005);
    for n in 3..=5 {
        let d = random_metric(n, rng.gen(), 50, SamplerMode::Closure).unwrap();
        let h = FundamentalPolytope::new(&d).unwrap().hrep;
        for _ in 0..100 {
            let v = MassVector::new(random_mass(&mut rng, n)).unwrap();
            let lp = transport_norm(&d, &v).unwrap();
            let gauge = gauge_norm(&h, &v).unwrap();
            check(lp == gauge, || format!("n = {n}, v = {v:?}: LP {lp} vs gauge {gauge}"))?;
        }
    }
    Ok("300 vectors: transport LP = gauge exactly".into())
}

fn extension_property() -> Outcome {
    let mut rng = rng(1006);
    let mut pairs = 0;
    for t in 0..24 {
        let n = 2 + t % 4;
        let d = random_metric(n, rng.gen(), 30, SamplerMode::Closure).unwrap();
        for x in 0..n {
            for y in (0..n).filter(|&y| y != x) {
                let value = transport_norm(&d, &MassVector::dipole(n, x, y)).unwrap();
                check(value == *d.get(x, y), || format!("{d:?}: ({x},{y}) gives {value}"))?;
                pairs += 1;
            }
        }
        check(extension_check(&d).unwrap(), || format!("extension check fails on {d:?}"))?;
    }
    Ok(format!("24 metrics, {pairs} ordered pairs"))
}

fn unit_closed_form() -> Outcome {
    let mut rng = rng(1007);
    for t in 0..120 {
        let n = 2 + t % 4;
        let d = DistanceMatrix::unit(n).unwrap();
        let v = random_mass(&mut rng, n);
        let half_l1: Rational = v.iter().map(|x| x.abs()).sum::<Rational>() / int(2);
        let value = transport_norm(&d, &MassVector::new(v.clone()).unwrap()).unwrap();
        check(value == half_l1, || format!("v = {v:?}: {value} vs ½ℓ¹ = {half_l1}"))?;
    }
    Ok("120 vectors: norm = ½·ℓ¹".into())
}

fn similarity_invariance() -> Outcome {
    let mut rng = rng(1008);
    for t in 0..120 {
        let n = 3 + t % 3;
        let mode = if t % 2 == 0 { SamplerMode::Closure } else { SamplerMode::Euclidean };
        let d = random_metric(n, rng.gen(), 10, mode).unwrap();
        let base = combinatorial_type(&d).unwrap().certificate;
        let relabeled = d.permuted(&random_permutation(&mut rng, n)).unwrap();
        let scaled = d.scaled(&rat(rng.gen_range(1..=40), rng.gen_range(1..=40))).unwrap();
        check(combinatorial_type(&relabeled).unwrap().certificate == base, || {
            format!("relabeling changed {d:?}")
        })?;
        check(combinatorial_type(&scaled).unwrap().certificate == base, || format!("scaling changed {d:?}"))?;
    }
    Ok("120 trials, relabeling and scaling".into())
}

fn facet_oracle() -> Outcome {
    let mut rng = rng(1009);
    let mut count = 0;
    for t in 0..90 {
        let n = 2 + t % 3;
        let d = match t % 3 {
            0 => random_metric(n, rng.gen(), 12, SamplerMode::Closure).unwrap(),
            1 => random_metric(n, rng.gen(), 3, SamplerMode::Euclidean).unwrap(),
            _ => DistanceMatrix::from_fn(n, |_, _| rat(rng.gen_range(1..=9), rng.gen_range(1..=3))).unwrap(),
        };
        let p = FundamentalPolytope::new(&d).unwrap();
        let points: Vec<Vec<Rational>> = p.vrep.points.iter().map(|q| q.coords.clone()).collect();
        let dd: BTreeSet<Vec<Rational>> = p.hrep.facets.iter().map(|f| f.normal.clone()).collect();
        let brute = brute_force_facets(&points);
        check(dd == brute, || format!("{d:?}: {} vs {} facets", dd.len(), brute.len()))?;
        count += 1;
    }
    for n in 2..=4 {
        let v = root_polytope(n).unwrap();
        let points: Vec<Vec<Rational>> = v.points.iter().map(|q| q.coords.clone()).collect();
        let dd: BTreeSet<Vec<Rational>> =
            FundamentalPolytope::from_vrep(v).unwrap().hrep.facets.into_iter().map(|f| f.normal).collect();
        check(dd == brute_force_facets(&points), || format!("root polytope n = {n}"))?;
        count += 1;
    }
    Ok(format!("{count} polytopes with n ≤ 4, identical facet sets"))
}

fn census_determinism() -> Outcome {
    let params = SamplerParams { mode: SamplerMode::Closure, denominator_bound: 100, strict: true };
    let a = run_census(3, 100, 1, &params, 1).unwrap();
    let b = run_census(3, 100, 1, &params, 4).unwrap();
    check(a.to_jsonl().unwrap() == b.to_jsonl().unwrap(), || "JSONL differs between runs".into())?;
    check(a.to_snapshot().unwrap() == b.to_snapshot().unwrap(), || "snapshot differs between runs".into())?;
    check(a.num_types() == 1, || format!("{} types", a.num_types()))?;
    let record = a.records.values().next().unwrap();
    check(record.f_vector == vec![6, 6], || format!("f-vector {:?}", record.f_vector))?;
    let c = run_census(4, 30, 5, &SamplerParams::default(), 2).unwrap();
    let c2 = run_census(4, 30, 5, &SamplerParams::default(), 2).unwrap();
    check(c.to_jsonl().unwrap() == c2.to_jsonl().unwrap(), || "n = 4 JSONL differs".into())?;
    Ok("byte-identical registries; n=3 strict census: 1 type, (6,6)".into())
}

fn euclidean_test() -> Outcome {
    for n in 2..=6 {
        let d = DistanceMatrix::unit(n).unwrap();
        check(euclidean_type_test(&d).unwrap(), || format!("unit metric n = {n} rejected"))?;
        check(euclidean_by_cayley_menger(&d), || format!("oracle rejects unit n = {n}"))?;
    }
    let star = parse_distance_matrix("0 1 1 1\n1 0 2 2\n1 2 0 2\n1 2 2 0").unwrap();
    check(!euclidean_type_test(&star).unwrap(), || "star accepted".into())?;
    check(!euclidean_by_cayley_menger(&star), || "oracle accepts star".into())?;
    let mut rng = rng(1011);
    for _ in 0..60 {
        let n = rng.gen_range(3..=5);
        let d = random_strict_metric(n, rng.gen(), 5, SamplerMode::Euclidean).unwrap();
        let (a, b) = (euclidean_type_test(&d).unwrap(), euclidean_by_cayley_menger(&d));
        check(a == b, || format!("{d:?}: Schoenberg {a} vs Cayley–Menger {b}"))?;
    }
    Ok("unit metrics embed, K1,3 star does not; 60 random cross-checks".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("root polytope n=3: hexagon, |Aut| = 12", root_hexagon),
        ("root polytope n=4: (12,24,14), 8 triangles + 6 squares", root_cuboctahedron),
        ("Weyl containment n = 3,4,5", weyl_containment),
        ("triangle inequality ⇔ no interior generator", triangle_extremality_equivalence),
        ("transport LP = polytope gauge", norm_oracle),
        ("norm extends the metric", extension_property),
        ("unit metric norm = ½·ℓ¹", unit_closed_form),
        ("certificate invariant under relabeling and scaling", similarity_invariance),
        ("double description = exhaustive facet search", facet_oracle),
        ("census determinism and n=3 genericity", census_determinism),
        ("Euclidean embeddability test", euclidean_test),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{secs:.1}s]", i + 1);
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
