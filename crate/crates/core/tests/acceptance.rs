//! Acceptance run: one pass/fail line per criterion, non-zero exit on any
//! failure.

mod common;

use std::time::{Duration, Instant};

use linkage_area::config::Tolerances;
use linkage_area::critical::{
    enumerate_critical_pnd, enumerate_critical_three_chain, euler_sum, hessian_zero_parameters_222, match_numeric,
    ChainStatus, ConcyclicShape, CriticalRecord, PolygonWithDiagonals,
};
use linkage_area::geom::{enumerate_cyclic, Configuration};
use linkage_area::graph::{is_partial_two_tree, sp_decompose, Linkage};
use linkage_area::morse::{cyclic_index, lagrange_det_222, lagrange_matrix_222};
use linkage_area::oracle::{
    constrained_inertia, continue_family, fd_check, find_critical_numeric, random_start, ContinuationSettings,
    EventKind, OracleError, Problem, SearchSettings,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn area_problem(l: &Linkage) -> Problem {
    Problem::area(&l.graph, l.gamma.as_ref().unwrap()).unwrap()
}

fn search(n_seeds: usize) -> SearchSettings {
    SearchSettings { n_seeds, ..Default::default() }
}

fn polygon_indices() -> Outcome {
    let mut r = rng(1);
    let tol = Tolerances::default();
    let mut checked = 0;
    for k in 0..50 {
        let n = [4, 5, 6][k % 3];
        let l = common::generic_polygon(&mut r, n);
        let lengths: Vec<f64> = l.graph.edges().iter().map(|e| e.length).collect();
        let problem = area_problem(&l);
        for p in enumerate_cyclic(&lengths).map_err(|e| e.to_string())?.polygons {
            let mut c = Configuration::new();
            for (i, v) in p.vertices.iter().enumerate() {
                c.insert(format!("v{i}"), *v);
            }
            let mu = cyclic_index(&p).map_err(|e| format!("polygon {k}: {e}"))?;
            let t = constrained_inertia(&problem, &c, &tol).map_err(|e| format!("polygon {k}: {e}"))?;
            if mu != t.negative as i64 || t.zero != 0 {
                return Err(format!("polygon {k} {lengths:?}: formula {mu}, oracle ({}, {})", t.negative, t.zero));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} cyclic configurations on 50 polygons"))
}

fn check_against_oracle(l: &Linkage, records: &[CriticalRecord], n_seeds: usize) -> Result<usize, String> {
    let found = find_critical_numeric(&area_problem(l), &search(n_seeds));
    let pnd = PolygonWithDiagonals::from_linkage(l).map_err(|e| e.to_string())?;
    let m = match_numeric(&pnd, records, &found, 1e-5);
    if !m.is_complete() {
        return Err(format!(
            "records {} oracle {}: unmatched records {:?}, unmatched oracle {:?}, index mismatches {:?}",
            records.len(),
            found.len(),
            m.unmatched_records(),
            m.unmatched_oracle,
            m.index_mismatches
        ));
    }
    Ok(found.len())
}

fn three_chain_completeness() -> Outcome {
    let mut r = rng(2);
    let mut total = 0;
    let mut aligned_nu = 0;
    for k in 0..25 {
        let l = common::generic_three_chain(&mut r, 2, 2, 2);
        let recs = enumerate_critical_three_chain(&l).map_err(|e| format!("instance {k}: {e}"))?;
        check_against_oracle(&l, &recs, 1000).map_err(|e| format!("instance {k}: {e}"))?;
        total += recs.len();
        aligned_nu += recs.iter().filter(|r| r.kind[0].is_aligned()).count();
    }
    Ok(format!("25 instances, {total} records ({aligned_nu} aligned) all matched with equal indices"))
}

fn sixteen_points() -> Outcome {
    let mut r = rng(3);
    for k in 0..5000 {
        let l = common::generic_three_chain(&mut r, 2, 2, 2);
        let Ok(recs) = enumerate_critical_three_chain(&l) else { continue };
        if recs.len() == 16 {
            let found = check_against_oracle(&l, &recs, 1000)?;
            if found != 16 {
                return Err(format!("oracle found {found} points"));
            }
            let lens: Vec<f64> = l.graph.edges().iter().map(|e| e.length).collect();
            return Ok(format!("sample {k}: {lens:.4?} has 16 verified critical points"));
        }
    }
    Err("no 16-point instance in 5000 samples".into())
}

fn bott_morse() -> Outcome {
    let l = Linkage::three_chain(&[1.0, 1.3], &[1.1, 0.9], &[0.62, 0.8, 0.7]).unwrap();
    let recs = enumerate_critical_three_chain(&l).map_err(|e| e.to_string())?;
    let circular = recs.iter().filter(|r| r.is_circular()).count();
    if circular == 0 {
        return Err("no circular record".into());
    }
    if recs.iter().any(|r| r.is_circular() != (r.manifold_dim == 1)) {
        return Err("circular records must be exactly the one-dimensional ones".into());
    }
    let found = check_against_oracle(&l, &recs, 1000)?;
    Ok(format!(
        "{circular} circular records with one zero eigenvalue, {} isolated aligned; {found} oracle points",
        recs.len() - circular
    ))
}

fn pitchfork() -> Outcome {
    let (a1, a2, b1, b2, c2) = (1.0, 1.3, 1.1, 0.9, 0.8);
    let l = Linkage::three_chain(&[a1, a2], &[b1, b2], &[0.62, c2]).unwrap();
    let edge = l.graph.find_edge("I", "Z1").unwrap();
    let d = continue_family(&l, edge, 0.62, 0.85, 25, &ContinuationSettings::default()).map_err(|e| e.to_string())?;
    let splits: Vec<_> = d.events.iter().filter(|e| e.is_max_to_min_split()).collect();
    if splits.len() != 1 {
        return Err(format!("{} max-to-min splits; events {:?}", splits.len(), d.events));
    }
    let predicted = hessian_zero_parameters_222(a1, a2, b1, b2, c2)
        .into_iter()
        .find(|z| z.1 == [1, 1] && z.2 == ConcyclicShape::Convex)
        .map(|z| z.0)
        .ok_or("no concyclic parameter")?;
    let hz = d
        .events
        .iter()
        .find(|e| e.kind == EventKind::HessianZero && e.branch == splits[0].branch)
        .ok_or("split without a Hessian zero")?;
    let err = (hz.parameter - predicted).abs();
    if err > 1e-6 {
        return Err(format!("Hessian zero at {} but concyclic at {predicted}", hz.parameter));
    }
    Ok(format!(
        "split at {:.9} vs concyclic {:.9} (|diff| {err:.1e}); {} pitchfork events in total, endpoint counts {:?}",
        hz.parameter,
        predicted,
        d.count(EventKind::PitchforkSplit),
        d.endpoint_counts
    ))
}

fn worked_example() -> Outcome {
    let l = common::worked_example();
    let recs = enumerate_critical_pnd(&l).map_err(|e| e.to_string())?;
    let rec = recs
        .iter()
        .find(|r| {
            let mut cells: Vec<(usize, i64)> =
                r.cells.iter().zip(&r.index.breakdown).map(|(c, b)| (c.len(), b.1)).collect();
            cells.sort();
            let chains: Vec<(usize, i64)> = r
                .kind
                .iter()
                .zip(&r.index.breakdown[r.cells.len()..])
                .map(|(k, b)| match k {
                    ChainStatus::Aligned { signs, .. } => (signs.len(), b.1),
                    ChainStatus::Free { .. } => (0, b.1),
                })
                .collect();
            r.index.index == 8 && cells == [(3, 0), (4, 1), (8, 5)] && chains == [(3, 1), (2, 1)]
        })
        .ok_or("no record with index 1+0+5+1+1")?;
    let t = constrained_inertia(&area_problem(&l), &rec.representative, &Tolerances::default())
        .map_err(|e| e.to_string())?;
    if t.negative != 8 || t.zero != 0 {
        return Err(format!("oracle inertia ({}, {}, {})", t.negative, t.zero, t.positive));
    }
    Ok(format!("breakdown {:?}, oracle inertia ({}, {}, {})", rec.index.breakdown, t.negative, t.zero, t.positive))
}

fn euler_bookkeeping() -> Outcome {
    let mut r = rng(7);
    let mut cases: Vec<Linkage> = (0..10).map(|_| common::generic_polygon(&mut r, 4)).collect();
    cases.extend((0..10).map(|_| common::generic_three_chain(&mut r, 2, 2, 2)));
    for (k, l) in cases.iter().enumerate() {
        let recs = enumerate_critical_pnd(l).map_err(|e| e.to_string())?;
        let s = euler_sum(&recs).map_err(|e| e.to_string())?;
        let found = find_critical_numeric(&area_problem(l), &search(300));
        let numeric: i64 = found.iter().map(|f| if f.inertia.negative % 2 == 0 { 1 } else { -1 }).sum();
        if s != 0 || numeric != 0 {
            return Err(format!("case {k}: symbolic {s}, oracle {numeric}"));
        }
    }
    Ok("10 quadrilaterals and 10 [2,2;2]: sums 0".into())
}

fn determinant() -> Outcome {
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let l: Vec<f64> = (0..6).map(|_| r.gen_range(0.1..3.0)).collect();
        let ang: Vec<f64> = (0..3).map(|_| r.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect();
        let m = lagrange_matrix_222(l[0], l[1], l[2], l[3], l[4], l[5], ang[0], ang[1], ang[2]);
        let closed = lagrange_det_222(l[0], l[1], l[2], l[3], l[4], l[5], ang[0], ang[1], ang[2]);
        let scale = 4.0 * l.iter().product::<f64>();
        worst = worst.max((m.determinant() - closed).abs() / scale);
    }
    if worst <= 1e-12 {
        Ok(format!("max relative error {worst:.2e} over 10^4 samples"))
    } else {
        Err(format!("max relative error {worst:.2e}"))
    }
}

fn finite_differences() -> Outcome {
    let classes: Vec<(&str, Linkage)> = vec![
        ("pentagon", Linkage::polygon(&[1.0, 1.3, 0.8, 1.1, 0.7]).unwrap()),
        ("[2,2;2]", Linkage::three_chain(&[1.0, 1.3], &[1.1, 0.9], &[0.62, 0.8]).unwrap()),
        ("[2,3;2]", Linkage::three_chain(&[1.0, 1.3], &[1.1, 0.9, 0.8], &[0.9, 0.8]).unwrap()),
        ("[2,2;3]", Linkage::three_chain(&[1.0, 1.3], &[1.1, 0.9], &[0.62, 0.8, 0.7]).unwrap()),
        ("three cells", common::worked_example()),
        (
            "double path",
            Linkage::from_json_file(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/double_path.json"))
                .unwrap(),
        ),
    ];
    let mut checked = 0;
    let mut k = 0u64;
    while checked < 100 {
        let (name, l) = &classes[checked % classes.len()];
        let problem = area_problem(l);
        k += 1;
        let Some(x) = random_start(&problem.chart, 9, k) else { continue };
        match fd_check(&problem, &problem.chart.configuration(&x)) {
            Ok(_) => checked += 1,
            Err(OracleError::CheckFailed(bad)) => return Err(format!("{name}: {bad:?}")),
            Err(e) => return Err(format!("{name}: {e}")),
        }
    }
    Ok(format!("100 configurations over {} graph classes", classes.len()))
}

fn recognition() -> Outcome {
    let mut r = rng(10);
    for k in 0..200 {
        let g = common::random_sp(&mut r, 5);
        if !is_partial_two_tree(&g) {
            return Err(format!("SP graph {k} rejected"));
        }
        let tree = sp_decompose(&g, "s", "t").map_err(|e| format!("SP graph {k}: {e}"))?;
        if !tree.reproduces(&g) {
            return Err(format!("SP graph {k}: tree does not reproduce the graph"));
        }
    }
    for k in 0..50 {
        let g = common::random_subdivided_k4(&mut r);
        if is_partial_two_tree(&g) {
            return Err(format!("subdivided K4 {k} accepted"));
        }
    }
    Ok("200 SP graphs accepted and rebuilt, 50 subdivided K4 rejected".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 polygon index agreement", polygon_indices, Duration::from_secs(300)),
        ("2 three-chain completeness", three_chain_completeness, Duration::from_secs(600)),
        ("3 sixteen critical points", sixteen_points, Duration::from_secs(900)),
        ("4 Bott-Morse structure", bott_morse, Duration::MAX),
        ("5 pitchfork", pitchfork, Duration::MAX),
        ("6 worked example index 8", worked_example, Duration::MAX),
        ("7 Euler bookkeeping", euler_bookkeeping, Duration::MAX),
        ("8 determinant identity", determinant, Duration::MAX),
        ("9 finite differences", finite_differences, Duration::MAX),
        ("10 recognition", recognition, Duration::from_secs(60)),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = run();
        let took = t.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > budget => Err(format!("{msg}; took {took:.1?}, budget {budget:.0?}")),
            o => o,
        };
        match outcome {
            Ok(msg) => println!("PASS criterion {name} ({took:.1?}): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} ({took:.1?}): {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
