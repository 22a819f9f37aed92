mod common;

use num_traits::Zero;
use tdpmc::oracle::{brute_force, enumerate_extensions, DEFAULT_EXTENSION_CAP};
use tdpmc::proj::{ProjError, Strategy};
use tdpmc::sat::reachable_rows;
use tdpmc::{solve, BigCount, BigSolution, Config, Instance, PipelineError};

const CAP: u64 = 1 << 12;

fn config(strategy: Strategy) -> Config {
    Config {
        table_cap: CAP,
        strategy,
        skip_empty_projection: false,
        ..Config::default()
    }
}

/// Solves, treating a table-cap refusal as "skip this instance".
fn try_solve(inst: &Instance, config: &Config) -> Option<BigSolution> {
    match solve::<BigCount>(inst, config) {
        Ok(s) => Some(s),
        Err(e) if e.is_guard() => None,
        Err(PipelineError::Proj(e)) if matches!(e.source, ProjError::TooManyOrigins { .. }) => None,
        Err(e) => panic!("unexpected error: {e}"),
    }
}

#[test]
fn counts_agree_with_brute_force() {
    let mut solved = 0;
    for inst in common::oracle_suite(7, 80) {
        let Some(s) = try_solve(&inst, &config(Strategy::Transform)) else {
            continue;
        };
        solved += 1;
        let oracle = brute_force(&inst).unwrap();
        assert_eq!(s.count, oracle.projected_count, "{}", inst.to_dimacs());
        assert_eq!(s.satisfiable, !oracle.model_count.is_zero());
    }
    assert!(solved >= 40, "only {solved} instances fit the cap");
}

#[test]
fn strategies_agree() {
    // Term-by-term evaluation is exponential in the origins, so keep buckets small.
    let small = |strategy| Config {
        table_cap: 1 << 6,
        ..config(strategy)
    };
    let mut compared = 0;
    for inst in common::oracle_suite(11, 60) {
        let (Some(a), Some(b)) = (
            try_solve(&inst, &small(Strategy::Transform)),
            try_solve(&inst, &small(Strategy::Recurrence)),
        ) else {
            continue;
        };
        compared += 1;
        assert_eq!(a.count, b.count);
        assert_eq!(a.proj, b.proj);
    }
    assert!(compared >= 20, "only {compared} instances compared");
}

#[test]
fn machine_counters_agree_with_bigint() {
    for inst in common::oracle_suite(13, 40) {
        let Some(big) = try_solve(&inst, &config(Strategy::Transform)) else {
            continue;
        };
        let small = solve::<i64>(&inst, &config(Strategy::Transform)).unwrap();
        assert_eq!(BigCount::from(small.count), big.count);
    }
}

#[test]
fn stored_counts_are_intersection_sizes() {
    for inst in common::oracle_suite(17, 60) {
        let Some(s) = try_solve(&inst, &config(Strategy::Transform)) else {
            continue;
        };
        let ntd = &s.decomposition.ntd;
        let ext = enumerate_extensions(&inst, &s.purged, ntd, DEFAULT_EXTENSION_CAP).unwrap();
        let proj = s.proj.as_ref().unwrap();
        for (node, table) in proj.iter() {
            for (sigma, c) in table.entries() {
                assert_eq!(
                    *c,
                    BigCount::from(ext.intersection_size(node, &sigma.rows)),
                    "node {node} rows {:?}",
                    sigma.rows
                );
            }
        }
        let oracle = brute_force(&inst).unwrap();
        let root_projected = ext.root_projected().len();
        if inst.free_projection_vars() == 0 {
            assert_eq!(BigCount::from(root_projected), oracle.projected_count);
            assert_eq!(BigCount::from(ext.root_models().len()), oracle.model_count);
        }
    }
}

#[test]
fn purge_keeps_exactly_the_rows_with_models() {
    for inst in common::oracle_suite(19, 60) {
        let Some(s) = try_solve(&inst, &config(Strategy::Transform)) else {
            continue;
        };
        let ntd = &s.decomposition.ntd;
        let ext = enumerate_extensions(&inst, &s.sat, ntd, DEFAULT_EXTENSION_CAP).unwrap();
        let keep = reachable_rows(&s.sat, ntd);
        for (node, _) in s.sat.iter() {
            for (row, &k) in keep[node].iter().enumerate() {
                assert_eq!(k, ext.extends_to_model(node, row));
            }
        }
        for (node, table) in s.purged.iter() {
            let kept = keep[node].iter().filter(|&&k| k).count();
            assert_eq!(table.len(), kept);
            for row in 0..table.len() {
                assert!(s.sat[node].find(table.rows()[row]).is_some());
                if ntd.node(node).kind != tdpmc::decomposition::NodeKind::Leaf {
                    assert!(!table.origins(row).is_empty());
                }
            }
        }
    }
}

#[test]
fn full_projection_is_model_counting() {
    for inst in common::oracle_suite(23, 40) {
        let all = inst.with_projection(inst.formula().vars()).unwrap();
        let s =
            try_solve(&all, &config(Strategy::Transform)).expect("singleton buckets always fit");
        assert_eq!(s.count, brute_force(&all).unwrap().model_count);
    }
}

#[test]
fn disjoint_projection_counts_free_variables() {
    for inst in common::oracle_suite(29, 40) {
        let used = inst.formula().vars();
        let free: Vec<_> = inst
            .formula()
            .declared_vars()
            .filter(|v| !used.contains(v))
            .collect();
        let disjoint = inst.with_projection(free.clone()).unwrap();
        let expected = if brute_force(&inst).unwrap().model_count.is_zero() {
            BigCount::zero()
        } else {
            BigCount::from(1) << free.len()
        };
        let skipped = solve::<BigCount>(&disjoint, &Config::default()).unwrap();
        assert_eq!(skipped.count, expected);
        assert!(skipped.proj.is_none());
        if let Some(s) = try_solve(&disjoint, &config(Strategy::Transform)) {
            assert_eq!(s.count, expected);
        }
    }
}

#[test]
fn decision_agrees_with_count() {
    for inst in common::oracle_suite(31, 200) {
        let (_, satisfiable, _) = tdpmc::decide(&inst, &Config::default()).unwrap();
        match solve::<BigCount>(&inst, &Config::default()) {
            Ok(s) => assert_eq!(satisfiable, !s.count.is_zero()),
            Err(e) => assert!(e.is_guard(), "{e}"),
        }
    }
}
