use proptest::prelude::*;
use tdpmc::decomposition::{
    elimination_ordering, induced_width, make_nice, read_td, write_td, Heuristic, PrimalGraph,
    TreeDecomposition,
};
use tdpmc::oracle::brute_force_with_models;
use tdpmc::{
    parse_dimacs, solve, BigCount, Clause, Config, Formula, Instance, Interpretation, Var,
};

fn formula_strategy(max_vars: u32, max_clauses: usize) -> impl Strategy<Value = Formula> {
    (1..=max_vars).prop_flat_map(move |n| {
        let lit = (1..=n as i64, any::<bool>()).prop_map(|(v, neg)| if neg { -v } else { v });
        prop::collection::vec(prop::collection::vec(lit, 0..4), 0..=max_clauses).prop_map(
            move |cs| {
                Formula::new(
                    n,
                    cs.iter()
                        .map(|c| Clause::from_dimacs(c))
                        .collect::<Vec<_>>(),
                )
            },
        )
    })
}

fn instance_strategy(max_vars: u32, max_clauses: usize) -> impl Strategy<Value = Instance> {
    formula_strategy(max_vars, max_clauses).prop_flat_map(|f| {
        let n = f.num_vars() as usize;
        prop::collection::vec(any::<bool>(), n).prop_map(move |mask| {
            let p = (1..=n as u32)
                .filter(|&i| mask[i as usize - 1])
                .map(Var::new);
            Instance::new(f.clone(), p).unwrap()
        })
    })
}

fn graph_strategy() -> impl Strategy<Value = PrimalGraph> {
    (1u32..=14).prop_flat_map(|n| {
        prop::collection::vec((1..=n, 1..=n), 0..30).prop_map(move |edges| {
            let mut g = PrimalGraph::new();
            for v in 1..=n {
                g.add_vertex(Var::new(v));
            }
            for (a, b) in edges {
                g.add_edge(Var::new(a), Var::new(b));
            }
            g
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dimacs_round_trip(inst in instance_strategy(8, 10)) {
        let again = parse_dimacs(&inst.to_dimacs()).unwrap();
        prop_assert_eq!(again, inst);
    }

    #[test]
    fn enumerated_models_are_models(inst in instance_strategy(8, 12)) {
        let r = brute_force_with_models(&inst, usize::MAX).unwrap();
        let models = r.models.unwrap();
        let vars: Vec<Var> = inst.formula().vars().into_iter().collect();
        let mut count = 0u64;
        for a in 0u32..1 << vars.len() {
            let interp = Interpretation::new(vars.iter().enumerate().filter(|(i, _)| a >> i & 1 == 1).map(|(_, &v)| v));
            if inst.formula().is_model(&interp) {
                count += 1;
                prop_assert!(models.contains(&interp));
            }
        }
        prop_assert_eq!(count as usize, models.len());
    }

    #[test]
    fn heuristic_decompositions_are_valid(g in graph_strategy(), seed in proptest::option::of(any::<u64>())) {
        for h in [Heuristic::MinFill, Heuristic::MinDegree] {
            let order = elimination_ordering(&g, h, seed);
            let td = TreeDecomposition::from_ordering(&g, &order, 14);
            prop_assert!(td.validate(&g).is_valid(), "{:?}", td.validate(&g));
            prop_assert!(td.width() <= induced_width(&g, &order));
            let ntd = make_nice(&td).unwrap();
            prop_assert!(ntd.check_structure().is_ok());
            prop_assert_eq!(ntd.width(), td.width());
            prop_assert!(ntd.to_td(14).validate(&g).is_valid());
            let again = read_td(&write_td(&td)).unwrap();
            prop_assert_eq!(again, td);
        }
    }

    #[test]
    fn counts_do_not_depend_on_the_decomposition(inst in instance_strategy(7, 10), seed in any::<u64>()) {
        let base = solve::<BigCount>(&inst, &Config::default()).unwrap().count;
        let r = brute_force_with_models(&inst, 0).unwrap();
        prop_assert_eq!(&base, &r.projected_count);
        for heuristic in [Heuristic::MinFill, Heuristic::MinDegree] {
            let config = Config { heuristic, seed: Some(seed), ..Config::default() };
            prop_assert_eq!(&solve::<BigCount>(&inst, &config).unwrap().count, &base);
        }
    }

    #[test]
    fn solving_is_deterministic(inst in instance_strategy(7, 10)) {
        let config = Config { seed: Some(3), ..Config::default() };
        let a = solve::<BigCount>(&inst, &config).unwrap();
        let b = solve::<BigCount>(&inst, &config).unwrap();
        prop_assert_eq!(a.decomposition.ntd, b.decomposition.ntd);
        prop_assert_eq!(a.sat, b.sat);
        prop_assert_eq!(a.proj, b.proj);
        prop_assert_eq!(a.count, b.count);
    }
}
