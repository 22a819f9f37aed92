#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdpmc::{Clause, Formula, Instance, Lit, Var};

pub const RUNNING: &str = include_str!("../fixtures/running.cnf");
pub const RUNNING_TD: &str = include_str!("../fixtures/running.td");
pub const RUNNING_NICE_TD: &str = include_str!("../fixtures/running_nice.td");
pub const UNSAT: &str = include_str!("../fixtures/unsat.cnf");

/// How the projection of a random instance is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind {
    /// Each variable with probability 1/2.
    Half,
    /// One to three variables.
    Few,
    /// Every variable of the formula.
    All,
    /// Only declared variables that no clause mentions, possibly none.
    Disjoint,
}

pub const KINDS: [ProjectionKind; 4] = [
    ProjectionKind::Half,
    ProjectionKind::Few,
    ProjectionKind::All,
    ProjectionKind::Disjoint,
];

/// Random 3-CNF with `vars` declared variables and `clauses` clauses.
pub fn random_3cnf(rng: &mut ChaCha8Rng, vars: u32, clauses: usize) -> Formula {
    let ids: Vec<u32> = (1..=vars).collect();
    let cs = (0..clauses).map(|_| {
        let picked: Vec<u32> = ids
            .choose_multiple(rng, 3.min(vars as usize))
            .copied()
            .collect();
        Clause::new(
            picked
                .into_iter()
                .map(|v| Lit::new(Var::new(v), rng.gen_bool(0.5))),
        )
    });
    Formula::new(vars, cs.collect::<Vec<_>>())
}

pub fn random_projection(
    rng: &mut ChaCha8Rng,
    formula: &Formula,
    kind: ProjectionKind,
) -> Vec<Var> {
    let used = formula.vars();
    let declared: Vec<Var> = formula.declared_vars().collect();
    match kind {
        ProjectionKind::Half => declared.into_iter().filter(|_| rng.gen_bool(0.5)).collect(),
        ProjectionKind::Few => {
            let k = rng.gen_range(1..=3);
            declared.choose_multiple(rng, k).copied().collect()
        }
        ProjectionKind::All => used.into_iter().collect(),
        ProjectionKind::Disjoint => declared.into_iter().filter(|v| !used.contains(v)).collect(),
    }
}

/// The seeded suite: 5–15 variables, 5–40 clauses, projection kinds in
/// rotation.
pub fn oracle_suite(seed: u64, size: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|i| {
            let vars = rng.gen_range(5..=15);
            let clauses = rng.gen_range(5..=40);
            let f = random_3cnf(&mut rng, vars, clauses);
            let p = random_projection(&mut rng, &f, KINDS[i % KINDS.len()]);
            Instance::new(f, p).unwrap()
        })
        .collect()
}

/// Width-2 chain: clauses over consecutive triples.
pub fn chain_formula(n: u32) -> Instance {
    let mut clauses = Vec::new();
    for i in 1..=n.saturating_sub(2) {
        clauses.push(Clause::from_dimacs(&[
            i as i64,
            -(i as i64 + 1),
            i as i64 + 2,
        ]));
        clauses.push(Clause::from_dimacs(&[
            -(i as i64),
            i as i64 + 1,
            -(i as i64 + 2),
        ]));
    }
    let f = Formula::new(n, clauses);
    let p: Vec<Var> = (1..=n).filter(|v| v % 2 == 1).map(Var::new).collect();
    Instance::new(f, p).unwrap()
}
