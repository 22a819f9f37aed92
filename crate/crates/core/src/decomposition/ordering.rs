use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::PrimalGraph;
use crate::cnf::Var;

/// Greedy elimination heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heuristic {
    /// Eliminate the vertex whose neighbourhood needs the fewest fill edges.
    MinFill,
    /// Eliminate the vertex of smallest current degree.
    MinDegree,
}

impl Heuristic {
    pub fn name(self) -> &'static str {
        match self {
            Heuristic::MinFill => "min-fill",
            Heuristic::MinDegree => "min-degree",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min-fill" => Ok(Heuristic::MinFill),
            "min-degree" => Ok(Heuristic::MinDegree),
            other => Err(format!("unknown heuristic `{other}`")),
        }
    }
}

/// Computes a greedy elimination ordering of all vertices.
///
/// Ties on the heuristic score go to the smallest variable id. With a seed,
/// ties are instead broken by a seeded random permutation of the vertices,
/// so the output stays a deterministic function of `(g, heuristic, seed)`.
pub fn elimination_ordering(g: &PrimalGraph, heuristic: Heuristic, seed: Option<u64>) -> Vec<Var> {
    let mut adj: BTreeMap<Var, BTreeSet<Var>> = g.adjacency().clone();

    let tie: HashMap<Var, u64> = match seed {
        None => adj.keys().map(|&v| (v, u64::from(v.id()))).collect(),
        Some(seed) => {
            let mut vs: Vec<Var> = adj.keys().copied().collect();
            vs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            vs.into_iter()
                .enumerate()
                .map(|(i, v)| (v, i as u64))
                .collect()
        }
    };

    let score = |adj: &BTreeMap<Var, BTreeSet<Var>>, v: Var| -> usize {
        let n = &adj[&v];
        match heuristic {
            Heuristic::MinDegree => n.len(),
            Heuristic::MinFill => {
                let ns: Vec<Var> = n.iter().copied().collect();
                let mut missing = 0;
                for (i, a) in ns.iter().enumerate() {
                    let na = &adj[a];
                    missing += ns[i + 1..].iter().filter(|b| !na.contains(b)).count();
                }
                missing
            }
        }
    };

    let mut queue: BTreeSet<(usize, u64, Var)> = BTreeSet::new();
    let mut current: HashMap<Var, usize> = HashMap::new();
    for &v in adj.keys() {
        let s = score(&adj, v);
        current.insert(v, s);
        queue.insert((s, tie[&v], v));
    }

    let mut order = Vec::with_capacity(adj.len());
    while let Some((_, _, v)) = queue.pop_first() {
        let neighbors: Vec<Var> = adj[&v].iter().copied().collect();
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                adj.get_mut(&a).unwrap().insert(b);
                adj.get_mut(&b).unwrap().insert(a);
            }
        }
        for a in &neighbors {
            adj.get_mut(a).unwrap().remove(&v);
        }
        adj.remove(&v);
        current.remove(&v);
        order.push(v);

        let mut affected: BTreeSet<Var> = neighbors.iter().copied().collect();
        if heuristic == Heuristic::MinFill {
            for a in &neighbors {
                affected.extend(adj[a].iter().copied());
            }
        }
        for w in affected {
            let old = current[&w];
            let new = score(&adj, w);
            if old != new {
                queue.remove(&(old, tie[&w], w));
                queue.insert((new, tie[&w], w));
                current.insert(w, new);
            }
        }
    }
    order
}

/// Width of the decomposition induced by eliminating in `order`: the largest
/// neighbourhood met during elimination.
pub fn induced_width(g: &PrimalGraph, order: &[Var]) -> usize {
    let mut adj: BTreeMap<Var, BTreeSet<Var>> = g.adjacency().clone();
    let mut width = 0;
    for v in order {
        let neighbors: Vec<Var> = adj[v].iter().copied().collect();
        width = width.max(neighbors.len());
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                adj.get_mut(&a).unwrap().insert(b);
                adj.get_mut(&b).unwrap().insert(a);
            }
        }
        for a in &neighbors {
            adj.get_mut(a).unwrap().remove(v);
        }
        adj.remove(v);
    }
    width
}
