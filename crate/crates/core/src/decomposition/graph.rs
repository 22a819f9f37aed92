use std::collections::{BTreeMap, BTreeSet};

use crate::cnf::{Formula, Var};

/// The primal graph of a formula: variables joined by an edge whenever they
/// share a clause.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrimalGraph {
    adjacency: BTreeMap<Var, BTreeSet<Var>>,
}

impl PrimalGraph {
    pub fn new() -> Self {
        PrimalGraph::default()
    }

    pub fn from_formula(formula: &Formula) -> Self {
        let mut g = PrimalGraph::new();
        for c in formula.clauses() {
            let vars: Vec<Var> = c.vars().collect();
            for (i, &u) in vars.iter().enumerate() {
                g.add_vertex(u);
                for &v in &vars[i + 1..] {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    pub fn add_vertex(&mut self, v: Var) {
        self.adjacency.entry(v).or_default();
    }

    /// Self-loops are ignored.
    pub fn add_edge(&mut self, u: Var, v: Var) {
        if u == v {
            self.add_vertex(u);
            return;
        }
        self.adjacency.entry(u).or_default().insert(v);
        self.adjacency.entry(v).or_default().insert(u);
    }

    pub fn vertices(&self) -> impl Iterator<Item = Var> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: Var) -> impl Iterator<Item = Var> + '_ {
        self.adjacency.get(&v).into_iter().flatten().copied()
    }

    pub fn degree(&self, v: Var) -> usize {
        self.adjacency.get(&v).map_or(0, BTreeSet::len)
    }

    pub fn has_edge(&self, u: Var, v: Var) -> bool {
        self.adjacency.get(&u).is_some_and(|n| n.contains(&v))
    }

    /// Each edge once, as `(smaller, larger)`.
    pub fn edges(&self) -> impl Iterator<Item = (Var, Var)> + '_ {
        self.adjacency
            .iter()
            .flat_map(|(&u, n)| n.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn num_edges(&self) -> usize {
        self.edges().count()
    }

    pub(crate) fn adjacency(&self) -> &BTreeMap<Var, BTreeSet<Var>> {
        &self.adjacency
    }
}
