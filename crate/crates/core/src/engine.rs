//! Post-order driver that runs a table algorithm at every node of a nice
//! tree decomposition.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Index;

use thiserror::Error;

use crate::cnf::{Clause, Formula, Instance, Var};
use crate::decomposition::{NiceTreeDecomposition, NodeId, NodeKind};

/// One table per node, indexed by node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeTables<T> {
    tables: Vec<T>,
}

impl<T> NodeTables<T> {
    pub fn from_vec(tables: Vec<T>) -> Self {
        NodeTables { tables }
    }

    pub fn get(&self, node: NodeId) -> &T {
        &self.tables[node]
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &T)> {
        self.tables.iter().enumerate()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.tables
    }
}

impl<T> Index<NodeId> for NodeTables<T> {
    type Output = T;

    fn index(&self, node: NodeId) -> &T {
        &self.tables[node]
    }
}

/// Everything a table algorithm may look at while computing the table of one
/// node.
pub struct PassContext<'a, T, P> {
    pub node: NodeId,
    pub kind: NodeKind,
    pub bag: &'a [Var],
    /// `F_t`: clauses whose variables all lie in the bag.
    pub local_clauses: &'a [Clause],
    /// `P ∩ var(F) ∩ χ(t)`, sorted.
    pub projection: &'a [Var],
    /// Tables of the children, in the decomposition's child order.
    pub children: Vec<&'a T>,
    /// Tables of an earlier pass, if any.
    pub prev: Option<&'a NodeTables<P>>,
}

pub trait TableAlgorithm {
    type Table;
    /// Table type of the earlier pass this algorithm consumes.
    type Prev;
    type Error;

    fn compute(
        &self,
        ctx: &PassContext<'_, Self::Table, Self::Prev>,
    ) -> Result<Self::Table, Self::Error>;
}

#[derive(Debug, Error)]
#[error("node {node}: {source}")]
pub struct PassError<E: std::error::Error + 'static> {
    pub node: NodeId,
    #[source]
    pub source: E,
}

/// `F_t` for a single bag.
pub fn local_clauses(formula: &Formula, bag: &[Var]) -> Vec<Clause> {
    formula
        .clauses()
        .iter()
        .filter(|c| c.vars().all(|v| bag.binary_search(&v).is_ok()))
        .cloned()
        .collect()
}

/// `F_t` for every node, using a variable-to-clause index.
pub fn local_clauses_per_node(formula: &Formula, ntd: &NiceTreeDecomposition) -> Vec<Vec<Clause>> {
    let mut occurrences: BTreeMap<Var, Vec<usize>> = BTreeMap::new();
    let mut empty = Vec::new();
    for (i, c) in formula.clauses().iter().enumerate() {
        match c.vars().next() {
            Some(first) => occurrences.entry(first).or_default().push(i),
            None => empty.push(i),
        }
    }
    ntd.nodes()
        .iter()
        .map(|n| {
            let mut ids: Vec<usize> = empty.clone();
            for v in &n.bag {
                if let Some(cs) = occurrences.get(v) {
                    ids.extend(cs.iter().copied().filter(|&i| {
                        formula.clauses()[i]
                            .vars()
                            .all(|u| n.bag.binary_search(&u).is_ok())
                    }));
                }
            }
            ids.sort_unstable();
            ids.into_iter()
                .map(|i| formula.clauses()[i].clone())
                .collect()
        })
        .collect()
}

/// Runs `algorithm` over every node in post-order. Each node sees only its
/// own bag, clauses and projection, its children's finished tables and the
/// optional tables of an earlier pass.
pub fn run_pass<A>(
    instance: &Instance,
    ntd: &NiceTreeDecomposition,
    algorithm: &A,
    prev: Option<&NodeTables<A::Prev>>,
) -> Result<NodeTables<A::Table>, PassError<A::Error>>
where
    A: TableAlgorithm,
    A::Error: std::error::Error + 'static,
{
    let local = local_clauses_per_node(instance.formula(), ntd);
    // Projection variables outside var(F) are accounted for after the pass.
    let vars = instance.formula().vars();
    let mut tables: Vec<A::Table> = Vec::with_capacity(ntd.len());
    for id in ntd.post_order() {
        let node = ntd.node(id);
        let projection: Vec<Var> = node
            .bag
            .iter()
            .copied()
            .filter(|v| instance.projection().contains(v) && vars.contains(v))
            .collect();
        let ctx = PassContext {
            node: id,
            kind: node.kind,
            bag: &node.bag,
            local_clauses: &local[id],
            projection: &projection,
            children: node.children.iter().map(|&c| &tables[c]).collect(),
            prev,
        };
        let table = algorithm
            .compute(&ctx)
            .map_err(|source| PassError { node: id, source })?;
        tables.push(table);
    }
    Ok(NodeTables { tables })
}

impl<T: fmt::Display> fmt::Display for NodeTables<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (id, t) in self.iter() {
            writeln!(f, "t{}:", id + 1)?;
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
