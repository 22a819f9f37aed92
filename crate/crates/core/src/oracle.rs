//! Brute-force reference results for tests and the `--check-oracle` hook.
//!
//! [`brute_force`] only uses the formula types and its own clause evaluator.
//! [`enumerate_extensions`] walks the origin links of computed SAT tables and
//! materializes every extension, which is only sensible for small instances.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use thiserror::Error;

use crate::cnf::{Instance, Interpretation, Var};
use crate::decomposition::{NiceTreeDecomposition, NodeId};
use crate::engine::NodeTables;
use crate::sat::SatTable;

/// Largest `|var(F)|` [`brute_force`] will enumerate.
pub const MAX_BRUTE_FORCE_VARS: usize = 25;

/// Default number of models kept in [`OracleResult::models`].
pub const DEFAULT_MODEL_CAP: usize = 1024;

/// Default bound on the extensions materialized at any single node.
pub const DEFAULT_EXTENSION_CAP: usize = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{vars} variables exceed the brute-force limit of {limit}")]
    TooManyVariables { vars: usize, limit: usize },
    #[error("node {node} has more than {cap} extensions")]
    ExtensionCap { node: NodeId, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub model_count: BigInt,
    pub projected_count: BigInt,
    /// Models over `var(F)`, in enumeration order, if there are at most the
    /// requested number of them.
    pub models: Option<Vec<Interpretation>>,
}

/// Counts by enumerating all `2^|var(F)|` assignments. Both counts are
/// multiplied by `2^|P \ var(F)|` when the formula is satisfiable.
pub fn brute_force(instance: &Instance) -> Result<OracleResult, OracleError> {
    brute_force_with_models(instance, DEFAULT_MODEL_CAP)
}

pub fn brute_force_with_models(
    instance: &Instance,
    model_cap: usize,
) -> Result<OracleResult, OracleError> {
    let vars: Vec<Var> = instance.formula().vars().into_iter().collect();
    if vars.len() > MAX_BRUTE_FORCE_VARS {
        return Err(OracleError::TooManyVariables {
            vars: vars.len(),
            limit: MAX_BRUTE_FORCE_VARS,
        });
    }
    // Clauses as (positive, negative) masks over positions in `vars`.
    let clauses: Vec<(u32, u32)> = instance
        .formula()
        .clauses()
        .iter()
        .map(|c| {
            let mut pos = 0u32;
            let mut neg = 0u32;
            for l in c.lits() {
                let i = vars.binary_search(&l.var()).unwrap();
                if l.is_negated() {
                    neg |= 1 << i;
                } else {
                    pos |= 1 << i;
                }
            }
            (pos, neg)
        })
        .collect();
    let pmask: u32 = vars
        .iter()
        .enumerate()
        .filter(|(_, v)| instance.projection().contains(v))
        .fold(0, |m, (i, _)| m | 1 << i);

    let mut models = 0u64;
    let mut projected: HashSet<u32> = HashSet::new();
    let mut kept = Vec::new();
    for a in 0u32..(1u32 << vars.len()) {
        if clauses
            .iter()
            .all(|&(pos, neg)| a & pos != 0 || !a & neg != 0)
        {
            models += 1;
            projected.insert(a & pmask);
            if kept.len() <= model_cap {
                kept.push(Interpretation::new(
                    vars.iter()
                        .enumerate()
                        .filter(|(i, _)| a >> i & 1 == 1)
                        .map(|(_, &v)| v),
                ));
            }
        }
    }
    let scale = if models > 0 {
        BigInt::from(1) << instance.free_projection_vars()
    } else {
        BigInt::from(0)
    };
    Ok(OracleResult {
        model_count: BigInt::from(models) * &scale,
        projected_count: BigInt::from(projected.len()) * &scale,
        models: (kept.len() <= model_cap).then_some(kept),
    })
}

/// Interpretations of the extensions below every row of every node.
///
/// An extension below `(t, u)` picks one row per node of the subtree of `t`,
/// linked through origins. Its interpretation is the union of the row
/// interpretations, and distinct extensions below one row have distinct
/// interpretations over the subtree variables, so each extension is stored as
/// that interpretation (a bit mask over variable ids).
#[derive(Debug, Clone)]
pub struct ExtensionFamily {
    projection: u64,
    /// `all[t][u]`: every extension below `(t, u)`.
    all: Vec<Vec<Vec<u64>>>,
    /// `satisfiable[t][u]`: those contained in some extension below the root.
    satisfiable: Vec<Vec<Vec<u64>>>,
}

fn bit(v: Var) -> u64 {
    1 << (v.id() - 1)
}

fn to_interpretation(mask: u64) -> Interpretation {
    Interpretation::new(
        (0..64)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| Var::new(i + 1)),
    )
}

/// Materializes every extension below every row, bottom-up, then keeps the
/// satisfiable ones: those agreeing with some root extension on the subtree
/// variables. Works on raw or purged tables. Projections are taken onto
/// `P ∩ var(F)`.
///
/// Panics if a variable id exceeds 64.
pub fn enumerate_extensions(
    instance: &Instance,
    tables: &NodeTables<SatTable>,
    ntd: &NiceTreeDecomposition,
    cap: usize,
) -> Result<ExtensionFamily, OracleError> {
    assert!(
        instance.formula().num_vars() <= 64,
        "extension masks hold at most 64 variables"
    );
    let vars = instance.formula().vars();
    let projection = instance
        .projection()
        .iter()
        .filter(|v| vars.contains(v))
        .fold(0u64, |m, &v| m | bit(v));
    let mut all: Vec<Vec<Vec<u64>>> = Vec::with_capacity(ntd.len());
    let mut scope: Vec<u64> = Vec::with_capacity(ntd.len());
    for id in ntd.post_order() {
        let node = ntd.node(id);
        let table = &tables[id];
        let bag_mask = node.bag.iter().fold(0u64, |m, &v| m | bit(v));
        scope.push(node.children.iter().fold(bag_mask, |m, &c| m | scope[c]));
        let mut per_row = Vec::with_capacity(table.len());
        let mut total = 0usize;
        for row in 0..table.len() {
            let own = table
                .interpretation(row)
                .members()
                .iter()
                .fold(0u64, |m, &v| m | bit(v));
            let mut exts: BTreeSet<u64> = BTreeSet::new();
            for tuple in table.origins(row) {
                let mut partial = vec![own];
                for (pos, &r) in tuple.iter().enumerate() {
                    let below = &all[node.children[pos]][r as usize];
                    partial = partial
                        .iter()
                        .flat_map(|&p| below.iter().map(move |&b| p | b))
                        .collect();
                }
                exts.extend(partial);
            }
            total += exts.len();
            if total > cap {
                return Err(OracleError::ExtensionCap { node: id, cap });
            }
            per_row.push(exts.into_iter().collect::<Vec<u64>>());
        }
        all.push(per_row);
    }

    let root = ntd.root();
    let models: Vec<u64> = all[root].iter().flatten().copied().collect();
    let satisfiable = all
        .iter()
        .enumerate()
        .map(|(id, rows)| {
            let restricted: HashSet<u64> = models.iter().map(|m| m & scope[id]).collect();
            rows.iter()
                .map(|exts| {
                    exts.iter()
                        .copied()
                        .filter(|x| restricted.contains(x))
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(ExtensionFamily {
        projection,
        all,
        satisfiable,
    })
}

impl ExtensionFamily {
    /// `I(Ext_{≤t}({u}))`.
    pub fn extensions(&self, node: NodeId, row: usize) -> Vec<Interpretation> {
        self.all[node][row]
            .iter()
            .map(|&m| to_interpretation(m))
            .collect()
    }

    /// `I(PExt_{≤t}({u}))`.
    pub fn satisfiable(&self, node: NodeId, row: usize) -> Vec<Interpretation> {
        self.satisfiable[node][row]
            .iter()
            .map(|&m| to_interpretation(m))
            .collect()
    }

    /// `I_P(PExt_{≤t}({u}))` for every row `u` of `sigma`.
    pub fn projected(&self, node: NodeId, sigma: &[usize]) -> Vec<BTreeSet<Interpretation>> {
        sigma
            .iter()
            .map(|&r| {
                self.satisfiable[node][r]
                    .iter()
                    .map(|&m| to_interpretation(m & self.projection))
                    .collect()
            })
            .collect()
    }

    /// `|∩_{u∈σ} I_P(PExt_{≤t}({u}))|`.
    pub fn intersection_size(&self, node: NodeId, sigma: &[usize]) -> usize {
        let mut sets = sigma.iter().map(|&r| {
            self.satisfiable[node][r]
                .iter()
                .map(|&m| m & self.projection)
                .collect::<HashSet<u64>>()
        });
        let Some(first) = sets.next() else {
            return 0;
        };
        sets.fold(first, |acc, s| acc.intersection(&s).copied().collect())
            .len()
    }

    /// True iff the row has at least one satisfiable extension.
    pub fn extends_to_model(&self, node: NodeId, row: usize) -> bool {
        !self.satisfiable[node][row].is_empty()
    }

    /// `I(Exts)` at the root: the models over the decomposed variables.
    pub fn root_models(&self) -> Vec<Interpretation> {
        let mut out: Vec<u64> = self
            .all
            .last()
            .into_iter()
            .flatten()
            .flatten()
            .copied()
            .collect();
        out.sort_unstable();
        out.into_iter().map(to_interpretation).collect()
    }

    /// `I_P(Exts)` at the root.
    pub fn root_projected(&self) -> BTreeSet<Interpretation> {
        self.all
            .last()
            .into_iter()
            .flatten()
            .flatten()
            .map(|&m| to_interpretation(m & self.projection))
            .collect()
    }
}
