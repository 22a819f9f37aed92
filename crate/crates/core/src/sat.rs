//! First traversal: bag-restricted model tables with origin links, and the
//! purge that keeps only rows belonging to some model.

use std::collections::BTreeMap;
use std::convert::Infallible;
use std::fmt;

use smallvec::SmallVec;

use crate::cnf::{Clause, Interpretation, Var};
use crate::decomposition::{NiceTreeDecomposition, NodeKind};
use crate::engine::{NodeTables, PassContext, TableAlgorithm};

/// A row: bit `i` is set iff the `i`-th bag variable (ascending id) is true.
pub type RowMask = u64;

/// Largest bag a row mask can address.
pub const MAX_BAG_SIZE: usize = 64;

/// One row index per child table, in child order. Empty at leaves.
pub type OriginTuple = SmallVec<[u32; 2]>;

/// Table of one node. Rows are sorted by mask and distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatTable {
    bag: Vec<Var>,
    rows: Vec<RowMask>,
    origins: Vec<Vec<OriginTuple>>,
}

impl SatTable {
    pub fn empty(bag: Vec<Var>) -> Self {
        SatTable {
            bag,
            rows: Vec::new(),
            origins: Vec::new(),
        }
    }

    pub fn bag(&self) -> &[Var] {
        &self.bag
    }

    pub fn rows(&self) -> &[RowMask] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Origin tuples of row `row`.
    pub fn origins(&self, row: usize) -> &[OriginTuple] {
        &self.origins[row]
    }

    pub fn find(&self, mask: RowMask) -> Option<usize> {
        self.rows.binary_search(&mask).ok()
    }

    /// The interpretation `I(u)` of a row.
    pub fn interpretation(&self, row: usize) -> Interpretation {
        Interpretation::new(mask_vars(&self.bag, self.rows[row]))
    }

    pub fn interpretations(&self) -> Vec<Interpretation> {
        (0..self.rows.len())
            .map(|i| self.interpretation(i))
            .collect()
    }

    /// Row index holding exactly `interp` (restricted to the bag).
    pub fn row_of(&self, interp: &Interpretation) -> Option<usize> {
        self.find(self.mask_of(interp))
    }

    pub fn mask_of(&self, interp: &Interpretation) -> RowMask {
        self.bag
            .iter()
            .enumerate()
            .filter(|(_, v)| interp.contains(**v))
            .fold(0, |m, (i, _)| m | (1 << i))
    }
}

impl fmt::Display for SatTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows.len() {
            writeln!(f, "  {}  {}", i + 1, self.interpretation(i))?;
        }
        Ok(())
    }
}

pub(crate) fn mask_vars(bag: &[Var], mask: RowMask) -> impl Iterator<Item = Var> + '_ {
    bag.iter()
        .enumerate()
        .filter(move |(i, _)| mask >> i & 1 == 1)
        .map(|(_, &v)| v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct CompiledClause {
    pos: RowMask,
    neg: RowMask,
}

impl CompiledClause {
    fn new(clause: &Clause, bag: &[Var]) -> Self {
        let mut c = CompiledClause { pos: 0, neg: 0 };
        for l in clause.lits() {
            let i = bag
                .binary_search(&l.var())
                .expect("local clause inside bag");
            if l.is_negated() {
                c.neg |= 1 << i;
            } else {
                c.pos |= 1 << i;
            }
        }
        c
    }

    fn satisfied_by(self, row: RowMask) -> bool {
        row & self.pos != 0 || !row & self.neg != 0
    }
}

fn satisfies_all(clauses: &[CompiledClause], row: RowMask) -> bool {
    clauses.iter().all(|c| c.satisfied_by(row))
}

/// Inserts a zero bit at `pos`.
fn widen(mask: RowMask, pos: usize) -> RowMask {
    let low = mask & ((1 << pos) - 1);
    let high = if pos + 1 >= 64 {
        0
    } else {
        (mask >> pos) << (pos + 1)
    };
    low | high
}

/// Deletes the bit at `pos`.
fn narrow(mask: RowMask, pos: usize) -> RowMask {
    let low = mask & ((1 << pos) - 1);
    let high = if pos + 1 >= 64 {
        0
    } else {
        (mask >> (pos + 1)) << pos
    };
    low | high
}

/// The decision table algorithm: rows are models of `F_t` restricted to the
/// bag that extend to models of the clauses below.
#[derive(Debug, Clone, Copy, Default)]
pub struct SatAlgorithm;

impl TableAlgorithm for SatAlgorithm {
    type Table = SatTable;
    type Prev = ();
    type Error = Infallible;

    fn compute(&self, ctx: &PassContext<'_, SatTable, ()>) -> Result<SatTable, Infallible> {
        Ok(sat_table(
            ctx.kind,
            ctx.bag,
            ctx.local_clauses,
            &ctx.children,
        ))
    }
}

/// Computes one table from the node type and the child tables.
///
/// Panics if the bag holds more than [`MAX_BAG_SIZE`] variables.
pub fn sat_table(
    kind: NodeKind,
    bag: &[Var],
    local: &[Clause],
    children: &[&SatTable],
) -> SatTable {
    assert!(
        bag.len() <= MAX_BAG_SIZE,
        "bag of {} variables exceeds row mask",
        bag.len()
    );
    let clauses: Vec<CompiledClause> = local.iter().map(|c| CompiledClause::new(c, bag)).collect();
    let bag = bag.to_vec();
    match kind {
        NodeKind::Leaf => {
            if satisfies_all(&clauses, 0) {
                SatTable {
                    bag,
                    rows: vec![0],
                    origins: vec![vec![OriginTuple::new()]],
                }
            } else {
                SatTable::empty(bag)
            }
        }
        NodeKind::Introduce(a) => {
            let child = children[0];
            let pos = bag.binary_search(&a).expect("introduced variable in bag");
            let mut rows: Vec<(RowMask, u32)> = Vec::with_capacity(child.len() * 2);
            for (j, &row) in child.rows.iter().enumerate() {
                let base = widen(row, pos);
                for k in [base, base | 1 << pos] {
                    if satisfies_all(&clauses, k) {
                        rows.push((k, j as u32));
                    }
                }
            }
            rows.sort_unstable();
            SatTable {
                bag,
                origins: rows
                    .iter()
                    .map(|&(_, j)| vec![OriginTuple::from_slice(&[j])])
                    .collect(),
                rows: rows.into_iter().map(|(k, _)| k).collect(),
            }
        }
        NodeKind::Remove(a) => {
            let child = children[0];
            let pos = child
                .bag
                .binary_search(&a)
                .expect("removed variable in child bag");
            let mut merged: BTreeMap<RowMask, Vec<OriginTuple>> = BTreeMap::new();
            for (j, &row) in child.rows.iter().enumerate() {
                merged
                    .entry(narrow(row, pos))
                    .or_default()
                    .push(OriginTuple::from_slice(&[j as u32]));
            }
            let (rows, origins) = merged.into_iter().unzip();
            SatTable { bag, rows, origins }
        }
        NodeKind::Join => {
            let (left, right) = (children[0], children[1]);
            let mut rows = Vec::new();
            let mut origins = Vec::new();
            let (mut i, mut j) = (0, 0);
            while i < left.len() && j < right.len() {
                match left.rows[i].cmp(&right.rows[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        rows.push(left.rows[i]);
                        origins.push(vec![OriginTuple::from_slice(&[i as u32, j as u32])]);
                        i += 1;
                        j += 1;
                    }
                }
            }
            SatTable { bag, rows, origins }
        }
    }
}

/// True iff the root table is nonempty.
pub fn is_satisfiable(tables: &NodeTables<SatTable>, ntd: &NiceTreeDecomposition) -> bool {
    !tables[ntd.root()].is_empty()
}

/// Which rows survive purging: exactly those reachable from a root row
/// through origin links.
pub fn reachable_rows(
    tables: &NodeTables<SatTable>,
    ntd: &NiceTreeDecomposition,
) -> Vec<Vec<bool>> {
    let mut keep: Vec<Vec<bool>> = tables.iter().map(|(_, t)| vec![false; t.len()]).collect();
    let root = ntd.root();
    keep[root].iter_mut().for_each(|k| *k = true);
    for id in ntd.post_order().rev() {
        let children = &ntd.node(id).children;
        let table = &tables[id];
        for row in 0..table.len() {
            if !keep[id][row] {
                continue;
            }
            for tuple in &table.origins[row] {
                for (pos, &child_row) in tuple.iter().enumerate() {
                    keep[children[pos]][child_row as usize] = true;
                }
            }
        }
    }
    keep
}

/// Removes every row that belongs to no model of the formula and renumbers
/// the survivors, keeping their relative order. An unsatisfiable formula
/// leaves every table empty.
pub fn purge(tables: &NodeTables<SatTable>, ntd: &NiceTreeDecomposition) -> NodeTables<SatTable> {
    let keep = reachable_rows(tables, ntd);
    let new_index: Vec<Vec<u32>> = keep
        .iter()
        .map(|k| {
            let mut next = 0u32;
            k.iter()
                .map(|&kept| {
                    let idx = if kept { next } else { u32::MAX };
                    next += u32::from(kept);
                    idx
                })
                .collect()
        })
        .collect();

    let purged = tables
        .iter()
        .map(|(id, table)| {
            let children = &ntd.node(id).children;
            let mut rows = Vec::new();
            let mut origins = Vec::new();
            for (row, _) in keep[id].iter().enumerate().filter(|(_, &k)| k) {
                rows.push(table.rows[row]);
                origins.push(
                    table.origins[row]
                        .iter()
                        .map(|tuple| {
                            tuple
                                .iter()
                                .enumerate()
                                .map(|(pos, &r)| new_index[children[pos]][r as usize])
                                .collect::<OriginTuple>()
                        })
                        .collect(),
                );
            }
            SatTable {
                bag: table.bag.clone(),
                rows,
                origins,
            }
        })
        .collect();
    NodeTables::from_vec(purged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_surgery() {
        assert_eq!(widen(0b11, 1), 0b101);
        assert_eq!(widen(0b11, 0), 0b110);
        assert_eq!(widen(0b11, 2), 0b011);
        assert_eq!(narrow(0b101, 1), 0b11);
        assert_eq!(narrow(0b110, 0), 0b11);
        assert_eq!(narrow(u64::MAX, 63), u64::MAX >> 1);
        for m in 0..64u64 {
            for p in 0..6 {
                assert_eq!(narrow(widen(m, p), p), m);
            }
        }
    }

    #[test]
    fn tautology_always_satisfied() {
        let bag = [Var::new(1)];
        let c = CompiledClause::new(&Clause::from_dimacs(&[1, -1]), &bag);
        assert!(c.satisfied_by(0) && c.satisfied_by(1));
        let empty = CompiledClause::new(&Clause::new([]), &bag);
        assert!(!empty.satisfied_by(0) && !empty.satisfied_by(1));
    }

    #[test]
    fn leaf_with_empty_clause_is_empty() {
        let t = sat_table(NodeKind::Leaf, &[], &[Clause::new([])], &[]);
        assert!(t.is_empty());
        let t = sat_table(NodeKind::Leaf, &[], &[], &[]);
        assert_eq!(t.rows(), &[0]);
        assert_eq!(t.origins(0), &[OriginTuple::new()]);
    }
}
