//! Second traversal: projected counts over sub-buckets of the purged SAT
//! tables.
//!
//! Rows of a purged SAT table are grouped into buckets by their assignment to
//! the projection variables of the bag. For every nonempty subset `σ` of a
//! bucket (a sub-bucket) the table stores `ipmc(σ)`, the number of projected
//! models shared by all rows of `σ`. Child counts are combined with
//! inclusion–exclusion over the origin tuples of `σ` (`pcnt`), and the counts
//! of strict subsets of `σ` are subtracted back out (`ipmc`).
//!
//! Two evaluation strategies produce the same tables:
//!
//! * [`Strategy::Recurrence`] evaluates `pcnt` and `ipmc` term by term,
//!   enumerating every nonempty set of origin tuples. It is exponential in
//!   the number of origins and meant for small tables and cross-checks.
//! * [`Strategy::Transform`] evaluates the same sums with subset-sum
//!   (zeta/Möbius) transforms over each bucket. Sets of origins spanning two
//!   child buckets contribute nothing, so `pcnt` of `σ` is a sum of
//!   union-style counts of the child, one per child bucket touched. A join
//!   stores the product of its children's counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::cnf::Var;
use crate::count::{self, Count, Overflow};
use crate::decomposition::NodeKind;
use crate::engine::{PassContext, TableAlgorithm};
use crate::sat::{OriginTuple, RowMask, SatTable};

/// Default bound on the number of sub-buckets stored at a single node.
pub const DEFAULT_TABLE_CAP: u64 = 1 << 20;

/// Largest bucket whose sub-buckets can be indexed in memory.
pub const MAX_BUCKET_ROWS: usize = 40;

/// Largest origin set the term-by-term `pcnt` will enumerate.
pub const MAX_ENUMERATED_ORIGINS: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProjError {
    #[error("{entries} sub-buckets exceed the table cap of {cap}")]
    TableCap { entries: u128, cap: u64 },
    #[error("bucket of {rows} rows exceeds the limit of {MAX_BUCKET_ROWS}")]
    BucketTooLarge { rows: usize },
    #[error("origin set of {origins} tuples is too large to enumerate (limit {limit})")]
    TooManyOrigins { origins: usize, limit: usize },
    #[error("inclusion–exclusion produced a count with the wrong sign for rows {rows:?}")]
    SignInvariant { rows: Vec<usize> },
    #[error("the PROJ pass needs the purged SAT tables")]
    MissingSatTables,
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

/// Rows of one SAT table sharing their assignment to `P ∩ χ(t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bucket {
    /// Ascending row indices.
    pub rows: Vec<usize>,
}

/// A nonempty subset of one bucket.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubBucket {
    /// Ascending row indices; doubles as the canonical key.
    pub rows: Vec<usize>,
}

/// Groups the rows of `table` by their assignment to `p_bag`. Buckets are
/// ordered by their first row.
pub fn buckets(table: &SatTable, p_bag: &[Var]) -> Vec<Bucket> {
    let pmask: RowMask = table
        .bag()
        .iter()
        .enumerate()
        .filter(|(_, v)| p_bag.contains(v))
        .fold(0, |m, (i, _)| m | (1 << i));
    let mut order: Vec<RowMask> = Vec::new();
    let mut groups: HashMap<RowMask, Vec<usize>> = HashMap::new();
    for (i, &row) in table.rows().iter().enumerate() {
        let key = row & pmask;
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(i);
    }
    order
        .into_iter()
        .map(|k| Bucket {
            rows: groups.remove(&k).unwrap(),
        })
        .collect()
}

/// `Σ_B (2^|B| − 1)`, saturating.
pub fn sub_bucket_count(buckets: &[Bucket]) -> u128 {
    buckets
        .iter()
        .map(|b| {
            if b.rows.len() >= 127 {
                u128::MAX
            } else {
                (1u128 << b.rows.len()) - 1
            }
        })
        .fold(0u128, u128::saturating_add)
}

/// Every nonempty subset of every bucket, bucket by bucket, each bucket's
/// subsets in binary counting order over its rows.
pub fn sub_buckets(buckets: &[Bucket], cap: u64) -> Result<Vec<SubBucket>, ProjError> {
    let entries = sub_bucket_count(buckets);
    if entries > u128::from(cap) {
        return Err(ProjError::TableCap { entries, cap });
    }
    let mut out = Vec::with_capacity(entries as usize);
    for b in buckets {
        for mask in 1usize..1 << b.rows.len() {
            out.push(SubBucket {
                rows: select(&b.rows, mask),
            });
        }
    }
    Ok(out)
}

fn select(rows: &[usize], mask: usize) -> Vec<usize> {
    rows.iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, &r)| r)
        .collect()
}

/// Union of the stored origin tuples of the rows in `sigma`.
pub fn origins_of(table: &SatTable, sigma: &[usize]) -> BTreeSet<OriginTuple> {
    sigma
        .iter()
        .flat_map(|&r| table.origins(r).iter().cloned())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BucketCounts<C> {
    rows: Vec<usize>,
    /// Indexed by a bit mask over `rows`; entry 0 is unused.
    counts: Vec<C>,
}

/// Table of one node: a count for every sub-bucket of the purged SAT table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjTable<C> {
    buckets: Vec<BucketCounts<C>>,
    /// `(bucket, position)` of every SAT row.
    locate: Vec<(u32, u32)>,
}

impl<C: Count> ProjTable<C> {
    fn new(buckets: Vec<BucketCounts<C>>, num_rows: usize) -> Self {
        let mut locate = vec![(u32::MAX, u32::MAX); num_rows];
        for (b, bucket) in buckets.iter().enumerate() {
            for (pos, &r) in bucket.rows.iter().enumerate() {
                locate[r] = (b as u32, pos as u32);
            }
        }
        ProjTable { buckets, locate }
    }

    /// Number of stored sub-buckets.
    pub fn len(&self) -> usize {
        self.buckets.iter().map(|b| b.counts.len() - 1).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bucket index and bit mask of a row set, if it is a stored sub-bucket.
    fn key(&self, rows: &[usize]) -> Option<(usize, usize)> {
        let (&first, _) = rows.split_first()?;
        let (bucket, _) = *self.locate.get(first)?;
        let mut mask = 0usize;
        for &r in rows {
            let (b, pos) = *self.locate.get(r)?;
            if b != bucket {
                return None;
            }
            mask |= 1 << pos;
        }
        Some((bucket as usize, mask))
    }

    /// Stored count of the sub-bucket with exactly these rows. Rows may be
    /// unsorted or repeated.
    pub fn count_of(&self, rows: &[usize]) -> Option<&C> {
        let (b, mask) = self.key(rows)?;
        Some(&self.buckets[b].counts[mask])
    }

    /// `(σ, c)` pairs in table order.
    pub fn entries(&self) -> impl Iterator<Item = (SubBucket, &C)> + '_ {
        self.buckets.iter().flat_map(|b| {
            b.counts.iter().enumerate().skip(1).map(|(mask, c)| {
                (
                    SubBucket {
                        rows: select(&b.rows, mask),
                    },
                    c,
                )
            })
        })
    }

    /// Renders the table with sub-buckets written as sets of interpretations.
    pub fn dump(&self, sat: &SatTable) -> String {
        let mut out = String::new();
        for (i, (sigma, c)) in self.entries().enumerate() {
            let rows: Vec<String> = sigma
                .rows
                .iter()
                .map(|&r| sat.interpretation(r).to_string())
                .collect();
            out.push_str(&format!("  {}  {{{}}}  {}\n", i + 1, rows.join(","), c));
        }
        out
    }
}

impl<C: Count> fmt::Display for ProjTable<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (sigma, c)) in self.entries().enumerate() {
            let rows: Vec<String> = sigma.rows.iter().map(|r| (r + 1).to_string()).collect();
            writeln!(f, "  {}  {{{}}}  {}", i + 1, rows.join(","), c)?;
        }
        Ok(())
    }
}

/// Stored count for a set of origin tuples: the product over child positions
/// of the count stored for the set of rows at that position, or zero when
/// that set is not a stored sub-bucket.
pub fn sipmc<C: Count>(children: &[&ProjTable<C>], origins: &[OriginTuple]) -> Result<C, Overflow> {
    let mut product = count::one::<C>();
    for (i, child) in children.iter().enumerate() {
        let rows: Vec<usize> = origins.iter().map(|t| t[i] as usize).collect();
        match child.count_of(&rows) {
            Some(c) => product = count::mul(&product, c)?,
            None => return Ok(C::zero()),
        }
    }
    Ok(product)
}

/// Inclusion–exclusion over all nonempty sets of origin tuples of `sigma`,
/// evaluated term by term.
pub fn pcnt<C: Count>(
    table: &SatTable,
    sigma: &[usize],
    children: &[&ProjTable<C>],
) -> Result<C, ProjError> {
    let origins: Vec<OriginTuple> = origins_of(table, sigma).into_iter().collect();
    if origins.len() > MAX_ENUMERATED_ORIGINS {
        return Err(ProjError::TooManyOrigins {
            origins: origins.len(),
            limit: MAX_ENUMERATED_ORIGINS,
        });
    }
    let mut total = C::zero();
    let mut chosen: Vec<OriginTuple> = Vec::with_capacity(origins.len());
    for mask in 1usize..1 << origins.len() {
        chosen.clear();
        chosen.extend(
            origins
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, t)| t.clone()),
        );
        let stored = sipmc(children, &chosen)?;
        if count::is_zero(&stored) {
            continue;
        }
        let term = count::mul(&count::alternating::<C>(mask.count_ones()), &stored)?;
        total = count::add(&total, &term)?;
    }
    Ok(total)
}

/// Intersection projected model count of `sigma` at a node of type `kind`:
/// 1 at leaves, otherwise `|pcnt(σ) + Σ_{∅⊊ρ⊊σ} (−1)^|ρ| · ipmc(ρ)|`.
///
/// `memo` caches results per sub-bucket key of this node and must not be
/// shared between nodes.
pub fn ipmc<C: Count>(
    kind: NodeKind,
    table: &SatTable,
    sigma: &[usize],
    children: &[&ProjTable<C>],
    memo: &mut HashMap<Vec<usize>, C>,
) -> Result<C, ProjError> {
    if kind == NodeKind::Leaf {
        return Ok(count::one());
    }
    let mut key = sigma.to_vec();
    key.sort_unstable();
    key.dedup();
    if let Some(c) = memo.get(&key) {
        return Ok(c.clone());
    }
    let mut acc = pcnt(table, &key, children)?;
    let full = (1usize << key.len()) - 1;
    for mask in 1..full {
        let rho = select(&key, mask);
        let inner = ipmc(kind, table, &rho, children, memo)?;
        // (−1)^|ρ| is the negated inclusion–exclusion sign.
        let term = count::mul(&count::alternating::<C>(mask.count_ones()), &inner)?;
        acc = count::sub(&acc, &term)?;
    }
    let value = acc.abs();
    memo.insert(key, value.clone());
    Ok(value)
}

/// Evaluation strategy for [`ProjAlgorithm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    #[default]
    Transform,
    Recurrence,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "transform" => Ok(Strategy::Transform),
            "recurrence" => Ok(Strategy::Recurrence),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

/// The counting table algorithm. Reads the purged SAT tables as the previous
/// pass.
#[derive(Debug, Clone, Copy)]
pub struct ProjAlgorithm<C> {
    pub strategy: Strategy,
    pub table_cap: u64,
    _count: std::marker::PhantomData<fn() -> C>,
}

impl<C> ProjAlgorithm<C> {
    pub fn new(strategy: Strategy, table_cap: u64) -> Self {
        ProjAlgorithm {
            strategy,
            table_cap,
            _count: std::marker::PhantomData,
        }
    }
}

impl<C> Default for ProjAlgorithm<C> {
    fn default() -> Self {
        ProjAlgorithm::new(Strategy::default(), DEFAULT_TABLE_CAP)
    }
}

impl<C: Count> TableAlgorithm for ProjAlgorithm<C> {
    type Table = ProjTable<C>;
    type Prev = SatTable;
    type Error = ProjError;

    fn compute(
        &self,
        ctx: &PassContext<'_, ProjTable<C>, SatTable>,
    ) -> Result<ProjTable<C>, ProjError> {
        let sat = &ctx.prev.ok_or(ProjError::MissingSatTables)?[ctx.node];
        let bks = buckets(sat, ctx.projection);
        if let Some(b) = bks.iter().find(|b| b.rows.len() > MAX_BUCKET_ROWS) {
            return Err(ProjError::BucketTooLarge { rows: b.rows.len() });
        }
        let entries = sub_bucket_count(&bks);
        if entries > u128::from(self.table_cap) {
            return Err(ProjError::TableCap {
                entries,
                cap: self.table_cap,
            });
        }
        let counts = match self.strategy {
            Strategy::Recurrence => recurrence_counts(ctx.kind, sat, &bks, &ctx.children)?,
            Strategy::Transform => transform_counts(ctx.kind, sat, &bks, &ctx.children)?,
        };
        let buckets = bks
            .into_iter()
            .zip(counts)
            .map(|(b, counts)| BucketCounts {
                rows: b.rows,
                counts,
            })
            .collect();
        Ok(ProjTable::new(buckets, sat.len()))
    }
}

fn recurrence_counts<C: Count>(
    kind: NodeKind,
    sat: &SatTable,
    bks: &[Bucket],
    children: &[&ProjTable<C>],
) -> Result<Vec<Vec<C>>, ProjError> {
    let mut memo = HashMap::new();
    bks.iter()
        .map(|b| {
            let mut counts = vec![C::zero(); 1 << b.rows.len()];
            for (mask, slot) in counts.iter_mut().enumerate().skip(1) {
                *slot = ipmc(kind, sat, &select(&b.rows, mask), children, &mut memo)?;
            }
            Ok(counts)
        })
        .collect()
}

fn transform_counts<C: Count>(
    kind: NodeKind,
    sat: &SatTable,
    bks: &[Bucket],
    children: &[&ProjTable<C>],
) -> Result<Vec<Vec<C>>, ProjError> {
    match kind {
        NodeKind::Leaf => Ok(bks.iter().map(|b| leaf_counts(b.rows.len())).collect()),
        NodeKind::Join => bks.iter().map(|b| join_counts(sat, b, children)).collect(),
        NodeKind::Introduce(_) | NodeKind::Remove(_) => {
            let mut union_counts: HashMap<usize, Vec<C>> = HashMap::new();
            bks.iter()
                .map(|b| chain_counts(sat, b, children[0], &mut union_counts))
                .collect()
        }
    }
}

fn leaf_counts<C: Count>(n: usize) -> Vec<C> {
    let mut counts = vec![count::one::<C>(); 1 << n];
    counts[0] = C::zero();
    counts
}

/// At a join every row has the single origin `⟨u, u⟩`, so `pcnt` of `σ` is
/// the inclusion–exclusion sum of the products of child counts and the
/// subtraction of strict subsets leaves exactly the product for `σ`.
fn join_counts<C: Count>(
    sat: &SatTable,
    bucket: &Bucket,
    children: &[&ProjTable<C>],
) -> Result<Vec<C>, ProjError> {
    let n = bucket.rows.len();
    let images: Vec<[usize; 2]> = bucket
        .rows
        .iter()
        .map(|&r| {
            let t = &sat.origins(r)[0];
            [t[0] as usize, t[1] as usize]
        })
        .collect();
    let mut counts = vec![C::zero(); 1 << n];
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for (mask, slot) in counts.iter_mut().enumerate().skip(1) {
        left.clear();
        right.clear();
        for (k, img) in images.iter().enumerate() {
            if mask >> k & 1 == 1 {
                left.push(img[0]);
                right.push(img[1]);
            }
        }
        *slot = match (children[0].count_of(&left), children[1].count_of(&right)) {
            (Some(a), Some(b)) => count::mul(a, b)?,
            _ => C::zero(),
        };
    }
    Ok(counts)
}

/// Union-style counts of a child bucket: for every subset `S`, the
/// inclusion–exclusion sum `Σ_{∅≠R⊆S} (−1)^(|R|−1) ipmc(R)`.
fn union_counts<C: Count>(child: &ProjTable<C>, bucket: usize) -> Result<Vec<C>, Overflow> {
    let stored = &child.buckets[bucket].counts;
    let mut z: Vec<C> = stored
        .iter()
        .enumerate()
        .map(|(mask, c)| {
            if mask == 0 {
                Ok(C::zero())
            } else {
                count::mul(&count::alternating::<C>(mask.count_ones()), c)
            }
        })
        .collect::<Result<_, _>>()?;
    let n = child.buckets[bucket].rows.len();
    for bit in 0..n {
        for mask in 0..z.len() {
            if mask >> bit & 1 == 1 {
                z[mask] = count::add(&z[mask], &z[mask ^ (1 << bit)])?;
            }
        }
    }
    Ok(z)
}

/// Introduce and remove nodes have one child and one-element origin tuples.
fn chain_counts<C: Count>(
    sat: &SatTable,
    bucket: &Bucket,
    child: &ProjTable<C>,
    cache: &mut HashMap<usize, Vec<C>>,
) -> Result<Vec<C>, ProjError> {
    let n = bucket.rows.len();
    // Per touched child bucket, the origin rows of each row of σ as a mask.
    let mut touched: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, &r) in bucket.rows.iter().enumerate() {
        for tuple in sat.origins(r) {
            let (cb, pos) = child.locate[tuple[0] as usize];
            touched.entry(cb as usize).or_insert_with(|| vec![0; n])[k] |= 1 << pos;
        }
    }

    let mut pc = vec![C::zero(); 1 << n];
    for (&cb, row_masks) in &touched {
        let unions = match cache.entry(cb) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => e.insert(union_counts(child, cb)?),
        };
        let mut acc = vec![0usize; 1 << n];
        for mask in 1usize..1 << n {
            let low = mask.trailing_zeros() as usize;
            acc[mask] = acc[mask & (mask - 1)] | row_masks[low];
            pc[mask] = count::add(&pc[mask], &unions[acc[mask]])?;
        }
    }

    // Möbius inversion turns pcnt into signed intersection counts.
    let mut g = pc;
    for bit in 0..n {
        for mask in 0..g.len() {
            if mask >> bit & 1 == 1 {
                g[mask] = count::sub(&g[mask], &g[mask ^ (1 << bit)])?;
            }
        }
    }
    for (mask, value) in g.iter_mut().enumerate().skip(1) {
        let expected_negative = mask.count_ones() % 2 == 0;
        if (expected_negative && value.is_positive()) || (!expected_negative && value.is_negative())
        {
            return Err(ProjError::SignInvariant {
                rows: select(&bucket.rows, mask),
            });
        }
        *value = value.abs();
    }
    Ok(g)
}

/// Projected model count from the root table, scaled by `2^free` for
/// projection variables that occur in no clause.
pub fn final_count<C: Count>(
    root: &ProjTable<C>,
    free_projection_vars: usize,
) -> Result<C, Overflow> {
    let mut total = C::zero();
    for (_, c) in root.entries() {
        total = count::add(&total, c)?;
    }
    if count::is_zero(&total) {
        return Ok(total);
    }
    count::mul(&total, &count::pow2(free_projection_vars)?)
}
