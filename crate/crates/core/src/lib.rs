//! Exact projected model counting for CNF formulas of small treewidth.
//!
//! Two dynamic programming passes run over a nice tree decomposition of the
//! primal graph. The first ([`sat`]) computes, per node, the bag
//! assignments that extend to models of the clauses below, remembering where
//! each row came from. After rows that belong to no model are purged, the
//! second ([`proj`]) counts projected models with inclusion–exclusion over
//! sets of rows that agree on the projection variables.
//!
//! ```
//! use tdpmc::{parse_dimacs, solve, BigCount, Config};
//!
//! let inst = parse_dimacs("p cnf 4 4\n-1 2 3 0\n1 -2 -3 0\n1 4 0\n1 -4 0\nc p show 3 4 0\n").unwrap();
//! let solution = solve::<BigCount>(&inst, &Config::default()).unwrap();
//! assert_eq!(solution.count, BigCount::from(4));
//! ```
//!
//! Counts are generic over a signed integer type; [`BigCount`] never
//! overflows, while machine integers report overflow as an error.

pub mod cnf;
pub mod count;
pub mod decomposition;
pub mod engine;
pub mod oracle;
pub mod pipeline;
pub mod proj;
pub mod sat;

pub use cnf::{parse_dimacs, Clause, Formula, Instance, Interpretation, Lit, ParseError, Var};
pub use count::{Count, Overflow};
pub use pipeline::{decide, solve, solve_on, Config, Decomposition, PipelineError, Solution};

/// Arbitrary precision counter.
pub type BigCount = num_bigint::BigInt;
pub type BigProjTable = proj::ProjTable<BigCount>;
pub type BigSolution = pipeline::Solution<BigCount>;
pub type I64ProjTable = proj::ProjTable<i64>;
pub type I128ProjTable = proj::ProjTable<i128>;
