//! CNF formulas, projection instances and the DIMACS text format.
//!
//! Variables are 1-based as in DIMACS. Clauses and formulas use set
//! semantics: duplicate literals inside a clause collapse, and duplicate
//! clauses inside a formula collapse. Tautological clauses are kept as they
//! are; removing them could shrink `var(F)` and change projected counts.

use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

/// A propositional variable, identified by its positive DIMACS id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    /// Panics if `id` is zero.
    pub fn new(id: u32) -> Self {
        assert!(id >= 1, "variable ids are 1-based");
        Var(id)
    }

    pub fn id(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A variable or its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    var: Var,
    negated: bool,
}

impl Lit {
    pub fn new(var: Var, negated: bool) -> Self {
        Lit { var, negated }
    }

    pub fn positive(var: Var) -> Self {
        Lit::new(var, false)
    }

    pub fn negative(var: Var) -> Self {
        Lit::new(var, true)
    }

    /// Builds a literal from a nonzero DIMACS integer.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 {
            return None;
        }
        let id = u32::try_from(value.unsigned_abs()).ok()?;
        Some(Lit::new(Var(id), value < 0))
    }

    pub fn to_dimacs(self) -> i64 {
        let id = i64::from(self.var.0);
        if self.negated {
            -id
        } else {
            id
        }
    }

    pub fn var(self) -> Var {
        self.var
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// Value of the literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value != self.negated
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A disjunction of literals, stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    lits: Vec<Lit>,
}

impl Clause {
    pub fn new(lits: impl IntoIterator<Item = Lit>) -> Self {
        let mut lits: Vec<Lit> = lits.into_iter().collect();
        lits.sort_unstable();
        lits.dedup();
        Clause { lits }
    }

    /// Convenience constructor from DIMACS integers. Panics on zero.
    pub fn from_dimacs(values: &[i64]) -> Self {
        Clause::new(
            values
                .iter()
                .map(|&v| Lit::from_dimacs(v).expect("zero is not a literal")),
        )
    }

    pub fn lits(&self) -> &[Lit] {
        &self.lits
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    /// `var(c)`, in ascending order without repetition.
    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        let mut last = None;
        self.lits.iter().filter_map(move |l| {
            if last == Some(l.var) {
                None
            } else {
                last = Some(l.var);
                Some(l.var)
            }
        })
    }

    pub fn is_tautology(&self) -> bool {
        self.lits.windows(2).any(|w| w[0].var == w[1].var)
    }
}

/// A set of variables, read as the interpretation that sets exactly its
/// members to true within some scope.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interpretation(BTreeSet<Var>);

impl Interpretation {
    pub fn new(members: impl IntoIterator<Item = Var>) -> Self {
        Interpretation(members.into_iter().collect())
    }

    pub fn from_ids(ids: &[u32]) -> Self {
        Interpretation::new(ids.iter().map(|&id| Var::new(id)))
    }

    pub fn contains(&self, v: Var) -> bool {
        self.0.contains(&v)
    }

    pub fn members(&self) -> &BTreeSet<Var> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

/// A CNF formula over `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formula {
    clauses: Vec<Clause>,
    num_vars: u32,
}

impl Formula {
    /// Panics if a clause mentions a variable above `num_vars`.
    pub fn new(num_vars: u32, clauses: impl IntoIterator<Item = Clause>) -> Self {
        let mut clauses: Vec<Clause> = clauses.into_iter().collect();
        for c in &clauses {
            for l in c.lits() {
                assert!(
                    l.var().id() <= num_vars,
                    "literal {l} exceeds declared variable count {num_vars}"
                );
            }
        }
        clauses.sort_unstable();
        clauses.dedup();
        Formula { clauses, num_vars }
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn declared_vars(&self) -> impl Iterator<Item = Var> {
        (1..=self.num_vars).map(Var)
    }

    /// `var(F)`: the variables that occur in some clause.
    pub fn vars(&self) -> BTreeSet<Var> {
        self.clauses.iter().flat_map(|c| c.vars()).collect()
    }

    pub fn has_empty_clause(&self) -> bool {
        self.clauses.iter().any(Clause::is_empty)
    }

    /// Applies the assignment that sets the members of `interp` to true and
    /// the rest of `scope` to false. Satisfied clauses disappear and falsified
    /// literals are dropped, so an empty clause in the result marks a conflict.
    pub fn under_assignment(&self, scope: &BTreeSet<Var>, interp: &Interpretation) -> Formula {
        let mut out = Vec::with_capacity(self.clauses.len());
        'clauses: for c in &self.clauses {
            let mut kept = Vec::with_capacity(c.len());
            for &l in c.lits() {
                if scope.contains(&l.var()) {
                    if l.eval(interp.contains(l.var())) {
                        continue 'clauses;
                    }
                } else {
                    kept.push(l);
                }
            }
            out.push(Clause::new(kept));
        }
        Formula::new(self.num_vars, out)
    }

    /// True iff `interp`, read over `var(F)`, satisfies every clause.
    pub fn is_model(&self, interp: &Interpretation) -> bool {
        self.under_assignment(&self.vars(), interp)
            .clauses
            .is_empty()
    }
}

/// A projected model counting instance `(F, P)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    formula: Formula,
    projection: BTreeSet<Var>,
}

impl Instance {
    pub fn new(
        formula: Formula,
        projection: impl IntoIterator<Item = Var>,
    ) -> Result<Self, ParseError> {
        let projection: BTreeSet<Var> = projection.into_iter().collect();
        if let Some(v) = projection.iter().find(|v| v.id() > formula.num_vars) {
            return Err(ParseError::ProjectionOutOfRange {
                var: v.id(),
                num_vars: formula.num_vars,
            });
        }
        Ok(Instance {
            formula,
            projection,
        })
    }

    /// Instance whose projection is every declared variable, i.e. plain #SAT.
    pub fn unprojected(formula: Formula) -> Self {
        let projection = formula.declared_vars().collect();
        Instance {
            formula,
            projection,
        }
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn projection(&self) -> &BTreeSet<Var> {
        &self.projection
    }

    pub fn with_projection(
        &self,
        projection: impl IntoIterator<Item = Var>,
    ) -> Result<Self, ParseError> {
        Instance::new(self.formula.clone(), projection)
    }

    /// `P \ var(F)`: declared projection variables that no clause mentions.
    /// Each one doubles the count of a satisfiable instance.
    pub fn free_projection_vars(&self) -> usize {
        let vars = self.formula.vars();
        self.projection.iter().filter(|v| !vars.contains(v)).count()
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        let f = &self.formula;
        writeln!(out, "p cnf {} {}", f.num_vars, f.clauses.len()).unwrap();
        for c in &f.clauses {
            for l in c.lits() {
                write!(out, "{l} ").unwrap();
            }
            out.push_str("0\n");
        }
        out.push_str("c p show");
        for v in &self.projection {
            write!(out, " {v}").unwrap();
        }
        out.push_str(" 0\n");
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("line {line}: malformed header `{text}`")]
    MalformedHeader { line: usize, text: String },
    #[error("line {line}: duplicate header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: clause data before the header")]
    ClauseBeforeHeader { line: usize },
    #[error("line {line}: invalid token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: literal {lit} exceeds declared variable count {num_vars}")]
    LiteralOutOfRange {
        line: usize,
        lit: i64,
        num_vars: u32,
    },
    #[error("projection variable {var} exceeds declared variable count {num_vars}")]
    ProjectionOutOfRange { var: u32, num_vars: u32 },
}

/// Parses DIMACS CNF with optional `c p show ... 0` projection lines.
///
/// Several show lines are united. Without any, the projection is every
/// declared variable. A clause count that disagrees with the header is only
/// logged.
pub fn parse_dimacs(text: &str) -> Result<Instance, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }

    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Lit> = Vec::new();
    let mut show: Option<Vec<(usize, i64)>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            let mut tokens = rest.split_whitespace();
            if tokens.next() == Some("p") && tokens.next() == Some("show") {
                let entry = show.get_or_insert_with(Vec::new);
                for tok in tokens {
                    let v = parse_int(tok, line_no)?;
                    if v == 0 {
                        break;
                    }
                    if v < 0 {
                        return Err(ParseError::InvalidToken {
                            line: line_no,
                            token: tok.to_string(),
                        });
                    }
                    entry.push((line_no, v));
                }
            }
            continue;
        }
        if line.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::DuplicateHeader { line: line_no });
            }
            header = Some(parse_header(line, line_no)?);
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(ParseError::ClauseBeforeHeader { line: line_no });
        };
        for tok in line.split_whitespace() {
            let v = parse_int(tok, line_no)?;
            if v == 0 {
                clauses.push(Clause::new(current.drain(..)));
                continue;
            }
            if v.unsigned_abs() > u64::from(num_vars) {
                return Err(ParseError::LiteralOutOfRange {
                    line: line_no,
                    lit: v,
                    num_vars,
                });
            }
            current.push(Lit::from_dimacs(v).expect("nonzero"));
        }
    }

    let (num_vars, declared_clauses) = header.ok_or(ParseError::MissingHeader)?;
    if !current.is_empty() {
        log::warn!("last clause is not terminated by 0; accepting it");
        clauses.push(Clause::new(current));
    }
    if clauses.len() != declared_clauses {
        log::warn!(
            "header declares {declared_clauses} clauses but {} were read",
            clauses.len()
        );
    }

    let formula = Formula::new(num_vars, clauses);
    match show {
        None => Ok(Instance::unprojected(formula)),
        Some(entries) => {
            let mut projection = BTreeSet::new();
            for (_, v) in entries {
                if v > i64::from(num_vars) {
                    return Err(ParseError::ProjectionOutOfRange {
                        var: u32::try_from(v).unwrap_or(u32::MAX),
                        num_vars,
                    });
                }
                projection.insert(Var(v as u32));
            }
            Instance::new(formula, projection)
        }
    }
}

fn parse_int(tok: &str, line: usize) -> Result<i64, ParseError> {
    tok.parse::<i64>().map_err(|_| ParseError::InvalidToken {
        line,
        token: tok.to_string(),
    })
}

fn parse_header(line: &str, line_no: usize) -> Result<(u32, usize), ParseError> {
    let malformed = || ParseError::MalformedHeader {
        line: line_no,
        text: line.to_string(),
    };
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != 4 || tokens[0] != "p" || tokens[1] != "cnf" {
        return Err(malformed());
    }
    let num_vars = tokens[2].parse::<u32>().map_err(|_| malformed())?;
    let num_clauses = tokens[3].parse::<usize>().map_err(|_| malformed())?;
    Ok((num_vars, num_clauses))
}
