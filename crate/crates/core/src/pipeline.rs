//! End-to-end solving: decompose, SAT pass, purge, PROJ pass, count.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::cnf::Instance;
use crate::count::{self, Count, Overflow};
use crate::decomposition::{
    decompose, make_nice, Heuristic, NiceTreeDecomposition, PrimalGraph, TreeDecomposition,
};
use crate::engine::{run_pass, NodeTables, PassError};
use crate::proj::{self, ProjAlgorithm, ProjError, ProjTable, Strategy};
use crate::sat::{is_satisfiable, purge, SatAlgorithm, SatTable, MAX_BAG_SIZE};

pub const DEFAULT_MAX_WIDTH: usize = 12;

#[derive(Debug, Clone)]
pub struct Config {
    pub heuristic: Heuristic,
    pub seed: Option<u64>,
    /// Used instead of the heuristic when set.
    pub td: Option<TreeDecomposition>,
    /// `None` disables the width guard.
    pub max_width: Option<usize>,
    pub table_cap: u64,
    pub strategy: Strategy,
    /// When no projection variable occurs in the formula the count is fixed
    /// by satisfiability alone, and the PROJ pass is skipped.
    pub skip_empty_projection: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            heuristic: Heuristic::MinFill,
            seed: None,
            td: None,
            max_width: Some(DEFAULT_MAX_WIDTH),
            table_cap: proj::DEFAULT_TABLE_CAP,
            strategy: Strategy::default(),
            skip_empty_projection: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("decomposition width {width} exceeds the limit of {max} (use --force to override)")]
    WidthGuard { width: usize, max: usize },
    #[error("bag of {size} variables exceeds the supported maximum of {MAX_BAG_SIZE}")]
    BagTooLarge { size: usize },
    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("PROJ pass failed at {0}")]
    Proj(#[from] PassError<ProjError>),
    #[error(transparent)]
    Overflow(#[from] Overflow),
}

impl PipelineError {
    /// True for refusals caused by configured resource limits.
    pub fn is_guard(&self) -> bool {
        match self {
            PipelineError::WidthGuard { .. } | PipelineError::BagTooLarge { .. } => true,
            PipelineError::Proj(e) => matches!(
                e.source,
                ProjError::TableCap { .. } | ProjError::BucketTooLarge { .. }
            ),
            _ => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub ntd: NiceTreeDecomposition,
    pub width: usize,
    /// Heuristic name, or `td-import` for an imported decomposition.
    pub source: String,
}

/// Builds (or imports and checks) the nice decomposition and applies the
/// width guard.
pub fn decompose_instance(
    instance: &Instance,
    config: &Config,
) -> Result<Decomposition, PipelineError> {
    let formula = instance.formula();
    let graph = PrimalGraph::from_formula(formula);
    let (ntd, source) = match &config.td {
        Some(td) => {
            let report = td.validate(&graph);
            if !report.is_valid() {
                return Err(PipelineError::InvalidDecomposition(format!(
                    "{:?}",
                    report.violations
                )));
            }
            let ntd =
                make_nice(td).map_err(|e| PipelineError::InvalidDecomposition(e.to_string()))?;
            (ntd, "td-import".to_string())
        }
        None => (
            decompose(&graph, config.heuristic, config.seed, formula.num_vars()),
            config.heuristic.name().to_string(),
        ),
    };
    let width = ntd.width();
    if let Some(max) = config.max_width {
        if width > max {
            return Err(PipelineError::WidthGuard { width, max });
        }
    }
    let largest = ntd.nodes().iter().map(|n| n.bag.len()).max().unwrap_or(0);
    if largest > MAX_BAG_SIZE {
        return Err(PipelineError::BagTooLarge { size: largest });
    }
    Ok(Decomposition { ntd, width, source })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub time_sat: Duration,
    pub time_proj: Duration,
    pub max_sat_rows: usize,
    pub max_proj_entries: usize,
}

/// Everything computed on the way to a count.
#[derive(Debug, Clone)]
pub struct Solution<C> {
    pub decomposition: Decomposition,
    pub sat: NodeTables<SatTable>,
    pub purged: NodeTables<SatTable>,
    /// `None` when the PROJ pass was skipped.
    pub proj: Option<NodeTables<ProjTable<C>>>,
    pub satisfiable: bool,
    pub count: C,
    pub stats: Stats,
}

/// Decides satisfiability with the SAT pass only.
pub fn decide(
    instance: &Instance,
    config: &Config,
) -> Result<(Decomposition, bool, Stats), PipelineError> {
    let decomposition = decompose_instance(instance, config)?;
    let start = Instant::now();
    let sat = sat_pass(instance, &decomposition.ntd);
    let stats = Stats {
        time_sat: start.elapsed(),
        max_sat_rows: max_rows(&sat),
        ..Stats::default()
    };
    let satisfiable = is_satisfiable(&sat, &decomposition.ntd);
    Ok((decomposition, satisfiable, stats))
}

/// Computes the projected model count.
pub fn solve<C: Count>(instance: &Instance, config: &Config) -> Result<Solution<C>, PipelineError> {
    let decomposition = decompose_instance(instance, config)?;
    solve_on(instance, decomposition, config)
}

/// Computes the projected model count on a given decomposition. The width
/// guard is not applied here.
pub fn solve_on<C: Count>(
    instance: &Instance,
    decomposition: Decomposition,
    config: &Config,
) -> Result<Solution<C>, PipelineError> {
    let ntd = &decomposition.ntd;
    let mut stats = Stats::default();

    let start = Instant::now();
    let sat = sat_pass(instance, ntd);
    let purged = purge(&sat, ntd);
    stats.time_sat = start.elapsed();
    stats.max_sat_rows = max_rows(&sat);
    let satisfiable = is_satisfiable(&sat, ntd);

    let vars = instance.formula().vars();
    let projected_in_formula = instance.projection().iter().any(|v| vars.contains(v));
    let free = instance.free_projection_vars();

    let (proj, count) = if config.skip_empty_projection && !projected_in_formula {
        let count = if satisfiable {
            count::pow2(free)?
        } else {
            C::zero()
        };
        (None, count)
    } else {
        let start = Instant::now();
        let algorithm = ProjAlgorithm::<C>::new(config.strategy, config.table_cap);
        let tables = run_pass(instance, ntd, &algorithm, Some(&purged))?;
        stats.time_proj = start.elapsed();
        stats.max_proj_entries = tables.iter().map(|(_, t)| t.len()).max().unwrap_or(0);
        let count = proj::final_count(&tables[ntd.root()], free)?;
        (Some(tables), count)
    };

    Ok(Solution {
        decomposition,
        sat,
        purged,
        proj,
        satisfiable,
        count,
        stats,
    })
}

fn sat_pass(instance: &Instance, ntd: &NiceTreeDecomposition) -> NodeTables<SatTable> {
    match run_pass(instance, ntd, &SatAlgorithm, None) {
        Ok(t) => t,
        Err(e) => match e.source {},
    }
}

fn max_rows(tables: &NodeTables<SatTable>) -> usize {
    tables.iter().map(|(_, t)| t.len()).max().unwrap_or(0)
}
