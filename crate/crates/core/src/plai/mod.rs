//! Goal-dependent analysis: call patterns are tabled, clause bodies are walked
//! left to right, and answers are joined in the abstract domain.

mod replay;
mod tabled;
pub(crate) mod walk;

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::ir::{ClauseId, EntryDecl, PredKey, Program, Term};
use crate::lattice::{Domain, DomainError};
use crate::tabling::{Aggregate, Counters, EngineError, ResumeOrder, DEFAULT_STEP_BUDGET};

pub(crate) use replay::{finish, Table, TableEntry};
pub use tabled::analyze;

/// A goal skeleton over variables `0..k` plus the projected call substitution.
#[derive(Clone, Debug, PartialEq)]
pub struct CallPattern<S> {
    pub goal: Term,
    pub proj: S,
}

/// Answers and calls compared in the abstract domain; the answer is the
/// joined success substitution.
#[derive(Clone, Debug)]
pub struct AbstLub<D> {
    pub domain: D,
}

impl<D: Domain> Aggregate for AbstLub<D> {
    type Call = CallPattern<D::Subst>;
    type Answer = D::Subst;
    type Error = DomainError;

    fn call_entail(&self, a: &Self::Call, b: &Self::Call) -> Result<bool, DomainError> {
        Ok(a.goal == b.goal && self.domain.identical(&a.proj, &b.proj)?)
    }

    fn call_more_general(&self, general: &Self::Call, specific: &Self::Call) -> Result<bool, DomainError> {
        Ok(general.goal == specific.goal && self.domain.leq(&specific.proj, &general.proj)?)
    }

    fn answer_entail(&self, new: &D::Subst, saved: &D::Subst) -> Result<bool, DomainError> {
        self.domain.leq(new, saved)
    }

    fn answer_join(&self, saved: &D::Subst, new: &D::Subst) -> Result<D::Subst, DomainError> {
        self.domain.lub(saved, new)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AnalysisOptions {
    pub resume: ResumeOrder,
    pub seed_nonrec: bool,
    pub step_budget: u64,
    pub more_general: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            resume: ResumeOrder::Lifo,
            seed_nonrec: true,
            step_budget: DEFAULT_STEP_BUDGET,
            more_general: false,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AnalysisRequest<'p> {
    pub program: &'p Program,
    pub entry: &'p EntryDecl,
    pub options: AnalysisOptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineKind {
    Tabled,
    Naive,
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::Tabled => "tabled",
            EngineKind::Naive => "naive",
        })
    }
}

/// One analyzed call pattern with its success substitution.
#[derive(Clone, Debug, PartialEq)]
pub struct Complete<S> {
    pub key: PredKey,
    pub goal: Term,
    pub call: S,
    pub success: S,
}

#[derive(Clone, Debug)]
pub struct AnalysisResult<S> {
    pub domain: &'static str,
    pub engine: EngineKind,
    pub entry: EntryDecl,
    /// Call patterns reachable from the entry, in discovery order.
    pub completes: Vec<Complete<S>>,
    /// λᵢ before the i-th literal of each clause (1-based); `m+1` is the exit.
    /// Variables are the clause's own.
    pub points: BTreeMap<(ClauseId, usize), S>,
    pub counters: Counters,
    pub warnings: Vec<String>,
    /// Fixpoint computation only.
    pub elapsed: Duration,
    /// Entries in the final table, reachable or not.
    pub table_size: usize,
    /// Answers that replaying every table entry would still change; for the
    /// tabled engine this includes its own generator replay.
    pub unstable: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("entry predicate {0} has no clauses and is not a builtin")]
    UnknownEntry(PredKey),
    #[error("naive fixpoint exhausted its budget of {0} steps")]
    NaiveBudget(u64),
}

impl AnalysisError {
    /// Resource exhaustion rather than a broken invariant.
    pub fn is_resource(&self) -> bool {
        match self {
            AnalysisError::Domain(e) => e.is_resource(),
            AnalysisError::Engine(e) => e.is_resource(),
            AnalysisError::NaiveBudget(_) => true,
            AnalysisError::UnknownEntry(_) => false,
        }
    }
}

/// Renders `s` with the positional names used by call patterns (`A`, `B`, ...).
pub fn positional_view<D: Domain>(d: &D, s: &D::Subst) -> crate::lattice::SubstView {
    d.view(s, &|v| walk::var_name(v.0 as usize))
}
