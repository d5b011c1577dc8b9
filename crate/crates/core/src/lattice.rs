//! The abstract-domain contract consumed by the analyzer and both oracles.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::ir::{mgu, Builtin, Clause, EntryDecl, Term, VarId};

/// Ordered set of variable ids. Kept sorted by id; ids are assigned in order of
/// first occurrence, so this is also source-argument order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet(Vec<VarId>);

impl VarSet {
    pub fn new(ids: impl IntoIterator<Item = VarId>) -> VarSet {
        let mut v: Vec<VarId> = ids.into_iter().collect();
        v.sort();
        v.dedup();
        VarSet(v)
    }

    pub fn empty() -> VarSet {
        VarSet(Vec::new())
    }

    pub fn of_term(t: &Term) -> VarSet {
        VarSet::new(t.var_ids())
    }

    pub fn of_terms<'a>(ts: impl IntoIterator<Item = &'a Term>) -> VarSet {
        VarSet::new(ts.into_iter().flat_map(|t| t.var_ids()))
    }

    pub fn contains(&self, id: VarId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn position(&self, id: VarId) -> Option<usize> {
        self.0.binary_search(&id).ok()
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.0.iter().all(|v| !other.contains(*v))
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        VarSet::new(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[VarId] {
        &self.0
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("{op}: variable sets differ ({left} vs {right})")]
    VarSetMismatch {
        op: &'static str,
        left: VarSet,
        right: VarSet,
    },
    #[error("{op}: {inner} is not a subset of {outer}")]
    NotSubset {
        op: &'static str,
        inner: VarSet,
        outer: VarSet,
    },
    #[error("{op}: goal {goal} does not match clause head {head}")]
    FunctorMismatch {
        op: &'static str,
        goal: String,
        head: String,
    },
    #[error("{op}: clause is not renamed apart from the goal")]
    NotRenamedApart { op: &'static str },
    #[error(
        "sharing closure over {groups} groups exceeds the limit of {limit}; \
         the program exceeds desk-scale sharing width"
    )]
    ClosureLimit { groups: usize, limit: usize },
}

impl DomainError {
    /// Resource exhaustion, as opposed to a wiring bug.
    pub fn is_resource(&self) -> bool {
        matches!(self, DomainError::ClosureLimit { .. })
    }
}

/// A concrete binding of program variables, used by concretization checks.
/// Values may contain variables; those stand for runtime (unbound) variables.
pub type ConcreteBinding = BTreeMap<VarId, Term>;

/// Domain-neutral rendering of a substitution, shared by text and JSON reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubstView {
    Bottom,
    /// Groundness: `(variable, mark)` in variable order.
    Marks(Vec<(String, String)>),
    /// Sharing+freeness: sharing groups and free variables.
    Sharing {
        sh: Vec<Vec<String>>,
        fr: Vec<String>,
    },
}

impl fmt::Display for SubstView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubstView::Bottom => f.write_str("⊥"),
            SubstView::Marks(marks) => {
                let parts: Vec<String> = marks.iter().map(|(v, m)| format!("{v}/{m}")).collect();
                f.write_str(&parts.join(", "))
            }
            SubstView::Sharing { sh, fr } => {
                let groups: Vec<String> = sh.iter().map(|g| format!("[{}]", g.join(","))).collect();
                write!(f, "sh: [{}]  fr: [{}]", groups.join(","), fr.join(","))
            }
        }
    }
}

/// The operation bundle every abstract domain provides.
///
/// Substitutions are values over a [`VarSet`]; every binary operation requires
/// matching variable sets and reports a [`DomainError`] otherwise.
pub trait Domain {
    type Subst: Clone + fmt::Debug + PartialEq;

    fn name(&self) -> &'static str;

    fn vars<'s>(&self, s: &'s Self::Subst) -> &'s VarSet;

    fn bottom(&self, vars: VarSet) -> Self::Subst;

    fn is_bottom(&self, s: &Self::Subst) -> bool;

    /// No information about `vars`.
    fn top(&self, vars: VarSet) -> Result<Self::Subst, DomainError>;

    fn lub(&self, a: &Self::Subst, b: &Self::Subst) -> Result<Self::Subst, DomainError>;

    fn leq(&self, a: &Self::Subst, b: &Self::Subst) -> Result<bool, DomainError>;

    /// Same lattice element. Domains with canonical representations may override
    /// this with structural equality; it must agree with mutual `leq`.
    fn identical(&self, a: &Self::Subst, b: &Self::Subst) -> Result<bool, DomainError> {
        Ok(self.leq(a, b)? && self.leq(b, a)?)
    }

    /// Adds `vars \ vars(s)` as unconstrained fresh variables.
    fn project_in(&self, vars: &VarSet, s: &Self::Subst) -> Result<Self::Subst, DomainError>;

    /// Restricts `s` to `vars`.
    fn project_out(&self, vars: &VarSet, s: &Self::Subst) -> Result<Self::Subst, DomainError>;

    /// Folds a success substitution over a goal's variables back into the
    /// caller's substitution.
    fn extend(&self, call: &Self::Subst, success: &Self::Subst)
        -> Result<Self::Subst, DomainError>;

    /// Product of two substitutions over disjoint variable sets.
    fn conjoin(&self, a: &Self::Subst, b: &Self::Subst) -> Result<Self::Subst, DomainError>;

    /// Abstract effect of the bindings `x = t` (an idempotent solved form).
    fn apply_bindings(
        &self,
        eqs: &[(VarId, Term)],
        s: &Self::Subst,
    ) -> Result<Self::Subst, DomainError>;

    /// Bijective renaming of the substitution's variables.
    fn rename(&self, s: &Self::Subst, f: &dyn Fn(VarId) -> VarId) -> Self::Subst;

    fn initial_from_entry(&self, entry: &EntryDecl) -> Result<Self::Subst, DomainError>;

    /// Transfer function for a builtin literal.
    fn builtin(
        &self,
        builtin: Builtin,
        args: &[Term],
        s: &Self::Subst,
    ) -> Result<Self::Subst, DomainError>;

    /// Concretization membership: does `binding` belong to the meaning of `s`?
    fn gamma_contains(&self, s: &Self::Subst, binding: &ConcreteBinding) -> bool;

    fn view(&self, s: &Self::Subst, name: &dyn Fn(VarId) -> String) -> SubstView;

    /// Abstract unification of term pairs whose variables all belong to `vars(s)`.
    fn unify(&self, pairs: &[(Term, Term)], s: &Self::Subst) -> Result<Self::Subst, DomainError> {
        let touched = VarSet::of_terms(pairs.iter().flat_map(|(a, b)| [a, b]));
        let vars = self.vars(s);
        if !touched.is_subset(vars) {
            return Err(DomainError::NotSubset {
                op: "unify",
                inner: touched,
                outer: vars.clone(),
            });
        }
        if self.is_bottom(s) {
            return Ok(s.clone());
        }
        match mgu(pairs) {
            Some(eqs) => self.apply_bindings(&eqs, s),
            None => Ok(self.bottom(vars.clone())),
        }
    }

    /// Entry substitution over the clause head's variables for calling `goal`
    /// with `proj` (over the goal's variables). The clause must be renamed apart.
    fn call_to_entry(
        &self,
        goal: &Term,
        clause: &Clause,
        proj: &Self::Subst,
    ) -> Result<Self::Subst, DomainError> {
        let (pairs, goal_vars, head_vars) = head_equations("call_to_entry", goal, clause)?;
        check_goal_vars(self.vars(proj), &goal_vars)?;
        if self.is_bottom(proj) {
            return Ok(self.bottom(head_vars));
        }
        let all = self.vars(proj).union(&head_vars);
        let s = self.project_in(&all, proj)?;
        let s = self.unify(&pairs, &s)?;
        self.project_out(&head_vars, &s)
    }

    /// Success substitution over the goal's variables after running `clause`
    /// to its exit substitution `exit` (over the head's variables).
    fn exit_to_success(
        &self,
        proj: &Self::Subst,
        goal: &Term,
        clause: &Clause,
        exit: &Self::Subst,
    ) -> Result<Self::Subst, DomainError> {
        let (pairs, goal_vars, head_vars) = head_equations("exit_to_success", goal, clause)?;
        check_goal_vars(self.vars(proj), &goal_vars)?;
        if self.vars(exit) != &head_vars {
            return Err(DomainError::VarSetMismatch {
                op: "exit_to_success",
                left: self.vars(exit).clone(),
                right: head_vars,
            });
        }
        if self.is_bottom(exit) || self.is_bottom(proj) {
            return Ok(self.bottom(self.vars(proj).clone()));
        }
        let s = self.conjoin(proj, exit)?;
        let s = self.unify(&pairs, &s)?;
        self.project_out(self.vars(proj), &s)
    }
}

fn check_goal_vars(proj_vars: &VarSet, goal_vars: &VarSet) -> Result<(), DomainError> {
    if goal_vars.is_subset(proj_vars) {
        Ok(())
    } else {
        Err(DomainError::NotSubset {
            op: "call_to_entry",
            inner: goal_vars.clone(),
            outer: proj_vars.clone(),
        })
    }
}

type HeadEquations = (Vec<(Term, Term)>, VarSet, VarSet);

fn head_equations(op: &'static str, goal: &Term, clause: &Clause) -> Result<HeadEquations, DomainError> {
    if goal.functor() != clause.head.functor() {
        return Err(DomainError::FunctorMismatch {
            op,
            goal: goal.to_string(),
            head: clause.head.to_string(),
        });
    }
    let goal_vars = VarSet::of_term(goal);
    let head_vars = VarSet::of_term(&clause.head);
    if !goal_vars.is_disjoint(&VarSet::new(clause.var_ids())) {
        return Err(DomainError::NotRenamedApart { op });
    }
    let pairs = goal
        .args()
        .iter()
        .cloned()
        .zip(clause.head.args().iter().cloned())
        .collect();
    Ok((pairs, goal_vars, head_vars))
}

/// Fails with [`DomainError::VarSetMismatch`] unless both sets are equal.
pub fn same_vars(op: &'static str, a: &VarSet, b: &VarSet) -> Result<(), DomainError> {
    if a == b {
        Ok(())
    } else {
        Err(DomainError::VarSetMismatch {
            op,
            left: a.clone(),
            right: b.clone(),
        })
    }
}
