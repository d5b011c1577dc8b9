//! Clause-body traversal shared by every fixpoint strategy.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use super::{AnalysisError, CallPattern};
use crate::ir::{mgu, rename_apart, Builtin, Clause, ClauseId, EntryDecl, FreshIds, PredKey, Program, Term, Var, VarId};
use crate::lattice::{Domain, VarSet};

pub(crate) struct Shared<'p, D: Domain> {
    pub program: &'p Program,
    pub domain: D,
    pub points: BTreeMap<(ClauseId, usize), D::Subst>,
    pub warnings: BTreeSet<String>,
    /// Program points are only recorded while set.
    pub record: bool,
    pub body_evals: u64,
}

impl<'p, D: Domain> Shared<'p, D> {
    pub fn new(program: &'p Program, domain: D) -> Self {
        Shared {
            program,
            domain,
            points: BTreeMap::new(),
            warnings: BTreeSet::new(),
            record: false,
            body_evals: 0,
        }
    }
}

/// A clause renamed apart from one call pattern.
pub(crate) struct ClauseCtx<S> {
    pub clause: Clause,
    /// Renamed variable to the clause's own variable.
    pub back: BTreeMap<VarId, Var>,
    pub vars: VarSet,
    pub head_vars: VarSet,
    pub call: CallPattern<S>,
}

#[derive(Clone)]
pub(crate) struct Checkpoint<S> {
    pub ctx: Rc<ClauseCtx<S>>,
    pub pos: usize,
    pub lambda: S,
}

pub(crate) enum Resolution<S> {
    Answer(S),
    Fail,
    Suspended,
}

/// How a strategy answers calls to user predicates.
pub(crate) trait Host<'p, D: Domain> {
    fn shared(&mut self) -> &mut Shared<'p, D>;

    fn resolve(
        &mut self,
        at: Checkpoint<D::Subst>,
        key: PredKey,
        call: CallPattern<D::Subst>,
    ) -> Result<Resolution<D::Subst>, AnalysisError>;
}

pub(crate) fn var_name(i: usize) -> String {
    let letter = char::from(b'A' + (i % 26) as u8);
    if i < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", i / 26)
    }
}

/// Renames `goal` and its projected substitution onto variables `0..k` in
/// order of first occurrence. Returns the original variable of each position.
pub(crate) fn normalize<D: Domain>(d: &D, goal: &Term, proj: &D::Subst) -> (CallPattern<D::Subst>, Vec<VarId>) {
    let order: Vec<VarId> = goal.vars().into_iter().map(|v| v.id).collect();
    let to: BTreeMap<VarId, Var> = order
        .iter()
        .enumerate()
        .map(|(i, v)| (*v, Var::new(i as u32, var_name(i))))
        .collect();
    let skeleton = goal.rename(&to);
    let proj = d.rename(proj, &|v| to[&v].id);
    (
        CallPattern {
            goal: skeleton,
            proj,
        },
        order,
    )
}

pub(crate) fn entry_pattern<D: Domain>(d: &D, entry: &EntryDecl) -> Result<CallPattern<D::Subst>, AnalysisError> {
    let init = d.initial_from_entry(entry)?;
    Ok(normalize(d, &entry.goal, &init).0)
}

/// Clauses of `key` whose head unifies with the call skeleton, renamed apart.
pub(crate) fn contexts<D: Domain>(
    shared: &Shared<'_, D>,
    key: &PredKey,
    call: &CallPattern<D::Subst>,
) -> Vec<Rc<ClauseCtx<D::Subst>>> {
    let k = call.goal.vars().len() as u32;
    shared
        .program
        .clauses(key)
        .iter()
        .filter_map(|c| {
            let renamed = rename_apart(c, &mut FreshIds::starting_at(k));
            mgu(&[(call.goal.clone(), renamed.head.clone())])?;
            let back = renamed
                .vars()
                .into_iter()
                .zip(c.vars())
                .map(|(r, o)| (r.id, o))
                .collect();
            Some(Rc::new(ClauseCtx {
                vars: VarSet::new(renamed.var_ids()),
                head_vars: VarSet::of_term(&renamed.head),
                clause: renamed,
                back,
                call: call.clone(),
            }))
        })
        .collect()
}

/// Projected success of one clause for its call pattern, or `None` when the
/// clause fails or suspends.
pub(crate) fn run_clause<'p, D: Domain, H: Host<'p, D>>(
    host: &mut H,
    ctx: &Rc<ClauseCtx<D::Subst>>,
) -> Result<Option<D::Subst>, AnalysisError> {
    let sh = host.shared();
    sh.body_evals += 1;
    let d = &sh.domain;
    let entry = d.call_to_entry(&ctx.call.goal, &ctx.clause, &ctx.call.proj)?;
    if d.is_bottom(&entry) {
        return Ok(None);
    }
    let lambda = d.project_in(&ctx.vars, &entry)?;
    walk(host, ctx, 0, lambda)
}

/// Continues after the literal at `at.pos` received `answer`.
pub(crate) fn resume_at<'p, D: Domain, H: Host<'p, D>>(
    host: &mut H,
    at: &Checkpoint<D::Subst>,
    answer: &D::Subst,
) -> Result<Option<D::Subst>, AnalysisError> {
    let sh = host.shared();
    sh.body_evals += 1;
    let goal = &at.ctx.clause.body[at.pos];
    let lambda = extend_with(&sh.domain, goal, &at.lambda, answer)?;
    walk(host, &at.ctx, at.pos + 1, lambda)
}

fn extend_with<D: Domain>(d: &D, goal: &Term, lambda: &D::Subst, answer: &D::Subst) -> Result<D::Subst, AnalysisError> {
    let order: Vec<VarId> = goal.vars().into_iter().map(|v| v.id).collect();
    let success = d.rename(answer, &|v| order[v.0 as usize]);
    Ok(d.extend(lambda, &success)?)
}

fn record<D: Domain>(sh: &mut Shared<'_, D>, ctx: &ClauseCtx<D::Subst>, point: usize, lambda: &D::Subst) -> Result<(), AnalysisError> {
    if !sh.record {
        return Ok(());
    }
    let d = &sh.domain;
    let local = d.rename(lambda, &|v| ctx.back[&v].id);
    let merged = match sh.points.get(&(ctx.clause.id, point)) {
        Some(old) => d.lub(old, &local)?,
        None => local,
    };
    sh.points.insert((ctx.clause.id, point), merged);
    Ok(())
}

pub(crate) fn walk<'p, D: Domain, H: Host<'p, D>>(
    host: &mut H,
    ctx: &Rc<ClauseCtx<D::Subst>>,
    from: usize,
    mut lambda: D::Subst,
) -> Result<Option<D::Subst>, AnalysisError> {
    let body = &ctx.clause.body;
    for pos in from..body.len() {
        let sh = host.shared();
        if sh.domain.is_bottom(&lambda) {
            for p in pos + 1..=body.len() + 1 {
                record(sh, ctx, p, &lambda)?;
            }
            return Ok(None);
        }
        record(sh, ctx, pos + 1, &lambda)?;
        let goal = &body[pos];
        if let Some(b) = Builtin::of(goal) {
            lambda = sh.domain.builtin(b, goal.args(), &lambda)?;
            continue;
        }
        let key = goal.functor().expect("body literal is an atom or compound");
        let gvars = VarSet::of_term(goal);
        let proj = sh.domain.project_out(&gvars, &lambda)?;
        if !sh.program.is_defined(&key) {
            sh.warnings
                .insert(format!("unknown predicate {key}: success assumed to be top"));
            let top = sh.domain.top(gvars)?;
            lambda = sh.domain.extend(&lambda, &top)?;
            continue;
        }
        let (call, _) = normalize(&sh.domain, goal, &proj);
        let at = Checkpoint {
            ctx: ctx.clone(),
            pos,
            lambda: lambda.clone(),
        };
        match host.resolve(at, key, call)? {
            Resolution::Answer(a) => {
                lambda = extend_with(&host.shared().domain, goal, &lambda, &a)?;
            }
            Resolution::Fail => {
                let sh = host.shared();
                let bottom = sh.domain.bottom(ctx.vars.clone());
                for p in pos + 2..=body.len() + 1 {
                    record(sh, ctx, p, &bottom)?;
                }
                return Ok(None);
            }
            Resolution::Suspended => return Ok(None),
        }
    }
    let sh = host.shared();
    record(sh, ctx, body.len() + 1, &lambda)?;
    let d = &sh.domain;
    if d.is_bottom(&lambda) {
        return Ok(None);
    }
    let exit = d.project_out(&ctx.head_vars, &lambda)?;
    let success = d.exit_to_success(&ctx.call.proj, &ctx.call.goal, &ctx.clause, &exit)?;
    Ok((!d.is_bottom(&success)).then_some(success))
}
