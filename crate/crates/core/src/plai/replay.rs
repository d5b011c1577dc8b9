use std::collections::VecDeque;
use std::time::Duration;

use super::walk::{contexts, run_clause, Checkpoint, Host, Resolution, Shared};
use super::{AbstLub, AnalysisError, AnalysisRequest, AnalysisResult, CallPattern, Complete, EngineKind};
use crate::ir::{Builtin, PredKey};
use crate::lattice::Domain;
use crate::tabling::{Aggregate, Counters, EngineError};

pub(crate) struct TableEntry<S> {
    pub key: PredKey,
    pub call: CallPattern<S>,
    pub answer: Option<S>,
}

/// A finished fixpoint, in creation order.
pub(crate) struct Table<S> {
    pub entries: Vec<TableEntry<S>>,
}

struct Frozen<'t, 'p, D: Domain> {
    shared: Shared<'p, D>,
    agg: AbstLub<D>,
    table: &'t Table<D::Subst>,
    more_general: bool,
    seen: Vec<bool>,
    found: VecDeque<usize>,
}

impl<D: Domain + Clone> Frozen<'_, '_, D> {
    fn lookup(&self, key: &PredKey, call: &CallPattern<D::Subst>) -> Result<usize, AnalysisError> {
        let same_key = || self.table.entries.iter().enumerate().filter(|(_, e)| &e.key == key);
        for (i, e) in same_key() {
            if self.agg.call_entail(&e.call, call)? {
                return Ok(i);
            }
        }
        if self.more_general {
            for (i, e) in same_key() {
                if self.agg.call_more_general(&e.call, call)? {
                    return Ok(i);
                }
            }
        }
        let names = |v: crate::ir::VarId| super::walk::var_name(v.0 as usize);
        let shown = format!("{key} {} : {}", call.goal, self.shared.domain.view(&call.proj, &names));
        Err(EngineError::ReplayMiss(shown).into())
    }
}

impl<'p, D: Domain + Clone> Host<'p, D> for Frozen<'_, 'p, D> {
    fn shared(&mut self) -> &mut Shared<'p, D> {
        &mut self.shared
    }

    fn resolve(
        &mut self,
        _at: Checkpoint<D::Subst>,
        key: PredKey,
        call: CallPattern<D::Subst>,
    ) -> Result<Resolution<D::Subst>, AnalysisError> {
        let i = self.lookup(&key, &call)?;
        if !self.seen[i] {
            self.seen[i] = true;
            self.found.push_back(i);
        }
        Ok(match &self.table.entries[i].answer {
            Some(a) => Resolution::Answer(a.clone()),
            None => Resolution::Fail,
        })
    }
}

/// Lub of every clause's success for entry `i` against the frozen table.
fn evaluate<D: Domain + Clone>(f: &mut Frozen<'_, '_, D>, i: usize) -> Result<Option<D::Subst>, AnalysisError> {
    let entry = &f.table.entries[i];
    let ctxs = contexts(&f.shared, &entry.key, &entry.call);
    let mut acc: Option<D::Subst> = None;
    for ctx in &ctxs {
        if let Some(s) = run_clause(f, ctx)? {
            acc = Some(match acc {
                Some(a) => f.shared.domain.lub(&a, &s)?,
                None => s,
            });
        }
    }
    Ok(acc)
}

/// Reads the result of a finished fixpoint back out of its table: program
/// points and completes come from re-running every call reachable from the
/// entry, and stability from re-running every entry.
#[allow(clippy::too_many_arguments)]
pub(crate) fn finish<D: Domain + Clone>(
    domain: &D,
    request: &AnalysisRequest<'_>,
    engine: EngineKind,
    table: Table<D::Subst>,
    root: CallPattern<D::Subst>,
    counters: Counters,
    elapsed: Duration,
    mut warnings: Vec<String>,
) -> Result<AnalysisResult<D::Subst>, AnalysisError> {
    let program = request.program;
    let entry = request.entry;
    let key = entry.key();
    let mut result = AnalysisResult {
        domain: domain.name(),
        engine,
        entry: entry.clone(),
        completes: Vec::new(),
        points: Default::default(),
        counters,
        warnings: Vec::new(),
        elapsed,
        table_size: table.entries.len(),
        unstable: 0,
    };
    if !program.is_defined(&key) {
        let Some(b) = Builtin::of(&root.goal) else {
            return Err(AnalysisError::UnknownEntry(key));
        };
        let success = domain.builtin(b, root.goal.args(), &root.proj)?;
        result.completes.push(Complete {
            key,
            goal: root.goal,
            call: root.proj,
            success,
        });
        result.warnings = warnings;
        return Ok(result);
    }
    let mut f = Frozen {
        shared: Shared::new(program, domain.clone()),
        agg: AbstLub {
            domain: domain.clone(),
        },
        table: &table,
        more_general: request.options.more_general,
        seen: vec![false; table.entries.len()],
        found: VecDeque::new(),
    };

    let r = f.lookup(&key, &root)?;
    f.seen[r] = true;
    f.found.push_back(r);
    f.shared.record = true;
    while let Some(i) = f.found.pop_front() {
        evaluate(&mut f, i)?;
        let e = &table.entries[i];
        result.completes.push(Complete {
            key: e.key.clone(),
            goal: e.call.goal.clone(),
            call: e.call.proj.clone(),
            success: e
                .answer
                .clone()
                .unwrap_or_else(|| domain.bottom(domain.vars(&e.call.proj).clone())),
        });
    }
    f.shared.record = false;
    result.points = std::mem::take(&mut f.shared.points);

    for i in 0..table.entries.len() {
        let fresh = evaluate(&mut f, i)?;
        let stable = match (&fresh, &table.entries[i].answer) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(n), Some(saved)) => domain.leq(n, saved)?,
        };
        if !stable {
            result.unstable += 1;
        }
    }

    for w in std::mem::take(&mut f.shared.warnings) {
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    }
    result.warnings = warnings;
    Ok(result)
}
