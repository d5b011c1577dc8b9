use std::time::Instant;

use super::walk::{contexts, entry_pattern, resume_at, run_clause, Checkpoint, Host, Resolution, Shared};
use super::{finish, AbstLub, AnalysisError, AnalysisRequest, AnalysisResult, CallPattern, EngineKind, Table, TableEntry};
use crate::ir::{ClauseId, PredKey};
use crate::lattice::Domain;
use crate::tabling::{Delivery, Engine, EngineOptions, Evaluator, GenId};

pub(crate) struct Tabled<'p, D: Domain> {
    shared: Shared<'p, D>,
    agg: AbstLub<D>,
    seed: bool,
}

struct TabledHost<'a, 'p, D: Domain + Clone> {
    ev: &'a mut Tabled<'p, D>,
    engine: &'a mut Engine<Tabled<'p, D>>,
    owner: GenId,
}

impl<'p, D: Domain + Clone> Host<'p, D> for TabledHost<'_, 'p, D> {
    fn shared(&mut self) -> &mut Shared<'p, D> {
        &mut self.ev.shared
    }

    fn resolve(
        &mut self,
        at: Checkpoint<D::Subst>,
        key: PredKey,
        call: CallPattern<D::Subst>,
    ) -> Result<Resolution<D::Subst>, AnalysisError> {
        let site = (at.ctx.clause.id, at.pos);
        Ok(match self.engine.call(self.ev, self.owner, site, at, key, call)? {
            Delivery::Answer(a) => Resolution::Answer(a),
            Delivery::NoAnswer => Resolution::Fail,
            Delivery::Suspended => Resolution::Suspended,
        })
    }
}

impl<'p, D: Domain + Clone> Tabled<'p, D> {
    fn host<'a>(&'a mut self, engine: &'a mut Engine<Self>, owner: GenId) -> TabledHost<'a, 'p, D> {
        TabledHost {
            ev: self,
            engine,
            owner,
        }
    }
}

impl<'p, D: Domain + Clone> Evaluator for Tabled<'p, D> {
    type Key = PredKey;
    type Site = (ClauseId, usize);
    type Cont = Checkpoint<D::Subst>;
    type Agg = AbstLub<D>;
    type Error = AnalysisError;

    fn aggregate(&self) -> &AbstLub<D> {
        &self.agg
    }

    fn evaluate(&mut self, engine: &mut Engine<Self>, gen: GenId) -> Result<(), AnalysisError> {
        let g = engine.generator(gen);
        let (key, call) = (g.key.clone(), g.call.clone());
        let ctxs = contexts(&self.shared, &key, &call);
        let seeding = self.seed && self.shared.program.is_recursive(&key) && !engine.is_replaying();
        let (first, rest): (Vec<_>, Vec<_>) = if seeding {
            ctxs.into_iter().partition(|c| !c.clause.recursive)
        } else {
            (Vec::new(), ctxs)
        };
        if !first.is_empty() {
            let d = self.shared.domain.clone();
            let mut seed: Option<D::Subst> = None;
            for ctx in &first {
                if let Some(s) = run_clause(&mut self.host(engine, gen), ctx)? {
                    seed = Some(match seed {
                        Some(acc) => d.lub(&acc, &s)?,
                        None => s,
                    });
                }
            }
            if let Some(s) = seed {
                engine.add_answer(self, gen, s)?;
            }
        }
        for ctx in &rest {
            if let Some(s) = run_clause(&mut self.host(engine, gen), ctx)? {
                engine.add_answer(self, gen, s)?;
            }
        }
        Ok(())
    }

    fn resume(
        &mut self,
        engine: &mut Engine<Self>,
        owner: GenId,
        _site: &(ClauseId, usize),
        cont: &Checkpoint<D::Subst>,
        answer: &D::Subst,
    ) -> Result<(), AnalysisError> {
        if let Some(s) = resume_at(&mut self.host(engine, owner), cont, answer)? {
            engine.add_answer(self, owner, s)?;
        }
        Ok(())
    }

    fn merge_cont(&self, old: &Checkpoint<D::Subst>, new: &Checkpoint<D::Subst>) -> Result<Checkpoint<D::Subst>, AnalysisError> {
        Ok(Checkpoint {
            lambda: self.shared.domain.lub(&old.lambda, &new.lambda)?,
            ..new.clone()
        })
    }

    fn describe(&self, key: &PredKey, call: &CallPattern<D::Subst>) -> String {
        let names = |v: crate::ir::VarId| super::walk::var_name(v.0 as usize);
        format!("{key} {} : {}", call.goal, self.shared.domain.view(&call.proj, &names))
    }
}

/// Analyzes `request.entry` with the tabling engine.
pub fn analyze<D: Domain + Clone>(domain: &D, request: &AnalysisRequest<'_>) -> Result<AnalysisResult<D::Subst>, AnalysisError> {
    let program = request.program;
    let entry = request.entry;
    let key = entry.key();
    let root = entry_pattern(domain, entry)?;
    let mut ev = Tabled {
        shared: Shared::new(program, domain.clone()),
        agg: AbstLub {
            domain: domain.clone(),
        },
        seed: request.options.seed_nonrec,
    };
    let mut engine = Engine::new(EngineOptions {
        resume: request.options.resume,
        step_budget: request.options.step_budget,
        more_general: request.options.more_general,
    });
    let start = Instant::now();
    if program.is_defined(&key) {
        engine.run_to_completion(&mut ev, key.clone(), root.clone())?;
    }
    let elapsed = start.elapsed();
    let mut counters = *engine.counters();
    counters.body_evals = ev.shared.body_evals;
    let replayed = engine.replay_all(&mut ev)?;
    let table = Table {
        entries: engine
            .generators()
            .map(|(_, g)| TableEntry {
                key: g.key.clone(),
                call: g.call.clone(),
                answer: g.answer.clone(),
            })
            .collect(),
    };
    let warnings = ev.shared.warnings.iter().cloned().collect();
    let mut result = finish(domain, request, EngineKind::Tabled, table, root, counters, elapsed, warnings)?;
    result.unstable += replayed.updated;
    Ok(result)
}
