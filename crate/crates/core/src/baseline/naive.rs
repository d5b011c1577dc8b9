//! Version-number fixpoint: every table entry remembers the versions of the
//! entries it read, and is re-evaluated from scratch whenever one of them moves.

use std::time::Instant;

use crate::ir::PredKey;
use crate::lattice::Domain;
use crate::plai::walk::{contexts, entry_pattern, run_clause, Checkpoint, Host, Resolution, Shared};
use crate::plai::{finish, AbstLub, AnalysisError, AnalysisRequest, AnalysisResult, CallPattern, EngineKind, Table, TableEntry};
use crate::tabling::{Aggregate, Counters};

struct Entry<S> {
    key: PredKey,
    call: CallPattern<S>,
    answer: Option<S>,
    version: u64,
    deps: Vec<(usize, u64)>,
    in_progress: bool,
}

struct Naive<'p, D: Domain> {
    shared: Shared<'p, D>,
    agg: AbstLub<D>,
    more_general: bool,
    entries: Vec<Entry<D::Subst>>,
    stack: Vec<usize>,
    counters: Counters,
    steps: u64,
    budget: u64,
}

impl<'p, D: Domain + Clone> Naive<'p, D> {
    fn step(&mut self) -> Result<(), AnalysisError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(AnalysisError::NaiveBudget(self.budget));
        }
        Ok(())
    }

    fn find(&self, key: &PredKey, call: &CallPattern<D::Subst>) -> Result<Option<usize>, AnalysisError> {
        for (i, e) in self.entries.iter().enumerate() {
            if &e.key == key && self.agg.call_entail(&e.call, call)? {
                return Ok(Some(i));
            }
        }
        if self.more_general {
            for (i, e) in self.entries.iter().enumerate() {
                if &e.key == key && self.agg.call_more_general(&e.call, call)? {
                    return Ok(Some(i));
                }
            }
        }
        Ok(None)
    }

    fn stale(&self, i: usize) -> bool {
        self.entries[i]
            .deps
            .iter()
            .any(|&(j, v)| self.entries[j].version != v)
    }

    fn create(&mut self, key: PredKey, call: CallPattern<D::Subst>) -> usize {
        self.entries.push(Entry {
            key,
            call,
            answer: None,
            version: 0,
            deps: Vec::new(),
            in_progress: false,
        });
        self.counters.generators += 1;
        self.entries.len() - 1
    }

    fn evaluate(&mut self, i: usize) -> Result<(), AnalysisError> {
        self.entries[i].in_progress = true;
        self.stack.push(i);
        loop {
            self.step()?;
            self.entries[i].deps.clear();
            let e = &self.entries[i];
            let ctxs = contexts(&self.shared, &e.key, &e.call);
            let old = e.answer.clone();
            let mut acc = old.clone();
            for ctx in &ctxs {
                self.step()?;
                if let Some(s) = run_clause(self, ctx)? {
                    self.counters.answers_proposed += 1;
                    acc = Some(match acc {
                        Some(a) => self.shared.domain.lub(&a, &s)?,
                        None => s,
                    });
                }
            }
            let changed = match (&old, &acc) {
                (None, Some(_)) => true,
                (Some(o), Some(n)) => !self.shared.domain.leq(n, o)?,
                _ => false,
            };
            if changed {
                let e = &mut self.entries[i];
                e.answer = acc;
                e.version += 1;
                self.counters.answers_joined += 1;
            }
            if !self.stale(i) {
                break;
            }
            self.counters.restarts += 1;
        }
        self.stack.pop();
        self.entries[i].in_progress = false;
        Ok(())
    }
}

impl<'p, D: Domain + Clone> Host<'p, D> for Naive<'p, D> {
    fn shared(&mut self) -> &mut Shared<'p, D> {
        &mut self.shared
    }

    fn resolve(
        &mut self,
        _at: Checkpoint<D::Subst>,
        key: PredKey,
        call: CallPattern<D::Subst>,
    ) -> Result<Resolution<D::Subst>, AnalysisError> {
        self.step()?;
        let j = match self.find(&key, &call)? {
            Some(j) => {
                if !self.entries[j].in_progress && self.stale(j) {
                    self.counters.restarts += 1;
                    self.evaluate(j)?;
                }
                j
            }
            None => {
                let j = self.create(key, call);
                self.evaluate(j)?;
                j
            }
        };
        let caller = *self.stack.last().expect("resolve outside an evaluation");
        let version = self.entries[j].version;
        self.entries[caller].deps.push((j, version));
        Ok(match &self.entries[j].answer {
            Some(a) => Resolution::Answer(a.clone()),
            None => Resolution::Fail,
        })
    }
}

/// Analyzes `request.entry` with the version-number fixpoint.
pub fn naive_analyze<D: Domain + Clone>(domain: &D, request: &AnalysisRequest<'_>) -> Result<AnalysisResult<D::Subst>, AnalysisError> {
    let program = request.program;
    let key = request.entry.key();
    let root = entry_pattern(domain, request.entry)?;
    let mut n = Naive {
        shared: Shared::new(program, domain.clone()),
        agg: AbstLub {
            domain: domain.clone(),
        },
        more_general: request.options.more_general,
        entries: Vec::new(),
        stack: Vec::new(),
        counters: Counters::default(),
        steps: 0,
        budget: request.options.step_budget,
    };
    let start = Instant::now();
    if program.is_defined(&key) {
        let r = n.create(key, root.clone());
        n.evaluate(r)?;
        while let Some(i) = (0..n.entries.len()).find(|&i| n.stale(i)) {
            n.counters.restarts += 1;
            n.evaluate(i)?;
        }
    }
    let elapsed = start.elapsed();
    n.counters.body_evals = n.shared.body_evals;
    let warnings = n.shared.warnings.iter().cloned().collect();
    let table = Table {
        entries: n
            .entries
            .into_iter()
            .map(|e| TableEntry {
                key: e.key,
                call: e.call,
                answer: e.answer,
            })
            .collect(),
    };
    finish(domain, request, EngineKind::Naive, table, root, n.counters, elapsed, warnings)
}
