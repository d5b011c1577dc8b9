//! A tabling engine with answer aggregation.
//!
//! Calls are grouped into generators by call equivalence. Each generator keeps
//! one aggregated answer; consumers of an incomplete generator are re-entered
//! from a checkpoint whenever that answer grows. Mutually dependent generators
//! complete together once their leader has no pending resumptions.

pub mod min;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

/// The four operations the engine needs from an answer lattice.
pub trait Aggregate {
    type Call: Clone + fmt::Debug;
    type Answer: Clone + fmt::Debug;
    type Error;

    fn call_entail(&self, a: &Self::Call, b: &Self::Call) -> Result<bool, Self::Error>;

    /// Whether answers for `general` may serve `specific`. Only consulted when
    /// more-general reuse is enabled.
    fn call_more_general(
        &self,
        _general: &Self::Call,
        _specific: &Self::Call,
    ) -> Result<bool, Self::Error> {
        Ok(false)
    }

    /// `new` adds nothing to `saved`.
    fn answer_entail(&self, new: &Self::Answer, saved: &Self::Answer) -> Result<bool, Self::Error>;

    fn answer_join(&self, saved: &Self::Answer, new: &Self::Answer) -> Result<Self::Answer, Self::Error>;

    fn apply_answer(&self, saved: &Self::Answer) -> Self::Answer {
        saved.clone()
    }
}

pub type CallOf<E> = <<E as Evaluator>::Agg as Aggregate>::Call;
pub type AnswerOf<E> = <<E as Evaluator>::Agg as Aggregate>::Answer;

/// The program being tabled: evaluates generator bodies and re-enters
/// suspended continuations.
pub trait Evaluator: Sized {
    type Key: Clone + Ord + fmt::Display;
    type Site: Clone + Ord + fmt::Debug;
    type Cont: Clone;
    type Agg: Aggregate;
    type Error: From<EngineError> + From<<Self::Agg as Aggregate>::Error>;

    fn aggregate(&self) -> &Self::Agg;

    /// Runs the body of `gen` from scratch, reporting answers through
    /// [`Engine::add_answer`].
    fn evaluate(&mut self, engine: &mut Engine<Self>, gen: GenId) -> Result<(), Self::Error>;

    /// Continues a suspended computation of `owner` with a new answer.
    fn resume(
        &mut self,
        engine: &mut Engine<Self>,
        owner: GenId,
        site: &Self::Site,
        cont: &Self::Cont,
        answer: &AnswerOf<Self>,
    ) -> Result<(), Self::Error>;

    /// Combines two checkpoints recorded at the same site.
    fn merge_cont(&self, old: &Self::Cont, new: &Self::Cont) -> Result<Self::Cont, Self::Error>;

    fn describe(&self, key: &Self::Key, _call: &CallOf<Self>) -> String {
        key.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("step budget of {limit} exhausted; suspected non-terminating generator: {generator}")]
    StepBudget { limit: u64, generator: String },
    #[error("answer added to completed generator {0}")]
    AnswerOnComplete(String),
    #[error("{count} consumers of {generator} completed without seeing its final answer")]
    LostResumption { generator: String, count: usize },
    #[error("replay reached a call with no table entry under {0}")]
    ReplayMiss(String),
}

impl EngineError {
    pub fn is_resource(&self) -> bool {
        matches!(self, EngineError::StepBudget { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConsumerId(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Evaluating,
    Complete,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ResumeOrder {
    #[default]
    Lifo,
    Fifo,
}

#[derive(Clone, Copy, Debug)]
pub struct EngineOptions {
    pub resume: ResumeOrder,
    pub step_budget: u64,
    pub more_general: bool,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            resume: ResumeOrder::Lifo,
            step_budget: DEFAULT_STEP_BUDGET,
            more_general: false,
        }
    }
}

/// Run statistics. `body_evals` and `restarts` are maintained by evaluators.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counters {
    pub generators: u64,
    pub suspensions: u64,
    pub resumptions: u64,
    pub answers_proposed: u64,
    pub answers_joined: u64,
    pub answers_discarded: u64,
    pub body_evals: u64,
    pub restarts: u64,
}

#[derive(Clone, Debug)]
pub struct Generator<K, C, A> {
    pub key: K,
    pub call: C,
    pub answer: Option<A>,
    pub status: Status,
    pub stamp: u64,
    pub proposed: u64,
    pub joined: u64,
    pub resumptions: u64,
    dfn: usize,
    lowlink: usize,
    consumers: Vec<ConsumerId>,
}

struct Consumer<S, C> {
    producer: GenId,
    owner: GenId,
    site: S,
    cont: C,
    seen: u64,
    queued: bool,
    live: bool,
}

#[derive(Debug)]
pub enum CallOutcome {
    ReuseComplete(GenId),
    SuspendOn(GenId),
    NewGenerator(GenId),
}

/// What a caller may continue with.
#[derive(Clone, Debug, PartialEq)]
pub enum Delivery<A> {
    Answer(A),
    /// The generator completed without answers: the call fails.
    NoAnswer,
    /// No answer yet; the continuation runs once one arrives.
    Suspended,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddOutcome {
    Unchanged,
    Updated,
}

#[derive(Clone, Debug, Default)]
pub struct ReplayReport {
    pub updated: usize,
    pub visited: BTreeSet<GenId>,
}

struct Replay {
    updated: usize,
    visited: BTreeSet<GenId>,
    pending: Vec<GenId>,
}

type GenOf<E> = Generator<<E as Evaluator>::Key, CallOf<E>, AnswerOf<E>>;

pub struct Engine<E: Evaluator> {
    options: EngineOptions,
    gens: Vec<GenOf<E>>,
    table: BTreeMap<E::Key, Vec<GenId>>,
    consumers: Vec<Consumer<E::Site, E::Cont>>,
    by_site: BTreeMap<(GenId, E::Site), ConsumerId>,
    stack: Vec<GenId>,
    queue: VecDeque<ConsumerId>,
    stamp: u64,
    steps: u64,
    counters: Counters,
    replay: Option<Replay>,
}

impl<E: Evaluator> Engine<E> {
    pub fn new(options: EngineOptions) -> Self {
        Engine {
            options,
            gens: Vec::new(),
            table: BTreeMap::new(),
            consumers: Vec::new(),
            by_site: BTreeMap::new(),
            stack: Vec::new(),
            queue: VecDeque::new(),
            stamp: 0,
            steps: 0,
            counters: Counters::default(),
            replay: None,
        }
    }

    pub fn options(&self) -> &EngineOptions {
        &self.options
    }

    pub fn generator(&self, id: GenId) -> &GenOf<E> {
        &self.gens[id.0]
    }

    pub fn generators(&self) -> impl Iterator<Item = (GenId, &GenOf<E>)> {
        self.gens.iter().enumerate().map(|(i, g)| (GenId(i), g))
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn counters_mut(&mut self) -> &mut Counters {
        &mut self.counters
    }

    pub fn is_replaying(&self) -> bool {
        self.replay.is_some()
    }

    fn step(&mut self, ev: &E) -> Result<(), EngineError> {
        self.steps += 1;
        if self.steps <= self.options.step_budget {
            return Ok(());
        }
        let busiest = self
            .gens
            .iter()
            .filter(|g| g.status == Status::Evaluating)
            .max_by_key(|g| g.joined + g.resumptions)
            .or(self.gens.last());
        Err(EngineError::StepBudget {
            limit: self.options.step_budget,
            generator: busiest.map_or_else(String::new, |g| ev.describe(&g.key, &g.call)),
        })
    }

    fn find(&self, ev: &E, key: &E::Key, call: &CallOf<E>) -> Result<Option<GenId>, E::Error> {
        let Some(ids) = self.table.get(key) else {
            return Ok(None);
        };
        for id in ids {
            if ev.aggregate().call_entail(&self.gens[id.0].call, call)? {
                return Ok(Some(*id));
            }
        }
        if self.options.more_general {
            for id in ids {
                if ev.aggregate().call_more_general(&self.gens[id.0].call, call)? {
                    return Ok(Some(*id));
                }
            }
        }
        Ok(None)
    }

    /// Looks up an equivalent generator or registers a new one (not yet run).
    pub fn tabled_call(&mut self, ev: &E, key: E::Key, call: CallOf<E>) -> Result<CallOutcome, E::Error> {
        if let Some(id) = self.find(ev, &key, &call)? {
            return Ok(match self.gens[id.0].status {
                Status::Complete => CallOutcome::ReuseComplete(id),
                Status::Evaluating => CallOutcome::SuspendOn(id),
            });
        }
        if self.replay.is_some() {
            return Err(EngineError::ReplayMiss(ev.describe(&key, &call)).into());
        }
        let id = GenId(self.gens.len());
        let dfn = self.gens.len();
        self.gens.push(Generator {
            key: key.clone(),
            call,
            answer: None,
            status: Status::Evaluating,
            stamp: 0,
            proposed: 0,
            joined: 0,
            resumptions: 0,
            dfn,
            lowlink: dfn,
            consumers: Vec::new(),
        });
        self.table.entry(key).or_default().push(id);
        self.counters.generators += 1;
        Ok(CallOutcome::NewGenerator(id))
    }

    fn delivered(&self, ev: &E, id: GenId) -> Delivery<AnswerOf<E>> {
        match &self.gens[id.0].answer {
            Some(a) => Delivery::Answer(ev.aggregate().apply_answer(a)),
            None if self.gens[id.0].status == Status::Complete => Delivery::NoAnswer,
            None => Delivery::Suspended,
        }
    }

    /// A tabled call made from the body of `owner` at `site`. When the callee
    /// is still evaluating, `cont` is kept and re-entered on every answer change.
    pub fn call(
        &mut self,
        ev: &mut E,
        owner: GenId,
        site: E::Site,
        cont: E::Cont,
        key: E::Key,
        call: CallOf<E>,
    ) -> Result<Delivery<AnswerOf<E>>, E::Error> {
        self.step(ev)?;
        let id = match self.tabled_call(ev, key, call)? {
            CallOutcome::ReuseComplete(id) => {
                if let Some(r) = &mut self.replay {
                    if r.visited.insert(id) {
                        r.pending.push(id);
                    }
                }
                return Ok(self.delivered(ev, id));
            }
            CallOutcome::NewGenerator(id) => {
                self.solve(ev, id)?;
                if self.gens[id.0].status == Status::Complete {
                    return Ok(self.delivered(ev, id));
                }
                id
            }
            CallOutcome::SuspendOn(id) => id,
        };
        let dfn = self.gens[id.0].dfn;
        let o = &mut self.gens[owner.0];
        o.lowlink = o.lowlink.min(dfn);
        self.register(ev, owner, site, cont, id)?;
        Ok(self.delivered(ev, id))
    }

    fn register(
        &mut self,
        ev: &E,
        owner: GenId,
        site: E::Site,
        cont: E::Cont,
        producer: GenId,
    ) -> Result<(), E::Error> {
        let seen = self.gens[producer.0].stamp;
        if let Some(&cid) = self.by_site.get(&(owner, site.clone())) {
            let c = &mut self.consumers[cid.0];
            if c.live && c.producer == producer {
                c.cont = ev.merge_cont(&c.cont, &cont)?;
                c.seen = seen;
                return Ok(());
            }
            let old = c.producer;
            c.live = false;
            self.gens[old.0].consumers.retain(|x| *x != cid);
        }
        let cid = ConsumerId(self.consumers.len());
        self.consumers.push(Consumer {
            producer,
            owner,
            site: site.clone(),
            cont,
            seen,
            queued: false,
            live: true,
        });
        self.gens[producer.0].consumers.push(cid);
        self.by_site.insert((owner, site), cid);
        self.counters.suspensions += 1;
        Ok(())
    }

    /// Reports a candidate answer for `gen`.
    pub fn add_answer(&mut self, ev: &E, gen: GenId, candidate: AnswerOf<E>) -> Result<AddOutcome, E::Error> {
        let agg = ev.aggregate();
        if let Some(r) = &mut self.replay {
            let g = &self.gens[gen.0];
            let unchanged = match &g.answer {
                None => false,
                Some(saved) => agg.answer_entail(&candidate, saved)?,
            };
            if unchanged {
                return Ok(AddOutcome::Unchanged);
            }
            r.updated += 1;
            return Ok(AddOutcome::Updated);
        }
        self.step(ev)?;
        let g = &self.gens[gen.0];
        if g.status == Status::Complete {
            return Err(EngineError::AnswerOnComplete(ev.describe(&g.key, &g.call)).into());
        }
        self.counters.answers_proposed += 1;
        let joined = match &g.answer {
            None => candidate,
            Some(saved) => {
                if agg.answer_entail(&candidate, saved)? {
                    self.counters.answers_discarded += 1;
                    self.gens[gen.0].proposed += 1;
                    return Ok(AddOutcome::Unchanged);
                }
                agg.answer_join(saved, &candidate)?
            }
        };
        self.stamp += 1;
        self.counters.answers_joined += 1;
        let g = &mut self.gens[gen.0];
        g.proposed += 1;
        g.joined += 1;
        g.answer = Some(joined);
        g.stamp = self.stamp;
        for cid in g.consumers.clone() {
            let c = &mut self.consumers[cid.0];
            if !c.queued {
                c.queued = true;
                self.queue.push_back(cid);
            }
        }
        Ok(AddOutcome::Updated)
    }

    fn next_pending(&mut self, leader_dfn: usize) -> Option<ConsumerId> {
        let eligible = |e: &Self, cid: &ConsumerId| e.gens[e.consumers[cid.0].owner.0].dfn >= leader_dfn;
        let pos = match self.options.resume {
            ResumeOrder::Lifo => self.queue.iter().rposition(|c| eligible(self, c)),
            ResumeOrder::Fifo => self.queue.iter().position(|c| eligible(self, c)),
        }?;
        self.queue.remove(pos)
    }

    fn resume_one(&mut self, ev: &mut E, cid: ConsumerId) -> Result<(), E::Error> {
        let c = &mut self.consumers[cid.0];
        c.queued = false;
        let producer = c.producer;
        let stamp = self.gens[producer.0].stamp;
        if !c.live || c.seen == stamp {
            return Ok(());
        }
        c.seen = stamp;
        let (owner, site, cont) = (c.owner, c.site.clone(), c.cont.clone());
        let Some(saved) = &self.gens[producer.0].answer else {
            return Ok(());
        };
        let answer = ev.aggregate().apply_answer(saved);
        self.step(ev)?;
        self.counters.resumptions += 1;
        self.gens[producer.0].resumptions += 1;
        ev.resume(self, owner, &site, &cont, &answer)
    }

    fn solve(&mut self, ev: &mut E, id: GenId) -> Result<(), E::Error> {
        let base = self.stack.len();
        self.stack.push(id);
        ev.evaluate(self, id)?;
        let dfn = self.gens[id.0].dfn;
        while let Some(cid) = self.next_pending(dfn) {
            self.resume_one(ev, cid)?;
        }
        let link = self.stack[base..]
            .iter()
            .map(|g| self.gens[g.0].lowlink)
            .min()
            .unwrap_or(dfn);
        if link < dfn {
            return Ok(());
        }
        let segment: Vec<GenId> = self.stack.drain(base..).collect();
        for g in &segment {
            let lost = self.gens[g.0]
                .consumers
                .iter()
                .filter(|c| self.consumers[c.0].seen != self.gens[g.0].stamp)
                .count();
            if lost > 0 {
                let gen = &self.gens[g.0];
                return Err(EngineError::LostResumption {
                    generator: ev.describe(&gen.key, &gen.call),
                    count: lost,
                }
                .into());
            }
        }
        for g in &segment {
            for cid in std::mem::take(&mut self.gens[g.0].consumers) {
                let c = &mut self.consumers[cid.0];
                c.live = false;
                self.by_site.remove(&(c.owner, c.site.clone()));
            }
            self.gens[g.0].status = Status::Complete;
        }
        Ok(())
    }

    /// Evaluates `call` and everything it depends on to completion.
    pub fn run_to_completion(
        &mut self,
        ev: &mut E,
        key: E::Key,
        call: CallOf<E>,
    ) -> Result<(GenId, Option<AnswerOf<E>>), E::Error> {
        let id = match self.tabled_call(ev, key, call)? {
            CallOutcome::NewGenerator(id) => {
                self.solve(ev, id)?;
                id
            }
            CallOutcome::ReuseComplete(id) | CallOutcome::SuspendOn(id) => id,
        };
        debug_assert!(self.stack.is_empty() && self.queue.is_empty());
        Ok((id, self.gens[id.0].answer.clone()))
    }

    /// Re-runs the bodies of `roots` and of every generator they reach against
    /// the final table without changing it, counting answers that would still
    /// update it.
    pub fn replay(&mut self, ev: &mut E, roots: &[GenId]) -> Result<ReplayReport, E::Error> {
        let saved = self.counters;
        self.replay = Some(Replay {
            updated: 0,
            visited: roots.iter().copied().collect(),
            pending: roots.to_vec(),
        });
        let result = self.replay_loop(ev);
        let r = self.replay.take().expect("replay state");
        self.counters = saved;
        result?;
        Ok(ReplayReport {
            updated: r.updated,
            visited: r.visited,
        })
    }

    fn replay_loop(&mut self, ev: &mut E) -> Result<(), E::Error> {
        while let Some(id) = self.replay.as_mut().and_then(|r| r.pending.pop()) {
            ev.evaluate(self, id)?;
        }
        Ok(())
    }

    pub fn replay_all(&mut self, ev: &mut E) -> Result<ReplayReport, E::Error> {
        let roots: Vec<GenId> = (0..self.gens.len()).map(GenId).collect();
        self.replay(ev, &roots)
    }
}
