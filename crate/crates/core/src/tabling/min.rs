//! Min-aggregated tabling: the shortest-distance program
//!
//! ```text
//! :- table dist(_,_,min).
//! dist(X,Y,D) :- edge(X,Y,D).
//! dist(X,Y,D) :- dist(X,Z,D1), edge(Z,Y,D2), D is D1+D2.
//! ```
//!
//! Answers are keyed by the target node and keep the least distance found so
//! far. The weight type is generic; [`IntGraph`] and [`RealGraph`] cover the
//! usual cases.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use num_traits::Zero;
use thiserror::Error;

use super::{Aggregate, Counters, Delivery, Engine, EngineError, EngineOptions, Evaluator, GenId};
use crate::ir::{parse_program, PredKey, Term};

pub trait Weight: Copy + PartialOrd + Zero + fmt::Debug + fmt::Display {}

impl<T: Copy + PartialOrd + Zero + fmt::Debug + fmt::Display> Weight for T {}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MinError {
    #[error("negative weight {weight} on edge {from} -> {to}")]
    NegativeWeight {
        from: String,
        to: String,
        weight: String,
    },
    #[error("{0}")]
    Malformed(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Larger values are entailed by smaller ones; joining keeps the minimum.
pub struct MinAggregate<C, W> {
    _marker: PhantomData<(C, W)>,
}

impl<C, W> Default for MinAggregate<C, W> {
    fn default() -> Self {
        MinAggregate {
            _marker: PhantomData,
        }
    }
}

impl<C: Clone + fmt::Debug + PartialEq, W: Weight> Aggregate for MinAggregate<C, W> {
    type Call = C;
    type Answer = W;
    type Error = MinError;

    fn call_entail(&self, a: &C, b: &C) -> Result<bool, MinError> {
        Ok(a == b)
    }

    fn answer_entail(&self, new: &W, saved: &W) -> Result<bool, MinError> {
        Ok(new >= saved)
    }

    fn answer_join(&self, saved: &W, new: &W) -> Result<W, MinError> {
        Ok(if new < saved { *new } else { *saved })
    }
}

/// Lifts an aggregate pointwise over a map from non-aggregated arguments.
pub struct Keyed<K, A> {
    pub inner: A,
    _marker: PhantomData<K>,
}

impl<K, A> Keyed<K, A> {
    pub fn new(inner: A) -> Self {
        Keyed {
            inner,
            _marker: PhantomData,
        }
    }
}

impl<K: Clone + Ord + fmt::Debug, A: Aggregate> Aggregate for Keyed<K, A> {
    type Call = A::Call;
    type Answer = BTreeMap<K, A::Answer>;
    type Error = A::Error;

    fn call_entail(&self, a: &A::Call, b: &A::Call) -> Result<bool, A::Error> {
        self.inner.call_entail(a, b)
    }

    fn answer_entail(&self, new: &Self::Answer, saved: &Self::Answer) -> Result<bool, A::Error> {
        for (k, v) in new {
            match saved.get(k) {
                Some(s) if self.inner.answer_entail(v, s)? => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    fn answer_join(&self, saved: &Self::Answer, new: &Self::Answer) -> Result<Self::Answer, A::Error> {
        let mut out = saved.clone();
        for (k, v) in new {
            let joined = match out.get(k) {
                Some(s) => self.inner.answer_join(s, v)?,
                None => v.clone(),
            };
            out.insert(k.clone(), joined);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Graph<W> {
    edges: BTreeMap<String, Vec<(String, W)>>,
}

pub type IntGraph = Graph<i64>;
pub type RealGraph = Graph<f64>;

impl<W: Weight> Graph<W> {
    pub fn from_edges<S: Into<String>>(edges: impl IntoIterator<Item = (S, S, W)>) -> Result<Self, MinError> {
        let mut map: BTreeMap<String, Vec<(String, W)>> = BTreeMap::new();
        for (a, b, w) in edges {
            let (a, b) = (a.into(), b.into());
            // also rejects NaN
            if w.partial_cmp(&W::zero()).is_none_or(|o| o.is_lt()) {
                return Err(MinError::NegativeWeight {
                    from: a,
                    to: b,
                    weight: w.to_string(),
                });
            }
            map.entry(a).or_default().push((b, w));
        }
        Ok(Graph { edges: map })
    }

    pub fn successors(&self, node: &str) -> &[(String, W)] {
        self.edges.get(node).map_or(&[], Vec::as_slice)
    }

    pub fn nodes(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .edges
            .iter()
            .flat_map(|(a, succ)| std::iter::once(a.clone()).chain(succ.iter().map(|s| s.0.clone())))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

impl IntGraph {
    /// Reads `edge(a,b,5).` facts; other clauses are ignored.
    pub fn parse(text: &str) -> Result<IntGraph, MinError> {
        let program = parse_program(text).map_err(|e| MinError::Malformed(e.to_string()))?;
        let mut edges = Vec::new();
        for clause in program.clauses(&PredKey::new("edge", 3)) {
            match (clause.head.args(), clause.body.is_empty()) {
                ([Term::Atom(a), Term::Atom(b), Term::Int(w)], true) => {
                    edges.push((a.to_string(), b.to_string(), *w))
                }
                _ => return Err(MinError::Malformed(format!("not an edge fact: {clause}"))),
            }
        }
        Graph::from_edges(edges)
    }
}

type DistAgg<W> = Keyed<String, MinAggregate<String, W>>;

struct Dist<'g, W> {
    graph: &'g Graph<W>,
    agg: DistAgg<W>,
    evals: u64,
}

impl<W: Weight> Dist<'_, W> {
    fn relax(&mut self, engine: &mut Engine<Self>, gen: GenId, known: &BTreeMap<String, W>) -> Result<(), MinError> {
        let mut cand: BTreeMap<String, W> = BTreeMap::new();
        for (z, d1) in known {
            for (y, d2) in self.graph.successors(z) {
                let d = *d1 + *d2;
                if cand.get(y).is_none_or(|old| d < *old) {
                    cand.insert(y.clone(), d);
                }
            }
        }
        if !cand.is_empty() {
            engine.add_answer(self, gen, cand)?;
        }
        Ok(())
    }
}

impl<W: Weight> Evaluator for Dist<'_, W> {
    type Key = &'static str;
    type Site = ();
    type Cont = ();
    type Agg = DistAgg<W>;
    type Error = MinError;

    fn aggregate(&self) -> &DistAgg<W> {
        &self.agg
    }

    fn evaluate(&mut self, engine: &mut Engine<Self>, gen: GenId) -> Result<(), MinError> {
        self.evals += 1;
        let src = engine.generator(gen).call.clone();
        // dist(X,Y,D) :- edge(X,Y,D).
        self.relax(engine, gen, &BTreeMap::from([(src.clone(), W::zero())]))?;
        // dist(X,Y,D) :- dist(X,Z,D1), edge(Z,Y,D2), D is D1+D2.
        if let Delivery::Answer(known) = engine.call(self, gen, (), (), "dist/3", src)? {
            self.relax(engine, gen, &known)?;
        }
        Ok(())
    }

    fn resume(
        &mut self,
        engine: &mut Engine<Self>,
        owner: GenId,
        _site: &(),
        _cont: &(),
        answer: &BTreeMap<String, W>,
    ) -> Result<(), MinError> {
        self.evals += 1;
        self.relax(engine, owner, answer)
    }

    fn merge_cont(&self, _old: &(), _new: &()) -> Result<(), MinError> {
        Ok(())
    }

    fn describe(&self, key: &&'static str, call: &String) -> String {
        format!("{key} from {call}")
    }
}

#[derive(Clone, Debug)]
pub struct DistReport<W> {
    /// Least distance to every other node reachable from the source.
    pub distances: BTreeMap<String, W>,
    /// The tabled answer itself: least non-empty path length to every node,
    /// the source included when it lies on a cycle.
    pub paths: BTreeMap<String, W>,
    pub counters: Counters,
    /// Replayed answers that would still change the table; zero at a fixpoint.
    pub unstable: usize,
}

/// Least distances from `source`, computed by the tabling engine under min aggregation.
pub fn shortest_distances<W: Weight>(
    graph: &Graph<W>,
    source: &str,
    options: EngineOptions,
) -> Result<DistReport<W>, MinError> {
    let mut ev = Dist {
        graph,
        agg: Keyed::new(MinAggregate::default()),
        evals: 0,
    };
    let mut engine = Engine::new(options);
    let (id, answer) = engine.run_to_completion(&mut ev, "dist/3", source.to_string())?;
    let mut counters = *engine.counters();
    counters.body_evals = ev.evals;
    let unstable = engine.replay(&mut ev, &[id])?.updated;
    let paths = answer.unwrap_or_default();
    let mut distances = paths.clone();
    distances.remove(source);
    Ok(DistReport {
        distances,
        paths,
        counters,
        unstable,
    })
}
