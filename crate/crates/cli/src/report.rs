//! Run reports: the text rendering and the JSON schema are two views of the
//! same [`RunReport`].

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use tabplai::ir::{ClauseId, Program};
use tabplai::lattice::{Domain, SubstView};
use tabplai::plai::{positional_view, AnalysisResult};
use tabplai::tabling::Counters;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Subst {
    Bottom,
    Marks { marks: Vec<(String, String)> },
    Sharing { sh: Vec<Vec<String>>, fr: Vec<String> },
}

impl From<SubstView> for Subst {
    fn from(v: SubstView) -> Self {
        match v {
            SubstView::Bottom => Subst::Bottom,
            SubstView::Marks(marks) => Subst::Marks { marks },
            SubstView::Sharing { sh, fr } => Subst::Sharing { sh, fr },
        }
    }
}

impl From<&Subst> for SubstView {
    fn from(s: &Subst) -> Self {
        match s {
            Subst::Bottom => SubstView::Bottom,
            Subst::Marks { marks } => SubstView::Marks(marks.clone()),
            Subst::Sharing { sh, fr } => SubstView::Sharing {
                sh: sh.clone(),
                fr: fr.clone(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompleteReport {
    pub predicate: String,
    pub goal: String,
    pub call: Subst,
    pub success: Subst,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub clause: usize,
    /// 1-based; the last point of a clause is its exit.
    pub point: usize,
    pub subst: Subst,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterReport {
    pub generators: u64,
    pub suspensions: u64,
    pub resumptions: u64,
    pub answers_proposed: u64,
    pub answers_joined: u64,
    pub answers_discarded: u64,
    pub body_evals: u64,
    pub restarts: u64,
}

impl From<Counters> for CounterReport {
    fn from(c: Counters) -> Self {
        CounterReport {
            generators: c.generators,
            suspensions: c.suspensions,
            resumptions: c.resumptions,
            answers_proposed: c.answers_proposed,
            answers_joined: c.answers_joined,
            answers_discarded: c.answers_discarded,
            body_evals: c.body_evals,
            restarts: c.restarts,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub entry: String,
    pub completes: Vec<CompleteReport>,
    pub points: Vec<PointReport>,
    pub counters: CounterReport,
    pub milliseconds: f64,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub program: String,
    pub domain: String,
    pub engine: String,
    pub entries: Vec<EntryReport>,
}

pub fn entry_report<D: Domain>(d: &D, program: &Program, r: &AnalysisResult<D::Subst>) -> EntryReport {
    let completes = r
        .completes
        .iter()
        .map(|c| CompleteReport {
            predicate: c.key.to_string(),
            goal: c.goal.to_string(),
            call: positional_view(d, &c.call).into(),
            success: positional_view(d, &c.success).into(),
        })
        .collect();
    let points = r
        .points
        .iter()
        .map(|(&(ClauseId(id), point), s)| {
            let vars = program.clause(ClauseId(id)).map(|c| c.vars()).unwrap_or_default();
            let name = |v| {
                vars.iter()
                    .find(|x| x.id == v)
                    .map_or_else(|| format!("_{}", v.0), |x| x.name.to_string())
            };
            PointReport {
                clause: id,
                point,
                subst: d.view(s, &name).into(),
            }
        })
        .collect();
    EntryReport {
        entry: r.entry.to_string(),
        completes,
        points,
        counters: r.counters.into(),
        milliseconds: r.elapsed.as_secs_f64() * 1e3,
        warnings: r.warnings.clone(),
    }
}

/// `pred/arity : GOAL CALL → SUCCESS`, one line per complete.
pub fn completes_text(entry: &EntryReport) -> String {
    let mut out = String::new();
    for c in &entry.completes {
        let call = SubstView::from(&c.call);
        let success = SubstView::from(&c.success);
        let _ = writeln!(out, "{} : {} {call} → {success}", c.predicate, c.goal);
    }
    out
}

pub fn render_text(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "% program {}  domain {}  engine {}",
        report.program, report.domain, report.engine
    );
    for e in &report.entries {
        let _ = writeln!(out, "\n% entry {}", e.entry);
        out.push_str(&completes_text(e));
        for w in &e.warnings {
            let _ = writeln!(out, "% warning: {w}");
        }
        let c = &e.counters;
        let _ = writeln!(
            out,
            "% counters generators={} suspensions={} resumptions={} proposed={} joined={} discarded={} body_evals={} restarts={}",
            c.generators,
            c.suspensions,
            c.resumptions,
            c.answers_proposed,
            c.answers_joined,
            c.answers_discarded,
            c.body_evals,
            c.restarts
        );
        let _ = writeln!(out, "% time {:.3} ms", e.milliseconds);
    }
    out
}
