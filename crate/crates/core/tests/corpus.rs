mod common;

use std::collections::BTreeMap;

use tabplai::baseline::naive_analyze;
use tabplai::domain::{Groundness, ShareFree};
use tabplai::ir::{parse_program, rename_apart, FreshIds, VarId};
use tabplai::lattice::{Domain, VarSet};
use tabplai::plai::{analyze, AnalysisError, AnalysisOptions, AnalysisRequest, AnalysisResult};

fn each_run<D: Domain + Clone>(d: &D, mut f: impl FnMut(&str, &tabplai::ir::Program, AnalysisResult<D::Subst>)) {
    for (name, p) in common::corpus() {
        for entry in &p.entries {
            let req = AnalysisRequest {
                program: &p,
                entry,
                options: AnalysisOptions::default(),
            };
            f(&name, &p, analyze(d, &req).unwrap());
        }
    }
}

#[test]
fn groundness_under_gr_implies_groundness_under_shfr() {
    let sf = ShareFree::default();
    for (name, p) in common::corpus() {
        for entry in &p.entries {
            let req = AnalysisRequest {
                program: &p,
                entry,
                options: AnalysisOptions::default(),
            };
            let gr = &analyze(&Groundness, &req).unwrap().completes[0].success;
            let sh = &analyze(&sf, &req).unwrap().completes[0].success;
            if Groundness.is_bottom(gr) {
                assert!(sf.is_bottom(sh), "{name} {entry}");
                continue;
            }
            for v in Groundness.vars(gr).iter() {
                assert!(!gr.is_ground(v) || sh.is_ground(v), "{name} {entry}: {v:?}");
            }
        }
    }
}

#[test]
fn first_program_point_is_the_entry_substitution() {
    fn check<D: Domain + Clone>(d: &D) {
        each_run(d, |name, p, r| {
            let mut expected: BTreeMap<_, D::Subst> = BTreeMap::new();
            for c in &r.completes {
                let k = c.goal.vars().len() as u32;
                for clause in p.clauses(&c.key) {
                    let renamed = rename_apart(clause, &mut FreshIds::starting_at(k));
                    let back: BTreeMap<VarId, VarId> =
                        renamed.vars().iter().zip(clause.vars()).map(|(r, o)| (r.id, o.id)).collect();
                    let entry = d.call_to_entry(&c.goal, &renamed, &c.call).unwrap();
                    if d.is_bottom(&entry) {
                        continue;
                    }
                    let l1 = d.project_in(&VarSet::new(renamed.var_ids()), &entry).unwrap();
                    let l1 = d.rename(&l1, &|v| back[&v]);
                    let merged = match expected.remove(&clause.id) {
                        Some(old) => d.lub(&old, &l1).unwrap(),
                        None => l1,
                    };
                    expected.insert(clause.id, merged);
                }
            }
            for (id, l1) in expected {
                let clause = p.clause(id).unwrap();
                if clause.body.is_empty() {
                    continue;
                }
                let got = &r.points[&(id, 1)];
                assert!(d.identical(got, &l1).unwrap(), "{name}: clause {id:?} λ1 {got:?} vs {l1:?}");
            }
        });
    }
    check(&Groundness);
    check(&ShareFree::default());
}

#[test]
fn completes_are_over_the_goal_variables() {
    each_run(&ShareFree::default(), |name, _, r| {
        for c in &r.completes {
            let goal_vars = VarSet::of_term(&c.goal);
            assert_eq!(ShareFree::default().vars(&c.success), &goal_vars, "{name} {}", c.key);
            assert_eq!(ShareFree::default().vars(&c.call), &goal_vars, "{name} {}", c.key);
        }
    });
}

#[test]
fn qsort_is_analyzed_multivariantly() {
    let p = common::corpus().into_iter().find(|(n, _)| n == "qsort").unwrap().1;
    let req = AnalysisRequest {
        program: &p,
        entry: &p.entries[0],
        options: AnalysisOptions::default(),
    };
    let r = analyze(&Groundness, &req).unwrap();
    let goals: Vec<String> = r.completes.iter().map(|c| c.goal.to_string()).collect();
    assert_eq!(goals, ["qsort(A,B)", "partition(A,B,C,D)", "app(A,[B|C],D)", "app(A,B,C)"]);
    assert!(r
        .completes
        .iter()
        .all(|c| Groundness.vars(&c.success).iter().all(|v| c.success.is_ground(v))));
}

#[test]
fn tabled_and_naive_report_the_same_program_points() {
    for (name, p) in common::corpus() {
        for entry in &p.entries {
            let req = AnalysisRequest {
                program: &p,
                entry,
                options: AnalysisOptions::default(),
            };
            let d = ShareFree::default();
            let t = analyze(&d, &req).unwrap();
            let n = naive_analyze(&d, &req).unwrap();
            assert_eq!(t.points.keys().collect::<Vec<_>>(), n.points.keys().collect::<Vec<_>>(), "{name}");
            for (k, v) in &t.points {
                assert!(d.identical(v, &n.points[k]).unwrap(), "{name} {k:?}");
            }
        }
    }
}

#[test]
fn wide_sharing_is_a_resource_error() {
    let src = std::fs::read_to_string(common::corpus_dir().join("hanoi.pl")).unwrap();
    let src = src.replace(
        ":- entry hanoi(N,A,B,C,Moves) : [ground(N), ground(A), ground(B), ground(C)].",
        ":- entry hanoi(N,A,B,C,Moves) : [ground(N)].",
    );
    let p = parse_program(&src).unwrap();
    let req = AnalysisRequest {
        program: &p,
        entry: &p.entries[1],
        options: AnalysisOptions::default(),
    };
    let err = analyze(&ShareFree::default(), &req).unwrap_err();
    assert!(matches!(err, AnalysisError::Domain(_)) && err.is_resource(), "{err}");
    assert!(analyze(&Groundness, &req).is_ok());
}

#[test]
fn step_budget_bounds_both_engines() {
    let p = common::corpus().into_iter().find(|(n, _)| n == "qsort").unwrap().1;
    let req = AnalysisRequest {
        program: &p,
        entry: &p.entries[0],
        options: AnalysisOptions {
            step_budget: 3,
            ..Default::default()
        },
    };
    let t = analyze(&Groundness, &req).unwrap_err();
    let n = naive_analyze(&Groundness, &req).unwrap_err();
    assert!(t.is_resource() && n.is_resource());
    assert!(t.to_string().contains("step budget of 3"), "{t}");
}
