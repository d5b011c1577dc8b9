//! Depth-bounded concrete SLD resolution, used as the soundness oracle.

use std::collections::BTreeSet;

use crate::ir::{rename_apart, Bindings, Builtin, CompareOp, EntryDecl, EntryProp, FreshIds, Program, Term, VarId, NIL};
use crate::lattice::{ConcreteBinding, Domain, DomainError};

#[derive(Clone, Copy, Debug)]
pub struct SldConfig {
    /// Maximum nesting of user-clause resolutions.
    pub depth: usize,
    /// Branches binding a term larger than this are cut.
    pub max_term_size: usize,
    /// Resolution steps per query before the search is truncated.
    pub max_steps: usize,
}

impl Default for SldConfig {
    fn default() -> Self {
        SldConfig {
            depth: 6,
            max_term_size: 64,
            max_steps: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcreteSolution {
    /// The query's variables, fully dereferenced.
    pub binding: ConcreteBinding,
    pub depth: usize,
}

#[derive(Clone, Debug, Default)]
pub struct SldOutcome {
    pub solutions: Vec<ConcreteSolution>,
    /// The step limit cut the search short.
    pub truncated: bool,
}

struct Search<'p> {
    program: &'p Program,
    config: SldConfig,
    fresh: FreshIds,
    steps: usize,
    truncated: bool,
}

#[derive(Clone)]
struct State {
    goals: Vec<(Term, usize)>,
    bindings: Bindings,
    depth: usize,
}

fn eval(b: &Bindings, t: &Term) -> Option<i64> {
    match b.resolve(t) {
        Term::Int(n) => Some(n),
        Term::Compound(f, args) => {
            let v: Vec<i64> = args.iter().map(|a| eval(b, a)).collect::<Option<_>>()?;
            match (f.as_ref(), v.as_slice()) {
                ("+", [x, y]) => x.checked_add(*y),
                ("-", [x, y]) => x.checked_sub(*y),
                ("*", [x, y]) => x.checked_mul(*y),
                ("//", [x, y]) => x.checked_div(*y),
                ("mod", [x, y]) => x.checked_rem_euclid(*y),
                ("min", [x, y]) => Some(*x.min(y)),
                ("max", [x, y]) => Some(*x.max(y)),
                ("-", [x]) => x.checked_neg(),
                ("abs", [x]) => x.checked_abs(),
                _ => None,
            }
        }
        _ => None,
    }
}

fn compare(op: CompareOp, x: i64, y: i64) -> bool {
    match op {
        CompareOp::Lt => x < y,
        CompareOp::Gt => x > y,
        CompareOp::Le => x <= y,
        CompareOp::Ge => x >= y,
        CompareOp::ArithEq => x == y,
        CompareOp::ArithNe => x != y,
    }
}

impl Search<'_> {
    fn oversized(&self, b: &Bindings, t: &Term) -> bool {
        b.resolve(t).size() > self.config.max_term_size
    }

    fn run(&mut self, query: &Term, out: &mut Vec<ConcreteSolution>) {
        let mut stack = vec![State {
            goals: vec![(query.clone(), 0)],
            bindings: Bindings::new(),
            depth: 0,
        }];
        while let Some(mut st) = stack.pop() {
            let Some((goal, level)) = st.goals.pop() else {
                let binding = query
                    .var_ids()
                    .into_iter()
                    .map(|v| (v, st.bindings.resolve(&Term::var(v.0, "_"))))
                    .collect();
                out.push(ConcreteSolution {
                    binding,
                    depth: st.depth,
                });
                continue;
            };
            self.steps += 1;
            if self.steps > self.config.max_steps {
                self.truncated = true;
                return;
            }
            if let Some(b) = Builtin::of(&goal) {
                let args = goal.args();
                let ok = match b {
                    Builtin::True => true,
                    Builtin::Fail => false,
                    Builtin::Unify => st.bindings.unify(&args[0], &args[1]),
                    Builtin::Is => match eval(&st.bindings, &args[1]) {
                        Some(n) => st.bindings.unify(&args[0], &Term::Int(n)),
                        None => false,
                    },
                    Builtin::Compare(op) => match (eval(&st.bindings, &args[0]), eval(&st.bindings, &args[1])) {
                        (Some(x), Some(y)) => compare(op, x, y),
                        _ => false,
                    },
                };
                if ok && !self.oversized(&st.bindings, &goal) {
                    stack.push(st);
                }
                continue;
            }
            if level + 1 > self.config.depth {
                continue;
            }
            let key = goal.functor().expect("goal is an atom or compound");
            let mut branches = Vec::new();
            for clause in self.program.clauses(&key) {
                let c = rename_apart(clause, &mut self.fresh);
                let mut b = st.bindings.clone();
                if !b.unify(&goal, &c.head) || self.oversized(&b, &goal) {
                    continue;
                }
                let mut goals = st.goals.clone();
                goals.extend(c.body.into_iter().rev().map(|g| (g, level + 1)));
                branches.push(State {
                    goals,
                    bindings: b,
                    depth: st.depth.max(level + 1),
                });
            }
            stack.extend(branches.into_iter().rev());
        }
    }
}

/// All SLD solutions of `query` within the configured bounds, in
/// depth-first, clause order. Goals that are neither builtins nor defined fail;
/// arithmetic on unbound or non-numeric values fails the branch.
pub fn sld_solutions(program: &Program, query: &Term, config: SldConfig) -> SldOutcome {
    let next = query.var_ids().iter().map(|v| v.0 + 1).max().unwrap_or(0);
    let mut s = Search {
        program,
        config,
        fresh: FreshIds::starting_at(next.max(1 << 20)),
        steps: 0,
        truncated: false,
    };
    let mut solutions = Vec::new();
    s.run(query, &mut solutions);
    SldOutcome {
        solutions,
        truncated: s.truncated,
    }
}

fn constants(t: &Term, out: &mut BTreeSet<Term>) {
    match t {
        Term::Atom(_) | Term::Int(_) => {
            out.insert(t.clone());
        }
        Term::Compound(_, args) => args.iter().for_each(|a| constants(a, out)),
        Term::Var(_) => {}
    }
}

/// A small universe of ground terms for `program`: its constants, a few
/// integers, and short lists.
pub fn ground_universe(program: &Program, limit: usize) -> Vec<Term> {
    let mut seen = BTreeSet::new();
    for c in program.all_clauses() {
        constants(&c.head, &mut seen);
        c.body.iter().for_each(|g| constants(g, &mut seen));
    }
    let a = Term::atom("a");
    let mut out: Vec<Term> = vec![Term::atom(NIL), Term::Int(0), Term::Int(1), Term::Int(2), a.clone()];
    out.extend(seen.into_iter().filter(|t| !matches!(t, Term::Atom(s) if s.as_ref() == NIL)));
    out.push(Term::list(vec![a.clone()], Term::atom(NIL)));
    out.push(Term::list(vec![a.clone(), Term::atom("b")], Term::atom(NIL)));
    out.push(Term::list(vec![Term::Int(1), Term::Int(0)], Term::atom(NIL)));
    let mut uniq = Vec::new();
    for t in out {
        if !uniq.contains(&t) {
            uniq.push(t);
        }
    }
    uniq.truncate(limit);
    uniq
}

/// Instances of an entry goal: each argument is replaced by a term matching
/// its declared property. Fresh variables are numbered from `fresh_from` and
/// never shared between arguments.
pub fn entry_instances(entry: &EntryDecl, ground: &[Term], fresh_from: u32) -> Vec<ConcreteBinding> {
    let vars: Vec<VarId> = entry.goal.args().iter().flat_map(Term::var_ids).collect();
    let mut out = vec![ConcreteBinding::new()];
    let mut next = fresh_from;
    for (i, v) in vars.iter().enumerate() {
        let mut choices: Vec<Term> = Vec::new();
        let prop = entry.props.get(i).copied().unwrap_or(EntryProp::Any);
        if prop != EntryProp::Free {
            choices.extend(ground.iter().cloned());
        }
        if prop != EntryProp::Ground {
            choices.push(Term::var(next, "_"));
        }
        if prop == EntryProp::Any {
            choices.push(Term::list(vec![Term::var(next + 1, "_")], Term::var(next + 2, "_")));
        }
        next += 3;
        out = out
            .into_iter()
            .flat_map(|b| {
                choices.iter().map(move |c| {
                    let mut b = b.clone();
                    b.insert(*v, c.clone());
                    b
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug, Default)]
pub struct SoundnessReport {
    pub instances: usize,
    pub solutions: usize,
    /// Searches cut short by the step limit.
    pub truncated: usize,
    pub violations: Vec<String>,
}

/// Runs every instance of `entry` through SLD and checks each solution
/// against `success`, the entry's success substitution over the positional
/// variables of the entry goal.
pub fn check_soundness<D: Domain>(
    d: &D,
    program: &Program,
    entry: &EntryDecl,
    success: &D::Subst,
    config: SldConfig,
    universe: usize,
) -> Result<SoundnessReport, DomainError> {
    let init = d.initial_from_entry(entry)?;
    let ground = ground_universe(program, universe);
    let key = entry.key();
    let mut report = SoundnessReport::default();
    for inst in entry_instances(entry, &ground, 1 << 19) {
        if !d.gamma_contains(&init, &inst) {
            continue;
        }
        report.instances += 1;
        let args: Vec<Term> = entry.goal.args().iter().map(|a| inst[&a.var_ids()[0]].clone()).collect();
        let query = if args.is_empty() {
            Term::atom(&key.name)
        } else {
            Term::compound(&key.name, args.clone())
        };
        let found = sld_solutions(program, &query, config);
        report.truncated += usize::from(found.truncated);
        for s in &found.solutions {
            report.solutions += 1;
            let binding: ConcreteBinding = args
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let value = a.map_vars(&mut |v| s.binding.get(&v.id).cloned().unwrap_or_else(|| Term::Var(v.clone())));
                    (VarId(i as u32), value)
                })
                .collect();
            if !d.gamma_contains(success, &binding) {
                let shown: Vec<String> = binding.values().map(Term::to_string).collect();
                report.violations.push(format!("{query} has solution ({})", shown.join(", ")));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    const APPEND: &str = "app([],L,L).\napp([H|T],L,[H|R]) :- app(T,L,R).\n";

    fn list(xs: &[&str]) -> Term {
        Term::list(xs.iter().map(|x| Term::atom(x)).collect(), Term::atom(NIL))
    }

    #[test]
    fn append_is_deterministic() {
        let p = parse_program(APPEND).unwrap();
        let z = Term::var(0, "Z");
        let q = Term::compound("app", vec![list(&["a"]), list(&["b"]), z]);
        let out = sld_solutions(&p, &q, SldConfig { depth: 3, ..Default::default() });
        assert_eq!(out.solutions.len(), 1);
        assert_eq!(out.solutions[0].binding[&VarId(0)], list(&["a", "b"]));
        assert!(out.solutions[0].depth <= 3);
    }

    #[test]
    fn append_split_enumerates_every_split() {
        let p = parse_program(APPEND).unwrap();
        let q = Term::compound("app", vec![Term::var(0, "X"), Term::var(1, "Y"), list(&["a", "b"])]);
        let out = sld_solutions(&p, &q, SldConfig::default());
        let xs: Vec<Term> = out.solutions.iter().map(|s| s.binding[&VarId(0)].clone()).collect();
        assert_eq!(xs, vec![list(&[]), list(&["a"]), list(&["a", "b"])]);
    }

    #[test]
    fn self_loop_has_no_solutions() {
        let p = parse_program("p :- p.\n").unwrap();
        for depth in [1, 5, 20] {
            let out = sld_solutions(&p, &Term::atom("p"), SldConfig { depth, ..Default::default() });
            assert!(out.solutions.is_empty());
            assert!(!out.truncated);
        }
    }

    #[test]
    fn arithmetic_is_concrete() {
        let p = parse_program("f(0,0).\nf(N,F) :- N > 0, M is N-1, f(M,G), F is G+N.\n").unwrap();
        let q = Term::compound("f", vec![Term::Int(3), Term::var(0, "F")]);
        let out = sld_solutions(&p, &q, SldConfig::default());
        assert_eq!(out.solutions.len(), 1);
        assert_eq!(out.solutions[0].binding[&VarId(0)], Term::Int(6));
        let q = Term::compound("f", vec![Term::var(1, "N"), Term::var(0, "F")]);
        let out = sld_solutions(&p, &q, SldConfig::default());
        assert_eq!(out.solutions.len(), 1, "unbound comparison fails the branch");
    }

    #[test]
    fn dist_minima_match_tabled_answers() {
        let p = parse_program(
            "edge(a,b,5).\nedge(b,a,2).\nedge(b,c,1).\n\
             dist(X,Y,D) :- edge(X,Y,D).\n\
             dist(X,Y,D) :- edge(X,Z,D1), dist(Z,Y,D2), D is D1+D2.\n",
        )
        .unwrap();
        let q = Term::compound("dist", vec![Term::atom("a"), Term::var(0, "Y"), Term::var(1, "D")]);
        let out = sld_solutions(&p, &q, SldConfig::default());
        let mut best = std::collections::BTreeMap::new();
        for s in &out.solutions {
            let (Term::Atom(y), Term::Int(d)) = (&s.binding[&VarId(0)], &s.binding[&VarId(1)]) else {
                panic!("non-ground solution");
            };
            let e = best.entry(y.to_string()).or_insert(*d);
            *e = (*e).min(*d);
        }
        let expected: std::collections::BTreeMap<String, i64> =
            [("a", 7), ("b", 5), ("c", 6)].iter().map(|(k, v)| (k.to_string(), *v)).collect();
        assert_eq!(best, expected);
    }

    #[test]
    fn instances_follow_entry_properties() {
        let p = parse_program(":- entry app(A,B,C) : [ground(A), free(C)].\n".to_owned().as_str()).unwrap();
        let entry = &p.entries[0];
        let ground = vec![Term::atom("a"), Term::atom(NIL)];
        let inst = entry_instances(entry, &ground, 1000);
        assert_eq!(inst.len(), 2 * 4);
        for b in &inst {
            assert!(b[&VarId(0)].is_ground());
            assert!(matches!(b[&VarId(2)], Term::Var(_)));
        }
    }
}
