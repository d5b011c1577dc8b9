use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::term::{PredKey, Term, Var, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClauseId(pub usize);

impl fmt::Display for ClauseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Clause {
    pub id: ClauseId,
    pub head: Term,
    pub body: Vec<Term>,
    /// Set by [`classify_recursion`].
    pub recursive: bool,
}

impl Clause {
    pub fn key(&self) -> PredKey {
        self.head.functor().expect("clause head is an atom or compound")
    }

    /// All clause variables in order of first occurrence (head first).
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.head.collect_vars(&mut out);
        for lit in &self.body {
            lit.collect_vars(&mut out);
        }
        out
    }

    pub fn var_ids(&self) -> Vec<VarId> {
        self.vars().into_iter().map(|v| v.id).collect()
    }

    fn map_terms(&self, f: &mut impl FnMut(&Term) -> Term) -> Clause {
        Clause {
            id: self.id,
            head: f(&self.head),
            body: self.body.iter().map(f).collect(),
            recursive: self.recursive,
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, lit) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{lit}")?;
            }
        }
        f.write_str(".")
    }
}

/// Source of fresh variable ids.
#[derive(Clone, Debug, Default)]
pub struct FreshIds {
    next: u32,
}

impl FreshIds {
    pub fn starting_at(next: u32) -> Self {
        FreshIds { next }
    }

    pub fn next_id(&mut self) -> u32 {
        let id = self.next;
        self.next += 1;
        id
    }

    pub fn peek(&self) -> u32 {
        self.next
    }
}

/// Renames every variable of `clause` to a fresh id, in order of first occurrence.
pub fn rename_apart(clause: &Clause, fresh: &mut FreshIds) -> Clause {
    let mut map: BTreeMap<VarId, Var> = BTreeMap::new();
    for v in clause.vars() {
        map.insert(v.id, Var::new(fresh.next_id(), v.name.clone()));
    }
    clause.map_terms(&mut |t| t.rename(&map))
}

/// Domain-independent argument property used by entry declarations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntryProp {
    Ground,
    Free,
    Any,
}

impl fmt::Display for EntryProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryProp::Ground => "ground",
            EntryProp::Free => "free",
            EntryProp::Any => "any",
        })
    }
}

/// `:- entry p(A,B) : [ground(A)].`; the template's arguments are distinct variables.
#[derive(Clone, Debug, PartialEq)]
pub struct EntryDecl {
    pub goal: Term,
    /// One property per template argument, positionally.
    pub props: Vec<EntryProp>,
}

impl EntryDecl {
    pub fn key(&self) -> PredKey {
        self.goal.functor().expect("entry goal is an atom or compound")
    }

    pub fn vars(&self) -> Vec<Var> {
        self.goal.vars()
    }

    pub fn prop_of(&self, id: VarId) -> EntryProp {
        self.goal
            .args()
            .iter()
            .position(|a| matches!(a, Term::Var(v) if v.id == id))
            .map(|i| self.props[i])
            .unwrap_or(EntryProp::Any)
    }
}

impl fmt::Display for EntryDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.goal)?;
        let listed: Vec<String> = self
            .goal
            .args()
            .iter()
            .zip(&self.props)
            .filter(|(_, p)| **p != EntryProp::Any)
            .map(|(a, p)| format!("{p}({a})"))
            .collect();
        if !listed.is_empty() {
            write!(f, " : [{}]", listed.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Lt,
    Gt,
    Le,
    Ge,
    ArithEq,
    ArithNe,
}

/// The fixed builtin table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    Unify,
    True,
    Fail,
    Is,
    Compare(CompareOp),
}

impl Builtin {
    pub fn lookup(name: &str, arity: usize) -> Option<Builtin> {
        Some(match (name, arity) {
            ("=", 2) => Builtin::Unify,
            ("true", 0) => Builtin::True,
            ("fail", 0) | ("false", 0) => Builtin::Fail,
            ("is", 2) => Builtin::Is,
            ("<", 2) => Builtin::Compare(CompareOp::Lt),
            (">", 2) => Builtin::Compare(CompareOp::Gt),
            ("=<", 2) => Builtin::Compare(CompareOp::Le),
            (">=", 2) => Builtin::Compare(CompareOp::Ge),
            ("=:=", 2) => Builtin::Compare(CompareOp::ArithEq),
            ("=\\=", 2) => Builtin::Compare(CompareOp::ArithNe),
            _ => return None,
        })
    }

    pub fn of(term: &Term) -> Option<Builtin> {
        let key = term.functor()?;
        Builtin::lookup(&key.name, key.arity)
    }
}

/// An analyzed program: clauses grouped per predicate in source order.
#[derive(Clone, Debug, Default)]
pub struct Program {
    preds: BTreeMap<PredKey, Vec<Clause>>,
    order: Vec<PredKey>,
    pub entries: Vec<EntryDecl>,
    recursive: BTreeSet<PredKey>,
}

impl Program {
    /// Builds a program from clauses in source order. Recursion info is computed.
    pub fn new(clauses: Vec<Clause>, entries: Vec<EntryDecl>) -> Program {
        let mut program = Program {
            entries,
            ..Program::default()
        };
        for c in clauses {
            let key = c.key();
            if !program.preds.contains_key(&key) {
                program.order.push(key.clone());
            }
            program.preds.entry(key).or_default().push(c);
        }
        classify_recursion(program)
    }

    pub fn clauses(&self, key: &PredKey) -> &[Clause] {
        self.preds.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_defined(&self, key: &PredKey) -> bool {
        self.preds.contains_key(key)
    }

    pub fn is_recursive(&self, key: &PredKey) -> bool {
        self.recursive.contains(key)
    }

    /// Predicates in order of first definition.
    pub fn predicates(&self) -> impl Iterator<Item = &PredKey> {
        self.order.iter()
    }

    pub fn all_clauses(&self) -> impl Iterator<Item = &Clause> {
        self.order.iter().flat_map(|k| self.preds[k].iter())
    }

    pub fn clause(&self, id: ClauseId) -> Option<&Clause> {
        self.all_clauses().find(|c| c.id == id)
    }

    /// User predicates called from the bodies of `key`'s clauses.
    pub fn callees(&self, key: &PredKey) -> BTreeSet<PredKey> {
        self.clauses(key)
            .iter()
            .flat_map(|c| c.body.iter())
            .filter_map(Term::functor)
            .filter(|k| self.preds.contains_key(k))
            .collect()
    }
}

/// SCC condensation of the call graph; fills the predicate and clause recursion flags.
/// Unknown predicates and builtins are leaves.
pub fn classify_recursion(mut program: Program) -> Program {
    let mut graph = DiGraph::<PredKey, ()>::new();
    let mut index = HashMap::new();
    for key in &program.order {
        index.insert(key.clone(), graph.add_node(key.clone()));
    }
    for key in &program.order {
        for callee in program.callees(key) {
            graph.update_edge(index[key], index[&callee], ());
        }
    }
    let mut component = HashMap::new();
    program.recursive.clear();
    for (n, scc) in tarjan_scc(&graph).into_iter().enumerate() {
        let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
        for node in scc {
            component.insert(graph[node].clone(), n);
            if cyclic {
                program.recursive.insert(graph[node].clone());
            }
        }
    }
    for (key, clauses) in program.preds.iter_mut() {
        let own = component[key];
        for c in clauses.iter_mut() {
            c.recursive = c
                .body
                .iter()
                .filter_map(Term::functor)
                .any(|k| component.get(&k) == Some(&own));
        }
    }
    program
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_program;

    fn flags(src: &str) -> (Program, Vec<(String, bool)>) {
        let p = parse_program(src).unwrap();
        let fl = p
            .all_clauses()
            .map(|c| (c.to_string(), c.recursive))
            .collect();
        (p, fl)
    }

    #[test]
    fn rename_apart_bijection() {
        let p = parse_program("p(X) :- q(X).").unwrap();
        let c = &p.clauses(&PredKey::new("p", 1))[0];
        let mut fresh = FreshIds::starting_at(100);
        let r = rename_apart(c, &mut fresh);
        assert_eq!(r.var_ids(), vec![VarId(100)]);
        assert_eq!(r.body[0].var_ids(), vec![VarId(100)]);
        assert_eq!(fresh.peek(), 101);
    }

    #[test]
    fn rename_apart_ground_consumes_nothing() {
        let p = parse_program("p(a).").unwrap();
        let c = &p.clauses(&PredKey::new("p", 1))[0];
        let mut fresh = FreshIds::starting_at(7);
        let r = rename_apart(c, &mut fresh);
        assert_eq!(r.head, c.head);
        assert_eq!(fresh.peek(), 7);
    }

    #[test]
    fn rename_apart_three_vars() {
        let p = parse_program("p(X,Y) :- q(Y,Z), r(Z,X).").unwrap();
        let c = &p.clauses(&PredKey::new("p", 2))[0];
        let mut fresh = FreshIds::starting_at(10);
        let r = rename_apart(c, &mut fresh);
        assert_eq!(r.var_ids(), vec![VarId(10), VarId(11), VarId(12)]);
        assert_eq!(r.to_string(), c.to_string());
        assert_eq!(r.body[1].var_ids(), vec![VarId(12), VarId(10)]);
    }

    #[test]
    fn smallest_program() {
        let (p, fl) = flags("p.");
        assert!(!p.is_recursive(&PredKey::new("p", 0)));
        assert_eq!(fl, vec![("p.".to_string(), false)]);
    }

    #[test]
    fn self_loop() {
        let (p, fl) = flags("p :- p.");
        assert!(p.is_recursive(&PredKey::new("p", 0)));
        assert!(fl[0].1);
    }

    #[test]
    fn mutual_recursion() {
        let (p, fl) = flags("p :- q. q :- p.");
        assert!(p.is_recursive(&PredKey::new("p", 0)));
        assert!(p.is_recursive(&PredKey::new("q", 0)));
        assert!(fl.iter().all(|(_, r)| *r));
    }

    #[test]
    fn acyclic() {
        let (p, fl) = flags("p :- q. q.");
        assert!(!p.is_recursive(&PredKey::new("p", 0)));
        assert!(!p.is_recursive(&PredKey::new("q", 0)));
        assert!(fl.iter().all(|(_, r)| !*r));
    }

    #[test]
    fn append_classification() {
        let (p, fl) = flags("append([],L,L). append([H|T],L,[H|R]) :- append(T,L,R).");
        assert!(p.is_recursive(&PredKey::new("append", 3)));
        assert_eq!(fl.iter().map(|f| f.1).collect::<Vec<_>>(), vec![false, true]);
    }

    #[test]
    fn fib_classification() {
        let src = "fib(0,0). fib(1,1). fib(N,F) :- N > 1, N1 is N-1, N2 is N-2, \
                   fib(N1,F1), fib(N2,F2), F is F1+F2.";
        let (p, fl) = flags(src);
        assert!(p.is_recursive(&PredKey::new("fib", 2)));
        assert_eq!(fl.iter().map(|f| f.1).collect::<Vec<_>>(), vec![false, false, true]);
    }

    #[test]
    fn clause_calling_lower_scc_is_not_recursive() {
        let (_, fl) = flags("p :- q, p. p :- q. q :- r. r.");
        assert_eq!(
            fl.iter().map(|f| f.1).collect::<Vec<_>>(),
            vec![true, false, false, false]
        );
    }
}
