use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// Interned-ish name for atoms and functors.
pub type Symbol = Arc<str>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "_V{}", self.0)
    }
}

/// A logic variable. Identity is the id; the name is only for display.
#[derive(Clone, Debug)]
pub struct Var {
    pub id: VarId,
    pub name: Symbol,
}

impl Var {
    pub fn new(id: u32, name: impl Into<Symbol>) -> Self {
        Var {
            id: VarId(id),
            name: name.into(),
        }
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for Var {}
impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state)
    }
}
impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Var {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id.cmp(&other.id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Var),
    Atom(Symbol),
    Int(i64),
    /// Invariant: `args` is never empty.
    Compound(Symbol, Vec<Term>),
}

/// Name and arity of a predicate or functor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredKey {
    pub name: Symbol,
    pub arity: usize,
}

impl PredKey {
    pub fn new(name: &str, arity: usize) -> Self {
        PredKey {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

pub const NIL: &str = "[]";
pub const CONS: &str = ".";

impl Term {
    pub fn atom(name: &str) -> Term {
        Term::Atom(name.into())
    }

    pub fn var(id: u32, name: &str) -> Term {
        Term::Var(Var::new(id, name))
    }

    /// Builds a compound, collapsing the zero-argument case to an atom.
    pub fn compound(name: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::Atom(name.into())
        } else {
            Term::Compound(name.into(), args)
        }
    }

    pub fn list(items: Vec<Term>, tail: Term) -> Term {
        items
            .into_iter()
            .rev()
            .fold(tail, |acc, item| Term::Compound(CONS.into(), vec![item, acc]))
    }

    pub fn functor(&self) -> Option<PredKey> {
        match self {
            Term::Atom(name) => Some(PredKey {
                name: name.clone(),
                arity: 0,
            }),
            Term::Compound(name, args) => Some(PredKey {
                name: name.clone(),
                arity: args.len(),
            }),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Atom(_) | Term::Int(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Number of symbols in the term.
    pub fn size(&self) -> usize {
        match self {
            Term::Compound(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Variables in order of first occurrence, without duplicates.
    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub fn var_ids(&self) -> Vec<VarId> {
        self.vars().into_iter().map(|v| v.id).collect()
    }

    pub fn occurs(&self, id: VarId) -> bool {
        match self {
            Term::Var(v) => v.id == id,
            Term::Compound(_, args) => args.iter().any(|a| a.occurs(id)),
            _ => false,
        }
    }

    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(v),
            Term::Compound(name, args) => {
                Term::Compound(name.clone(), args.iter().map(|a| a.map_vars(f)).collect())
            }
            t => t.clone(),
        }
    }

    pub fn rename(&self, map: &BTreeMap<VarId, Var>) -> Term {
        self.map_vars(&mut |v| match map.get(&v.id) {
            Some(new) => Term::Var(new.clone()),
            None => Term::Var(v.clone()),
        })
    }
}

fn is_plain_atom(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        _ => name == NIL || (!name.is_empty() && name.chars().all(|c| "+-*/\\^<>=~:.?@#&$".contains(c))),
    }
}

fn write_atom(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if is_plain_atom(name) {
        f.write_str(name)
    } else {
        write!(f, "'{}'", name.replace('\'', "\\'"))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(&v.name),
            Term::Atom(name) => write_atom(f, name),
            Term::Int(i) => write!(f, "{i}"),
            Term::Compound(name, args) if &**name == CONS && args.len() == 2 => {
                f.write_str("[")?;
                write!(f, "{}", args[0])?;
                let mut tail = &args[1];
                loop {
                    match tail {
                        Term::Compound(n, a) if &**n == CONS && a.len() == 2 => {
                            write!(f, ",{}", a[0])?;
                            tail = &a[1];
                        }
                        Term::Atom(n) if &**n == NIL => break,
                        other => {
                            write!(f, "|{other}")?;
                            break;
                        }
                    }
                }
                f.write_str("]")
            }
            Term::Compound(name, args) => {
                write_atom(f, name)?;
                f.write_str("(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_rendering() {
        let t = Term::list(vec![Term::atom("a"), Term::Int(2)], Term::atom(NIL));
        assert_eq!(t.to_string(), "[a,2]");
        let t = Term::list(vec![Term::var(0, "H")], Term::var(1, "T"));
        assert_eq!(t.to_string(), "[H|T]");
    }

    #[test]
    fn var_identity_ignores_name() {
        assert_eq!(Var::new(3, "X"), Var::new(3, "Y"));
        assert_ne!(Var::new(3, "X"), Var::new(4, "X"));
    }

    #[test]
    fn vars_in_first_occurrence_order() {
        let t = Term::compound(
            "f",
            vec![Term::var(2, "B"), Term::var(1, "A"), Term::var(2, "B")],
        );
        assert_eq!(t.var_ids(), vec![VarId(2), VarId(1)]);
        assert_eq!(Term::compound("a", vec![]), Term::atom("a"));
    }
}
