use std::collections::BTreeMap;

use super::term::{Term, VarId};

/// Bindings of a syntactic unifier. Values may mention other bound variables;
/// use [`Bindings::resolve`] to dereference fully.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bindings {
    map: BTreeMap<VarId, Term>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: VarId) -> Option<&Term> {
        self.map.get(&id)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn walk<'a>(&'a self, mut t: &'a Term) -> &'a Term {
        while let Term::Var(v) = t {
            match self.map.get(&v.id) {
                Some(next) => t = next,
                None => break,
            }
        }
        t
    }

    pub fn resolve(&self, t: &Term) -> Term {
        match self.walk(t) {
            Term::Compound(f, args) => {
                Term::Compound(f.clone(), args.iter().map(|a| self.resolve(a)).collect())
            }
            other => other.clone(),
        }
    }

    fn occurs(&self, id: VarId, t: &Term) -> bool {
        match self.walk(t) {
            Term::Var(v) => v.id == id,
            Term::Compound(_, args) => args.iter().any(|a| self.occurs(id, a)),
            _ => false,
        }
    }

    /// Unifies two terms under the current bindings (with occurs check).
    /// On failure the bindings may be partially extended.
    pub fn unify(&mut self, a: &Term, b: &Term) -> bool {
        let a = self.walk(a).clone();
        let b = self.walk(b).clone();
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x.id == y.id => true,
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if self.occurs(x.id, other) {
                    return false;
                }
                self.map.insert(x.id, other.clone());
                true
            }
            (Term::Atom(x), Term::Atom(y)) => x == y,
            (Term::Int(x), Term::Int(y)) => x == y,
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys).all(|(x, y)| self.unify(x, y))
            }
            _ => false,
        }
    }

    /// The idempotent solved form: each bound variable with its fully resolved value.
    pub fn solved(&self) -> Vec<(VarId, Term)> {
        self.map
            .keys()
            .map(|&id| (id, self.resolve(&self.map[&id])))
            .collect()
    }
}

/// Most general unifier of a system of equations, in idempotent solved form.
/// `None` when the equations have no (finite) unifier.
pub fn mgu(pairs: &[(Term, Term)]) -> Option<Vec<(VarId, Term)>> {
    let mut b = Bindings::new();
    for (x, y) in pairs {
        if !b.unify(x, y) {
            return None;
        }
    }
    Some(b.solved())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(id: u32) -> Term {
        Term::var(id, &format!("V{id}"))
    }

    #[test]
    fn solved_form_is_idempotent() {
        // f(X, g(Y)) = f(a, Z)
        let lhs = Term::compound("f", vec![v(0), Term::compound("g", vec![v(1)])]);
        let rhs = Term::compound("f", vec![Term::atom("a"), v(2)]);
        let s = mgu(&[(lhs, rhs)]).unwrap();
        assert_eq!(
            s,
            vec![
                (VarId(0), Term::atom("a")),
                (VarId(2), Term::compound("g", vec![v(1)]))
            ]
        );
        for (x, t) in &s {
            assert!(s.iter().all(|(_, u)| !u.occurs(*x)), "{t}");
        }
    }

    #[test]
    fn chains_are_resolved() {
        let s = mgu(&[(v(0), v(1)), (v(1), Term::atom("a"))]).unwrap();
        assert_eq!(s, vec![(VarId(0), Term::atom("a")), (VarId(1), Term::atom("a"))]);
    }

    #[test]
    fn clash_and_occurs_check() {
        assert!(mgu(&[(Term::atom("a"), Term::atom("b"))]).is_none());
        assert!(mgu(&[(v(0), Term::compound("f", vec![v(0)]))]).is_none());
        assert!(mgu(&[(
            Term::compound("f", vec![v(0)]),
            Term::compound("f", vec![v(0), v(1)])
        )])
        .is_none());
    }
}
