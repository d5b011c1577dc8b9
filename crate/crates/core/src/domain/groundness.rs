//! Pointwise groundness: every variable is either certainly ground or unknown.

use std::fmt;

use crate::ir::{Builtin, EntryDecl, EntryProp, Term, VarId};
use crate::lattice::{same_vars, ConcreteBinding, Domain, DomainError, SubstView, VarSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mark {
    Ground,
    Any,
}

impl Mark {
    fn join(self, other: Mark) -> Mark {
        self.max(other)
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mark::Ground => "g",
            Mark::Any => "any",
        })
    }
}

/// Marks aligned with `vars`; `None` is bottom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundSubst {
    vars: VarSet,
    marks: Option<Vec<Mark>>,
}

impl GroundSubst {
    pub fn new(pairs: impl IntoIterator<Item = (VarId, Mark)>) -> GroundSubst {
        let mut pairs: Vec<(VarId, Mark)> = pairs.into_iter().collect();
        pairs.sort();
        pairs.dedup_by_key(|p| p.0);
        GroundSubst {
            vars: VarSet::new(pairs.iter().map(|p| p.0)),
            marks: Some(pairs.into_iter().map(|p| p.1).collect()),
        }
    }

    pub fn mark(&self, v: VarId) -> Option<Mark> {
        let i = self.vars.position(v)?;
        self.marks.as_ref().map(|m| m[i])
    }

    pub fn is_ground(&self, v: VarId) -> bool {
        self.mark(v) == Some(Mark::Ground)
    }

    fn pairs(&self) -> impl Iterator<Item = (VarId, Mark)> + '_ {
        self.vars
            .iter()
            .zip(self.marks.iter().flatten().copied())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Groundness;

impl Groundness {
    /// Groundness propagation through the equations `x = t` until stable.
    /// Never loses a ground mark.
    pub fn abstract_unify(
        &self,
        t1: &Term,
        t2: &Term,
        s: &GroundSubst,
    ) -> Result<GroundSubst, DomainError> {
        self.unify(&[(t1.clone(), t2.clone())], s)
    }
}

impl Domain for Groundness {
    type Subst = GroundSubst;

    fn name(&self) -> &'static str {
        "gr"
    }

    fn vars<'s>(&self, s: &'s GroundSubst) -> &'s VarSet {
        &s.vars
    }

    fn bottom(&self, vars: VarSet) -> GroundSubst {
        GroundSubst { vars, marks: None }
    }

    fn is_bottom(&self, s: &GroundSubst) -> bool {
        s.marks.is_none()
    }

    fn top(&self, vars: VarSet) -> Result<GroundSubst, DomainError> {
        let marks = Some(vec![Mark::Any; vars.len()]);
        Ok(GroundSubst { vars, marks })
    }

    fn lub(&self, a: &GroundSubst, b: &GroundSubst) -> Result<GroundSubst, DomainError> {
        same_vars("lub", &a.vars, &b.vars)?;
        Ok(match (&a.marks, &b.marks) {
            (None, _) => b.clone(),
            (_, None) => a.clone(),
            (Some(x), Some(y)) => GroundSubst {
                vars: a.vars.clone(),
                marks: Some(x.iter().zip(y).map(|(p, q)| p.join(*q)).collect()),
            },
        })
    }

    fn leq(&self, a: &GroundSubst, b: &GroundSubst) -> Result<bool, DomainError> {
        same_vars("leq", &a.vars, &b.vars)?;
        Ok(match (&a.marks, &b.marks) {
            (None, _) => true,
            (_, None) => false,
            (Some(x), Some(y)) => x.iter().zip(y).all(|(p, q)| p <= q),
        })
    }

    fn identical(&self, a: &GroundSubst, b: &GroundSubst) -> Result<bool, DomainError> {
        same_vars("identical", &a.vars, &b.vars)?;
        Ok(a.marks == b.marks)
    }

    fn project_in(&self, vars: &VarSet, s: &GroundSubst) -> Result<GroundSubst, DomainError> {
        if !s.vars.is_subset(vars) {
            return Err(DomainError::NotSubset {
                op: "project_in",
                inner: s.vars.clone(),
                outer: vars.clone(),
            });
        }
        if self.is_bottom(s) {
            return Ok(self.bottom(vars.clone()));
        }
        Ok(GroundSubst {
            vars: vars.clone(),
            marks: Some(vars.iter().map(|v| s.mark(v).unwrap_or(Mark::Any)).collect()),
        })
    }

    fn project_out(&self, vars: &VarSet, s: &GroundSubst) -> Result<GroundSubst, DomainError> {
        if !vars.is_subset(&s.vars) {
            return Err(DomainError::NotSubset {
                op: "project_out",
                inner: vars.clone(),
                outer: s.vars.clone(),
            });
        }
        if self.is_bottom(s) {
            return Ok(self.bottom(vars.clone()));
        }
        Ok(GroundSubst {
            vars: vars.clone(),
            marks: Some(vars.iter().map(|v| s.mark(v).unwrap()).collect()),
        })
    }

    fn extend(&self, call: &GroundSubst, success: &GroundSubst) -> Result<GroundSubst, DomainError> {
        if !success.vars.is_subset(&call.vars) {
            return Err(DomainError::NotSubset {
                op: "extend",
                inner: success.vars.clone(),
                outer: call.vars.clone(),
            });
        }
        if self.is_bottom(call) || self.is_bottom(success) {
            return Ok(self.bottom(call.vars.clone()));
        }
        let marks = call
            .pairs()
            .map(|(v, m)| match success.mark(v) {
                Some(Mark::Ground) => Mark::Ground,
                _ => m,
            })
            .collect();
        Ok(GroundSubst {
            vars: call.vars.clone(),
            marks: Some(marks),
        })
    }

    fn conjoin(&self, a: &GroundSubst, b: &GroundSubst) -> Result<GroundSubst, DomainError> {
        if !a.vars.is_disjoint(&b.vars) {
            return Err(DomainError::VarSetMismatch {
                op: "conjoin",
                left: a.vars.clone(),
                right: b.vars.clone(),
            });
        }
        let vars = a.vars.union(&b.vars);
        if self.is_bottom(a) || self.is_bottom(b) {
            return Ok(self.bottom(vars));
        }
        Ok(GroundSubst::new(a.pairs().chain(b.pairs())))
    }

    fn apply_bindings(&self, eqs: &[(VarId, Term)], s: &GroundSubst) -> Result<GroundSubst, DomainError> {
        let Some(marks) = &s.marks else {
            return Ok(s.clone());
        };
        let mut marks = marks.clone();
        let idx = |v: VarId| s.vars.position(v).expect("unify checked variable membership");
        loop {
            let mut changed = false;
            for (x, t) in eqs {
                let tv = t.var_ids();
                if marks[idx(*x)] == Mark::Ground {
                    for v in &tv {
                        if marks[idx(*v)] != Mark::Ground {
                            marks[idx(*v)] = Mark::Ground;
                            changed = true;
                        }
                    }
                } else if tv.iter().all(|v| marks[idx(*v)] == Mark::Ground) {
                    marks[idx(*x)] = Mark::Ground;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Ok(GroundSubst {
            vars: s.vars.clone(),
            marks: Some(marks),
        })
    }

    fn rename(&self, s: &GroundSubst, f: &dyn Fn(VarId) -> VarId) -> GroundSubst {
        match &s.marks {
            None => self.bottom(VarSet::new(s.vars.iter().map(f))),
            Some(_) => GroundSubst::new(s.pairs().map(|(v, m)| (f(v), m))),
        }
    }

    fn initial_from_entry(&self, entry: &EntryDecl) -> Result<GroundSubst, DomainError> {
        Ok(GroundSubst::new(entry.vars().into_iter().map(|v| {
            let m = match entry.prop_of(v.id) {
                EntryProp::Ground => Mark::Ground,
                _ => Mark::Any,
            };
            (v.id, m)
        })))
    }

    fn builtin(&self, b: Builtin, args: &[Term], s: &GroundSubst) -> Result<GroundSubst, DomainError> {
        match b {
            Builtin::True | Builtin::Compare(_) => Ok(s.clone()),
            Builtin::Fail => Ok(self.bottom(s.vars.clone())),
            Builtin::Unify => self.unify(&[(args[0].clone(), args[1].clone())], s),
            Builtin::Is => {
                if self.is_bottom(s) {
                    return Ok(s.clone());
                }
                if args[1].var_ids().iter().all(|v| s.is_ground(*v)) {
                    self.unify(&[(args[0].clone(), Term::Int(0))], s)
                } else {
                    Ok(s.clone())
                }
            }
        }
    }

    fn gamma_contains(&self, s: &GroundSubst, binding: &ConcreteBinding) -> bool {
        if self.is_bottom(s) {
            return false;
        }
        s.pairs().all(|(v, m)| {
            m == Mark::Any || binding.get(&v).is_some_and(Term::is_ground)
        })
    }

    fn view(&self, s: &GroundSubst, name: &dyn Fn(VarId) -> String) -> SubstView {
        if self.is_bottom(s) {
            return SubstView::Bottom;
        }
        SubstView::Marks(s.pairs().map(|(v, m)| (name(v), m.to_string())).collect())
    }
}
