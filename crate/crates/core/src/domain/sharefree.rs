//! Set-sharing with freeness.
//!
//! A substitution is a set of sharing groups plus the set of variables known to
//! be free. A variable that occurs in no group is ground.

use std::collections::{BTreeMap, BTreeSet};

use crate::ir::{Builtin, EntryDecl, EntryProp, Term, VarId};
use crate::lattice::{same_vars, ConcreteBinding, Domain, DomainError, SubstView, VarSet};

pub const DEFAULT_CLOSURE_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct ShFr {
    sh: BTreeSet<VarSet>,
    fr: VarSet,
}

impl ShFr {
    fn canonical(sh: impl IntoIterator<Item = VarSet>, fr: impl IntoIterator<Item = VarId>) -> ShFr {
        let sh: BTreeSet<VarSet> = sh.into_iter().filter(|g| !g.is_empty()).collect();
        let fr = fr.into_iter().filter(|v| sh.iter().any(|g| g.contains(*v)));
        ShFr {
            fr: VarSet::new(fr),
            sh,
        }
    }

    fn relevant(&self, vars: &VarSet) -> (Vec<VarSet>, Vec<VarSet>) {
        self.sh.iter().cloned().partition(|g| !g.is_disjoint(vars))
    }
}

/// `None` is bottom. Groups are kept sorted, so derived equality is lattice identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShFrSubst {
    vars: VarSet,
    state: Option<ShFr>,
}

impl ShFrSubst {
    pub fn new(
        vars: VarSet,
        sh: impl IntoIterator<Item = VarSet>,
        fr: impl IntoIterator<Item = VarId>,
    ) -> ShFrSubst {
        let state = ShFr::canonical(sh, fr);
        debug_assert!(state.sh.iter().all(|g| g.is_subset(&vars)));
        ShFrSubst {
            vars,
            state: Some(state),
        }
    }

    pub fn sharing(&self) -> impl Iterator<Item = &VarSet> {
        self.state.iter().flat_map(|s| s.sh.iter())
    }

    pub fn free(&self) -> Option<&VarSet> {
        self.state.as_ref().map(|s| &s.fr)
    }

    pub fn is_ground(&self, v: VarId) -> bool {
        self.state
            .as_ref()
            .is_some_and(|s| s.sh.iter().all(|g| !g.contains(v)))
    }

    pub fn is_free(&self, v: VarId) -> bool {
        self.state.as_ref().is_some_and(|s| s.fr.contains(v))
    }
}

fn bin(a: &[VarSet], b: &[VarSet]) -> Vec<VarSet> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x.union(y)))
        .collect()
}

#[derive(Clone, Copy, Debug)]
pub struct ShareFree {
    pub closure_limit: usize,
}

impl Default for ShareFree {
    fn default() -> ShareFree {
        ShareFree {
            closure_limit: DEFAULT_CLOSURE_LIMIT,
        }
    }
}

impl ShareFree {
    /// All non-empty unions of subsets of `groups`.
    pub fn star_union(&self, groups: &[VarSet]) -> Result<Vec<VarSet>, DomainError> {
        let distinct: BTreeSet<&VarSet> = groups.iter().collect();
        if distinct.len() > self.closure_limit {
            return Err(DomainError::ClosureLimit {
                groups: distinct.len(),
                limit: self.closure_limit,
            });
        }
        let mut out: BTreeSet<VarSet> = BTreeSet::new();
        for g in distinct {
            let grown: Vec<VarSet> = out.iter().map(|r| r.union(g)).collect();
            out.insert(g.clone());
            out.extend(grown);
        }
        Ok(out.into_iter().collect())
    }

    /// Abstract effect of binding `x` to `t`.
    pub fn amgu(&self, x: VarId, t: &Term, s: &ShFrSubst) -> Result<ShFrSubst, DomainError> {
        let Some(st) = &s.state else {
            return Ok(s.clone());
        };
        if matches!(t, Term::Var(v) if v.id == x) {
            return Ok(s.clone());
        }
        let tvars = VarSet::of_term(t);
        let (a, rest): (Vec<VarSet>, Vec<VarSet>) =
            st.sh.iter().cloned().partition(|g| g.contains(x));
        let (b, rest): (Vec<VarSet>, Vec<VarSet>) =
            rest.into_iter().partition(|g| !g.is_disjoint(&tvars));
        // groups containing both x and vars(t) sit in `a`; they also belong to B
        let b_all: Vec<VarSet> = a
            .iter()
            .filter(|g| !g.is_disjoint(&tvars))
            .cloned()
            .chain(b.iter().cloned())
            .collect();
        let x_free = st.fr.contains(x);
        let t_free = matches!(t, Term::Var(v) if st.fr.contains(v.id));
        let joined = if x_free || t_free {
            bin(&a, &b_all)
        } else {
            bin(&self.star_union(&a)?, &self.star_union(&b_all)?)
        };
        let lose: VarSet = match (x_free, t_free) {
            (true, true) => VarSet::empty(),
            (true, false) => VarSet::new(a.iter().flat_map(|g| g.iter())),
            (false, true) => VarSet::new(b_all.iter().flat_map(|g| g.iter())),
            (false, false) => VarSet::new(a.iter().chain(&b_all).flat_map(|g| g.iter())),
        };
        let fr: Vec<VarId> = st.fr.iter().filter(|v| !lose.contains(*v)).collect();
        Ok(ShFrSubst {
            vars: s.vars.clone(),
            state: Some(ShFr::canonical(rest.into_iter().chain(joined), fr)),
        })
    }

    fn check_width(&self, vars: &VarSet) -> Result<(), DomainError> {
        if vars.len() > self.closure_limit {
            Err(DomainError::ClosureLimit {
                groups: vars.len(),
                limit: self.closure_limit,
            })
        } else {
            Ok(())
        }
    }
}

impl Domain for ShareFree {
    type Subst = ShFrSubst;

    fn name(&self) -> &'static str {
        "shfr"
    }

    fn vars<'s>(&self, s: &'s ShFrSubst) -> &'s VarSet {
        &s.vars
    }

    fn bottom(&self, vars: VarSet) -> ShFrSubst {
        ShFrSubst { vars, state: None }
    }

    fn is_bottom(&self, s: &ShFrSubst) -> bool {
        s.state.is_none()
    }

    fn top(&self, vars: VarSet) -> Result<ShFrSubst, DomainError> {
        self.check_width(&vars)?;
        let singletons: Vec<VarSet> = vars.iter().map(|v| VarSet::new([v])).collect();
        let sh = self.star_union(&singletons)?;
        Ok(ShFrSubst::new(vars, sh, []))
    }

    fn lub(&self, a: &ShFrSubst, b: &ShFrSubst) -> Result<ShFrSubst, DomainError> {
        same_vars("lub", &a.vars, &b.vars)?;
        Ok(match (&a.state, &b.state) {
            (None, _) => b.clone(),
            (_, None) => a.clone(),
            (Some(x), Some(y)) => ShFrSubst::new(
                a.vars.clone(),
                x.sh.iter().chain(&y.sh).cloned(),
                x.fr.iter().filter(|v| y.fr.contains(*v)),
            ),
        })
    }

    fn leq(&self, a: &ShFrSubst, b: &ShFrSubst) -> Result<bool, DomainError> {
        same_vars("leq", &a.vars, &b.vars)?;
        Ok(match (&a.state, &b.state) {
            (None, _) => true,
            (_, None) => false,
            (Some(x), Some(y)) => x.sh.is_subset(&y.sh) && y.fr.is_subset(&x.fr),
        })
    }

    fn identical(&self, a: &ShFrSubst, b: &ShFrSubst) -> Result<bool, DomainError> {
        same_vars("identical", &a.vars, &b.vars)?;
        Ok(a.state == b.state)
    }

    fn project_in(&self, vars: &VarSet, s: &ShFrSubst) -> Result<ShFrSubst, DomainError> {
        if !s.vars.is_subset(vars) {
            return Err(DomainError::NotSubset {
                op: "project_in",
                inner: s.vars.clone(),
                outer: vars.clone(),
            });
        }
        let Some(st) = &s.state else {
            return Ok(self.bottom(vars.clone()));
        };
        let fresh: Vec<VarId> = vars.iter().filter(|v| !s.vars.contains(*v)).collect();
        Ok(ShFrSubst::new(
            vars.clone(),
            st.sh.iter().cloned().chain(fresh.iter().map(|v| VarSet::new([*v]))),
            st.fr.iter().chain(fresh.iter().copied()),
        ))
    }

    fn project_out(&self, vars: &VarSet, s: &ShFrSubst) -> Result<ShFrSubst, DomainError> {
        if !vars.is_subset(&s.vars) {
            return Err(DomainError::NotSubset {
                op: "project_out",
                inner: vars.clone(),
                outer: s.vars.clone(),
            });
        }
        let Some(st) = &s.state else {
            return Ok(self.bottom(vars.clone()));
        };
        Ok(ShFrSubst::new(
            vars.clone(),
            st.sh
                .iter()
                .map(|g| VarSet::new(g.iter().filter(|v| vars.contains(*v)))),
            st.fr.iter().filter(|v| vars.contains(*v)),
        ))
    }

    fn extend(&self, call: &ShFrSubst, success: &ShFrSubst) -> Result<ShFrSubst, DomainError> {
        let g = &success.vars;
        if !g.is_subset(&call.vars) {
            return Err(DomainError::NotSubset {
                op: "extend",
                inner: g.clone(),
                outer: call.vars.clone(),
            });
        }
        let (Some(st), Some(succ)) = (&call.state, &success.state) else {
            return Ok(self.bottom(call.vars.clone()));
        };
        let (touching, rest) = st.relevant(g);
        let restrict = |u: &VarSet| VarSet::new(u.iter().filter(|v| g.contains(*v)));
        let viable = |u: &VarSet| {
            let p = restrict(u);
            succ.sh.iter().any(|h| p.is_subset(h))
        };
        let bound = 1usize << self.closure_limit;
        let mut closure: BTreeSet<VarSet> = BTreeSet::new();
        for grp in touching.iter().filter(|u| viable(u)) {
            // a free variable lies in exactly one group of any concrete state
            let grown: Vec<VarSet> = closure
                .iter()
                .filter(|r| !r.iter().any(|v| grp.contains(v) && st.fr.contains(v)))
                .map(|r| r.union(grp))
                .filter(|u| viable(u))
                .collect();
            closure.insert(grp.clone());
            closure.extend(grown);
            if closure.len() > bound {
                return Err(DomainError::ClosureLimit {
                    groups: touching.len(),
                    limit: self.closure_limit,
                });
            }
        }
        let kept = closure.into_iter().filter(|u| succ.sh.contains(&restrict(u)));
        let fr: Vec<VarId> = call
            .vars
            .iter()
            .filter(|v| {
                if g.contains(*v) {
                    succ.fr.contains(*v)
                } else {
                    st.fr.contains(*v)
                        && touching
                            .iter()
                            .filter(|grp| grp.contains(*v))
                            .all(|grp| grp.iter().filter(|w| g.contains(*w)).all(|w| succ.fr.contains(w)))
                }
            })
            .collect();
        Ok(ShFrSubst {
            vars: call.vars.clone(),
            state: Some(ShFr::canonical(rest.into_iter().chain(kept), fr)),
        })
    }

    fn conjoin(&self, a: &ShFrSubst, b: &ShFrSubst) -> Result<ShFrSubst, DomainError> {
        if !a.vars.is_disjoint(&b.vars) {
            return Err(DomainError::VarSetMismatch {
                op: "conjoin",
                left: a.vars.clone(),
                right: b.vars.clone(),
            });
        }
        let vars = a.vars.union(&b.vars);
        let (Some(x), Some(y)) = (&a.state, &b.state) else {
            return Ok(self.bottom(vars));
        };
        Ok(ShFrSubst::new(
            vars,
            x.sh.iter().chain(&y.sh).cloned(),
            x.fr.iter().chain(y.fr.iter()),
        ))
    }

    fn apply_bindings(&self, eqs: &[(VarId, Term)], s: &ShFrSubst) -> Result<ShFrSubst, DomainError> {
        let mut cur = s.clone();
        for (x, t) in eqs {
            cur = self.amgu(*x, t, &cur)?;
        }
        Ok(cur)
    }

    fn rename(&self, s: &ShFrSubst, f: &dyn Fn(VarId) -> VarId) -> ShFrSubst {
        let vars = VarSet::new(s.vars.iter().map(f));
        match &s.state {
            None => self.bottom(vars),
            Some(st) => ShFrSubst::new(
                vars,
                st.sh.iter().map(|g| VarSet::new(g.iter().map(f))),
                st.fr.iter().map(f),
            ),
        }
    }

    fn initial_from_entry(&self, entry: &EntryDecl) -> Result<ShFrSubst, DomainError> {
        let vars = VarSet::new(entry.vars().into_iter().map(|v| v.id));
        let mut sh = Vec::new();
        let mut fr = Vec::new();
        for v in vars.iter() {
            match entry.prop_of(v) {
                EntryProp::Ground => {}
                EntryProp::Free => {
                    sh.push(VarSet::new([v]));
                    fr.push(v);
                }
                EntryProp::Any => sh.push(VarSet::new([v])),
            }
        }
        Ok(ShFrSubst::new(vars, sh, fr))
    }

    fn builtin(&self, b: Builtin, args: &[Term], s: &ShFrSubst) -> Result<ShFrSubst, DomainError> {
        match b {
            Builtin::True | Builtin::Compare(_) => Ok(s.clone()),
            Builtin::Fail => Ok(self.bottom(s.vars.clone())),
            Builtin::Unify => self.unify(&[(args[0].clone(), args[1].clone())], s),
            Builtin::Is => {
                let Some(st) = &s.state else {
                    return Ok(s.clone());
                };
                if args[1].var_ids().iter().all(|v| s.is_ground(*v)) {
                    return self.unify(&[(args[0].clone(), Term::Int(0))], s);
                }
                let lhs = VarSet::of_term(&args[0]);
                Ok(ShFrSubst {
                    vars: s.vars.clone(),
                    state: Some(ShFr::canonical(
                        st.sh.iter().cloned(),
                        st.fr.iter().filter(|v| !lhs.contains(*v)),
                    )),
                })
            }
        }
    }

    fn gamma_contains(&self, s: &ShFrSubst, binding: &ConcreteBinding) -> bool {
        let Some(st) = &s.state else {
            return false;
        };
        let value = |v: VarId| -> Term {
            binding
                .get(&v)
                .cloned()
                .unwrap_or_else(|| Term::var(u32::MAX - v.0, "_"))
        };
        let mut occurrences: BTreeMap<VarId, Vec<VarId>> = BTreeMap::new();
        for v in s.vars.iter() {
            let t = value(v);
            if st.fr.contains(v) && !matches!(t, Term::Var(_)) {
                return false;
            }
            for u in t.var_ids() {
                occurrences.entry(u).or_default().push(v);
            }
        }
        occurrences
            .into_values()
            .all(|group| st.sh.contains(&VarSet::new(group)))
    }

    fn view(&self, s: &ShFrSubst, name: &dyn Fn(VarId) -> String) -> SubstView {
        let Some(st) = &s.state else {
            return SubstView::Bottom;
        };
        SubstView::Sharing {
            sh: st.sh.iter().map(|g| g.iter().map(name).collect()).collect(),
            fr: st.fr.iter().map(name).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::concrete;
    use proptest::prelude::*;

    fn vs(ids: &[u32]) -> VarSet {
        VarSet::new(ids.iter().map(|i| VarId(*i)))
    }
    fn v(id: u32) -> Term {
        Term::var(id, ["X", "Y", "Z", "W"][id as usize])
    }
    fn subst(vars: &[u32], sh: &[&[u32]], fr: &[u32]) -> ShFrSubst {
        ShFrSubst::new(
            vs(vars),
            sh.iter().map(|g| vs(g)),
            fr.iter().map(|i| VarId(*i)),
        )
    }

    #[test]
    fn star_union_examples() {
        let d = ShareFree::default();
        assert!(d.star_union(&[]).unwrap().is_empty());
        assert_eq!(d.star_union(&[vs(&[0])]).unwrap(), vec![vs(&[0])]);
        let mut got = d.star_union(&[vs(&[0]), vs(&[1])]).unwrap();
        got.sort();
        assert_eq!(got, vec![vs(&[0]), vs(&[0, 1]), vs(&[1])]);
        let many: Vec<VarSet> = (0..17).map(|i| vs(&[i])).collect();
        let err = d.star_union(&many).unwrap_err();
        assert!(err.is_resource());
        assert!(err.to_string().contains("desk-scale"));
    }

    // Expected values below are the brute-force abstraction of all concrete
    // unifiers; see `concrete::best_amgu`.
    #[test]
    fn amgu_examples() {
        let d = ShareFree::default();
        let r = d.amgu(VarId(0), &Term::atom("a"), &subst(&[0], &[&[0]], &[0])).unwrap();
        assert_eq!(r, subst(&[0], &[], &[]));

        let s = subst(&[0, 1], &[&[0], &[1]], &[0, 1]);
        let r = d.amgu(VarId(0), &v(1), &s).unwrap();
        assert_eq!(r, subst(&[0, 1], &[&[0, 1]], &[0, 1]));
        assert_eq!(r, concrete::best_amgu(&d, VarId(0), &v(1), &s));
        assert_eq!(d.amgu(VarId(0), &v(1), &r).unwrap(), r);

        let s = subst(&[0, 1, 2], &[&[0], &[1], &[2]], &[0, 1, 2]);
        let t = Term::compound("f", vec![v(1), v(2)]);
        let r = d.amgu(VarId(0), &t, &s).unwrap();
        assert_eq!(r, subst(&[0, 1, 2], &[&[0, 1], &[0, 2]], &[1, 2]));
        assert_eq!(r, concrete::best_amgu(&d, VarId(0), &t, &s));
    }

    #[test]
    fn amgu_of_nonfree_variables_needs_closure() {
        let d = ShareFree::default();
        let s = subst(&[0, 1, 2], &[&[0], &[1], &[2]], &[]);
        let t = Term::compound("f", vec![v(1), v(2)]);
        let r = d.amgu(VarId(0), &t, &s).unwrap();
        assert_eq!(
            r,
            subst(&[0, 1, 2], &[&[0, 1], &[0, 2], &[0, 1, 2]], &[])
        );
        assert!(concrete::amgu_sound(&d, VarId(0), &t, &s));
    }

    #[test]
    fn projections() {
        let d = ShareFree::default();
        let r = d.project_in(&vs(&[0, 1]), &subst(&[0], &[&[0]], &[0])).unwrap();
        assert_eq!(r, subst(&[0, 1], &[&[0], &[1]], &[0, 1]));
        let r = d.project_out(&vs(&[0]), &subst(&[0, 1], &[&[0, 1]], &[])).unwrap();
        assert_eq!(r, subst(&[0], &[&[0]], &[]));
        let r = d
            .project_out(&vs(&[0]), &subst(&[0, 1], &[&[0, 1], &[0]], &[]))
            .unwrap();
        assert_eq!(r, subst(&[0], &[&[0]], &[]));
    }

    #[test]
    fn identical_ignores_enumeration_order() {
        let d = ShareFree::default();
        let a = ShFrSubst::new(vs(&[0, 1, 2]), [vs(&[2, 1]), vs(&[0])], [VarId(2)]);
        let b = ShFrSubst::new(vs(&[2, 1, 0]), [vs(&[0]), vs(&[1, 2])], [VarId(2)]);
        assert!(d.identical(&a, &b).unwrap());
    }

    #[test]
    fn extend_grounding_a_shared_variable() {
        // X shares with Y; the goal over {X} reports X ground
        let d = ShareFree::default();
        let call = subst(&[0, 1, 2], &[&[0, 1], &[1], &[2]], &[2]);
        let succ = subst(&[0], &[], &[]);
        let r = d.extend(&call, &succ).unwrap();
        assert_eq!(r, subst(&[0, 1, 2], &[&[1], &[2]], &[2]));
        assert!(concrete::extend_sound(&d, &call, &succ));
    }

    #[test]
    fn extend_self_is_identity() {
        let d = ShareFree::default();
        let call = subst(&[0, 1, 2], &[&[0, 1], &[1, 2], &[2]], &[0, 1]);
        let succ = d.project_out(&vs(&[0, 1]), &call).unwrap();
        assert_eq!(d.extend(&call, &succ).unwrap(), call);
        assert!(d.is_bottom(&d.extend(&call, &d.bottom(vs(&[0, 1]))).unwrap()));
    }

    #[test]
    fn extend_self_closes_over_nonfree_links() {
        // Y may hold two runtime variables that the goal aliases, linking X and Z
        let d = ShareFree::default();
        let call = subst(&[0, 1, 2], &[&[0, 1], &[1, 2], &[2]], &[]);
        let succ = d.project_out(&vs(&[0, 1]), &call).unwrap();
        let r = d.extend(&call, &succ).unwrap();
        assert_eq!(
            r,
            subst(&[0, 1, 2], &[&[0, 1], &[0, 1, 2], &[1, 2], &[2]], &[])
        );
        assert!(concrete::extend_sound(&d, &call, &succ));
    }

    #[test]
    fn extend_links_through_success_sharing() {
        // call {X},{Y},{Z,X}; goal over {X,Y} makes X and Y share
        let d = ShareFree::default();
        let call = subst(&[0, 1, 2], &[&[0], &[1], &[0, 2]], &[0, 1, 2]);
        let succ = subst(&[0, 1], &[&[0, 1]], &[0, 1]);
        let r = d.extend(&call, &succ).unwrap();
        assert_eq!(
            r,
            subst(&[0, 1, 2], &[&[0, 1], &[0, 1, 2]], &[0, 1, 2])
        );
        assert!(concrete::extend_sound(&d, &call, &succ));
    }

    #[test]
    fn gamma_contains_checks_sharing_and_freeness() {
        let d = ShareFree::default();
        let s = subst(&[0, 1], &[&[0, 1]], &[0]);
        let u = Term::var(100, "_");
        let mut b = ConcreteBinding::new();
        b.insert(VarId(0), u.clone());
        b.insert(VarId(1), Term::compound("f", vec![u]));
        assert!(d.gamma_contains(&s, &b));
        b.insert(VarId(0), Term::atom("a"));
        assert!(!d.gamma_contains(&s, &b));
        b.insert(VarId(0), Term::var(101, "_"));
        assert!(!d.gamma_contains(&s, &b));
    }

    #[test]
    fn builtin_is() {
        let d = ShareFree::default();
        let s = subst(&[0, 1], &[&[0], &[1]], &[0, 1]);
        let e = Term::compound("+", vec![v(1), Term::Int(1)]);
        let r = d.builtin(Builtin::Is, &[v(0), e], &s).unwrap();
        assert_eq!(r, subst(&[0, 1], &[&[0], &[1]], &[1]));
        let s = subst(&[0, 1], &[&[0]], &[0]);
        let r = d.builtin(Builtin::Is, &[v(0), v(1)], &s).unwrap();
        assert_eq!(r, subst(&[0, 1], &[], &[]));
    }

    #[test]
    fn top_width_is_limited() {
        let d = ShareFree { closure_limit: 3 };
        assert_eq!(d.top(vs(&[0, 1])).unwrap().sharing().count(), 3);
        assert!(d.top(vs(&[0, 1, 2, 3])).unwrap_err().is_resource());
    }

    fn arb_subst(n: u32) -> impl Strategy<Value = ShFrSubst> {
        let groups = prop::collection::btree_set(1u32..(1 << n), 0..5);
        let fr = prop::collection::vec(any::<bool>(), n as usize);
        prop::option::weighted(0.9, (groups, fr)).prop_map(move |st| {
            let vars = VarSet::new((0..n).map(VarId));
            match st {
                None => ShFrSubst { vars, state: None },
                Some((groups, fr)) => ShFrSubst::new(
                    vars,
                    groups
                        .into_iter()
                        .map(|m| VarSet::new((0..n).filter(|i| m & (1 << i) != 0).map(VarId))),
                    (0..n).filter(|i| fr[*i as usize]).map(VarId),
                ),
            }
        })
    }

    fn arb_term() -> impl Strategy<Value = (u32, Term)> {
        let leaf = prop_oneof![
            (0u32..3).prop_map(v),
            Just(Term::atom("a")),
        ];
        let t = leaf.prop_recursive(2, 4, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Term::compound("f", vec![a])),
                (inner.clone(), inner).prop_map(|(a, b)| Term::compound("g", vec![a, b])),
            ]
        });
        (0u32..3, t).prop_filter("x must not occur in t", |(x, t)| !t.occurs(VarId(*x)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn amgu_is_sound((x, t) in arb_term(), s in arb_subst(3)) {
            let d = ShareFree::default();
            prop_assert!(concrete::amgu_sound(&d, VarId(x), &t, &s));
        }

        #[test]
        fn amgu_is_monotone((x, t) in arb_term(), a in arb_subst(3), b in arb_subst(3)) {
            let d = ShareFree::default();
            let b = d.lub(&a, &b).unwrap();
            let ra = d.amgu(VarId(x), &t, &a).unwrap();
            let rb = d.amgu(VarId(x), &t, &b).unwrap();
            prop_assert!(d.leq(&ra, &rb).unwrap(), "{:?} vs {:?}", ra, rb);
        }

        #[test]
        fn extend_is_sound(call in arb_subst(3), succ in arb_subst(2)) {
            let d = ShareFree::default();
            prop_assert!(concrete::extend_sound(&d, &call, &succ));
        }

        #[test]
        fn lub_is_least_among_gamma_supersets(a in arb_subst(2), b in arb_subst(2), c in arb_subst(2)) {
            let d = ShareFree::default();
            let (a, b, c) = (concrete::reduce(&d, &a), concrete::reduce(&d, &b), concrete::reduce(&d, &c));
            if concrete::gamma_subset(&d, &a, &c) && concrete::gamma_subset(&d, &b, &c) {
                prop_assert!(d.leq(&d.lub(&a, &b).unwrap(), &c).unwrap());
            }
        }
    }
}
