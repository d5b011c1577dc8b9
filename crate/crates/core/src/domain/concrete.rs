//! Brute-force concretization over a bounded term universe, used to check the
//! sharing domain against concrete unification.

use std::collections::BTreeMap;

use super::sharefree::{ShFrSubst, ShareFree};
use crate::ir::{mgu, Term, VarId};
use crate::lattice::{ConcreteBinding, Domain, VarSet};

const RUNTIME: u32 = 100;
const FRESH: u32 = 200;

fn rt(i: u32) -> Term {
    Term::var(RUNTIME + i, "_")
}

fn fresh(i: u32) -> Term {
    Term::var(FRESH + i, "_")
}

/// Runtime variables, one constant, `f/1` and `g/2`; depth ≤ 1 plus `f` of
/// those when `deep`.
fn universe(deep: bool, small: bool) -> Vec<Term> {
    let base: Vec<Term> = (0..3).map(rt).chain([Term::atom("a")]).collect();
    let mut out = base.clone();
    if small {
        out.extend((0..3).map(|i| Term::compound("f", vec![rt(i)])));
        for x in 0..3 {
            for y in 0..3 {
                out.push(Term::compound("g", vec![rt(x), rt(y)]));
            }
        }
        return out;
    }
    for x in &base {
        out.push(Term::compound("f", vec![x.clone()]));
        for y in &base {
            out.push(Term::compound("g", vec![x.clone(), y.clone()]));
        }
    }
    if deep {
        let layer: Vec<Term> = out[base.len()..].to_vec();
        out.extend(layer.into_iter().map(|t| Term::compound("f", vec![t])));
    }
    out
}

fn assignments(vars: &VarSet, terms: &[Term]) -> Vec<ConcreteBinding> {
    let mut out = vec![ConcreteBinding::new()];
    for v in vars.iter() {
        out = out
            .into_iter()
            .flat_map(|b| {
                terms.iter().map(move |t| {
                    let mut b = b.clone();
                    b.insert(v, t.clone());
                    b
                })
            })
            .collect();
    }
    out
}

pub fn gamma(d: &ShareFree, s: &ShFrSubst, small: bool) -> Vec<ConcreteBinding> {
    let vars = d.vars(s);
    let terms = universe(vars.len() <= 2, small);
    assignments(vars, &terms)
        .into_iter()
        .filter(|b| d.gamma_contains(s, b))
        .collect()
}

pub fn abstraction(vars: &VarSet, b: &ConcreteBinding) -> ShFrSubst {
    let mut occ: BTreeMap<VarId, Vec<VarId>> = BTreeMap::new();
    for v in vars.iter() {
        for u in b[&v].var_ids() {
            occ.entry(u).or_default().push(v);
        }
    }
    ShFrSubst::new(
        vars.clone(),
        occ.into_values().map(VarSet::new),
        vars.iter().filter(|v| matches!(b[v], Term::Var(_))),
    )
}

fn substitute(t: &Term, sigma: &BTreeMap<VarId, Term>) -> Term {
    match t {
        Term::Var(v) => sigma.get(&v.id).cloned().unwrap_or_else(|| t.clone()),
        Term::Compound(f, args) => {
            Term::Compound(f.clone(), args.iter().map(|a| substitute(a, sigma)).collect())
        }
        _ => t.clone(),
    }
}

fn apply(b: &ConcreteBinding, sigma: &BTreeMap<VarId, Term>) -> ConcreteBinding {
    b.iter().map(|(v, t)| (*v, substitute(t, sigma))).collect()
}

/// Concrete effect of `x = t` on every member of γ(s).
fn unified(d: &ShareFree, x: VarId, t: &Term, s: &ShFrSubst) -> Vec<ConcreteBinding> {
    gamma(d, s, false)
        .into_iter()
        .filter_map(|b| {
            let lhs = b[&x].clone();
            let rhs = substitute(t, &b.iter().map(|(k, v)| (*k, v.clone())).collect());
            let sigma: BTreeMap<VarId, Term> = mgu(&[(lhs, rhs)])?.into_iter().collect();
            Some(apply(&b, &sigma))
        })
        .collect()
}

pub fn amgu_sound(d: &ShareFree, x: VarId, t: &Term, s: &ShFrSubst) -> bool {
    let r = d.amgu(x, t, s).unwrap();
    unified(d, x, t, s).iter().all(|b| d.gamma_contains(&r, b))
}

/// The most precise abstraction of all concrete unifiers within the universe.
pub fn best_amgu(d: &ShareFree, x: VarId, t: &Term, s: &ShFrSubst) -> ShFrSubst {
    let vars = d.vars(s).clone();
    unified(d, x, t, s)
        .iter()
        .fold(d.bottom(vars.clone()), |acc, b| {
            d.lub(&acc, &abstraction(&vars, b)).unwrap()
        })
}

/// Every instantiation of the goal variables that the success pattern admits
/// must land in the extended substitution.
pub fn extend_sound(d: &ShareFree, call: &ShFrSubst, succ: &ShFrSubst) -> bool {
    let r = d.extend(call, succ).unwrap();
    let goal_vars = d.vars(succ).clone();
    for b in gamma(d, call, true) {
        let dom = VarSet::new(goal_vars.iter().flat_map(|v| b[&v].var_ids()));
        let mut options: Vec<Option<Term>> = vec![
            None,
            Some(fresh(0)),
            Some(fresh(1)),
            Some(Term::atom("a")),
            Some(Term::compound("g", vec![fresh(0), fresh(1)])),
        ];
        if let Some(first) = dom.iter().next() {
            options.push(Some(Term::Var(crate::ir::Var::new(first.0, "_"))));
        }
        let mut sigmas: Vec<BTreeMap<VarId, Term>> = vec![BTreeMap::new()];
        for u in dom.iter() {
            sigmas = sigmas
                .into_iter()
                .flat_map(|s| {
                    options.iter().map(move |o| {
                        let mut s = s.clone();
                        if let Some(t) = o {
                            s.insert(u, t.clone());
                        }
                        s
                    })
                })
                .collect();
        }
        for sigma in sigmas {
            let after = apply(&b, &sigma);
            let on_goal: ConcreteBinding = after
                .iter()
                .filter(|(v, _)| goal_vars.contains(**v))
                .map(|(v, t)| (*v, t.clone()))
                .collect();
            if d.gamma_contains(succ, &on_goal) && !d.gamma_contains(&r, &after) {
                return false;
            }
        }
    }
    true
}

pub fn gamma_subset(d: &ShareFree, a: &ShFrSubst, c: &ShFrSubst) -> bool {
    gamma(d, a, false).iter().all(|b| d.gamma_contains(c, b))
}

/// The best representation of γ(s) within the universe.
pub fn reduce(d: &ShareFree, s: &ShFrSubst) -> ShFrSubst {
    let vars = d.vars(s).clone();
    gamma(d, s, false)
        .iter()
        .fold(d.bottom(vars.clone()), |acc, b| {
            d.lub(&acc, &abstraction(&vars, b)).unwrap()
        })
}
