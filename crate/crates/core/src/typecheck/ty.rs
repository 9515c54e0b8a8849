//! Formulas with metavariables, as used during elaboration.
//!
//! `Meta(m, args)` stands for the solution of `m` applied to individuals. A
//! solution body of arity `n` refers to parameter `k` (of `args`) as the
//! index `depth + n - 1 - k`, i.e. as if bound by `n` binders outside it.

use std::collections::HashSet;

use crate::syntax::{Formula, Name, Sort, Var};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub(crate) enum Ty {
    Atom(Name, Vec<Var>),
    And(Box<Ty>, Box<Ty>),
    Or(Box<Ty>, Box<Ty>),
    Implies(Box<Ty>, Box<Ty>),
    Forall(Sort, Box<Ty>),
    Exists(Sort, Box<Ty>),
    Id(Sort, Var, Var),
    Meta(usize, Vec<Var>),
}

pub(crate) fn bx(t: Ty) -> Box<Ty> {
    Box::new(t)
}

impl Ty {
    pub fn from_formula(f: &Formula) -> Ty {
        match f {
            Formula::Atom(p, a) | Formula::NegAtom(p, a) => Ty::Atom(p.clone(), a.clone()),
            Formula::And(a, b) => Ty::And(bx(Ty::from_formula(a)), bx(Ty::from_formula(b))),
            Formula::Or(a, b) => Ty::Or(bx(Ty::from_formula(a)), bx(Ty::from_formula(b))),
            Formula::Implies(a, b) => {
                Ty::Implies(bx(Ty::from_formula(a)), bx(Ty::from_formula(b)))
            }
            Formula::Forall(s, b) => Ty::Forall(s.clone(), bx(Ty::from_formula(b))),
            Formula::Exists(s, b) => Ty::Exists(s.clone(), bx(Ty::from_formula(b))),
            Formula::Id(s, a, b) => Ty::Id(s.clone(), a.clone(), b.clone()),
        }
    }

    /// Convert back, rendering unsolved metas as atoms named `?n`.
    pub fn to_formula_lossy(&self) -> Formula {
        let b = |t: &Ty| Box::new(t.to_formula_lossy());
        match self {
            Ty::Atom(p, a) => Formula::Atom(p.clone(), a.clone()),
            Ty::Meta(m, a) => Formula::Atom(Name::from(format!("?{m}")), a.clone()),
            Ty::And(x, y) => Formula::And(b(x), b(y)),
            Ty::Or(x, y) => Formula::Or(b(x), b(y)),
            Ty::Implies(x, y) => Formula::Implies(b(x), b(y)),
            Ty::Forall(s, x) => Formula::Forall(s.clone(), b(x)),
            Ty::Exists(s, x) => Formula::Exists(s.clone(), b(x)),
            Ty::Id(s, x, y) => Formula::Id(s.clone(), x.clone(), y.clone()),
        }
    }

    pub fn to_formula(&self) -> Option<Formula> {
        let b = |t: &Ty| t.to_formula().map(Box::new);
        Some(match self {
            Ty::Atom(p, a) => Formula::Atom(p.clone(), a.clone()),
            Ty::Meta(..) => return None,
            Ty::And(x, y) => Formula::And(b(x)?, b(y)?),
            Ty::Or(x, y) => Formula::Or(b(x)?, b(y)?),
            Ty::Implies(x, y) => Formula::Implies(b(x)?, b(y)?),
            Ty::Forall(s, x) => Formula::Forall(s.clone(), b(x)?),
            Ty::Exists(s, x) => Formula::Exists(s.clone(), b(x)?),
            Ty::Id(s, x, y) => Formula::Id(s.clone(), x.clone(), y.clone()),
        })
    }

    /// Rebuild with every individual occurrence passed through `f`, which
    /// receives the binder depth and whether the occurrence is a meta argument.
    pub fn try_map<E>(&self, depth: u32, f: &mut impl FnMut(u32, &Var, bool) -> Result<Var, E>) -> Result<Ty, E> {
        Ok(match self {
            Ty::Atom(p, a) => Ty::Atom(p.clone(), a.iter().map(|v| f(depth, v, false)).collect::<Result<_, _>>()?),
            Ty::Meta(m, a) => Ty::Meta(*m, a.iter().map(|v| f(depth, v, true)).collect::<Result<_, _>>()?),
            Ty::Id(s, x, y) => Ty::Id(s.clone(), f(depth, x, false)?, f(depth, y, false)?),
            Ty::And(x, y) => Ty::And(bx(x.try_map(depth, f)?), bx(y.try_map(depth, f)?)),
            Ty::Or(x, y) => Ty::Or(bx(x.try_map(depth, f)?), bx(y.try_map(depth, f)?)),
            Ty::Implies(x, y) => Ty::Implies(bx(x.try_map(depth, f)?), bx(y.try_map(depth, f)?)),
            Ty::Forall(s, x) => Ty::Forall(s.clone(), bx(x.try_map(depth + 1, f)?)),
            Ty::Exists(s, x) => Ty::Exists(s.clone(), bx(x.try_map(depth + 1, f)?)),
        })
    }

    pub fn map(&self, f: &mut impl FnMut(u32, &Var) -> Var) -> Ty {
        self.try_map::<()>(0, &mut |d, v, _| Ok(f(d, v))).unwrap()
    }

    /// Replace the outermost bound individual of a quantifier body.
    pub fn open(&self, value: &Name) -> Ty {
        self.map(&mut |d, v| match v {
            Var::Bound(i) if *i == d => Var::Free(value.clone()),
            Var::Bound(i) if *i > d => Var::Bound(i - 1),
            v => v.clone(),
        })
    }

    /// Open with an arbitrary individual (which may itself be bound outside).
    pub fn open_with(&self, value: &Var) -> Ty {
        match value {
            Var::Free(n) => self.open(n),
            Var::Bound(j) => self.map(&mut |d, v| match v {
                Var::Bound(i) if *i == d => Var::Bound(j + d),
                Var::Bound(i) if *i > d => Var::Bound(i - 1),
                v => v.clone(),
            }),
        }
    }

    /// Instantiate a solution body of arity `args.len()`.
    pub fn apply(&self, args: &[Var]) -> Ty {
        let n = args.len() as u32;
        if n == 0 {
            return self.clone();
        }
        self.map(&mut |d, v| match v {
            Var::Bound(i) if *i >= d && *i < d + n => match &args[(n - 1 - (i - d)) as usize] {
                Var::Bound(k) => Var::Bound(k + d),
                free => free.clone(),
            },
            Var::Bound(i) if *i >= d + n => Var::Bound(i - n),
            v => v.clone(),
        })
    }

    pub fn metas(&self, out: &mut HashSet<usize>) {
        match self {
            Ty::Meta(m, _) => {
                out.insert(*m);
            }
            Ty::Atom(..) | Ty::Id(..) => {}
            Ty::And(x, y) | Ty::Or(x, y) | Ty::Implies(x, y) => {
                x.metas(out);
                y.metas(out);
            }
            Ty::Forall(_, x) | Ty::Exists(_, x) => x.metas(out),
        }
    }
}

/// Parameter references `[Bound(depth + n - 1), …, Bound(depth)]`.
pub(crate) fn params(n: usize, depth: u32) -> Vec<Var> {
    (0..n as u32).rev().map(|k| Var::Bound(depth + k)).collect()
}
