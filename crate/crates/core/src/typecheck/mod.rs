//! Checking of labelled natural-deduction judgements.
//!
//! Constructors are checked against their formula and destructor scrutinees
//! have theirs synthesized. A scrutinee that is itself canonical (a redex)
//! gets a formula metavariable which the rest of the derivation solves, so
//! `fst(pair(a,b)) : A` checks without annotations. Metavariables range over
//! formulas in the individuals bound at their creation site; first-order and
//! pattern constraints are solved eagerly, others are postponed and finally
//! solved by imitation. The few genuine choices (the sort of an `inst`
//! scrutinee no constraint has fixed yet, the endpoints of such a `rewr`
//! scrutinee, how to abstract a non-pattern solution) are explored by a
//! bounded depth-first search, so the checker is sound and complete for the
//! fragment it accepts.

mod ty;

use std::collections::HashSet;

use thiserror::Error;

use crate::syntax::{
    instantiate, Context, Decl, Formula, Kind, Name, Path, PathAtom, Sort, SyntaxError, Term,
    Value, Var,
};
use ty::{bx, params, Ty};

/// Upper bound on elaboration attempts across all choice points.
const SEARCH_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error("unbound individual `{0}`")]
    UnboundIndividual(Name),
    #[error("unbound path variable `{0}`")]
    UnboundPath(Name),
    #[error("`{name}` is declared as a {declared}, but used as a {used}")]
    WrongKind { name: Name, declared: Kind, used: Kind },
    #[error("constructor/formula mismatch: {constructor} against {formula}")]
    Constructor { constructor: &'static str, formula: String },
    #[error("destructor on non-{connective}: {destructor} applied to a proof of {formula}")]
    Destructor {
        destructor: &'static str,
        connective: &'static str,
        formula: String,
    },
    #[error("formula mismatch: expected {expected}, found {found}")]
    Formula { expected: String, found: String },
    #[error("sort mismatch: {what} has sort {found}, expected {expected}")]
    Sort { what: String, expected: Sort, found: Sort },
    #[error("Id-intro endpoints mismatch: {term} against {formula}")]
    Endpoints { term: String, formula: String },
    #[error("path does not connect the endpoints: {0}")]
    Path(String),
    #[error("an individual bound inside the term would escape into a formula")]
    Escape,
    #[error("cyclic formula constraint")]
    Cyclic,
    #[error("cannot synthesize for canonical term")]
    CannotSynthesize,
    #[error("cannot determine the formula of the term")]
    Underdetermined,
    #[error("ill-scoped term")]
    IllScoped,
    #[error("formula search limit exceeded")]
    SearchLimit,
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("{0}")]
    Equality(String),
}

type R<T> = Result<T, TypeError>;

#[derive(Clone, Debug)]
enum Local {
    Proof(Ty),
    Individual(Sort),
    Path(Sort, Var, Var),
}

#[derive(Clone, Copy)]
enum Shape<'a> {
    And,
    Or,
    Implies,
    Forall(&'a Sort),
    Exists(&'a Sort),
}

enum Abstraction {
    Escape,
    Postpone,
}

struct Elab<'c> {
    ctx: &'c Context,
    solutions: Vec<Option<Ty>>,
    arity: Vec<usize>,
    scope: Vec<(Name, Local)>,
    locals: HashSet<Name>,
    next_local: usize,
    postponed: Vec<(Ty, Ty)>,
    script: Vec<usize>,
    made: Vec<(usize, usize)>,
}

impl<'c> Elab<'c> {
    fn new(ctx: &'c Context, script: Vec<usize>) -> Self {
        Elab {
            ctx,
            solutions: Vec::new(),
            arity: Vec::new(),
            scope: Vec::new(),
            locals: HashSet::new(),
            next_local: 0,
            postponed: Vec::new(),
            script,
            made: Vec::new(),
        }
    }

    fn choose(&mut self, n: usize) -> R<usize> {
        if n == 0 {
            return Err(TypeError::Underdetermined);
        }
        let c = self.script.get(self.made.len()).copied().unwrap_or(0).min(n - 1);
        self.made.push((c, n));
        Ok(c)
    }

    // ---- scope ----

    fn fresh_local(&mut self) -> Name {
        let n = Name::from(format!("%{}", self.next_local));
        self.next_local += 1;
        self.locals.insert(n.clone());
        n
    }

    fn bind(&mut self, local: Local) -> Name {
        let n = self.fresh_local();
        self.scope.push((n.clone(), local));
        n
    }

    fn unbind(&mut self, k: usize) {
        self.scope.truncate(self.scope.len() - k);
    }

    fn local(&self, n: &Name) -> Option<&Local> {
        self.scope.iter().rev().find(|(m, _)| m == n).map(|(_, l)| l)
    }

    fn declared_kind(&self, n: &Name) -> Option<Kind> {
        if let Some(l) = self.local(n) {
            return Some(match l {
                Local::Proof(_) => Kind::Proof,
                Local::Individual(_) => Kind::Individual,
                Local::Path(..) => Kind::Path,
            });
        }
        match self.ctx.lookup(n) {
            Some(Decl::Hypothesis { .. }) => Some(Kind::Proof),
            Some(Decl::Individual { .. }) => Some(Kind::Individual),
            Some(Decl::Equality { .. }) => Some(Kind::Path),
            None => self.ctx.signature().constant(n).map(|_| Kind::Individual),
        }
    }

    fn wrong_kind(&self, n: &Name, used: Kind) -> Option<TypeError> {
        self.declared_kind(n).map(|declared| TypeError::WrongKind {
            name: n.clone(),
            declared,
            used,
        })
    }

    fn proof_type(&self, n: &Name) -> R<Ty> {
        if let Some(Local::Proof(t)) = self.local(n) {
            return Ok(t.clone());
        }
        if self.local(n).is_none() {
            if let Some(f) = self.ctx.hypothesis(n) {
                return Ok(Ty::from_formula(f));
            }
        }
        Err(self.wrong_kind(n, Kind::Proof).unwrap_or_else(|| TypeError::Unbound(n.clone())))
    }

    fn sort_of(&self, v: &Var) -> R<Sort> {
        let Var::Free(n) = v else {
            return Err(TypeError::IllScoped);
        };
        if let Some(Local::Individual(s)) = self.local(n) {
            return Ok(s.clone());
        }
        if self.local(n).is_none() {
            if let Some(s) = self.ctx.individual_sort(n) {
                return Ok(s.clone());
            }
        }
        Err(self
            .wrong_kind(n, Kind::Individual)
            .unwrap_or_else(|| TypeError::UnboundIndividual(n.clone())))
    }

    fn path_equation(&self, v: &Var) -> R<(Sort, Var, Var)> {
        let Var::Free(n) = v else {
            return Err(TypeError::IllScoped);
        };
        if let Some(Local::Path(s, a, b)) = self.local(n) {
            return Ok((s.clone(), a.clone(), b.clone()));
        }
        if self.local(n).is_none() {
            if let Some((s, a, b)) = self.ctx.equality(n) {
                return Ok((s.clone(), a.clone(), b.clone()));
            }
        }
        Err(self.wrong_kind(n, Kind::Path).unwrap_or_else(|| TypeError::UnboundPath(n.clone())))
    }

    /// Individuals usable in a solution of arity `n` with arguments `args`:
    /// global ones by name, the arguments as parameters.
    fn individual_candidates(&self, sort: &Sort, args: &[Var]) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        for d in self.ctx.decls() {
            if let Decl::Individual { name, sort: s } = d {
                if s == sort && self.ctx.individual_sort(name) == Some(s) {
                    out.push(Var::Free(name.clone()));
                }
            }
        }
        for (c, s) in self.ctx.signature().constants() {
            if s == sort && self.ctx.lookup(c).is_none() {
                out.push(Var::Free(c.clone()));
            }
        }
        let n = args.len();
        for (k, a) in args.iter().enumerate() {
            if self.sort_of(a).ok().as_ref() == Some(sort) {
                out.push(Var::Bound((n - 1 - k) as u32));
            }
        }
        out
    }

    // ---- metavariables ----

    fn new_meta_with_arity(&mut self, n: usize) -> usize {
        self.solutions.push(None);
        self.arity.push(n);
        self.solutions.len() - 1
    }

    fn new_meta(&mut self) -> Ty {
        let args: Vec<Var> = self
            .scope
            .iter()
            .filter(|(_, l)| matches!(l, Local::Individual(_)))
            .map(|(n, _)| Var::Free(n.clone()))
            .collect();
        let m = self.new_meta_with_arity(args.len());
        Ty::Meta(m, args)
    }

    fn solved(&self) -> usize {
        self.solutions.iter().filter(|s| s.is_some()).count()
    }

    fn whnf(&self, t: &Ty) -> Ty {
        let mut t = t.clone();
        while let Ty::Meta(m, args) = &t {
            match &self.solutions[*m] {
                Some(body) => t = body.apply(args),
                None => break,
            }
        }
        t
    }

    fn zonk(&self, t: &Ty) -> Ty {
        match self.whnf(t) {
            Ty::And(a, b) => Ty::And(bx(self.zonk(&a)), bx(self.zonk(&b))),
            Ty::Or(a, b) => Ty::Or(bx(self.zonk(&a)), bx(self.zonk(&b))),
            Ty::Implies(a, b) => Ty::Implies(bx(self.zonk(&a)), bx(self.zonk(&b))),
            Ty::Forall(s, a) => Ty::Forall(s, bx(self.zonk(&a))),
            Ty::Exists(s, a) => Ty::Exists(s, bx(self.zonk(&a))),
            t => t,
        }
    }

    fn show(&self, t: &Ty) -> String {
        self.zonk(t).to_formula_lossy().to_string()
    }

    fn is_pattern(&self, args: &[Var]) -> bool {
        let mut seen = HashSet::new();
        args.iter().all(|a| match a {
            Var::Free(n) => self.locals.contains(n) && seen.insert(n.clone()),
            Var::Bound(_) => false,
        })
    }

    fn abstract_over(&self, t: &Ty, args: &[Var]) -> Result<Ty, Abstraction> {
        let n = args.len() as u32;
        t.try_map(0, &mut |d, v, in_meta| match v {
            Var::Bound(i) if *i < d => Ok(v.clone()),
            Var::Bound(_) => Err(Abstraction::Postpone),
            Var::Free(name) => {
                if let Some(k) = args.iter().position(|a| a.as_free() == Some(name)) {
                    Ok(Var::Bound(d + n - 1 - k as u32))
                } else if self.locals.contains(name) {
                    Err(if in_meta { Abstraction::Postpone } else { Abstraction::Escape })
                } else {
                    Ok(v.clone())
                }
            }
        })
    }

    fn solve_flex(&mut self, m: usize, args: &[Var], t: &Ty) -> R<()> {
        let t = self.zonk(t);
        if t == Ty::Meta(m, args.to_vec()) {
            return Ok(());
        }
        if !self.is_pattern(args) {
            self.postponed.push((Ty::Meta(m, args.to_vec()), t));
            return Ok(());
        }
        match self.abstract_over(&t, args) {
            Ok(body) => {
                let mut ms = HashSet::new();
                body.metas(&mut ms);
                if ms.contains(&m) {
                    return Err(TypeError::Cyclic);
                }
                self.solutions[m] = Some(body);
                Ok(())
            }
            Err(Abstraction::Escape) => Err(TypeError::Escape),
            Err(Abstraction::Postpone) => {
                self.postponed.push((Ty::Meta(m, args.to_vec()), t));
                Ok(())
            }
        }
    }

    /// Make `found` and `expected` equal.
    fn unify(&mut self, found: &Ty, expected: &Ty) -> R<()> {
        let a = self.whnf(found);
        let b = self.whnf(expected);
        match (&a, &b) {
            (Ty::Meta(m, xs), Ty::Meta(n, ys)) => {
                if m == n && xs == ys {
                    Ok(())
                } else if self.is_pattern(xs) {
                    self.solve_flex(*m, xs, &b)
                } else if self.is_pattern(ys) {
                    self.solve_flex(*n, ys, &a)
                } else {
                    self.postponed.push((a.clone(), b.clone()));
                    Ok(())
                }
            }
            (Ty::Meta(m, xs), _) => self.solve_flex(*m, xs, &b),
            (_, Ty::Meta(n, ys)) => self.solve_flex(*n, ys, &a),
            (Ty::Atom(p, xs), Ty::Atom(q, ys)) if p == q && xs == ys => Ok(()),
            (Ty::Id(s, x1, y1), Ty::Id(t, x2, y2)) if s == t && x1 == x2 && y1 == y2 => Ok(()),
            (Ty::And(a1, a2), Ty::And(b1, b2))
            | (Ty::Or(a1, a2), Ty::Or(b1, b2))
            | (Ty::Implies(a1, a2), Ty::Implies(b1, b2)) => {
                self.unify(a1, b1)?;
                self.unify(a2, b2)
            }
            (Ty::Forall(s, x), Ty::Forall(t, y)) | (Ty::Exists(s, x), Ty::Exists(t, y))
                if s == t =>
            {
                let z = self.fresh_local();
                self.unify(&x.open(&z), &y.open(&z))
            }
            _ => Err(TypeError::Formula {
                expected: self.show(&b),
                found: self.show(&a),
            }),
        }
    }

    /// Solve the postponed constraints; flex-flex pairs are left, since
    /// assigning every remaining metavariable one closed formula meets them.
    fn settle(&mut self) -> R<()> {
        loop {
            for _ in 0..1000 {
                let before = (self.postponed.len(), self.solved());
                let pending = std::mem::take(&mut self.postponed);
                for (a, b) in pending {
                    self.unify(&a, &b)?;
                }
                if (self.postponed.len(), self.solved()) == before {
                    break;
                }
            }
            let flex_rigid = self.postponed.iter().position(|(a, b)| {
                let (a, b) = (self.whnf(a), self.whnf(b));
                matches!(a, Ty::Meta(..)) != matches!(b, Ty::Meta(..))
            });
            let Some(i) = flex_rigid else {
                return Ok(());
            };
            let (a, b) = self.postponed.remove(i);
            let (a, b) = (self.whnf(&a), self.whnf(&b));
            let (flex, rigid) = if matches!(a, Ty::Meta(..)) { (a, b) } else { (b, a) };
            let Ty::Meta(m, args) = &flex else { unreachable!() };
            self.imitate(*m, args, &rigid)?;
            self.unify(&flex, &rigid)?;
        }
    }

    /// Assign `m` the head of `rigid`, choosing how each individual of a leaf
    /// is expressed: by name (if global) or through a matching argument.
    fn imitate(&mut self, m: usize, args: &[Var], rigid: &Ty) -> R<()> {
        let rigid = self.zonk(rigid);
        let mut ms = HashSet::new();
        rigid.metas(&mut ms);
        if ms.contains(&m) {
            return Err(TypeError::Cyclic);
        }
        let n = args.len();
        let fresh = |e: &mut Self, depth: u32, extra: bool| {
            let k = e.new_meta_with_arity(n + extra as usize);
            let mut a = params(n, depth);
            if extra {
                a.push(Var::Bound(0));
            }
            Ty::Meta(k, a)
        };
        let body = match &rigid {
            Ty::And(..) => Ty::And(bx(fresh(self, 0, false)), bx(fresh(self, 0, false))),
            Ty::Or(..) => Ty::Or(bx(fresh(self, 0, false)), bx(fresh(self, 0, false))),
            Ty::Implies(..) => Ty::Implies(bx(fresh(self, 0, false)), bx(fresh(self, 0, false))),
            Ty::Forall(s, _) => Ty::Forall(s.clone(), bx(fresh(self, 1, true))),
            Ty::Exists(s, _) => Ty::Exists(s.clone(), bx(fresh(self, 1, true))),
            Ty::Atom(p, vs) => {
                let vs = vs.iter().map(|v| self.express(v, args)).collect::<R<_>>()?;
                Ty::Atom(p.clone(), vs)
            }
            Ty::Id(s, x, y) => {
                let x = self.express(x, args)?;
                let y = self.express(y, args)?;
                Ty::Id(s.clone(), x, y)
            }
            Ty::Meta(..) => unreachable!("imitation of a flexible formula"),
        };
        self.solutions[m] = Some(body);
        Ok(())
    }

    fn express(&mut self, v: &Var, args: &[Var]) -> R<Var> {
        let n = args.len();
        let mut options = Vec::new();
        if let Var::Free(name) = v {
            if !self.locals.contains(name) {
                options.push(v.clone());
            }
        }
        for (k, a) in args.iter().enumerate() {
            if a == v {
                options.push(Var::Bound((n - 1 - k) as u32));
            }
        }
        if options.is_empty() {
            return Err(TypeError::Escape);
        }
        let c = self.choose(options.len())?;
        Ok(options.swap_remove(c))
    }

    /// Expose the head connective of `t`, refining a metavariable if needed.
    fn shape(&mut self, t: &Ty, shape: Shape) -> Option<Ty> {
        let t = self.whnf(t);
        if let Ty::Meta(m, args) = &t {
            let n = args.len();
            let mut fresh = |extra: bool| {
                let k = self.new_meta_with_arity(n + extra as usize);
                let mut a = params(n, extra as u32);
                if extra {
                    a.push(Var::Bound(0));
                }
                bx(Ty::Meta(k, a))
            };
            let body = match shape {
                Shape::And => Ty::And(fresh(false), fresh(false)),
                Shape::Or => Ty::Or(fresh(false), fresh(false)),
                Shape::Implies => Ty::Implies(fresh(false), fresh(false)),
                Shape::Forall(s) => Ty::Forall(s.clone(), fresh(true)),
                Shape::Exists(s) => Ty::Exists(s.clone(), fresh(true)),
            };
            self.solutions[*m] = Some(body);
            return Some(self.whnf(&t));
        }
        let fits = matches!(
            (&t, shape),
            (Ty::And(..), Shape::And)
                | (Ty::Or(..), Shape::Or)
                | (Ty::Implies(..), Shape::Implies)
                | (Ty::Forall(..), Shape::Forall(_))
                | (Ty::Exists(..), Shape::Exists(_))
        );
        fits.then_some(t)
    }

    // ---- checking ----

    fn constructor(&self, constructor: &'static str, t: &Ty) -> TypeError {
        TypeError::Constructor {
            constructor,
            formula: self.show(t),
        }
    }

    fn destructor(&self, destructor: &'static str, connective: &'static str, t: &Ty) -> TypeError {
        TypeError::Destructor {
            destructor,
            connective,
            formula: self.show(t),
        }
    }

    fn same_sort(&self, what: &str, found: &Sort, expected: &Sort) -> R<()> {
        if found == expected {
            Ok(())
        } else {
            Err(TypeError::Sort {
                what: what.to_string(),
                expected: expected.clone(),
                found: found.clone(),
            })
        }
    }

    fn synth(&mut self, t: &Term) -> R<Ty> {
        if let Term::Var(Var::Free(n)) = t {
            return self.proof_type(n);
        }
        let m = self.new_meta();
        self.check(t, &m)?;
        Ok(m)
    }

    fn check_under(&mut self, body: &Term, locals: Vec<Local>, values: impl FnOnce(&[Name]) -> Vec<Value>, exp: &Ty) -> R<()> {
        let k = locals.len();
        let names: Vec<Name> = locals.into_iter().map(|l| self.bind(l)).collect();
        let body = instantiate(body, &values(&names));
        let r = self.check(&body, exp);
        self.unbind(k);
        r
    }

    fn check(&mut self, t: &Term, exp: &Ty) -> R<()> {
        match t {
            Term::Var(Var::Free(n)) => {
                let found = self.proof_type(n)?;
                self.unify(&found, exp)
            }
            Term::Var(Var::Bound(_)) => Err(TypeError::IllScoped),
            Term::Pair(a, b) => match self.shape(exp, Shape::And) {
                Some(Ty::And(x, y)) => {
                    self.check(a, &x)?;
                    self.check(b, &y)
                }
                _ => Err(self.constructor("pair", exp)),
            },
            Term::Inl(a) => match self.shape(exp, Shape::Or) {
                Some(Ty::Or(x, _)) => self.check(a, &x),
                _ => Err(self.constructor("inl", exp)),
            },
            Term::Inr(a) => match self.shape(exp, Shape::Or) {
                Some(Ty::Or(_, y)) => self.check(a, &y),
                _ => Err(self.constructor("inr", exp)),
            },
            Term::Lam(b) => match self.shape(exp, Shape::Implies) {
                Some(Ty::Implies(x, y)) => self.check_under(
                    b,
                    vec![Local::Proof(*x)],
                    |n| vec![Value::Proof(Term::Var(Var::Free(n[0].clone())))],
                    &y,
                ),
                _ => Err(self.constructor("lam", exp)),
            },
            Term::BigLam(s, b) => match self.shape(exp, Shape::Forall(s)) {
                Some(Ty::Forall(s2, body)) => {
                    self.same_sort("the Lam binder", s, &s2)?;
                    let z = self.bind(Local::Individual(s.clone()));
                    let inner = instantiate(b, &[Value::Individual(Var::Free(z.clone()))]);
                    let r = self.check(&inner, &body.open(&z));
                    self.unbind(1);
                    r
                }
                _ => Err(self.constructor("Lam", exp)),
            },
            Term::Eps(i, p) => {
                let s = self.sort_of(i)?;
                match self.shape(exp, Shape::Exists(&s)) {
                    Some(Ty::Exists(s2, body)) => {
                        self.same_sort(&format!("the witness `{}`", show_var(i)), &s, &s2)?;
                        self.check(p, &body.open_with(i))
                    }
                    _ => Err(self.constructor("eps", exp)),
                }
            }
            Term::PathIntro(path, i, j) => {
                let si = self.sort_of(i)?;
                let sj = self.sort_of(j)?;
                self.same_sort(&format!("`{}`", show_var(j)), &sj, &si)?;
                self.connect(path, i, j)?;
                let formed = Ty::Id(si, i.clone(), j.clone());
                match self.whnf(exp) {
                    Ty::Meta(..) => self.unify(&formed, exp),
                    Ty::Id(..) => {
                        if self.whnf(exp) == formed {
                            Ok(())
                        } else {
                            Err(TypeError::Endpoints {
                                term: t.to_string(),
                                formula: self.show(exp),
                            })
                        }
                    }
                    _ => Err(self.constructor("path", exp)),
                }
            }
            Term::Fst(s) | Term::Snd(s) => {
                let st = self.synth(s)?;
                let name = if matches!(t, Term::Fst(_)) { "fst" } else { "snd" };
                match self.shape(&st, Shape::And) {
                    Some(Ty::And(x, y)) => {
                        let part = if name == "fst" { x } else { y };
                        self.unify(&part, exp)
                    }
                    _ => Err(self.destructor(name, "conjunction", &st)),
                }
            }
            Term::Case(s, f, g) => {
                let st = self.synth(s)?;
                match self.shape(&st, Shape::Or) {
                    Some(Ty::Or(x, y)) => {
                        let var = |n: &[Name]| vec![Value::Proof(Term::Var(Var::Free(n[0].clone())))];
                        self.check_under(f, vec![Local::Proof(*x)], var, exp)?;
                        self.check_under(g, vec![Local::Proof(*y)], var, exp)
                    }
                    _ => Err(self.destructor("case", "disjunction", &st)),
                }
            }
            Term::App(f, a) => {
                let ft = self.synth(f)?;
                match self.shape(&ft, Shape::Implies) {
                    Some(Ty::Implies(x, y)) => {
                        self.unify(&y, exp)?;
                        self.check(a, &x)
                    }
                    _ => Err(self.destructor("app", "implication", &ft)),
                }
            }
            Term::Extr(f, i) => {
                let s = self.sort_of(i)?;
                let ft = self.synth(f)?;
                match self.shape(&ft, Shape::Forall(&s)) {
                    Some(Ty::Forall(s2, body)) => {
                        self.same_sort(&format!("`{}`", show_var(i)), &s, &s2)?;
                        self.unify(&body.open_with(i), exp)
                    }
                    _ => Err(self.destructor("extr", "universal", &ft)),
                }
            }
            Term::Inst(e, d) => {
                let et = self.synth(e)?;
                let shaped = match self.whnf(&et) {
                    Ty::Meta(..) => {
                        let sorts = self.ctx.signature().sorts().to_vec();
                        let k = self.choose(sorts.len())?;
                        self.shape(&et, Shape::Exists(&sorts[k]))
                    }
                    Ty::Exists(..) => Some(self.whnf(&et)),
                    _ => None,
                };
                match shaped {
                    Some(Ty::Exists(s, body)) => {
                        let w = self.bind(Local::Individual(s));
                        let g = self.bind(Local::Proof(body.open(&w)));
                        let inner = instantiate(
                            d,
                            &[
                                Value::Proof(Term::Var(Var::Free(g))),
                                Value::Individual(Var::Free(w)),
                            ],
                        );
                        let r = self.check(&inner, exp);
                        self.unbind(2);
                        r
                    }
                    _ => Err(self.destructor("inst", "existential", &et)),
                }
            }
            Term::Rewr(e, d) => {
                let et = self.synth(e)?;
                if let Ty::Meta(m, args) = self.whnf(&et) {
                    let sorts = self.ctx.signature().sorts().to_vec();
                    let s = sorts[self.choose(sorts.len())?].clone();
                    let mut cands = self.individual_candidates(&s, &args);
                    let a = cands[self.choose(cands.len())?].clone();
                    let b = cands.swap_remove(self.choose(cands.len())?);
                    self.solutions[m] = Some(Ty::Id(s, a, b));
                }
                match self.whnf(&et) {
                    Ty::Id(s, a, b) => self.check_under(
                        d,
                        vec![Local::Path(s, a, b)],
                        |n| vec![Value::Path(Path::Var(Var::Free(n[0].clone())))],
                        exp,
                    ),
                    _ => Err(self.destructor("rewr", "identity", &et)),
                }
            }
        }
    }

    /// Replay a path on individuals: each atom is a path hypothesis used
    /// forwards or backwards.
    fn connect(&self, path: &Path, from: &Var, to: &Var) -> R<()> {
        let mut cur = from.clone();
        for (atom, inverted) in path.atoms() {
            match atom {
                PathAtom::Step(s) => {
                    return Err(TypeError::Path(format!(
                        "the step {} rewrites proofs, not the individual `{}`",
                        s.rule,
                        show_var(&cur)
                    )))
                }
                PathAtom::Var(v) => {
                    let (_, l, r) = self.path_equation(&v)?;
                    let (src, dst) = if inverted { (r, l) } else { (l, r) };
                    if cur != src {
                        return Err(TypeError::Path(format!(
                            "`{}` starts at `{}`, not at `{}`",
                            Path::Var(v.clone()),
                            show_var(&src),
                            show_var(&cur)
                        )));
                    }
                    cur = dst;
                }
            }
        }
        if &cur != to {
            return Err(TypeError::Path(format!(
                "`{path}` leads from `{}` to `{}`, not to `{}`",
                show_var(from),
                show_var(&cur),
                show_var(to)
            )));
        }
        Ok(())
    }
}

fn show_var(v: &Var) -> String {
    match v {
        Var::Free(n) => n.to_string(),
        Var::Bound(i) => format!("#{i}"),
    }
}

/// Depth-first search over the elaborator's choice points.
fn search<T>(ctx: &Context, mut run: impl FnMut(&mut Elab) -> R<T>) -> R<T> {
    let mut script = Vec::new();
    let mut first_error = None;
    for _ in 0..SEARCH_LIMIT {
        let mut e = Elab::new(ctx, script);
        match run(&mut e) {
            Ok(v) => return Ok(v),
            Err(err) => {
                let first = first_error.get_or_insert(err);
                let Some(i) = e.made.iter().rposition(|&(c, n)| c + 1 < n) else {
                    return Err(first.clone());
                };
                script = e.made[..i].iter().map(|&(c, _)| c).collect();
                script.push(e.made[i].0 + 1);
            }
        }
    }
    Err(TypeError::SearchLimit)
}

/// Check `ctx ⊢ term : formula`.
pub fn check(ctx: &Context, term: &Term, formula: &Formula) -> Result<(), TypeError> {
    ctx.check_formula(formula)?;
    let goal = Ty::from_formula(formula);
    search(ctx, |e| {
        e.check(term, &goal)?;
        e.settle()
    })
}

/// Synthesize the formula of a variable or destructor-headed term.
pub fn infer(ctx: &Context, term: &Term) -> Result<Formula, TypeError> {
    if term.is_canonical() {
        return Err(TypeError::CannotSynthesize);
    }
    search(ctx, |e| {
        let t = e.synth(term)?;
        e.settle()?;
        e.zonk(&t).to_formula().ok_or(TypeError::Underdetermined)
    })
}

/// Whether `term` proves some formula in `ctx`.
pub fn typable(ctx: &Context, term: &Term) -> Result<(), TypeError> {
    search(ctx, |e| {
        let m = e.new_meta();
        e.check(term, &m)?;
        e.settle()
    })
}

/// `lhs =_path rhs`: for individuals the path is made of path hypotheses;
/// for proofs it is replayed as a sequence of recorded β-steps.
pub fn check_equality(ctx: &Context, lhs: &Value, rhs: &Value, path: &Path) -> Result<(), TypeError> {
    match (lhs, rhs) {
        (Value::Individual(a), Value::Individual(b)) => {
            let e = Elab::new(ctx, Vec::new());
            let sa = e.sort_of(a)?;
            let sb = e.sort_of(b)?;
            e.same_sort(&format!("`{}`", show_var(b)), &sb, &sa)?;
            e.connect(path, a, b)
        }
        (Value::Proof(a), Value::Proof(b)) => {
            crate::reduce::check_replay(path, a, b).map_err(|e| TypeError::Equality(e.to_string()))
        }
        (Value::Path(_), _) | (_, Value::Path(_)) => {
            Err(TypeError::Equality("paths have no equality judgement here".into()))
        }
        _ => Err(TypeError::Equality("endpoints are of different kinds".into())),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::syntax::{parse_formula, parse_judgement, parse_proofterm, parse_signature};

    const SIG: &str = "sort D\npred A/0\npred B/0\npred C/0\npred P/1 : D\npred E/2 : D D\nconst c : D\nconst d : D\n";

    fn judge(text: &str) -> Result<(), TypeError> {
        let sig = Arc::new(parse_signature(SIG).unwrap());
        let j = parse_judgement(sig, text).unwrap();
        check(&j.context, &j.term, &j.formula)
    }

    fn ctx(lines: &str) -> Context {
        let sig = Arc::new(parse_signature(SIG).unwrap());
        parse_judgement(sig, &format!("{lines}\n|- x : A")).unwrap().context
    }

    #[test]
    fn introductions() {
        assert_eq!(judge("a : A\nb : B\n|- pair(a,b) : A & B"), Ok(()));
        assert_eq!(judge("x : A\n|- x : A"), Ok(()));
        assert_eq!(judge("|- lam(x. x) : A -> A"), Ok(()));
        assert_eq!(judge("a : A\n|- inr(a) : B | A"), Ok(()));
        assert_eq!(judge("f : forall x:D. P(x)\n|- Lam(y:D. extr(f, y)) : forall x:D. P(x)"), Ok(()));
        assert_eq!(judge("p : P(c)\n|- eps(c, p) : exists x:D. P(x)"), Ok(()));
        assert_eq!(judge("|- path(rho, c, c) : Id(D, c, c)"), Ok(()));
    }

    #[test]
    fn eliminations_and_redexes() {
        assert_eq!(judge("a : A\nb : B\n|- fst(pair(a,b)) : A"), Ok(()));
        assert_eq!(judge("a : A\nb : B\n|- snd(pair(a,b)) : B"), Ok(()));
        assert_eq!(
            judge("a : A\nf : A -> C\ng : B -> C\n|- case(inl(a), x => app(f,x), y => app(g,y)) : C"),
            Ok(())
        );
        assert_eq!(judge("a : A\n|- app(lam(x. pair(x,x)), a) : A & A"), Ok(()));
        assert_eq!(judge("f : forall x:D. P(x)\n|- extr(Lam(x:D. extr(f,x)), c) : P(c)"), Ok(()));
        assert_eq!(
            judge("f : P(c)\nh : forall x:D. P(x) -> A\n|- inst(eps(c,f), t g => app(extr(h,t),g)) : A"),
            Ok(())
        );
        assert_eq!(
            judge("r : c = d : D\n|- rewr(path(r,c,d), t => path(sym(t),d,c)) : Id(D,d,c)"),
            Ok(())
        );
        assert_eq!(judge("a : A\nb : B\n|- fst(snd(pair(b, pair(a, b)))) : A"), Ok(()));
    }

    #[test]
    fn errors_are_specific() {
        let e = judge("a : A\n|- fst(a) : A").unwrap_err();
        assert!(e.to_string().starts_with("destructor on non-conjunction"), "{e}");
        let e = judge("a : A\nb : B\n|- pair(a,b) : A | B").unwrap_err();
        assert!(e.to_string().starts_with("constructor/formula mismatch"), "{e}");
        assert_eq!(judge("|- y : A"), Err(TypeError::Unbound(Name::new("y"))));
        let e = judge("|- path(rho, c, d) : Id(D, c, d)").unwrap_err();
        assert!(matches!(e, TypeError::Path(_)), "{e}");
        let e = judge("|- path(rho, c, c) : Id(D, d, d)").unwrap_err();
        assert!(matches!(e, TypeError::Endpoints { .. }), "{e}");
        let e = judge("a : A\n|- app(lam(x. x), a) : B").unwrap_err();
        assert!(matches!(e, TypeError::Formula { .. }), "{e}");
    }

    #[test]
    fn motives_may_not_depend_on_branch_variables() {
        // the motive would have to mention the witness t
        let e = judge("e : exists x:D. P(x)\n|- inst(e, t g => g) : P(c)").unwrap_err();
        assert!(matches!(e, TypeError::Formula { .. } | TypeError::Escape), "{e}");
        assert!(typable(&ctx("e : exists x:D. P(x)"), &parse_proofterm("inst(e, t g => g)").unwrap()).is_err());
    }

    #[test]
    fn inference() {
        let cx = ctx("p : A & B\nx : A");
        let f = |t: &str| infer(&cx, &parse_proofterm(t).unwrap());
        assert_eq!(f("fst(p)"), Ok(parse_formula("A").unwrap()));
        assert_eq!(f("x"), Ok(parse_formula("A").unwrap()));
        assert_eq!(f("pair(x,x)"), Err(TypeError::CannotSynthesize));
        assert_eq!(f("snd(pair(x, p))"), Ok(parse_formula("A & B").unwrap()));
    }

    #[test]
    fn closed_terms_are_typable_without_annotations() {
        let cx = ctx("");
        for t in [
            "lam(x. x)",
            "app(lam(x. x), lam(y. y))",
            "fst(pair(lam(x. x), lam(x. lam(y. x))))",
            "case(inl(lam(x. x)), u => u, v => lam(z. z))",
            "Lam(x:D. path(rho, x, x))",
            "extr(Lam(x:D. path(rho, x, x)), c)",
            "inst(eps(c, path(rho, c, c)), t g => g)",
            "rewr(path(rho, c, c), t => path(sym(t), c, c))",
        ] {
            assert_eq!(typable(&cx, &parse_proofterm(t).unwrap()), Ok(()), "{t}");
        }
        assert!(typable(&cx, &parse_proofterm("app(lam(x. app(x, x)), lam(x. app(x, x)))").unwrap()).is_err());
        assert!(typable(&cx, &parse_proofterm("fst(lam(x. x))").unwrap()).is_err());
    }

    #[test]
    fn witness_abstraction_is_searched() {
        // extr of an unannotated Lam at a constant: the body's formula P(c)
        // must be read as P(x) for the second conjunct to fit.
        let cx = ctx("f : forall x:D. P(x)");
        let t = parse_proofterm("pair(extr(Lam(x:D. extr(f, x)), c), extr(Lam(x:D. extr(f, x)), d))").unwrap();
        assert_eq!(check(&cx, &t, &parse_formula("P(c) & P(d)").unwrap()), Ok(()));
        let t = parse_proofterm("eps(c, extr(f, c))").unwrap();
        assert_eq!(check(&cx, &t, &parse_formula("exists y:D. P(y)").unwrap()), Ok(()));
    }

    #[test]
    fn equality_judgements() {
        let cx = ctx("r : c = d : D");
        let ind = |s: &str| Value::Individual(Var::free(s));
        let path = |s: &str| crate::syntax::parse_path(s).unwrap();
        assert_eq!(check_equality(&cx, &ind("c"), &ind("c"), &Path::Refl), Ok(()));
        assert!(check_equality(&cx, &ind("c"), &ind("d"), &Path::Refl).is_err());
        assert_eq!(check_equality(&cx, &ind("c"), &ind("d"), &path("r")), Ok(()));
        assert_eq!(check_equality(&cx, &ind("d"), &ind("c"), &path("sym(r)")), Ok(()));
        assert_eq!(check_equality(&cx, &ind("c"), &ind("c"), &path("tr(r, sym(r))")), Ok(()));
    }
}
