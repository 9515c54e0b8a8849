//! Seeded generator of well-typed judgements.
//!
//! Terms are grown top-down from a goal formula, as derivation trees, so
//! every output checks by construction. Detours (an introduction immediately
//! consumed by the matching elimination) are inserted often, which makes the
//! output useful for reduction tests.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{
    close_formula, parse_judgement, parse_signature, Context, Formula, Name, Path, Signature,
    Sort, Term, Var,
};

/// The fixed signature used by every generator.
pub const SIGNATURE: &str = "\
sort D
pred A/0
pred B/0
pred P/1 : D
pred E/2 : D D
const c : D
const d : D
";

/// The fixed context: a proof of every atom shape is reachable from it.
pub const CONTEXT: &str = "\
a : A
b : B
q : forall x:D. P(x)
e : forall x:D. forall y:D. E(x, y)
r : c = d : D
s : A & B
o : A | B
f : A -> B
w : exists x:D. E(x, c)
";

pub fn signature() -> Arc<Signature> {
    Arc::new(parse_signature(SIGNATURE).expect("fixed signature parses"))
}

pub fn context() -> Context {
    let text = format!("{CONTEXT}|- a : A\n");
    parse_judgement(signature(), &text).expect("fixed context parses").context
}

/// A generated closed judgement over [`context`].
#[derive(Clone, Debug)]
pub struct Generated {
    pub term: Term,
    pub formula: Formula,
}

#[derive(Clone)]
enum Local {
    Proof(Formula),
    Individual,
    Path(Var, Var),
}

pub struct Generator {
    rng: ChaCha8Rng,
    scope: Vec<(Name, Local)>,
    fresh: usize,
    /// Probability of wrapping a goal in a detour.
    pub detour: f64,
}

fn d() -> Sort {
    Sort::new("D")
}

fn atom(p: &str, args: Vec<Var>) -> Formula {
    Formula::Atom(Name::new(p), args)
}

fn hyp(name: &str) -> Term {
    Term::var(name)
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            scope: Vec::new(),
            fresh: 0,
            detour: 0.5,
        }
    }

    fn name(&mut self) -> Name {
        self.fresh += 1;
        Name::from(format!("%g{}", self.fresh))
    }

    fn push(&mut self, local: Local) -> Name {
        let n = self.name();
        self.scope.push((n.clone(), local));
        n
    }

    fn pop(&mut self) {
        self.scope.pop();
    }

    /// A reference to an in-scope name: locals become indices.
    fn reference(&self, n: &Name) -> Var {
        match self.scope.iter().rposition(|(m, _)| m == n) {
            Some(i) => Var::Bound((self.scope.len() - 1 - i) as u32),
            None => Var::Free(n.clone()),
        }
    }

    fn individuals(&self) -> Vec<Var> {
        let mut v = vec![Var::free("c"), Var::free("d")];
        for (n, l) in &self.scope {
            if matches!(l, Local::Individual) {
                v.push(Var::Free(n.clone()));
            }
        }
        v
    }

    fn pick<T: Clone>(&mut self, xs: &[T]) -> T {
        xs.choose(&mut self.rng).expect("nonempty").clone()
    }

    /// An atom whose proof is always within reach.
    fn random_atom(&mut self, inds: &[Var]) -> Formula {
        match self.rng.gen_range(0..6) {
            0 => atom("A", vec![]),
            1 => atom("B", vec![]),
            2 => atom("P", vec![self.pick(inds)]),
            3 => atom("E", vec![self.pick(inds), self.pick(inds)]),
            4 => {
                let i = self.pick(inds);
                Formula::Id(d(), i.clone(), i)
            }
            _ => {
                if self.rng.gen() {
                    Formula::Id(d(), Var::free("c"), Var::free("d"))
                } else {
                    Formula::Id(d(), Var::free("d"), Var::free("c"))
                }
            }
        }
    }

    /// A formula over the given individuals; quantifier bodies may also use
    /// their own bound variable.
    pub fn formula_over(&mut self, depth: usize, inds: &[Var]) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return self.random_atom(inds);
        }
        let sub = |g: &mut Self, inds: &[Var]| g.formula_over(depth - 1, inds);
        match self.rng.gen_range(0..5) {
            0 => Formula::and(sub(self, inds), sub(self, inds)),
            1 => Formula::or(sub(self, inds), sub(self, inds)),
            2 => Formula::implies(sub(self, inds), sub(self, inds)),
            k => {
                let x = self.name();
                let mut more = inds.to_vec();
                more.push(Var::Free(x.clone()));
                let body = close_formula(&sub(self, &more), &x);
                if k == 3 {
                    Formula::Forall(d(), Box::new(body))
                } else {
                    Formula::Exists(d(), Box::new(body))
                }
            }
        }
    }

    pub fn formula(&mut self, depth: usize) -> Formula {
        let inds = self.individuals();
        self.formula_over(depth, &inds)
    }

    fn split(&mut self, budget: usize, parts: usize) -> Vec<usize> {
        let mut out = vec![0; parts];
        for _ in 0..budget {
            let i = self.rng.gen_range(0..parts);
            out[i] += 1;
        }
        out
    }

    fn local_proofs(&self, goal: &Formula) -> Vec<Name> {
        self.scope
            .iter()
            .filter(|(_, l)| matches!(l, Local::Proof(f) if f == goal))
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Path expressions witnessing `i = j`, or none.
    fn paths_between(&self, i: &Var, j: &Var) -> Vec<Path> {
        let mut out = Vec::new();
        if i == j {
            out.push(Path::Refl);
        }
        let c = Var::free("c");
        let dd = Var::free("d");
        let mut eqs: Vec<(Var, Var, Var)> = vec![(Var::free("r"), c, dd)];
        for (n, l) in &self.scope {
            if let Local::Path(x, y) = l {
                eqs.push((self.reference(n), x.clone(), y.clone()));
            }
        }
        for (p, x, y) in eqs {
            if &x == i && &y == j {
                out.push(Path::Var(p.clone()));
            }
            if &y == i && &x == j {
                out.push(Path::sym(Path::Var(p.clone())));
            }
            if i == j && &x == i {
                out.push(Path::trans(Path::Var(p.clone()), Path::sym(Path::Var(p.clone()))));
            }
            if i == j && &y == i {
                out.push(Path::trans(Path::sym(Path::Var(p.clone())), Path::Var(p)));
            }
        }
        out
    }

    fn ind_term(&self, v: &Var) -> Var {
        match v {
            Var::Free(n) => self.reference(n),
            b => b.clone(),
        }
    }

    /// The direct proof of an atom from the context.
    fn atomic(&mut self, goal: &Formula) -> Term {
        let locals = self.local_proofs(goal);
        if !locals.is_empty() && self.rng.gen_bool(0.6) {
            let n = self.pick(&locals);
            return Term::Var(self.reference(&n));
        }
        match goal {
            Formula::Atom(p, args) => match (p.as_str(), args.as_slice()) {
                ("A", []) => {
                    if self.rng.gen_bool(0.7) {
                        hyp("a")
                    } else {
                        Term::fst(hyp("s"))
                    }
                }
                ("B", []) => match self.rng.gen_range(0..3) {
                    0 => hyp("b"),
                    1 => Term::snd(hyp("s")),
                    _ => Term::app(hyp("f"), hyp("a")),
                },
                ("P", [x]) => Term::Extr(Box::new(hyp("q")), self.ind_term(x)),
                ("E", [x, y]) => Term::Extr(
                    Box::new(Term::Extr(Box::new(hyp("e")), self.ind_term(x))),
                    self.ind_term(y),
                ),
                _ => unreachable!("generated atom {goal}"),
            },
            Formula::Id(_, i, j) => {
                let paths = self.paths_between(i, j);
                let p = self.pick(&paths);
                Term::PathIntro(p, self.ind_term(i), self.ind_term(j))
            }
            _ => unreachable!(),
        }
    }

    /// An introduction for a compound goal, or the direct proof of an atom.
    fn intro(&mut self, goal: &Formula, budget: usize) -> Term {
        match goal {
            Formula::And(a, b) => {
                let s = self.split(budget, 2);
                Term::pair(self.proof(a, s[0]), self.proof(b, s[1]))
            }
            Formula::Or(a, b) => {
                if self.rng.gen() {
                    Term::inl(self.proof(a, budget))
                } else {
                    Term::inr(self.proof(b, budget))
                }
            }
            Formula::Implies(a, b) => {
                self.push(Local::Proof((**a).clone()));
                let body = self.proof(b, budget);
                self.pop();
                Term::Lam(Box::new(body))
            }
            Formula::Forall(s, body) => {
                let x = self.push(Local::Individual);
                let p = self.proof(&body.open(&Var::Free(x)), budget);
                self.pop();
                Term::BigLam(s.clone(), Box::new(p))
            }
            Formula::Exists(_, body) => {
                let inds = self.individuals();
                let wit = self.pick(&inds);
                let p = self.proof(&body.open(&wit), budget);
                Term::Eps(self.ind_term(&wit), Box::new(p))
            }
            _ => self.atomic(goal),
        }
    }

    /// Whether every identity atom in `f` is provable wherever `f` is used.
    fn ids_closed(f: &Formula) -> bool {
        match f {
            Formula::Id(_, i, j) => {
                i == j || matches!((i, j), (Var::Free(_), Var::Free(_)))
            }
            Formula::Atom(..) | Formula::NegAtom(..) => true,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                Self::ids_closed(a) && Self::ids_closed(b)
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => Self::ids_closed(b),
        }
    }

    /// A formula with one bound individual such that opening it at `wit`
    /// gives `goal` back; falls back to the constant family.
    fn motive_for(&mut self, goal: &Formula, wit: &Var) -> Formula {
        let vacuous = goal.clone();
        if let Var::Free(n) = wit {
            let f = close_formula(goal, n);
            if f != vacuous && Self::ids_closed(&f) && self.rng.gen_bool(0.7) {
                return f;
            }
        }
        vacuous
    }

    fn side(&mut self) -> Formula {
        let depth = self.rng.gen_range(0..3);
        self.formula(depth)
    }

    fn detour(&mut self, goal: &Formula, budget: usize) -> Term {
        let budget = budget.saturating_sub(1);
        match self.rng.gen_range(0..8) {
            0 => {
                let side = self.side();
                let s = self.split(budget, 2);
                let t = Term::pair(self.proof(goal, s[0]), self.proof(&side, s[1]));
                Term::fst(t)
            }
            1 => {
                let side = self.side();
                let s = self.split(budget, 2);
                let t = Term::pair(self.proof(&side, s[0]), self.proof(goal, s[1]));
                Term::snd(t)
            }
            2 => {
                let (l, r) = (self.side(), self.side());
                let s = self.split(budget, 3);
                let scrutinee = if self.rng.gen() {
                    Term::inl(self.proof(&l, s[0]))
                } else {
                    Term::inr(self.proof(&r, s[0]))
                };
                self.push(Local::Proof(l));
                let x = self.proof(goal, s[1]);
                self.pop();
                self.push(Local::Proof(r));
                let y = self.proof(goal, s[2]);
                self.pop();
                Term::Case(Box::new(scrutinee), Box::new(x), Box::new(y))
            }
            3 => {
                let side = self.side();
                let s = self.split(budget, 2);
                self.push(Local::Proof(side.clone()));
                let body = self.proof(goal, s[0]);
                self.pop();
                Term::app(Term::Lam(Box::new(body)), self.proof(&side, s[1]))
            }
            4 => {
                let inds = self.individuals();
                let wit = self.pick(&inds);
                let motive = self.motive_for(goal, &wit);
                let x = self.push(Local::Individual);
                let body = self.proof(&motive.open(&Var::Free(x)), budget);
                self.pop();
                Term::Extr(Box::new(Term::BigLam(d(), Box::new(body))), self.ind_term(&wit))
            }
            5 => {
                let inds = self.individuals();
                let wit = self.pick(&inds);
                let depth = self.rng.gen_range(0..2);
                let x = self.name();
                let mut more = inds.clone();
                more.push(Var::Free(x.clone()));
                let family = close_formula(&self.formula_over(depth, &more), &x);
                let s = self.split(budget, 2);
                let proof = self.proof(&family.open(&wit), s[0]);
                let scrutinee = Term::Eps(self.ind_term(&wit), Box::new(proof));
                let t = self.push(Local::Individual);
                self.push(Local::Proof(family.open(&Var::Free(t))));
                let branch = self.proof(goal, s[1]);
                self.pop();
                self.pop();
                Term::Inst(Box::new(scrutinee), Box::new(branch))
            }
            6 => {
                let inds = self.individuals();
                let (i, j) = if self.rng.gen() {
                    let i = self.pick(&inds);
                    (i.clone(), i)
                } else if self.rng.gen() {
                    (Var::free("c"), Var::free("d"))
                } else {
                    (Var::free("d"), Var::free("c"))
                };
                let paths = self.paths_between(&i, &j);
                let p = self.pick(&paths);
                let scrutinee = Term::PathIntro(p, self.ind_term(&i), self.ind_term(&j));
                self.push(Local::Path(i, j));
                let branch = self.proof(goal, budget);
                self.pop();
                Term::Rewr(Box::new(scrutinee), Box::new(branch))
            }
            _ => self.neutral(goal, budget),
        }
    }

    /// Eliminations of context hypotheses that are not redexes.
    fn neutral(&mut self, goal: &Formula, budget: usize) -> Term {
        let s = self.split(budget, 2);
        if self.rng.gen() {
            self.push(Local::Proof(atom("A", vec![])));
            let x = self.proof(goal, s[0]);
            self.pop();
            self.push(Local::Proof(atom("B", vec![])));
            let y = self.proof(goal, s[1]);
            self.pop();
            Term::Case(Box::new(hyp("o")), Box::new(x), Box::new(y))
        } else {
            let t = self.push(Local::Individual);
            self.push(Local::Proof(atom("E", vec![Var::Free(t), Var::free("c")])));
            let branch = self.proof(goal, budget);
            self.pop();
            self.pop();
            Term::Inst(Box::new(hyp("w")), Box::new(branch))
        }
    }

    /// A proof of `goal` in the current scope, of roughly `budget` nodes
    /// beyond the minimum.
    pub fn proof(&mut self, goal: &Formula, budget: usize) -> Term {
        if budget > 0 && self.rng.gen_bool(self.detour) {
            self.detour(goal, budget)
        } else {
            self.intro(goal, budget.saturating_sub(1))
        }
    }

    /// A closed judgement whose term has at most `max_size` nodes.
    pub fn judgement(&mut self, max_size: usize) -> Generated {
        loop {
            let depth = self.rng.gen_range(0..4);
            let formula = self.formula(depth);
            let budget = self.rng.gen_range(max_size / 4..=max_size / 2);
            let term = self.proof(&formula, budget);
            debug_assert!(self.scope.is_empty());
            if term.size() <= max_size {
                return Generated { term, formula };
            }
        }
    }

    /// As [`judgement`](Self::judgement), with a canonical head.
    pub fn canonical(&mut self, max_size: usize) -> Generated {
        loop {
            let g = self.judgement(max_size);
            if g.term.is_canonical() && !g.formula.is_literal() {
                return g;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typecheck::check;

    #[test]
    fn generated_judgements_check() {
        let ctx = context();
        let mut g = Generator::new(7);
        for _ in 0..300 {
            let j = g.judgement(30);
            if let Err(e) = check(&ctx, &j.term, &j.formula) {
                panic!("{} : {} rejected: {e}", j.term, j.formula);
            }
        }
    }

    #[test]
    fn generation_is_reproducible() {
        let a: Vec<_> = (0..20).map(|_| ()).scan(Generator::new(3), |g, _| Some(g.judgement(20).term)).collect();
        let b: Vec<_> = (0..20).map(|_| ()).scan(Generator::new(3), |g, _| Some(g.judgement(20).term)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn detours_are_frequent() {
        let mut g = Generator::new(11);
        let with_redex = (0..200)
            .filter(|_| !crate::reduce::is_normal(&g.judgement(25).term))
            .count();
        assert!(with_redex > 100, "{with_redex}");
    }
}
