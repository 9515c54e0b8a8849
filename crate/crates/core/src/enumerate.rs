//! Exhaustive enumeration of closed, typable propositional proof terms.
//!
//! Over a signature with two propositional atoms and no sorts, every typable
//! closed term built from pairs, injections, case, abstraction and
//! application has a principal formula with formula variables, found by
//! first-order unification. The enumerator builds terms top-down and unifies
//! as it goes, so ill-typed prefixes are cut off early. Each term is produced
//! once, together with its principal formula with all variables set to `A`.

use std::sync::Arc;

use crate::syntax::{parse_signature, Context, Formula, Name, Signature, Term, Var};

/// The signature the enumeration is over.
pub const SIGNATURE: &str = "pred A/0\npred B/0\n";

pub fn signature() -> Arc<Signature> {
    Arc::new(parse_signature(SIGNATURE).expect("fixed signature parses"))
}

pub fn context() -> Context {
    Context::new(signature())
}

#[derive(Clone, Copy, Debug)]
enum Node {
    Var,
    And(usize, usize),
    Or(usize, usize),
    Imp(usize, usize),
}

/// Formula variables and constructors in a union-find store with an undo
/// trail.
struct Store {
    nodes: Vec<Node>,
    parent: Vec<usize>,
    trail: Vec<usize>,
}

impl Store {
    fn new() -> Self {
        Store {
            nodes: Vec::new(),
            parent: Vec::new(),
            trail: Vec::new(),
        }
    }

    fn add(&mut self, n: Node) -> usize {
        self.nodes.push(n);
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    fn var(&mut self) -> usize {
        self.add(Node::Var)
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn occurs(&self, v: usize, t: usize) -> bool {
        let t = self.find(t);
        if t == v {
            return true;
        }
        match self.nodes[t] {
            Node::Var => false,
            Node::And(a, b) | Node::Or(a, b) | Node::Imp(a, b) => self.occurs(v, a) || self.occurs(v, b),
        }
    }

    fn link(&mut self, from: usize, to: usize) {
        self.parent[from] = to;
        self.trail.push(from);
    }

    fn unify(&mut self, x: usize, y: usize) -> bool {
        let (x, y) = (self.find(x), self.find(y));
        if x == y {
            return true;
        }
        match (self.nodes[x], self.nodes[y]) {
            (Node::Var, _) => !self.occurs(x, y) && {
                self.link(x, y);
                true
            },
            (_, Node::Var) => !self.occurs(y, x) && {
                self.link(y, x);
                true
            },
            (Node::And(a, b), Node::And(c, d))
            | (Node::Or(a, b), Node::Or(c, d))
            | (Node::Imp(a, b), Node::Imp(c, d)) => {
                self.unify(a, c) && self.unify(b, d) && {
                    let (x, y) = (self.find(x), self.find(y));
                    if x != y {
                        self.link(x, y);
                    }
                    true
                }
            }
            _ => false,
        }
    }

    fn mark(&self) -> (usize, usize) {
        (self.nodes.len(), self.trail.len())
    }

    fn undo(&mut self, (nodes, trail): (usize, usize)) {
        while self.trail.len() > trail {
            let x = self.trail.pop().unwrap();
            self.parent[x] = x;
        }
        self.nodes.truncate(nodes);
        self.parent.truncate(nodes);
    }

    fn formula(&self, t: usize, atom: &Name) -> Formula {
        let t = self.find(t);
        let go = |x| self.formula(x, atom);
        match self.nodes[t] {
            Node::Var => Formula::Atom(atom.clone(), vec![]),
            Node::And(a, b) => Formula::and(go(a), go(b)),
            Node::Or(a, b) => Formula::or(go(a), go(b)),
            Node::Imp(a, b) => Formula::implies(go(a), go(b)),
        }
    }
}

type Emit<'a> = dyn FnMut(&mut Enumerator, Term) + 'a;

struct Enumerator {
    store: Store,
    scope: Vec<usize>,
    /// Nodes of the partial term placed so far, in preorder.
    placed: usize,
    /// Partial terms that reached `split` nodes so far.
    prefixes: usize,
    split: usize,
    part: usize,
    parts: usize,
}

impl Enumerator {
    /// Place one node and, once the prefix is `split` nodes long, keep only
    /// the prefixes that belong to this part.
    fn place(&mut self, body: impl FnOnce(&mut Self)) {
        self.placed += 1;
        let mine = self.placed != self.split || {
            self.prefixes += 1;
            (self.prefixes - 1) % self.parts == self.part
        };
        if mine {
            body(self);
        }
        self.placed -= 1;
    }

    /// Every typable term of exactly `size` nodes at formula `ty`.
    fn gen(&mut self, size: usize, ty: usize, k: &mut Emit) {
        if size == 0 {
            return;
        }
        if size == 1 {
            for i in 0..self.scope.len() {
                let m = self.store.mark();
                if self.store.unify(ty, self.scope[self.scope.len() - 1 - i]) {
                    self.place(|e| k(e, Term::Var(Var::Bound(i as u32))));
                }
                self.store.undo(m);
            }
            return;
        }
        let inner = size - 1;
        let m = self.store.mark();
        let (a, b) = (self.store.var(), self.store.var());
        // pair
        let and = self.store.add(Node::And(a, b));
        if self.store.unify(ty, and) {
            for left in 1..inner {
                self.place(|e| {
                    e.gen(left, a, &mut |e, l| {
                        e.gen(inner - left, b, &mut |e, r| k(e, Term::pair(l.clone(), r)))
                    })
                });
            }
        }
        self.store.undo(m);
        // fst, snd
        for first in [true, false] {
            let m = self.store.mark();
            let other = self.store.var();
            let and = if first {
                self.store.add(Node::And(ty, other))
            } else {
                self.store.add(Node::And(other, ty))
            };
            self.place(|e| e.gen(inner, and, &mut |e, s| k(e, if first { Term::fst(s) } else { Term::snd(s) })));
            self.store.undo(m);
        }
        // inl, inr
        for left in [true, false] {
            let m = self.store.mark();
            let (a, b) = (self.store.var(), self.store.var());
            let or = self.store.add(Node::Or(a, b));
            if self.store.unify(ty, or) {
                let side = if left { a } else { b };
                self.place(|e| e.gen(inner, side, &mut |e, t| k(e, if left { Term::inl(t) } else { Term::inr(t) })));
            }
            self.store.undo(m);
        }
        // case
        let m = self.store.mark();
        let (a, b) = (self.store.var(), self.store.var());
        let or = self.store.add(Node::Or(a, b));
        for s in 1..inner.saturating_sub(1) {
            for f in 1..inner - s {
                let g = inner - s - f;
                self.place(|e| {
                    e.gen(s, or, &mut |e, st| {
                        e.scope.push(a);
                        e.gen(f, ty, &mut |e, ft| {
                            let saved = e.scope.pop().unwrap();
                            e.scope.push(b);
                            e.gen(g, ty, &mut |e, gt| {
                                let inner = e.scope.pop().unwrap();
                                k(e, Term::Case(Box::new(st.clone()), Box::new(ft.clone()), Box::new(gt)));
                                e.scope.push(inner);
                            });
                            e.scope.pop();
                            e.scope.push(saved);
                        });
                        e.scope.pop();
                    })
                });
            }
        }
        self.store.undo(m);
        // lam
        let m = self.store.mark();
        let (a, b) = (self.store.var(), self.store.var());
        let imp = self.store.add(Node::Imp(a, b));
        if self.store.unify(ty, imp) {
            self.place(|e| {
                e.scope.push(a);
                e.gen(inner, b, &mut |e, body| {
                    let saved = e.scope.pop().unwrap();
                    k(e, Term::Lam(Box::new(body)));
                    e.scope.push(saved);
                });
                e.scope.pop();
            });
        }
        self.store.undo(m);
        // app
        let m = self.store.mark();
        let a = self.store.var();
        let imp = self.store.add(Node::Imp(a, ty));
        for f in 1..inner {
            self.place(|e| e.gen(f, imp, &mut |e, ft| e.gen(inner - f, a, &mut |e, at| k(e, Term::app(ft.clone(), at)))));
        }
        self.store.undo(m);
    }
}

/// Call `f` with every typable closed term of exactly `size` nodes and its
/// principal formula (variables set to `A`), in a fixed order.
pub fn for_each_closed(size: usize, f: &mut dyn FnMut(&Term, &Formula)) {
    for_each_closed_part(size, 0, 1, f)
}

/// The terms of [`for_each_closed`] split into `parts` disjoint shares, for
/// running shares on separate threads. Share `part` is a deterministic
/// subset; together the shares cover every term exactly once.
pub fn for_each_closed_part(size: usize, part: usize, parts: usize, f: &mut dyn FnMut(&Term, &Formula)) {
    assert!(part < parts, "part {part} of {parts}");
    // smaller terms never reach the split and go to share 0 whole
    if size < SPLIT && part != 0 {
        return;
    }
    let mut e = Enumerator {
        store: Store::new(),
        scope: Vec::new(),
        placed: 0,
        prefixes: 0,
        split: if size < SPLIT { usize::MAX } else { SPLIT },
        part,
        parts,
    };
    let root = e.store.var();
    let atom = Name::new("A");
    e.gen(size, root, &mut |e, t| {
        let formula = e.store.formula(root, &atom);
        f(&t, &formula);
    });
}

/// Prefix length, in nodes, at which shares are assigned.
const SPLIT: usize = 4;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typecheck::{check, typable};

    #[test]
    fn smallest_terms() {
        let mut seen = Vec::new();
        for s in 1..=3 {
            for_each_closed(s, &mut |t, f| seen.push(format!("{t} : {f}")));
        }
        assert_eq!(seen, ["lam(x0. x0) : A -> A", "inl(lam(x0. x0)) : (A -> A) | A",
            "inr(lam(x0. x0)) : A | (A -> A)", "lam(x0. fst(x0)) : A & A -> A", "lam(x0. snd(x0)) : A & A -> A",
            "lam(x0. inl(x0)) : A -> A | A", "lam(x0. inr(x0)) : A -> A | A", "lam(x0. lam(x1. x1)) : A -> A -> A",
            "lam(x0. lam(x1. x0)) : A -> A -> A"]);
    }

    #[test]
    fn agrees_with_the_checker_on_small_sizes() {
        let ctx = context();
        for s in 1..=8 {
            for_each_closed(s, &mut |t, f| {
                assert!(t.is_well_scoped(), "{t}");
                assert!(check(&ctx, t, f).is_ok(), "{t} : {f}");
            });
        }
    }

    #[test]
    fn shares_partition_the_terms() {
        use std::collections::BTreeSet;
        for size in [3, 7] {
            let mut whole = Vec::new();
            for_each_closed(size, &mut |t, _| whole.push(t.clone()));
            let mut union = Vec::new();
            for part in 0..5 {
                for_each_closed_part(size, part, 5, &mut |t, _| union.push(t.clone()));
            }
            assert_eq!(union.len(), whole.len());
            let a: BTreeSet<Term> = whole.into_iter().collect();
            let b: BTreeSet<Term> = union.into_iter().collect();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_what_it_omits() {
        // self-application and a destructor on the wrong constructor
        let ctx = context();
        for text in ["lam(x. app(x, x))", "lam(x. fst(inl(x)))"] {
            let t = crate::syntax::parse_proofterm(text).unwrap();
            assert!(typable(&ctx, &t).is_err(), "{text}");
            let mut found = false;
            for_each_closed(t.size(), &mut |u, _| found |= u == &t);
            assert!(!found, "{text}");
        }
    }
}
