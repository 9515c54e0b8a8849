//! Printing with canonical binder names `x0, x1, …` (indexed by binder depth,
//! skipping names that occur free).

use std::collections::BTreeSet;
use std::fmt::{self, Write};

use super::{Formula, Name, Path, Term, Var};

struct Names {
    avoid: BTreeSet<Name>,
    pool: Vec<String>,
    next: usize,
}

impl Names {
    fn new(avoid: BTreeSet<Name>) -> Self {
        Names {
            avoid,
            pool: Vec::new(),
            next: 0,
        }
    }

    fn at_depth(&mut self, depth: usize) -> String {
        while self.pool.len() <= depth {
            let candidate = format!("x{}", self.next);
            self.next += 1;
            if !self.avoid.contains(candidate.as_str()) {
                self.pool.push(candidate);
            }
        }
        self.pool[depth].clone()
    }
}

impl std::borrow::Borrow<str> for Name {
    fn borrow(&self) -> &str {
        self.as_str()
    }
}

fn var_name(v: &Var, scope: &[String]) -> String {
    match v {
        Var::Free(n) => n.to_string(),
        Var::Bound(i) => {
            let i = *i as usize;
            if i < scope.len() {
                scope[scope.len() - 1 - i].clone()
            } else {
                format!("?{i}")
            }
        }
    }
}

struct TermPrinter {
    names: Names,
    scope: Vec<String>,
    out: String,
}

impl TermPrinter {
    fn bind(&mut self) -> String {
        let n = self.names.at_depth(self.scope.len());
        self.scope.push(n.clone());
        n
    }

    fn term(&mut self, t: &Term) {
        macro_rules! w { ($($a:tt)*) => { let _ = write!(self.out, $($a)*); } }
        match t {
            Term::Var(v) => {
                w!("{}", var_name(v, &self.scope));
            }
            Term::Pair(a, b) => self.call("pair", &[a, b]),
            Term::Fst(a) => self.call("fst", &[a]),
            Term::Snd(a) => self.call("snd", &[a]),
            Term::Inl(a) => self.call("inl", &[a]),
            Term::Inr(a) => self.call("inr", &[a]),
            Term::App(a, b) => self.call("app", &[a, b]),
            Term::Case(s, f, g) => {
                w!("case(");
                self.term(s);
                for br in [f, g] {
                    let x = self.bind();
                    w!(",{x} => ");
                    self.term(br);
                    self.scope.pop();
                }
                w!(")");
            }
            Term::Lam(b) => {
                let x = self.bind();
                w!("lam({x}. ");
                self.term(b);
                self.scope.pop();
                w!(")");
            }
            Term::BigLam(sort, b) => {
                let x = self.bind();
                w!("Lam({x}:{sort}. ");
                self.term(b);
                self.scope.pop();
                w!(")");
            }
            Term::Extr(a, i) => {
                w!("extr(");
                self.term(a);
                w!(",{})", var_name(i, &self.scope));
            }
            Term::Eps(i, a) => {
                w!("eps({},", var_name(i, &self.scope));
                self.term(a);
                w!(")");
            }
            Term::Inst(s, d) => {
                w!("inst(");
                self.term(s);
                let t = self.bind();
                let g = self.bind();
                w!(",{t} {g} => ");
                self.term(d);
                self.scope.truncate(self.scope.len() - 2);
                w!(")");
            }
            Term::PathIntro(p, i, j) => {
                w!("path(");
                path(p, &self.scope, &mut self.out);
                w!(",{},{})", var_name(i, &self.scope), var_name(j, &self.scope));
            }
            Term::Rewr(s, d) => {
                w!("rewr(");
                self.term(s);
                let t = self.bind();
                w!(",{t} => ");
                self.term(d);
                self.scope.pop();
                w!(")");
            }
        }
    }

    fn call(&mut self, head: &str, args: &[&Term]) {
        self.out.push_str(head);
        self.out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            self.term(a);
        }
        self.out.push(')');
    }
}

fn path(p: &Path, scope: &[String], out: &mut String) {
    match p {
        Path::Refl => out.push_str("rho"),
        Path::Step(s) => {
            out.push_str(s.rule.label());
            if !s.position.is_root() {
                let _ = write!(out, "@{}", s.position);
            }
        }
        Path::Var(v) => out.push_str(&var_name(v, scope)),
        Path::Sym(p) => {
            out.push_str("sym(");
            path(p, scope, out);
            out.push(')');
        }
        Path::Trans(p, q) => {
            out.push_str("tr(");
            path(p, scope, out);
            out.push(',');
            path(q, scope, out);
            out.push(')');
        }
    }
}

pub fn print_term(t: &Term) -> String {
    let free = t.free_names();
    let avoid: BTreeSet<Name> = free
        .proofs
        .into_iter()
        .chain(free.individuals)
        .chain(free.paths)
        .collect();
    let mut p = TermPrinter {
        names: Names::new(avoid),
        scope: Vec::new(),
        out: String::new(),
    };
    p.term(t);
    p.out
}

pub fn print_path(p: &Path) -> String {
    let mut out = String::new();
    path(p, &[], &mut out);
    out
}

struct FormulaPrinter {
    names: Names,
    scope: Vec<String>,
    out: String,
}

impl FormulaPrinter {
    /// `level`: 0 implication, 1 disjunction, 2 conjunction, 3 unit.
    fn formula(&mut self, f: &Formula, level: u8) {
        let parens = |p: &mut Self, needed: bool, body: &dyn Fn(&mut Self)| {
            if needed {
                p.out.push('(');
            }
            body(p);
            if needed {
                p.out.push(')');
            }
        };
        match f {
            Formula::Atom(p, args) => self.atom(p, args),
            Formula::NegAtom(p, args) => {
                self.out.push('~');
                self.atom(p, args);
            }
            Formula::Id(s, a, b) => {
                let _ = write!(
                    self.out,
                    "Id({s},{},{})",
                    var_name(a, &self.scope),
                    var_name(b, &self.scope)
                );
            }
            Formula::Implies(a, b) => parens(self, level > 0, &|p| {
                p.formula(a, 1);
                p.out.push_str(" -> ");
                p.formula(b, 0);
            }),
            Formula::Or(a, b) => parens(self, level > 1, &|p| {
                p.formula(a, 1);
                p.out.push_str(" | ");
                p.formula(b, 2);
            }),
            Formula::And(a, b) => parens(self, level > 2, &|p| {
                p.formula(a, 2);
                p.out.push_str(" & ");
                p.formula(b, 3);
            }),
            Formula::Forall(s, b) | Formula::Exists(s, b) => {
                let q = if matches!(f, Formula::Forall(..)) { "forall" } else { "exists" };
                parens(self, level > 0, &|p| {
                    let x = p.names.at_depth(p.scope.len());
                    let _ = write!(p.out, "{q} {x}:{s}. ");
                    p.scope.push(x);
                    p.formula(b, 0);
                    p.scope.pop();
                })
            }
        }
    }

    fn atom(&mut self, p: &Name, args: &[Var]) {
        self.out.push_str(p.as_str());
        if !args.is_empty() {
            self.out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    self.out.push(',');
                }
                let n = var_name(a, &self.scope);
                self.out.push_str(&n);
            }
            self.out.push(')');
        }
    }
}

pub fn print_formula(f: &Formula) -> String {
    let mut p = FormulaPrinter {
        names: Names::new(f.free_individuals()),
        scope: Vec::new(),
        out: String::new(),
    };
    p.formula(f, 0);
    p.out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_term(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_formula(self))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_path(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_proofterm};

    fn roundtrip_term(s: &str) -> String {
        print_term(&parse_proofterm(s).unwrap())
    }

    #[test]
    fn prints_pair_tightly() {
        assert_eq!(roundtrip_term("pair(a, b)"), "pair(a,b)");
    }

    #[test]
    fn shadowed_binders_get_depth_names() {
        assert_eq!(roundtrip_term("lam(x. lam(x. x))"), "lam(x0. lam(x1. x1))");
        assert_eq!(roundtrip_term("lam(y. lam(x. y))"), "lam(x0. lam(x1. x0))");
    }

    #[test]
    fn canonical_names_skip_free_names() {
        assert_eq!(roundtrip_term("lam(y. pair(y, x0))"), "lam(x1. pair(x1,x0))");
    }

    #[test]
    fn binder_forms() {
        assert_eq!(
            roundtrip_term("case(s, a => inl(a), b => inr(b))"),
            "case(s,x0 => inl(x0),x0 => inr(x0))"
        );
        assert_eq!(roundtrip_term("inst(e, t g => eps(t, g))"), "inst(e,x0 x1 => eps(x0,x1))");
        assert_eq!(
            roundtrip_term("rewr(path(r, a, b), t => path(sym(t), b, a))"),
            "rewr(path(r,a,b),x0 => path(sym(x0),b,a))"
        );
        assert_eq!(roundtrip_term("Lam(x:D. extr(f, x))"), "Lam(x0:D. extr(f,x0))");
    }

    #[test]
    fn formula_precedence() {
        for (text, printed) in [
            ("P & Q -> P", "P & Q -> P"),
            ("(P -> Q) -> R", "(P -> Q) -> R"),
            ("P & (Q & R)", "P & (Q & R)"),
            ("(P | Q) & R", "(P | Q) & R"),
            ("forall x:D. exists y:D. E(x,y)", "forall x0:D. exists x1:D. E(x0,x1)"),
            ("(forall x:D. P(x)) & Q", "(forall x0:D. P(x0)) & Q"),
            ("~E(a, b) | Id(D, a, b)", "~E(a,b) | Id(D,a,b)"),
        ] {
            assert_eq!(print_formula(&parse_formula(text).unwrap()), printed);
        }
    }
}
