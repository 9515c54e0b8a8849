//! De Bruijn shifting and capture-avoiding substitution.

use super::{Formula, Kind, Name, Path, SyntaxError, Term, Value, Var};

/// Rewrites variable occurrences; `depth` counts binders crossed so far.
trait VarMap {
    fn proof(&mut self, depth: u32, v: &Var) -> Term;
    fn individual(&mut self, depth: u32, v: &Var) -> Var;
    fn path(&mut self, depth: u32, v: &Var) -> Path;
}

fn map_path(p: &Path, depth: u32, f: &mut impl VarMap) -> Path {
    match p {
        Path::Refl => Path::Refl,
        // step redexes live at their own position, not inside this term
        Path::Step(s) => Path::Step(s.clone()),
        Path::Var(v) => f.path(depth, v),
        Path::Sym(p) => Path::Sym(Box::new(map_path(p, depth, f))),
        Path::Trans(p, q) => Path::Trans(
            Box::new(map_path(p, depth, f)),
            Box::new(map_path(q, depth, f)),
        ),
    }
}

fn map_term(t: &Term, depth: u32, f: &mut impl VarMap) -> Term {
    let b = |t: &Term, d: u32, f: &mut _| Box::new(map_term(t, d, f));
    match t {
        Term::Var(v) => f.proof(depth, v),
        Term::Pair(x, y) => Term::Pair(b(x, depth, f), b(y, depth, f)),
        Term::Fst(x) => Term::Fst(b(x, depth, f)),
        Term::Snd(x) => Term::Snd(b(x, depth, f)),
        Term::Inl(x) => Term::Inl(b(x, depth, f)),
        Term::Inr(x) => Term::Inr(b(x, depth, f)),
        Term::Case(s, l, r) => Term::Case(b(s, depth, f), b(l, depth + 1, f), b(r, depth + 1, f)),
        Term::Lam(x) => Term::Lam(b(x, depth + 1, f)),
        Term::App(x, y) => Term::App(b(x, depth, f), b(y, depth, f)),
        Term::BigLam(s, x) => Term::BigLam(s.clone(), b(x, depth + 1, f)),
        Term::Extr(x, i) => Term::Extr(b(x, depth, f), f.individual(depth, i)),
        Term::Eps(i, x) => {
            let i = f.individual(depth, i);
            Term::Eps(i, b(x, depth, f))
        }
        Term::Inst(s, d) => Term::Inst(b(s, depth, f), b(d, depth + 2, f)),
        Term::PathIntro(p, i, j) => {
            let p = map_path(p, depth, f);
            Term::PathIntro(p, f.individual(depth, i), f.individual(depth, j))
        }
        Term::Rewr(s, d) => Term::Rewr(b(s, depth, f), b(d, depth + 1, f)),
    }
}

struct Shift {
    cutoff: u32,
    by: u32,
}

impl Shift {
    fn var(&self, depth: u32, v: &Var) -> Var {
        match v {
            Var::Bound(i) if *i >= depth + self.cutoff => Var::Bound(i + self.by),
            v => v.clone(),
        }
    }
}

impl VarMap for Shift {
    fn proof(&mut self, depth: u32, v: &Var) -> Term {
        Term::Var(self.var(depth, v))
    }
    fn individual(&mut self, depth: u32, v: &Var) -> Var {
        self.var(depth, v)
    }
    fn path(&mut self, depth: u32, v: &Var) -> Path {
        Path::Var(self.var(depth, v))
    }
}

fn shift_value(v: &Value, by: u32) -> Value {
    if by == 0 {
        return v.clone();
    }
    let mut s = Shift { cutoff: 0, by };
    match v {
        Value::Proof(t) => Value::Proof(map_term(t, 0, &mut s)),
        Value::Individual(i) => Value::Individual(s.var(0, i)),
        Value::Path(p) => Value::Path(map_path(p, 0, &mut s)),
    }
}

struct Instantiate<'a> {
    values: &'a [Value],
}

impl Instantiate<'_> {
    fn lookup(&self, depth: u32, v: &Var, kind: Kind) -> Result<Value, Var> {
        match v {
            Var::Bound(i) if *i < depth => Err(v.clone()),
            Var::Bound(i) => {
                let k = (i - depth) as usize;
                match self.values.get(k) {
                    Some(val) => {
                        assert_eq!(val.kind(), kind, "instantiate: kind mismatch at index {i}");
                        Ok(shift_value(val, depth))
                    }
                    None => Err(Var::Bound(i - self.values.len() as u32)),
                }
            }
            Var::Free(_) => Err(v.clone()),
        }
    }
}

impl VarMap for Instantiate<'_> {
    fn proof(&mut self, depth: u32, v: &Var) -> Term {
        match self.lookup(depth, v, Kind::Proof) {
            Ok(Value::Proof(t)) => t,
            Ok(_) => unreachable!(),
            Err(v) => Term::Var(v),
        }
    }
    fn individual(&mut self, depth: u32, v: &Var) -> Var {
        match self.lookup(depth, v, Kind::Individual) {
            Ok(Value::Individual(i)) => i,
            Ok(_) => unreachable!(),
            Err(v) => v,
        }
    }
    fn path(&mut self, depth: u32, v: &Var) -> Path {
        match self.lookup(depth, v, Kind::Path) {
            Ok(Value::Path(p)) => p,
            Ok(_) => unreachable!(),
            Err(v) => Path::Var(v),
        }
    }
}

/// Substitute `values[k]` for index `k` of a body under `values.len()`
/// binders, removing those binders. Values may mention indices bound outside
/// the body; they are shifted as they move under inner binders.
pub(crate) fn instantiate(body: &Term, values: &[Value]) -> Term {
    map_term(body, 0, &mut Instantiate { values })
}

/// Open a quantifier body with an individual.
pub(crate) fn instantiate_formula(body: &Formula, value: &Var) -> Formula {
    fn var(v: &Var, depth: u32, value: &Var) -> Var {
        match v {
            Var::Bound(i) if *i == depth => match value {
                Var::Bound(j) => Var::Bound(j + depth),
                free => free.clone(),
            },
            Var::Bound(i) if *i > depth => Var::Bound(i - 1),
            v => v.clone(),
        }
    }
    fn go(f: &Formula, depth: u32, value: &Var) -> Formula {
        let args = |xs: &[Var]| xs.iter().map(|x| var(x, depth, value)).collect();
        match f {
            Formula::Atom(p, xs) => Formula::Atom(p.clone(), args(xs)),
            Formula::NegAtom(p, xs) => Formula::NegAtom(p.clone(), args(xs)),
            Formula::And(a, b) => Formula::and(go(a, depth, value), go(b, depth, value)),
            Formula::Or(a, b) => Formula::or(go(a, depth, value), go(b, depth, value)),
            Formula::Implies(a, b) => Formula::implies(go(a, depth, value), go(b, depth, value)),
            Formula::Forall(s, b) => Formula::Forall(s.clone(), Box::new(go(b, depth + 1, value))),
            Formula::Exists(s, b) => Formula::Exists(s.clone(), Box::new(go(b, depth + 1, value))),
            Formula::Id(s, a, b) => Formula::Id(s.clone(), var(a, depth, value), var(b, depth, value)),
        }
    }
    go(body, 0, value)
}

/// Abstract a free individual name into the outermost bound variable, the
/// inverse of [`instantiate_formula`].
pub fn close_formula(f: &Formula, name: &Name) -> Formula {
    fn var(v: &Var, depth: u32, name: &Name) -> Var {
        match v {
            Var::Free(n) if n == name => Var::Bound(depth),
            Var::Bound(i) if *i >= depth => Var::Bound(i + 1),
            v => v.clone(),
        }
    }
    fn go(f: &Formula, depth: u32, name: &Name) -> Formula {
        let args = |xs: &[Var]| xs.iter().map(|x| var(x, depth, name)).collect();
        match f {
            Formula::Atom(p, xs) => Formula::Atom(p.clone(), args(xs)),
            Formula::NegAtom(p, xs) => Formula::NegAtom(p.clone(), args(xs)),
            Formula::And(a, b) => Formula::and(go(a, depth, name), go(b, depth, name)),
            Formula::Or(a, b) => Formula::or(go(a, depth, name), go(b, depth, name)),
            Formula::Implies(a, b) => Formula::implies(go(a, depth, name), go(b, depth, name)),
            Formula::Forall(s, b) => Formula::Forall(s.clone(), Box::new(go(b, depth + 1, name))),
            Formula::Exists(s, b) => Formula::Exists(s.clone(), Box::new(go(b, depth + 1, name))),
            Formula::Id(s, a, b) => Formula::Id(s.clone(), var(a, depth, name), var(b, depth, name)),
        }
    }
    go(f, 0, name)
}

struct Replace<'a> {
    name: &'a Name,
    value: &'a Value,
}

impl Replace<'_> {
    fn hit(&self, v: &Var) -> bool {
        matches!(v, Var::Free(n) if n == self.name)
    }
}

impl VarMap for Replace<'_> {
    fn proof(&mut self, depth: u32, v: &Var) -> Term {
        match self.value {
            Value::Proof(_) if self.hit(v) => match shift_value(self.value, depth) {
                Value::Proof(t) => t,
                _ => unreachable!(),
            },
            _ => Term::Var(v.clone()),
        }
    }
    fn individual(&mut self, depth: u32, v: &Var) -> Var {
        match self.value {
            Value::Individual(_) if self.hit(v) => match shift_value(self.value, depth) {
                Value::Individual(i) => i,
                _ => unreachable!(),
            },
            _ => v.clone(),
        }
    }
    fn path(&mut self, depth: u32, v: &Var) -> Path {
        match self.value {
            Value::Path(_) if self.hit(v) => match shift_value(self.value, depth) {
                Value::Path(p) => p,
                _ => unreachable!(),
            },
            _ => Path::Var(v.clone()),
        }
    }
}

/// Capture-avoiding substitution of `value` for the free variable `var`.
///
/// Bound variables are indices, so no binder of `body` can capture a free
/// name of `value`. Fails when `var` occurs in a position of another kind.
pub fn substitute(body: &Term, var: &str, value: &Value) -> Result<Term, SyntaxError> {
    let name = Name::new(var);
    let free = body.free_names();
    if let Some(used) = free.kinds_of(&name).into_iter().find(|k| *k != value.kind()) {
        return Err(SyntaxError::KindMismatch {
            name,
            used,
            value: value.kind(),
        });
    }
    Ok(map_term(
        body,
        0,
        &mut Replace {
            name: &name,
            value,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_proofterm, print_term};

    fn p(s: &str) -> Term {
        parse_proofterm(s).unwrap()
    }

    #[test]
    fn substitute_variable_itself() {
        let out = substitute(&p("x"), "x", &Value::Proof(p("a"))).unwrap();
        assert_eq!(out, p("a"));
    }

    #[test]
    fn substitute_does_not_capture() {
        let out = substitute(&p("lam(y. x)"), "x", &Value::Proof(p("y"))).unwrap();
        assert_eq!(print_term(&out), "lam(x0. y)");
        assert_eq!(out, Term::Lam(Box::new(Term::var("y"))));
    }

    #[test]
    fn substitute_into_pair() {
        let out = substitute(&p("pair(x,c)"), "x", &Value::Proof(p("a"))).unwrap();
        assert_eq!(out, p("pair(a,c)"));
    }

    #[test]
    fn substitute_kind_mismatch() {
        let err = substitute(&p("extr(f, x)"), "x", &Value::Proof(p("a"))).unwrap_err();
        assert!(matches!(err, SyntaxError::KindMismatch { .. }));
    }

    #[test]
    fn instantiate_shifts_escaping_indices() {
        // body of lam(y. lam(w. y)), contracted with an argument bound outside
        let inner = Term::Lam(Box::new(Term::Var(Var::Bound(1))));
        let out = instantiate(&inner, &[Value::Proof(Term::Var(Var::Bound(0)))]);
        assert_eq!(out, Term::Lam(Box::new(Term::Var(Var::Bound(1)))));
        let out = instantiate(&inner, &[Value::Proof(Term::var("a"))]);
        assert_eq!(out, Term::Lam(Box::new(Term::var("a"))));
    }

    #[test]
    fn close_inverts_open() {
        let f = crate::syntax::parse_formula("forall x:D. E(x, y)").unwrap();
        let Formula::Forall(_, body) = &f else { panic!() };
        let opened = body.open(&Var::free("z"));
        assert_eq!(close_formula(&opened, &Name::new("z")), **body);
    }
}
