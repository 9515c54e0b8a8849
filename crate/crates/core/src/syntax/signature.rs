use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Formula, Name, Sort, SyntaxError, Var};

/// Sorts, predicate symbols with argument sorts, and sorted constants.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    sorts: Vec<Sort>,
    preds: BTreeMap<Name, Vec<Sort>>,
    consts: BTreeMap<Name, Sort>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sort(&mut self, sort: Sort) -> Result<(), SyntaxError> {
        if self.sorts.contains(&sort) {
            return Err(SyntaxError::Duplicate(sort.0));
        }
        self.sorts.push(sort);
        Ok(())
    }

    pub fn add_pred(&mut self, name: Name, args: Vec<Sort>) -> Result<(), SyntaxError> {
        for s in &args {
            self.require_sort(s)?;
        }
        if self.preds.contains_key(&name) || self.consts.contains_key(&name) {
            return Err(SyntaxError::Duplicate(name));
        }
        self.preds.insert(name, args);
        Ok(())
    }

    pub fn add_const(&mut self, name: Name, sort: Sort) -> Result<(), SyntaxError> {
        self.require_sort(&sort)?;
        if self.preds.contains_key(&name) || self.consts.contains_key(&name) {
            return Err(SyntaxError::Duplicate(name));
        }
        self.consts.insert(name, sort);
        Ok(())
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn has_sort(&self, s: &Sort) -> bool {
        self.sorts.contains(s)
    }

    pub fn require_sort(&self, s: &Sort) -> Result<(), SyntaxError> {
        if self.has_sort(s) {
            Ok(())
        } else {
            Err(SyntaxError::UnknownSort(s.0.clone()))
        }
    }

    pub fn pred(&self, name: &Name) -> Option<&[Sort]> {
        self.preds.get(name).map(Vec::as_slice)
    }

    pub fn preds(&self) -> impl Iterator<Item = (&Name, &[Sort])> {
        self.preds.iter().map(|(n, s)| (n, s.as_slice()))
    }

    pub fn constant(&self, name: &Name) -> Option<&Sort> {
        self.consts.get(name)
    }

    pub fn constants(&self) -> impl Iterator<Item = (&Name, &Sort)> {
        self.consts.iter()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Individual { name: Name, sort: Sort },
    Hypothesis { name: Name, formula: Formula },
    /// A path hypothesis `r : a = b : D`.
    Equality { name: Name, sort: Sort, lhs: Var, rhs: Var },
}

impl Decl {
    pub fn name(&self) -> &Name {
        match self {
            Decl::Individual { name, .. }
            | Decl::Hypothesis { name, .. }
            | Decl::Equality { name, .. } => name,
        }
    }
}

/// Ordered declarations over a signature. Names are unique across the
/// context and the signature's constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    signature: Arc<Signature>,
    decls: Vec<Decl>,
}

impl Context {
    pub fn new(signature: Arc<Signature>) -> Self {
        Context {
            signature,
            decls: Vec::new(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn signature_arc(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn decls(&self) -> &[Decl] {
        &self.decls
    }

    pub fn lookup(&self, name: &Name) -> Option<&Decl> {
        self.decls.iter().rev().find(|d| d.name() == name)
    }

    pub fn hypothesis(&self, name: &Name) -> Option<&Formula> {
        match self.lookup(name)? {
            Decl::Hypothesis { formula, .. } => Some(formula),
            _ => None,
        }
    }

    pub fn equality(&self, name: &Name) -> Option<(&Sort, &Var, &Var)> {
        match self.lookup(name)? {
            Decl::Equality { sort, lhs, rhs, .. } => Some((sort, lhs, rhs)),
            _ => None,
        }
    }

    /// Sort of a free individual: a declared variable or a constant.
    pub fn individual_sort(&self, name: &Name) -> Option<&Sort> {
        match self.lookup(name) {
            Some(Decl::Individual { sort, .. }) => Some(sort),
            Some(_) => None,
            None => self.signature.constant(name),
        }
    }

    pub fn is_declared(&self, name: &Name) -> bool {
        self.lookup(name).is_some() || self.signature.constant(name).is_some()
    }

    /// Validate and append a declaration.
    pub fn push(&mut self, decl: Decl) -> Result<(), SyntaxError> {
        if self.is_declared(decl.name()) || self.signature.pred(decl.name()).is_some() {
            return Err(SyntaxError::Duplicate(decl.name().clone()));
        }
        match &decl {
            Decl::Individual { sort, .. } => self.signature.require_sort(sort)?,
            Decl::Hypothesis { formula, .. } => self.check_formula(formula)?,
            Decl::Equality { sort, lhs, rhs, .. } => {
                self.signature.require_sort(sort)?;
                for v in [lhs, rhs] {
                    self.expect_sort(v, sort, &[])?;
                }
            }
        }
        self.decls.push(decl);
        Ok(())
    }

    /// A name of the form `{base}{n}` not declared here.
    pub fn fresh(&self, base: &str) -> Name {
        (0..)
            .map(|i| Name::from(format!("{base}{i}")))
            .find(|n| !self.is_declared(n) && self.signature.pred(n).is_none())
            .unwrap()
    }

    fn sort_of(&self, v: &Var, bound: &[Sort]) -> Result<Sort, SyntaxError> {
        match v {
            Var::Bound(i) => bound
                .len()
                .checked_sub(1 + *i as usize)
                .map(|k| bound[k].clone())
                .ok_or_else(|| SyntaxError::UnboundIndividual(Name::from(format!("#{i}")))),
            Var::Free(n) => self
                .individual_sort(n)
                .cloned()
                .ok_or_else(|| SyntaxError::UnboundIndividual(n.clone())),
        }
    }

    fn expect_sort(&self, v: &Var, expected: &Sort, bound: &[Sort]) -> Result<(), SyntaxError> {
        let found = self.sort_of(v, bound)?;
        if &found != expected {
            let name = match v {
                Var::Free(n) => n.to_string(),
                Var::Bound(i) => format!("#{i}"),
            };
            return Err(SyntaxError::SortMismatch {
                name,
                expected: expected.clone(),
                found,
            });
        }
        Ok(())
    }

    /// Well-formedness of a proof-checked formula: known predicates with
    /// matching arity and sorts, known sorts, bound individuals, no literals.
    pub fn check_formula(&self, f: &Formula) -> Result<(), SyntaxError> {
        self.check_formula_in(f, &mut Vec::new(), false)
    }

    /// As `check_formula`, but negated atoms are allowed.
    pub fn check_nnf_formula(&self, f: &Formula) -> Result<(), SyntaxError> {
        self.check_formula_in(f, &mut Vec::new(), true)
    }

    fn check_formula_in(
        &self,
        f: &Formula,
        bound: &mut Vec<Sort>,
        literals: bool,
    ) -> Result<(), SyntaxError> {
        match f {
            Formula::NegAtom(..) if !literals => Err(SyntaxError::NegatedAtom),
            Formula::Atom(p, args) | Formula::NegAtom(p, args) => {
                let sorts = self
                    .signature
                    .pred(p)
                    .ok_or_else(|| SyntaxError::UnknownPredicate(p.clone()))?;
                if sorts.len() != args.len() {
                    return Err(SyntaxError::Arity {
                        name: p.clone(),
                        expected: sorts.len(),
                        found: args.len(),
                    });
                }
                for (a, s) in args.iter().zip(sorts) {
                    self.expect_sort(a, s, bound)?;
                }
                Ok(())
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                self.check_formula_in(a, bound, literals)?;
                self.check_formula_in(b, bound, literals)
            }
            Formula::Forall(s, body) | Formula::Exists(s, body) => {
                self.signature.require_sort(s)?;
                bound.push(s.clone());
                let r = self.check_formula_in(body, bound, literals);
                bound.pop();
                r
            }
            Formula::Id(s, a, b) => {
                self.signature.require_sort(s)?;
                self.expect_sort(a, s, bound)?;
                self.expect_sort(b, s, bound)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn sig() -> Arc<Signature> {
        let mut s = Signature::new();
        s.add_sort(Sort::new("D")).unwrap();
        s.add_sort(Sort::new("N")).unwrap();
        s.add_pred(Name::new("E"), vec![Sort::new("D"), Sort::new("D")]).unwrap();
        s.add_pred(Name::new("A"), vec![]).unwrap();
        s.add_const(Name::new("c"), Sort::new("D")).unwrap();
        s.add_const(Name::new("n"), Sort::new("N")).unwrap();
        Arc::new(s)
    }

    #[test]
    fn formula_validation() {
        let ctx = Context::new(sig());
        let ok = |t: &str| ctx.check_formula(&parse_formula(t).unwrap());
        assert!(ok("forall x:D. E(x, c) -> A").is_ok());
        assert!(matches!(ok("E(c)"), Err(SyntaxError::Arity { expected: 2, found: 1, .. })));
        assert!(matches!(ok("E(c, n)"), Err(SyntaxError::SortMismatch { .. })));
        assert!(matches!(ok("forall x:M. A"), Err(SyntaxError::UnknownSort(_))));
        assert!(matches!(ok("Q"), Err(SyntaxError::UnknownPredicate(_))));
        assert!(matches!(ok("E(c, z)"), Err(SyntaxError::UnboundIndividual(_))));
        assert!(matches!(ok("~A"), Err(SyntaxError::NegatedAtom)));
        assert!(ok("Id(N, n, n)").is_ok());
    }

    #[test]
    fn names_are_unique() {
        let mut ctx = Context::new(sig());
        let hyp = |n: &str| Decl::Hypothesis {
            name: Name::new(n),
            formula: Formula::atom("A", &[]),
        };
        ctx.push(hyp("x")).unwrap();
        assert!(matches!(ctx.push(hyp("x")), Err(SyntaxError::Duplicate(_))));
        assert!(matches!(ctx.push(hyp("c")), Err(SyntaxError::Duplicate(_))));
        assert_eq!(ctx.fresh("x"), Name::new("x0"));
    }
}
