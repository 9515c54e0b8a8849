//! Abstract syntax for formulas, individuals, proof terms and paths.
//!
//! Binders are nameless: a bound occurrence is a de Bruijn index counting
//! enclosing binders of the same tree (formula binders for formulas, proof-term
//! binders for proof terms), so α-equivalence is structural equality. Free
//! occurrences carry their name. Proof-term binders of every kind share one
//! index space: `Lam` and the `t` of `inst` bind individuals, `lam` and the
//! branches of `case` and the `g` of `inst` bind proofs, `rewr` binds a path.

mod files;
mod parse;
mod print;
mod subst;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use files::{parse_context_line, parse_judgement, parse_signature, Judgement};
pub use parse::{parse_formula, parse_individual, parse_path, parse_proofterm};
pub use print::{print_formula, print_path, print_term};
pub use subst::{close_formula, substitute};
pub(crate) use subst::{instantiate, instantiate_formula};

mod signature;
pub use signature::{Context, Decl, Signature};

/// Interned identifier.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl From<String> for Name {
    fn from(s: String) -> Self {
        Name(Arc::from(s))
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// A domain of individuals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sort(pub Name);

impl Sort {
    pub fn new(s: &str) -> Self {
        Sort(Name::new(s))
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Debug for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sort({})", self.0)
    }
}

/// An occurrence of a variable: bound (de Bruijn index) or free (by name).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Var {
    Bound(u32),
    Free(Name),
}

impl Var {
    pub fn free(name: &str) -> Self {
        Var::Free(Name::new(name))
    }

    pub fn as_free(&self) -> Option<&Name> {
        match self {
            Var::Free(n) => Some(n),
            Var::Bound(_) => None,
        }
    }
}

/// Individuals are variables or constants; there are no function symbols.
/// A free name denotes whichever the context or signature declares it to be.
pub type Individual = Var;

/// First-order formulas. `NegAtom` only occurs in evaluation-game input.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Formula {
    Atom(Name, Vec<Individual>),
    NegAtom(Name, Vec<Individual>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Sort, Box<Formula>),
    Exists(Sort, Box<Formula>),
    Id(Sort, Individual, Individual),
}

impl Formula {
    pub fn atom(pred: &str, args: &[&str]) -> Self {
        Formula::Atom(Name::new(pred), args.iter().map(|a| Var::free(a)).collect())
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Formula::Atom(..) | Formula::NegAtom(..))
    }

    /// Nesting depth of connectives; literals and `Id` have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(..) | Formula::NegAtom(..) | Formula::Id(..) => 0,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.depth().max(b.depth())
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => 1 + b.depth(),
        }
    }

    /// Replace the outermost bound individual of a quantifier body.
    pub fn open(&self, value: &Individual) -> Formula {
        instantiate_formula(self, value)
    }

    pub fn free_individuals(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Name>) {
        match self {
            Formula::Atom(_, args) | Formula::NegAtom(_, args) => {
                out.extend(args.iter().filter_map(|a| a.as_free().cloned()))
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Formula::Forall(_, b) | Formula::Exists(_, b) => b.collect_free(out),
            Formula::Id(_, a, b) => {
                out.extend(a.as_free().cloned());
                out.extend(b.as_free().cloned());
            }
        }
    }
}

/// The eight β-contractions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Rule {
    BetaFst,
    BetaSnd,
    BetaCaseL,
    BetaCaseR,
    BetaApp,
    BetaExtr,
    BetaInst,
    BetaRewr,
}

impl Rule {
    pub const ALL: [Rule; 8] = [
        Rule::BetaFst,
        Rule::BetaSnd,
        Rule::BetaCaseL,
        Rule::BetaCaseR,
        Rule::BetaApp,
        Rule::BetaExtr,
        Rule::BetaInst,
        Rule::BetaRewr,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Rule::BetaFst => "beta-fst",
            Rule::BetaSnd => "beta-snd",
            Rule::BetaCaseL => "beta-case-l",
            Rule::BetaCaseR => "beta-case-r",
            Rule::BetaApp => "beta-app",
            Rule::BetaExtr => "beta-extr",
            Rule::BetaInst => "beta-inst",
            Rule::BetaRewr => "beta-rewr",
        }
    }

    pub fn from_label(label: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.label() == label)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Address of a subterm: the child indices taken from the root.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Position(pub Vec<u8>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: u8) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("root");
        }
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// One recorded rewrite. `redex` is the subterm before contraction; recorded
/// steps carry it so they can be replayed backwards. Steps read from text
/// have none and only replay forwards.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Step {
    pub rule: Rule,
    pub position: Position,
    pub redex: Option<Arc<Term>>,
}

impl Step {
    pub fn new(rule: Rule, position: Position) -> Self {
        Step { rule, position, redex: None }
    }
}

/// Computational path: the witness `r` of a definitional equality.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Path {
    Refl,
    Step(Step),
    Var(Var),
    Sym(Box<Path>),
    Trans(Box<Path>, Box<Path>),
}

/// A path atom together with its direction (`true` when inverted).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum PathAtom {
    Step(Step),
    Var(Var),
}

impl Path {
    pub fn sym(p: Path) -> Path {
        Path::Sym(Box::new(p))
    }

    pub fn trans(p: Path, q: Path) -> Path {
        Path::Trans(Box::new(p), Box::new(q))
    }

    /// Flatten into a reduced word of atoms: `trans` is concatenation, `sym`
    /// reverses and inverts, `refl` is empty, and adjacent inverse atoms cancel.
    pub fn atoms(&self) -> Vec<(PathAtom, bool)> {
        let mut raw = Vec::new();
        self.flatten(false, &mut raw);
        let mut out: Vec<(PathAtom, bool)> = Vec::with_capacity(raw.len());
        for (atom, inv) in raw {
            if let Some((last, last_inv)) = out.last() {
                if *last == atom && *last_inv != inv {
                    out.pop();
                    continue;
                }
            }
            out.push((atom, inv));
        }
        out
    }

    fn flatten(&self, inverted: bool, out: &mut Vec<(PathAtom, bool)>) {
        match self {
            Path::Refl => {}
            Path::Step(s) => out.push((PathAtom::Step(s.clone()), inverted)),
            Path::Var(v) => out.push((PathAtom::Var(v.clone()), inverted)),
            Path::Sym(p) => p.flatten(!inverted, out),
            Path::Trans(p, q) => {
                if inverted {
                    q.flatten(true, out);
                    p.flatten(true, out);
                } else {
                    p.flatten(false, out);
                    q.flatten(false, out);
                }
            }
        }
    }

    pub fn from_atoms(atoms: &[(PathAtom, bool)]) -> Path {
        let mut it = atoms.iter().rev().map(|(a, inv)| {
            let p = match a {
                PathAtom::Step(s) => Path::Step(s.clone()),
                PathAtom::Var(v) => Path::Var(v.clone()),
            };
            if *inv {
                Path::sym(p)
            } else {
                p
            }
        });
        let Some(mut acc) = it.next() else {
            return Path::Refl;
        };
        for p in it {
            acc = Path::trans(p, acc);
        }
        acc
    }

    /// Normal form under the groupoid laws.
    pub fn canonical(&self) -> Path {
        Path::from_atoms(&self.atoms())
    }

    pub fn equivalent(&self, other: &Path) -> bool {
        self.atoms() == other.atoms()
    }

    pub fn size(&self) -> usize {
        match self {
            Path::Refl | Path::Step(_) | Path::Var(_) => 1,
            Path::Sym(p) => 1 + p.size(),
            Path::Trans(p, q) => 1 + p.size() + q.size(),
        }
    }
}

/// Labelled natural-deduction proof terms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Var(Var),
    Pair(Box<Term>, Box<Term>),
    Fst(Box<Term>),
    Snd(Box<Term>),
    Inl(Box<Term>),
    Inr(Box<Term>),
    /// `case(s, x => f, y => g)`; each branch binds one proof variable.
    Case(Box<Term>, Box<Term>, Box<Term>),
    Lam(Box<Term>),
    App(Box<Term>, Box<Term>),
    /// `Lam(x:D. f)`; binds an individual of sort `D`.
    BigLam(Sort, Box<Term>),
    Extr(Box<Term>, Individual),
    Eps(Individual, Box<Term>),
    /// `inst(e, t g => d)`; in `d`, `g` is index 0 and `t` is index 1.
    Inst(Box<Term>, Box<Term>),
    PathIntro(Path, Individual, Individual),
    /// `rewr(e, t => d)`; binds a path variable.
    Rewr(Box<Term>, Box<Term>),
}

/// Whether the head of a term is a variable, a constructor or a destructor.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HeadKind {
    Variable,
    Canonical,
    NonCanonical,
}

/// Something that can be substituted for a variable.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Value {
    Proof(Term),
    Individual(Individual),
    Path(Path),
}

/// Variable kinds, shared by binders, declarations and values.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Kind {
    Proof,
    Individual,
    Path,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Proof => "proof",
            Kind::Individual => "individual",
            Kind::Path => "path",
        })
    }
}

impl Value {
    pub fn kind(&self) -> Kind {
        match self {
            Value::Proof(_) => Kind::Proof,
            Value::Individual(_) => Kind::Individual,
            Value::Path(_) => Kind::Path,
        }
    }
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(Var::free(name))
    }

    pub fn pair(a: Term, b: Term) -> Self {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn fst(a: Term) -> Self {
        Term::Fst(Box::new(a))
    }

    pub fn snd(a: Term) -> Self {
        Term::Snd(Box::new(a))
    }

    pub fn inl(a: Term) -> Self {
        Term::Inl(Box::new(a))
    }

    pub fn inr(a: Term) -> Self {
        Term::Inr(Box::new(a))
    }

    pub fn app(f: Term, a: Term) -> Self {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn head_kind(&self) -> HeadKind {
        match self {
            Term::Var(_) => HeadKind::Variable,
            Term::Pair(..)
            | Term::Inl(_)
            | Term::Inr(_)
            | Term::Lam(_)
            | Term::BigLam(..)
            | Term::Eps(..)
            | Term::PathIntro(..) => HeadKind::Canonical,
            Term::Fst(_)
            | Term::Snd(_)
            | Term::Case(..)
            | Term::App(..)
            | Term::Extr(..)
            | Term::Inst(..)
            | Term::Rewr(..) => HeadKind::NonCanonical,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.head_kind() == HeadKind::Canonical
    }

    /// Node count; individuals and path atoms count one each.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Fst(a) | Term::Snd(a) | Term::Inl(a) | Term::Inr(a) | Term::Lam(a) => {
                1 + a.size()
            }
            Term::BigLam(_, a) => 1 + a.size(),
            Term::Pair(a, b) | Term::App(a, b) | Term::Inst(a, b) | Term::Rewr(a, b) => {
                1 + a.size() + b.size()
            }
            Term::Case(s, f, g) => 1 + s.size() + f.size() + g.size(),
            Term::Extr(a, _) | Term::Eps(_, a) => 2 + a.size(),
            Term::PathIntro(p, _, _) => 3 + p.size(),
        }
    }

    /// Proof-term children in position order.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Var(_) | Term::PathIntro(..) => vec![],
            Term::Fst(a)
            | Term::Snd(a)
            | Term::Inl(a)
            | Term::Inr(a)
            | Term::Lam(a)
            | Term::BigLam(_, a)
            | Term::Extr(a, _)
            | Term::Eps(_, a) => vec![a],
            Term::Pair(a, b) | Term::App(a, b) | Term::Inst(a, b) | Term::Rewr(a, b) => {
                vec![a, b]
            }
            Term::Case(s, f, g) => vec![s, f, g],
        }
    }

    pub fn child_mut(&mut self, i: u8) -> Option<&mut Term> {
        match (self, i) {
            (
                Term::Fst(a)
                | Term::Snd(a)
                | Term::Inl(a)
                | Term::Inr(a)
                | Term::Lam(a)
                | Term::BigLam(_, a)
                | Term::Extr(a, _)
                | Term::Eps(_, a),
                0,
            ) => Some(a),
            (Term::Pair(a, _) | Term::App(a, _) | Term::Inst(a, _) | Term::Rewr(a, _), 0) => {
                Some(a)
            }
            (Term::Pair(_, b) | Term::App(_, b) | Term::Inst(_, b) | Term::Rewr(_, b), 1) => {
                Some(b)
            }
            (Term::Case(s, _, _), 0) => Some(s),
            (Term::Case(_, f, _), 1) => Some(f),
            (Term::Case(_, _, g), 2) => Some(g),
            _ => None,
        }
    }

    pub fn subterm(&self, pos: &Position) -> Option<&Term> {
        let mut t = self;
        for &i in &pos.0 {
            t = *t.children().get(i as usize)?;
        }
        Some(t)
    }

    pub fn subterm_mut(&mut self, pos: &Position) -> Option<&mut Term> {
        let mut t = self;
        for &i in &pos.0 {
            t = t.child_mut(i)?;
        }
        Some(t)
    }

    /// Free names by kind of occurrence.
    pub fn free_names(&self) -> FreeNames {
        let mut out = FreeNames::default();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut FreeNames) {
        match self {
            Term::Var(Var::Free(n)) => {
                out.proofs.insert(n.clone());
            }
            Term::Var(Var::Bound(_)) => {}
            Term::Extr(a, i) | Term::Eps(i, a) => {
                out.individuals.extend(i.as_free().cloned());
                a.collect_free(out);
            }
            Term::PathIntro(p, i, j) => {
                out.individuals.extend(i.as_free().cloned());
                out.individuals.extend(j.as_free().cloned());
                path_free(p, out);
            }
            _ => {
                for c in self.children() {
                    c.collect_free(out);
                }
            }
        }
    }

    /// Whether every bound index points at a binder of the matching kind.
    pub fn is_well_scoped(&self) -> bool {
        fn ind_ok(v: &Var, scope: &[Kind]) -> bool {
            match v {
                Var::Free(_) => true,
                Var::Bound(i) => lookup(scope, *i) == Some(Kind::Individual),
            }
        }
        fn lookup(scope: &[Kind], i: u32) -> Option<Kind> {
            let i = i as usize;
            (i < scope.len()).then(|| scope[scope.len() - 1 - i])
        }
        fn path_ok(p: &Path, scope: &[Kind]) -> bool {
            match p {
                Path::Refl | Path::Step(_) => true,
                Path::Var(Var::Free(_)) => true,
                Path::Var(Var::Bound(i)) => lookup(scope, *i) == Some(Kind::Path),
                Path::Sym(p) => path_ok(p, scope),
                Path::Trans(p, q) => path_ok(p, scope) && path_ok(q, scope),
            }
        }
        fn go(t: &Term, scope: &mut Vec<Kind>) -> bool {
            let under = |t: &Term, kinds: &[Kind], scope: &mut Vec<Kind>| {
                scope.extend_from_slice(kinds);
                let ok = go(t, scope);
                scope.truncate(scope.len() - kinds.len());
                ok
            };
            match t {
                Term::Var(Var::Free(_)) => true,
                Term::Var(Var::Bound(i)) => lookup(scope, *i) == Some(Kind::Proof),
                Term::Pair(a, b) | Term::App(a, b) => go(a, scope) && go(b, scope),
                Term::Fst(a) | Term::Snd(a) | Term::Inl(a) | Term::Inr(a) => go(a, scope),
                Term::Case(s, f, g) => {
                    go(s, scope)
                        && under(f, &[Kind::Proof], scope)
                        && under(g, &[Kind::Proof], scope)
                }
                Term::Lam(b) => under(b, &[Kind::Proof], scope),
                Term::BigLam(_, b) => under(b, &[Kind::Individual], scope),
                Term::Extr(a, i) | Term::Eps(i, a) => ind_ok(i, scope) && go(a, scope),
                Term::Inst(s, d) => go(s, scope) && under(d, &[Kind::Individual, Kind::Proof], scope),
                Term::PathIntro(p, i, j) => path_ok(p, scope) && ind_ok(i, scope) && ind_ok(j, scope),
                Term::Rewr(s, d) => go(s, scope) && under(d, &[Kind::Path], scope),
            }
        }
        go(self, &mut Vec::new())
    }
}

fn path_free(p: &Path, out: &mut FreeNames) {
    match p {
        Path::Var(Var::Free(n)) => {
            out.paths.insert(n.clone());
        }
        Path::Refl | Path::Step(_) | Path::Var(Var::Bound(_)) => {}
        Path::Sym(p) => path_free(p, out),
        Path::Trans(p, q) => {
            path_free(p, out);
            path_free(q, out);
        }
    }
}

/// Free names of a proof term, split by the kind of position they occur in.
#[derive(Default, Debug, Clone)]
pub struct FreeNames {
    pub proofs: BTreeSet<Name>,
    pub individuals: BTreeSet<Name>,
    pub paths: BTreeSet<Name>,
}

impl FreeNames {
    pub fn contains(&self, n: &str) -> bool {
        let n = Name::new(n);
        self.proofs.contains(&n) || self.individuals.contains(&n) || self.paths.contains(&n)
    }

    pub fn kinds_of(&self, n: &Name) -> Vec<Kind> {
        let mut out = Vec::new();
        if self.proofs.contains(n) {
            out.push(Kind::Proof);
        }
        if self.individuals.contains(n) {
            out.push(Kind::Individual);
        }
        if self.paths.contains(n) {
            out.push(Kind::Path);
        }
        out
    }
}

/// Errors from parsing and from well-formedness checks against a signature.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown sort `{0}`")]
    UnknownSort(Name),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(Name),
    #[error("arity mismatch: `{name}` expects {expected} argument(s), found {found}")]
    Arity {
        name: Name,
        expected: usize,
        found: usize,
    },
    #[error("sort mismatch: `{name}` has sort {found}, expected {expected}")]
    SortMismatch {
        name: String,
        expected: Sort,
        found: Sort,
    },
    #[error("unbound individual `{0}`")]
    UnboundIndividual(Name),
    #[error("duplicate declaration of `{0}`")]
    Duplicate(Name),
    #[error("kind mismatch: `{name}` is used as a {used} but the value is a {value}")]
    KindMismatch { name: Name, used: Kind, value: Kind },
    #[error("negated atoms are not allowed here")]
    NegatedAtom,
}

impl SyntaxError {
    /// Shift a parse position by a line/column offset (for embedded text).
    pub fn offset(self, line: usize, column: usize) -> Self {
        match self {
            SyntaxError::Parse {
                line: l,
                column: c,
                message,
            } => SyntaxError::Parse {
                line: l + line,
                column: if l == 1 { c + column } else { c },
                message,
            },
            e => e,
        }
    }
}
