//! Particle-rule dialogues over proof terms.
//!
//! An assertion is a judgement `t : F`. The attacks on it are the
//! eliminations for the main connective of `F`, and the defense is what the
//! matching constructor of `t` (after weak-head reduction) already contains.
//! The defense table in [`defend`] is written out directly; the
//! [`check_correspondence`] report compares it against [`crate::reduce`].

use std::fmt;

use thiserror::Error;

use crate::reduce::{self, ReduceError, Redex};
use crate::syntax::{
    instantiate, parse_individual, parse_proofterm, Context, Decl, Formula, Individual, Path,
    Position, Sort, SyntaxError, Term, Value, Var,
};
use crate::typecheck::{self, TypeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DialogueError {
    #[error("atomic: no attacks on {0}")]
    Atomic(Formula),
    #[error("`{attack}` is not an attack on {formula}")]
    Illegal { attack: String, formula: Formula },
    #[error("payload rejected: {0}")]
    Payload(TypeError),
    #[error("assertion {0} has no canonical form")]
    NotCanonical(Term),
    #[error("ill-typed assertion: {0}")]
    IllTyped(TypeError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error("the dialogue is already over")]
    Closed,
}

/// Main connectives that admit attacks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connective {
    And,
    Or,
    Implies,
    Forall,
    Exists,
    Id,
}

impl Connective {
    pub fn of(f: &Formula) -> Option<Connective> {
        Some(match f {
            Formula::And(..) => Connective::And,
            Formula::Or(..) => Connective::Or,
            Formula::Implies(..) => Connective::Implies,
            Formula::Forall(..) => Connective::Forall,
            Formula::Exists(..) => Connective::Exists,
            Formula::Id(..) => Connective::Id,
            Formula::Atom(..) | Formula::NegAtom(..) => return None,
        })
    }
}

/// The form of an attack, before any payload is chosen.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AttackShape {
    Left,
    Right,
    Query,
    /// A proof of the antecedent.
    Proof(Formula),
    /// An individual of the quantified sort.
    Individual(Sort),
}

impl fmt::Display for AttackShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackShape::Left => f.write_str("L?"),
            AttackShape::Right => f.write_str("R?"),
            AttackShape::Query => f.write_str("?"),
            AttackShape::Proof(a) => write!(f, "! <proof of {a}>"),
            AttackShape::Individual(s) => write!(f, "@ <individual of {s}>"),
        }
    }
}

/// A concrete attack.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Attack {
    Left,
    Right,
    Query,
    Proof(Term),
    Individual(Individual),
}

impl fmt::Display for Attack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Attack::Left => f.write_str("L?"),
            Attack::Right => f.write_str("R?"),
            Attack::Query => f.write_str("?"),
            Attack::Proof(t) => write!(f, "! {t}"),
            Attack::Individual(Var::Free(n)) => write!(f, "@ {n}"),
            Attack::Individual(v) => write!(f, "@ {v:?}"),
        }
    }
}

/// One particle rule: the attacks on a connective and what each defense is.
#[derive(Clone, Debug)]
pub struct ParticleRule {
    pub connective: Connective,
    pub attacks: Vec<&'static str>,
    pub defenses: Vec<&'static str>,
}

pub fn particle_rules() -> Vec<ParticleRule> {
    let rule = |connective, attacks: &[&'static str], defenses: &[&'static str]| ParticleRule {
        connective,
        attacks: attacks.to_vec(),
        defenses: defenses.to_vec(),
    };
    vec![
        rule(Connective::And, &["L?", "R?"], &["a : A", "b : B"]),
        rule(Connective::Or, &["?"], &["a : A or b : B, as introduced"]),
        rule(Connective::Implies, &["a : A ?"], &["b(a/x) : B"]),
        rule(Connective::Forall, &["a : D ?"], &["f(a/x) : P(a)"]),
        rule(Connective::Exists, &["?"], &["a : D and f(a) : P(a)"]),
        rule(Connective::Id, &["?"], &["a =_r b : D"]),
    ]
}

pub fn attacks_of(formula: &Formula) -> Result<Vec<AttackShape>, DialogueError> {
    Ok(match formula {
        Formula::And(..) => vec![AttackShape::Left, AttackShape::Right],
        Formula::Or(..) | Formula::Exists(..) | Formula::Id(..) => vec![AttackShape::Query],
        Formula::Implies(a, _) => vec![AttackShape::Proof((**a).clone())],
        Formula::Forall(s, _) => vec![AttackShape::Individual(s.clone())],
        Formula::Atom(..) | Formula::NegAtom(..) => {
            return Err(DialogueError::Atomic(formula.clone()))
        }
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assertion {
    pub term: Term,
    pub formula: Formula,
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.term, self.formula)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Defense {
    /// The dialogue continues on this assertion.
    Assert(Assertion),
    /// The witness is revealed together with the proof about it.
    Witness {
        witness: Individual,
        sort: Sort,
        assertion: Assertion,
    },
    /// The path of an identity proof is disclosed; nothing more to attack.
    Equality {
        path: Path,
        lhs: Individual,
        rhs: Individual,
        sort: Sort,
    },
}

impl Defense {
    /// The defense as a single proof term, for comparison with reduction.
    pub fn term(&self) -> Term {
        match self {
            Defense::Assert(a) | Defense::Witness { assertion: a, .. } => a.term.clone(),
            Defense::Equality { path, lhs, rhs, .. } => {
                Term::PathIntro(path.clone(), lhs.clone(), rhs.clone())
            }
        }
    }

    pub fn into_term(self) -> Term {
        match self {
            Defense::Assert(a) | Defense::Witness { assertion: a, .. } => a.term,
            Defense::Equality { path, lhs, rhs, .. } => Term::PathIntro(path, lhs, rhs),
        }
    }

    pub fn continuation(&self) -> Option<&Assertion> {
        match self {
            Defense::Assert(a) | Defense::Witness { assertion: a, .. } => Some(a),
            Defense::Equality { .. } => None,
        }
    }
}

fn ind_text(v: &Individual) -> String {
    match v {
        Var::Free(n) => n.to_string(),
        Var::Bound(i) => format!("#{i}"),
    }
}

impl fmt::Display for Defense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Defense::Assert(a) => write!(f, "DEFEND {a}"),
            Defense::Witness {
                witness,
                sort,
                assertion,
            } => write!(f, "DEFEND {} : {sort}\nDEFEND {assertion}", ind_text(witness)),
            Defense::Equality {
                path,
                lhs,
                rhs,
                sort,
            } => write!(f, "DEFEND {path} : {} = {} : {sort}", ind_text(lhs), ind_text(rhs)),
        }
    }
}

/// An attack and its defense.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exchange {
    pub attack: Attack,
    pub defense: Defense,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Open,
    AtomicClosed,
    Failed(String),
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Open => f.write_str("open"),
            Status::AtomicClosed => f.write_str("atomic-closed"),
            Status::Failed(why) => write!(f, "failed: {why}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DialogueState {
    pub context: Context,
    /// The opening assertion.
    pub initial: Assertion,
    /// The assertion under attack, if the dialogue goes on.
    pub current: Option<Assertion>,
    pub transcript: Vec<Exchange>,
    pub status: Status,
}

impl DialogueState {
    /// Open a dialogue on a judgement, which must check.
    pub fn new(ctx: &Context, term: &Term, formula: &Formula) -> Result<Self, DialogueError> {
        typecheck::check(ctx, term, formula).map_err(DialogueError::IllTyped)?;
        Ok(Self::open(ctx, term, formula))
    }

    /// Open a dialogue without checking the judgement.
    fn open(ctx: &Context, term: &Term, formula: &Formula) -> Self {
        let initial = Assertion {
            term: term.clone(),
            formula: formula.clone(),
        };
        let status = if formula.is_literal() {
            Status::AtomicClosed
        } else {
            Status::Open
        };
        DialogueState {
            context: ctx.clone(),
            current: Some(initial.clone()),
            initial,
            transcript: Vec::new(),
            status,
        }
    }

    pub fn is_over(&self) -> bool {
        self.status != Status::Open
    }

    /// The attacks available now; empty once the dialogue is over.
    pub fn legal_attacks(&self) -> Vec<AttackShape> {
        match (&self.current, &self.status) {
            (Some(a), Status::Open) => attacks_of(&a.formula).unwrap_or_default(),
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for DialogueState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ASSERT {}", self.initial)?;
        for x in &self.transcript {
            writeln!(f, "ATTACK {}", x.attack)?;
            writeln!(f, "{}", x.defense)?;
        }
        writeln!(f, "END {}", self.status)
    }
}

/// The destructor an attack applies to the assertion `t`.
pub fn destructor(attack: &Attack, formula: &Formula, t: &Term) -> Result<Term, DialogueError> {
    let t = Box::new(t.clone());
    let g = || Box::new(Term::Var(Var::Bound(0)));
    Ok(match (attack, formula) {
        (Attack::Left, Formula::And(..)) => Term::Fst(t),
        (Attack::Right, Formula::And(..)) => Term::Snd(t),
        (Attack::Query, Formula::Or(..)) => Term::Case(t, g(), g()),
        (Attack::Proof(a), Formula::Implies(..)) => Term::App(t, Box::new(a.clone())),
        (Attack::Individual(i), Formula::Forall(..)) => Term::Extr(t, i.clone()),
        (Attack::Query, Formula::Exists(..)) => Term::Inst(t, g()),
        (Attack::Query, Formula::Id(_, a, b)) => {
            Term::Rewr(t, Box::new(Term::PathIntro(Path::Var(Var::Bound(0)), a.clone(), b.clone())))
        }
        _ => {
            return Err(DialogueError::Illegal {
                attack: attack.to_string(),
                formula: formula.clone(),
            })
        }
    })
}

fn check_payload(ctx: &Context, attack: &Attack, formula: &Formula) -> Result<(), DialogueError> {
    match (attack, formula) {
        (Attack::Proof(Term::Var(Var::Free(n))), Formula::Implies(a, _)) if ctx.hypothesis(n) == Some(&**a) => Ok(()),
        (Attack::Proof(p), Formula::Implies(a, _)) => {
            typecheck::check(ctx, p, a).map_err(DialogueError::Payload)
        }
        (Attack::Individual(i), Formula::Forall(s, _)) => {
            let found = match i {
                Var::Free(n) => ctx.individual_sort(n),
                Var::Bound(_) => None,
            };
            match found {
                Some(found) if found == s => Ok(()),
                Some(found) => Err(DialogueError::Payload(TypeError::Sort {
                    what: ind_text(i),
                    expected: s.clone(),
                    found: found.clone(),
                })),
                None => Err(DialogueError::Payload(TypeError::UnboundIndividual(ind_text(i).into()))),
            }
        }
        _ => Ok(()),
    }
}

/// The defense of a canonical term against a legal attack, read off the
/// constructor.
fn defense_of(canonical: &Term, formula: &Formula, attack: &Attack) -> Option<Defense> {
    let next = |term: Term, formula: Formula| Defense::Assert(Assertion { term, formula });
    Some(match (canonical, formula, attack) {
        (Term::Pair(a, _), Formula::And(fa, _), Attack::Left) => next((**a).clone(), (**fa).clone()),
        (Term::Pair(_, b), Formula::And(_, fb), Attack::Right) => next((**b).clone(), (**fb).clone()),
        (Term::Inl(a), Formula::Or(fa, _), Attack::Query) => next((**a).clone(), (**fa).clone()),
        (Term::Inr(b), Formula::Or(_, fb), Attack::Query) => next((**b).clone(), (**fb).clone()),
        (Term::Lam(body), Formula::Implies(_, fb), Attack::Proof(a)) => {
            next(instantiate(body, &[Value::Proof(a.clone())]), (**fb).clone())
        }
        (Term::BigLam(_, body), Formula::Forall(_, fb), Attack::Individual(i)) => {
            next(instantiate(body, &[Value::Individual(i.clone())]), fb.open(i))
        }
        (Term::Eps(i, p), Formula::Exists(s, fb), Attack::Query) => Defense::Witness {
            witness: i.clone(),
            sort: s.clone(),
            assertion: Assertion {
                term: (**p).clone(),
                formula: fb.open(i),
            },
        },
        (Term::PathIntro(r, _, _), Formula::Id(s, a, b), Attack::Query) => Defense::Equality {
            path: r.clone(),
            lhs: a.clone(),
            rhs: b.clone(),
            sort: s.clone(),
        },
        _ => return None,
    })
}

/// Weak-head normalize an assertion term, requiring a canonical result.
pub fn reveal(t: &Term) -> Result<Term, DialogueError> {
    if t.is_canonical() {
        return Ok(t.clone());
    }
    let trace = reduce::whnf(t, reduce::DERIVE_BOUND)?;
    let end = trace.end();
    if end.is_canonical() {
        Ok(end.clone())
    } else {
        Err(DialogueError::NotCanonical(end.clone()))
    }
}

/// Answer one attack on the current assertion.
pub fn defend(state: &DialogueState, attack: &Attack) -> Result<DialogueState, DialogueError> {
    let current = match (&state.current, &state.status) {
        (Some(a), Status::Open) => a,
        _ => return Err(DialogueError::Closed),
    };
    let defense = respond(&state.context, current, attack)?;
    let mut next = state.clone();
    next.current = defense.continuation().cloned();
    next.status = match &next.current {
        Some(a) if !a.formula.is_literal() => Status::Open,
        _ => Status::AtomicClosed,
    };
    next.transcript.push(Exchange {
        attack: attack.clone(),
        defense,
    });
    Ok(next)
}

fn respond(ctx: &Context, current: &Assertion, attack: &Attack) -> Result<Defense, DialogueError> {
    let formula = &current.formula;
    if formula.is_literal() {
        return Err(DialogueError::Atomic(formula.clone()));
    }
    let shapes = attacks_of(formula)?;
    let legal = shapes.iter().any(|s| {
        matches!(
            (s, attack),
            (AttackShape::Left, Attack::Left)
                | (AttackShape::Right, Attack::Right)
                | (AttackShape::Query, Attack::Query)
                | (AttackShape::Proof(_), Attack::Proof(_))
                | (AttackShape::Individual(_), Attack::Individual(_))
        )
    });
    if !legal {
        return Err(DialogueError::Illegal {
            attack: attack.to_string(),
            formula: formula.clone(),
        });
    }
    check_payload(ctx, attack, formula)?;
    let revealed;
    let canonical = if current.term.is_canonical() {
        &current.term
    } else {
        revealed = reveal(&current.term)?;
        &revealed
    };
    defense_of(canonical, formula, attack).ok_or_else(|| DialogueError::NotCanonical(canonical.clone()))
}

/// Chooses the next attack. Returning `None` ends the dialogue as it stands.
pub trait Attacker {
    fn choose(&mut self, state: &DialogueState) -> Option<Attack>;
}

/// Plays a fixed list of moves in order.
pub struct Scripted {
    moves: std::vec::IntoIter<Attack>,
}

impl Scripted {
    pub fn new(moves: Vec<Attack>) -> Self {
        Scripted {
            moves: moves.into_iter(),
        }
    }
}

impl Attacker for Scripted {
    fn choose(&mut self, _: &DialogueState) -> Option<Attack> {
        self.moves.next()
    }
}

/// Play until the attacker stops or the dialogue is over. A failure to
/// reveal a constructor ends the dialogue with status `failed`; illegal or
/// ill-typed moves are errors.
pub fn run_dialogue(
    ctx: &Context,
    term: &Term,
    formula: &Formula,
    attacker: &mut dyn Attacker,
) -> Result<DialogueState, DialogueError> {
    let mut state = DialogueState::new(ctx, term, formula)?;
    while let Some(attack) = attacker.choose(&state) {
        if state.is_over() {
            return Err(DialogueError::Closed);
        }
        match defend(&state, &attack) {
            Ok(next) => state = next,
            Err(DialogueError::NotCanonical(t)) => {
                state.status = Status::Failed(format!("{t} has no canonical form"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(state)
}

/// Payloads available to an exhaustive attacker.
#[derive(Clone, Debug, Default)]
pub struct Pool {
    pub proofs: Vec<Term>,
    pub individuals: Vec<Individual>,
}

impl Pool {
    pub fn from_moves(moves: &[Attack]) -> Self {
        let mut pool = Pool::default();
        for m in moves {
            match m {
                Attack::Proof(t) => pool.proofs.push(t.clone()),
                Attack::Individual(i) => pool.individuals.push(i.clone()),
                _ => {}
            }
        }
        pool
    }
}

/// The concrete attacks on the current assertion drawn from `pool`, in
/// shape order, keeping only payloads that fit.
pub fn pool_attacks(state: &DialogueState, pool: &Pool) -> Vec<Attack> {
    let Some(current) = &state.current else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for shape in state.legal_attacks() {
        let candidates: Vec<Attack> = match shape {
            AttackShape::Left => vec![Attack::Left],
            AttackShape::Right => vec![Attack::Right],
            AttackShape::Query => vec![Attack::Query],
            AttackShape::Proof(_) => pool.proofs.iter().cloned().map(Attack::Proof).collect(),
            AttackShape::Individual(_) => {
                pool.individuals.iter().cloned().map(Attack::Individual).collect()
            }
        };
        out.extend(
            candidates
                .into_iter()
                .filter(|a| check_payload(&state.context, a, &current.formula).is_ok()),
        );
    }
    out
}

/// Every terminal state reachable by attacking with moves from `pool`,
/// depth first in attack order.
pub fn exhaustive(
    ctx: &Context,
    term: &Term,
    formula: &Formula,
    pool: &Pool,
) -> Result<Vec<DialogueState>, DialogueError> {
    fn go(state: DialogueState, pool: &Pool, out: &mut Vec<DialogueState>) -> Result<(), DialogueError> {
        let attacks = if state.is_over() { Vec::new() } else { pool_attacks(&state, pool) };
        if attacks.is_empty() {
            out.push(state);
            return Ok(());
        }
        for a in attacks {
            match defend(&state, &a) {
                Ok(next) => go(next, pool, out)?,
                Err(DialogueError::NotCanonical(t)) => {
                    let mut failed = state.clone();
                    failed.status = Status::Failed(format!("{t} has no canonical form"));
                    out.push(failed);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    go(DialogueState::new(ctx, term, formula)?, pool, &mut out)?;
    Ok(out)
}

/// Parse script or pool lines: `L?`, `R?`, `?`, `! <proofterm>`,
/// `@ <individual>`. Blank lines and `#` comments are skipped.
pub fn parse_moves(text: &str) -> Result<Vec<Attack>, SyntaxError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let at = |e: SyntaxError| e.offset(i, raw.find(line).unwrap_or(0) + 2);
        let m = match line {
            "" => continue,
            "L?" => Attack::Left,
            "R?" => Attack::Right,
            "?" => Attack::Query,
            _ if line.starts_with('!') => Attack::Proof(parse_proofterm(line[1..].trim()).map_err(at)?),
            _ if line.starts_with('@') => {
                Attack::Individual(parse_individual(line[1..].trim()).map_err(at)?)
            }
            _ => {
                return Err(SyntaxError::Parse {
                    line: i + 1,
                    column: 1,
                    message: format!("unrecognised move `{line}`"),
                })
            }
        };
        out.push(m);
    }
    Ok(out)
}

/// One comparison in a correspondence report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub attack: Attack,
    pub defense: Option<Term>,
    pub reduct: Option<Term>,
}

impl Comparison {
    pub fn matches(&self) -> bool {
        self.defense.is_some() && self.defense == self.reduct
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub assertion: Assertion,
    pub comparisons: Vec<Comparison>,
}

impl Report {
    pub fn matched(&self) -> usize {
        self.comparisons.iter().filter(|c| c.matches()).count()
    }

    pub fn all_match(&self) -> bool {
        self.matched() == self.comparisons.len()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |t: &Option<Term>| t.as_ref().map_or("-".to_string(), Term::to_string);
        for c in &self.comparisons {
            let mark = if c.matches() { "ok" } else { "MISMATCH" };
            writeln!(f, "{mark} {} : defense {} / reduct {}", c.attack, show(&c.defense), show(&c.reduct))?;
        }
        write!(f, "{}/{} match", self.matched(), self.comparisons.len())
    }
}

/// For every legal attack on `term : formula`, compare the defense with the
/// one-step reduct of the attacking destructor applied to `term`. Implication
/// attacks use a fresh hypothesis of the antecedent; universal attacks use
/// every individual of the sort plus a fresh one. The judgement is assumed
/// to check; it is not checked again.
pub fn check_correspondence(ctx: &Context, term: &Term, formula: &Formula) -> Report {
    let mut ctx = ctx.clone();
    let attacks: Vec<Attack> = match attacks_of(formula) {
        Err(_) => Vec::new(),
        Ok(shapes) => shapes
            .into_iter()
            .flat_map(|shape| match shape {
                AttackShape::Left => vec![Attack::Left],
                AttackShape::Right => vec![Attack::Right],
                AttackShape::Query => vec![Attack::Query],
                AttackShape::Proof(a) => {
                    let name = ctx.fresh("u");
                    ctx.push(Decl::Hypothesis {
                        name: name.clone(),
                        formula: a,
                    })
                    .expect("fresh hypothesis");
                    vec![Attack::Proof(Term::Var(Var::Free(name)))]
                }
                AttackShape::Individual(s) => {
                    let name = ctx.fresh("i");
                    let mut inds: Vec<Attack> = ctx
                        .signature()
                        .constants()
                        .filter(|(_, cs)| **cs == s)
                        .map(|(n, _)| Attack::Individual(Var::Free(n.clone())))
                        .collect();
                    for decl in ctx.decls() {
                        if let Decl::Individual { name, sort } = decl {
                            if *sort == s {
                                inds.push(Attack::Individual(Var::Free(name.clone())));
                            }
                        }
                    }
                    ctx.push(Decl::Individual {
                        name: name.clone(),
                        sort: s,
                    })
                    .expect("fresh individual");
                    inds.push(Attack::Individual(Var::Free(name)));
                    inds
                }
            })
            .collect(),
    };
    let assertion = Assertion {
        term: term.clone(),
        formula: formula.clone(),
    };
    let revealed = if term.is_canonical() {
        Ok(std::borrow::Cow::Borrowed(term))
    } else {
        reveal(term).map(std::borrow::Cow::Owned)
    };
    let comparisons = attacks
        .into_iter()
        .map(|attack| {
            let defense = respond(&ctx, &assertion, &attack).ok().map(Defense::into_term);
            let reduct = revealed
                .as_ref()
                .ok()
                .and_then(|c| destructor(&attack, formula, c).ok())
                .and_then(|d| {
                    let rule = reduce::root_rule(&d)?;
                    reduce::beta_step(&d, &Redex { position: Position::root(), rule }).ok()
                });
            Comparison {
                attack,
                defense,
                reduct,
            }
        })
        .collect();
    Report { assertion, comparisons }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula, parse_judgement, parse_signature};
    use std::sync::Arc;

    const SIG: &str = "sort D\npred A/0\npred B/0\npred P/1 : D\nconst c : D\nconst d : D\n";

    fn judgement(text: &str) -> (Context, Term, Formula) {
        let j = parse_judgement(Arc::new(parse_signature(SIG).unwrap()), text).unwrap();
        (j.context, j.term, j.formula)
    }

    fn play(text: &str, script: &str) -> DialogueState {
        let (ctx, t, f) = judgement(text);
        run_dialogue(&ctx, &t, &f, &mut Scripted::new(parse_moves(script).unwrap())).unwrap()
    }

    #[test]
    fn attack_tables() {
        let f = |s| attacks_of(&parse_formula(s).unwrap());
        assert_eq!(f("A & B").unwrap(), vec![AttackShape::Left, AttackShape::Right]);
        assert_eq!(f("A -> B").unwrap(), vec![AttackShape::Proof(parse_formula("A").unwrap())]);
        assert_eq!(f("A | B").unwrap(), vec![AttackShape::Query]);
        assert_eq!(f("forall x:D. P(x)").unwrap(), vec![AttackShape::Individual(Sort::new("D"))]);
        assert_eq!(f("exists x:D. P(x)").unwrap(), vec![AttackShape::Query]);
        assert_eq!(f("Id(D, c, c)").unwrap(), vec![AttackShape::Query]);
        assert_eq!(f("P(c)").unwrap_err().to_string(), "atomic: no attacks on P(c)");
        assert_eq!(particle_rules().len(), 6);
    }

    #[test]
    fn conjunction_left() {
        let s = play("a : A\nb : B\n|- pair(a,b) : A & B", "L?");
        assert_eq!(s.status, Status::AtomicClosed);
        assert_eq!(s.to_string(), "ASSERT pair(a,b) : A & B\nATTACK L?\nDEFEND a : A\nEND atomic-closed\n");
    }

    #[test]
    fn literal_closes_at_once() {
        let s = play("a : A\n|- a : A", "");
        assert_eq!(s.status, Status::AtomicClosed);
        assert!(s.transcript.is_empty());
    }

    #[test]
    fn implication_then_conjunction() {
        let s = play("a : A\n|- lam(x. pair(x,x)) : A -> A & A", "! a\nL?");
        assert_eq!(s.current.unwrap().to_string(), "a : A");
        assert_eq!(s.status, Status::AtomicClosed);
    }

    #[test]
    fn universal_and_existential() {
        let s = play("h : forall x:D. P(x)\n|- Lam(x:D. extr(h,x)) : forall x:D. P(x)", "@ c");
        assert_eq!(s.current.unwrap().to_string(), "extr(h,c) : P(c)");
        let s = play("p : P(c)\n|- eps(c, p) : exists x:D. P(x)", "?");
        assert_eq!(s.to_string(), "ASSERT eps(c,p) : exists x0:D. P(x0)\nATTACK ?\nDEFEND c : D\nDEFEND p : P(c)\nEND atomic-closed\n");
    }

    #[test]
    fn disjunction_follows_the_constructor() {
        let s = play("b : B\n|- inr(b) : A | B", "?");
        assert_eq!(s.current.unwrap().to_string(), "b : B");
    }

    #[test]
    fn identity_discloses_the_path() {
        let s = play("r : c = d : D\n|- path(r, c, d) : Id(D, c, d)", "?");
        assert_eq!(s.status, Status::AtomicClosed);
        assert!(s.current.is_none());
        assert!(s.to_string().contains("DEFEND r : c = d : D"), "{s}");
    }

    #[test]
    fn noncanonical_assertions_are_reduced_first() {
        let s = play("a : A\nb : B\n|- fst(pair(pair(a,b),b)) : A & B", "R?");
        assert_eq!(s.current.unwrap().to_string(), "b : B");
    }

    #[test]
    fn neutral_assertion_fails() {
        let s = play("s : A & B\n|- s : A & B", "L?");
        assert!(matches!(s.status, Status::Failed(_)));
    }

    #[test]
    fn bad_moves_are_errors() {
        let (ctx, t, f) = judgement("a : A\nb : B\n|- pair(a,b) : A & B");
        let mut sc = Scripted::new(vec![Attack::Query]);
        assert!(matches!(run_dialogue(&ctx, &t, &f, &mut sc), Err(DialogueError::Illegal { .. })));
        let (ctx, t, f) = judgement("a : A\nb : B\n|- lam(x. x) : A -> A");
        let mut sc = Scripted::new(vec![Attack::Proof(Term::var("b"))]);
        assert!(matches!(run_dialogue(&ctx, &t, &f, &mut sc), Err(DialogueError::Payload(_))));
        let mut sc = Scripted::new(vec![Attack::Proof(Term::var("a")), Attack::Query]);
        assert!(matches!(run_dialogue(&ctx, &t, &f, &mut sc), Err(DialogueError::Closed)));
    }

    #[test]
    fn exhaustive_attacker_covers_every_branch() {
        let (ctx, t, f) = judgement("a : A\nb : B\n|- Lam(x:D. pair(a,b)) : forall x:D. A & B");
        let pool = Pool::from_moves(&parse_moves("@ c\n@ d").unwrap());
        let ends = exhaustive(&ctx, &t, &f, &pool).unwrap();
        assert_eq!(ends.len(), 4);
        assert!(ends.iter().all(|s| s.status == Status::AtomicClosed));
    }

    #[test]
    fn correspondence_reports() {
        let (ctx, t, f) = judgement("a : A\nb : B\n|- pair(a,b) : A & B");
        let r = check_correspondence(&ctx, &t, &f);
        assert_eq!(r.to_string().lines().last(), Some("2/2 match"));
        let (ctx, t, f) = judgement("a : A\n|- inl(a) : A | B");
        assert!(check_correspondence(&ctx, &t, &f).all_match());
        let (ctx, t, f) = judgement("|- Lam(x:D. eps(x, path(rho, x, x))) : forall x:D. exists y:D. Id(D, x, y)");
        let r = check_correspondence(&ctx, &t, &f);
        assert_eq!(r.comparisons.len(), 3);
        assert!(r.all_match(), "{r}");
    }

    #[test]
    fn move_files() {
        let m = parse_moves("L?\n# note\n! pair(a, b)\n@ c\n?\nR?").unwrap();
        assert_eq!(m.len(), 5);
        assert_eq!(m[1].to_string(), "! pair(a,b)");
        assert!(parse_moves("X?").is_err());
    }
}
