//! β-reduction: redex search, contraction, normalization with recorded
//! computational paths, and path replay.

mod explore;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{
    instantiate, Context, Formula, Path, PathAtom, Position, Rule, Step, Term, Value,
};
use crate::typecheck::{self, TypeError};

pub use explore::{enumerate_traces, explore, Exploration, Explorer};

/// Step bound used by `derive_path`, which needs full normal forms.
pub const DERIVE_BOUND: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("no {rule} redex at {position}")]
    Stale { rule: Rule, position: Position },
    #[error("step bound of {bound} exceeded")]
    StepBound { bound: usize },
    #[error("exploration limit of {0} terms exceeded")]
    ExplorationLimit(usize),
    #[error("ill-typed input: {0}")]
    IllTyped(#[from] TypeError),
    #[error("the step {0} cannot be replayed backwards: it records no redex")]
    NoRedex(String),
    #[error("the step {step} does not match its recorded redex")]
    RecordMismatch { step: String },
    #[error("path variable `{0}` cannot be replayed on a proof")]
    PathVariable(String),
    #[error("path ends at {found}, expected {expected}")]
    Endpoint { found: String, expected: String },
}

/// A redex: where it is and which rule contracts it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Redex {
    pub position: Position,
    pub rule: Rule,
}

impl fmt::Display for Redex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}", self.rule, self.position)
    }
}

/// The rule whose left-hand side `t` matches at its root.
pub fn root_rule(t: &Term) -> Option<Rule> {
    Some(match t {
        Term::Fst(s) if matches!(**s, Term::Pair(..)) => Rule::BetaFst,
        Term::Snd(s) if matches!(**s, Term::Pair(..)) => Rule::BetaSnd,
        Term::Case(s, ..) if matches!(**s, Term::Inl(_)) => Rule::BetaCaseL,
        Term::Case(s, ..) if matches!(**s, Term::Inr(_)) => Rule::BetaCaseR,
        Term::App(f, _) if matches!(**f, Term::Lam(_)) => Rule::BetaApp,
        Term::Extr(f, _) if matches!(**f, Term::BigLam(..)) => Rule::BetaExtr,
        Term::Inst(e, _) if matches!(**e, Term::Eps(..)) => Rule::BetaInst,
        Term::Rewr(e, _) if matches!(**e, Term::PathIntro(..)) => Rule::BetaRewr,
        _ => return None,
    })
}

/// Contract a root redex.
pub fn contract(t: &Term) -> Option<(Rule, Term)> {
    let rule = root_rule(t)?;
    let reduct = match t {
        Term::Fst(s) | Term::Snd(s) => {
            let Term::Pair(a, b) = &**s else { unreachable!() };
            if rule == Rule::BetaFst { (**a).clone() } else { (**b).clone() }
        }
        Term::Case(s, f, g) => match &**s {
            Term::Inl(a) => instantiate(f, &[Value::Proof((**a).clone())]),
            Term::Inr(b) => instantiate(g, &[Value::Proof((**b).clone())]),
            _ => unreachable!(),
        },
        Term::App(f, a) => {
            let Term::Lam(body) = &**f else { unreachable!() };
            instantiate(body, &[Value::Proof((**a).clone())])
        }
        Term::Extr(f, i) => {
            let Term::BigLam(_, body) = &**f else { unreachable!() };
            instantiate(body, &[Value::Individual(i.clone())])
        }
        Term::Inst(e, d) => {
            let Term::Eps(i, p) = &**e else { unreachable!() };
            instantiate(d, &[Value::Proof((**p).clone()), Value::Individual(i.clone())])
        }
        Term::Rewr(e, d) => {
            let Term::PathIntro(r, _, _) = &**e else { unreachable!() };
            instantiate(d, &[Value::Path(r.clone())])
        }
        _ => unreachable!(),
    };
    Some((rule, reduct))
}

/// All redexes, leftmost-outermost first (pre-order, binders included).
pub fn find_redexes(t: &Term) -> Vec<Redex> {
    fn go(t: &Term, pos: &mut Vec<u8>, out: &mut Vec<Redex>) {
        if let Some(rule) = root_rule(t) {
            out.push(Redex {
                position: Position(pos.clone()),
                rule,
            });
        }
        for (i, c) in t.children().into_iter().enumerate() {
            pos.push(i as u8);
            go(c, pos, out);
            pos.pop();
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// The leftmost-outermost redex, if any.
pub fn first_redex(t: &Term) -> Option<Redex> {
    fn go(t: &Term, pos: &mut Vec<u8>) -> Option<Redex> {
        if let Some(rule) = root_rule(t) {
            return Some(Redex {
                position: Position(pos.clone()),
                rule,
            });
        }
        for (i, c) in t.children().into_iter().enumerate() {
            pos.push(i as u8);
            if let Some(r) = go(c, pos) {
                return Some(r);
            }
            pos.pop();
        }
        None
    }
    go(t, &mut Vec::new())
}

pub fn is_normal(t: &Term) -> bool {
    first_redex(t).is_none()
}

fn replace_at(t: &Term, pos: &Position, new: Term) -> Term {
    if pos.0.is_empty() {
        return new;
    }
    let mut out = t.clone();
    *out.subterm_mut(pos).expect("position checked by caller") = new;
    out
}

/// One contraction; also returns the recorded step.
pub fn beta_step_recorded(t: &Term, redex: &Redex) -> Result<(Term, Step), ReduceError> {
    let stale = || ReduceError::Stale {
        rule: redex.rule,
        position: redex.position.clone(),
    };
    let sub = t.subterm(&redex.position).ok_or_else(stale)?;
    match contract(sub) {
        Some((rule, reduct)) if rule == redex.rule => {
            let step = Step {
                rule,
                position: redex.position.clone(),
                redex: Some(Arc::new(sub.clone())),
            };
            Ok((replace_at(t, &redex.position, reduct), step))
        }
        _ => Err(stale()),
    }
}

/// Contract the redex at `redex.position`.
pub fn beta_step(t: &Term, redex: &Redex) -> Result<Term, ReduceError> {
    let sub = t.subterm(&redex.position);
    match sub.and_then(contract) {
        Some((rule, reduct)) if rule == redex.rule => Ok(replace_at(t, &redex.position, reduct)),
        _ => Err(ReduceError::Stale {
            rule: redex.rule,
            position: redex.position.clone(),
        }),
    }
}

/// One line of a reduction trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub step: Step,
    pub result: Term,
}

impl TraceStep {
    pub fn redex(&self) -> Redex {
        Redex {
            position: self.step.position.clone(),
            rule: self.step.rule,
        }
    }
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} : {}", self.redex(), self.result)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub start: Term,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn new(start: Term) -> Self {
        Trace {
            start,
            steps: Vec::new(),
        }
    }

    pub fn end(&self) -> &Term {
        self.steps.last().map_or(&self.start, |s| &s.result)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The composed path of the recorded steps.
    pub fn path(&self) -> Path {
        let atoms: Vec<_> = self
            .steps
            .iter()
            .map(|s| (PathAtom::Step(s.step.clone()), false))
            .collect();
        Path::from_atoms(&atoms)
    }

    fn push(&mut self, redex: &Redex) -> Result<(), ReduceError> {
        let (result, step) = beta_step_recorded(self.end(), redex)?;
        self.steps.push(TraceStep { step, result });
        Ok(())
    }
}

/// The default step bound: twice the term size.
pub fn default_bound(t: &Term) -> usize {
    2 * t.size()
}

/// Leftmost-outermost reduction to a redex-free term.
pub fn normalize(t: &Term, bound: usize) -> Result<Trace, ReduceError> {
    let mut trace = Trace::new(t.clone());
    while let Some(r) = first_redex(trace.end()) {
        if trace.len() == bound {
            return Err(ReduceError::StepBound { bound });
        }
        trace.push(&r)?;
    }
    Ok(trace)
}

/// As `normalize`, after checking `ctx ⊢ t : formula`.
pub fn normalize_checked(
    ctx: &Context,
    t: &Term,
    formula: &Formula,
    bound: usize,
) -> Result<Trace, ReduceError> {
    typecheck::check(ctx, t, formula)?;
    normalize(t, bound)
}

/// The position of the head redex: the one a weak-head evaluator contracts
/// next, found by following destructor scrutinees from the root.
pub fn head_redex(t: &Term) -> Option<Redex> {
    let mut pos = Vec::new();
    let mut cur = t;
    loop {
        if let Some(rule) = root_rule(cur) {
            return Some(Redex {
                position: Position(pos),
                rule,
            });
        }
        match cur {
            Term::Fst(s) | Term::Snd(s) | Term::Case(s, ..) | Term::App(s, _) | Term::Extr(s, _)
            | Term::Inst(s, _) | Term::Rewr(s, _) => {
                pos.push(0);
                cur = s;
            }
            _ => return None,
        }
    }
}

/// Weak-head reduction: contract head redexes until the head is a
/// constructor or a variable-headed chain of destructors.
pub fn whnf(t: &Term, bound: usize) -> Result<Trace, ReduceError> {
    let mut trace = Trace::new(t.clone());
    while let Some(r) = head_redex(trace.end()) {
        if trace.len() == bound {
            return Err(ReduceError::StepBound { bound });
        }
        trace.push(&r)?;
    }
    Ok(trace)
}

/// A path between two terms proving the same formula, through their common
/// normal form; `None` when the normal forms differ.
pub fn derive_path(ctx: &Context, a: &Term, b: &Term) -> Result<Option<Path>, ReduceError> {
    typecheck::typable(ctx, a)?;
    typecheck::typable(ctx, b)?;
    let ta = normalize(a, DERIVE_BOUND)?;
    let tb = normalize(b, DERIVE_BOUND)?;
    if ta.end() != tb.end() {
        return Ok(None);
    }
    Ok(Some(Path::trans(ta.path(), Path::sym(tb.path())).canonical()))
}

fn apply_atom(t: &Term, step: &Step, inverted: bool) -> Result<Term, ReduceError> {
    let shown = Path::Step(step.clone()).to_string();
    let stale = || ReduceError::Stale {
        rule: step.rule,
        position: step.position.clone(),
    };
    let sub = t.subterm(&step.position).ok_or_else(stale)?;
    if inverted {
        let redex = step.redex.as_ref().ok_or(ReduceError::NoRedex(shown.clone()))?;
        match contract(redex) {
            Some((rule, reduct)) if rule == step.rule && &reduct == sub => {
                Ok(replace_at(t, &step.position, (**redex).clone()))
            }
            _ => Err(ReduceError::RecordMismatch { step: shown }),
        }
    } else {
        if let Some(redex) = &step.redex {
            if **redex != *sub {
                return Err(ReduceError::RecordMismatch { step: shown });
            }
        }
        match contract(sub) {
            Some((rule, reduct)) if rule == step.rule => Ok(replace_at(t, &step.position, reduct)),
            _ => Err(stale()),
        }
    }
}

/// Replay a path on a proof term. Inverted steps need their recorded redex.
pub fn replay_path(path: &Path, start: &Term) -> Result<Term, ReduceError> {
    let mut cur = start.clone();
    for (atom, inverted) in path.atoms() {
        cur = match atom {
            PathAtom::Step(s) => apply_atom(&cur, &s, inverted)?,
            PathAtom::Var(v) => return Err(ReduceError::PathVariable(Path::Var(v).to_string())),
        };
    }
    Ok(cur)
}

/// Whether `path` leads from `lhs` to `rhs`. Steps are replayed forwards
/// from `lhs`; a backward step lacking a recorded redex is instead met by
/// replaying the rest of the path backwards from `rhs`.
pub fn check_replay(path: &Path, lhs: &Term, rhs: &Term) -> Result<(), ReduceError> {
    let atoms = path.atoms();
    let mut left = lhs.clone();
    let mut i = 0;
    while i < atoms.len() {
        let (atom, inverted) = &atoms[i];
        match atom {
            PathAtom::Var(v) => return Err(ReduceError::PathVariable(Path::Var(v.clone()).to_string())),
            PathAtom::Step(s) if *inverted && s.redex.is_none() => break,
            PathAtom::Step(s) => left = apply_atom(&left, s, *inverted)?,
        }
        i += 1;
    }
    let mut right = rhs.clone();
    for (atom, inverted) in atoms[i..].iter().rev() {
        match atom {
            PathAtom::Var(v) => return Err(ReduceError::PathVariable(Path::Var(v.clone()).to_string())),
            PathAtom::Step(s) => right = apply_atom(&right, s, !inverted)?,
        }
    }
    if left != right {
        return Err(ReduceError::Endpoint {
            found: left.to_string(),
            expected: right.to_string(),
        });
    }
    Ok(())
}
