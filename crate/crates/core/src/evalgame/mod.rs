//! The evaluation game `G(M, φ)` for NNF formulas over finite models.
//!
//! Positions are `(ψ, s)`. At a conjunction or universal Abelard picks the
//! next position, at a disjunction or existential Eloise does, and a literal
//! ends the game: Eloise wins iff it holds under `s`. Winners are computed by
//! backward induction over the game tree; [`tarski_eval`] is an independent
//! recursive satisfaction oracle.

mod model;
pub mod sweep;
mod tarski;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub use model::{parse_model, Assignment, Batch, Element, Interpretation, Model, BATCH};
pub use tarski::tarski_eval;
pub(crate) use tarski::satisfied;

use model::{and, and_not, or, Mask, EMPTY};
use crate::syntax::{Formula, Name, SyntaxError, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty domain for sort {0}")]
    EmptyDomain(crate::syntax::Sort),
    #[error("unknown sort {0}")]
    UnknownSort(crate::syntax::Sort),
    #[error("unknown element `{0}`")]
    UnknownElement(Name),
    #[error("unknown predicate `{0}`")]
    UnknownPred(Name),
    #[error("arity mismatch for `{name}`: declared {expected}, found {found}")]
    Arity { name: Name, expected: usize, found: usize },
    #[error("{0}")]
    Invalid(String),
    #[error("not in negation normal form: {0}")]
    NotNnf(String),
    #[error("variable `{0}` is not bound by the assignment")]
    Unbound(String),
    #[error("position is not terminal")]
    NotTerminal,
    #[error("choice {index} out of range 0..{count}")]
    Choice { index: usize, count: usize },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    Eloise,
    Abelard,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Eloise => Player::Abelard,
            Player::Abelard => Player::Eloise,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Eloise => "Eloise",
            Player::Abelard => "Abelard",
        })
    }
}

/// Who moves at a formula; `None` at a literal.
pub fn mover(f: &Formula) -> Option<Player> {
    match f {
        Formula::And(..) | Formula::Forall(..) => Some(Player::Abelard),
        Formula::Or(..) | Formula::Exists(..) => Some(Player::Eloise),
        _ => None,
    }
}

pub fn check_nnf(f: &Formula) -> Result<(), GameError> {
    match f {
        Formula::Atom(..) | Formula::NegAtom(..) => Ok(()),
        Formula::And(a, b) | Formula::Or(a, b) => check_nnf(a).and(check_nnf(b)),
        Formula::Forall(_, b) | Formula::Exists(_, b) => check_nnf(b),
        Formula::Implies(..) | Formula::Id(..) => Err(GameError::NotNnf(f.to_string())),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Left,
    Right,
    Choose(Name),
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Left => f.write_str("left"),
            Move::Right => f.write_str("right"),
            Move::Choose(a) => write!(f, "{a}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GamePosition {
    /// A subformula; its loose bound indices refer to the assignment's stack.
    pub formula: Formula,
    pub assignment: Assignment,
}

impl GamePosition {
    pub fn new(formula: Formula, assignment: Assignment) -> Self {
        GamePosition { formula, assignment }
    }

    pub fn mover(&self) -> Option<Player> {
        mover(&self.formula)
    }

    /// The formula with stacked variables shown by name (`x0` outermost).
    pub fn display_formula(&self) -> Formula {
        let mut f = self.formula.clone();
        for k in (0..self.assignment.bound().len()).rev() {
            f = f.open(&Var::Free(Name::from(format!("x{k}"))));
        }
        f
    }
}

impl fmt::Display for GamePosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.display_formula(), self.assignment)
    }
}

/// Element lookup for a position, resolved once against a model.
#[derive(Clone)]
pub(crate) struct Env<'m> {
    model: &'m Model,
    free: BTreeMap<Name, Element>,
    pub(crate) bound: Vec<Element>,
}

impl<'m> Env<'m> {
    pub(crate) fn new(model: &'m Model, s: &Assignment) -> Result<Self, GameError> {
        let el = |n: &Name| model.element(n).ok_or_else(|| GameError::UnknownElement(n.clone()));
        Ok(Env {
            model,
            free: s.free().map(|(x, a)| Ok((x.clone(), el(a)?))).collect::<Result<_, GameError>>()?,
            bound: s.bound().iter().map(el).collect::<Result<_, _>>()?,
        })
    }

    pub(crate) fn resolve(&self, v: &Var) -> Result<Element, GameError> {
        match v {
            Var::Bound(i) => self
                .bound
                .len()
                .checked_sub(1 + *i as usize)
                .map(|k| self.bound[k])
                .ok_or_else(|| GameError::Unbound(format!("#{i}"))),
            Var::Free(n) => self
                .free
                .get(n)
                .copied()
                .or_else(|| self.model.element(n))
                .ok_or_else(|| GameError::Unbound(n.to_string())),
        }
    }

    pub(crate) fn args(&self, xs: &[Var]) -> Result<Vec<Element>, GameError> {
        xs.iter().map(|x| self.resolve(x)).collect()
    }

    pub(crate) fn sort(&self, s: &crate::syntax::Sort) -> Result<usize, GameError> {
        self.model.sort_index(s).ok_or_else(|| GameError::UnknownSort(s.clone()))
    }
}

/// The mask of models in which a literal holds.
pub(crate) fn literal(batch: &Batch, f: &Formula, env: &Env) -> Result<Mask, GameError> {
    let (p, xs, positive) = match f {
        Formula::Atom(p, xs) => (p, xs, true),
        Formula::NegAtom(p, xs) => (p, xs, false),
        _ => return Err(GameError::NotNnf(f.to_string())),
    };
    let m = batch
        .atom(p, xs.len(), |k| env.resolve(&xs[k]))
        .ok_or_else(|| GameError::UnknownPred(p.clone()))??;
    Ok(if positive { m } else { and_not(batch.full(), &m) })
}

/// Backward induction: the mask of models in which Eloise wins from
/// `(f, env)`.
pub(crate) fn eloise_wins(batch: &Batch, f: &Formula, env: &mut Env) -> Result<Mask, GameError> {
    let Some(player) = mover(f) else {
        return literal(batch, f, env);
    };
    let mut acc = match player {
        Player::Eloise => EMPTY,
        Player::Abelard => *batch.full(),
    };
    let mut join = |w: Mask| {
        acc = match player {
            Player::Eloise => or(&acc, &w),
            Player::Abelard => and(&acc, &w),
        }
    };
    match f {
        Formula::And(a, b) | Formula::Or(a, b) => {
            join(eloise_wins(batch, a, env)?);
            join(eloise_wins(batch, b, env)?);
        }
        Formula::Forall(s, body) | Formula::Exists(s, body) => {
            let sort = env.sort(s)?;
            for i in 0..batch.shape().domain(sort).len() {
                env.bound.push(Element { sort: sort as u16, index: i as u16 });
                let w = eloise_wins(batch, body, env);
                env.bound.pop();
                join(w?);
            }
        }
        _ => unreachable!(),
    }
    Ok(acc)
}

/// Fail unless every variable of `f` is bound by `env` or names an element.
fn check_closed(f: &Formula, env: &mut Env) -> Result<(), GameError> {
    match f {
        Formula::Atom(_, xs) | Formula::NegAtom(_, xs) => env.args(xs).map(drop),
        Formula::Id(_, a, b) => env.args(&[a.clone(), b.clone()]).map(drop),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            check_closed(a, env)?;
            check_closed(b, env)
        }
        Formula::Forall(s, body) | Formula::Exists(s, body) => {
            let sort = env.sort(s)?;
            env.bound.push(Element { sort: sort as u16, index: 0 });
            let r = check_closed(body, env);
            env.bound.pop();
            r
        }
    }
}

pub fn legal_moves(pos: &GamePosition, model: &Model) -> Result<Vec<(Move, GamePosition)>, GameError> {
    let mut env = Env::new(model, &pos.assignment)?;
    check_closed(&pos.formula, &mut env)?;
    let s = &pos.assignment;
    Ok(match &pos.formula {
        Formula::And(a, b) | Formula::Or(a, b) => vec![
            (Move::Left, GamePosition::new((**a).clone(), s.clone())),
            (Move::Right, GamePosition::new((**b).clone(), s.clone())),
        ],
        Formula::Forall(sort, body) | Formula::Exists(sort, body) => {
            let i = env.sort(sort)?;
            model
                .domain(i)
                .iter()
                .map(|a| (Move::Choose(a.clone()), GamePosition::new((**body).clone(), s.push(a))))
                .collect()
        }
        Formula::Implies(..) | Formula::Id(..) => {
            return Err(GameError::NotNnf(pos.formula.to_string()))
        }
        _ => Vec::new(),
    })
}

pub fn winner_at_terminal(pos: &GamePosition, model: &Model) -> Result<Player, GameError> {
    if pos.mover().is_some() {
        return Err(GameError::NotTerminal);
    }
    let env = Env::new(model, &pos.assignment)?;
    let batch = Batch::new(std::slice::from_ref(model))?;
    let m = literal(&batch, &pos.formula, &env)?;
    Ok(if m[0] & 1 == 1 { Player::Eloise } else { Player::Abelard })
}

/// Winners of positions in one model.
pub struct Solver<'m> {
    model: &'m Model,
    batch: Batch<'m>,
}

impl<'m> Solver<'m> {
    pub fn new(model: &'m Model) -> Result<Self, GameError> {
        Ok(Solver {
            model,
            batch: Batch::new(std::slice::from_ref(model))?,
        })
    }

    pub fn winner(&self, pos: &GamePosition) -> Result<Player, GameError> {
        check_nnf(&pos.formula)?;
        let mut env = Env::new(self.model, &pos.assignment)?;
        check_closed(&pos.formula, &mut env)?;
        let m = eloise_wins(&self.batch, &pos.formula, &mut env)?;
        Ok(if m[0] & 1 == 1 { Player::Eloise } else { Player::Abelard })
    }

    /// The first move from `pos` after which `player` still wins.
    pub fn winning_move(
        &self,
        player: Player,
        moves: &[(Move, GamePosition)],
    ) -> Result<Option<usize>, GameError> {
        for (i, (_, next)) in moves.iter().enumerate() {
            if self.winner(next)? == player {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

/// A winning strategy for the winner from the root position: the move to
/// play at each of the winner's positions reachable under it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    pub winner: Player,
    pub root: GamePosition,
    pub moves: BTreeMap<GamePosition, Move>,
}

pub fn winning_strategy(formula: &Formula, model: &Model, assignment: &Assignment) -> Result<Strategy, GameError> {
    check_nnf(formula)?;
    let solver = Solver::new(model)?;
    let root = GamePosition::new(formula.clone(), assignment.clone());
    let winner = solver.winner(&root)?;
    let mut moves = BTreeMap::new();
    let mut stack = vec![root.clone()];
    while let Some(pos) = stack.pop() {
        let Some(p) = pos.mover() else { continue };
        let options = legal_moves(&pos, model)?;
        if p == winner {
            let i = solver
                .winning_move(winner, &options)?
                .expect("a winning position has a winning move");
            let (m, next) = options[i].clone();
            moves.insert(pos, m);
            stack.push(next);
        } else {
            stack.extend(options.into_iter().rev().map(|(_, n)| n));
        }
    }
    Ok(Strategy { winner, root, moves })
}

/// Picks moves for one player.
pub trait Controller {
    fn choose(
        &mut self,
        player: Player,
        position: &GamePosition,
        moves: &[(Move, GamePosition)],
    ) -> Result<usize, GameError>;
}

/// Plays a winning move when there is one, else the first move.
pub struct Auto<'m> {
    solver: Solver<'m>,
}

impl<'m> Auto<'m> {
    pub fn new(model: &'m Model) -> Result<Self, GameError> {
        Ok(Auto { solver: Solver::new(model)? })
    }
}

impl Controller for Auto<'_> {
    fn choose(&mut self, player: Player, _: &GamePosition, moves: &[(Move, GamePosition)]) -> Result<usize, GameError> {
        Ok(self.solver.winning_move(player, moves)?.unwrap_or(0))
    }
}

/// Replays fixed choice indices.
pub struct Choices(pub std::vec::IntoIter<usize>);

impl Controller for Choices {
    fn choose(&mut self, _: Player, _: &GamePosition, moves: &[(Move, GamePosition)]) -> Result<usize, GameError> {
        let i = self.0.next().unwrap_or(0);
        if i >= moves.len() {
            return Err(GameError::Choice { index: i, count: moves.len() });
        }
        Ok(i)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Turn {
    pub position: GamePosition,
    pub player: Player,
    pub chosen: Move,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Play {
    pub turns: Vec<Turn>,
    pub end: GamePosition,
    pub winner: Player,
}

fn move_text(m: &Move, depth: usize) -> String {
    match m {
        Move::Left => "left".into(),
        Move::Right => "right".into(),
        Move::Choose(a) => format!("x{depth}={a}"),
    }
}

impl fmt::Display for Play {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.turns {
            writeln!(f, "POSITION {}", t.position)?;
            let who = t.player.to_string().to_uppercase();
            writeln!(f, "{who} {}", move_text(&t.chosen, t.position.assignment.bound().len()))?;
        }
        writeln!(f, "POSITION {}", self.end)?;
        writeln!(f, "WINNER {}", self.winner)
    }
}

/// Play from the root, asking each player's controller for its moves.
pub fn play_game(
    formula: &Formula,
    model: &Model,
    assignment: &Assignment,
    eloise: &mut dyn Controller,
    abelard: &mut dyn Controller,
) -> Result<Play, GameError> {
    check_nnf(formula)?;
    let mut pos = GamePosition::new(formula.clone(), assignment.clone());
    let mut turns = Vec::new();
    while let Some(player) = pos.mover() {
        let moves = legal_moves(&pos, model)?;
        let ctl: &mut dyn Controller = match player {
            Player::Eloise => &mut *eloise,
            Player::Abelard => &mut *abelard,
        };
        let i = ctl.choose(player, &pos, &moves)?;
        let (m, next) = moves
            .into_iter()
            .nth(i)
            .ok_or(GameError::Choice { index: i, count: 0 })?;
        turns.push(Turn {
            position: pos,
            player,
            chosen: m,
        });
        pos = next;
    }
    let winner = winner_at_terminal(&pos, model)?;
    Ok(Play { turns, end: pos, winner })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    fn m(s: &str) -> Model {
        parse_model(s).unwrap()
    }

    #[test]
    fn conjunction_moves_belong_to_abelard() {
        let model = m("sort D = {a}\npred P/0 = {()}\npred Q/0 = {}");
        let pos = GamePosition::new(f("P & Q"), Assignment::new());
        assert_eq!(pos.mover(), Some(Player::Abelard));
        let moves = legal_moves(&pos, &model).unwrap();
        assert_eq!(moves.iter().map(|(_, p)| p.formula.to_string()).collect::<Vec<_>>(), ["P", "Q"]);
    }

    #[test]
    fn existential_moves_range_over_the_domain() {
        let model = m("sort D = {a,b}\npred E/2 = {}");
        let pos = GamePosition::new(f("exists x:D. E(x,x)"), Assignment::new());
        assert_eq!(pos.mover(), Some(Player::Eloise));
        let moves = legal_moves(&pos, &model).unwrap();
        let shown: Vec<_> = moves.iter().map(|(_, p)| p.to_string()).collect();
        assert_eq!(shown, ["(E(x0,x0), {x0=a})", "(E(x0,x0), {x0=b})"]);
        let end = GamePosition::new(f("E(a,b)"), Assignment::new());
        assert!(legal_moves(&end, &model).unwrap().is_empty());
    }

    #[test]
    fn terminal_winners() {
        let model = m("sort D = {a,b}\npred E/2 = {(a,b)}");
        let at = |s: &str| winner_at_terminal(&GamePosition::new(f(s), Assignment::new()), &model).unwrap();
        assert_eq!(at("E(a,b)"), Player::Eloise);
        assert_eq!(at("~E(a,a)"), Player::Eloise);
        assert_eq!(at("E(b,a)"), Player::Abelard);
    }

    #[test]
    fn unbound_variables_are_errors() {
        let model = m("sort D = {a}\npred E/2 = {}");
        let pos = GamePosition::new(f("E(y,a) & E(a,a)"), Assignment::new());
        assert!(matches!(legal_moves(&pos, &model), Err(GameError::Unbound(_))));
        let s = Assignment::new().update(&Name::new("y"), &Name::new("a"));
        assert!(legal_moves(&GamePosition::new(f("E(y,a) & E(a,a)"), s), &model).is_ok());
    }

    #[test]
    fn strategy_for_a_true_sentence() {
        let model = m("sort D = {a,b}\npred E/2 = {(a,b), (b,a)}");
        let st = winning_strategy(&f("forall x:D. exists y:D. E(x,y)"), &model, &Assignment::new()).unwrap();
        assert_eq!(st.winner, Player::Eloise);
        let picks: Vec<String> = st.moves.iter().map(|(p, mv)| format!("{} -> {mv}", p.assignment)).collect();
        assert_eq!(picks, ["{x0=a} -> b", "{x0=b} -> a"]);
    }

    #[test]
    fn false_sentence_goes_to_abelard() {
        let model = m("sort D = {a,b}\npred E/2 = {}");
        let st = winning_strategy(&f("exists x:D. E(x,x)"), &model, &Assignment::new()).unwrap();
        assert_eq!(st.winner, Player::Abelard);
        assert!(st.moves.is_empty());
        assert!(!tarski_eval(&f("exists x:D. E(x,x)"), &model, &Assignment::new()).unwrap());
    }

    #[test]
    fn non_nnf_input_is_rejected() {
        let model = m("sort D = {a}\npred P/0 = {}");
        let s = Assignment::new();
        assert!(matches!(winning_strategy(&f("P -> P"), &model, &s), Err(GameError::NotNnf(_))));
        assert!(matches!(tarski_eval(&f("Id(D, a, a)"), &model, &s), Err(GameError::NotNnf(_))));
    }

    #[test]
    fn auto_play_reaches_the_declared_winner() {
        let model = m("sort D = {a,b}\npred E/2 = {(a,b), (b,a)}");
        for (s, w) in [("forall x:D. exists y:D. E(x,y)", Player::Eloise), ("exists x:D. forall y:D. E(x,y)", Player::Abelard)] {
            let play = play_game(&f(s), &model, &Assignment::new(), &mut Auto::new(&model).unwrap(), &mut Auto::new(&model).unwrap()).unwrap();
            assert_eq!(play.winner, w, "{play}");
            assert_eq!(play.turns.len(), 2);
        }
        let play = play_game(&f("E(a,b)"), &model, &Assignment::new(), &mut Auto::new(&model).unwrap(), &mut Auto::new(&model).unwrap()).unwrap();
        assert!(play.turns.is_empty());
        assert_eq!(play.to_string(), "POSITION (E(a,b), {})\nWINNER Eloise\n");
    }

    #[test]
    fn scripted_choices_are_range_checked() {
        let model = m("sort D = {a,b}\npred E/2 = {}");
        let mut bad = Choices(vec![5].into_iter());
        let r = play_game(&f("exists x:D. E(x,x)"), &model, &Assignment::new(), &mut bad, &mut Auto::new(&model).unwrap());
        assert!(matches!(r, Err(GameError::Choice { index: 5, count: 2 })));
    }
}
