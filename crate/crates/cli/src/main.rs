//! The `ndgame` command-line tool.
//!
//! Results go to standard output. Diagnostics and interactive prompts go to
//! standard error, so an interactive run with piped input prints the same
//! transcript as a scripted run with the same choices.

use std::fmt;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use ndgame::dialogue::{
    self, parse_moves, pool_attacks, run_dialogue, Attack, AttackShape, Attacker, DialogueError,
    DialogueState, Pool, Scripted, Status,
};
use ndgame::evalgame::{
    self, parse_model, play_game, sweep, tarski_eval, Assignment, Auto, Controller, GameError,
    GamePosition, Model, Move, Player,
};
use ndgame::reduce::{self, ReduceError};
use ndgame::syntax::{parse_formula, parse_judgement, parse_signature, Formula, Judgement, SyntaxError};
use ndgame::typecheck::{self, TypeError};

#[derive(Parser, Debug)]
#[command(name = "ndgame", version, about = "Proof terms, reduction, dialogues and evaluation games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a judgement against a signature.
    Check { signature: PathBuf, judgement: PathBuf },
    /// Reduce the subject of a judgement to normal form.
    Normalize {
        signature: PathBuf,
        judgement: PathBuf,
        /// Print every step.
        #[arg(long)]
        trace: bool,
        /// Print every maximal reduction sequence.
        #[arg(long)]
        enumerate: bool,
        /// Step bound (default: twice the term size).
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Play a dialogue on a judgement.
    Dialogue {
        signature: PathBuf,
        judgement: PathBuf,
        /// Attacks to play, one per line.
        #[arg(long, conflicts_with = "interactive")]
        script: Option<PathBuf>,
        /// Read attacks from standard input.
        #[arg(long)]
        interactive: bool,
        /// Payloads for the attacker: without a script, every dialogue
        /// they allow is played out.
        #[arg(long)]
        pool: Option<PathBuf>,
    },
    /// Play the evaluation game of a sentence in a model.
    Game {
        model: PathBuf,
        formula: PathBuf,
        /// Read one player's choices from standard input.
        #[arg(long)]
        interactive: bool,
        /// The player whose choices are read.
        #[arg(long, value_enum, default_value_t = Side::Eloise)]
        player: Side,
        /// Choices (move indices, one per line) for the player.
        #[arg(long, conflicts_with = "interactive")]
        script: Option<PathBuf>,
    },
    /// Evaluate a sentence in a model directly.
    Oracle { model: PathBuf, formula: PathBuf },
    /// Compare game winners with truth over random sentences and all small
    /// models.
    Crosscheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of sentences.
        #[arg(long, default_value_t = 2000)]
        count: usize,
        /// Maximum connectives per sentence.
        #[arg(long, default_value_t = 6)]
        connectives: usize,
        /// Maximum quantifier depth.
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Maximum domain size.
        #[arg(long, default_value_t = 3)]
        size: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Side {
    Eloise,
    Abelard,
}

impl From<Side> for Player {
    fn from(s: Side) -> Player {
        match s {
            Side::Eloise => Player::Eloise,
            Side::Abelard => Player::Abelard,
        }
    }
}

/// How a command failed. The variants are the exit statuses.
#[derive(Debug)]
enum Failure {
    Semantic(String),
    Parse(String),
    Bound(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Semantic(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Bound(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Semantic(m) | Failure::Parse(m) | Failure::Bound(m) => f.write_str(m),
        }
    }
}

type Outcome = Result<(), Failure>;

/// A file's name and contents, kept for error reports.
struct Source {
    path: PathBuf,
    text: String,
}

impl Source {
    fn read(path: &Path) -> Result<Source, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Parse(format!("error: cannot read {}: {e}", path.display())))?;
        Ok(Source {
            path: path.to_owned(),
            text,
        })
    }

    /// `error: file:line[:col]: message`, the offending line and a caret.
    fn report(&self, line: usize, column: Option<usize>, message: &str) -> String {
        let at = match column {
            Some(c) => format!("{}:{line}:{c}", self.path.display()),
            None => format!("{}:{line}", self.path.display()),
        };
        let mut out = format!("error: {at}: {message}");
        if let Some(src) = self.text.lines().nth(line.wrapping_sub(1)) {
            let gutter = line.to_string();
            out += &format!("\n {gutter} | {src}");
            if let Some(c) = column {
                out += &format!("\n {} | {}^", " ".repeat(gutter.len()), " ".repeat(c.saturating_sub(1)));
            }
        }
        out
    }

    fn syntax(&self, e: &SyntaxError) -> Failure {
        Failure::Parse(match e {
            SyntaxError::Parse { line, column, message } => self.report(*line, Some(*column), message),
            e => format!("error: {}: {e}", self.path.display()),
        })
    }
}

fn load_judgement(signature: &Path, judgement: &Path) -> Result<(Source, Judgement), Failure> {
    let sig = Source::read(signature)?;
    let sig = parse_signature(&sig.text).map_err(|e| sig.syntax(&e))?;
    let src = Source::read(judgement)?;
    let j = parse_judgement(Arc::new(sig), &src.text).map_err(|e| src.syntax(&e))?;
    Ok((src, j))
}

fn type_failure(src: &Source, j: &Judgement, e: &TypeError) -> Failure {
    match e {
        TypeError::Syntax(s) => src.syntax(s),
        e => Failure::Semantic(src.report(j.line, None, &format!("type error: {e}"))),
    }
}

fn reduce_failure(e: ReduceError) -> Failure {
    match e {
        ReduceError::StepBound { .. } | ReduceError::ExplorationLimit(_) => Failure::Bound(format!("error: {e}")),
        e => Failure::Semantic(format!("error: {e}")),
    }
}

fn cmd_check(out: &mut dyn Write, signature: &Path, judgement: &Path) -> Outcome {
    let (src, j) = load_judgement(signature, judgement)?;
    typecheck::check(&j.context, &j.term, &j.formula).map_err(|e| type_failure(&src, &j, &e))?;
    emit(out, format_args!("ok {} : {}\n", j.term, j.formula))
}

/// Upper bound on the sequences printed by `normalize --enumerate`.
const MAX_TRACES: usize = 10_000;

fn cmd_normalize(out: &mut dyn Write, signature: &Path, judgement: &Path, trace: bool, enumerate: bool, steps: Option<usize>) -> Outcome {
    let (src, j) = load_judgement(signature, judgement)?;
    typecheck::check(&j.context, &j.term, &j.formula).map_err(|e| type_failure(&src, &j, &e))?;
    let bound = steps.unwrap_or_else(|| reduce::default_bound(&j.term));
    let mut text = String::new();
    if enumerate {
        let traces = reduce::enumerate_traces(&j.term, bound, MAX_TRACES).map_err(reduce_failure)?;
        for (i, t) in traces.iter().enumerate() {
            text += &format!("trace {} ({} steps)\n", i + 1, t.len());
            for s in &t.steps {
                text += &format!("  {s}\n");
            }
            text += &format!("  end {}\n", t.end());
        }
        text += &format!("{} traces\n", traces.len());
    }
    let t = reduce::normalize(&j.term, bound).map_err(reduce_failure)?;
    if trace {
        for (i, s) in t.steps.iter().enumerate() {
            text += &format!("step {} {s}\n", i + 1);
        }
    }
    text += &format!("{}\n", t.end());
    text += &format!("steps {}\n", t.len());
    text += &format!("path {}\n", t.path().canonical());
    emit(out, format_args!("{text}"))
}

/// Reads attacks from a line stream, listing the choices before each one.
struct Prompted<'a> {
    input: &'a mut dyn BufRead,
    prompt: &'a mut dyn Write,
    pool: Option<&'a Pool>,
}

impl Prompted<'_> {
    fn options(&self, state: &DialogueState) -> Vec<(String, Option<Attack>)> {
        match self.pool {
            Some(pool) => pool_attacks(state, pool)
                .into_iter()
                .map(|a| (a.to_string(), Some(a)))
                .collect(),
            None => state
                .legal_attacks()
                .into_iter()
                .map(|s| {
                    let concrete = match s {
                        AttackShape::Left => Some(Attack::Left),
                        AttackShape::Right => Some(Attack::Right),
                        AttackShape::Query => Some(Attack::Query),
                        _ => None,
                    };
                    (s.to_string(), concrete)
                })
                .collect(),
        }
    }
}

impl Attacker for Prompted<'_> {
    fn choose(&mut self, state: &DialogueState) -> Option<Attack> {
        if state.is_over() {
            return None;
        }
        let current = state.current.as_ref()?;
        let options = self.options(state);
        let _ = writeln!(self.prompt, "assertion {current}");
        for (i, (text, _)) in options.iter().enumerate() {
            let _ = writeln!(self.prompt, "  {}) {text}", i + 1);
        }
        loop {
            let _ = write!(self.prompt, "attack (number or move, empty line to stop)> ");
            let _ = self.prompt.flush();
            let mut line = String::new();
            if self.input.read_line(&mut line).ok()? == 0 {
                return None;
            }
            let line = line.trim();
            if line.is_empty() {
                return None;
            }
            let picked = match line.parse::<usize>() {
                Ok(n) => match options.get(n.wrapping_sub(1)) {
                    Some((_, Some(a))) => Ok(a.clone()),
                    Some((text, None)) => Err(format!("{text} needs a payload: type the move itself")),
                    None => Err(format!("no choice {n}")),
                },
                Err(_) => match parse_moves(line) {
                    Ok(mut ms) if ms.len() == 1 => Ok(ms.remove(0)),
                    Ok(_) => Err("expected one move".to_string()),
                    Err(e) => Err(e.to_string()),
                },
            };
            // try the move now, so an ill-typed payload is asked again
            match picked.and_then(|a| match dialogue::defend(state, &a) {
                Ok(_) | Err(DialogueError::NotCanonical(_)) => Ok(a),
                Err(e) => Err(e.to_string()),
            }) {
                Ok(a) => return Some(a),
                Err(why) => {
                    let _ = writeln!(self.prompt, "rejected: {why}");
                }
            }
        }
    }
}

fn dialogue_failure(e: DialogueError) -> Failure {
    match e {
        DialogueError::Reduce(e) => reduce_failure(e),
        e => Failure::Semantic(format!("error: {e}")),
    }
}

fn closed(states: &[DialogueState]) -> Outcome {
    match states.iter().find(|s| s.status != Status::AtomicClosed) {
        None => Ok(()),
        Some(s) => Err(Failure::Semantic(format!("dialogue ended {}", s.status))),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_dialogue(
    out: &mut dyn Write,
    input: &mut dyn BufRead,
    prompt: &mut dyn Write,
    signature: &Path,
    judgement: &Path,
    script: Option<&Path>,
    interactive: bool,
    pool: Option<&Path>,
) -> Outcome {
    let (src, j) = load_judgement(signature, judgement)?;
    typecheck::check(&j.context, &j.term, &j.formula).map_err(|e| type_failure(&src, &j, &e))?;
    let read_moves = |p: &Path| -> Result<Vec<Attack>, Failure> {
        let s = Source::read(p)?;
        parse_moves(&s.text).map_err(|e| s.syntax(&e))
    };
    let pool = pool.map(read_moves).transpose()?.map(|ms| Pool::from_moves(&ms));
    let states = if interactive {
        let mut attacker = Prompted {
            input,
            prompt,
            pool: pool.as_ref(),
        };
        vec![run_dialogue(&j.context, &j.term, &j.formula, &mut attacker).map_err(dialogue_failure)?]
    } else if let Some(script) = script {
        let mut attacker = Scripted::new(read_moves(script)?);
        vec![run_dialogue(&j.context, &j.term, &j.formula, &mut attacker).map_err(dialogue_failure)?]
    } else {
        let pool = pool.unwrap_or_default();
        dialogue::exhaustive(&j.context, &j.term, &j.formula, &pool).map_err(dialogue_failure)?
    };
    let text: Vec<String> = states.iter().map(ToString::to_string).collect();
    emit(out, format_args!("{}", text.join("\n")))?;
    closed(&states)
}

fn load_game(model: &Path, formula: &Path) -> Result<(Model, Formula), Failure> {
    let src = Source::read(model)?;
    let m = parse_model(&src.text).map_err(|e| match e {
        GameError::Parse { line, message } => Failure::Parse(src.report(line, None, &message)),
        e => Failure::Semantic(format!("error: {}: {e}", src.path.display())),
    })?;
    let src = Source::read(formula)?;
    let text: String = src
        .text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n");
    let f = parse_formula(text.trim()).map_err(|e| src.syntax(&e))?;
    Ok((m, f))
}

fn game_failure(e: GameError) -> Failure {
    match e {
        GameError::Parse { .. } | GameError::Syntax(_) => Failure::Parse(format!("error: {e}")),
        e => Failure::Semantic(format!("error: {e}")),
    }
}

fn move_label(m: &Move, pos: &GamePosition) -> String {
    match m {
        Move::Left => "left".to_string(),
        Move::Right => "right".to_string(),
        Move::Choose(a) => format!("x{}={a}", pos.assignment.bound().len()),
    }
}

/// Choices read one index per line, asked again while out of range. At the
/// end of input the first move is taken.
struct Indices<'a> {
    input: &'a mut dyn BufRead,
    prompt: &'a mut dyn Write,
}

impl Controller for Indices<'_> {
    fn choose(&mut self, player: Player, position: &GamePosition, moves: &[(Move, GamePosition)]) -> Result<usize, GameError> {
        let _ = writeln!(self.prompt, "{player} to move at {position}");
        for (i, (m, _)) in moves.iter().enumerate() {
            let _ = writeln!(self.prompt, "  {i}) {}", move_label(m, position));
        }
        loop {
            let _ = write!(self.prompt, "move> ");
            let _ = self.prompt.flush();
            let mut line = String::new();
            if self.input.read_line(&mut line).unwrap_or(0) == 0 {
                return Ok(0);
            }
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.parse::<usize>() {
                Ok(i) if i < moves.len() => return Ok(i),
                _ => {
                    let _ = writeln!(self.prompt, "choose 0 to {}", moves.len() - 1);
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_game(
    out: &mut dyn Write,
    input: &mut dyn BufRead,
    prompt: &mut dyn Write,
    model: &Path,
    formula: &Path,
    interactive: bool,
    player: Side,
    script: Option<&Path>,
) -> Outcome {
    let (m, f) = load_game(model, formula)?;
    let s = Assignment::new();
    let mut auto = Auto::new(&m).map_err(game_failure)?;
    let mut other = Auto::new(&m).map_err(game_failure)?;
    let script_text;
    let mut script_input;
    let mut sink = io::sink();
    let mut human: Option<Indices> = if interactive {
        Some(Indices { input, prompt })
    } else if let Some(p) = script {
        script_text = Source::read(p)?.text;
        script_input = script_text.as_bytes();
        Some(Indices {
            input: &mut script_input,
            prompt: &mut sink,
        })
    } else {
        None
    };
    let play = match (human.as_mut(), Player::from(player)) {
        (None, _) => play_game(&f, &m, &s, &mut auto, &mut other),
        (Some(h), Player::Eloise) => play_game(&f, &m, &s, h, &mut auto),
        (Some(h), Player::Abelard) => play_game(&f, &m, &s, &mut auto, h),
    }
    .map_err(game_failure)?;
    emit(out, format_args!("{play}"))
}

fn cmd_oracle(out: &mut dyn Write, model: &Path, formula: &Path) -> Outcome {
    let (m, f) = load_game(model, formula)?;
    evalgame::check_nnf(&f).map_err(game_failure)?;
    let truth = tarski_eval(&f, &m, &Assignment::new()).map_err(game_failure)?;
    emit(out, format_args!("{truth}\n"))
}

fn cmd_crosscheck(out: &mut dyn Write, seed: u64, count: usize, connectives: usize, depth: usize, size: usize) -> Outcome {
    let a = sweep::random(seed, count, connectives, depth, size).map_err(game_failure)?;
    let mut text = format!("{} sentences, {} sentence/model pairs\n", a.sentences, a.pairs);
    for (f, n, i) in &a.disagreements {
        text += &format!("disagreement: {f} on model {i} of size {n}\n");
    }
    text += &format!("agreement {}%\n", fmt_percent(a.percent()));
    emit(out, format_args!("{text}"))?;
    if a.disagreements.is_empty() {
        Ok(())
    } else {
        Err(Failure::Semantic(format!("{} disagreements", a.disagreements.len())))
    }
}

fn fmt_percent(p: f64) -> String {
    if p == 100.0 {
        "100".to_string()
    } else {
        format!("{p:.4}")
    }
}

fn emit(out: &mut dyn Write, args: fmt::Arguments) -> Outcome {
    out.write_fmt(args)
        .and_then(|_| out.flush())
        .map_err(|e| Failure::Semantic(format!("error: cannot write output: {e}")))
}

fn run(cli: Cli) -> Outcome {
    let stdout = io::stdout();
    let out = &mut stdout.lock();
    let stdin = io::stdin();
    let input = &mut stdin.lock();
    let prompt = &mut io::stderr();
    match cli.command {
        Command::Check { signature, judgement } => cmd_check(out, &signature, &judgement),
        Command::Normalize {
            signature,
            judgement,
            trace,
            enumerate,
            steps,
        } => cmd_normalize(out, &signature, &judgement, trace, enumerate, steps),
        Command::Dialogue {
            signature,
            judgement,
            script,
            interactive,
            pool,
        } => cmd_dialogue(out, input, prompt, &signature, &judgement, script.as_deref(), interactive, pool.as_deref()),
        Command::Game {
            model,
            formula,
            interactive,
            player,
            script,
        } => cmd_game(out, input, prompt, &model, &formula, interactive, player, script.as_deref()),
        Command::Oracle { model, formula } => cmd_oracle(out, &model, &formula),
        Command::Crosscheck {
            seed,
            count,
            connectives,
            depth,
            size,
        } => cmd_crosscheck(out, seed, count, connectives, depth, size),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.code())
        }
    }
}
