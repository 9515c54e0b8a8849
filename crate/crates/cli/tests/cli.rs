use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const SIG: &str = "sort D\npred A/0\npred B/0\npred P/1 : D\nconst c : D\n";
const MODEL: &str = "sort D = {a,b}\npred E/2 : D D = {(a,b),(b,a)}\n";

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        let d = Dir(tempfile::tempdir().unwrap());
        d.file("sig", SIG);
        d.file("model", MODEL);
        d
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str], stdin: &str) -> Output {
        let mut child = Command::new(env!("CARGO_BIN_EXE_ndgame"))
            .current_dir(self.0.path())
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .unwrap();
        child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
        child.wait_with_output().unwrap()
    }
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn check_accepts_conjunction_introduction() {
    let d = Dir::new();
    d.file("j", "a : A\nb : B\n|- pair(a,b) : A & B\n");
    let o = d.run(&["check", "sig", "j"], "");
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn check_accepts_a_hypothesis() {
    let d = Dir::new();
    d.file("j", "x : A\n|- x : A\n");
    assert_eq!(code(&d.run(&["check", "sig", "j"], "")), 0);
}

#[test]
fn check_reports_a_mismatch_with_its_line() {
    let d = Dir::new();
    d.file("j", "a : A\nb : B\n|- pair(a,b) : A | B\n");
    let o = d.run(&["check", "sig", "j"], "");
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("constructor/formula mismatch"), "{err}");
    assert!(err.contains("j:3"), "{err}");
    assert!(err.contains("|- pair(a,b) : A | B"), "{err}");
}

#[test]
fn parse_errors_exit_two_with_a_caret() {
    let d = Dir::new();
    d.file("j", "a : A\n|- pair(a, : A\n");
    let o = d.run(&["check", "sig", "j"], "");
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains('^'), "{}", stderr(&o));
    d.file("badsig", "pred A/x\n");
    assert_eq!(code(&d.run(&["check", "badsig", "j"], "")), 2);
    assert_eq!(code(&d.run(&["check", "sig", "missing"], "")), 2);
}

#[test]
fn normalize_prints_the_reduct_steps_and_path() {
    let d = Dir::new();
    d.file("j", "a : A\nb : B\n|- fst(pair(a,b)) : A\n");
    let o = d.run(&["normalize", "sig", "j", "--trace"], "");
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "step 1 beta-fst @ root : a\na\nsteps 1\npath beta-fst\n");
}

#[test]
fn normalize_leaves_a_variable_alone() {
    let d = Dir::new();
    d.file("j", "x : A\n|- x : A\n");
    let o = d.run(&["normalize", "sig", "j"], "");
    assert_eq!(stdout(&o), "x\nsteps 0\npath rho\n");
}

#[test]
fn enumerate_prints_both_orders_with_one_endpoint() {
    let d = Dir::new();
    d.file("j", "a : A\nb : B\n|- pair(fst(pair(a,b)), snd(pair(a,b))) : A & B\n");
    let o = d.run(&["normalize", "sig", "j", "--enumerate"], "");
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("2 traces"), "{out}");
    let ends: Vec<&str> = out.lines().filter_map(|l| l.trim().strip_prefix("end ")).collect();
    assert_eq!(ends, ["pair(a,b)", "pair(a,b)"]);
}

#[test]
fn step_bound_exits_three() {
    let d = Dir::new();
    d.file("j", "a : A\nb : B\n|- pair(fst(pair(a,b)), snd(pair(a,b))) : A & B\n");
    let o = d.run(&["normalize", "sig", "j", "--steps", "1"], "");
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("step bound"));
}

#[test]
fn scripted_dialogue_on_a_conjunction() {
    let d = Dir::new();
    d.file("j", "a : A\nb : B\n|- pair(a,b) : A & B\n");
    d.file("script", "L?\n");
    let o = d.run(&["dialogue", "sig", "j", "--script", "script"], "");
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "ASSERT pair(a,b) : A & B\nATTACK L?\nDEFEND a : A\nEND atomic-closed\n");
}

#[test]
fn literal_dialogue_closes_at_once() {
    let d = Dir::new();
    d.file("j", "a : A\n|- a : A\n");
    d.file("script", "");
    let o = d.run(&["dialogue", "sig", "j", "--script", "script"], "");
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "ASSERT a : A\nEND atomic-closed\n");
}

#[test]
fn pool_payload_reaches_the_substituted_consequent() {
    let d = Dir::new();
    d.file("j", "a : A\nb : B\n|- lam(x. pair(x,b)) : A -> A & B\n");
    d.file("pool", "! a\n");
    let o = d.run(&["dialogue", "sig", "j", "--pool", "pool"], "");
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("ATTACK ! a\nDEFEND pair(a,b) : A & B\n"), "{out}");
    assert!(out.contains("DEFEND a : A\nEND atomic-closed"), "{out}");
    assert!(out.contains("DEFEND b : B\nEND atomic-closed"), "{out}");
}

#[test]
fn unfinished_dialogue_is_a_semantic_failure() {
    let d = Dir::new();
    d.file("j", "a : A\nb : B\n|- pair(a,b) : A & B\n");
    d.file("script", "");
    let o = d.run(&["dialogue", "sig", "j", "--script", "script"], "");
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).ends_with("END open\n"));
}

#[test]
fn interactive_dialogue_matches_the_script() {
    let d = Dir::new();
    d.file("j", "a : A\nb : B\n|- lam(x. pair(x,b)) : A -> A & B\n");
    d.file("script", "! a\nR?\n");
    let scripted = d.run(&["dialogue", "sig", "j", "--script", "script"], "");
    // an ill-typed payload and a bad index are asked again
    let live = d.run(&["dialogue", "sig", "j", "--interactive"], "! b\n7\n! a\n2\n");
    assert_eq!(code(&live), 0, "{}", stderr(&live));
    assert_eq!(stdout(&live), stdout(&scripted));
    assert_eq!(stderr(&live).matches("> rejected").count(), 2);
}

#[test]
fn game_and_oracle_agree_on_a_true_sentence() {
    let d = Dir::new();
    d.file("f", "forall x:D. exists y:D. E(x,y)\n");
    let g = d.run(&["game", "model", "f"], "");
    assert_eq!(code(&g), 0, "{}", stderr(&g));
    assert!(stdout(&g).ends_with("WINNER Eloise\n"));
    assert_eq!(stdout(&d.run(&["oracle", "model", "f"], "")), "true\n");
}

#[test]
fn game_and_oracle_agree_on_a_false_sentence() {
    let d = Dir::new();
    d.file("f", "exists x:D. E(x,x)\n");
    assert!(stdout(&d.run(&["game", "model", "f"], "")).ends_with("WINNER Abelard\n"));
    assert_eq!(stdout(&d.run(&["oracle", "model", "f"], "")), "false\n");
}

#[test]
fn literal_game_has_no_moves() {
    let d = Dir::new();
    d.file("model", "sort D = {a,b}\npred E/2 : D D = {(a,b)}\n");
    d.file("f", "~E(a,a)\n");
    let o = d.run(&["game", "model", "f"], "");
    assert_eq!(stdout(&o), "POSITION (~E(a,a), {})\nWINNER Eloise\n");
}

#[test]
fn interactive_game_matches_the_script() {
    let d = Dir::new();
    d.file("f", "forall x:D. exists y:D. E(x,y)\n");
    d.file("moves", "1\n");
    let scripted = d.run(&["game", "model", "f", "--player", "abelard", "--script", "moves"], "");
    let live = d.run(&["game", "model", "f", "--player", "abelard", "--interactive"], "5\n1\n");
    assert_eq!(code(&live), 0);
    assert_eq!(stdout(&live), stdout(&scripted));
    assert!(stdout(&live).contains("ABELARD x0=b"));
    assert!(stderr(&live).contains("choose 0 to 1"));
}

#[test]
fn game_rejects_a_non_nnf_formula() {
    let d = Dir::new();
    d.file("f", "exists x:D. E(x,x) -> E(x,x)\n");
    assert_eq!(code(&d.run(&["game", "model", "f"], "")), 1);
    d.file("empty", "sort D = {}\n");
    assert_eq!(code(&d.run(&["oracle", "empty", "f"], "")), 1);
}

#[test]
fn crosscheck_reports_full_agreement() {
    let d = Dir::new();
    let o = d.run(&["crosscheck", "--seed", "11", "--count", "200"], "");
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("agreement 100%\n"), "{}", stdout(&o));
    let again = d.run(&["crosscheck", "--seed", "11", "--count", "200"], "");
    assert_eq!(stdout(&o), stdout(&again));
}
