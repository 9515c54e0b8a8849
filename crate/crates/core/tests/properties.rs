use std::sync::Arc;

use proptest::prelude::*;

use ndgame::gen::{self, Generated, Generator, CONTEXT};
use ndgame::reduce::{self, beta_step, find_redexes};
use ndgame::syntax::{parse_formula, parse_judgement, parse_proofterm, substitute, Formula, Value};
use ndgame::typecheck::check;

fn judgement(seed: u64, size: usize) -> Generated {
    Generator::new(seed).judgement(size)
}

/// The printed text with every generated binder name `xN` renamed `vN_`.
fn rename_binders(text: &str) -> String {
    let mut out = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if !(c.is_ascii_alphanumeric() || c == '_') {
            out.push(c);
            continue;
        }
        let mut word = c.to_string();
        while let Some(&n) = chars.peek().filter(|n| n.is_ascii_alphanumeric() || **n == '_') {
            word.push(n);
            chars.next();
        }
        match word.strip_prefix('x') {
            Some(digits) if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) => {
                out += &format!("v{digits}_")
            }
            _ => out += &word,
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let j = judgement(seed, 30);
        prop_assert_eq!(parse_proofterm(&j.term.to_string()).unwrap(), j.term.clone());
        prop_assert_eq!(parse_formula(&j.formula.to_string()).unwrap(), j.formula.clone());
    }

    #[test]
    fn renaming_binders_gives_the_same_term(seed in any::<u64>()) {
        let j = judgement(seed, 30);
        let renamed = rename_binders(&j.term.to_string());
        prop_assert_eq!(parse_proofterm(&renamed).unwrap(), j.term.clone());
        let renamed = rename_binders(&j.formula.to_string());
        prop_assert_eq!(parse_formula(&renamed).unwrap(), j.formula.clone());
    }

    #[test]
    fn every_single_step_preserves_the_formula(seed in any::<u64>()) {
        let ctx = gen::context();
        let j = judgement(seed, 30);
        for r in find_redexes(&j.term) {
            let next = beta_step(&j.term, &r).unwrap();
            prop_assert!(check(&ctx, &next, &j.formula).is_ok(), "{} -> {}", j.term, next);
        }
    }

    #[test]
    fn normal_forms_check_and_are_redex_free(seed in any::<u64>()) {
        let ctx = gen::context();
        let j = judgement(seed, 30);
        let t = reduce::normalize(&j.term, reduce::DERIVE_BOUND).unwrap();
        prop_assert!(reduce::is_normal(t.end()));
        prop_assert!(check(&ctx, t.end(), &j.formula).is_ok());
    }

    #[test]
    fn substituting_a_proof_of_a_hypothesis(seed in any::<u64>(), budget in 0usize..8) {
        // `a : A` is in the context, so any closed proof of A may replace it
        let ctx = gen::context();
        let j = judgement(seed, 30);
        let a = Formula::atom("A", &[]);
        let u = Generator::new(seed ^ 0x9e37).proof(&a, budget);
        prop_assert!(check(&ctx, &u, &a).is_ok());
        let t = substitute(&j.term, "a", &Value::Proof(u.clone())).unwrap();
        prop_assert!(check(&ctx, &t, &j.formula).is_ok(), "{}[{}/a]", j.term, u);
    }

    #[test]
    fn weakening_keeps_judgements(seed in any::<u64>(), depth in 0usize..3) {
        let j = judgement(seed, 30);
        let extra = Generator::new(!seed).formula(depth);
        let text = format!("{CONTEXT}fresh_hyp : {extra}\n|- {} : {}\n", j.term, j.formula);
        let weak = parse_judgement(Arc::clone(gen::context().signature_arc()), &text).unwrap();
        prop_assert!(check(&weak.context, &weak.term, &weak.formula).is_ok());
    }
}

#[test]
fn renaming_touches_only_generated_names() {
    assert_eq!(rename_binders("lam(x0. app(f, x10))"), "lam(v0_. app(f, v10_))");
    assert_eq!(rename_binders("exists x0:D. E(x0, c)"), "exists v0_:D. E(v0_, c)");
}
