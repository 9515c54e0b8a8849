//! Recursive-descent parser for the concrete grammar.
//!
//! ```text
//! formula   := impl
//! impl      := disj ("->" impl)?
//! disj      := conj ("|" conj)*
//! conj      := unit ("&" unit)*
//! unit      := atom | "~" atom | "Id" "(" sort "," ind "," ind ")"
//!            | ("forall"|"exists") var ":" sort "." formula | "(" formula ")"
//! atom      := pred ("(" ind ("," ind)* ")")?
//! proofterm := var | pair(p,p) | fst(p) | snd(p) | inl(p) | inr(p)
//!            | case(p, x => p, y => p) | lam(x. p) | app(p,p) | Lam(x:D. p)
//!            | extr(p, ind) | eps(ind, p) | inst(p, t g => p)
//!            | path(pathexpr, ind, ind) | rewr(p, t => p)
//! pathexpr  := "rho" | steplabel ("@" position)? | "sym(" pathexpr ")"
//!            | "tr(" pathexpr "," pathexpr ")" | var
//! ```

use super::{Formula, Kind, Name, Path, Position, Rule, Sort, Step, SyntaxError, Term, Var};

pub(crate) const RESERVED: &[&str] = &[
    "pair", "fst", "snd", "inl", "inr", "case", "lam", "app", "Lam", "extr", "eps", "inst", "path",
    "rewr", "rho", "sym", "tr", "forall", "exists", "Id", "beta",
];

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(u32),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Amp,
    Bar,
    Arrow,
    FatArrow,
    Tilde,
    At,
    Minus,
    Eq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::FatArrow => "`=>`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::At => "`@`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l, cl) = (line, col);
        let mut push = |tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Spanned {
                tok,
                line: l,
                column: cl,
            });
            *i += len;
            *col += len;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            ':' => push(Tok::Colon, 1, &mut i, &mut col),
            '&' => push(Tok::Amp, 1, &mut i, &mut col),
            '|' => push(Tok::Bar, 1, &mut i, &mut col),
            '~' => push(Tok::Tilde, 1, &mut i, &mut col),
            '@' => push(Tok::At, 1, &mut i, &mut col),
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '-' => push(Tok::Minus, 1, &mut i, &mut col),
            '=' if chars.get(i + 1) == Some(&'>') => push(Tok::FatArrow, 2, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = s.parse().map_err(|_| SyntaxError::Parse {
                    line: l,
                    column: cl,
                    message: format!("number `{s}` out of range"),
                })?;
                col += i - start;
                out.push(Spanned {
                    tok: Tok::Num(n),
                    line: l,
                    column: cl,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                out.push(Spanned {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: l,
                    column: cl,
                });
            }
            c => {
                return Err(SyntaxError::Parse {
                    line: l,
                    column: cl,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    /// proof-term binders, innermost last
    scope: Vec<(Name, Kind)>,
    /// formula binders, innermost last
    fscope: Vec<Name>,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn new(text: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(text)?,
            at: 0,
            scope: Vec::new(),
            fscope: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let s = &self.toks[self.at];
        Err(SyntaxError::Parse {
            line: s.line,
            column: s.column,
            message: message.into(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {}, found {}", tok.describe(), self.peek().describe()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn finish(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error(format!("unexpected {}", self.peek().describe()))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.error(format!("expected {what}, found {}", t.describe())),
        }
    }

    /// An identifier usable as a variable, predicate, sort or constant name.
    fn name(&mut self, what: &str) -> PResult<Name> {
        if let Tok::Ident(s) = self.peek() {
            if RESERVED.contains(&s.as_str()) {
                return self.error(format!("`{s}` is a reserved word"));
            }
        }
        self.ident(what).map(Name::from)
    }

    // ---- formulas ----

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.disj()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> PResult<Formula> {
        let mut acc = self.conj()?;
        while self.eat(&Tok::Bar) {
            acc = Formula::or(acc, self.conj()?);
        }
        Ok(acc)
    }

    fn conj(&mut self) -> PResult<Formula> {
        let mut acc = self.unit()?;
        while self.eat(&Tok::Amp) {
            acc = Formula::and(acc, self.unit()?);
        }
        Ok(acc)
    }

    fn unit(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                let (p, args) = self.atom()?;
                Ok(Formula::NegAtom(p, args))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(s) if s == "Id" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let sort = Sort(self.name("sort")?);
                self.expect(Tok::Comma)?;
                let a = self.formula_individual()?;
                self.expect(Tok::Comma)?;
                let b = self.formula_individual()?;
                self.expect(Tok::RParen)?;
                Ok(Formula::Id(sort, a, b))
            }
            Tok::Ident(s) if s == "forall" || s == "exists" => {
                self.bump();
                let x = self.name("bound variable")?;
                self.expect(Tok::Colon)?;
                let sort = Sort(self.name("sort")?);
                self.expect(Tok::Dot)?;
                self.fscope.push(x);
                let body = self.formula();
                self.fscope.pop();
                let body = Box::new(body?);
                Ok(if s == "forall" {
                    Formula::Forall(sort, body)
                } else {
                    Formula::Exists(sort, body)
                })
            }
            Tok::Ident(_) => {
                let (p, args) = self.atom()?;
                Ok(Formula::Atom(p, args))
            }
            t => self.error(format!("expected a formula, found {}", t.describe())),
        }
    }

    fn atom(&mut self) -> PResult<(Name, Vec<Var>)> {
        let p = self.name("predicate")?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            loop {
                args.push(self.formula_individual()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok((p, args))
    }

    fn formula_individual(&mut self) -> PResult<Var> {
        let n = self.name("individual")?;
        Ok(match self.fscope.iter().rev().position(|x| *x == n) {
            Some(i) => Var::Bound(i as u32),
            None => Var::Free(n),
        })
    }

    // ---- proof terms ----

    fn resolve(&self, n: Name, kind: Kind) -> PResult<Var> {
        match self.scope.iter().rev().position(|(x, _)| *x == n) {
            Some(i) => {
                let k = self.scope[self.scope.len() - 1 - i].1;
                if k != kind {
                    return self.error(format!("`{n}` is bound as a {k} variable, used as a {kind}"));
                }
                Ok(Var::Bound(i as u32))
            }
            None => Ok(Var::Free(n)),
        }
    }

    fn term_individual(&mut self) -> PResult<Var> {
        let n = self.name("individual")?;
        self.resolve(n, Kind::Individual)
    }

    fn under<T>(&mut self, binders: &[(Name, Kind)], f: impl FnOnce(&mut Self) -> PResult<T>) -> PResult<T> {
        self.scope.extend_from_slice(binders);
        let out = f(self);
        self.scope.truncate(self.scope.len() - binders.len());
        out
    }

    fn term(&mut self) -> PResult<Term> {
        let Tok::Ident(head) = self.peek().clone() else {
            return self.error(format!("expected a proof term, found {}", self.peek().describe()));
        };
        let is_call = *self.peek2() == Tok::LParen;
        if !is_call || !RESERVED.contains(&head.as_str()) {
            let n = self.name("proof variable")?;
            return Ok(Term::Var(self.resolve(n, Kind::Proof)?));
        }
        self.bump();
        self.expect(Tok::LParen)?;
        let b = Box::new;
        let t = match head.as_str() {
            "pair" => {
                let x = self.term()?;
                self.expect(Tok::Comma)?;
                Term::Pair(b(x), b(self.term()?))
            }
            "fst" => Term::Fst(b(self.term()?)),
            "snd" => Term::Snd(b(self.term()?)),
            "inl" => Term::Inl(b(self.term()?)),
            "inr" => Term::Inr(b(self.term()?)),
            "app" => {
                let f = self.term()?;
                self.expect(Tok::Comma)?;
                Term::App(b(f), b(self.term()?))
            }
            "case" => {
                let s = self.term()?;
                self.expect(Tok::Comma)?;
                let l = self.branch(Kind::Proof)?;
                self.expect(Tok::Comma)?;
                let r = self.branch(Kind::Proof)?;
                Term::Case(b(s), b(l), b(r))
            }
            "lam" => {
                let x = self.name("bound variable")?;
                self.expect(Tok::Dot)?;
                Term::Lam(b(self.under(&[(x, Kind::Proof)], |p| p.term())?))
            }
            "Lam" => {
                let x = self.name("bound variable")?;
                self.expect(Tok::Colon)?;
                let sort = Sort(self.name("sort")?);
                self.expect(Tok::Dot)?;
                Term::BigLam(sort, b(self.under(&[(x, Kind::Individual)], |p| p.term())?))
            }
            "extr" => {
                let f = self.term()?;
                self.expect(Tok::Comma)?;
                Term::Extr(b(f), self.term_individual()?)
            }
            "eps" => {
                let i = self.term_individual()?;
                self.expect(Tok::Comma)?;
                Term::Eps(i, b(self.term()?))
            }
            "inst" => {
                let s = self.term()?;
                self.expect(Tok::Comma)?;
                let t = self.name("bound variable")?;
                let g = self.name("bound variable")?;
                if t == g {
                    return self.error(format!("`{t}` bound twice"));
                }
                self.expect(Tok::FatArrow)?;
                let d = self.under(&[(t, Kind::Individual), (g, Kind::Proof)], |p| p.term())?;
                Term::Inst(b(s), b(d))
            }
            "path" => {
                let r = self.path()?;
                self.expect(Tok::Comma)?;
                let i = self.term_individual()?;
                self.expect(Tok::Comma)?;
                Term::PathIntro(r, i, self.term_individual()?)
            }
            "rewr" => {
                let s = self.term()?;
                self.expect(Tok::Comma)?;
                let d = self.branch(Kind::Path)?;
                Term::Rewr(b(s), b(d))
            }
            other => return self.error(format!("`{other}` does not begin a proof term")),
        };
        self.expect(Tok::RParen)?;
        Ok(t)
    }

    fn branch(&mut self, kind: Kind) -> PResult<Term> {
        let x = self.name("bound variable")?;
        self.expect(Tok::FatArrow)?;
        self.under(&[(x, kind)], |p| p.term())
    }

    fn path(&mut self) -> PResult<Path> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "rho" => {
                self.bump();
                Ok(Path::Refl)
            }
            Tok::Ident(s) if s == "sym" && *self.peek2() == Tok::LParen => {
                self.bump();
                self.bump();
                let p = self.path()?;
                self.expect(Tok::RParen)?;
                Ok(Path::sym(p))
            }
            Tok::Ident(s) if s == "tr" && *self.peek2() == Tok::LParen => {
                self.bump();
                self.bump();
                let p = self.path()?;
                self.expect(Tok::Comma)?;
                let q = self.path()?;
                self.expect(Tok::RParen)?;
                Ok(Path::trans(p, q))
            }
            Tok::Ident(s) if s == "beta" => {
                self.bump();
                let mut label = String::from("beta");
                self.expect(Tok::Minus)?;
                let part = self.ident("rule label")?;
                label.push('-');
                label.push_str(&part);
                if part == "case" {
                    self.expect(Tok::Minus)?;
                    label.push('-');
                    label.push_str(&self.ident("rule label")?);
                }
                let Some(rule) = Rule::from_label(&label) else {
                    return self.error(format!("unknown rule label `{label}`"));
                };
                let position = if self.eat(&Tok::At) { self.position()? } else { Position::root() };
                Ok(Path::Step(Step::new(rule, position)))
            }
            Tok::Ident(_) => {
                let n = self.name("path variable")?;
                Ok(Path::Var(self.resolve(n, Kind::Path)?))
            }
            t => self.error(format!("expected a path, found {}", t.describe())),
        }
    }

    fn position(&mut self) -> PResult<Position> {
        if let Tok::Ident(s) = self.peek() {
            if s == "root" {
                self.bump();
                return Ok(Position::root());
            }
        }
        let mut out = Vec::new();
        loop {
            match self.bump() {
                Tok::Num(n) if n <= 2 => out.push(n as u8),
                _ => {
                    self.at -= 1;
                    return self.error("expected a child index 0, 1 or 2");
                }
            }
            if !self.eat(&Tok::Dot) {
                break;
            }
        }
        Ok(Position(out))
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_proofterm(text: &str) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_path(text: &str) -> Result<Path, SyntaxError> {
    let mut p = Parser::new(text)?;
    let t = p.path()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_individual(text: &str) -> Result<Var, SyntaxError> {
    let mut p = Parser::new(text)?;
    let n = p.name("individual")?;
    p.finish()?;
    Ok(Var::Free(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(p: &str) -> Formula {
        Formula::atom(p, &[])
    }

    #[test]
    fn quantifier() {
        let f = parse_formula("forall x:D. P(x)").unwrap();
        assert_eq!(
            f,
            Formula::Forall(
                Sort::new("D"),
                Box::new(Formula::Atom(Name::new("P"), vec![Var::Bound(0)]))
            )
        );
    }

    #[test]
    fn identity_formula() {
        let f = parse_formula("Id(A, a, b)").unwrap();
        assert_eq!(f, Formula::Id(Sort::new("A"), Var::free("a"), Var::free("b")));
    }

    #[test]
    fn precedence_and_associativity() {
        let (p, q, r) = (atom("P"), atom("Q"), atom("R"));
        let cases = [
            ("P & Q -> P", Formula::implies(Formula::and(p.clone(), q.clone()), p.clone())),
            ("P | Q & R", Formula::or(p.clone(), Formula::and(q.clone(), r.clone()))),
            ("P & Q | R", Formula::or(Formula::and(p.clone(), q.clone()), r.clone())),
            (
                "P -> Q -> R",
                Formula::implies(p.clone(), Formula::implies(q.clone(), r.clone())),
            ),
            ("P & Q & R", Formula::and(Formula::and(p.clone(), q.clone()), r.clone())),
            ("P | Q | R", Formula::or(Formula::or(p.clone(), q.clone()), r.clone())),
            ("(P -> Q) -> R", Formula::implies(Formula::implies(p.clone(), q.clone()), r.clone())),
            ("~P & Q", Formula::and(Formula::NegAtom(Name::new("P"), vec![]), q.clone())),
            (
                "P & forall x:D. Q | R",
                Formula::and(
                    p.clone(),
                    Formula::Forall(Sort::new("D"), Box::new(Formula::or(q.clone(), r.clone()))),
                ),
            ),
        ];
        for (text, expected) in cases {
            assert_eq!(parse_formula(text).unwrap(), expected, "{text}");
        }
    }

    #[test]
    fn proof_terms() {
        assert_eq!(
            parse_proofterm("fst(pair(a,b))").unwrap(),
            Term::fst(Term::pair(Term::var("a"), Term::var("b")))
        );
        assert_eq!(parse_proofterm("x").unwrap(), Term::var("x"));
        assert_eq!(
            parse_proofterm("inst(e, t g => d)").unwrap(),
            Term::Inst(Box::new(Term::var("e")), Box::new(Term::var("d")))
        );
        assert_eq!(
            parse_proofterm("inst(e, t g => g)").unwrap(),
            Term::Inst(Box::new(Term::var("e")), Box::new(Term::Var(Var::Bound(0))))
        );
        assert_eq!(
            parse_proofterm("inst(e, t g => eps(t, g))").unwrap(),
            Term::Inst(
                Box::new(Term::var("e")),
                Box::new(Term::Eps(Var::Bound(1), Box::new(Term::Var(Var::Bound(0)))))
            )
        );
    }

    #[test]
    fn paths() {
        assert_eq!(parse_path("rho").unwrap(), Path::Refl);
        assert_eq!(
            parse_path("tr(beta-fst, sym(beta-case-l@0.1))").unwrap(),
            Path::trans(
                Path::Step(Step::new(Rule::BetaFst, Position::root())),
                Path::sym(Path::Step(Step::new(Rule::BetaCaseL, Position(vec![0, 1]))))
            )
        );
        assert!(parse_path("beta-foo").is_err());
    }

    #[test]
    fn kind_errors_and_positions() {
        let err = parse_proofterm("lam(x. extr(f, x))").unwrap_err();
        assert!(matches!(err, SyntaxError::Parse { line: 1, .. }));
        let err = parse_formula("P &\n  & Q").unwrap_err();
        assert_eq!(
            err,
            SyntaxError::Parse {
                line: 2,
                column: 3,
                message: "expected a formula, found `&`".into()
            }
        );
        assert!(parse_proofterm("pair(a)").is_err());
        assert!(parse_proofterm("lam").is_err());
    }
}
