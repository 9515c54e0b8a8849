//! Line-oriented file formats: signatures and judgements.
//!
//! ```text
//! # signature            # judgement
//! sort D                 x : D
//! pred E/2 : D D         h : forall y:D. E(x, y)
//! pred A/0               r : x = c : D
//! const c : D            |- extr(h, c) : E(x, c)
//! ```

use std::sync::Arc;

use super::parse::RESERVED;
use super::{
    parse_formula, parse_individual, parse_proofterm, Context, Decl, Formula, Name, Signature,
    Sort, SyntaxError, Term,
};

/// A context, subject and formula read from a judgement file.
#[derive(Clone, Debug)]
pub struct Judgement {
    pub context: Context,
    pub term: Term,
    pub formula: Formula,
    /// 1-based line of the `|-` line.
    pub line: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> SyntaxError {
    SyntaxError::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && !RESERVED.contains(&s)
}

/// Lines with their 1-based number and the column where the content starts,
/// skipping blanks and `#` comments.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim_start();
        let content = trimmed.trim_end();
        (!content.is_empty()).then(|| (i + 1, line.len() - trimmed.len() + 1, content))
    })
}

pub fn parse_signature(text: &str) -> Result<Signature, SyntaxError> {
    let mut sig = Signature::new();
    for (line, col, content) in content_lines(text) {
        let words: Vec<&str> = content.split_whitespace().collect();
        let ident = |w: &str| {
            if is_ident(w) {
                Ok(Name::new(w))
            } else {
                Err(err(line, col, format!("`{w}` is not a valid identifier")))
            }
        };
        let at_line = |e: SyntaxError| match e {
            e @ SyntaxError::Parse { .. } => e,
            e => err(line, col, e.to_string()),
        };
        match words.as_slice() {
            ["sort", d] => sig.add_sort(Sort(ident(d)?)).map_err(at_line)?,
            ["const", c, ":", d] => sig.add_const(ident(c)?, Sort(ident(d)?)).map_err(at_line)?,
            ["pred", head, rest @ ..] => {
                let (name, arity) = head
                    .split_once('/')
                    .ok_or_else(|| err(line, col, "expected `pred NAME/ARITY : SORT ...`"))?;
                let arity: usize = arity
                    .parse()
                    .map_err(|_| err(line, col, format!("bad arity `{arity}`")))?;
                let sorts = match rest {
                    [] => vec![],
                    [":", sorts @ ..] => sorts.iter().map(|s| ident(s).map(Sort)).collect::<Result<_, _>>()?,
                    _ => return Err(err(line, col, "expected `:` before argument sorts")),
                };
                if sorts.len() != arity {
                    return Err(SyntaxError::Arity {
                        name: Name::new(name),
                        expected: arity,
                        found: sorts.len(),
                    });
                }
                sig.add_pred(ident(name)?, sorts).map_err(at_line)?;
            }
            _ => return Err(err(line, col, format!("unrecognised declaration `{content}`"))),
        }
    }
    Ok(sig)
}

/// Read one context line (`x : D`, `x : formula` or `r : a = b : D`) and
/// append it to `ctx`. `line` and `column` locate the text for errors.
pub fn parse_context_line(
    ctx: &mut Context,
    text: &str,
    line: usize,
    column: usize,
) -> Result<(), SyntaxError> {
    let Some((name, rest)) = text.split_once(':') else {
        return Err(err(line, column, "expected `name : declaration`"));
    };
    let name_text = name.trim();
    if !is_ident(name_text) {
        return Err(err(line, column, format!("`{name_text}` is not a valid identifier")));
    }
    let name = Name::new(name_text);
    let body = rest.trim();
    let body_column = column + text.find(':').unwrap() + 1 + (rest.len() - rest.trim_start().len());
    let decl = if is_ident(body) && ctx.signature().has_sort(&Sort::new(body)) {
        Decl::Individual {
            name,
            sort: Sort::new(body),
        }
    } else if body.contains('=') && !body.contains("=>") {
        let (eq, sort) = body
            .rsplit_once(':')
            .ok_or_else(|| err(line, body_column, "expected `lhs = rhs : SORT`"))?;
        let (lhs, rhs) = eq.split_once('=').unwrap();
        let ind = |s: &str| parse_individual(s.trim()).map_err(|e| e.offset(line - 1, body_column - 1));
        let sort = sort.trim();
        if !is_ident(sort) {
            return Err(err(line, body_column, format!("`{sort}` is not a valid sort")));
        }
        Decl::Equality {
            name,
            sort: Sort::new(sort),
            lhs: ind(lhs)?,
            rhs: ind(rhs)?,
        }
    } else {
        let formula = parse_formula(body).map_err(|e| e.offset(line - 1, body_column - 1))?;
        Decl::Hypothesis { name, formula }
    };
    ctx.push(decl).map_err(|e| match e {
        e @ SyntaxError::Parse { .. } => e,
        e => err(line, column, e.to_string()),
    })
}

/// Split `term : formula` at the first top-level colon.
fn split_subject(text: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ':' if depth == 0 => return Some((&text[..i], &text[i + 1..])),
            _ => {}
        }
    }
    None
}

/// Read a judgement file: context lines followed by `|- term : formula`.
pub fn parse_judgement(signature: Arc<Signature>, text: &str) -> Result<Judgement, SyntaxError> {
    let mut context = Context::new(signature);
    let mut lines = content_lines(text).peekable();
    while let Some((line, col, content)) = lines.next() {
        let Some(goal) = content.strip_prefix("|-") else {
            parse_context_line(&mut context, content, line, col)?;
            continue;
        };
        if let Some((extra, ecol, _)) = lines.next() {
            return Err(err(extra, ecol, "unexpected text after the `|-` line"));
        }
        let goal_col = col + 2;
        let (term_text, formula_text) = split_subject(goal)
            .ok_or_else(|| err(line, goal_col, "expected `|- term : formula`"))?;
        let lead = |s: &str| s.len() - s.trim_start().len();
        let term_col = goal_col + lead(term_text);
        let formula_col = goal_col + term_text.len() + 1 + lead(formula_text);
        let term = parse_proofterm(term_text.trim()).map_err(|e| e.offset(line - 1, term_col - 1))?;
        let formula =
            parse_formula(formula_text.trim()).map_err(|e| e.offset(line - 1, formula_col - 1))?;
        context.check_formula(&formula).map_err(|e| err(line, formula_col, e.to_string()))?;
        return Ok(Judgement {
            context,
            term,
            formula,
            line,
        });
    }
    Err(err(text.lines().count().max(1), 1, "missing `|- term : formula` line"))
}
