//! Finite models, assignments, and batches of models sharing a domain.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::GameError;
use crate::syntax::{Name, Signature, Sort, Var};

/// A finite structure: non-empty domains and predicate extensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    sorts: Vec<Sort>,
    domains: Vec<Vec<Name>>,
    elements: HashMap<Name, Element>,
    preds: BTreeMap<Name, Interpretation>,
}

/// An element, by sort and position in its declared domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element {
    pub sort: u16,
    pub index: u16,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    pub sorts: Vec<usize>,
    pub tuples: BTreeSet<Vec<u16>>,
}

fn line_err(line: usize, message: impl Into<String>) -> GameError {
    GameError::Parse {
        line,
        message: message.into(),
    }
}

fn ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(x) if x.is_ascii_alphabetic() || x == '_')
        && c.all(|x| x.is_ascii_alphanumeric() || x == '_' || x == '\'')
}

/// Split `{x, (y, z), ...}` into top-level items.
fn braced(text: &str, line: usize) -> Result<Vec<&str>, GameError> {
    let inner = text
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| line_err(line, "expected `{ ... }`"))?;
    let mut items = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                items.push(inner[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = inner[start..].trim();
    if !last.is_empty() || !items.is_empty() {
        items.push(last);
    }
    if items.iter().any(|s| s.is_empty()) {
        return Err(line_err(line, "empty item in set"));
    }
    Ok(items)
}

impl Model {
    pub fn new() -> Self {
        Model {
            sorts: Vec::new(),
            domains: Vec::new(),
            elements: HashMap::new(),
            preds: BTreeMap::new(),
        }
    }

    pub fn add_sort(&mut self, sort: Sort, elements: Vec<Name>) -> Result<(), GameError> {
        if self.sorts.contains(&sort) {
            return Err(GameError::Invalid(format!("sort {sort} declared twice")));
        }
        if elements.is_empty() {
            return Err(GameError::EmptyDomain(sort));
        }
        let s = self.sorts.len() as u16;
        for (i, e) in elements.iter().enumerate() {
            let el = Element { sort: s, index: i as u16 };
            if self.elements.insert(e.clone(), el).is_some() {
                return Err(GameError::Invalid(format!("element {e} declared twice")));
            }
        }
        self.sorts.push(sort);
        self.domains.push(elements);
        Ok(())
    }

    /// Declare a predicate; tuples are given by element name and
    /// deduplicated.
    pub fn add_pred(&mut self, name: Name, sorts: Vec<Sort>, tuples: &[Vec<Name>]) -> Result<(), GameError> {
        if self.preds.contains_key(&name) {
            return Err(GameError::Invalid(format!("predicate {name} declared twice")));
        }
        let sorts = sorts
            .iter()
            .map(|s| self.sort_index(s).ok_or_else(|| GameError::UnknownSort(s.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != sorts.len() {
                return Err(GameError::Arity {
                    name: name.clone(),
                    expected: sorts.len(),
                    found: t.len(),
                });
            }
            let mut row = Vec::with_capacity(t.len());
            for (e, &s) in t.iter().zip(&sorts) {
                match self.elements.get(e) {
                    Some(el) if el.sort as usize == s => row.push(el.index),
                    Some(_) => {
                        return Err(GameError::Invalid(format!(
                            "element {e} is not of sort {}",
                            self.sorts[s]
                        )))
                    }
                    None => return Err(GameError::UnknownElement(e.clone())),
                }
            }
            set.insert(row);
        }
        self.preds.insert(name, Interpretation { sorts, tuples: set });
        Ok(())
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn sort_index(&self, s: &Sort) -> Option<usize> {
        self.sorts.iter().position(|x| x == s)
    }

    pub fn domain(&self, sort: usize) -> &[Name] {
        &self.domains[sort]
    }

    pub fn element(&self, name: &Name) -> Option<Element> {
        self.elements.get(name).copied()
    }

    pub fn name(&self, e: Element) -> &Name {
        &self.domains[e.sort as usize][e.index as usize]
    }

    pub fn pred(&self, name: &Name) -> Option<&Interpretation> {
        self.preds.get(name)
    }

    pub fn preds(&self) -> impl Iterator<Item = (&Name, &Interpretation)> {
        self.preds.iter()
    }

    pub fn holds(&self, pred: &Name, args: &[Element]) -> bool {
        self.preds
            .get(pred)
            .is_some_and(|i| i.tuples.contains(&args.iter().map(|e| e.index).collect::<Vec<_>>()))
    }

    /// The signature the model interprets; elements become constants.
    pub fn signature(&self) -> Signature {
        let mut sig = Signature::new();
        for (s, dom) in self.sorts.iter().zip(&self.domains) {
            sig.add_sort(s.clone()).expect("sorts are distinct");
            for e in dom {
                sig.add_const(e.clone(), s.clone()).expect("elements are distinct");
            }
        }
        for (p, i) in &self.preds {
            let sorts = i.sorts.iter().map(|&s| self.sorts[s].clone()).collect();
            sig.add_pred(p.clone(), sorts).expect("predicates are distinct");
        }
        sig
    }
}

impl Default for Model {
    fn default() -> Self {
        Model::new()
    }
}

/// Read a model file:
///
/// ```text
/// sort D = {a, b}
/// pred E/2 = {(a,b), (b,a)}
/// pred P/1 : D = {a}
/// ```
///
/// Argument sorts may be omitted when there is a single sort.
pub fn parse_model(text: &str) -> Result<Model, GameError> {
    let mut m = Model::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (head, set) = content
            .split_once('=')
            .ok_or_else(|| line_err(line, "expected `... = { ... }`"))?;
        let words: Vec<&str> = head.split_whitespace().collect();
        let items = braced(set, line)?;
        match words.as_slice() {
            ["sort", name] if ident(name) => {
                let elems = items
                    .iter()
                    .map(|e| if ident(e) { Ok(Name::new(e)) } else { Err(line_err(line, format!("bad element `{e}`"))) })
                    .collect::<Result<Vec<_>, _>>()?;
                m.add_sort(Sort::new(name), elems).map_err(|e| match e {
                    GameError::EmptyDomain(_) => e,
                    e => line_err(line, e.to_string()),
                })?;
            }
            ["pred", sig, rest @ ..] => {
                let (name, arity) = sig
                    .split_once('/')
                    .ok_or_else(|| line_err(line, "expected `pred NAME/ARITY`"))?;
                let arity: usize = arity
                    .parse()
                    .map_err(|_| line_err(line, format!("bad arity `{arity}`")))?;
                let sorts: Vec<Sort> = match rest {
                    [] if arity == 0 => vec![],
                    [] if m.sorts.len() == 1 => vec![m.sorts[0].clone(); arity],
                    [] => return Err(line_err(line, "argument sorts required with several sorts")),
                    [":", ss @ ..] => ss.iter().map(|s| Sort::new(s)).collect(),
                    _ => return Err(line_err(line, "expected `:` before argument sorts")),
                };
                if sorts.len() != arity {
                    return Err(GameError::Arity {
                        name: Name::new(name),
                        expected: arity,
                        found: sorts.len(),
                    });
                }
                let tuples = items
                    .iter()
                    .map(|t| {
                        let t = t.trim();
                        let inner = t.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(t);
                        inner
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(Name::new)
                            .collect::<Vec<_>>()
                    })
                    .collect::<Vec<_>>();
                m.add_pred(Name::new(name), sorts, &tuples).map_err(|e| match e {
                    GameError::Arity { .. } | GameError::UnknownSort(_) => e,
                    e => line_err(line, e.to_string()),
                })?;
            }
            _ => return Err(line_err(line, format!("unrecognised declaration `{content}`"))),
        }
    }
    Ok(m)
}

/// A variable assignment. Free variables are named; the variables bound by
/// quantifiers the game has passed through form a stack, innermost last,
/// addressed by de Bruijn index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    free: BTreeMap<Name, Name>,
    bound: Vec<Name>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    /// `s(a/x)` for a free variable `x`.
    pub fn update(&self, x: &Name, a: &Name) -> Assignment {
        let mut s = self.clone();
        s.free.insert(x.clone(), a.clone());
        s
    }

    /// `s(a/x)` for the variable of the quantifier just passed.
    pub fn push(&self, a: &Name) -> Assignment {
        let mut s = self.clone();
        s.bound.push(a.clone());
        s
    }

    pub fn get(&self, v: &Var) -> Option<&Name> {
        match v {
            Var::Free(n) => self.free.get(n),
            Var::Bound(i) => self.bound.len().checked_sub(1 + *i as usize).map(|k| &self.bound[k]),
        }
    }

    pub fn bound(&self) -> &[Name] {
        &self.bound
    }

    pub fn free(&self) -> impl Iterator<Item = (&Name, &Name)> {
        self.free.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.free.is_empty() && self.bound.is_empty()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.free.iter().map(|(x, a)| format!("{x}={a}")).collect();
        parts.extend(self.bound.iter().enumerate().map(|(k, a)| format!("x{k}={a}")));
        write!(f, "{{{}}}", parts.join(", "))
    }
}

pub(crate) const WORDS: usize = 8;
/// Most models one batch can hold.
pub const BATCH: usize = 64 * WORDS;

/// One bit per model of a batch.
pub(crate) type Mask = [u64; WORDS];

pub(crate) const EMPTY: Mask = [0; WORDS];

pub(crate) fn and(a: &Mask, b: &Mask) -> Mask {
    std::array::from_fn(|i| a[i] & b[i])
}

pub(crate) fn or(a: &Mask, b: &Mask) -> Mask {
    std::array::from_fn(|i| a[i] | b[i])
}

pub(crate) fn and_not(a: &Mask, b: &Mask) -> Mask {
    std::array::from_fn(|i| a[i] & !b[i])
}

pub(crate) fn bit(m: &Mask, i: usize) -> bool {
    m[i / 64] >> (i % 64) & 1 == 1
}

/// Models with the same sorts, elements and predicate declarations,
/// evaluated together one bit per model.
pub struct Batch<'m> {
    models: &'m [Model],
    full: Mask,
    atoms: Vec<(Name, Table)>,
}

pub(crate) struct Table {
    pub radix: Vec<usize>,
    pub masks: Vec<Mask>,
}

impl<'m> Batch<'m> {
    pub fn new(models: &'m [Model]) -> Result<Self, GameError> {
        let first = models.first().ok_or_else(|| GameError::Invalid("empty batch".into()))?;
        if models.len() > BATCH {
            return Err(GameError::Invalid(format!("at most {BATCH} models per batch")));
        }
        let mut full = EMPTY;
        for i in 0..models.len() {
            full[i / 64] |= 1 << (i % 64);
        }
        let mut atoms = Vec::new();
        for (p, interp) in first.preds() {
            let radix: Vec<usize> = interp.sorts.iter().map(|&s| first.domain(s).len()).collect();
            let mut masks = vec![EMPTY; radix.iter().product()];
            for (k, m) in models.iter().enumerate() {
                let mi = m.pred(p).filter(|i| i.sorts == interp.sorts);
                let mi = match mi {
                    Some(mi) if m.domains == first.domains => mi,
                    _ => return Err(GameError::Invalid("batched models must share a signature".into())),
                };
                for t in &mi.tuples {
                    let idx = t.iter().zip(&radix).fold(0, |acc, (&x, &r)| acc * r + x as usize);
                    masks[idx][k / 64] |= 1 << (k % 64);
                }
            }
            atoms.push((p.clone(), Table { radix, masks }));
        }
        if models.iter().any(|m| m.preds.len() != first.preds.len()) {
            return Err(GameError::Invalid("batched models must share a signature".into()));
        }
        Ok(Batch { models, full, atoms })
    }

    pub fn models(&self) -> &'m [Model] {
        self.models
    }

    pub fn shape(&self) -> &'m Model {
        &self.models[0]
    }

    pub(crate) fn full(&self) -> &Mask {
        &self.full
    }

    pub(crate) fn table(&self, pred: &Name) -> Option<&Table> {
        self.atoms.iter().find(|(p, _)| p == pred).map(|(_, t)| t)
    }

    /// The mask of an atom whose arguments are looked up by `arg`.
    pub(crate) fn atom<E>(
        &self,
        pred: &Name,
        arity: usize,
        arg: impl Fn(usize) -> Result<Element, E>,
    ) -> Option<Result<Mask, E>> {
        let t = self.table(pred)?;
        if t.radix.len() != arity {
            return None;
        }
        let mut idx = 0;
        for (k, &r) in t.radix.iter().enumerate() {
            match arg(k) {
                Ok(e) => idx = idx * r + e.index as usize,
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(t.masks[idx]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_a_model() {
        let m = parse_model("sort D = {a,b}\npred E/2 = {(a,b)}").unwrap();
        assert_eq!(m.domain(0).len(), 2);
        let a = m.element(&Name::new("a")).unwrap();
        let b = m.element(&Name::new("b")).unwrap();
        assert!(m.holds(&Name::new("E"), &[a, b]));
        assert!(!m.holds(&Name::new("E"), &[b, a]));
    }

    #[test]
    fn empty_domain_is_rejected() {
        assert!(matches!(parse_model("sort D = {}"), Err(GameError::EmptyDomain(_))));
    }

    #[test]
    fn duplicate_tuples_collapse() {
        let m = parse_model("sort D = {a,b}\npred E/2 = {(a,b), (a, b), (b,b)}").unwrap();
        assert_eq!(m.pred(&Name::new("E")).unwrap().tuples.len(), 2);
    }

    #[test]
    fn malformed_models() {
        assert!(matches!(parse_model("sort D = {a}\npred E/2 = {(a)}"), Err(GameError::Arity { found: 1, .. })));
        assert!(matches!(parse_model("sort D = {a}\npred E/2 : D = {}"), Err(GameError::Arity { .. })));
        assert!(matches!(parse_model("sort D = {a}\npred E/1 : M = {}"), Err(GameError::UnknownSort(_))));
        assert!(parse_model("sort D = {a}\npred P/1 = {z}").is_err());
        assert!(parse_model("sort D {a}").is_err());
        let m = parse_model("sort D = {a}\nsort M = {u, v}\npred R/2 : D M = {(a, v)}\npred Q/0 = {()}").unwrap();
        assert!(m.holds(&Name::new("Q"), &[]));
    }

    #[test]
    fn update_is_local() {
        let s = Assignment::new().update(&Name::new("x"), &Name::new("a"));
        let t = s.update(&Name::new("y"), &Name::new("b"));
        assert_eq!(t.get(&Var::free("x")), s.get(&Var::free("x")));
        let u = t.push(&Name::new("c"));
        assert_eq!(u.get(&Var::Bound(0)).unwrap().as_str(), "c");
        assert_eq!(u.get(&Var::free("y")).unwrap().as_str(), "b");
        assert_eq!(u.get(&Var::Bound(1)), None);
    }
}
