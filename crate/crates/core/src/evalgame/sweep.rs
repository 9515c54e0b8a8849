//! Exhaustive and random sweeps comparing game winners with satisfaction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::bit;
use super::{eloise_wins, satisfied, Batch, Env, GameError, Model, Assignment};
use crate::syntax::{Formula, Name, Sort, Var};

fn element_name(i: usize) -> Name {
    const NAMES: [&str; 3] = ["a", "b", "c"];
    NAMES.get(i).map_or_else(|| Name::from(format!("e{i}")), |s| Name::new(s))
}

/// Every model with one sort `D` of exactly `n` elements and one binary
/// predicate `E`, in order of the bit pattern of `E` (row-major over pairs).
pub fn binary_models(n: usize) -> Vec<Model> {
    let elems: Vec<Name> = (0..n).map(element_name).collect();
    let pairs: Vec<Vec<Name>> = (0..n * n)
        .map(|k| vec![elems[k / n].clone(), elems[k % n].clone()])
        .collect();
    (0..1u64 << (n * n))
        .map(|bits| {
            let mut m = Model::new();
            m.add_sort(Sort::new("D"), elems.clone()).unwrap();
            let tuples: Vec<Vec<Name>> = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| bits >> k & 1 == 1)
                .map(|(_, p)| p.clone())
                .collect();
            m.add_pred(Name::new("E"), vec![Sort::new("D"); 2], &tuples).unwrap();
            m
        })
        .collect()
}

/// Connectives counted by the sweeps: `&`, `|` and the quantifiers.
pub fn connectives(f: &Formula) -> usize {
    match f {
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => 1 + connectives(a) + connectives(b),
        Formula::Forall(_, b) | Formula::Exists(_, b) => 1 + connectives(b),
        _ => 0,
    }
}

pub fn quantifier_depth(f: &Formula) -> usize {
    match f {
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            quantifier_depth(a).max(quantifier_depth(b))
        }
        Formula::Forall(_, b) | Formula::Exists(_, b) => 1 + quantifier_depth(b),
        _ => 0,
    }
}

fn e(x: u32, y: u32, positive: bool) -> Formula {
    let args = vec![Var::Bound(x), Var::Bound(y)];
    if positive {
        Formula::Atom(Name::new("E"), args)
    } else {
        Formula::NegAtom(Name::new("E"), args)
    }
}

/// Visit every NNF formula over `E/2` with exactly `c` connectives, `scope`
/// variables in scope and at most `q` further nested quantifiers. Literals
/// only mention bound variables.
fn visit(c: usize, scope: u32, q: usize, f: &mut dyn FnMut(&Formula)) {
    if c == 0 {
        for x in 0..scope {
            for y in 0..scope {
                f(&e(x, y, true));
                f(&e(x, y, false));
            }
        }
        return;
    }
    for a in 0..c {
        visit(a, scope, q, &mut |l| {
            visit(c - 1 - a, scope, q, &mut |r| {
                f(&Formula::and(l.clone(), r.clone()));
                f(&Formula::or(l.clone(), r.clone()));
            })
        });
    }
    if q > 0 {
        let d = || Sort::new("D");
        visit(c - 1, scope + 1, q - 1, &mut |b| {
            f(&Formula::Forall(d(), Box::new(b.clone())));
            f(&Formula::Exists(d(), Box::new(b.clone())));
        });
    }
}

/// Visit every sentence with at most `max_connectives` connectives and
/// quantifier depth at most `max_depth`, smallest first.
pub fn for_each_sentence(max_connectives: usize, max_depth: usize, f: &mut dyn FnMut(&Formula)) {
    for c in 0..=max_connectives {
        visit(c, 0, max_depth, f);
    }
}

/// Outcome of a sweep.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Agreement {
    pub sentences: u64,
    /// Sentence and model pairs compared.
    pub pairs: u64,
    /// Sentence, domain size and model index within that size.
    pub disagreements: Vec<(Formula, usize, usize)>,
}

impl Agreement {
    pub fn percent(&self) -> f64 {
        if self.pairs == 0 {
            return 100.0;
        }
        100.0 * (self.pairs - self.disagreements.len() as u64) as f64 / self.pairs as f64
    }
}

/// Compares game winners with satisfaction over groups of models that share
/// a domain.
pub struct Crosscheck<'m> {
    batches: Vec<(usize, usize, Batch<'m>)>,
    pub agreement: Agreement,
}

impl<'m> Crosscheck<'m> {
    /// `groups[k]` is a list of models with a common signature and domain.
    pub fn new(groups: &'m [Vec<Model>]) -> Result<Self, GameError> {
        let mut batches = Vec::new();
        for (g, models) in groups.iter().enumerate() {
            for (k, chunk) in models.chunks(super::BATCH).enumerate() {
                batches.push((g, k * super::BATCH, Batch::new(chunk)?));
            }
        }
        Ok(Crosscheck {
            batches,
            agreement: Agreement::default(),
        })
    }

    pub fn check(&mut self, sentence: &Formula) -> Result<(), GameError> {
        self.agreement.sentences += 1;
        let empty = Assignment::new();
        for (group, offset, batch) in &self.batches {
            let mut env = Env::new(batch.shape(), &empty)?;
            let game = eloise_wins(batch, sentence, &mut env)?;
            let truth = satisfied(batch, sentence, &mut env)?;
            let n = batch.models().len();
            self.agreement.pairs += n as u64;
            if game != truth {
                for i in (0..n).filter(|&i| bit(&game, i) != bit(&truth, i)) {
                    self.agreement.disagreements.push((sentence.clone(), *group, offset + i));
                }
            }
        }
        Ok(())
    }
}

/// All models of sizes `1..=max_size`, grouped by size.
pub fn model_groups(max_size: usize) -> Vec<Vec<Model>> {
    (1..=max_size).map(binary_models).collect()
}

/// The exhaustive sweep: every sentence within the bounds against every
/// model of size at most `max_size`.
pub fn exhaustive(max_connectives: usize, max_depth: usize, max_size: usize) -> Result<Agreement, GameError> {
    let groups = model_groups(max_size);
    let mut cc = Crosscheck::new(&groups)?;
    let mut err = None;
    for_each_sentence(max_connectives, max_depth, &mut |f| {
        if err.is_none() {
            err = cc.check(f).err();
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(cc.agreement),
    }
}

/// A random NNF sentence over `E/2`.
pub fn random_sentence(rng: &mut impl Rng, connectives: usize, max_depth: usize) -> Formula {
    fn go(rng: &mut impl Rng, c: usize, scope: u32, q: usize) -> Formula {
        let quantify = q > 0 && (scope == 0 || rng.gen_bool(0.35));
        if c == 0 || (scope == 0 && q == 0) {
            if scope == 0 {
                // no variable to mention: quantify vacuously over a literal
                return Formula::Exists(Sort::new("D"), Box::new(e(0, 0, rng.gen())));
            }
            return e(rng.gen_range(0..scope), rng.gen_range(0..scope), rng.gen());
        }
        if quantify {
            let body = Box::new(go(rng, c - 1, scope + 1, q - 1));
            return if rng.gen() { Formula::Forall(Sort::new("D"), body) } else { Formula::Exists(Sort::new("D"), body) };
        }
        let left = rng.gen_range(0..c);
        let (a, b) = (go(rng, left, scope, q), go(rng, c - 1 - left, scope, q));
        if rng.gen() { Formula::and(a, b) } else { Formula::or(a, b) }
    }
    let c = rng.gen_range(1..=connectives.max(1));
    go(rng, c, 0, max_depth.max(1))
}

/// Seeded random sentences against every model of size at most `max_size`.
pub fn random(seed: u64, count: usize, connectives: usize, max_depth: usize, max_size: usize) -> Result<Agreement, GameError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = model_groups(max_size);
    let mut cc = Crosscheck::new(&groups)?;
    for _ in 0..count {
        cc.check(&random_sentence(&mut rng, connectives, max_depth))?;
    }
    Ok(cc.agreement)
}
