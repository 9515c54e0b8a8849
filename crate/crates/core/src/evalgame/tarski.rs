//! Tarskian satisfaction, written independently of the game.

use super::model::{and, and_not, or, Mask};
use super::{Batch, Env, GameError};
use crate::syntax::{Formula, Name, Var};
use super::{Assignment, Element, Model};

fn value(v: &Var, model: &Model, s: &Assignment, stack: &[Name]) -> Result<Element, GameError> {
    let name = match v {
        Var::Bound(i) if (*i as usize) < stack.len() => Some(&stack[stack.len() - 1 - *i as usize]),
        Var::Bound(i) => s.get(&Var::Bound(*i - stack.len() as u32)),
        Var::Free(n) => s.get(v).or(Some(n)),
    };
    name.and_then(|n| model.element(n))
        .ok_or_else(|| GameError::Unbound(match v {
            Var::Free(n) => n.to_string(),
            Var::Bound(i) => format!("#{i}"),
        }))
}

/// `M ⊨ φ[s]`, by the recursive clauses.
pub fn tarski_eval(f: &Formula, model: &Model, s: &Assignment) -> Result<bool, GameError> {
    fn sat(f: &Formula, m: &Model, s: &Assignment, stack: &mut Vec<Name>) -> Result<bool, GameError> {
        Ok(match f {
            Formula::Atom(p, xs) | Formula::NegAtom(p, xs) => {
                let interp = m.pred(p).ok_or_else(|| GameError::UnknownPred(p.clone()))?;
                if interp.sorts.len() != xs.len() {
                    return Err(GameError::Arity { name: p.clone(), expected: interp.sorts.len(), found: xs.len() });
                }
                let tuple = xs
                    .iter()
                    .map(|x| value(x, m, s, stack).map(|e| e.index))
                    .collect::<Result<Vec<_>, _>>()?;
                let holds = interp.tuples.contains(&tuple);
                if matches!(f, Formula::Atom(..)) { holds } else { !holds }
            }
            Formula::And(a, b) => {
                let x = sat(a, m, s, stack)?;
                let y = sat(b, m, s, stack)?;
                x && y
            }
            Formula::Or(a, b) => {
                let x = sat(a, m, s, stack)?;
                let y = sat(b, m, s, stack)?;
                x || y
            }
            Formula::Forall(sort, body) | Formula::Exists(sort, body) => {
                let i = m.sort_index(sort).ok_or_else(|| GameError::UnknownSort(sort.clone()))?;
                let universal = matches!(f, Formula::Forall(..));
                let mut result = universal;
                for a in m.domain(i) {
                    stack.push(a.clone());
                    let r = sat(body, m, s, stack);
                    stack.pop();
                    if r? != universal {
                        result = !universal;
                    }
                }
                result
            }
            Formula::Implies(..) | Formula::Id(..) => return Err(GameError::NotNnf(f.to_string())),
        })
    }
    sat(f, model, s, &mut Vec::new())
}

/// Batched satisfaction: the mask of models satisfying `f` under `env`.
pub(crate) fn satisfied(batch: &Batch, f: &Formula, env: &mut Env) -> Result<Mask, GameError> {
    Ok(match f {
        Formula::Atom(p, xs) | Formula::NegAtom(p, xs) => {
            let m = batch
                .atom(p, xs.len(), |k| env.resolve(&xs[k]))
                .ok_or_else(|| GameError::UnknownPred(p.clone()))??;
            if matches!(f, Formula::Atom(..)) { m } else { and_not(batch.full(), &m) }
        }
        Formula::And(a, b) => and(&satisfied(batch, a, env)?, &satisfied(batch, b, env)?),
        Formula::Or(a, b) => or(&satisfied(batch, a, env)?, &satisfied(batch, b, env)?),
        Formula::Forall(sort, body) | Formula::Exists(sort, body) => {
            let i = env.sort(sort)?;
            let universal = matches!(f, Formula::Forall(..));
            // ∀ holds where no instance fails; ∃ where some instance holds.
            let mut hit = [0; super::model::WORDS];
            for k in 0..batch.shape().domain(i).len() {
                env.bound.push(Element { sort: i as u16, index: k as u16 });
                let r = satisfied(batch, body, env);
                env.bound.pop();
                let r = r?;
                hit = if universal { or(&hit, &and_not(batch.full(), &r)) } else { or(&hit, &r) };
            }
            if universal { and_not(batch.full(), &hit) } else { hit }
        }
        Formula::Implies(..) | Formula::Id(..) => return Err(GameError::NotNnf(f.to_string())),
    })
}
