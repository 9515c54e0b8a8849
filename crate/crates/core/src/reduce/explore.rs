//! Exhaustive exploration of all reduction orders.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use super::{beta_step, find_redexes, ReduceError, Trace};
use crate::syntax::Term;

/// Summary of every maximal reduction sequence from a term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Exploration {
    /// Distinct normal forms reached, in term order.
    pub normal_forms: Vec<Term>,
    /// Length of the longest sequence.
    pub longest: usize,
    /// Number of distinct sequences (saturating).
    pub sequences: u128,
    /// Number of distinct terms reachable (including the start).
    pub reachable: usize,
}

#[derive(Debug)]
struct Info {
    normal_forms: Rc<BTreeSet<Term>>,
    longest: usize,
    sequences: u128,
}

/// A memoizing explorer; reuse one across related terms to share work.
pub struct Explorer {
    memo: HashMap<Term, Rc<Info>>,
    limit: usize,
}

impl Explorer {
    pub fn new(limit: usize) -> Self {
        Explorer {
            memo: HashMap::new(),
            limit,
        }
    }

    fn visit(&mut self, t: &Term) -> Result<Rc<Info>, ReduceError> {
        if let Some(i) = self.memo.get(t) {
            return Ok(i.clone());
        }
        if self.memo.len() >= self.limit {
            return Err(ReduceError::ExplorationLimit(self.limit));
        }
        let redexes = find_redexes(t);
        let info = if redexes.is_empty() {
            Info {
                normal_forms: Rc::new(BTreeSet::from([t.clone()])),
                longest: 0,
                sequences: 1,
            }
        } else {
            let mut nfs: Option<Rc<BTreeSet<Term>>> = None;
            let mut longest = 0;
            let mut sequences: u128 = 0;
            for r in &redexes {
                let next = beta_step(t, r)?;
                let sub = self.visit(&next)?;
                nfs = Some(match nfs {
                    None => sub.normal_forms.clone(),
                    Some(acc) if acc == sub.normal_forms => acc,
                    Some(acc) => Rc::new(acc.union(&sub.normal_forms).cloned().collect()),
                });
                longest = longest.max(1 + sub.longest);
                sequences = sequences.saturating_add(sub.sequences);
            }
            Info {
                normal_forms: nfs.unwrap(),
                longest,
                sequences,
            }
        };
        let info = Rc::new(info);
        self.memo.insert(t.clone(), info.clone());
        Ok(info)
    }

    pub fn explore(&mut self, t: &Term) -> Result<Exploration, ReduceError> {
        let before = self.memo.len();
        let info = self.visit(t)?;
        Ok(Exploration {
            normal_forms: info.normal_forms.iter().cloned().collect(),
            longest: info.longest,
            sequences: info.sequences,
            reachable: self.memo.len() - before,
        })
    }
}

/// Explore every reduction order from `t`, visiting at most `limit` terms.
pub fn explore(t: &Term, limit: usize) -> Result<Exploration, ReduceError> {
    let mut e = Explorer::new(limit);
    let mut x = e.explore(t)?;
    x.reachable = e.memo.len();
    Ok(x)
}

/// One trace per distinct maximal reduction sequence, in redex order.
pub fn enumerate_traces(t: &Term, max_steps: usize, max_traces: usize) -> Result<Vec<Trace>, ReduceError> {
    let mut out = Vec::new();
    let mut stack = vec![Trace::new(t.clone())];
    while let Some(trace) = stack.pop() {
        let redexes = find_redexes(trace.end());
        if redexes.is_empty() {
            if out.len() == max_traces {
                return Err(ReduceError::ExplorationLimit(max_traces));
            }
            out.push(trace);
            continue;
        }
        if trace.len() == max_steps {
            return Err(ReduceError::StepBound { bound: max_steps });
        }
        for r in redexes.iter().rev() {
            let mut next = trace.clone();
            next.push(r)?;
            stack.push(next);
        }
    }
    Ok(out)
}
