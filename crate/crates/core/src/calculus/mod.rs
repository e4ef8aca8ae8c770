//! Derivation engines for the marginal calculus (complete) and the
//! conditional calculus (sound, depth-bounded), with proof extraction.

mod conditional;
mod instances;
mod marginal;
mod proof;

use std::collections::HashMap;

pub use conditional::{derives_conditional, saturate_conditional, ConditionalClosure};
pub use instances::{
    sample_instance, RuleFamily, RuleInstance, RuleStats, SoundnessReport, Violation,
};
pub use marginal::{derives_marginal, minimal_nonderivable, saturate_marginal, MarginalClosure};
pub use proof::{Justification, Proof, Rule, Step, Verdict};

use crate::atoms::{VarSet, Variable};
use crate::error::{Error, Result};

/// Largest universe accepted by the marginal engine (atoms are pairs of
/// subsets, so the closure can hold up to 4^n atoms).
pub const MAX_MARGINAL_VARS: usize = 12;
/// Largest universe accepted by the conditional engine (8^n atoms).
pub const MAX_CONDITIONAL_VARS: usize = 7;

/// Dense indexing of a finite variable set; subsets become bitmasks in
/// canonical (sorted) order.
#[derive(Debug, Clone)]
pub(crate) struct Universe {
    vars: Vec<Variable>,
    index: HashMap<Variable, usize>,
}

impl Universe {
    pub(crate) fn new(vars: &VarSet, max: usize) -> Result<Self> {
        if vars.len() > max {
            return Err(Error::UniverseTooLarge {
                size: vars.len(),
                max,
            });
        }
        let vars: Vec<Variable> = vars.iter().cloned().collect();
        let index = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        Ok(Universe { vars, index })
    }

    pub(crate) fn len(&self) -> usize {
        self.vars.len()
    }

    pub(crate) fn full(&self) -> u32 {
        ((1u64 << self.vars.len()) - 1) as u32
    }

    pub(crate) fn mask(&self, set: &VarSet) -> u32 {
        set.iter().fold(0, |m, v| m | (1 << self.index[v]))
    }

    pub(crate) fn try_mask(&self, set: &VarSet) -> Option<u32> {
        set.iter()
            .try_fold(0, |m, v| self.index.get(v).map(|&i| m | (1 << i)))
    }

    pub(crate) fn set(&self, mask: u32) -> VarSet {
        bits(mask).map(|i| self.vars[i].clone()).collect()
    }
}

/// Indices of set bits, ascending.
pub(crate) fn bits(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |i| mask & (1 << i) != 0)
}

/// All submasks of `mask`, ascending.
pub(crate) fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(0u32);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask {
            None
        } else {
            Some(((cur | !mask).wrapping_add(1)) & mask)
        };
        Some(cur)
    })
}
