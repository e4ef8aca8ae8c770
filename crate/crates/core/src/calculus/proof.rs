use std::fmt;

use serde::{Deserialize, Serialize};

use crate::atoms::{Atom, AtomSet, VarSet};
use crate::error::{Error, Result};

/// Inference schemas of the two calculi. Permutation and duplication rules
/// have no entry: canonical atoms already identify those forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Rule {
    A3,
    B3,
    C3,
    D3,
    E3,
    A5,
    B5,
    C5,
    D5,
    E5,
    F5,
    G5,
}

impl Rule {
    pub const MARGINAL: [Rule; 5] = [Rule::A3, Rule::B3, Rule::C3, Rule::D3, Rule::E3];
    pub const CONDITIONAL: [Rule; 7] = [
        Rule::A5,
        Rule::B5,
        Rule::C5,
        Rule::D5,
        Rule::E5,
        Rule::F5,
        Rule::G5,
    ];

    pub fn arity(self) -> usize {
        match self {
            Rule::A3 | Rule::A5 => 0,
            Rule::B3 | Rule::C3 | Rule::E3 | Rule::B5 | Rule::C5 | Rule::D5 => 1,
            Rule::D3 | Rule::E5 | Rule::F5 | Rule::G5 => 2,
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            Rule::A3 => "A3",
            Rule::B3 => "B3",
            Rule::C3 => "C3",
            Rule::D3 => "D3",
            Rule::E3 => "E3",
            Rule::A5 => "A5",
            Rule::B5 => "B5",
            Rule::C5 => "C5",
            Rule::D5 => "D5",
            Rule::E5 => "E5",
            Rule::F5 => "F5",
            Rule::G5 => "G5",
        }
    }

    fn is_marginal(self) -> bool {
        Rule::MARGINAL.contains(&self)
    }

    /// Checks that `conclusion` follows from `premises` by one instance of
    /// this schema.
    pub fn check(self, premises: &[&Atom], conclusion: &Atom) -> std::result::Result<(), String> {
        if premises.len() != self.arity() {
            return Err(format!(
                "{} takes {} premises, got {}",
                self.id(),
                self.arity(),
                premises.len()
            ));
        }
        let marginal = self.is_marginal();
        for a in premises.iter().copied().chain([conclusion]) {
            if a.is_marginal() != marginal {
                return Err(format!("{} applied to `{a}` of the wrong kind", self.id()));
            }
        }
        let c = conclusion;
        let ok = match self {
            Rule::A3 => c.right().is_empty(),
            Rule::B3 | Rule::B5 => {
                let p = premises[0];
                c.left() == p.right() && c.right() == p.left() && c.condition() == p.condition()
            }
            Rule::C3 => {
                let p = premises[0];
                c.left() == p.left() && c.right().is_subset(p.right())
            }
            Rule::D3 => {
                let (p, q) = (premises[0], premises[1]);
                *q.left() == union(p.left(), p.right())
                    && c.left() == p.left()
                    && *c.right() == union(p.right(), q.right())
            }
            Rule::E3 => {
                let p = premises[0];
                p.left().len() == 1 && p.left() == p.right() && c.left() == p.left()
            }
            Rule::A5 => c.left() == c.condition(),
            Rule::C5 => {
                let p = premises[0];
                c.condition() == p.condition()
                    && c.left().is_subset(p.left())
                    && c.right().is_subset(p.right())
            }
            Rule::D5 => {
                let p = premises[0];
                c.condition() == p.condition()
                    && *c.left() == union(p.left(), p.condition())
                    && *c.right() == union(p.right(), p.condition())
            }
            Rule::E5 => {
                // x ⊥_z y, u ⊥_{zx} y  ⟹  u ⊥_z y
                let (p, q) = (premises[0], premises[1]);
                q.right() == p.right()
                    && *q.condition() == union(p.condition(), p.left())
                    && c.left() == q.left()
                    && c.right() == p.right()
                    && c.condition() == p.condition()
            }
            Rule::F5 => {
                // y ⊥_z y, zx ⊥_y u  ⟹  x ⊥_z u
                let (p, q) = (premises[0], premises[1]);
                p.left() == p.right()
                    && q.condition() == p.left()
                    && *q.left() == union(p.condition(), c.left())
                    && c.right() == q.right()
                    && c.condition() == p.condition()
            }
            Rule::G5 => {
                // x ⊥_z y, xy ⊥_z u  ⟹  x ⊥_z yu
                let (p, q) = (premises[0], premises[1]);
                q.condition() == p.condition()
                    && *q.left() == union(p.left(), p.right())
                    && c.left() == p.left()
                    && *c.right() == union(p.right(), q.right())
                    && c.condition() == p.condition()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(format!("`{c}` is not an instance of {}", self.id()))
        }
    }
}

fn union(a: &VarSet, b: &VarSet) -> VarSet {
    a.union(b).cloned().collect()
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Justification {
    Hyp,
    Rule(Rule),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub conclusion: Atom,
    pub justification: Justification,
    /// Zero-based indices of earlier steps.
    pub premises: Vec<usize>,
}

/// A deduction: each step is a hypothesis or a rule instance over earlier
/// steps. The last step is the proved atom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proof {
    pub steps: Vec<Step>,
}

impl Proof {
    pub fn conclusion(&self) -> Option<&Atom> {
        self.steps.last().map(|s| &s.conclusion)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Replays every step against the rule schemas. Hypotheses must belong to
    /// `sigma`; for conditional proofs marginal hypotheses are compared after
    /// lifting.
    pub fn validate(&self, sigma: &AtomSet) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::InvalidProof {
                step: 0,
                msg: "empty proof".into(),
            });
        }
        for (i, step) in self.steps.iter().enumerate() {
            let fail = |msg: String| Error::InvalidProof { step: i + 1, msg };
            if let Some(&bad) = step.premises.iter().find(|&&p| p >= i) {
                return Err(fail(format!("premise {} does not precede", bad + 1)));
            }
            match step.justification {
                Justification::Hyp => {
                    let c = &step.conclusion;
                    let known = sigma.contains(c)
                        || (!c.is_marginal()
                            && c.condition().is_empty()
                            && sigma.iter().any(|a| a.is_marginal() && a.lifted() == *c));
                    if !known {
                        return Err(fail(format!("`{c}` is not a hypothesis")));
                    }
                }
                Justification::Rule(rule) => {
                    let premises: Vec<&Atom> = step
                        .premises
                        .iter()
                        .map(|&p| &self.steps[p].conclusion)
                        .collect();
                    rule.check(&premises, &step.conclusion).map_err(fail)?;
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "steps": self.steps.iter().enumerate().map(|(i, s)| {
                serde_json::json!({
                    "index": i + 1,
                    "atom": s.conclusion.to_string(),
                    "rule": match s.justification {
                        Justification::Hyp => "hyp".to_string(),
                        Justification::Rule(r) => r.id().to_string(),
                    },
                    "premises": s.premises.iter().map(|p| p + 1).collect::<Vec<_>>(),
                })
            }).collect::<Vec<_>>()
        })
    }
}

/// One line per step: `<index>. <atom> [<rule> <premises> | hyp]`.
impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            write!(f, "{}. {} [", i + 1, s.conclusion)?;
            match s.justification {
                Justification::Hyp => f.write_str("hyp")?,
                Justification::Rule(r) => {
                    f.write_str(r.id())?;
                    for p in &s.premises {
                        write!(f, " {}", p + 1)?;
                    }
                }
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Derived(Proof),
    NotDerivable,
    /// The depth bound was reached without deriving the goal.
    Unknown {
        depth: usize,
    },
}

impl Verdict {
    pub fn is_derived(&self) -> bool {
        matches!(self, Verdict::Derived(_))
    }

    pub fn proof(&self) -> Option<&Proof> {
        match self {
            Verdict::Derived(p) => Some(p),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Derived(_) => "DERIVED",
            Verdict::NotDerivable => "NOT DERIVABLE",
            Verdict::Unknown { .. } => "UNKNOWN",
        }
    }
}
