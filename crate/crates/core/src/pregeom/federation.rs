use std::collections::HashSet;

use rand::Rng;
use serde::Serialize;

use super::linalg::{Rational, Vector};
use super::model::{ClosureModel, IndependenceQuery, ModelKind};
use crate::error::{Error, Result};

fn indep(model: &ClosureModel, a: &[Vector], b: &[Vector], base: &[Vector]) -> Result<bool> {
    model.indep(&IndependenceQuery::new(
        a.to_vec(),
        b.to_vec(),
        base.to_vec(),
    ))
}

fn check_injective(seq: &[Vector]) -> Result<()> {
    let mut seen = HashSet::new();
    for v in seq {
        if !seen.insert(v) {
            return Err(Error::DuplicateElement(v.to_string()));
        }
    }
    Ok(())
}

/// Index of the first element that is not independent from its
/// predecessors over `base`.
fn first_dependent(model: &ClosureModel, seq: &[Vector], base: &[Vector]) -> Result<Option<usize>> {
    check_injective(seq)?;
    for j in 0..seq.len() {
        if !indep(model, &seq[..j], std::slice::from_ref(&seq[j]), base)? {
            return Ok(Some(j));
        }
    }
    Ok(None)
}

/// Each element is independent from the elements before it over `base`.
pub fn is_independent_sequence(
    model: &ClosureModel,
    seq: &[Vector],
    base: &[Vector],
) -> Result<bool> {
    Ok(first_dependent(model, seq, base)?.is_none())
}

fn require_independent(model: &ClosureModel, seq: &[Vector], base: &[Vector]) -> Result<()> {
    match first_dependent(model, seq, base)? {
        Some(j) => Err(Error::NotIndependent(j)),
        None => Ok(()),
    }
}

/// `tuple ⊥_base tuple`; for closure models this means `tuple ⊆ cl(base)`.
pub fn is_algebraic(model: &ClosureModel, tuple: &[Vector], base: &[Vector]) -> Result<bool> {
    indep(model, tuple, tuple, base)
}

/// `d` depends on the whole sequence over `base` but is independent from
/// every subsequence missing one element. For a sequence of length one the
/// second condition is vacuous.
pub fn check_federation_witness(
    model: &ClosureModel,
    seq: &[Vector],
    d: &Vector,
    base: &[Vector],
) -> Result<bool> {
    require_independent(model, seq, base)?;
    let d = std::slice::from_ref(d);
    if indep(model, d, seq, base)? {
        return Ok(false);
    }
    for j in 0..seq.len() {
        let rest: Vec<Vector> = seq
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .map(|(_, v)| v.clone())
            .collect();
        if !indep(model, d, &rest, base)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A federated sequence of length `n` together with a verified witness for
/// each of its prefixes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FederationBound {
    pub model: ClosureModel,
    pub seq: Vec<Vector>,
    /// `witnesses[m - 1]` is the witness for the prefix of length `m`.
    pub witnesses: Vec<Vector>,
}

/// Shows that the index of federation over the empty set is at least `n`,
/// using the first `n` basis vectors and prefix sums as witnesses.
pub fn federation_index_lower_bound(model: &ClosureModel, n: usize) -> Result<FederationBound> {
    if n == 0 {
        return Err(Error::Invalid("sequence length must be positive".into()));
    }
    if n > model.dim() {
        return Err(Error::LengthExceedsDimension {
            n,
            dim: model.dim(),
        });
    }
    let seq: Vec<Vector> = (0..n).map(|i| model.basis(i)).collect();
    let mut witnesses = Vec::with_capacity(n);
    for m in 1..=n {
        let d = Vector::sum(model.dim(), &seq[..m]);
        if !check_federation_witness(model, &seq[..m], &d, &[])? {
            return Err(Error::Internal(format!(
                "prefix sum {d} is not a witness for length {m}"
            )));
        }
        witnesses.push(d);
    }
    Ok(FederationBound {
        model: *model,
        seq,
        witnesses,
    })
}

/// Vector sum, the combiner realising the chain construction in linear
/// models.
pub fn sum_combiner(u: &Vector, v: &Vector) -> Vector {
    u.add(v)
}

/// Returns its first argument; always rejected by the chain checks.
pub fn first_projection(u: &Vector, _v: &Vector) -> Vector {
    u.clone()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainStep {
    pub step: usize,
    /// Properties verified at this step, among "i" to "iv".
    pub properties: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub model: ClosureModel,
    pub chain: Vec<Vector>,
    pub steps: Vec<ChainStep>,
    /// The last chain element lies in the closure of the whole input but in
    /// the closure of no proper subset (all closures taken over the base).
    pub federated_witness: bool,
}

/// Builds `d*_0 = d_0`, `d*_{i+1} = combiner(d*_i, d_{i+1})` and verifies
/// after every step:
///
/// * i) `d*_i ∉ cl(d_{i+1})` and `d_{i+1} ∉ cl(d*_i)`;
/// * ii) `d*_i ∈ cl(d*_{i-1}, d_i) ∖ (cl(d*_{i-1}) ∪ cl(d_i))`;
/// * iii) `d*_{i-1} ∈ cl(d*_i, d_i) ∖ (cl(d*_i) ∪ cl(d_i))`;
/// * iv) `d_i ∈ cl(d*_{i-1}, d*_i) ∖ (cl(d*_{i-1}) ∪ cl(d*_i))`;
///
/// with every closure taken over `base`. The first violation is returned as
/// an error naming the property.
pub fn hyttinen_chain<F>(
    model: &ClosureModel,
    ds: &[Vector],
    base: &[Vector],
    combiner: F,
) -> Result<ChainReport>
where
    F: Fn(&Vector, &Vector) -> Vector,
{
    if ds.is_empty() {
        return Err(Error::Invalid(
            "the chain needs at least one element".into(),
        ));
    }
    require_independent(model, ds, base)?;
    let cl = |v: &Vector, s: &[&Vector]| -> Result<bool> {
        let mut set: Vec<Vector> = base.to_vec();
        set.extend(s.iter().map(|x| (*x).clone()));
        model.in_closure(v, &set)
    };
    // v ∈ cl(p, q) ∖ (cl(p) ∪ cl(q))
    let strictly_between = |v: &Vector, p: &Vector, q: &Vector| -> Result<bool> {
        Ok(cl(v, &[p, q])? && !cl(v, &[p])? && !cl(v, &[q])?)
    };
    let fail = |step: usize, property: &'static str, detail: String| Error::ChainStep {
        step,
        property,
        detail,
    };
    let m = ds.len();
    let mut chain = vec![ds[0].clone()];
    let mut steps = Vec::new();
    let check_i = |i: usize, star: &Vector| -> Result<()> {
        if i + 1 < m && (cl(star, &[&ds[i + 1]])? || cl(&ds[i + 1], &[star])?) {
            return Err(fail(
                i,
                "i",
                format!("{star} and {} are dependent over the base", ds[i + 1]),
            ));
        }
        Ok(())
    };
    check_i(0, &chain[0])?;
    steps.push(ChainStep {
        step: 0,
        properties: if m > 1 { vec!["i"] } else { vec![] },
    });
    for i in 1..m {
        let prev = &chain[i - 1];
        let star = combiner(prev, &ds[i]);
        model.check(&star)?;
        if !strictly_between(&star, prev, &ds[i])? {
            return Err(fail(
                i,
                "ii",
                format!(
                    "combiner output {star} is not strictly between {prev} and {}",
                    ds[i]
                ),
            ));
        }
        if !strictly_between(prev, &star, &ds[i])? {
            return Err(fail(
                i,
                "iii",
                format!("{prev} is not strictly between {star} and {}", ds[i]),
            ));
        }
        if !strictly_between(&ds[i], prev, &star)? {
            return Err(fail(
                i,
                "iv",
                format!("{} is not strictly between {prev} and {star}", ds[i]),
            ));
        }
        check_i(i, &star)?;
        let mut properties = vec!["ii", "iii", "iv"];
        if i + 1 < m {
            properties.insert(0, "i");
        }
        steps.push(ChainStep {
            step: i,
            properties,
        });
        chain.push(star);
    }
    let last = chain.last().expect("nonempty chain");
    let all: Vec<&Vector> = ds.iter().collect();
    let mut federated_witness = cl(last, &all)?;
    for mask in 0u32..(1 << m) - 1 {
        if !federated_witness {
            break;
        }
        let sub: Vec<&Vector> = (0..m)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &ds[i])
            .collect();
        federated_witness = !cl(last, &sub)?;
    }
    if !federated_witness {
        return Err(fail(
            m - 1,
            "federation",
            format!("{last} lies in the closure of a proper subset"),
        ));
    }
    Ok(ChainReport {
        model: *model,
        chain,
        steps,
        federated_witness,
    })
}

/// `m` random elements forming an independent sequence over the empty set,
/// with small rational coordinates (integral in lattices).
pub fn random_independent_sequence<R: Rng>(
    model: &ClosureModel,
    m: usize,
    rng: &mut R,
) -> Result<Vec<Vector>> {
    if m > model.dim() {
        return Err(Error::LengthExceedsDimension {
            n: m,
            dim: model.dim(),
        });
    }
    let integral = model.kind() == ModelKind::Lattice;
    let mut seq: Vec<Vector> = Vec::with_capacity(m);
    while seq.len() < m {
        let coords = (0..model.dim())
            .map(|_| {
                let den = if integral { 1 } else { rng.gen_range(1i64..=3) };
                Rational::new(rng.gen_range(-3i64..=3).into(), den.into())
            })
            .collect();
        let v = Vector::new(coords);
        seq.push(v);
        if model.rank(&seq)? < seq.len() {
            seq.pop();
        }
    }
    Ok(seq)
}
