use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::linalg::{rank_of, Vector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// ℚ^d with linear span as closure.
    VectorSpace,
    /// ℤ^d with pure-subgroup closure.
    Lattice,
}

/// A finitely presented pregeometry: ℚ^d under linear span, or ℤ^d under
/// pure closure (the rational span intersected with ℤ^d).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClosureModel {
    kind: ModelKind,
    dim: usize,
}

impl ClosureModel {
    pub fn vector_space(dim: usize) -> ClosureModel {
        ClosureModel {
            kind: ModelKind::VectorSpace,
            dim,
        }
    }

    pub fn lattice(dim: usize) -> ClosureModel {
        ClosureModel {
            kind: ModelKind::Lattice,
            dim,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Checks that `v` is an element of the model.
    pub fn check(&self, v: &Vector) -> Result<()> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.dim(),
            });
        }
        if self.kind == ModelKind::Lattice && !v.is_integral() {
            return Err(Error::NonIntegral(v.to_string()));
        }
        Ok(())
    }

    fn check_all<'a, I: IntoIterator<Item = &'a Vector>>(&self, vs: I) -> Result<()> {
        vs.into_iter().try_for_each(|v| self.check(v))
    }

    pub fn zero(&self) -> Vector {
        Vector::zero(self.dim)
    }

    pub fn basis(&self, i: usize) -> Vector {
        Vector::basis(self.dim, i)
    }

    /// Dimension of the closure of `s`. Pure closure has the same rank as the
    /// rational span, so both kinds use the same computation.
    pub fn rank(&self, s: &[Vector]) -> Result<usize> {
        self.check_all(s)?;
        Ok(rank_of(&s.iter().collect::<Vec<_>>()))
    }

    /// Rank of the concatenation of several element lists.
    pub fn rank_union(&self, parts: &[&[Vector]]) -> Result<usize> {
        let all: Vec<&Vector> = parts.iter().flat_map(|p| p.iter()).collect();
        self.check_all(all.iter().copied())?;
        Ok(rank_of(&all))
    }

    /// Membership in the closure of `s`.
    pub fn in_closure(&self, v: &Vector, s: &[Vector]) -> Result<bool> {
        self.check(v)?;
        Ok(self.rank_union(&[s, std::slice::from_ref(v)])? == self.rank(s)?)
    }

    /// `a ⊥_base b`: adding `b` to the base does not lower the dimension of
    /// `a` over it.
    pub fn indep(&self, q: &IndependenceQuery) -> Result<bool> {
        let (a, b, base) = (&q.a[..], &q.b[..], &q.base[..]);
        let lhs = self.rank_union(&[a, base, b])? as isize - self.rank_union(&[base, b])? as isize;
        let rhs = self.rank_union(&[a, base])? as isize - self.rank(base)? as isize;
        Ok(lhs == rhs)
    }

    /// Dimension of `a` over `base`.
    pub fn relative_rank(&self, a: &[Vector], base: &[Vector]) -> Result<usize> {
        Ok(self.rank_union(&[a, base])? - self.rank(base)?)
    }
}

impl fmt::Display for ClosureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ModelKind::VectorSpace => write!(f, "vspace:Q:{}", self.dim),
            ModelKind::Lattice => write!(f, "lattice:Z:{}", self.dim),
        }
    }
}

/// Parses `vspace:Q:<dim>` or `lattice:Z:<dim>`.
impl FromStr for ClosureModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<ClosureModel> {
        let bad = || Error::ModelDescriptor(s.to_string());
        let mut parts = s.trim().split(':');
        let (kind, field, dim) = (parts.next(), parts.next(), parts.next());
        if parts.next().is_some() {
            return Err(bad());
        }
        let dim: usize = dim.ok_or_else(bad)?.parse().map_err(|_| bad())?;
        match (kind, field) {
            (Some("vspace"), Some("Q")) => Ok(ClosureModel::vector_space(dim)),
            (Some("lattice"), Some("Z")) => Ok(ClosureModel::lattice(dim)),
            _ => Err(bad()),
        }
    }
}

impl Serialize for ClosureModel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ClosureModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// `a ⊥_base b` over one model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceQuery {
    pub a: Vec<Vector>,
    pub b: Vec<Vector>,
    pub base: Vec<Vector>,
}

impl IndependenceQuery {
    pub fn new(a: Vec<Vector>, b: Vec<Vector>, base: Vec<Vector>) -> Self {
        IndependenceQuery { a, b, base }
    }
}

/// A ternary relation `a ⊥_base b` on finite element sets of a model.
pub trait IndependenceRelation {
    fn model(&self) -> &ClosureModel;
    fn name(&self) -> &str;
    fn holds(&self, a: &[Vector], b: &[Vector], base: &[Vector]) -> Result<bool>;
}

/// The relation induced by the model's rank function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankIndependence(pub ClosureModel);

impl IndependenceRelation for RankIndependence {
    fn model(&self) -> &ClosureModel {
        &self.0
    }

    fn name(&self) -> &str {
        "rank"
    }

    fn holds(&self, a: &[Vector], b: &[Vector], base: &[Vector]) -> Result<bool> {
        self.0.indep(&IndependenceQuery::new(
            a.to_vec(),
            b.to_vec(),
            base.to_vec(),
        ))
    }
}

/// Deliberately broken relation: every single element of `a` is checked
/// on its own instead of the whole set. Exchange fails for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementwiseIndependence(pub ClosureModel);

impl IndependenceRelation for ElementwiseIndependence {
    fn model(&self) -> &ClosureModel {
        &self.0
    }

    fn name(&self) -> &str {
        "elementwise"
    }

    fn holds(&self, a: &[Vector], b: &[Vector], base: &[Vector]) -> Result<bool> {
        for x in a {
            let q = IndependenceQuery::new(vec![x.clone()], b.to_vec(), base.to_vec());
            if !self.0.indep(&q)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Rank replaced by cardinality: the independence relation of the trivial
/// pregeometry (`cl(S) = S`). It holds iff `a` and `b` share no element
/// outside the base, and it satisfies every axiom of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CardinalityIndependence(pub ClosureModel);

impl IndependenceRelation for CardinalityIndependence {
    fn model(&self) -> &ClosureModel {
        &self.0
    }

    fn name(&self) -> &str {
        "cardinality"
    }

    fn holds(&self, a: &[Vector], b: &[Vector], base: &[Vector]) -> Result<bool> {
        for v in a.iter().chain(b).chain(base) {
            self.0.check(v)?;
        }
        let card = |parts: &[&[Vector]]| -> isize {
            let all: HashSet<&Vector> = parts.iter().flat_map(|p| p.iter()).collect();
            all.len() as isize
        };
        Ok(card(&[a, base, b]) - card(&[base, b]) == card(&[a, base]) - card(&[base]))
    }
}

/// Deliberately broken relation without Symmetry: `a ⊥_base b` holds only
/// when `a` lies in the closure of the base or `b` is empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AsymmetricIndependence(pub ClosureModel);

impl IndependenceRelation for AsymmetricIndependence {
    fn model(&self) -> &ClosureModel {
        &self.0
    }

    fn name(&self) -> &str {
        "asymmetric"
    }

    fn holds(&self, a: &[Vector], b: &[Vector], base: &[Vector]) -> Result<bool> {
        for v in a.iter().chain(b) {
            self.0.check(v)?;
        }
        Ok(b.is_empty() || self.0.relative_rank(a, base)? == 0)
    }
}
