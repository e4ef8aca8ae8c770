use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational numbers, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// A coordinate vector with exact rational entries. Vectors whose entries
/// are all machine-sized integers also carry an `i64` copy used by the fast
/// rank path.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Vector {
    coords: Vec<Rational>,
    small: Option<Vec<i64>>,
}

impl Vector {
    pub fn new(coords: Vec<Rational>) -> Vector {
        let small = coords
            .iter()
            .map(|c| {
                if c.is_integer() {
                    c.numer().to_i64()
                } else {
                    None
                }
            })
            .collect();
        Vector { coords, small }
    }

    pub fn from_ints<I: IntoIterator<Item = i64>>(coords: I) -> Vector {
        let small: Vec<i64> = coords.into_iter().collect();
        Vector {
            coords: small
                .iter()
                .map(|&c| Rational::from_integer(c.into()))
                .collect(),
            small: Some(small),
        }
    }

    pub fn zero(dim: usize) -> Vector {
        Vector::from_ints(vec![0; dim])
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Vector {
        Vector::from_ints((0..dim).map(|j| (i == j) as i64))
    }

    /// Sum of the standard basis vectors `e_0 .. e_{k-1}`.
    pub fn ones_prefix(dim: usize, k: usize) -> Vector {
        Vector::from_ints((0..dim).map(|j| (j < k) as i64))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        if let (Some(a), Some(b)) = (&self.small, &other.small) {
            if let Some(sum) = a
                .iter()
                .zip(b)
                .map(|(x, y)| x.checked_add(*y))
                .collect::<Option<Vec<_>>>()
            {
                return Vector::from_ints(sum);
            }
        }
        Vector::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn scale(&self, k: &Rational) -> Vector {
        Vector::new(self.coords.iter().map(|c| c * k).collect())
    }

    /// Sum of `vs`; the zero vector of dimension `dim` when `vs` is empty.
    pub fn sum<'a, I: IntoIterator<Item = &'a Vector>>(dim: usize, vs: I) -> Vector {
        vs.into_iter().fold(Vector::zero(dim), |acc, v| acc.add(v))
    }

    /// Integer row proportional to the vector (clearing denominators).
    fn integer_row(&self) -> Vec<BigInt> {
        let l = self
            .coords
            .iter()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        self.coords
            .iter()
            .map(|c| c.numer() * (&l / c.denom()))
            .collect()
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `[1/2, -3, 0]`; entries are integers or `p/q` fractions.
impl FromStr for Vector {
    type Err = Error;

    fn from_str(text: &str) -> Result<Vector> {
        let bad = || Error::VectorLiteral(text.to_string());
        let inner = text
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(bad)?
            .trim();
        if inner.is_empty() {
            return Ok(Vector::new(Vec::new()));
        }
        let coords = inner
            .split(',')
            .map(|entry| parse_rational(entry.trim()).ok_or_else(bad))
            .collect::<Result<Vec<_>>>()?;
        Ok(Vector::new(coords))
    }
}

fn parse_rational(s: &str) -> Option<Rational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Rank of the span of `vs`. Integral input goes through fraction-free
/// elimination in `i128`, falling back to exact rational elimination on
/// overflow or non-integral entries.
pub fn rank_of(vs: &[&Vector]) -> usize {
    if let Some(rows) = vs
        .iter()
        .map(|v| {
            v.small
                .as_ref()
                .map(|s| s.iter().map(|&x| x as i128).collect())
        })
        .collect::<Option<Vec<Vec<i128>>>>()
    {
        if let Some(r) = bareiss_rank(rows) {
            return r;
        }
    }
    rational_rank(vs)
}

/// Fraction-free Gaussian elimination; `None` on overflow.
fn bareiss_rank(mut m: Vec<Vec<i128>>) -> Option<usize> {
    let cols = m.first().map_or(0, Vec::len);
    let mut prev: i128 = 1;
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..m.len() {
            for j in c + 1..cols {
                let v = m[r][c]
                    .checked_mul(m[i][j])?
                    .checked_sub(m[i][c].checked_mul(m[r][j])?)?;
                m[i][j] = v / prev;
            }
            m[i][c] = 0;
        }
        prev = m[r][c];
        r += 1;
        if r == m.len() {
            break;
        }
    }
    Some(r)
}

/// Plain Gaussian elimination over the rationals after clearing
/// denominators row by row.
pub(crate) fn rational_rank(vs: &[&Vector]) -> usize {
    let mut m: Vec<Vec<Rational>> = vs
        .iter()
        .map(|v| {
            v.integer_row()
                .into_iter()
                .map(Rational::from_integer)
                .collect()
        })
        .collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let factor = &m[i][c] / &pivot;
            for j in c..cols {
                let delta = &factor * &m[r][j];
                m[i][j] -= delta;
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// A square matrix with rational entries acting on column vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: Vec<Vec<Rational>>,
}

impl Matrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Matrix {
        Matrix { rows }
    }

    pub fn identity(dim: usize) -> Matrix {
        Matrix::new(
            (0..dim)
                .map(|i| {
                    (0..dim)
                        .map(|j| {
                            if i == j {
                                Rational::one()
                            } else {
                                Rational::zero()
                            }
                        })
                        .collect()
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        Vector::new(
            self.rows
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(v.coords())
                        .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
                })
                .collect(),
        )
    }

    pub fn is_invertible(&self) -> bool {
        let vs: Vec<Vector> = self.rows.iter().cloned().map(Vector::new).collect();
        rank_of(&vs.iter().collect::<Vec<_>>()) == self.dim()
    }

    /// Whether all entries are integers and the determinant is ±1.
    pub fn is_unimodular(&self) -> bool {
        self.rows.iter().flatten().all(|c| c.is_integer()) && self.determinant().abs().is_one()
    }

    pub fn determinant(&self) -> Rational {
        let mut m = self.rows.clone();
        let n = m.len();
        let mut det = Rational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
                return Rational::zero();
            };
            if p != c {
                m.swap(p, c);
                det = -det;
            }
            let pivot = m[c][c].clone();
            det *= &pivot;
            for i in c + 1..n {
                let factor = &m[i][c] / &pivot;
                for j in c..n {
                    let delta = &factor * &m[c][j];
                    m[i][j] -= delta;
                }
            }
        }
        det
    }
}
