//! Dense tropical vectors and matrices.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Result, Side, TropError};
use crate::semiring::{ExtScalar, Int, Number};

/// Column vector over `R ∪ {ε, ε′}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent, bound(serialize = "N: Number"))]
pub struct TropVector<N = Int> {
    entries: Vec<ExtScalar<N>>,
}

impl<N: Number> TropVector<N> {
    pub fn new(entries: Vec<ExtScalar<N>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(TropError::Empty);
        }
        Ok(TropVector { entries })
    }

    pub fn from_ints(values: &[i64]) -> Self {
        TropVector::new(values.iter().map(|&v| ExtScalar::int(v)).collect())
            .expect("non-empty vector")
    }

    pub fn from_finite(values: Vec<N>) -> Result<Self> {
        TropVector::new(values.into_iter().map(ExtScalar::Finite).collect())
    }

    /// The max-plus zero vector `ε`.
    pub fn neg_inf(dim: usize) -> Result<Self> {
        TropVector::new(vec![ExtScalar::NegInf; dim])
    }

    /// The min-plus zero vector `ε′`.
    pub fn pos_inf(dim: usize) -> Result<Self> {
        TropVector::new(vec![ExtScalar::PosInf; dim])
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[ExtScalar<N>] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &ExtScalar<N> {
        &self.entries[i]
    }

    pub fn into_entries(self) -> Vec<ExtScalar<N>> {
        self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(ExtScalar::is_finite)
    }

    pub fn is_neg_inf(&self) -> bool {
        self.entries.iter().all(|e| matches!(e, ExtScalar::NegInf))
    }

    pub fn finite_values(&self) -> Option<Vec<&N>> {
        self.entries.iter().map(ExtScalar::as_finite).collect()
    }

    fn check_dim(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(TropError::Shape {
                op,
                expected: format!("dim {}", self.dim()),
                found: format!("dim {}", other.dim()),
            });
        }
        Ok(())
    }

    /// Componentwise `≤`.
    pub fn leq(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.ext_cmp(b) != Ordering::Greater)
    }

    /// Componentwise strict `<`.
    pub fn all_lt(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.ext_cmp(b) == Ordering::Less)
    }

    /// Componentwise equality under the number type's comparison.
    pub fn same(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.ext_cmp(b) == Ordering::Equal)
    }

    pub fn oplus(&self, other: &Self) -> Result<Self> {
        self.check_dim(other, "oplus")?;
        Ok(self.zip_map(other, ExtScalar::oplus))
    }

    pub fn oplus_dual(&self, other: &Self) -> Result<Self> {
        self.check_dim(other, "oplus_dual")?;
        Ok(self.zip_map(other, ExtScalar::oplus_dual))
    }

    fn zip_map(
        &self,
        other: &Self,
        f: impl Fn(&ExtScalar<N>, &ExtScalar<N>) -> ExtScalar<N>,
    ) -> Self {
        TropVector {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// `c ⊗ x`.
    pub fn scale(&self, c: &ExtScalar<N>) -> Result<Self> {
        Ok(TropVector {
            entries: self
                .entries
                .iter()
                .map(|e| c.otimes(e))
                .collect::<Result<_>>()?,
        })
    }

    /// `c ⊗′ x`.
    pub fn scale_dual(&self, c: &ExtScalar<N>) -> Result<Self> {
        Ok(TropVector {
            entries: self
                .entries
                .iter()
                .map(|e| c.otimes_dual(e))
                .collect::<Result<_>>()?,
        })
    }

    /// Row-vector product `a ⊗ x = max_j (a_j + x_j)`.
    pub fn dot(&self, x: &Self) -> Result<ExtScalar<N>> {
        self.check_dim(x, "dot")?;
        let mut acc = ExtScalar::NegInf;
        for (a, v) in self.entries.iter().zip(&x.entries) {
            acc = acc.oplus(&a.otimes(v)?);
        }
        Ok(acc)
    }

    /// Shifts a finite vector so that its first entry is 0. Returns the
    /// normalized vector and the removed shift (the original first entry).
    pub fn normalize_first(&self) -> Result<(Self, N)> {
        let first = self.entries[0]
            .as_finite()
            .ok_or(TropError::NonFinite { what: "vector" })?
            .clone();
        let shift = ExtScalar::Finite(
            first
                .checked_neg()
                .ok_or(TropError::Overflow { op: "normalize" })?,
        );
        Ok((self.scale(&shift)?, first))
    }
}

impl<N: Number> fmt::Display for TropVector<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

/// Dense row-major matrix over `R ∪ {ε, ε′}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TropMatrix<N = Int> {
    rows: usize,
    cols: usize,
    entries: Vec<ExtScalar<N>>,
}

impl<N: Number> TropMatrix<N> {
    pub fn from_rows(rows: Vec<Vec<ExtScalar<N>>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(TropError::Empty);
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(TropError::Ragged {
                line: i + 1,
                expected: cols,
                found: r.len(),
            });
        }
        let n_rows = rows.len();
        Ok(TropMatrix {
            rows: n_rows,
            cols,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Integer matrix; `None` entries are `ε`.
    pub fn from_int_rows<R: AsRef<[Option<i64>]>>(rows: &[R]) -> Result<Self> {
        TropMatrix::from_rows(
            rows.iter()
                .map(|r| {
                    r.as_ref()
                        .iter()
                        .map(|v| v.map_or(ExtScalar::NegInf, ExtScalar::int))
                        .collect()
                })
                .collect(),
        )
    }

    /// Finite integer matrix.
    pub fn from_ints<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        TropMatrix::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&v| ExtScalar::int(v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &ExtScalar<N> {
        &self.entries[i * self.cols + j]
    }

    pub fn row_slice(&self, i: usize) -> &[ExtScalar<N>] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row(&self, i: usize) -> TropVector<N> {
        TropVector {
            entries: self.row_slice(i).to_vec(),
        }
    }

    pub fn column(&self, j: usize) -> TropVector<N> {
        TropVector {
            entries: (0..self.rows).map(|i| self.get(i, j).clone()).collect(),
        }
    }

    pub fn entries(&self) -> std::slice::Iter<'_, ExtScalar<N>> {
        self.entries.iter()
    }

    pub fn map(&self, f: impl Fn(&ExtScalar<N>) -> ExtScalar<N>) -> Self {
        TropMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    fn shape_error(&self, op: &'static str, other: (usize, usize)) -> TropError {
        TropError::Shape {
            op,
            expected: format!("{}x{}", self.rows, self.cols),
            found: format!("{}x{}", other.0, other.1),
        }
    }

    /// Entrywise `A ⊕ B`.
    pub fn oplus(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(self.shape_error("oplus", other.shape()));
        }
        Ok(TropMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.oplus(b))
                .collect(),
        })
    }

    /// Stacks `self` on top of `lower`.
    pub fn vstack(&self, lower: &Self) -> Result<Self> {
        if self.cols != lower.cols {
            return Err(self.shape_error("vstack", lower.shape()));
        }
        let mut entries = self.entries.clone();
        entries.extend(lower.entries.iter().cloned());
        Ok(TropMatrix {
            rows: self.rows + lower.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn negate(&self) -> Result<Self> {
        Ok(TropMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(ExtScalar::neg)
                .collect::<Result<_>>()?,
        })
    }

    fn mul_with(&self, v: &TropVector<N>, op: &'static str, dual: bool) -> Result<TropVector<N>> {
        if self.cols != v.dim() {
            return Err(TropError::Shape {
                op,
                expected: format!("dim {}", self.cols),
                found: format!("dim {}", v.dim()),
            });
        }
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc = if dual {
                ExtScalar::PosInf
            } else {
                ExtScalar::NegInf
            };
            for (m, x) in self.row_slice(i).iter().zip(v.entries()) {
                acc = if dual {
                    acc.oplus_dual(&m.otimes_dual(x)?)
                } else {
                    acc.oplus(&m.otimes(x)?)
                };
            }
            out.push(acc);
        }
        Ok(TropVector { entries: out })
    }

    /// Max-plus product `M ⊗ v`.
    pub fn maxplus_mul(&self, v: &TropVector<N>) -> Result<TropVector<N>> {
        self.mul_with(v, "maxplus_mul", false)
    }

    /// Min-plus product `M ⊗′ v`.
    pub fn minplus_mul(&self, v: &TropVector<N>) -> Result<TropVector<N>> {
        self.mul_with(v, "minplus_mul", true)
    }

    /// The residuation partner `-Mᵀ`: entry `(j, i)` is `-m_ij`, with
    /// `-ε = ε′` and `-ε′ = ε`.
    pub fn neg_transpose(&self) -> Result<Self> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).neg()?);
            }
        }
        Ok(TropMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        })
    }

    /// Max-plus unit matrix `E_n`.
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(TropError::Empty);
        }
        let mut entries = vec![ExtScalar::NegInf; n * n];
        for i in 0..n {
            entries[i * n + i] = ExtScalar::unit();
        }
        Ok(TropMatrix {
            rows: n,
            cols: n,
            entries,
        })
    }

    pub fn first_non_r_astic(&self) -> Option<RAsticViolation> {
        if let Some(i) =
            (0..self.rows).find(|&i| !self.row_slice(i).iter().any(ExtScalar::is_finite))
        {
            return Some(RAsticViolation::Row(i));
        }
        (0..self.cols)
            .find(|&j| !(0..self.rows).any(|i| self.get(i, j).is_finite()))
            .map(RAsticViolation::Column)
    }
}

/// Value of the row product `a ⊗ x` and the set of indices attaining it.
pub fn row_argmax<N: Number>(
    row: &[ExtScalar<N>],
    x: &TropVector<N>,
) -> Result<(ExtScalar<N>, BTreeSet<usize>)> {
    if row.len() != x.dim() {
        return Err(TropError::Shape {
            op: "row_argmax",
            expected: format!("dim {}", row.len()),
            found: format!("dim {}", x.dim()),
        });
    }
    let terms = row
        .iter()
        .zip(x.entries())
        .map(|(a, v)| a.otimes(v))
        .collect::<Result<Vec<_>>>()?;
    let best = terms.iter().fold(ExtScalar::NegInf, |acc, t| acc.oplus(t));
    let set = terms
        .iter()
        .enumerate()
        .filter(|(_, t)| t.ext_cmp(&best) == Ordering::Equal)
        .map(|(k, _)| k)
        .collect();
    Ok((best, set))
}

/// First row or column of a matrix without a finite entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RAsticViolation {
    Row(usize),
    Column(usize),
}

/// `D_{α,β}`: `α` on the diagonal, `β` elsewhere.
pub fn d_matrix<N: Number>(n: usize, alpha: &N, beta: &N) -> Result<TropMatrix<N>> {
    if n == 0 {
        return Err(TropError::Empty);
    }
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(ExtScalar::Finite(if i == j { alpha } else { beta }.clone()));
        }
    }
    Ok(TropMatrix {
        rows: n,
        cols: n,
        entries,
    })
}

/// A validated pair `(A, B)` of doubly R-astic matrices of equal shape.
///
/// Also caches `Cᵀ = -(A ⊕ B)ᵀ`, the min-plus factor of one alternating step.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedSystem<N = Int> {
    a: TropMatrix<N>,
    b: TropMatrix<N>,
    c_transpose: TropMatrix<N>,
}

impl<N: Number> TwoSidedSystem<N> {
    pub fn a(&self) -> &TropMatrix<N> {
        &self.a
    }

    pub fn b(&self) -> &TropMatrix<N> {
        &self.b
    }

    /// `Cᵀ` with `C = -(A ⊕ B)`.
    pub fn c_transpose(&self) -> &TropMatrix<N> {
        &self.c_transpose
    }

    /// Row `i` of `C = -(A ⊕ B)`, as a column vector.
    pub fn c_row(&self, i: usize) -> TropVector<N> {
        self.c_transpose.column(i)
    }

    /// Number of equations `m`.
    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    /// Number of unknowns `n`.
    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    /// Largest absolute finite entry of `A` and `B`.
    pub fn max_abs_entry(&self) -> f64 {
        self.a
            .entries()
            .chain(self.b.entries())
            .filter_map(ExtScalar::as_finite)
            .map(|v| v.to_f64().abs())
            .fold(0.0, f64::max)
    }
}

/// Checks shapes and the doubly R-astic condition.
pub fn validate_system<N: Number>(a: TropMatrix<N>, b: TropMatrix<N>) -> Result<TwoSidedSystem<N>> {
    if a.shape() != b.shape() {
        return Err(TropError::Shape {
            op: "validate_system",
            expected: format!("{}x{}", a.rows(), a.cols()),
            found: format!("{}x{}", b.rows(), b.cols()),
        });
    }
    for (side, m) in [(Side::A, &a), (Side::B, &b)] {
        match m.first_non_r_astic() {
            Some(RAsticViolation::Row(index)) => {
                return Err(TropError::RowNotRAstic { side, index })
            }
            Some(RAsticViolation::Column(index)) => {
                return Err(TropError::ColumnNotRAstic { side, index })
            }
            None => {}
        }
    }
    let c_transpose = a.oplus(&b)?.neg_transpose()?;
    Ok(TwoSidedSystem { a, b, c_transpose })
}
