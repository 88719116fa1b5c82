//! Local min-plus convexity of single-row solution sets, and the row-by-row
//! certificate that a whole solution set is min-plus linear.
//!
//! For a row pair `(a, b)` and a solution `x` of `a ⊗ x = b ⊗ x`, let
//! `K(a, x)` be the set of indices attaining the maximum in `a ⊗ x`. The
//! solution set of the row is locally min-plus convex at `x` exactly when
//!
//! 1. both `K(a, x)` and `K(b, x)` are singletons, or
//! 2. one of them is a singleton contained in the other, or
//! 3. `K(a, x) = K(b, x)`.
//!
//! Case 2 is applied in both directions.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Result, TropError};
use crate::matrix::{row_argmax, TropVector, TwoSidedSystem};
use crate::semiring::{ExtScalar, Number};
use crate::solver::{is_solution, m_set};

/// Which local-convexity case holds for a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RCase {
    BothSingletons,
    SingletonInside,
    EqualSets,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowDiagnostic {
    pub row: usize,
    pub k_a: BTreeSet<usize>,
    pub k_b: BTreeSet<usize>,
    pub in_r: bool,
    pub case: Option<RCase>,
}

/// `K(a, x)`: indices attaining `a ⊗ x`.
pub fn k_set<N: Number>(a: &[ExtScalar<N>], x: &TropVector<N>) -> Result<BTreeSet<usize>> {
    let (value, set) = row_argmax(a, x)?;
    if !value.is_finite() {
        return Err(TropError::DegenerateRow);
    }
    Ok(set)
}

/// Classifies a pair of argmax sets.
pub fn classify(k_a: &BTreeSet<usize>, k_b: &BTreeSet<usize>) -> Option<RCase> {
    let single_a = k_a.len() == 1;
    let single_b = k_b.len() == 1;
    if single_a && single_b && k_a != k_b {
        Some(RCase::BothSingletons)
    } else if k_a == k_b {
        Some(RCase::EqualSets)
    } else if (single_a && k_a.is_subset(k_b)) || (single_b && k_b.is_subset(k_a)) {
        Some(RCase::SingletonInside)
    } else {
        None
    }
}

/// Membership of `x` in `R(a, b)`. A vector that does not solve the row
/// equation is not a member.
pub fn in_r<N: Number>(a: &[ExtScalar<N>], b: &[ExtScalar<N>], x: &TropVector<N>) -> Result<bool> {
    Ok(row_case(a, b, x)?.is_some())
}

/// The case of `R(a, b)` satisfied at `x`, if any.
pub fn row_case<N: Number>(
    a: &[ExtScalar<N>],
    b: &[ExtScalar<N>],
    x: &TropVector<N>,
) -> Result<Option<RCase>> {
    if !x.is_finite() {
        return Err(TropError::NonFinite {
            what: "R-membership argument",
        });
    }
    let (va, k_a) = row_argmax(a, x)?;
    let (vb, k_b) = row_argmax(b, x)?;
    if va != vb || !va.is_finite() {
        return Ok(None);
    }
    Ok(classify(&k_a, &k_b))
}

/// Per-row diagnostics of `sys` at the matching generator: row `i` is
/// evaluated at `generators[i]`.
pub fn row_diagnostics<N: Number>(
    sys: &TwoSidedSystem<N>,
    generators: &[TropVector<N>],
) -> Result<Vec<RowDiagnostic>> {
    if generators.len() != sys.rows() {
        return Err(TropError::Shape {
            op: "row_diagnostics",
            expected: format!("{} generators", sys.rows()),
            found: format!("{} generators", generators.len()),
        });
    }
    generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let a = sys.a().row_slice(i);
            let b = sys.b().row_slice(i);
            let k_a = k_set(a, g)?;
            let k_b = k_set(b, g)?;
            let case = row_case(a, b, g)?;
            Ok(RowDiagnostic {
                row: i,
                k_a,
                k_b,
                in_r: case.is_some(),
                case,
            })
        })
        .collect()
}

/// `true` certifies that the solution set of `sys` is min-plus linear;
/// `false` only means the sufficient condition failed.
pub fn certify_minplus_linear<N: Number>(
    sys: &TwoSidedSystem<N>,
    generators: &[TropVector<N>],
) -> Result<bool> {
    Ok(row_diagnostics(sys, generators)?.iter().all(|d| d.in_r))
}

/// Whether the attainment sets `M^i(x)` of all rows cover every column.
/// Implies that the solution `x` is stable.
pub fn stable_criterion<N: Number>(sys: &TwoSidedSystem<N>, x: &TropVector<N>) -> Result<bool> {
    if !is_solution(sys, x)? {
        return Err(TropError::NotASolution);
    }
    let mut covered = BTreeSet::new();
    for i in 0..sys.rows() {
        covered.extend(m_set(sys, x, i)?);
    }
    Ok(covered.len() == sys.cols())
}
