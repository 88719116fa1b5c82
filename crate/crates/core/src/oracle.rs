//! Exhaustive grid search, used to check the closure results independently
//! of the alternating method.
//!
//! Solutions are enumerated projectively: vectors with first entry 0 and the
//! remaining entries in `[-R, R]`. This is exponential in `n` and meant for
//! small systems only; every enumeration is guarded by a candidate budget.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::closure::minplus_membership;
use crate::error::{Result, TropError};
use crate::matrix::{TropVector, TwoSidedSystem};
use crate::semiring::{ExtScalar, Number};
use crate::solver::is_solution;

pub const DEFAULT_BUDGET: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub dim: usize,
    pub range: i64,
    pub budget: u64,
}

impl GridSpec {
    pub fn new(dim: usize, range: i64) -> Result<Self> {
        if dim == 0 {
            return Err(TropError::Empty);
        }
        if range < 1 {
            return Err(TropError::Config(format!(
                "grid range must be at least 1, got {range}"
            )));
        }
        Ok(GridSpec {
            dim,
            range,
            budget: DEFAULT_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// `(2R + 1)^(n - 1)`, saturating.
    pub fn size(&self) -> u128 {
        let side = (2 * self.range as u128) + 1;
        (1..self.dim).fold(1u128, |acc, _| acc.saturating_mul(side))
    }

    fn checked_size(&self) -> Result<u64> {
        let size = self.size();
        if size > self.budget as u128 {
            return Err(TropError::BudgetExceeded {
                size,
                budget: self.budget,
            });
        }
        Ok(size as u64)
    }

    /// The `index`-th grid point, coordinates in mixed radix `2R + 1`.
    fn point<N: Number>(&self, mut index: u64) -> TropVector<N> {
        let side = 2 * self.range as u64 + 1;
        let mut entries = Vec::with_capacity(self.dim);
        entries.push(ExtScalar::Finite(N::zero()));
        for _ in 1..self.dim {
            let digit = (index % side) as i64 - self.range;
            index /= side;
            entries.push(ExtScalar::Finite(N::from_i64(digit)));
        }
        TropVector::new(entries).expect("dim >= 1")
    }

    fn points<N: Number>(&self) -> Result<impl ParallelIterator<Item = TropVector<N>> + '_> {
        let size = self.checked_size()?;
        Ok((0..size).into_par_iter().map(move |i| self.point(i)))
    }
}

/// Lexicographic order on vectors.
pub fn lex_cmp<N: Number>(a: &TropVector<N>, b: &TropVector<N>) -> Ordering {
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| x.ext_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn require_integer<N: Number>(sys: &TwoSidedSystem<N>) -> Result<()> {
    let bad = sys
        .a()
        .entries()
        .chain(sys.b().entries())
        .filter_map(ExtScalar::as_finite)
        .find(|v| !v.is_integer());
    match bad {
        Some(v) => Err(TropError::NotInteger(v.to_string())),
        None => Ok(()),
    }
}

/// All grid solutions of `sys`, sorted lexicographically.
pub fn enumerate_solutions<N: Number>(
    sys: &TwoSidedSystem<N>,
    spec: &GridSpec,
) -> Result<Vec<TropVector<N>>> {
    require_integer(sys)?;
    if spec.dim != sys.cols() {
        return Err(TropError::Shape {
            op: "enumerate_solutions",
            expected: format!("dim {}", sys.cols()),
            found: format!("dim {}", spec.dim),
        });
    }
    let found: Result<Vec<Option<TropVector<N>>>> = spec
        .points()?
        .map(|x| Ok(is_solution(sys, &x)?.then_some(x)))
        .collect();
    let mut out: Vec<_> = found?.into_iter().flatten().collect();
    out.sort_by(lex_cmp);
    Ok(out)
}

/// All grid points in the min-plus span of `generators`, sorted.
pub fn span_grid_points<N: Number>(
    generators: &[TropVector<N>],
    spec: &GridSpec,
) -> Result<Vec<TropVector<N>>> {
    let found: Result<Vec<Option<TropVector<N>>>> = spec
        .points()?
        .map(|x| Ok(minplus_membership(generators, &x)?.map(|_| x)))
        .collect();
    let mut out: Vec<_> = found?.into_iter().flatten().collect();
    out.sort_by(lex_cmp);
    Ok(out)
}

/// Grid comparison of a solution set with a min-plus span.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "N: Number"))]
pub struct Verdict<N: Number> {
    pub range: i64,
    pub solutions: usize,
    pub span_points: usize,
    /// Grid solutions outside the span.
    pub inclusion_violations: Vec<TropVector<N>>,
    /// Grid points of the span that are not solutions.
    pub converse_violations: Vec<TropVector<N>>,
}

impl<N: Number> Verdict<N> {
    pub fn inclusion_holds(&self) -> bool {
        self.inclusion_violations.is_empty()
    }

    /// Solutions and span agree on the whole grid.
    pub fn sets_coincide(&self) -> bool {
        self.inclusion_holds() && self.converse_violations.is_empty()
    }
}

/// Compares the grid solutions of `sys` with the grid points of the span of
/// `generators`, in both directions.
pub fn verify_closure<N: Number>(
    sys: &TwoSidedSystem<N>,
    generators: &[TropVector<N>],
    spec: &GridSpec,
) -> Result<Verdict<N>> {
    let solutions = enumerate_solutions(sys, spec)?;
    let span = span_grid_points(generators, spec)?;
    let mut inclusion_violations = Vec::new();
    for x in &solutions {
        if minplus_membership(generators, x)?.is_none() {
            inclusion_violations.push(x.clone());
        }
    }
    let mut converse_violations = Vec::new();
    for x in &span {
        if !is_solution(sys, x)? {
            converse_violations.push(x.clone());
        }
    }
    Ok(Verdict {
        range: spec.range,
        solutions: solutions.len(),
        span_points: span.len(),
        inclusion_violations,
        converse_violations,
    })
}

/// The greatest integer solution `x ≤ start` with `start_j - depth ≤ x_j`,
/// found by exhaustive search. Solutions are closed under `⊕`, so this is
/// well defined whenever any solution lies in the box.
pub fn greatest_solution_below<N: Number>(
    sys: &TwoSidedSystem<N>,
    start: &TropVector<N>,
    depth: u32,
    budget: u64,
) -> Result<Option<TropVector<N>>> {
    require_integer(sys)?;
    let s = start.finite_values().ok_or(TropError::NonFinite {
        what: "search start",
    })?;
    if let Some(v) = s.iter().find(|v| !v.is_integer()) {
        return Err(TropError::NotInteger(v.to_string()));
    }
    let side = depth as u128 + 1;
    let size = (0..s.len()).fold(1u128, |acc, _| acc.saturating_mul(side));
    if size > budget as u128 {
        return Err(TropError::BudgetExceeded { size, budget });
    }
    let found: Result<Vec<TropVector<N>>> = (0..size as u64)
        .into_par_iter()
        .map(|mut index| {
            let mut entries = Vec::with_capacity(s.len());
            for v in &s {
                let down = N::from_i64((index % side as u64) as i64);
                index /= side as u64;
                let e = v
                    .checked_sub(&down)
                    .ok_or(TropError::Overflow { op: "search" })?;
                entries.push(ExtScalar::Finite(e));
            }
            TropVector::new(entries)
        })
        .filter_map(|x| match x {
            Ok(x) => match is_solution(sys, &x) {
                Ok(true) => Some(Ok(x)),
                Ok(false) => None,
                Err(e) => Some(Err(e)),
            },
            Err(e) => Some(Err(e)),
        })
        .collect();
    let mut best: Option<TropVector<N>> = None;
    for x in found? {
        best = Some(match best {
            None => x,
            Some(b) => b.oplus(&x)?,
        });
    }
    Ok(best)
}
