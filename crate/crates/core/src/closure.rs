//! Min-plus linear closure of the solution set of `A ⊗ x = B ⊗ x`.
//!
//! The pipeline:
//!
//! 1. stack `D_{α,0}` under `A` and `D_{α,-1}` under `B`, with
//!    `α = max_i max_{j,k} |c_ij - c_ik| + 1` over the finite entries of
//!    `C = -(A ⊕ B)`;
//! 2. replace every `ε` of the stacked pair by
//!    `β = min(min a_ij, min b_ij) - α`;
//! 3. run the alternating method from every row `C̃_i` of `-(Ã ⊕ B̃)`;
//! 4. decide projective boundedness from the coordinate gaps of the results;
//! 5. test every row for local min-plus convexity at its generator;
//! 6. report the min-plus span of the generators.
//!
//! Every solution of the stacked system is stable, so the generators span
//! the smallest min-plus subspace containing all its finite solutions.

use rayon::prelude::*;

use crate::error::{PipelineError, Result, TropError};
use crate::linearity::{row_diagnostics, RowDiagnostic};
use crate::matrix::{d_matrix, validate_system, TropMatrix, TropVector, TwoSidedSystem};
use crate::semiring::{ExtScalar, Int, Number};
use crate::solver::{phi_outcome, SolverConfig};

/// A base system together with its `D`-extension.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedSystem<N = Int> {
    pub base: TwoSidedSystem<N>,
    /// `(Ã, B̃)` of shape `(m+n)×n`, free of `ε`.
    pub extended: TwoSidedSystem<N>,
    pub alpha: N,
    /// The value substituted for `ε` entries, when any were present.
    pub beta: Option<N>,
    /// `C̃ = -(Ã ⊕ B̃)`.
    pub c_tilde: TropMatrix<N>,
}

impl<N: Number> ExtendedSystem<N> {
    /// Number of base equations `m`.
    pub fn base_rows(&self) -> usize {
        self.base.rows()
    }

    pub fn rows(&self) -> usize {
        self.extended.rows()
    }

    pub fn cols(&self) -> usize {
        self.extended.cols()
    }
}

fn diff<N: Number>(a: &N, b: &N) -> Result<N> {
    a.checked_sub(b)
        .ok_or(TropError::Overflow { op: "difference" })
}

fn min_max<'a, N: Number>(values: impl Iterator<Item = &'a N>) -> Option<(&'a N, &'a N)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((
            if v.total_cmp(lo).is_lt() { v } else { lo },
            if v.total_cmp(hi).is_gt() { v } else { hi },
        )),
    })
}

/// `max { c_ij - c_ik }` over finite entries sharing a row of
/// `C = -(A ⊕ B)`; zero when no row has two finite entries.
pub fn alpha_threshold<N: Number>(sys: &TwoSidedSystem<N>) -> Result<N> {
    let mut best = N::zero();
    for i in 0..sys.rows() {
        let row = sys.c_row(i);
        let Some((lo, hi)) = min_max(row.entries().iter().filter_map(ExtScalar::as_finite)) else {
            continue;
        };
        let gap = diff(hi, lo)?;
        if gap.total_cmp(&best).is_gt() {
            best = gap;
        }
    }
    Ok(best)
}

/// Default `α`: the threshold plus one.
pub fn default_alpha<N: Number>(sys: &TwoSidedSystem<N>) -> Result<N> {
    alpha_threshold(sys)?
        .checked_add(&N::from_i64(1))
        .ok_or(TropError::Overflow { op: "alpha" })
}

/// Steps 1–2: the `D`-extension with `ε` entries replaced.
///
/// An `alpha_override` must exceed [`alpha_threshold`].
pub fn build_extension<N: Number>(
    sys: &TwoSidedSystem<N>,
    alpha_override: Option<N>,
) -> Result<ExtendedSystem<N>> {
    let alpha = match alpha_override {
        Some(alpha) => {
            let threshold = alpha_threshold(sys)?;
            if alpha.total_cmp(&threshold).is_le() {
                return Err(TropError::AlphaTooSmall {
                    alpha: alpha.to_string(),
                    threshold: threshold.to_string(),
                });
            }
            alpha
        }
        None => default_alpha(sys)?,
    };
    let n = sys.cols();
    let a_tilde = sys.a().vstack(&d_matrix(n, &alpha, &N::zero())?)?;
    let b_tilde = sys.b().vstack(&d_matrix(n, &alpha, &N::from_i64(-1))?)?;

    let has_eps = a_tilde
        .entries()
        .chain(b_tilde.entries())
        .any(|e| !e.is_finite());
    let (a_tilde, b_tilde, beta) = if has_eps {
        let (min_entry, _) = min_max(
            sys.a()
                .entries()
                .chain(sys.b().entries())
                .filter_map(ExtScalar::as_finite),
        )
        .expect("R-astic matrices have finite entries");
        let beta = diff(min_entry, &alpha)?;
        let fill = |e: &ExtScalar<N>| match e {
            ExtScalar::Finite(_) => e.clone(),
            _ => ExtScalar::Finite(beta.clone()),
        };
        (a_tilde.map(fill), b_tilde.map(fill), Some(beta))
    } else {
        (a_tilde, b_tilde, None)
    };

    let c_tilde = a_tilde.oplus(&b_tilde)?.negate()?;
    let extended = validate_system(a_tilde, b_tilde)?;
    Ok(ExtendedSystem {
        base: sys.clone(),
        extended,
        alpha,
        beta,
        c_tilde,
    })
}

/// `φ(C̃_iᵀ)` for one row of the extended system.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator<N = Int> {
    pub row: usize,
    /// The start vector `C̃_iᵀ`.
    pub start: TropVector<N>,
    /// `φ(C̃_iᵀ)` before normalization.
    pub raw: TropVector<N>,
    /// `raw` shifted so that its first entry is 0.
    pub vector: TropVector<N>,
    /// First entry of `raw`.
    pub shift: N,
    pub iterations: u64,
}

/// Step 3: one alternating-method run per row of the extended system.
/// The runs are independent and execute in parallel.
pub fn closure_generators<N: Number>(
    ext: &ExtendedSystem<N>,
    cfg: &SolverConfig,
) -> Result<Vec<Generator<N>>> {
    (0..ext.rows())
        .into_par_iter()
        .map(|row| {
            let start = ext.c_tilde.row(row);
            let wrap = |e: TropError| TropError::Generator {
                row,
                source: Box::new(e),
            };
            let (raw, iterations) = phi_outcome(&ext.extended, &start, cfg).map_err(wrap)?;
            let (vector, shift) = raw.normalize_first().map_err(wrap)?;
            Ok(Generator {
                row,
                start,
                raw,
                vector,
                shift,
                iterations,
            })
        })
        .collect()
}

/// Largest coordinate gap `max_j x_j - min_j x_j` of a finite vector.
pub fn spread<N: Number>(x: &TropVector<N>) -> Result<N> {
    let (lo, hi) = min_max(
        x.finite_values()
            .ok_or(TropError::NonFinite { what: "vector" })?
            .into_iter(),
    )
    .expect("vectors are non-empty");
    diff(hi, lo)
}

/// Step 4: every generator has all coordinate gaps strictly below `α`.
pub fn boundedness_check<N: Number>(ext: &ExtendedSystem<N>, generators: &[TropVector<N>]) -> bool {
    generators.iter().all(|g| {
        spread(g)
            .map(|s| s.total_cmp(&ext.alpha).is_lt())
            .unwrap_or(false)
    })
}

/// Principal coefficients `t_i = max_j (x_j - g_ij)` of `x` against the
/// generators, returned when `⊕′_i t_i ⊗′ g_i` reproduces `x` exactly.
pub fn minplus_membership<N: Number>(
    generators: &[TropVector<N>],
    x: &TropVector<N>,
) -> Result<Option<Vec<N>>> {
    let xs = x.finite_values().ok_or(TropError::NonFinite {
        what: "membership argument",
    })?;
    let mut coefficients = Vec::with_capacity(generators.len());
    let mut combination: Option<TropVector<N>> = None;
    for g in generators {
        if g.dim() != x.dim() {
            return Err(TropError::Shape {
                op: "minplus_membership",
                expected: format!("dim {}", x.dim()),
                found: format!("dim {}", g.dim()),
            });
        }
        let gs = g
            .finite_values()
            .ok_or(TropError::NonFinite { what: "generator" })?;
        let mut t: Option<N> = None;
        for (xj, gj) in xs.iter().zip(&gs) {
            let d = diff(*xj, *gj)?;
            if t.as_ref().is_none_or(|cur| d.total_cmp(cur).is_gt()) {
                t = Some(d);
            }
        }
        let t = t.expect("vectors are non-empty");
        let term = g.scale_dual(&ExtScalar::Finite(t.clone()))?;
        combination = Some(match combination {
            None => term,
            Some(acc) => acc.oplus_dual(&term)?,
        });
        coefficients.push(t);
    }
    Ok(match combination {
        Some(c) if c.same(x) => Some(coefficients),
        _ => None,
    })
}

/// Membership in the solution set of `(D_{α,0}, D_{α,-1})`: the `ε`-vector,
/// or a finite vector whose coordinates differ pairwise by at most `α`.
pub fn d_solution_predicate<N: Number>(alpha: &N, x: &TropVector<N>) -> bool {
    if x.is_neg_inf() {
        return true;
    }
    match spread(x) {
        Ok(s) => s.total_cmp(alpha).is_le(),
        Err(_) => false,
    }
}

/// Everything the pipeline learns about a system.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureReport<N = Int> {
    pub alpha: N,
    pub beta: Option<N>,
    /// Normalized `φ(C̃_iᵀ)`, one per row of the extended system.
    pub generators: Vec<TropVector<N>>,
    pub projectively_bounded: bool,
    /// The row-wise local convexity condition holds for every row.
    pub condition_holds: bool,
    /// `condition_holds` computed with exact arithmetic.
    pub certified_minplus_linear: bool,
    pub row_diagnostics: Vec<RowDiagnostic>,
    pub iterations_total: u64,
    /// `false` when the number type compares with a tolerance.
    pub exact: bool,
}

impl<N: Number> ClosureReport<N> {
    /// The extended solution set only approximates the base one.
    pub fn is_approximation(&self) -> bool {
        !self.projectively_bounded
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureAnalysis<N = Int> {
    pub extension: ExtendedSystem<N>,
    pub generators: Vec<Generator<N>>,
    pub report: ClosureReport<N>,
}

/// Runs steps 1–6. Errors carry the step they arose in.
pub fn analyze<N: Number>(
    sys: &TwoSidedSystem<N>,
    alpha_override: Option<N>,
    cfg: &SolverConfig,
) -> Result<ClosureAnalysis<N>, PipelineError> {
    let extension = build_extension(sys, alpha_override).map_err(PipelineError::at(1))?;
    let generators = closure_generators(&extension, cfg).map_err(PipelineError::at(3))?;
    let vectors: Vec<TropVector<N>> = generators.iter().map(|g| g.vector.clone()).collect();
    let projectively_bounded = boundedness_check(&extension, &vectors);
    let diagnostics =
        row_diagnostics(&extension.extended, &vectors).map_err(PipelineError::at(5))?;
    let condition_holds = diagnostics.iter().all(|d| d.in_r);
    let report = ClosureReport {
        alpha: extension.alpha.clone(),
        beta: extension.beta.clone(),
        generators: vectors,
        projectively_bounded,
        condition_holds,
        certified_minplus_linear: condition_holds && N::CERTIFYING,
        row_diagnostics: diagnostics,
        iterations_total: generators.iter().map(|g| g.iterations).sum(),
        exact: N::CERTIFYING,
    };
    Ok(ClosureAnalysis {
        extension,
        generators,
        report,
    })
}
