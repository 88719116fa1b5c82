//! The alternating method for two-sided max-plus systems.
//!
//! For the separated system `A ⊗ x = B ⊗ y` one round is
//!
//! ```text
//! y(r)   = -Bᵀ ⊗′ (A ⊗ x(r))
//! x(r+1) = -Aᵀ ⊗′ (B ⊗ y(r))
//! ```
//!
//! and the homogeneous system `A ⊗ x = B ⊗ x` is solved through its
//! reduction `(A; B) ⊗ x = (E; E) ⊗ y`, whose round collapses to the single
//! map [`phi0`]. The run stops with no finite solution as soon as every
//! coordinate has dropped strictly below its starting value, and with a
//! solution when an iterate repeats.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Result, Side, TropError};
use crate::matrix::{row_argmax, RAsticViolation, TropMatrix, TropVector, TwoSidedSystem};
use crate::semiring::{common_scale, ExtScalar, Int, Number};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolverConfig {
    /// Maximum number of iterations; `None` derives a cap from the input
    /// magnitudes (see [`default_iteration_cap`]).
    pub iteration_cap: Option<u64>,
    /// Retain every iterate `x(r)` in the outcome.
    pub trace: bool,
    /// Comparison tolerance stamped onto the start vector. Only affects
    /// tolerance-compared number types.
    pub float_tolerance: Option<f64>,
}

impl SolverConfig {
    pub fn with_cap(cap: u64) -> Self {
        SolverConfig {
            iteration_cap: Some(cap),
            ..Default::default()
        }
    }

    pub fn traced() -> Self {
        SolverConfig {
            trace: true,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Solution,
    NoFiniteSolution,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "N: Number"))]
pub struct AlternateOutcome<N = Int> {
    pub status: Status,
    /// The solution, when `status == Solution`.
    pub x: Option<TropVector<N>>,
    /// `A ⊗ x` (homogeneous) or the partner vector `y` (separated).
    pub y: Option<TropVector<N>>,
    /// Number of rounds computed.
    pub iterations: u64,
    /// The last iterate computed, whatever the status.
    pub last: TropVector<N>,
    pub cap: u64,
    /// `x(0), x(1), …` when tracing was enabled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<TropVector<N>>>,
}

impl<N: Number> AlternateOutcome<N> {
    pub fn is_solution(&self) -> bool {
        self.status == Status::Solution
    }
}

/// `10 · n · (m + n) · (K + 1)`, where `K` bounds the entries and the spread
/// of the start vector after scaling everything to integers.
pub fn default_iteration_cap<'a, N: Number>(
    rows: usize,
    cols: usize,
    entries: impl Iterator<Item = &'a ExtScalar<N>> + Clone,
    x0: &'a TropVector<N>,
) -> u64 {
    let finite = entries.filter_map(ExtScalar::as_finite);
    let x_vals: Vec<&N> = x0
        .entries()
        .iter()
        .filter_map(ExtScalar::as_finite)
        .collect();
    let scale = common_scale(finite.clone().chain(x_vals.iter().copied())) as f64;
    let max_entry = finite.map(|v| v.to_f64().abs()).fold(0.0, f64::max);
    let (lo, hi) = x_vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let f = v.to_f64();
            (lo.min(f), hi.max(f))
        });
    let spread = if hi >= lo { hi - lo } else { 0.0 };
    let k = (max_entry.max(spread) * scale).ceil();
    let bound = 10.0 * cols as f64 * (rows + cols) as f64 * (k + 1.0);
    if bound >= u64::MAX as f64 {
        u64::MAX
    } else {
        (bound as u64).max(1)
    }
}

fn resolve_cap(cfg: &SolverConfig, derived: impl FnOnce() -> u64) -> Result<u64> {
    match cfg.iteration_cap {
        Some(0) => Err(TropError::Config("iteration cap must be at least 1".into())),
        Some(cap) => Ok(cap),
        None => Ok(derived()),
    }
}

fn check_start<N: Number>(
    x0: &TropVector<N>,
    n: usize,
    cfg: &SolverConfig,
) -> Result<TropVector<N>> {
    if x0.dim() != n {
        return Err(TropError::Shape {
            op: "alternating method",
            expected: format!("dim {n}"),
            found: format!("dim {}", x0.dim()),
        });
    }
    if !x0.is_finite() {
        return Err(TropError::NonFinite {
            what: "start vector",
        });
    }
    Ok(match cfg.float_tolerance {
        Some(tol) => TropVector::new(
            x0.entries()
                .iter()
                .map(|e| match e {
                    ExtScalar::Finite(v) => ExtScalar::Finite(v.clone().with_tolerance(tol)),
                    other => other.clone(),
                })
                .collect(),
        )?,
        None => x0.clone(),
    })
}

/// One alternating step on the homogeneous system:
/// `φ₀(x) = Cᵀ ⊗′ ((A ⊗ x) ⊕′ (B ⊗ x))` with `C = -(A ⊕ B)`.
pub fn phi0<N: Number>(sys: &TwoSidedSystem<N>, x: &TropVector<N>) -> Result<TropVector<N>> {
    if x.dim() != sys.cols() {
        return Err(TropError::Shape {
            op: "phi0",
            expected: format!("dim {}", sys.cols()),
            found: format!("dim {}", x.dim()),
        });
    }
    if !x.is_finite() {
        return Err(TropError::NonFinite {
            what: "phi0 argument",
        });
    }
    let lower = sys
        .a()
        .maxplus_mul(x)?
        .oplus_dual(&sys.b().maxplus_mul(x)?)?;
    sys.c_transpose().minplus_mul(&lower)
}

/// Runs the alternating method on `A ⊗ x = B ⊗ x` from `x0`.
pub fn alternating_homogeneous<N: Number>(
    sys: &TwoSidedSystem<N>,
    x0: &TropVector<N>,
    cfg: &SolverConfig,
) -> Result<AlternateOutcome<N>> {
    let x0 = check_start(x0, sys.cols(), cfg)?;
    let cap = resolve_cap(cfg, || {
        default_iteration_cap(
            sys.rows(),
            sys.cols(),
            sys.a().entries().chain(sys.b().entries()),
            &x0,
        )
    })?;
    let mut trace = cfg.trace.then(|| vec![x0.clone()]);
    let mut x = x0.clone();
    let mut iterations = 0u64;
    loop {
        let next = phi0(sys, &x)?;
        iterations += 1;
        if let Some(t) = trace.as_mut() {
            t.push(next.clone());
        }
        if next.all_lt(&x0) {
            return Ok(AlternateOutcome {
                status: Status::NoFiniteSolution,
                x: None,
                y: None,
                iterations,
                last: next,
                cap,
                trace,
            });
        }
        if next.same(&x) {
            let y = sys
                .a()
                .maxplus_mul(&x)?
                .oplus_dual(&sys.b().maxplus_mul(&x)?)?;
            return Ok(AlternateOutcome {
                status: Status::Solution,
                x: Some(x),
                y: Some(y),
                iterations,
                last: next,
                cap,
                trace,
            });
        }
        if iterations >= cap {
            return Ok(AlternateOutcome {
                status: Status::IterationCap,
                x: None,
                y: None,
                iterations,
                last: next,
                cap,
                trace,
            });
        }
        x = next;
    }
}

fn require_r_astic<N: Number>(m: &TropMatrix<N>, side: Side) -> Result<()> {
    match m.first_non_r_astic() {
        Some(RAsticViolation::Row(index)) => Err(TropError::RowNotRAstic { side, index }),
        Some(RAsticViolation::Column(index)) => Err(TropError::ColumnNotRAstic { side, index }),
        None => Ok(()),
    }
}

/// Runs the alternating method on the separated system `A ⊗ x = B ⊗ y`,
/// with `A` of shape `m×n` and `B` of shape `m×k`.
pub fn alternating_separated<N: Number>(
    a: &TropMatrix<N>,
    b: &TropMatrix<N>,
    x0: &TropVector<N>,
    cfg: &SolverConfig,
) -> Result<AlternateOutcome<N>> {
    if a.rows() != b.rows() {
        return Err(TropError::Shape {
            op: "alternating_separated",
            expected: format!("{} rows", a.rows()),
            found: format!("{} rows", b.rows()),
        });
    }
    require_r_astic(a, Side::A)?;
    require_r_astic(b, Side::B)?;
    let x0 = check_start(x0, a.cols(), cfg)?;
    let cap = resolve_cap(cfg, || {
        default_iteration_cap(
            a.rows(),
            a.cols().max(b.cols()),
            a.entries().chain(b.entries()),
            &x0,
        )
    })?;
    let neg_at = a.neg_transpose()?;
    let neg_bt = b.neg_transpose()?;

    let mut trace = cfg.trace.then(|| vec![x0.clone()]);
    let mut x = x0.clone();
    let mut iterations = 0u64;
    loop {
        let y = neg_bt.minplus_mul(&a.maxplus_mul(&x)?)?;
        let next = neg_at.minplus_mul(&b.maxplus_mul(&y)?)?;
        iterations += 1;
        if let Some(t) = trace.as_mut() {
            t.push(next.clone());
        }
        let status = if next.all_lt(&x0) {
            Status::NoFiniteSolution
        } else if next.same(&x) {
            Status::Solution
        } else if iterations >= cap {
            Status::IterationCap
        } else {
            x = next;
            continue;
        };
        let solved = status == Status::Solution;
        return Ok(AlternateOutcome {
            status,
            x: solved.then(|| x.clone()),
            y: solved.then_some(y),
            iterations,
            last: next,
            cap,
            trace,
        });
    }
}

/// The stable solution reached by the alternating method from `x`.
pub fn phi<N: Number>(
    sys: &TwoSidedSystem<N>,
    x: &TropVector<N>,
    cfg: &SolverConfig,
) -> Result<TropVector<N>> {
    phi_outcome(sys, x, cfg).map(|(x, _)| x)
}

/// [`phi`] together with the number of rounds it took.
pub fn phi_outcome<N: Number>(
    sys: &TwoSidedSystem<N>,
    x: &TropVector<N>,
    cfg: &SolverConfig,
) -> Result<(TropVector<N>, u64)> {
    let out = alternating_homogeneous(sys, x, cfg)?;
    match out.status {
        Status::Solution => Ok((out.x.expect("solution vector"), out.iterations)),
        Status::NoFiniteSolution => Err(TropError::NoFiniteSolution {
            iterations: out.iterations,
        }),
        Status::IterationCap => Err(TropError::IterationCap { cap: out.cap }),
    }
}

/// `A ⊗ x = B ⊗ x`.
pub fn is_solution<N: Number>(sys: &TwoSidedSystem<N>, x: &TropVector<N>) -> Result<bool> {
    Ok(sys.a().maxplus_mul(x)?.same(&sys.b().maxplus_mul(x)?))
}

/// `φ₀(x) = x` for a solution `x`.
pub fn is_stable<N: Number>(sys: &TwoSidedSystem<N>, x: &TropVector<N>) -> Result<bool> {
    if !is_solution(sys, x)? {
        return Err(TropError::NotASolution);
    }
    Ok(phi0(sys, x)?.same(x))
}

/// Columns attaining the maximum in row `i` of `A ⊗ x` or of `B ⊗ x`.
pub fn m_set<N: Number>(
    sys: &TwoSidedSystem<N>,
    x: &TropVector<N>,
    i: usize,
) -> Result<BTreeSet<usize>> {
    if i >= sys.rows() {
        return Err(TropError::Shape {
            op: "m_set",
            expected: format!("row < {}", sys.rows()),
            found: format!("row {i}"),
        });
    }
    if !x.is_finite() {
        return Err(TropError::NonFinite {
            what: "m_set argument",
        });
    }
    let (_, from_a) = row_argmax(sys.a().row_slice(i), x)?;
    let (_, from_b) = row_argmax(sys.b().row_slice(i), x)?;
    Ok(&from_a | &from_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::validate_system;
    use proptest::prelude::*;

    fn example() -> TwoSidedSystem {
        let a = TropMatrix::from_ints(&[[0, 1, -1], [0, -5, -5], [0, 4, 6], [0, 3, -2]]).unwrap();
        let b =
            TropMatrix::from_ints(&[[0, -1, -1], [0, -4, -3], [-1, 1, 6], [-1, 3, -3]]).unwrap();
        validate_system(a, b).unwrap()
    }

    fn v(xs: &[i64]) -> TropVector {
        TropVector::from_ints(xs)
    }

    fn sys(a: &[&[i64]], b: &[&[i64]]) -> TwoSidedSystem {
        validate_system(
            TropMatrix::from_ints(a).unwrap(),
            TropMatrix::from_ints(b).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn phi0_examples() {
        let s = example();
        assert_eq!(phi0(&s, &v(&[0, 4, 3])).unwrap(), v(&[0, 2, 3]));
        assert_eq!(phi0(&s, &v(&[0, 2, 3])).unwrap(), v(&[0, 1, 3]));
        assert_eq!(phi0(&s, &v(&[0, 1, 3])).unwrap(), v(&[0, 1, 3]));
        let flat = sys(&[&[0, 0]], &[&[0, 0]]);
        assert_eq!(phi0(&flat, &v(&[0, 1])).unwrap(), v(&[1, 1]));
        assert!(phi0(&flat, &v(&[0])).is_err());
    }

    #[test]
    fn homogeneous_example_trace() {
        let out =
            alternating_homogeneous(&example(), &v(&[0, 4, 3]), &SolverConfig::traced()).unwrap();
        assert_eq!(out.status, Status::Solution);
        assert_eq!(out.x, Some(v(&[0, 1, 3])));
        assert_eq!(out.y, Some(v(&[2, 0, 9, 4])));
        assert_eq!(out.iterations, 3);
        assert_eq!(
            out.trace.unwrap(),
            vec![v(&[0, 4, 3]), v(&[0, 2, 3]), v(&[0, 1, 3]), v(&[0, 1, 3])]
        );
    }

    #[test]
    fn identical_sides_stabilize_immediately_after_first_step() {
        let a = &[&[0, 2, -1][..], &[1, -3, 0][..]];
        let s = sys(a, a);
        let out = alternating_homogeneous(&s, &v(&[4, -2, 7]), &SolverConfig::default()).unwrap();
        assert_eq!(out.status, Status::Solution);
        assert!(out.iterations <= 2);
        let x = out.x.unwrap();
        assert_eq!(x, phi0(&s, &v(&[4, -2, 7])).unwrap());
        assert!(is_stable(&s, &x).unwrap());
    }

    #[test]
    fn one_by_one_without_finite_solution() {
        let s = sys(&[&[0]], &[&[1]]);
        // φ₀(x) = x - 1, so the first step already drops below x(0)
        let out = alternating_homogeneous(&s, &v(&[0]), &SolverConfig::default()).unwrap();
        assert_eq!(out.status, Status::NoFiniteSolution);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.last, v(&[-1]));
        assert_eq!(
            phi(&s, &v(&[0]), &SolverConfig::default()),
            Err(TropError::NoFiniteSolution { iterations: 1 })
        );
    }

    #[test]
    fn iteration_cap_is_an_outcome() {
        let out = alternating_homogeneous(&example(), &v(&[0, 4, 3]), &SolverConfig::with_cap(1))
            .unwrap();
        assert_eq!(out.status, Status::IterationCap);
        assert_eq!(out.last, v(&[0, 2, 3]));
        assert_eq!(
            phi(&example(), &v(&[0, 4, 3]), &SolverConfig::with_cap(2)),
            Err(TropError::IterationCap { cap: 2 })
        );
        assert!(matches!(
            alternating_homogeneous(&example(), &v(&[0, 4, 3]), &SolverConfig::with_cap(0)),
            Err(TropError::Config(_))
        ));
    }

    #[test]
    fn start_vector_must_be_finite() {
        let x0 = TropVector::new(vec![
            ExtScalar::int(0),
            ExtScalar::NegInf,
            ExtScalar::int(1),
        ])
        .unwrap();
        assert_eq!(
            alternating_homogeneous(&example(), &x0, &SolverConfig::default()),
            Err(TropError::NonFinite {
                what: "start vector"
            })
        );
    }

    #[test]
    fn separated_identity_system() {
        let one = TropMatrix::from_ints(&[[0]]).unwrap();
        let out = alternating_separated(&one, &one, &v(&[5]), &SolverConfig::default()).unwrap();
        assert_eq!(out.status, Status::Solution);
        assert_eq!(out.x, Some(v(&[5])));
        assert_eq!(out.y, Some(v(&[5])));
    }

    #[test]
    fn separated_by_hand() {
        // y = -5 ⊗′ max(0, 0) = -5, then x = -Aᵀ ⊗′ (5 - 5) = (0, 0)
        let a = TropMatrix::from_ints(&[[0, 0]]).unwrap();
        let b = TropMatrix::from_ints(&[[5]]).unwrap();
        let out = alternating_separated(&a, &b, &v(&[0, 0]), &SolverConfig::default()).unwrap();
        assert_eq!(out.status, Status::Solution);
        assert_eq!(out.x, Some(v(&[0, 0])));
        assert_eq!(out.y, Some(v(&[-5])));
        assert_eq!(
            a.maxplus_mul(out.x.as_ref().unwrap()).unwrap(),
            b.maxplus_mul(out.y.as_ref().unwrap()).unwrap()
        );
    }

    #[test]
    fn separated_reduction_matches_homogeneous() {
        let s = example();
        let stacked_a = s.a().vstack(s.b()).unwrap();
        let e = TropMatrix::identity(4).unwrap();
        let stacked_e = e.vstack(&e).unwrap();
        let sep = alternating_separated(
            &stacked_a,
            &stacked_e,
            &v(&[0, 4, 3]),
            &SolverConfig::traced(),
        )
        .unwrap();
        let hom = alternating_homogeneous(&s, &v(&[0, 4, 3]), &SolverConfig::traced()).unwrap();
        assert_eq!(sep.trace, hom.trace);
        assert_eq!(sep.x, hom.x);
        assert_eq!(sep.y, hom.y);
        assert_eq!(sep.iterations, 3);
    }

    #[test]
    fn separated_shape_errors() {
        let a = TropMatrix::from_ints(&[[0, 0]]).unwrap();
        let b = TropMatrix::from_ints(&[[0], [1]]).unwrap();
        assert!(matches!(
            alternating_separated(&a, &b, &v(&[0, 0]), &SolverConfig::default()),
            Err(TropError::Shape { .. })
        ));
        let b = TropMatrix::from_ints(&[[0]]).unwrap();
        assert!(matches!(
            alternating_separated(&a, &b, &v(&[0]), &SolverConfig::default()),
            Err(TropError::Shape { .. })
        ));
    }

    #[test]
    fn solution_predicate() {
        let s = example();
        assert!(is_solution(&s, &v(&[0, 1, 3])).unwrap());
        assert!(is_solution(&s, &TropVector::neg_inf(3).unwrap()).unwrap());
        // (5,0,9,7) on the left against (3,0,9,7) on the right
        assert!(!is_solution(&s, &v(&[0, 4, 3])).unwrap());
    }

    #[test]
    fn stability_predicate() {
        let flat = sys(&[&[0, 0]], &[&[0, 0]]);
        assert!(is_stable(&flat, &v(&[1, 1])).unwrap());
        assert!(!is_stable(&flat, &v(&[0, 1])).unwrap());
        assert_eq!(
            is_stable(&example(), &v(&[0, 4, 3])),
            Err(TropError::NotASolution)
        );
        let x = phi(&example(), &v(&[7, -2, 0]), &SolverConfig::default()).unwrap();
        assert!(is_stable(&example(), &x).unwrap());
    }

    #[test]
    fn m_set_examples() {
        let s = example();
        let x = v(&[0, 1, 3]);
        // row 1: A gives (0, 2, 2), B gives (0, 0, 2)
        assert_eq!(m_set(&s, &x, 0).unwrap(), BTreeSet::from([1, 2]));
        // row 2: A gives (0, -4, -2), B gives (0, -3, 0)
        assert_eq!(m_set(&s, &x, 1).unwrap(), BTreeSet::from([0, 2]));
        let flat = sys(&[&[0, 0]], &[&[0, 0]]);
        assert_eq!(m_set(&flat, &v(&[2, 1]), 0).unwrap(), BTreeSet::from([0]));
        assert!(m_set(&s, &x, 4).is_err());
    }

    #[test]
    fn rational_inputs_are_exact() {
        use crate::semiring::Rational;
        let q = |n: i64, d: i64| ExtScalar::Finite(Rational::new(n.into(), d.into()));
        let a =
            TropMatrix::from_rows(vec![vec![q(0, 1), q(1, 2)], vec![q(1, 3), q(0, 1)]]).unwrap();
        let b =
            TropMatrix::from_rows(vec![vec![q(1, 4), q(0, 1)], vec![q(0, 1), q(1, 6)]]).unwrap();
        let s = validate_system(a, b).unwrap();
        let x0 = TropVector::new(vec![q(0, 1), q(0, 1)]).unwrap();
        let out = alternating_homogeneous(&s, &x0, &SolverConfig::default()).unwrap();
        assert_ne!(out.status, Status::IterationCap);
        if let Some(x) = out.x {
            assert!(is_solution(&s, &x).unwrap());
            assert!(is_stable(&s, &x).unwrap());
        }
    }

    fn system_strategy() -> impl Strategy<Value = (TwoSidedSystem, Vec<i64>)> {
        (1usize..=4, 1usize..=4).prop_flat_map(|(m, n)| {
            (
                prop::collection::vec(-5i64..=5, m * n),
                prop::collection::vec(-5i64..=5, m * n),
                prop::collection::vec(-5i64..=5, n),
            )
                .prop_map(move |(a, b, x)| {
                    let rows = |flat: &[i64]| -> Vec<Vec<i64>> {
                        flat.chunks(n).map(|c| c.to_vec()).collect()
                    };
                    let s = validate_system(
                        TropMatrix::from_ints(&rows(&a)).unwrap(),
                        TropMatrix::from_ints(&rows(&b)).unwrap(),
                    )
                    .unwrap();
                    (s, x)
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn iterates_descend_after_the_first_step((s, x0) in system_strategy()) {
            let out = alternating_homogeneous(&s, &v(&x0), &SolverConfig::traced()).unwrap();
            prop_assert_ne!(out.status, Status::IterationCap);
            let trace = out.trace.unwrap();
            for w in trace[1..].windows(2) {
                prop_assert!(w[1].leq(&w[0]));
            }
            if let Some(x) = out.x {
                prop_assert!(is_solution(&s, &x).unwrap());
                prop_assert!(is_stable(&s, &x).unwrap());
            }
        }

        #[test]
        fn phi0_is_idempotent_on_solutions(
            (s, x0) in system_strategy(),
            shift in prop::collection::vec(-3i64..=3, 4),
            c in -4i64..=4,
        ) {
            let other: Vec<i64> = x0.iter().zip(&shift).map(|(a, b)| a - 2 * b).collect();
            if let (Ok(x), Ok(y)) = (
                phi(&s, &v(&x0), &SolverConfig::default()),
                phi(&s, &v(&other), &SolverConfig::default()),
            ) {
                // max-plus combinations of solutions solve the system but need not be stable
                let z = x.oplus(&y.scale(&ExtScalar::int(c)).unwrap()).unwrap();
                prop_assert!(is_solution(&s, &z).unwrap());
                let once = phi0(&s, &z).unwrap();
                prop_assert_eq!(phi0(&s, &once).unwrap(), once);
            }
        }

        #[test]
        fn stable_criterion_implies_stable((s, x0) in system_strategy()) {
            if let Ok(x) = phi(&s, &v(&x0), &SolverConfig::default()) {
                let covered: BTreeSet<usize> = (0..s.rows())
                    .flat_map(|i| m_set(&s, &x, i).unwrap())
                    .collect();
                if covered.len() == s.cols() {
                    prop_assert!(is_stable(&s, &x).unwrap());
                }
            }
        }
    }
}
