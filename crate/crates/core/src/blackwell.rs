//! Blackwell dominance decisions, the similarity translation of garblings,
//! and garbling-chain iteration.
//!
//! Dominance of `A` over `B` means some garbling `G` satisfies `G A = B`.
//! When `A` is nonsingular the unique candidate is `B A^-1` and dominance
//! reduces to checking that the candidate is column-stochastic; otherwise a
//! feasibility program decides, minimizing the sup-norm residual so that
//! failures come with a graded certificate.

use crate::error::{Error, Result};
use crate::experiment::{Experiment, Garbling, COLUMN_SUM_TOL};
use crate::lp::{
    extract_garbling_candidate, garbling_feasibility_program, solve, LpStatus, DEFAULT_LP_MAX_ITERS,
    DEFAULT_LP_TOL,
};
use crate::matrix::{Matrix, DEFAULT_PIVOT_TOL};

/// Residual threshold under which a candidate certifies dominance; one
/// order looser than the LP tolerance to absorb assembly rounding.
pub const DOMINANCE_TOL: f64 = 1e-7;

/// Which decision path produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    InverseOracle,
    Lp,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::InverseOracle => f.write_str("inverse-oracle"),
            Method::Lp => f.write_str("lp"),
        }
    }
}

/// Outcome of a one-directional witness search.
#[derive(Debug, Clone, PartialEq)]
pub enum GarblingSearch {
    /// A validated witness with its replayed residual `||G A - B||_inf`.
    Found {
        witness: Garbling,
        residual: f64,
        method: Method,
    },
    /// No witness within tolerance; `residual` certifies the failure (the
    /// stochasticity violation of the unique inverse candidate, or the
    /// minimal sup-norm residual from the feasibility program).
    NotFound { residual: f64, method: Method },
}

impl GarblingSearch {
    pub fn found(&self) -> bool {
        matches!(self, GarblingSearch::Found { .. })
    }

    pub fn residual(&self) -> f64 {
        match self {
            GarblingSearch::Found { residual, .. } | GarblingSearch::NotFound { residual, .. } => {
                *residual
            }
        }
    }

    pub fn method(&self) -> Method {
        match self {
            GarblingSearch::Found { method, .. } | GarblingSearch::NotFound { method, .. } => {
                *method
            }
        }
    }

    pub fn witness(&self) -> Option<&Garbling> {
        match self {
            GarblingSearch::Found { witness, .. } => Some(witness),
            GarblingSearch::NotFound { .. } => None,
        }
    }
}

/// Direction of a dominance comparison between two experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Dominates,
    NotDominated,
    Equivalent,
}

/// Outcome of a Blackwell comparison, carrying the witness or a residual
/// certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceVerdict {
    pub relation: Relation,
    pub witness: Option<Garbling>,
    pub residual: f64,
    pub method: Method,
}

fn check_same_square(a: &Experiment, b: &Experiment) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.n_signals(),
            cols: a.n_states(),
        });
    }
    if !b.is_square() || a.n_signals() != b.n_signals() {
        return Err(Error::DimensionMismatch {
            left_rows: a.n_signals(),
            left_cols: a.n_states(),
            right_rows: b.n_signals(),
            right_cols: b.n_states(),
        });
    }
    Ok(a.n_signals())
}

/// Clamps small negatives to zero and rescales every column to sum to one.
fn clamp_and_normalize(candidate: &Matrix, tol: f64) -> Result<Garbling> {
    let n_rows = candidate.n_rows();
    let n_cols = candidate.n_cols();
    let mut entries = candidate.entries().to_vec();
    for v in entries.iter_mut() {
        if *v < 0.0 && *v >= -tol {
            *v = 0.0;
        }
    }
    for j in 0..n_cols {
        let sum: f64 = (0..n_rows).map(|i| entries[i * n_cols + j]).sum();
        if sum > 0.0 {
            for i in 0..n_rows {
                entries[i * n_cols + j] /= sum;
            }
        }
    }
    Garbling::new(Matrix::new(n_rows, n_cols, entries)?)
}

fn replay_residual(witness: &Garbling, a: &Experiment, b: &Experiment) -> Result<f64> {
    let product = witness.matrix().matmul(a.matrix())?;
    Ok(product.sub(b.matrix())?.inf_norm())
}

/// How far a candidate matrix is from being column-stochastic: the larger
/// of its worst negativity and its worst column-sum deviation.
fn stochasticity_violation(candidate: &Matrix) -> f64 {
    let negativity = (-candidate.min_entry()).max(0.0);
    let col_dev = candidate
        .col_sums()
        .into_iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max);
    negativity.max(col_dev)
}

/// Decides dominance through the unique inverse candidate `B A^-1`.
///
/// Returns `Ok(None)` when the path cannot decide: `A` is singular, or (in
/// borderline cases) the clamped candidate fails to replay within `tol`.
pub fn decide_by_inverse(
    a: &Experiment,
    b: &Experiment,
    tol: f64,
) -> Result<Option<GarblingSearch>> {
    check_same_square(a, b)?;
    let inverse = match a.matrix().inverse(DEFAULT_PIVOT_TOL) {
        Ok(m) => m,
        Err(Error::Singular { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let candidate = b.matrix().matmul(&inverse)?;
    let violation = stochasticity_violation(&candidate);
    if violation > tol {
        return Ok(Some(GarblingSearch::NotFound {
            residual: violation,
            method: Method::InverseOracle,
        }));
    }
    let witness = clamp_and_normalize(&candidate, tol)?;
    let residual = replay_residual(&witness, a, b)?;
    if residual <= tol {
        Ok(Some(GarblingSearch::Found {
            witness,
            residual,
            method: Method::InverseOracle,
        }))
    } else {
        Ok(None)
    }
}

/// Decides dominance through the feasibility program, independent of the
/// inverse path.
pub fn decide_by_lp(a: &Experiment, b: &Experiment, tol: f64) -> Result<GarblingSearch> {
    let n = check_same_square(a, b)?;
    let lp = garbling_feasibility_program(a, b)?;
    let outcome = solve(&lp, DEFAULT_LP_TOL, DEFAULT_LP_MAX_ITERS)?;
    match outcome.status {
        LpStatus::Optimal => {}
        LpStatus::IterationLimit => {
            return Err(Error::LpIterationLimit {
                max_iters: DEFAULT_LP_MAX_ITERS,
            })
        }
        // t can always absorb the residual, so neither state is reachable.
        other => {
            return Err(Error::MalformedProgram {
                reason: format!("garbling program ended {other:?}"),
            })
        }
    }
    let (candidate, t) =
        extract_garbling_candidate(n, &outcome).expect("optimal outcome has a solution");
    if t > tol {
        return Ok(GarblingSearch::NotFound {
            residual: t,
            method: Method::Lp,
        });
    }
    let witness = clamp_and_normalize(&candidate, tol)?;
    let residual = replay_residual(&witness, a, b)?;
    if residual <= tol {
        Ok(GarblingSearch::Found {
            witness,
            residual,
            method: Method::Lp,
        })
    } else {
        Ok(GarblingSearch::NotFound {
            residual,
            method: Method::Lp,
        })
    }
}

/// Searches for a garbling `G` with `G a = b` within `tol`, preferring the
/// exact inverse oracle and falling back to the feasibility program.
pub fn find_garbling(a: &Experiment, b: &Experiment, tol: f64) -> Result<GarblingSearch> {
    match decide_by_inverse(a, b, tol)? {
        Some(decision) => Ok(decision),
        None => decide_by_lp(a, b, tol),
    }
}

/// Full Blackwell comparison of `a` against `b`; equivalence means both
/// directions admit witnesses.
pub fn dominates(a: &Experiment, b: &Experiment) -> Result<DominanceVerdict> {
    let forward = find_garbling(a, b, DOMINANCE_TOL)?;
    match forward {
        GarblingSearch::Found {
            witness,
            residual,
            method,
        } => {
            let reverse = find_garbling(b, a, DOMINANCE_TOL)?;
            let relation = if reverse.found() {
                Relation::Equivalent
            } else {
                Relation::Dominates
            };
            Ok(DominanceVerdict {
                relation,
                witness: Some(witness),
                residual,
                method,
            })
        }
        GarblingSearch::NotFound { residual, method } => Ok(DominanceVerdict {
            relation: Relation::NotDominated,
            witness: None,
            residual,
            method,
        }),
    }
}

/// Similarity transform of a garbling and its conformance checks.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationResult {
    /// `M G M^-1`; similar to the input but not necessarily entrywise
    /// nonnegative.
    pub gamma2: Matrix,
    /// Whether `gamma2` is itself column-stochastic (entries above -1e-10,
    /// column sums within 1e-9 of one).
    pub is_stochastic: bool,
    /// `||gamma2 M A - M B||_inf`; only available when an experiment was in
    /// scope (see [`check_diagram`]).
    pub diagram_residual: Option<f64>,
    /// Max absolute difference of the characteristic-polynomial
    /// coefficients of the input and `gamma2`.
    pub similarity_gap: f64,
}

/// Conjugates `gamma1` by a nonsingular garbling: `gamma2 = M gamma1 M^-1`.
pub fn translate_garbling(gamma1: &Garbling, m: &Garbling) -> Result<TranslationResult> {
    if gamma1.size() != m.size() {
        return Err(Error::DimensionMismatch {
            left_rows: gamma1.size(),
            left_cols: gamma1.size(),
            right_rows: m.size(),
            right_cols: m.size(),
        });
    }
    let m_inv = m.matrix().inverse(DEFAULT_PIVOT_TOL)?;
    let gamma2 = m.matrix().matmul(gamma1.matrix())?.matmul(&m_inv)?;
    let is_stochastic = gamma2.min_entry() >= -1e-10
        && gamma2
            .col_sums()
            .into_iter()
            .all(|s| (s - 1.0).abs() <= COLUMN_SUM_TOL);
    let c1 = gamma1.matrix().charpoly_coeffs()?;
    let c2 = gamma2.charpoly_coeffs()?;
    let similarity_gap = c1
        .iter()
        .zip(&c2)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(TranslationResult {
        gamma2,
        is_stochastic,
        diagram_residual: None,
        similarity_gap,
    })
}

/// Builds `B = gamma1 A`, translates `gamma1` by `m`, and fills in the
/// commuting-square residual `||gamma2 M A - M B||_inf`.
pub fn check_diagram(
    a: &Experiment,
    gamma1: &Garbling,
    m: &Garbling,
) -> Result<TranslationResult> {
    let b = gamma1.apply(a)?;
    let mut result = translate_garbling(gamma1, m)?;
    let ma = m.matrix().matmul(a.matrix())?;
    let mb = m.matrix().matmul(b.matrix())?;
    let residual = result.gamma2.matmul(&ma)?.sub(&mb)?.inf_norm();
    result.diagram_residual = Some(residual);
    Ok(result)
}

/// One experiment along a garbling chain, with the spread metric that is
/// zero exactly when all columns coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationStep {
    pub experiment: Experiment,
    pub column_spread: f64,
}

/// Applies a chain of garblings to `start`, keeping at most `k` steps, and
/// reports the column-spread convergence metric at every step (the chain
/// limit for strictly positive garblings is the uninformative experiment,
/// whose spread is zero).
pub fn iterate_garblings(
    start: &Experiment,
    garblings: &[Garbling],
    k: usize,
) -> Result<Vec<IterationStep>> {
    let steps = k.min(garblings.len());
    let mut out = Vec::with_capacity(steps + 1);
    let mut current = start.clone();
    out.push(IterationStep {
        column_spread: current.matrix().column_spread(),
        experiment: current.clone(),
    });
    for garbling in &garblings[..steps] {
        current = garbling.apply(&current)?;
        out.push(IterationStep {
            column_spread: current.matrix().column_spread(),
            experiment: current.clone(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Dichotomy;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dichotomy(a1: f64, a2: f64) -> Experiment {
        Dichotomy::new(a1, a2).unwrap().to_experiment()
    }

    #[test]
    fn identity_base_returns_target_as_witness() {
        let a = Experiment::identity(2);
        let b = dichotomy(0.8, 0.7);
        match find_garbling(&a, &b, DOMINANCE_TOL).unwrap() {
            GarblingSearch::Found {
                witness, residual, ..
            } => {
                assert!(residual <= 1e-12);
                for (x, y) in witness.matrix().entries().iter().zip(b.matrix().entries()) {
                    assert_abs_diff_eq!(x, y, epsilon = 1e-12);
                }
            }
            other => panic!("expected witness, got {other:?}"),
        }
    }

    #[test]
    fn adjugate_pair_matches_hand_computation() {
        // det A = 0.7; B A^-1 = [[26/35, 11/35], [9/35, 24/35]].
        let a = dichotomy(0.9, 0.8);
        let b = dichotomy(0.7, 0.6);
        match find_garbling(&a, &b, DOMINANCE_TOL).unwrap() {
            GarblingSearch::Found {
                witness,
                residual,
                method,
            } => {
                assert_eq!(method, Method::InverseOracle);
                assert!(residual <= 1e-9);
                let expected = [26.0 / 35.0, 11.0 / 35.0, 9.0 / 35.0, 24.0 / 35.0];
                for (x, y) in witness.matrix().entries().iter().zip(&expected) {
                    assert_abs_diff_eq!(x, y, epsilon = 1e-9);
                }
            }
            other => panic!("expected witness, got {other:?}"),
        }
    }

    #[test]
    fn blocked_pair_reports_negativity_certificate() {
        // Candidate B A^-1 = [[0.7, -0.3], [0.3, 1.3]].
        let a = dichotomy(0.9, 0.6);
        let b = dichotomy(0.6, 0.9);
        match find_garbling(&a, &b, DOMINANCE_TOL).unwrap() {
            GarblingSearch::NotFound { residual, method } => {
                assert_eq!(method, Method::InverseOracle);
                assert_abs_diff_eq!(residual, 0.3, epsilon = 1e-9);
            }
            other => panic!("expected residual report, got {other:?}"),
        }
    }

    #[test]
    fn self_comparison_is_equivalent_with_identity_witness() {
        let a = dichotomy(0.85, 0.65);
        let verdict = dominates(&a, &a).unwrap();
        assert_eq!(verdict.relation, Relation::Equivalent);
        let witness = verdict.witness.unwrap();
        for (x, y) in witness
            .matrix()
            .entries()
            .iter()
            .zip(Matrix::identity(2).entries())
        {
            assert_abs_diff_eq!(x, y, epsilon = 1e-9);
        }
    }

    #[test]
    fn identity_dominates_uninformative() {
        let verdict = dominates(&Experiment::identity(2), &Experiment::uninformative(2)).unwrap();
        assert_eq!(verdict.relation, Relation::Dominates);
        let witness = verdict.witness.unwrap();
        for &v in witness.matrix().entries() {
            assert_abs_diff_eq!(v, 0.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn swapped_dichotomies_are_unranked() {
        let a = dichotomy(0.9, 0.6);
        let b = dichotomy(0.6, 0.9);
        assert_eq!(dominates(&a, &b).unwrap().relation, Relation::NotDominated);
        assert_eq!(dominates(&b, &a).unwrap().relation, Relation::NotDominated);
    }

    #[test]
    fn singular_base_falls_back_to_lp() {
        let a = Experiment::uninformative(2);
        let b = Experiment::uninformative(2);
        match find_garbling(&a, &b, DOMINANCE_TOL).unwrap() {
            GarblingSearch::Found { method, residual, .. } => {
                assert_eq!(method, Method::Lp);
                assert!(residual <= 1e-9);
            }
            other => panic!("expected LP witness, got {other:?}"),
        }
    }

    #[test]
    fn uninformative_does_not_dominate_identity() {
        let search = find_garbling(
            &Experiment::uninformative(2),
            &Experiment::identity(2),
            DOMINANCE_TOL,
        )
        .unwrap();
        match search {
            GarblingSearch::NotFound { residual, method } => {
                assert_eq!(method, Method::Lp);
                // Any garbling of U has equal columns; best residual is 1/2
                // per entry, 1 per row.
                assert_abs_diff_eq!(residual, 1.0, epsilon = 1e-6);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn transitivity_composes_witnesses() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let a = Experiment::random_from_rng(&mut rng, 3, 3).unwrap();
            let g1 = Garbling::random_from_rng(&mut rng, 3).unwrap();
            let g2 = Garbling::random_from_rng(&mut rng, 3).unwrap();
            let b = g1.apply(&a).unwrap();
            let c = g2.apply(&b).unwrap();
            let search = find_garbling(&a, &c, DOMINANCE_TOL).unwrap();
            assert!(search.found(), "composed garbling must exist");
            assert!(search.residual() <= 1e-7);
        }
    }

    #[test]
    fn translate_by_identity_is_neutral() {
        let gamma1 = Garbling::random(3, 5).unwrap();
        let result = translate_garbling(&gamma1, &Garbling::identity(3)).unwrap();
        assert_eq!(&result.gamma2, gamma1.matrix());
        assert_eq!(result.similarity_gap, 0.0);
        assert!(result.is_stochastic);
        assert_eq!(result.diagram_residual, None);
    }

    #[test]
    fn translate_rejects_singular_m() {
        let gamma1 = Garbling::random(2, 5).unwrap();
        let singular = Garbling::uniform(2);
        assert!(matches!(
            translate_garbling(&gamma1, &singular),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn translation_preserves_charpoly_and_column_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut seen_nonstochastic = false;
        for _ in 0..200 {
            let n = 2 + (rng.gen::<u64>() % 3) as usize;
            let gamma1 = Garbling::random_from_rng(&mut rng, n).unwrap();
            let m = loop {
                let m = Garbling::random_from_rng(&mut rng, n).unwrap();
                if let Ok(inv) = m.matrix().inverse(DEFAULT_PIVOT_TOL) {
                    if m.matrix().inf_norm() * inv.inf_norm() <= 1e3 {
                        break m;
                    }
                }
            };
            let result = translate_garbling(&gamma1, &m).unwrap();
            assert!(result.similarity_gap <= 1e-8);
            for s in result.gamma2.col_sums() {
                assert_abs_diff_eq!(s, 1.0, epsilon = 1e-10);
            }
            seen_nonstochastic |= !result.is_stochastic;
        }
        // Negative entries in the conjugated garbling are a real phenomenon.
        assert!(seen_nonstochastic);
    }

    #[test]
    fn diagram_commutes_for_identity_m() {
        let a = Experiment::random(3, 3, 8).unwrap();
        let gamma1 = Garbling::random(3, 9).unwrap();
        let result = check_diagram(&a, &gamma1, &Garbling::identity(3)).unwrap();
        assert_eq!(result.diagram_residual, Some(0.0));
    }

    #[test]
    fn diagram_commutes_for_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..100 {
            let a = Experiment::random_straightforward_from_rng(&mut rng, 3).unwrap();
            let gamma1 = Garbling::random_from_rng(&mut rng, 3).unwrap();
            let m = loop {
                let m = Garbling::random_from_rng(&mut rng, 3).unwrap();
                if let Ok(inv) = m.matrix().inverse(DEFAULT_PIVOT_TOL) {
                    if m.matrix().inf_norm() * inv.inf_norm() <= 1e3 {
                        break m;
                    }
                }
            };
            let result = check_diagram(&a, &gamma1, &m).unwrap();
            assert!(result.diagram_residual.unwrap() <= 1e-9);
            let trace_gap =
                (result.gamma2.trace() - gamma1.matrix().trace()).abs();
            assert!(trace_gap <= 1e-10);
        }
    }

    #[test]
    fn identity_chain_is_constant() {
        let start = Experiment::random(2, 2, 3).unwrap();
        let chain = vec![Garbling::identity(2); 5];
        let steps = iterate_garblings(&start, &chain, 5).unwrap();
        assert_eq!(steps.len(), 6);
        for step in &steps {
            assert_eq!(step.experiment, start);
        }
    }

    #[test]
    fn uniform_chain_hits_fixed_point_immediately() {
        let start = Experiment::random(2, 2, 4).unwrap();
        let chain = vec![Garbling::uniform(2); 3];
        let steps = iterate_garblings(&start, &chain, 3).unwrap();
        assert_eq!(steps[1].experiment, Experiment::uninformative(2));
        assert_eq!(steps[1].column_spread, 0.0);
        assert_eq!(steps[3].experiment, Experiment::uninformative(2));
    }

    #[test]
    fn positive_chain_contracts_column_spread() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let start = Experiment::random_from_rng(&mut rng, 3, 3).unwrap();
        let chain: Vec<Garbling> = (0..200)
            .map(|_| Garbling::random_positive_from_rng(&mut rng, 3, 0.05).unwrap())
            .collect();
        let steps = iterate_garblings(&start, &chain, 200).unwrap();
        assert!(steps.last().unwrap().column_spread <= 1e-6);
    }
}
