//! The sup-norm informativeness measure and its structural checks.
//!
//! `d(E) = ||I - E||_inf` is zero exactly for the fully informative
//! experiment and grows as an experiment gets noisier; comparing scores
//! yields a complete order on square experiments that agrees with Blackwell
//! dominance wherever the latter ranks a straightforward experiment above a
//! garbled version of itself.

use crate::error::{Error, Result};
use crate::experiment::{Dichotomy, Experiment, Garbling};
use crate::matrix::{Matrix, NormKind, DEFAULT_RANK_TOL};

/// Two scores within this window count as a tie; the measure is exact
/// arithmetic on row sums, so genuine ties exist.
pub const INMI_TIE_TOL: f64 = 1e-12;

/// Informativeness score: nonnegative, zero only for the identity
/// experiment, at most 2 for any square experiment.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct InmiScore {
    value: f64,
}

impl InmiScore {
    pub fn value(&self) -> f64 {
        self.value
    }
}

impl std::fmt::Display for InmiScore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Sup-norm distance from the fully informative experiment of the same
/// size. Only square experiments are ranked.
pub fn d_inmi(e: &Experiment) -> Result<InmiScore> {
    if !e.is_square() {
        return Err(Error::NotSquare {
            rows: e.n_signals(),
            cols: e.n_states(),
        });
    }
    let n = e.n_signals();
    let diff = Matrix::identity(n).sub(e.matrix())?;
    Ok(InmiScore {
        value: diff.inf_norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InmiRelation {
    MoreInformative,
    LessInformative,
    Tie,
}

/// Score comparison of two square experiments; sizes may differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InmiComparison {
    pub relation: InmiRelation,
    pub score_a: InmiScore,
    pub score_b: InmiScore,
}

/// Compares `a` against `b` by score; lower scores are more informative.
pub fn inmi_compare(a: &Experiment, b: &Experiment) -> Result<InmiComparison> {
    let score_a = d_inmi(a)?;
    let score_b = d_inmi(b)?;
    let relation = if (score_a.value - score_b.value).abs() <= INMI_TIE_TOL {
        InmiRelation::Tie
    } else if score_a.value < score_b.value {
        InmiRelation::MoreInformative
    } else {
        InmiRelation::LessInformative
    };
    Ok(InmiComparison {
        relation,
        score_a,
        score_b,
    })
}

/// `||A - B|| - ||M A - M B||` under the chosen norm. Garbling both sides
/// of a comparison contracts their distance (exact for 2x2, where
/// `M A - M B = (m11 - m12)(A - B)`).
pub fn contraction_gap(
    m: &Garbling,
    a: &Experiment,
    b: &Experiment,
    kind: NormKind,
) -> Result<f64> {
    if a.n_signals() != b.n_signals() || a.n_states() != b.n_states() {
        return Err(Error::DimensionMismatch {
            left_rows: a.n_signals(),
            left_cols: a.n_states(),
            right_rows: b.n_signals(),
            right_cols: b.n_states(),
        });
    }
    let plain = a.matrix().sub(b.matrix())?.norm(kind)?;
    let ma = m.matrix().matmul(a.matrix())?;
    let mb = m.matrix().matmul(b.matrix())?;
    let garbled = ma.sub(&mb)?.norm(kind)?;
    Ok(plain - garbled)
}

/// The Frobenius contraction gap for the dichotomy family, evaluated three
/// ways: from the printed closed form (whose second bracket collapses to
/// `a2 + g1 - 1`), from the algebra-derived correction of that bracket, and
/// directly from the matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrobeniusGapReport {
    pub literal: f64,
    pub corrected: f64,
    pub direct: f64,
}

/// Evaluates the closed-form Frobenius gap for `A` a dichotomy, `B = G A`,
/// and a 2x2 garbling `M`, next to the direct matrix computation.
///
/// The rank-1 factorization `A - B = (1, -1)^T (x, y)` gives
/// `x = a1 (1 - g1 + g2) - g2` and `y = -(a2 (1 - g1 + g2) + g1 - 1)`, and
/// `M A - M B = (m1 - m2) (A - B)`, so the direct gap is
/// `sqrt(2 (x^2 + y^2)) * (1 - |m1 - m2|) >= 0`.
pub fn appendix_frobenius_gap(
    d: &Dichotomy,
    gamma: (f64, f64),
    m: (f64, f64),
) -> Result<FrobeniusGapReport> {
    for (index, value) in [(0usize, gamma.0), (1, gamma.1), (2, m.0), (3, m.1)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::ProbabilityOutOfRange { index, value });
        }
    }
    let (g1, g2) = gamma;
    let (m1, m2) = m;
    let a1 = d.a1();
    let a2 = d.a2();

    let a = d.to_experiment();
    let gamma_mat = Matrix::new(2, 2, vec![g1, g2, 1.0 - g1, 1.0 - g2])?;
    let m_mat = Matrix::new(2, 2, vec![m1, m2, 1.0 - m1, 1.0 - m2])?;
    let b = gamma_mat.matmul(a.matrix())?;
    let diff = a.matrix().sub(&b)?;
    let ma = m_mat.matmul(a.matrix())?;
    let mb = m_mat.matmul(&b)?;
    let garbled_diff = ma.sub(&mb)?;
    let direct = diff.norm(NormKind::Frobenius)? - garbled_diff.norm(NormKind::Frobenius)?;

    let x = a1 * (1.0 - g1 + g2) - g2;
    // As printed, the second bracket's factor (1 - g2 + g2) collapses to 1.
    let y_literal = a2 + g1 - 1.0;
    let y_corrected = a2 * (1.0 - g1 + g2) + g1 - 1.0;
    let closed = |y: f64| {
        let lead = (2.0 * (x * x + y * y)).sqrt();
        let scaled = (2.0 * (((m1 - m2) * x).powi(2) + ((m2 - m1) * y).powi(2))).sqrt();
        lead - scaled
    };

    Ok(FrobeniusGapReport {
        literal: closed(y_literal),
        corrected: closed(y_corrected),
        direct,
    })
}

/// Rank structure of a 2x2 garbling step: `I - G` and `A - G A` both have
/// rank at most one, and the difference factors as `(1, -1)^T u2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneReport {
    pub rank_identity_minus_gamma: usize,
    pub rank_difference: usize,
    /// Present unless `A = G A`; read off the first row of the difference
    /// (the second row is its negation, columns of the difference sum to
    /// zero).
    pub u2: Option<[f64; 2]>,
}

pub fn rank_one_structure(a: &Experiment, gamma: &Garbling) -> Result<RankOneReport> {
    if a.n_signals() != 2 || a.n_states() != 2 {
        return Err(Error::DimensionMismatch {
            left_rows: a.n_signals(),
            left_cols: a.n_states(),
            right_rows: 2,
            right_cols: 2,
        });
    }
    if gamma.size() != 2 {
        return Err(Error::DimensionMismatch {
            left_rows: gamma.size(),
            left_cols: gamma.size(),
            right_rows: 2,
            right_cols: 2,
        });
    }
    let identity = Matrix::identity(2);
    let rank_identity_minus_gamma = identity.sub(gamma.matrix())?.rank(DEFAULT_RANK_TOL);
    let garbled = gamma.apply(a)?;
    let diff = a.matrix().sub(garbled.matrix())?;
    let rank_difference = diff.rank(DEFAULT_RANK_TOL);
    let u2 = if rank_difference == 0 {
        None
    } else {
        Some([diff.get(0, 0), diff.get(0, 1)])
    };
    Ok(RankOneReport {
        rank_identity_minus_gamma,
        rank_difference,
        u2,
    })
}

/// `|d(A kron B) - d(B kron A)|`. The two compounds are permutation-similar
/// with the identity preserved, so the scores agree up to rounding; the
/// harness measures the gap rather than assuming it.
pub fn kron_commutativity_gap(a: &Experiment, b: &Experiment) -> Result<f64> {
    let ab = a.compound(b)?;
    let ba = b.compound(a)?;
    Ok((d_inmi(&ab)?.value() - d_inmi(&ba)?.value()).abs())
}

/// Builds the indicator garbling whose row `r1` (the row attaining
/// `||I - A||_inf`) reproduces itself in `B = G A`, the remaining column
/// mass spread uniformly, and returns `d(A) - d(B)`. The reproduced row
/// sum pins `d(B)` at `d(A)` or above, so the result stays nonpositive.
pub fn delta_garbling_check(a: &Experiment) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.n_signals(),
            cols: a.n_states(),
        });
    }
    let n = a.n_signals();
    let diff = Matrix::identity(n).sub(a.matrix())?;
    let row_sums: Vec<f64> = diff
        .rows()
        .map(|r| r.iter().map(|v| v.abs()).sum())
        .collect();
    let r1 = row_sums
        .iter()
        .enumerate()
        .max_by(|(_, x), (_, y)| x.total_cmp(y))
        .map(|(i, _)| i)
        .unwrap_or(0);

    let mut entries = vec![0.0; n * n];
    for k in 0..n {
        if k == r1 {
            entries[r1 * n + r1] = 1.0;
        } else if n > 1 {
            let share = 1.0 / (n - 1) as f64;
            for i in 0..n {
                if i != r1 {
                    entries[i * n + k] = share;
                }
            }
        }
    }
    let gamma = Garbling::new(Matrix::new(n, n, entries)?)?;
    let b = gamma.apply(a)?;
    Ok(d_inmi(a)?.value() - d_inmi(&b)?.value())
}
