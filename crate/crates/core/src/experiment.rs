//! Experiments, garblings, dichotomies, and beliefs.
//!
//! An experiment is a column-stochastic matrix whose entry (i, j) is the
//! probability of observing signal i when the state is j. A garbling is a
//! square column-stochastic matrix acting on signals by left multiplication:
//! `B = G * A` is a noisier version of `A`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, MAX_DIM};

/// Tolerance on individual entries at validation time.
pub const ENTRY_TOL: f64 = 1e-12;

/// Tolerance on column sums at validation time; loose enough for
/// round-tripped file I/O, tight enough to catch real errors.
pub const COLUMN_SUM_TOL: f64 = 1e-9;

const BELIEF_SUM_TOL: f64 = 1e-12;

fn validate_column_stochastic(mat: &Matrix) -> Result<()> {
    for (i, row) in mat.rows().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !(-ENTRY_TOL..=1.0 + ENTRY_TOL).contains(&v) {
                return Err(Error::EntryOutOfRange {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    for (j, sum) in mat.col_sums().into_iter().enumerate() {
        if (sum - 1.0).abs() > COLUMN_SUM_TOL {
            return Err(Error::ColumnSum { col: j, sum });
        }
    }
    Ok(())
}

/// Draws a point uniformly from the probability simplex via normalized
/// exponential spacings.
pub(crate) fn sample_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let total: f64 = v.iter().sum();
    if total == 0.0 {
        v[0] = 1.0;
        return v;
    }
    for x in v.iter_mut() {
        *x /= total;
    }
    v
}

/// Column-stochastic matrix with a column for which the diagonal entry is
/// forced into [1/2, 1]; used for straightforward sampling.
fn straightforward_column<R: Rng + ?Sized>(rng: &mut R, n: usize, diag_index: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let diag = 0.5 + 0.5 * rng.gen::<f64>();
    let off = sample_simplex(rng, n - 1);
    let mut col = Vec::with_capacity(n);
    let mut off_iter = off.into_iter();
    for i in 0..n {
        if i == diag_index {
            col.push(diag);
        } else {
            col.push((1.0 - diag) * off_iter.next().unwrap());
        }
    }
    col
}

fn matrix_from_columns(cols: Vec<Vec<f64>>) -> Matrix {
    let n_cols = cols.len();
    let n_rows = cols[0].len();
    let mut entries = vec![0.0; n_rows * n_cols];
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            entries[i * n_cols + j] = v;
        }
    }
    Matrix::new(n_rows, n_cols, entries).expect("columns form a valid matrix")
}

/// A statistical experiment: column-stochastic, signals in rows, states in
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    mat: Matrix,
}

impl Experiment {
    /// Validates and wraps a matrix; the error names the offending entry or
    /// column.
    pub fn new(mat: Matrix) -> Result<Self> {
        validate_column_stochastic(&mat)?;
        Ok(Self { mat })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn n_signals(&self) -> usize {
        self.mat.n_rows()
    }

    pub fn n_states(&self) -> usize {
        self.mat.n_cols()
    }

    pub fn is_square(&self) -> bool {
        self.mat.is_square()
    }

    /// The fully informative experiment: signal i occurs exactly in state i.
    pub fn identity(n: usize) -> Self {
        Self {
            mat: Matrix::identity(n),
        }
    }

    /// The fully uninformative experiment: every entry 1/n.
    pub fn uninformative(n: usize) -> Self {
        let mat = Matrix::constant(n, n, 1.0 / n as f64).expect("n within range");
        Self { mat }
    }

    /// True when every diagonal entry is at least 1/2, i.e. each signal is
    /// modal in its own state. For 2x2 this is the dichotomy condition
    /// a1 >= 1/2 and a2 >= 1/2.
    pub fn is_straightforward(&self) -> Result<bool> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.mat.n_rows(),
                cols: self.mat.n_cols(),
            });
        }
        Ok((0..self.n_states()).all(|i| self.mat.get(i, i) >= 0.5))
    }

    /// Uniform-simplex columns; deterministic for a given seed.
    pub fn random(n_signals: usize, n_states: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_from_rng(&mut rng, n_signals, n_states)
    }

    /// As [`Experiment::random`], drawing from a caller-managed generator.
    pub fn random_from_rng<R: Rng + ?Sized>(
        rng: &mut R,
        n_signals: usize,
        n_states: usize,
    ) -> Result<Self> {
        if n_signals == 0 || n_states == 0 || n_signals > MAX_DIM || n_states > MAX_DIM {
            return Err(Error::DimensionsOutOfRange {
                rows: n_signals,
                cols: n_states,
            });
        }
        let cols = (0..n_states)
            .map(|_| sample_simplex(rng, n_signals))
            .collect();
        Self::new(matrix_from_columns(cols))
    }

    /// Random square experiment with every diagonal entry drawn uniformly
    /// from [1/2, 1] and the remaining column mass spread over a simplex
    /// draw.
    pub fn random_straightforward(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_straightforward_from_rng(&mut rng, n)
    }

    pub fn random_straightforward_from_rng<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::DimensionsOutOfRange { rows: n, cols: n });
        }
        let cols = (0..n).map(|j| straightforward_column(rng, n, j)).collect();
        Self::new(matrix_from_columns(cols))
    }

    /// Bayes update of `prior` after observing `signal`.
    pub fn posterior(&self, prior: &Belief, signal: usize) -> Result<Belief> {
        if signal >= self.n_signals() {
            return Err(Error::SignalOutOfRange {
                signal,
                n_signals: self.n_signals(),
            });
        }
        if prior.len() != self.n_states() {
            return Err(Error::BeliefLength {
                expected: self.n_states(),
                got: prior.len(),
            });
        }
        let likelihood = self.mat.row(signal);
        let weighted: Vec<f64> = likelihood
            .iter()
            .zip(prior.probabilities())
            .map(|(l, p)| l * p)
            .collect();
        let marginal: f64 = weighted.iter().sum();
        if marginal == 0.0 {
            return Err(Error::ZeroMarginalSignal { signal });
        }
        Belief::new(weighted.into_iter().map(|w| w / marginal).collect())
    }

    /// Marginal probability of `signal` under `prior`.
    pub fn signal_marginal(&self, prior: &Belief, signal: usize) -> Result<f64> {
        if signal >= self.n_signals() {
            return Err(Error::SignalOutOfRange {
                signal,
                n_signals: self.n_signals(),
            });
        }
        if prior.len() != self.n_states() {
            return Err(Error::BeliefLength {
                expected: self.n_states(),
                got: prior.len(),
            });
        }
        Ok(self
            .mat
            .row(signal)
            .iter()
            .zip(prior.probabilities())
            .map(|(l, p)| l * p)
            .sum())
    }

    /// Kronecker compound of two square experiments: observe a signal from
    /// each. The product keeps the full square of columns so norms remain
    /// comparable.
    pub fn compound(&self, other: &Experiment) -> Result<Experiment> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.mat.n_rows(),
                cols: self.mat.n_cols(),
            });
        }
        if !other.is_square() {
            return Err(Error::NotSquare {
                rows: other.mat.n_rows(),
                cols: other.mat.n_cols(),
            });
        }
        Experiment::new(self.mat.kron(&other.mat)?)
    }
}

/// A square column-stochastic matrix acting on signals by left
/// multiplication.
#[derive(Debug, Clone, PartialEq)]
pub struct Garbling {
    mat: Matrix,
}

impl Garbling {
    pub fn new(mat: Matrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare {
                rows: mat.n_rows(),
                cols: mat.n_cols(),
            });
        }
        validate_column_stochastic(&mat)?;
        Ok(Self { mat })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn size(&self) -> usize {
        self.mat.n_rows()
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: Matrix::identity(n),
        }
    }

    /// Collapses everything onto the uniform signal distribution.
    pub fn uniform(n: usize) -> Self {
        Self {
            mat: Matrix::constant(n, n, 1.0 / n as f64).expect("n within range"),
        }
    }

    pub fn random(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_from_rng(&mut rng, n)
    }

    pub fn random_from_rng<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::DimensionsOutOfRange { rows: n, cols: n });
        }
        let cols = (0..n).map(|_| sample_simplex(rng, n)).collect();
        Self::new(matrix_from_columns(cols))
    }

    /// Random garbling with every entry at least `floor`; requires
    /// `floor * n <= 1`.
    pub fn random_positive_from_rng<R: Rng + ?Sized>(
        rng: &mut R,
        n: usize,
        floor: f64,
    ) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::DimensionsOutOfRange { rows: n, cols: n });
        }
        if floor < 0.0 || floor * n as f64 > 1.0 {
            return Err(Error::InvalidConfig {
                reason: format!("entry floor {floor} infeasible for size {n}"),
            });
        }
        let free = 1.0 - floor * n as f64;
        let cols = (0..n)
            .map(|_| {
                sample_simplex(rng, n)
                    .into_iter()
                    .map(|v| floor + free * v)
                    .collect()
            })
            .collect();
        Self::new(matrix_from_columns(cols))
    }

    /// Applies the garbling: returns the experiment with matrix `G * e`.
    pub fn apply(&self, e: &Experiment) -> Result<Experiment> {
        Experiment::new(self.mat.matmul(e.matrix())?)
    }

    /// Composition `self . inner` (apply `inner` first).
    pub fn compose(&self, inner: &Garbling) -> Result<Garbling> {
        Garbling::new(self.mat.matmul(inner.matrix())?)
    }
}

/// Two-state two-signal experiment parameters: the probability of signal 0
/// in state 0 and of signal 1 in state 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dichotomy {
    a1: f64,
    a2: f64,
}

impl Dichotomy {
    pub fn new(a1: f64, a2: f64) -> Result<Self> {
        for (index, value) in [(0usize, a1), (1usize, a2)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ProbabilityOutOfRange { index, value });
            }
        }
        Ok(Self { a1, a2 })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    /// The 2x2 matrix [[a1, 1-a2], [1-a1, a2]].
    pub fn to_experiment(&self) -> Experiment {
        let mat = Matrix::new(
            2,
            2,
            vec![self.a1, 1.0 - self.a2, 1.0 - self.a1, self.a2],
        )
        .expect("entries are finite");
        Experiment::new(mat).expect("dichotomy columns sum to one")
    }

    pub fn is_straightforward(&self) -> bool {
        self.a1 >= 0.5 && self.a2 >= 0.5
    }

    /// Both parameters drawn independently and uniformly from [1/2, 1].
    pub fn random_straightforward(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_straightforward_from_rng(&mut rng)
    }

    pub fn random_straightforward_from_rng<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            a1: 0.5 + 0.5 * rng.gen::<f64>(),
            a2: 0.5 + 0.5 * rng.gen::<f64>(),
        }
    }
}

/// Probability distribution over states.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief {
    probs: Vec<f64>,
}

impl Belief {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        for (index, &value) in probs.iter().enumerate() {
            if !(0.0..=1.0 + BELIEF_SUM_TOL).contains(&value) {
                return Err(Error::ProbabilityOutOfRange { index, value });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > BELIEF_SUM_TOL {
            return Err(Error::BeliefSum { sum });
        }
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn valid_experiment_passes() {
        let mat = Matrix::from_rows(&[vec![0.9, 0.2], vec![0.1, 0.8]]).unwrap();
        assert!(Experiment::new(mat).is_ok());
        assert!(Experiment::new(Matrix::identity(4)).is_ok());
    }

    #[test]
    fn bad_column_sum_names_the_column() {
        let mat = Matrix::from_rows(&[vec![0.9, 0.2], vec![0.2, 0.8]]).unwrap();
        match Experiment::new(mat) {
            Err(Error::ColumnSum { col: 0, sum }) => assert_abs_diff_eq!(sum, 1.1, epsilon = 1e-12),
            other => panic!("expected column-sum error, got {other:?}"),
        }
    }

    #[test]
    fn negative_entry_rejected() {
        let mat = Matrix::from_rows(&[vec![1.1, 0.2], vec![-0.1, 0.8]]).unwrap();
        assert!(matches!(
            Experiment::new(mat),
            Err(Error::EntryOutOfRange { row: 0, col: 0, .. })
        ));
    }

    #[test]
    fn dichotomy_corners() {
        let full = Dichotomy::new(1.0, 1.0).unwrap().to_experiment();
        assert_eq!(full.matrix(), &Matrix::identity(2));
        let none = Dichotomy::new(0.5, 0.5).unwrap().to_experiment();
        assert_eq!(none, Experiment::uninformative(2));
        let mid = Dichotomy::new(0.75, 0.75).unwrap().to_experiment();
        assert_eq!(
            mid.matrix().entries(),
            &[0.75, 0.25, 0.25, 0.75]
        );
    }

    #[test]
    fn straightforwardness_matches_parameter_box() {
        assert!(Dichotomy::new(0.75, 0.9)
            .unwrap()
            .to_experiment()
            .is_straightforward()
            .unwrap());
        assert!(!Dichotomy::new(0.4, 0.9)
            .unwrap()
            .to_experiment()
            .is_straightforward()
            .unwrap());
        assert!(Experiment::identity(5).is_straightforward().unwrap());
    }

    #[test]
    fn straightforwardness_requires_square() {
        let mat = Matrix::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        let e = Experiment::new(mat).unwrap();
        assert!(matches!(
            e.is_straightforward(),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn garble_identity_is_neutral() {
        let a = Experiment::random(3, 3, 11).unwrap();
        let got = Garbling::identity(3).apply(&a).unwrap();
        assert_eq!(got, a);
    }

    #[test]
    fn garble_uniform_absorbs() {
        let a = Experiment::random(2, 2, 5).unwrap();
        let got = Garbling::uniform(2).apply(&a).unwrap();
        for row in got.matrix().rows() {
            for &v in row {
                assert_abs_diff_eq!(v, 0.5, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn garbling_identity_experiment_returns_garbling() {
        let gamma = Garbling::new(
            Matrix::from_rows(&[vec![0.8, 0.3], vec![0.2, 0.7]]).unwrap(),
        )
        .unwrap();
        let got = gamma.apply(&Experiment::identity(2)).unwrap();
        assert_eq!(got.matrix(), gamma.matrix());
    }

    #[test]
    fn compound_identities() {
        let i2 = Experiment::identity(2);
        let c = i2.compound(&i2).unwrap();
        assert_eq!(c.matrix(), &Matrix::identity(4));
    }

    #[test]
    fn compound_is_column_stochastic() {
        let a = Experiment::random(3, 3, 1).unwrap();
        let u = Experiment::uninformative(2);
        let c = a.compound(&u).unwrap();
        for s in c.matrix().col_sums() {
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn compound_generally_not_commutative() {
        let a = Experiment::random(2, 2, 3).unwrap();
        let b = Experiment::random(2, 2, 4).unwrap();
        assert_ne!(a.compound(&b).unwrap(), b.compound(&a).unwrap());
    }

    #[test]
    fn posterior_full_revelation() {
        let prior = Belief::uniform(2);
        let post = Experiment::identity(2).posterior(&prior, 0).unwrap();
        assert_eq!(post.probabilities(), &[1.0, 0.0]);
    }

    #[test]
    fn posterior_uninformative_returns_prior() {
        let prior = Belief::new(vec![0.3, 0.7]).unwrap();
        let post = Experiment::uninformative(2).posterior(&prior, 0).unwrap();
        for (p, q) in post.probabilities().iter().zip(prior.probabilities()) {
            assert_abs_diff_eq!(p, q, epsilon = 1e-12);
        }
    }

    #[test]
    fn posterior_symmetric_dichotomy() {
        let prior = Belief::uniform(2);
        let e = Dichotomy::new(0.75, 0.75).unwrap().to_experiment();
        let post = e.posterior(&prior, 0).unwrap();
        assert_abs_diff_eq!(post.get(0), 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(post.get(1), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn posterior_zero_marginal_errors() {
        let mat = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let e = Experiment::new(mat).unwrap();
        assert!(matches!(
            e.posterior(&Belief::uniform(2), 0),
            Err(Error::ZeroMarginalSignal { signal: 0 })
        ));
    }

    #[test]
    fn random_is_deterministic_per_seed() {
        let a = Experiment::random(4, 3, 99).unwrap();
        let b = Experiment::random(4, 3, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, Experiment::random(4, 3, 100).unwrap());
    }

    #[test]
    fn random_columns_sum_to_one() {
        let e = Experiment::random(5, 4, 2).unwrap();
        for s in e.matrix().col_sums() {
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn random_entry_mean_matches_uniform_simplex() {
        // On the 2-simplex each coordinate is uniform on [0, 1], mean 1/2.
        let mut total = 0.0;
        for seed in 0..10_000u64 {
            total += Experiment::random(2, 2, seed).unwrap().matrix().get(0, 0);
        }
        let mean = total / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn random_straightforward_dichotomy_properties() {
        let d = Dichotomy::random_straightforward(42);
        assert_eq!(d, Dichotomy::random_straightforward(42));
        assert!(d.is_straightforward());
        let mut total = 0.0;
        for seed in 0..10_000u64 {
            total += Dichotomy::random_straightforward(seed).a1();
        }
        let mean = total / 10_000.0;
        assert!((mean - 0.75).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn random_straightforward_square_has_modal_diagonal() {
        for seed in 0..50 {
            for n in 2..=5 {
                let e = Experiment::random_straightforward(n, seed).unwrap();
                assert!(e.is_straightforward().unwrap());
            }
        }
    }

    #[test]
    fn uninformative_fixed_points() {
        let u = Experiment::uninformative(2);
        assert_eq!(u.matrix().entries(), &[0.5, 0.5, 0.5, 0.5]);
        let gamma = Garbling::random(2, 8).unwrap();
        let garbled = gamma.apply(&u).unwrap();
        for (x, y) in garbled.matrix().entries().iter().zip(u.matrix().entries()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
        let prior = Belief::new(vec![0.25, 0.75]).unwrap();
        let post = u.posterior(&prior, 1).unwrap();
        for (p, q) in post.probabilities().iter().zip(prior.probabilities()) {
            assert_abs_diff_eq!(p, q, epsilon = 1e-12);
        }
    }

    #[test]
    fn positive_garbling_respects_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = Garbling::random_positive_from_rng(&mut rng, 4, 0.05).unwrap();
        assert!(g.matrix().min_entry() >= 0.05);
    }
}
