//! Seeded Monte-Carlo campaigns over the crate's structural claims.
//!
//! Every trial derives its own generator as
//! `ChaCha8(splitmix64(seed + (trial + 1) * 0x9E3779B97F4A7C15))`, so a
//! campaign is reproducible trial-by-trial no matter how trials are
//! scheduled, and aggregation uses only counts and maxima with first-index
//! tie-breaks. Identical configs produce byte-identical JSON reports.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::blackwell::{
    check_diagram, decide_by_inverse, decide_by_lp, find_garbling, iterate_garblings,
    DOMINANCE_TOL,
};
use crate::error::{Error, Result};
use crate::experiment::{Experiment, Garbling};
use crate::inmi::{contraction_gap, d_inmi, kron_commutativity_gap};
use crate::io::MatrixJson;
use crate::matrix::{Matrix, NormKind, DEFAULT_PIVOT_TOL};

/// Per-trial resampling budget for hypothesis-conditioned draws.
pub const MAX_RESAMPLE_ATTEMPTS: usize = 100;

/// Pinned threshold on the characteristic-polynomial coefficient gap in the
/// translation campaign.
pub const TRANSLATION_SIMILARITY_TOL: f64 = 1e-8;

/// Conditioning cap (inf-norm condition number) for the translated garbling
/// M; ill-conditioned draws push the similarity gap orders of magnitude
/// past the pinned tolerance, so they are resampled like singular ones.
pub const TRANSLATION_CONDITION_CAP: f64 = 1e3;

/// Chain length for the limit campaign.
pub const LIMITS_CHAIN_LEN: usize = 200;

/// Entry floor for strictly positive garblings in the limit campaign.
pub const LIMITS_ENTRY_FLOOR: f64 = 0.05;

/// The claims the harness can exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theorem {
    /// Commuting square and similarity of the translated garbling.
    #[serde(rename = "translation-3.1")]
    Translation,
    /// Norm contraction under a common garbling.
    #[serde(rename = "contraction-4.1")]
    Contraction,
    /// Garbling a straightforward experiment never lowers the score.
    #[serde(rename = "representation-5.1")]
    Representation,
    /// Score equality of the two Kronecker compound orders (measured, not
    /// asserted).
    #[serde(rename = "conjecture-kron")]
    KronConjecture,
    /// Garbling chains converge to the uninformative experiment.
    #[serde(rename = "limits-fig3")]
    Limits,
    /// The inverse oracle and the feasibility program agree.
    #[serde(rename = "oracle-vs-lp")]
    OracleVsLp,
}

impl Theorem {
    pub const ALL: [Theorem; 6] = [
        Theorem::Translation,
        Theorem::Contraction,
        Theorem::Representation,
        Theorem::KronConjecture,
        Theorem::Limits,
        Theorem::OracleVsLp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Translation => "translation-3.1",
            Theorem::Contraction => "contraction-4.1",
            Theorem::Representation => "representation-5.1",
            Theorem::KronConjecture => "conjecture-kron",
            Theorem::Limits => "limits-fig3",
            Theorem::OracleVsLp => "oracle-vs-lp",
        }
    }
}

impl std::fmt::Display for Theorem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidConfig {
                reason: format!("unknown theorem {s:?}"),
            })
    }
}

/// Campaign parameters. `tolerance` is the violation threshold in the
/// theorem's own metric; size defaults follow each theorem's hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub theorem: Theorem,
    pub trials: u64,
    pub seed: u64,
    pub size_range: (usize, usize),
    pub tolerance: f64,
}

/// Default trial count: the limit campaign iterates long chains, the rest
/// are cheap.
pub fn default_trials(theorem: Theorem) -> u64 {
    match theorem {
        Theorem::Limits => 100,
        _ => 10_000,
    }
}

impl CampaignConfig {
    pub fn new(theorem: Theorem, trials: u64, seed: u64) -> Self {
        let (size_range, tolerance) = match theorem {
            Theorem::Translation => ((2, 4), 1e-9),
            // The contraction statement lives in the dichotomy setting; for
            // n >= 3 with diagonal-dominant experiments it has genuine
            // counterexamples, so the default campaign measures 2x2.
            Theorem::Contraction => ((2, 2), 1e-12),
            Theorem::Representation => ((2, 4), 1e-12),
            Theorem::KronConjecture => ((2, 4), 1e-12),
            Theorem::Limits => ((2, 4), 1e-6),
            Theorem::OracleVsLp => ((2, 4), DOMINANCE_TOL),
        };
        Self {
            theorem,
            trials,
            seed,
            size_range,
            tolerance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig {
                reason: "trials must be at least 1".to_string(),
            });
        }
        let (lo, hi) = self.size_range;
        if lo < 2 || hi < lo || hi > 16 {
            return Err(Error::InvalidConfig {
                reason: format!("size range {lo}..={hi} outside [2, 16]"),
            });
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig {
                reason: format!("tolerance {} must be positive", self.tolerance),
            });
        }
        match self.theorem {
            Theorem::Translation if hi > 8 => Err(Error::InvalidConfig {
                reason: format!(
                    "translation campaign compares characteristic polynomials; size cap is 8, got {hi}"
                ),
            }),
            Theorem::KronConjecture if hi > 8 => Err(Error::InvalidConfig {
                reason: format!("Kronecker products cap at 64x64; size cap is 8, got {hi}"),
            }),
            _ => Ok(()),
        }
    }
}

/// The single worst violating trial, inputs serialized for replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub trial: u64,
    pub violation: f64,
    pub cause: String,
    pub inputs: BTreeMap<String, MatrixJson>,
}

/// Aggregate campaign result. `stats` carries theorem-specific measurements
/// (maxima, fractions) in a stable key order; `elapsed` never enters the
/// serialized form so reports stay byte-reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialReport {
    pub theorem: Theorem,
    pub trials_run: u64,
    pub violations: u64,
    pub max_violation: f64,
    pub worst_case: Option<WorstCase>,
    pub stats: BTreeMap<String, f64>,
    #[serde(skip, default)]
    pub elapsed: Duration,
}

/// Stable JSON rendering of a report.
pub fn report_to_json(report: &TrialReport) -> String {
    serde_json::to_string_pretty(report).expect("report serialization cannot fail")
}

pub fn report_from_json(text: &str) -> serde_json::Result<TrialReport> {
    serde_json::from_str(text)
}

/// Splitmix64 over a golden-ratio stride; the fixed per-trial seed mixer.
pub fn mix_seed(seed: u64, trial: u64) -> u64 {
    const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut z = seed.wrapping_add(GOLDEN.wrapping_mul(trial.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct TrialEval {
    violated: bool,
    metric: f64,
    cause: String,
    inputs: Vec<(&'static str, Matrix)>,
}

fn well_conditioned_garbling<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Garbling> {
    for _ in 0..MAX_RESAMPLE_ATTEMPTS {
        let m = Garbling::random_from_rng(rng, n)?;
        if let Ok(inverse) = m.matrix().inverse(DEFAULT_PIVOT_TOL) {
            if m.matrix().inf_norm() * inverse.inf_norm() <= TRANSLATION_CONDITION_CAP {
                return Ok(m);
            }
        }
    }
    Err(Error::InvalidConfig {
        reason: format!("no well-conditioned {n}x{n} garbling after {MAX_RESAMPLE_ATTEMPTS} draws"),
    })
}

fn nonsingular_experiment<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Experiment> {
    for _ in 0..MAX_RESAMPLE_ATTEMPTS {
        let a = Experiment::random_from_rng(rng, n, n)?;
        if a.matrix().inverse(DEFAULT_PIVOT_TOL).is_ok() {
            return Ok(a);
        }
    }
    Err(Error::InvalidConfig {
        reason: format!("no nonsingular {n}x{n} experiment after {MAX_RESAMPLE_ATTEMPTS} draws"),
    })
}

struct Accumulators {
    nonstochastic: u64,
    part1_dominates: u64,
    dominated: u64,
    max_similarity_gap: f64,
    max_diagram_residual: f64,
    min_contraction_gap: f64,
    max_gap: f64,
    max_final_spread: f64,
}

impl Accumulators {
    fn new() -> Self {
        Self {
            nonstochastic: 0,
            part1_dominates: 0,
            dominated: 0,
            max_similarity_gap: 0.0,
            max_diagram_residual: 0.0,
            min_contraction_gap: f64::INFINITY,
            max_gap: f64::NEG_INFINITY,
            max_final_spread: 0.0,
        }
    }

    fn into_stats(self, theorem: Theorem, trials: u64) -> BTreeMap<String, f64> {
        let mut stats = BTreeMap::new();
        let frac = |count: u64| count as f64 / trials as f64;
        match theorem {
            Theorem::Translation => {
                stats.insert("max_diagram_residual".to_string(), self.max_diagram_residual);
                stats.insert("max_similarity_gap".to_string(), self.max_similarity_gap);
                stats.insert("nonstochastic_fraction".to_string(), frac(self.nonstochastic));
                stats.insert(
                    "part1_dominates_fraction".to_string(),
                    frac(self.part1_dominates),
                );
            }
            Theorem::Contraction => {
                stats.insert("min_gap".to_string(), self.min_contraction_gap);
            }
            Theorem::Representation | Theorem::KronConjecture => {
                stats.insert("max_gap".to_string(), self.max_gap);
            }
            Theorem::Limits => {
                stats.insert("max_final_spread".to_string(), self.max_final_spread);
            }
            Theorem::OracleVsLp => {
                stats.insert("dominated_fraction".to_string(), frac(self.dominated));
            }
        }
        stats
    }
}

fn run_trial(
    cfg: &CampaignConfig,
    trial: u64,
    rng: &mut ChaCha8Rng,
    acc: &mut Accumulators,
) -> TrialEval {
    let (lo, hi) = cfg.size_range;
    let n = rng.gen_range(lo..=hi);
    match evaluate_trial(cfg, trial, n, rng, acc) {
        Ok(eval) => eval,
        Err(e) => TrialEval {
            violated: true,
            metric: f64::MAX,
            cause: format!("trial failed: {e}"),
            inputs: Vec::new(),
        },
    }
}

fn evaluate_trial(
    cfg: &CampaignConfig,
    trial: u64,
    n: usize,
    rng: &mut ChaCha8Rng,
    acc: &mut Accumulators,
) -> Result<TrialEval> {
    match cfg.theorem {
        Theorem::Translation => {
            let a = Experiment::random_from_rng(rng, n, n)?;
            let gamma1 = Garbling::random_from_rng(rng, n)?;
            let m = well_conditioned_garbling(rng, n)?;
            let result = check_diagram(&a, &gamma1, &m)?;
            let residual = result
                .diagram_residual
                .expect("check_diagram fills the residual");
            if !result.is_stochastic {
                acc.nonstochastic += 1;
            }
            acc.max_similarity_gap = acc.max_similarity_gap.max(result.similarity_gap);
            acc.max_diagram_residual = acc.max_diagram_residual.max(residual);
            let ma = m.apply(&a)?;
            let mb = m.apply(&gamma1.apply(&a)?)?;
            if find_garbling(&ma, &mb, DOMINANCE_TOL)?.found() {
                acc.part1_dominates += 1;
            }
            Ok(TrialEval {
                violated: residual > cfg.tolerance
                    || result.similarity_gap > TRANSLATION_SIMILARITY_TOL,
                metric: residual.max(result.similarity_gap),
                cause: "diagram residual or similarity gap over tolerance".to_string(),
                inputs: vec![
                    ("a", a.matrix().clone()),
                    ("gamma1", gamma1.matrix().clone()),
                    ("m", m.matrix().clone()),
                ],
            })
        }
        Theorem::Contraction => {
            let a = Experiment::random_straightforward_from_rng(rng, n)?;
            let b = Experiment::random_from_rng(rng, n, n)?;
            let m = Garbling::random_from_rng(rng, n)?;
            let mut worst_gap = f64::INFINITY;
            for kind in NormKind::ALL {
                worst_gap = worst_gap.min(contraction_gap(&m, &a, &b, kind)?);
            }
            acc.min_contraction_gap = acc.min_contraction_gap.min(worst_gap);
            Ok(TrialEval {
                violated: worst_gap < -cfg.tolerance,
                metric: (-worst_gap).max(0.0),
                cause: "norm expanded under common garbling".to_string(),
                inputs: vec![
                    ("a", a.matrix().clone()),
                    ("b", b.matrix().clone()),
                    ("m", m.matrix().clone()),
                ],
            })
        }
        Theorem::Representation => {
            let a = Experiment::random_straightforward_from_rng(rng, n)?;
            let gamma = Garbling::random_from_rng(rng, n)?;
            let b = gamma.apply(&a)?;
            let gap = d_inmi(&a)?.value() - d_inmi(&b)?.value();
            acc.max_gap = acc.max_gap.max(gap);
            Ok(TrialEval {
                violated: gap > cfg.tolerance,
                metric: gap.max(0.0),
                cause: "garbled experiment scored as more informative".to_string(),
                inputs: vec![
                    ("a", a.matrix().clone()),
                    ("gamma", gamma.matrix().clone()),
                ],
            })
        }
        Theorem::KronConjecture => {
            let (lo, hi) = cfg.size_range;
            let nb = rng.gen_range(lo..=hi);
            let a = Experiment::random_from_rng(rng, n, n)?;
            let b = Experiment::random_from_rng(rng, nb, nb)?;
            let gap = kron_commutativity_gap(&a, &b)?;
            acc.max_gap = acc.max_gap.max(gap);
            Ok(TrialEval {
                violated: gap > cfg.tolerance,
                metric: gap,
                cause: "compound order changed the score".to_string(),
                inputs: vec![("a", a.matrix().clone()), ("b", b.matrix().clone())],
            })
        }
        Theorem::Limits => {
            let start = Experiment::random_from_rng(rng, n, n)?;
            let chain: Vec<Garbling> = (0..LIMITS_CHAIN_LEN)
                .map(|_| Garbling::random_positive_from_rng(rng, n, LIMITS_ENTRY_FLOOR))
                .collect::<Result<_>>()?;
            let steps = iterate_garblings(&start, &chain, LIMITS_CHAIN_LEN)?;
            let spread = steps.last().expect("chain is nonempty").column_spread;
            acc.max_final_spread = acc.max_final_spread.max(spread);
            Ok(TrialEval {
                violated: spread > cfg.tolerance,
                metric: spread,
                cause: "chain failed to contract toward the uninformative experiment".to_string(),
                inputs: vec![("start", start.matrix().clone())],
            })
        }
        Theorem::OracleVsLp => {
            let a = nonsingular_experiment(rng, n)?;
            let b = if trial % 2 == 0 {
                Experiment::random_from_rng(rng, n, n)?
            } else {
                Garbling::random_from_rng(rng, n)?.apply(&a)?
            };
            let inputs = vec![("a", a.matrix().clone()), ("b", b.matrix().clone())];
            let lp = decide_by_lp(&a, &b, cfg.tolerance)?;
            match decide_by_inverse(&a, &b, cfg.tolerance)? {
                Some(oracle) => {
                    if oracle.found() {
                        acc.dominated += 1;
                    }
                    Ok(TrialEval {
                        violated: oracle.found() != lp.found(),
                        metric: if oracle.found() != lp.found() { 1.0 } else { 0.0 },
                        cause: "inverse oracle and feasibility program disagree".to_string(),
                        inputs,
                    })
                }
                None => Ok(TrialEval {
                    violated: true,
                    metric: 1.0,
                    cause: "inverse path undecided on a nonsingular base".to_string(),
                    inputs,
                }),
            }
        }
    }
}

/// Runs the configured campaign. Sampling failures and solver failures
/// inside a trial count as violations with a tagged cause; only a bad
/// config is an error.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<TrialReport> {
    cfg.validate()?;
    let started = Instant::now();
    let mut acc = Accumulators::new();
    let mut violations = 0u64;
    let mut max_violation = 0.0f64;
    let mut worst_case: Option<WorstCase> = None;

    for trial in 0..cfg.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, trial));
        let eval = run_trial(cfg, trial, &mut rng, &mut acc);
        if !eval.violated {
            continue;
        }
        violations += 1;
        if worst_case.is_none() || eval.metric > max_violation {
            max_violation = eval.metric;
            worst_case = Some(WorstCase {
                trial,
                violation: eval.metric,
                cause: eval.cause,
                inputs: eval
                    .inputs
                    .iter()
                    .map(|(name, m)| (name.to_string(), MatrixJson::from_matrix(m)))
                    .collect(),
            });
        }
    }

    Ok(TrialReport {
        theorem: cfg.theorem,
        trials_run: cfg.trials,
        violations,
        max_violation,
        worst_case,
        stats: acc.into_stats(cfg.theorem, cfg.trials),
        elapsed: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Experiment;

    fn small(theorem: Theorem, trials: u64) -> CampaignConfig {
        CampaignConfig::new(theorem, trials, 7)
    }

    #[test]
    fn config_validation() {
        let mut cfg = small(Theorem::Representation, 0);
        assert!(cfg.validate().is_err());
        cfg.trials = 10;
        cfg.size_range = (1, 4);
        assert!(cfg.validate().is_err());
        cfg.size_range = (2, 17);
        assert!(cfg.validate().is_err());
        cfg.size_range = (2, 4);
        cfg.tolerance = 0.0;
        assert!(cfg.validate().is_err());
        cfg.tolerance = 1e-12;
        assert!(cfg.validate().is_ok());

        let mut translation = small(Theorem::Translation, 10);
        translation.size_range = (2, 9);
        assert!(translation.validate().is_err());
    }

    #[test]
    fn theorem_names_round_trip() {
        for theorem in Theorem::ALL {
            assert_eq!(theorem.name().parse::<Theorem>().unwrap(), theorem);
        }
        assert!("frobnication-9.9".parse::<Theorem>().is_err());
    }

    #[test]
    fn mixer_spreads_nearby_inputs() {
        assert_ne!(mix_seed(7, 0), mix_seed(7, 1));
        assert_ne!(mix_seed(7, 0), mix_seed(8, 0));
        assert_eq!(mix_seed(7, 3), mix_seed(7, 3));
    }

    #[test]
    fn campaigns_run_clean_at_small_scale() {
        for theorem in [
            Theorem::Translation,
            Theorem::Contraction,
            Theorem::Representation,
            Theorem::KronConjecture,
            Theorem::OracleVsLp,
        ] {
            let report = run_campaign(&small(theorem, 200)).unwrap();
            assert_eq!(report.trials_run, 200);
            assert_eq!(report.violations, 0, "{theorem} violated: {report:?}");
            assert!(report.worst_case.is_none());
        }
        let report = run_campaign(&small(Theorem::Limits, 10)).unwrap();
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = small(Theorem::Representation, 300);
        let first = report_to_json(&run_campaign(&cfg).unwrap());
        let second = report_to_json(&run_campaign(&cfg).unwrap());
        assert_eq!(first, second);
    }

    #[test]
    fn report_json_round_trips() {
        let report = run_campaign(&small(Theorem::KronConjecture, 50)).unwrap();
        let json = report_to_json(&report);
        let parsed = report_from_json(&json).unwrap();
        assert_eq!(report_to_json(&parsed), json);
    }

    #[test]
    fn worst_case_matrices_revalidate() {
        // An impossibly tight tolerance makes every rounding-level gap a
        // violation, exercising the worst-case serialization path.
        let mut cfg = small(Theorem::KronConjecture, 50);
        cfg.tolerance = 1e-300;
        let report = run_campaign(&cfg).unwrap();
        assert!(report.violations > 0);
        let worst = report.worst_case.expect("violations imply a worst case");
        for matrix in worst.inputs.values() {
            let m = matrix.to_matrix().unwrap();
            Experiment::new(m).unwrap();
        }
    }

    #[test]
    fn translation_stats_report_nonnegativity_failures() {
        let report = run_campaign(&small(Theorem::Translation, 300)).unwrap();
        let fraction = report.stats["nonstochastic_fraction"];
        assert!((0.0..=1.0).contains(&fraction));
        // Conjugated garblings genuinely leave the stochastic cone.
        assert!(fraction > 0.0);
        assert!(report.stats["max_similarity_gap"] <= TRANSLATION_SIMILARITY_TOL);
    }
}
