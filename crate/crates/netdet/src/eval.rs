//! ROC computation and Monte-Carlo detection benchmarking.
//!
//! A trial generates a network, cues one foreground node at one of its own
//! track timestamps, runs the detectors, and sweeps every distinct score as a
//! detection threshold. Trials average vertically (fixed false-alarm grid)
//! and report mean detection probability with standard errors plus mean AUC.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::blockmodel::{generate, BlockmodelParams, GeneratedNetwork};
use crate::error::{Error, Result};
use crate::spectral::{modularity_detect_nth, ScoreMethod, VertexScores};
use crate::sttp::{sttp_scores, Cue, SttpOptions};

/// One ROC operating point: everything scoring at or above the threshold is
/// detected.
#[derive(Debug, Clone, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub pfa: f64,
    pub pd: f64,
    /// False alarms as a count, alongside the fraction.
    pub fa_count: usize,
}

/// Ordered ROC curve from (0,0) to (1,1) with its trapezoid AUC.
#[derive(Debug, Clone)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    /// Detection probability at a false-alarm rate by linear interpolation
    /// along the curve (vertical jumps resolve to their upper envelope).
    pub fn pd_at(&self, pfa: f64) -> f64 {
        let mut prev = (0.0, 0.0);
        for p in &self.points {
            if p.pfa > pfa {
                if p.pfa == prev.0 {
                    return prev.1;
                }
                let t = (pfa - prev.0) / (p.pfa - prev.0);
                return prev.1 + t * (p.pd - prev.1);
            }
            prev = (p.pfa, p.pd.max(prev.1));
        }
        prev.1
    }
}

/// Trapezoid area under the ROC points.
pub fn auc(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].pfa - w[0].pfa) * (w[1].pd + w[0].pd) * 0.5)
        .sum()
}

/// ROC of per-vertex scores against {0,1} ground truth. Cued (or otherwise
/// given) vertices are excluded via `exclude`. Sweeps every distinct score as
/// a threshold; tied scores cross together. Needs both classes after
/// exclusion.
pub fn roc(scores: &VertexScores, labels: &[u8], exclude: &[usize]) -> Result<RocCurve> {
    assert_eq!(scores.len(), labels.len());
    let mut kept: Vec<(f64, bool)> = (0..labels.len())
        .filter(|v| !exclude.contains(v))
        .map(|v| (scores.scores[v], labels[v] == 1))
        .collect();
    let foreground = kept.iter().filter(|(_, fg)| *fg).count();
    let background = kept.len() - foreground;
    if foreground == 0 || background == 0 {
        return Err(Error::SingleClassLabels);
    }
    // Descending by score; ties form one threshold bucket.
    kept.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        pfa: 0.0,
        pd: 0.0,
        fa_count: 0,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < kept.len() {
        let threshold = kept[i].0;
        while i < kept.len() && kept[i].0 == threshold {
            if kept[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold,
            pfa: fp as f64 / background as f64,
            pd: tp as f64 / foreground as f64,
            fa_count: fp,
        });
    }
    let auc = auc(&points);
    Ok(RocCurve { points, auc })
}

/// Uniformly cue a foreground node at one of its own track timestamps with
/// full observation value.
pub fn sample_cue(net: &GeneratedNetwork, rng: &mut impl Rng) -> Result<Cue> {
    let counts = net.tracks.incident_counts();
    let eligible: Vec<usize> = net
        .foreground_nodes()
        .into_iter()
        .filter(|&v| counts[v] > 0)
        .collect();
    if eligible.is_empty() {
        return Err(Error::NoEligibleForeground);
    }
    let vertex = eligible[rng.random_range(0..eligible.len())];
    let timestamps: Vec<f64> = net
        .tracks
        .tracks()
        .iter()
        .filter_map(|t| {
            if t.src == vertex {
                Some(t.depart)
            } else if t.dst == vertex {
                Some(t.arrive)
            } else {
                None
            }
        })
        .collect();
    let time = timestamps[rng.random_range(0..timestamps.len())];
    Ok(Cue {
        vertex,
        time,
        value: 1.0,
    })
}

/// Which detectors a Monte-Carlo run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorSet {
    Sttp,
    Spec,
    Both,
}

impl DetectorSet {
    fn includes(self, method: ScoreMethod) -> bool {
        matches!(
            (self, method),
            (DetectorSet::Both, _)
                | (DetectorSet::Sttp, ScoreMethod::Sttp)
                | (DetectorSet::Spec, ScoreMethod::Modularity)
        )
    }
}

/// Monte-Carlo experiment settings.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub params: BlockmodelParams,
    pub detectors: DetectorSet,
    pub trials: usize,
    pub master_seed: u64,
    /// Sorted false-alarm rates in [0, 1] for vertical averaging.
    pub pfa_grid: Vec<f64>,
    pub sttp: SttpOptions,
    /// Modularity eigenvector index; 0 is the principal eigenvector.
    pub spec_eigenvector_index: usize,
    /// Threshold |score| instead of the signed entries.
    pub spec_use_magnitude: bool,
    pub spec_tol: f64,
    /// Worker threads for trial fan-out; 0 uses the global pool.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(params: BlockmodelParams) -> Self {
        ExperimentConfig {
            params,
            detectors: DetectorSet::Both,
            trials: 100,
            master_seed: 12345,
            pfa_grid: default_pfa_grid(101),
            sttp: SttpOptions::default(),
            spec_eigenvector_index: 0,
            spec_use_magnitude: false,
            spec_tol: 1e-8,
            workers: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParams {
                name: "mc.trials",
                reason: "need at least one trial".into(),
            });
        }
        let sorted = self.pfa_grid.windows(2).all(|w| w[0] <= w[1]);
        if self.pfa_grid.is_empty()
            || !sorted
            || self.pfa_grid.iter().any(|&x| !(0.0..=1.0).contains(&x))
        {
            return Err(Error::InvalidParams {
                name: "mc.pfa_grid",
                reason: "must be a sorted subset of [0, 1]".into(),
            });
        }
        Ok(())
    }
}

pub fn default_pfa_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| i as f64 / (points - 1).max(1) as f64)
        .collect()
}

/// Vertically averaged ROC for one detector.
#[derive(Debug, Clone)]
pub struct AveragedRoc {
    pub detector: ScoreMethod,
    pub pfa: Vec<f64>,
    pub pd_mean: Vec<f64>,
    pub pd_stderr: Vec<f64>,
    pub mean_auc: f64,
    pub auc_stderr: f64,
    pub trials_used: usize,
    pub trials_aborted: usize,
}

struct TrialOutcome {
    // Per detector: PD sampled on the grid, plus the trial AUC.
    per_detector: Vec<(ScoreMethod, Vec<f64>, f64)>,
}

const CUE_STREAM: u64 = 100;

fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Result<TrialOutcome> {
    let seed = cfg.master_seed.wrapping_add(trial as u64);
    let net = generate(&cfg.params, seed)?;
    let mut cue_rng = ChaCha8Rng::seed_from_u64(seed);
    cue_rng.set_stream(CUE_STREAM);
    let cue = sample_cue(&net, &mut cue_rng)?;
    let exclude = [cue.vertex];

    let mut per_detector = Vec::new();
    if cfg.detectors.includes(ScoreMethod::Sttp) {
        let scores = sttp_scores(&net.tracks, std::slice::from_ref(&cue), &cfg.sttp)?;
        let curve = roc(&scores, &net.labels, &exclude)?;
        let pd: Vec<f64> = cfg.pfa_grid.iter().map(|&x| curve.pd_at(x)).collect();
        per_detector.push((ScoreMethod::Sttp, pd, curve.auc));
    }
    if cfg.detectors.includes(ScoreMethod::Modularity) {
        // The spectral detector is unsupervised: it never sees the cue, but
        // the cued vertex still leaves the ROC population.
        let g = net.tracks.to_static_graph();
        let det = modularity_detect_nth(&g, cfg.spec_eigenvector_index, cfg.spec_tol)?;
        let mut scores = det.scores;
        if cfg.spec_use_magnitude {
            scores.scores.iter_mut().for_each(|s| *s = s.abs());
        }
        let curve = roc(&scores, &net.labels, &exclude)?;
        let pd: Vec<f64> = cfg.pfa_grid.iter().map(|&x| curve.pd_at(x)).collect();
        per_detector.push((ScoreMethod::Modularity, pd, curve.auc));
    }
    Ok(TrialOutcome { per_detector })
}

/// Run the Monte-Carlo experiment: trial t uses seed `master_seed + t`.
/// Aborted trials are counted; more than 10% aborted fails the run. Results
/// merge in trial order, so they do not depend on worker count.
pub fn monte_carlo(cfg: &ExperimentConfig) -> Result<Vec<AveragedRoc>> {
    cfg.validate()?;
    let run = || -> Vec<std::result::Result<TrialOutcome, String>> {
        (0..cfg.trials)
            .into_par_iter()
            .map(|t| run_trial(cfg, t).map_err(|e| e.to_string()))
            .collect()
    };
    let outcomes = if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .expect("thread pool");
        pool.install(run)
    } else {
        run()
    };

    let aborted = outcomes.iter().filter(|o| o.is_err()).count();
    if aborted * 10 > cfg.trials {
        let first = outcomes
            .iter()
            .find_map(|o| o.as_ref().err().cloned())
            .unwrap_or_default();
        return Err(Error::TooManyAbortedTrials {
            aborted,
            total: cfg.trials,
            first,
        });
    }

    let methods: Vec<ScoreMethod> = match cfg.detectors {
        DetectorSet::Sttp => vec![ScoreMethod::Sttp],
        DetectorSet::Spec => vec![ScoreMethod::Modularity],
        DetectorSet::Both => vec![ScoreMethod::Sttp, ScoreMethod::Modularity],
    };
    let grid_len = cfg.pfa_grid.len();
    let mut out = Vec::new();
    for method in methods {
        let mut pd_sum = vec![0.0; grid_len];
        let mut pd_sq = vec![0.0; grid_len];
        let mut auc_sum = 0.0;
        let mut auc_sq = 0.0;
        let mut used = 0usize;
        for outcome in outcomes.iter().flatten() {
            if let Some((_, pd, a)) = outcome.per_detector.iter().find(|(m, _, _)| *m == method) {
                for (k, &v) in pd.iter().enumerate() {
                    pd_sum[k] += v;
                    pd_sq[k] += v * v;
                }
                auc_sum += a;
                auc_sq += a * a;
                used += 1;
            }
        }
        let m = used as f64;
        let stderr = |sum: f64, sq: f64| {
            if used < 2 {
                return 0.0;
            }
            let var = ((sq - sum * sum / m) / (m - 1.0)).max(0.0);
            (var / m).sqrt()
        };
        out.push(AveragedRoc {
            detector: method,
            pfa: cfg.pfa_grid.clone(),
            pd_mean: pd_sum.iter().map(|s| s / m).collect(),
            pd_stderr: (0..grid_len).map(|k| stderr(pd_sum[k], pd_sq[k])).collect(),
            mean_auc: auc_sum / m,
            auc_stderr: stderr(auc_sum, auc_sq),
            trials_used: used,
            trials_aborted: aborted,
        });
    }
    Ok(out)
}
