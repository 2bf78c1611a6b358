//! Scratch parameter probes, run by hand with --ignored --nocapture.

use netdet::blockmodel::BaselineConfig;
use netdet::eval::{monte_carlo, ExperimentConfig};

fn run(cfg: &BaselineConfig, trials: usize, seed: u64, lambda: Option<f64>) -> (f64, f64, usize) {
    let params = cfg.build().unwrap();
    let mut exp = ExperimentConfig::new(params);
    exp.trials = trials;
    exp.master_seed = seed;
    exp.sttp.lambda = lambda;
    let results = monte_carlo(&exp).unwrap();
    let sttp = results.iter().find(|r| r.detector == netdet::spectral::ScoreMethod::Sttp).unwrap();
    let spec = results.iter().find(|r| r.detector == netdet::spectral::ScoreMethod::Modularity).unwrap();
    (sttp.mean_auc, spec.mean_auc, sttp.trials_aborted)
}

fn run_spec_only(cfg: &BaselineConfig, trials: usize, seed: u64) -> (f64, f64) {
    let params = cfg.build().unwrap();
    let mut exp = ExperimentConfig::new(params);
    exp.detectors = netdet::eval::DetectorSet::Spec;
    exp.trials = trials;
    exp.master_seed = seed;
    let results = monte_carlo(&exp).unwrap();
    (results[0].mean_auc, results[0].auc_stderr)
}

#[test]
#[ignore]
fn probe_spec_baseline() {
    for fg_concentration in [0.75, 0.7, 0.65] {
        let cfg = BaselineConfig {
            fg_concentration,
            ..Default::default()
        };
        let (mean, se) = run_spec_only(&cfg, 300, 2000);
        println!("fg_conc={fg_concentration}: spec baseline auc = {mean:.4} +- {se:.4}");
        let hi = BaselineConfig {
            s_fg_factor: 2.0,
            ..cfg
        };
        let (mean2, se2) = run_spec_only(&hi, 300, 2000);
        println!("fg_conc={fg_concentration}: spec high-activity auc = {mean2:.4} +- {se2:.4}");
    }
}
