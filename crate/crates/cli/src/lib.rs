//! Command-line front end: experiment orchestration over the library with
//! deterministic, provenance-stamped CSV artifacts.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation error, 3 runtime or
//! solver error. The `NETDET_SEED` environment variable overrides `mc.seed`.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use netdet::blockmodel::generate;
use netdet::config::Config;
use netdet::error::Error;
use netdet::eval::{monte_carlo, roc};
use netdet::graph::Graph;
use netdet::io::{
    fmt_f64, read_cues_csv, read_edges_csv, read_labels_csv, read_scores_csv, read_tracks_csv,
    write_averaged_roc_csv, write_labels_csv, write_roc_curve_csv, write_scores_csv,
    write_tracks_csv,
};
use netdet::matrix::SparseMatrix;
use netdet::spectral::{modularity_detect_nth, modularity_matrix};
use netdet::sttp::sttp_scores;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Parser)]
#[command(name = "netdet", version, about = "Network detection experiments", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Sttp,
    Spec,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixKind {
    Adjacency,
    Degree,
    Incidence,
    Kirchhoff,
    Laplacian,
    #[value(name = "asym-laplacian")]
    AsymLaplacian,
    Modularity,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a network from the blockmodel: tracks, labels, provenance.
    Generate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Score vertices from tracks and a cue file.
    Detect {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        tracks: PathBuf,
        /// Cue CSV; required for sttp, ignored by spec.
        #[arg(long)]
        cue: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Single ROC curve from scores and ground-truth labels.
    Roc {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Vertices excluded from the sweep (comma separated), e.g. the cue.
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo averaged ROC curves, with optional parameter excursions.
    Mc {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Dump a structural matrix of an edge-list graph.
    Laplacian {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        kind: MatrixKind,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit status for a library error: bad inputs and contract violations are
/// validation failures; non-convergence and I/O are runtime failures.
fn classify(e: &Error) -> i32 {
    match e {
        Error::EigenNoConvergence { .. }
        | Error::SolverNoConvergence { .. }
        | Error::TooManyAbortedTrials { .. }
        | Error::Io(_) => EXIT_RUNTIME,
        _ => EXIT_VALIDATION,
    }
}

fn fail(e: Error) -> (i32, String) {
    (classify(&e), e.to_string())
}

/// Run the CLI with the given argv (including the program name). Prints a
/// one-line diagnostic to stderr on failure and returns the exit status.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Clap renders its own help/usage text.
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), (i32, String)> {
    match cmd {
        Command::Generate { config, out_dir } => cmd_generate(config.as_deref(), &out_dir),
        Command::Detect {
            method,
            tracks,
            cue,
            config,
            out,
        } => cmd_detect(method, &tracks, cue.as_deref(), config.as_deref(), &out),
        Command::Roc {
            scores,
            labels,
            exclude,
            out,
        } => cmd_roc(&scores, &labels, &exclude, &out),
        Command::Mc { config, out_dir } => cmd_mc(config.as_deref(), &out_dir),
        Command::Laplacian { graph, kind, out } => cmd_laplacian(&graph, kind, out.as_deref()),
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, (i32, String)> {
    match path {
        Some(p) => {
            if !p.exists() {
                return Err((EXIT_USAGE, format!("config file not found: {}", p.display())));
            }
            Config::from_file(p).map_err(fail)
        }
        None => Ok(Config::default()),
    }
}

/// Master seed: NETDET_SEED when set, else mc.seed.
fn effective_seed(cfg: &Config) -> Result<u64, (i32, String)> {
    match std::env::var("NETDET_SEED") {
        Ok(raw) => raw.parse().map_err(|_| {
            (
                EXIT_VALIDATION,
                format!("NETDET_SEED must be an unsigned integer, got `{raw}`"),
            )
        }),
        Err(_) => Ok(cfg.get_u64("mc.seed")),
    }
}

/// Provenance stamped at the top of every artifact: the resolved seed plus
/// the full config echo (with mc.seed resolved, so re-running from the
/// echoed configuration reproduces the artifact).
fn provenance(cfg: &Config, seed: u64) -> Vec<String> {
    let mut resolved = cfg.clone();
    resolved.set("mc.seed", &seed.to_string()).expect("seed is valid");
    let mut lines = vec![format!("seed = {seed}")];
    lines.extend(
        resolved
            .echo()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(str::to_string),
    );
    lines
}

fn ensure_dir(dir: &Path) -> Result<(), (i32, String)> {
    std::fs::create_dir_all(dir)
        .map_err(|e| (EXIT_RUNTIME, format!("cannot create {}: {e}", dir.display())))
}

fn write_provenance_file(dir: &Path, cfg: &Config, seed: u64) -> Result<(), (i32, String)> {
    // The sidecar is itself a parseable config with the seed resolved.
    let mut resolved = cfg.clone();
    resolved.set("mc.seed", &seed.to_string()).expect("seed is valid");
    std::fs::write(dir.join("provenance.txt"), resolved.echo())
        .map_err(|e| (EXIT_RUNTIME, e.to_string()))
}

fn cmd_generate(config: Option<&Path>, out_dir: &Path) -> Result<(), (i32, String)> {
    let cfg = load_config(config)?;
    let seed = effective_seed(&cfg)?;
    let params = cfg.baseline().build().map_err(fail)?;
    let net = generate(&params, seed).map_err(fail)?;
    ensure_dir(out_dir)?;
    let stamp = provenance(&cfg, seed);
    write_tracks_csv(&out_dir.join("tracks.csv"), &net.tracks, &stamp).map_err(fail)?;
    write_labels_csv(&out_dir.join("labels.csv"), &net.labels, &stamp).map_err(fail)?;
    write_provenance_file(out_dir, &cfg, seed)?;
    println!(
        "generated {} tracks over {} nodes ({} foreground)",
        net.tracks.tracks().len(),
        params.n,
        net.foreground_nodes().len()
    );
    Ok(())
}

fn cmd_detect(
    method: Method,
    tracks: &Path,
    cue: Option<&Path>,
    config: Option<&Path>,
    out: &Path,
) -> Result<(), (i32, String)> {
    let cfg = load_config(config)?;
    let seed = effective_seed(&cfg)?;
    // Shape comes from the config only when one is supplied; otherwise from
    // the data itself.
    let (n, horizon) = if config.is_some() {
        (
            Some(cfg.get_usize("model.n")),
            Some(cfg.get_f64("model.horizon")),
        )
    } else {
        (None, None)
    };
    let tg = read_tracks_csv(tracks, n, horizon).map_err(fail)?;
    if tg.tracks().is_empty() {
        return Err(fail(Error::EmptyTrackList));
    }
    let scores = match method {
        Method::Sttp => {
            let cue_path = cue.ok_or((
                EXIT_USAGE,
                "sttp detection needs --cue <csv>".to_string(),
            ))?;
            let cues = read_cues_csv(cue_path).map_err(fail)?;
            let mut opts = cfg.sttp_options();
            if opts.lambda.is_none() {
                opts.lambda = Some(4.0 / tg.horizon());
            }
            sttp_scores(&tg, &cues, &opts).map_err(fail)?
        }
        Method::Spec => {
            let g = tg.to_static_graph();
            let det = modularity_detect_nth(
                &g,
                cfg.get_usize("spec.eigenvector_index"),
                cfg.get_f64("spec.tol"),
            )
            .map_err(fail)?;
            let mut scores = det.scores;
            if cfg.get_bool("spec.magnitude") {
                scores.scores.iter_mut().for_each(|s| *s = s.abs());
            }
            scores
        }
    };
    write_scores_csv(out, &scores, &provenance(&cfg, seed)).map_err(fail)?;
    println!("wrote {} scores to {}", scores.len(), out.display());
    Ok(())
}

fn cmd_roc(
    scores_path: &Path,
    labels_path: &Path,
    exclude: &[usize],
    out: &Path,
) -> Result<(), (i32, String)> {
    let cfg = Config::default();
    let mut scores = read_scores_csv(scores_path).map_err(fail)?;
    let labels = read_labels_csv(labels_path).map_err(fail)?;
    if scores.len() < labels.len() {
        // Trailing zero-score vertices are dropped by sparse score files.
        scores.scores.resize(labels.len(), 0.0);
    }
    if labels.len() < scores.len() {
        return Err((
            EXIT_VALIDATION,
            format!(
                "labels cover {} vertices but scores cover {}",
                labels.len(),
                scores.len()
            ),
        ));
    }
    let curve = roc(&scores, &labels, exclude).map_err(fail)?;
    let seed = effective_seed(&cfg)?;
    write_roc_curve_csv(out, &curve, scores.method, &provenance(&cfg, seed)).map_err(fail)?;
    println!("auc = {}", fmt_f64(curve.auc));
    Ok(())
}

fn cmd_mc(config: Option<&Path>, out_dir: &Path) -> Result<(), (i32, String)> {
    let cfg = load_config(config)?;
    let seed = effective_seed(&cfg)?;
    ensure_dir(out_dir)?;
    write_provenance_file(out_dir, &cfg, seed)?;

    let excursion = cfg.get_str("mc.excursion").to_string();
    let values = cfg.get_f64_list("mc.excursion_values");
    // A run per excursion value; `none` means one run with the config as-is.
    let runs: Vec<(Option<f64>, Config)> = if excursion == "none" {
        vec![(None, cfg.clone())]
    } else {
        if values.is_empty() {
            return Err((
                EXIT_VALIDATION,
                "mc.excursion is set but mc.excursion_values is empty".to_string(),
            ));
        }
        values
            .iter()
            .map(|&v| {
                let mut c = cfg.clone();
                let key = match excursion.as_str() {
                    "psi_fg" => "model.psi_fg",
                    _ => "model.s_fg_factor",
                };
                c.set(key, &format!("{v}")).map(|()| (Some(v), c))
            })
            .collect::<Result<_, _>>()
            .map_err(fail)?
    };

    let mut summary = String::new();
    for (value, run_cfg) in &runs {
        let exp = run_cfg.experiment(Some(seed)).map_err(fail)?;
        let results = monte_carlo(&exp).map_err(fail)?;
        let tag = value.map_or(String::new(), |v| format!("_{v}"));
        for avg in &results {
            let det = match avg.detector {
                netdet::spectral::ScoreMethod::Sttp => "sttp",
                _ => "spec",
            };
            let path = out_dir.join(format!("roc_{det}{tag}.csv"));
            write_averaged_roc_csv(&path, std::slice::from_ref(avg), &provenance(run_cfg, seed))
                .map_err(fail)?;
            let label = value.map_or(String::new(), |v| format!(" {excursion}={v}"));
            summary.push_str(&format!(
                "detector={det}{label} mean_auc={} auc_stderr={} trials={} aborted={}\n",
                fmt_f64(avg.mean_auc),
                fmt_f64(avg.auc_stderr),
                avg.trials_used,
                avg.trials_aborted
            ));
        }
    }
    std::fs::write(out_dir.join("summary.txt"), &summary)
        .map_err(|e| (EXIT_RUNTIME, e.to_string()))?;
    print!("{summary}");
    Ok(())
}

fn cmd_laplacian(
    graph: &Path,
    kind: MatrixKind,
    out: Option<&Path>,
) -> Result<(), (i32, String)> {
    let (n, edges) = read_edges_csv(graph, None).map_err(fail)?;
    let g = Graph::from_edges(n, &edges).map_err(fail)?;
    let matrix: SparseMatrix = match kind {
        MatrixKind::Adjacency => g.adjacency(),
        MatrixKind::Degree => g.degree_matrix(),
        MatrixKind::Incidence => {
            let o = netdet::graph::Orientation::lexicographic(&g);
            g.incidence(&o).map_err(fail)?
        }
        MatrixKind::Kirchhoff => g.kirchhoff(),
        MatrixKind::Laplacian => g.normalized_laplacian(),
        MatrixKind::AsymLaplacian => g.asymmetric_laplacian(),
        MatrixKind::Modularity => modularity_matrix(&g).map_err(fail)?,
    };
    let mut text = format!("# kind = {}\n", matrix.role().as_str());
    for row in matrix.to_dense() {
        let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| (EXIT_RUNTIME, e.to_string()))?,
        None => print!("{text}"),
    }
    Ok(())
}
