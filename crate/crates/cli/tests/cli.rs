use std::fs;
use std::path::Path;
use std::process::Command;

use netdet_cli::{run_command, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};

fn netdet(args: &[&str]) -> i32 {
    let mut argv = vec!["netdet".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    run_command(argv)
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

/// Matrix dump parser: skips comments, splits rows.
fn parse_matrix(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn laplacian_dumps_the_path_graph_kirchhoff_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("p3.csv");
    write(&graph, "src,dst\n0,1\n1,2\n");
    let out = dir.path().join("q.csv");
    let code = netdet(&[
        "laplacian",
        "--graph",
        graph.to_str().unwrap(),
        "--kind",
        "kirchhoff",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let m = parse_matrix(&fs::read_to_string(&out).unwrap());
    assert_eq!(
        m,
        vec![
            vec![1.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 1.0]
        ]
    );
}

#[test]
fn laplacian_other_kinds_match_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("p3.csv");
    write(&graph, "src,dst\n0,1\n1,2\n");
    let out = dir.path().join("m.csv");
    for (kind, want) in [
        (
            "asym-laplacian",
            vec![
                vec![1.0, -1.0, 0.0],
                vec![-0.5, 1.0, -0.5],
                vec![0.0, -1.0, 1.0],
            ],
        ),
        (
            "adjacency",
            vec![
                vec![0.0, 1.0, 0.0],
                vec![1.0, 0.0, 1.0],
                vec![0.0, 1.0, 0.0],
            ],
        ),
    ] {
        let code = netdet(&[
            "laplacian",
            "--graph",
            graph.to_str().unwrap(),
            "--kind",
            kind,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        let m = parse_matrix(&fs::read_to_string(&out).unwrap());
        assert_eq!(m, want, "kind {kind}");
    }
}

#[test]
fn detect_rejects_empty_track_list() {
    let dir = tempfile::tempdir().unwrap();
    let tracks = dir.path().join("tracks.csv");
    write(&tracks, "track_id,src,dst,depart,arrive\n");
    let cue = dir.path().join("cue.csv");
    write(&cue, "vertex,time,value\n0,1,1\n");
    let out = dir.path().join("scores.csv");
    let code = netdet(&[
        "detect",
        "--method",
        "sttp",
        "--tracks",
        tracks.to_str().unwrap(),
        "--cue",
        cue.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(!out.exists());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(netdet(&["detect", "--method", "bogus"]), EXIT_USAGE);
    assert_eq!(netdet(&["nonsense"]), EXIT_USAGE);
}

#[test]
fn generate_detect_roc_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    write(
        &cfg,
        "model.n = 64\nmodel.fg_mass = 0.2\nmc.seed = 400\nsttp.bins = 16\n",
    );
    let out_dir = dir.path().join("out");
    assert_eq!(
        netdet(&[
            "generate",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]),
        EXIT_OK
    );
    let tracks = out_dir.join("tracks.csv");
    let labels = out_dir.join("labels.csv");
    assert!(tracks.exists() && labels.exists());
    assert!(out_dir.join("provenance.txt").exists());

    // Artifacts carry the seed and the config echo.
    let head = fs::read_to_string(&tracks).unwrap();
    assert!(head.starts_with("# seed = 400\n"));
    assert!(head.contains("# model.n = 64\n"));

    // Cue the first labeled foreground vertex at one of its track times.
    let labels_text = fs::read_to_string(&labels).unwrap();
    let fg: usize = labels_text
        .lines()
        .filter(|l| !l.starts_with('#') && l.ends_with(",1"))
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .next()
        .expect("a foreground vertex");
    let tracks_text = fs::read_to_string(&tracks).unwrap();
    let cue_time: String = tracks_text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("track_id"))
        .find_map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f[1] == fg.to_string() {
                Some(f[3].to_string())
            } else if f[2] == fg.to_string() {
                Some(f[4].to_string())
            } else {
                None
            }
        })
        .expect("foreground vertex has a track");
    let cue = dir.path().join("cue.csv");
    write(&cue, &format!("vertex,time,value\n{fg},{cue_time},1\n"));

    let scores = dir.path().join("scores.csv");
    assert_eq!(
        netdet(&[
            "detect",
            "--method",
            "sttp",
            "--tracks",
            tracks.to_str().unwrap(),
            "--cue",
            cue.to_str().unwrap(),
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            scores.to_str().unwrap(),
        ]),
        EXIT_OK
    );

    let roc_out = dir.path().join("roc.csv");
    assert_eq!(
        netdet(&[
            "roc",
            "--scores",
            scores.to_str().unwrap(),
            "--labels",
            labels.to_str().unwrap(),
            "--exclude",
            &fg.to_string(),
            "--out",
            roc_out.to_str().unwrap(),
        ]),
        EXIT_OK
    );
    let roc_text = fs::read_to_string(&roc_out).unwrap();
    assert!(roc_text.contains("pfa,pd_mean,pd_stderr,detector,fa_count"));

    // Byte-identical re-runs.
    let before = fs::read(&scores).unwrap();
    assert_eq!(
        netdet(&[
            "detect",
            "--method",
            "sttp",
            "--tracks",
            tracks.to_str().unwrap(),
            "--cue",
            cue.to_str().unwrap(),
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            scores.to_str().unwrap(),
        ]),
        EXIT_OK
    );
    assert_eq!(before, fs::read(&scores).unwrap());
}

#[test]
fn spec_detection_runs_without_cue() {
    let dir = tempfile::tempdir().unwrap();
    let tracks = dir.path().join("tracks.csv");
    write(
        &tracks,
        "track_id,src,dst,depart,arrive\n0,0,1,1,2\n1,1,2,2,3\n2,0,2,1,4\n3,2,3,5,6\n",
    );
    let out = dir.path().join("scores.csv");
    let code = netdet(&[
        "detect",
        "--method",
        "spec",
        "--tracks",
        tracks.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("vertex,score,method"));
    assert!(text.contains(",modularity"));
}

#[test]
fn generate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    write(&cfg, "model.n = 48\nmc.seed = 31\n");
    let d1 = dir.path().join("a");
    let d2 = dir.path().join("b");
    for d in [&d1, &d2] {
        assert_eq!(
            netdet(&[
                "generate",
                "--config",
                cfg.to_str().unwrap(),
                "--out-dir",
                d.to_str().unwrap(),
            ]),
            EXIT_OK
        );
    }
    assert_eq!(
        fs::read(d1.join("tracks.csv")).unwrap(),
        fs::read(d2.join("tracks.csv")).unwrap()
    );
    assert_eq!(
        fs::read(d1.join("labels.csv")).unwrap(),
        fs::read(d2.join("labels.csv")).unwrap()
    );
}

#[test]
fn mc_writes_roc_files_per_excursion_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("mc.cfg");
    write(
        &cfg,
        "model.n = 64\nmodel.fg_mass = 0.2\nmc.trials = 3\nmc.seed = 9\nsttp.bins = 16\n\
         mc.pfa_grid_points = 11\nmc.excursion = psi_fg\nmc.excursion_values = 1.5,20\n",
    );
    let out_dir = dir.path().join("out");
    assert_eq!(
        netdet(&[
            "mc",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]),
        EXIT_OK
    );
    for name in [
        "roc_sttp_1.5.csv",
        "roc_spec_1.5.csv",
        "roc_sttp_20.csv",
        "roc_spec_20.csv",
        "summary.txt",
        "provenance.txt",
    ] {
        assert!(out_dir.join(name).exists(), "missing {name}");
    }
    let summary = fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.contains("detector=sttp psi_fg=1.5"));

    let roc = fs::read_to_string(out_dir.join("roc_sttp_1.5.csv")).unwrap();
    assert!(roc.contains("pfa,pd_mean,pd_stderr,detector"));
    assert_eq!(
        roc.lines().filter(|l| l.ends_with(",sttp")).count(),
        11,
        "one row per grid point"
    );

    // Determinism: a second run reproduces the files byte for byte.
    let before = fs::read(out_dir.join("roc_spec_20.csv")).unwrap();
    let out2 = dir.path().join("out2");
    assert_eq!(
        netdet(&[
            "mc",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            out2.to_str().unwrap(),
        ]),
        EXIT_OK
    );
    assert_eq!(before, fs::read(out2.join("roc_spec_20.csv")).unwrap());
}

#[test]
fn bad_config_value_exits_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    write(&cfg, "mc.trials = -1\n");
    let code = netdet(&[
        "mc",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_VALIDATION);
}

#[test]
fn missing_config_file_exits_usage() {
    let code = netdet(&["generate", "--config", "/nonexistent.cfg", "--out-dir", "/tmp/x"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn netdet_seed_env_overrides_config_seed() {
    // Spawn the real binary so the environment stays test-local.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    write(&cfg, "model.n = 48\nmc.seed = 1\n");
    let with_env = dir.path().join("env");
    let status = Command::new(env!("CARGO_BIN_EXE_netdet"))
        .args([
            "generate",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            with_env.to_str().unwrap(),
        ])
        .env("NETDET_SEED", "777")
        .status()
        .unwrap();
    assert!(status.success());
    let head = fs::read_to_string(with_env.join("tracks.csv")).unwrap();
    assert!(head.starts_with("# seed = 777\n"), "env seed not applied");

    // And the same seed in the config reproduces those artifacts exactly.
    let cfg2 = dir.path().join("run2.cfg");
    write(&cfg2, "model.n = 48\nmc.seed = 777\n");
    let plain = dir.path().join("plain");
    let status = Command::new(env!("CARGO_BIN_EXE_netdet"))
        .args([
            "generate",
            "--config",
            cfg2.to_str().unwrap(),
            "--out-dir",
            plain.to_str().unwrap(),
        ])
        .env_remove("NETDET_SEED")
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        fs::read(with_env.join("tracks.csv")).unwrap(),
        fs::read(plain.join("tracks.csv")).unwrap()
    );
}
