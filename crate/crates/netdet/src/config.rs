//! Flat key-value configuration.
//!
//! One `key = value` per line, `#` comments. Every key is declared in the
//! registry below with a type, bounds, default, and documentation; unknown
//! keys are rejected and values are canonicalized on parse so that parsing an
//! echoed config reproduces it exactly.

use std::collections::BTreeMap;
use std::path::Path;

use crate::blockmodel::BaselineConfig;
use crate::error::{Error, Result};
use crate::eval::{default_pfa_grid, DetectorSet, ExperimentConfig};
use crate::io::fmt_f64;
use crate::sttp::{Aggregation, BoundaryMode, SttpOptions};

#[derive(Debug, Clone, Copy)]
enum Kind {
    /// Unsigned integer with an inclusive minimum.
    UInt(u64),
    /// Float with an inclusive minimum.
    Float(f64),
    /// Float with an exclusive minimum.
    FloatAbove(f64),
    /// Float with an exclusive minimum, or the literal `auto`.
    FloatAboveOrAuto(f64),
    Bool,
    Choice(&'static [&'static str]),
    /// Comma-separated floats; may be empty.
    FloatList,
}

struct KeySpec {
    name: &'static str,
    kind: Kind,
    default: &'static str,
    doc: &'static str,
}

/// Every configuration key. Defaults marked "(default, not from published
/// values)" fill gaps the source material leaves open.
static KEYS: &[KeySpec] = &[
    KeySpec { name: "model.n", kind: Kind::UInt(2), default: "256", doc: "node count N (default, not from published values)" },
    KeySpec { name: "model.k", kind: Kind::UInt(2), default: "10", doc: "community count K; the last community is foreground" },
    KeySpec { name: "model.l", kind: Kind::UInt(3), default: "11", doc: "lifestyle count L = K + 1; the last two lifestyles are foreground" },
    KeySpec { name: "model.alpha", kind: Kind::FloatAbove(1.0), default: "2.5", doc: "power-law exponent of expected degrees (default, not from published values)" },
    KeySpec { name: "model.fg_mass", kind: Kind::FloatAbove(0.0), default: "0.1", doc: "total lifestyle probability of the two foreground lifestyles (default, not from published values)" },
    KeySpec { name: "model.b_diag", kind: Kind::Float(0.0), default: "250", doc: "diagonal of the community interaction-rate matrix B (default, not from published values)" },
    KeySpec { name: "model.b_offdiag_ratio", kind: Kind::Float(0.0), default: "0.1", doc: "off-diagonal B entries as a fraction of the diagonal" },
    KeySpec { name: "model.s_scale", kind: Kind::FloatAbove(0.0), default: "1", doc: "community sparsity diagonal as a multiple of log(N_k)/N_k" },
    KeySpec { name: "model.s_fg_factor", kind: Kind::FloatAbove(0.0), default: "1", doc: "extra sparsity factor on the foreground community diagonal" },
    KeySpec { name: "model.s_offdiag_ratio", kind: Kind::Float(0.0), default: "0.25", doc: "off-diagonal sparsity as a fraction of the geometric-mean diagonal (default, not from published values)" },
    KeySpec { name: "model.psi_bg", kind: Kind::Float(1.0), default: "8", doc: "expected meeting-time count for background communities (default, not from published values)" },
    KeySpec { name: "model.psi_fg", kind: Kind::Float(1.0), default: "1.5", doc: "expected meeting-time count for the foreground community" },
    KeySpec { name: "model.jitter_sd", kind: Kind::FloatAboveOrAuto(0.0), default: "auto", doc: "endpoint timestamp jitter in seconds; auto = horizon / 200" },
    KeySpec { name: "model.horizon", kind: Kind::FloatAbove(0.0), default: "1000", doc: "simulation horizon T in seconds (default, not from published values)" },
    KeySpec { name: "model.fg_concentration", kind: Kind::FloatAbove(0.0), default: "0.75", doc: "fraction of foreground lifestyle concentration on the foreground community (default, not from published values)" },
    KeySpec { name: "model.concentration_total", kind: Kind::FloatAbove(0.0), default: "4", doc: "total Dirichlet concentration per lifestyle row (default, not from published values)" },
    KeySpec { name: "model.per_interaction_redraw", kind: Kind::Bool, default: "false", doc: "redraw the meeting community per interaction instead of per pair" },
    KeySpec { name: "sttp.bins", kind: Kind::UInt(1), default: "64", doc: "time bins over the horizon" },
    KeySpec { name: "sttp.lambda", kind: Kind::FloatAboveOrAuto(0.0), default: "auto", doc: "threat kernel decay rate 1/s; auto = 4 / horizon" },
    KeySpec { name: "sttp.tol", kind: Kind::FloatAbove(0.0), default: "1e-10", doc: "residual tolerance of the harmonic solve" },
    KeySpec { name: "sttp.max_iter", kind: Kind::UInt(1), default: "50000", doc: "iteration cap of the harmonic solve" },
    KeySpec { name: "sttp.aggregate", kind: Kind::Choice(&["max", "mean"]), default: "max", doc: "per-vertex aggregation of the space-time threat" },
    KeySpec { name: "sttp.boundary", kind: Kind::Choice(&["kernel", "impulse"]), default: "kernel", doc: "cue spreading onto the boundary bins" },
    KeySpec { name: "spec.eigenvector_index", kind: Kind::UInt(0), default: "0", doc: "modularity eigenvector index; 0 is the principal eigenvector" },
    KeySpec { name: "spec.magnitude", kind: Kind::Bool, default: "false", doc: "threshold |score| instead of signed eigenvector entries" },
    KeySpec { name: "spec.tol", kind: Kind::FloatAbove(0.0), default: "1e-8", doc: "eigensolver residual tolerance" },
    KeySpec { name: "mc.trials", kind: Kind::UInt(1), default: "100", doc: "Monte-Carlo trial count" },
    KeySpec { name: "mc.seed", kind: Kind::UInt(0), default: "12345", doc: "master seed; trial t uses seed + t" },
    KeySpec { name: "mc.workers", kind: Kind::UInt(0), default: "0", doc: "trial worker threads; 0 uses all cores" },
    KeySpec { name: "mc.pfa_grid_points", kind: Kind::UInt(2), default: "101", doc: "false-alarm grid size for vertical averaging" },
    KeySpec { name: "mc.detectors", kind: Kind::Choice(&["sttp", "spec", "both"]), default: "both", doc: "which detectors to evaluate" },
    KeySpec { name: "mc.excursion", kind: Kind::Choice(&["none", "psi_fg", "s_fg_factor"]), default: "none", doc: "parameter swept across Monte-Carlo runs" },
    KeySpec { name: "mc.excursion_values", kind: Kind::FloatList, default: "", doc: "comma-separated values of the excursion parameter" },
];

fn spec_of(key: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|s| s.name == key)
}

/// Validated, fully-defaulted configuration with canonical value strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<&'static str, String>,
}

impl Default for Config {
    fn default() -> Self {
        let values = KEYS
            .iter()
            .map(|s| (s.name, canonicalize(s, s.default).expect("default is valid")))
            .collect();
        Config { values }
    }
}

fn canonicalize(spec: &KeySpec, raw: &str) -> Result<String> {
    let bad = |reason: String| Error::Config {
        key: spec.name.to_string(),
        reason,
    };
    let raw = raw.trim();
    match spec.kind {
        Kind::UInt(min) => {
            let v: i128 = raw
                .parse()
                .map_err(|_| bad(format!("expected an integer, got `{raw}`")))?;
            if v < min as i128 || v > u64::MAX as i128 {
                return Err(bad(format!("must be an integer >= {min}, got {v}")));
            }
            Ok(v.to_string())
        }
        Kind::Float(min) => {
            let v: f64 = raw
                .parse()
                .map_err(|_| bad(format!("expected a number, got `{raw}`")))?;
            if !v.is_finite() || v < min {
                return Err(bad(format!("must be a finite number >= {min}, got {raw}")));
            }
            Ok(fmt_f64(v))
        }
        Kind::FloatAbove(min) => {
            let v: f64 = raw
                .parse()
                .map_err(|_| bad(format!("expected a number, got `{raw}`")))?;
            if !v.is_finite() || v <= min {
                return Err(bad(format!("must be a finite number > {min}, got {raw}")));
            }
            Ok(fmt_f64(v))
        }
        Kind::FloatAboveOrAuto(min) => {
            if raw == "auto" {
                return Ok("auto".to_string());
            }
            let v: f64 = raw
                .parse()
                .map_err(|_| bad(format!("expected a number or `auto`, got `{raw}`")))?;
            if !v.is_finite() || v <= min {
                return Err(bad(format!("must be a finite number > {min} or `auto`, got {raw}")));
            }
            Ok(fmt_f64(v))
        }
        Kind::Bool => match raw {
            "true" | "false" => Ok(raw.to_string()),
            _ => Err(bad(format!("expected true or false, got `{raw}`"))),
        },
        Kind::Choice(options) => {
            if options.contains(&raw) {
                Ok(raw.to_string())
            } else {
                Err(bad(format!("expected one of {options:?}, got `{raw}`")))
            }
        }
        Kind::FloatList => {
            if raw.is_empty() {
                return Ok(String::new());
            }
            let mut canon = Vec::new();
            for part in raw.split(',') {
                let v: f64 = part
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("expected comma-separated numbers, got `{part}`")))?;
                if !v.is_finite() {
                    return Err(bad(format!("list entries must be finite, got `{part}`")));
                }
                canon.push(fmt_f64(v));
            }
            Ok(canon.join(","))
        }
    }
}

impl Config {
    /// Parse configuration text; unknown keys and malformed values are
    /// rejected naming the key. Missing keys take their defaults.
    pub fn parse_str(text: &str, source: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::ParseFile {
                    path: source.to_string(),
                    line: lineno + 1,
                    reason: format!("expected `key = value`, got `{line}`"),
                });
            };
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text, &path.display().to_string())
    }

    /// Set one key, validating and canonicalizing the value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let spec = spec_of(key).ok_or_else(|| Error::Config {
            key: key.to_string(),
            reason: "unknown key".to_string(),
        })?;
        let canon = canonicalize(spec, value)?;
        self.values.insert(spec.name, canon);
        Ok(())
    }

    /// Canonical echo: every key with its resolved value, documented.
    /// Parsing the echo reproduces this config exactly.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        for spec in KEYS {
            out.push_str(&format!("# {}\n", spec.doc));
            out.push_str(&format!("{} = {}\n", spec.name, self.values[spec.name]));
        }
        out
    }

    pub fn get_str(&self, key: &str) -> &str {
        &self.values[spec_of(key).expect("known key").name]
    }

    pub fn get_u64(&self, key: &str) -> u64 {
        self.get_str(key).parse().expect("canonicalized integer")
    }

    pub fn get_usize(&self, key: &str) -> usize {
        self.get_u64(key) as usize
    }

    pub fn get_f64(&self, key: &str) -> f64 {
        self.get_str(key).parse().expect("canonicalized float")
    }

    pub fn get_bool(&self, key: &str) -> bool {
        self.get_str(key) == "true"
    }

    pub fn get_f64_or_auto(&self, key: &str) -> Option<f64> {
        let s = self.get_str(key);
        (s != "auto").then(|| s.parse().expect("canonicalized float"))
    }

    pub fn get_f64_list(&self, key: &str) -> Vec<f64> {
        let s = self.get_str(key);
        if s.is_empty() {
            return Vec::new();
        }
        s.split(',')
            .map(|p| p.parse().expect("canonicalized float"))
            .collect()
    }

    /// Blockmodel shape from the model.* keys.
    pub fn baseline(&self) -> BaselineConfig {
        BaselineConfig {
            n: self.get_usize("model.n"),
            communities: self.get_usize("model.k"),
            lifestyles: self.get_usize("model.l"),
            alpha: self.get_f64("model.alpha"),
            fg_mass: self.get_f64("model.fg_mass"),
            b_diag: self.get_f64("model.b_diag"),
            b_offdiag_ratio: self.get_f64("model.b_offdiag_ratio"),
            s_scale: self.get_f64("model.s_scale"),
            s_fg_factor: self.get_f64("model.s_fg_factor"),
            s_offdiag_ratio: self.get_f64("model.s_offdiag_ratio"),
            psi_bg: self.get_f64("model.psi_bg"),
            psi_fg: self.get_f64("model.psi_fg"),
            jitter_sd: self.get_f64_or_auto("model.jitter_sd"),
            horizon: self.get_f64("model.horizon"),
            fg_concentration: self.get_f64("model.fg_concentration"),
            concentration_total: self.get_f64("model.concentration_total"),
            per_interaction_redraw: self.get_bool("model.per_interaction_redraw"),
        }
    }

    /// Solver settings from the sttp.* keys.
    pub fn sttp_options(&self) -> SttpOptions {
        SttpOptions {
            bins: self.get_usize("sttp.bins"),
            lambda: self.get_f64_or_auto("sttp.lambda"),
            tol: self.get_f64("sttp.tol"),
            max_iter: self.get_usize("sttp.max_iter"),
            aggregation: if self.get_str("sttp.aggregate") == "mean" {
                Aggregation::Mean
            } else {
                Aggregation::Max
            },
            boundary_mode: if self.get_str("sttp.boundary") == "impulse" {
                BoundaryMode::Impulse
            } else {
                BoundaryMode::KernelSpread
            },
        }
    }

    /// Full Monte-Carlo experiment from the model.*, sttp.*, spec.* and mc.*
    /// keys. `seed_override` takes precedence over mc.seed.
    pub fn experiment(&self, seed_override: Option<u64>) -> Result<ExperimentConfig> {
        let params = self.baseline().build()?;
        Ok(ExperimentConfig {
            params,
            detectors: match self.get_str("mc.detectors") {
                "sttp" => DetectorSet::Sttp,
                "spec" => DetectorSet::Spec,
                _ => DetectorSet::Both,
            },
            trials: self.get_usize("mc.trials"),
            master_seed: seed_override.unwrap_or_else(|| self.get_u64("mc.seed")),
            pfa_grid: default_pfa_grid(self.get_usize("mc.pfa_grid_points")),
            sttp: self.sttp_options(),
            spec_eigenvector_index: self.get_usize("spec.eigenvector_index"),
            spec_use_magnitude: self.get_bool("spec.magnitude"),
            spec_tol: self.get_f64("spec.tol"),
            workers: self.get_usize("mc.workers"),
        })
    }
}
