//! CSV file formats and float formatting.
//!
//! Every writer emits a `#`-prefixed provenance preamble (seed and config
//! echo) above the mandatory header; readers skip comment and blank lines.
//! Floats are written with 17 significant digits so re-parsing is bit-exact.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{AveragedRoc, RocCurve};
use crate::graph::{Track, TrackGraph};
use crate::spectral::{ScoreMethod, VertexScores};
use crate::sttp::Cue;

/// 17 significant decimal digits: enough to reproduce any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str, path: &str, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::ParseFile {
        path: path.to_string(),
        line,
        reason: format!("expected a number, got `{s}`"),
    })
}

fn parse_usize(s: &str, path: &str, line: usize) -> Result<usize> {
    s.trim().parse().map_err(|_| Error::ParseFile {
        path: path.to_string(),
        line,
        reason: format!("expected an unsigned integer, got `{s}`"),
    })
}

fn write_with_preamble(path: &Path, preamble: &[String], body: &str) -> Result<()> {
    let mut out = String::new();
    for line in preamble {
        out.push_str("# ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(body);
    fs::write(path, out)?;
    Ok(())
}

/// Data rows of a CSV: leading comment/blank lines are skipped, the first
/// remaining line must equal `header`. Returns (1-based line, fields) pairs.
fn read_rows(path: &Path, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path)?;
    let name = path.display().to_string();
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != header {
                return Err(Error::ParseFile {
                    path: name,
                    line: idx + 1,
                    reason: format!("expected header `{header}`, got `{line}`"),
                });
            }
            saw_header = true;
            continue;
        }
        rows.push((idx + 1, line.split(',').map(|f| f.trim().to_string()).collect()));
    }
    if !saw_header {
        return Err(Error::ParseFile {
            path: name,
            line: 1,
            reason: format!("missing header `{header}`"),
        });
    }
    Ok(rows)
}

fn expect_fields(fields: &[String], want: usize, path: &Path, line: usize) -> Result<()> {
    if fields.len() != want {
        return Err(Error::ParseFile {
            path: path.display().to_string(),
            line,
            reason: format!("expected {want} fields, got {}", fields.len()),
        });
    }
    Ok(())
}

pub fn write_edges_csv(path: &Path, edges: &[(usize, usize)], preamble: &[String]) -> Result<()> {
    let mut body = String::from("src,dst\n");
    for &(u, v) in edges {
        body.push_str(&format!("{u},{v}\n"));
    }
    write_with_preamble(path, preamble, &body)
}

/// Edge list with header `src,dst`. The vertex count is the largest index
/// plus one unless given.
pub fn read_edges_csv(path: &Path, n: Option<usize>) -> Result<(usize, Vec<(usize, usize)>)> {
    let mut edges = Vec::new();
    let mut max_seen = 0usize;
    for (line, fields) in read_rows(path, "src,dst")? {
        expect_fields(&fields, 2, path, line)?;
        let name = path.display().to_string();
        let u = parse_usize(&fields[0], &name, line)?;
        let v = parse_usize(&fields[1], &name, line)?;
        max_seen = max_seen.max(u).max(v);
        edges.push((u, v));
    }
    let n = n.unwrap_or(if edges.is_empty() { 0 } else { max_seen + 1 });
    Ok((n, edges))
}

pub fn write_tracks_csv(path: &Path, tg: &TrackGraph, preamble: &[String]) -> Result<()> {
    let mut body = String::from("track_id,src,dst,depart,arrive\n");
    for t in tg.tracks() {
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            t.id,
            t.src,
            t.dst,
            fmt_f64(t.depart),
            fmt_f64(t.arrive)
        ));
    }
    write_with_preamble(path, preamble, &body)
}

/// Track CSV with header `track_id,src,dst,depart,arrive`. Vertex count and
/// horizon come from the data when not supplied.
pub fn read_tracks_csv(
    path: &Path,
    n: Option<usize>,
    horizon: Option<f64>,
) -> Result<TrackGraph> {
    let name = path.display().to_string();
    let mut tracks = Vec::new();
    let mut max_vertex = 0usize;
    let mut max_time = 0.0f64;
    for (line, fields) in read_rows(path, "track_id,src,dst,depart,arrive")? {
        expect_fields(&fields, 5, path, line)?;
        let id = parse_usize(&fields[0], &name, line)? as u64;
        let src = parse_usize(&fields[1], &name, line)?;
        let dst = parse_usize(&fields[2], &name, line)?;
        let depart = parse_f64(&fields[3], &name, line)?;
        let arrive = parse_f64(&fields[4], &name, line)?;
        max_vertex = max_vertex.max(src).max(dst);
        max_time = max_time.max(arrive);
        tracks.push(Track {
            id,
            src,
            dst,
            depart,
            arrive,
        });
    }
    let n = n.unwrap_or(max_vertex + 1);
    let horizon = horizon.unwrap_or(if max_time > 0.0 { max_time } else { 1.0 });
    TrackGraph::new(n, horizon, tracks)
}

pub fn write_labels_csv(path: &Path, labels: &[u8], preamble: &[String]) -> Result<()> {
    let mut body = String::from("vertex,label\n");
    for (v, &l) in labels.iter().enumerate() {
        body.push_str(&format!("{v},{l}\n"));
    }
    write_with_preamble(path, preamble, &body)
}

pub fn read_labels_csv(path: &Path) -> Result<Vec<u8>> {
    let name = path.display().to_string();
    let mut pairs = Vec::new();
    for (line, fields) in read_rows(path, "vertex,label")? {
        expect_fields(&fields, 2, path, line)?;
        let v = parse_usize(&fields[0], &name, line)?;
        let l = parse_usize(&fields[1], &name, line)?;
        if l > 1 {
            return Err(Error::ParseFile {
                path: name,
                line,
                reason: format!("labels are 0 or 1, got {l}"),
            });
        }
        pairs.push((v, l as u8));
    }
    let n = pairs.iter().map(|&(v, _)| v + 1).max().unwrap_or(0);
    let mut labels = vec![0u8; n];
    for (v, l) in pairs {
        labels[v] = l;
    }
    Ok(labels)
}

pub fn write_cues_csv(path: &Path, cues: &[Cue], preamble: &[String]) -> Result<()> {
    let mut body = String::from("vertex,time,value\n");
    for c in cues {
        body.push_str(&format!(
            "{},{},{}\n",
            c.vertex,
            fmt_f64(c.time),
            fmt_f64(c.value)
        ));
    }
    write_with_preamble(path, preamble, &body)
}

pub fn read_cues_csv(path: &Path) -> Result<Vec<Cue>> {
    let name = path.display().to_string();
    let mut cues = Vec::new();
    for (line, fields) in read_rows(path, "vertex,time,value")? {
        expect_fields(&fields, 3, path, line)?;
        cues.push(Cue {
            vertex: parse_usize(&fields[0], &name, line)?,
            time: parse_f64(&fields[1], &name, line)?,
            value: parse_f64(&fields[2], &name, line)?,
        });
    }
    Ok(cues)
}

pub fn write_scores_csv(path: &Path, scores: &VertexScores, preamble: &[String]) -> Result<()> {
    let mut body = String::from("vertex,score,method\n");
    for (v, &s) in scores.scores.iter().enumerate() {
        body.push_str(&format!("{v},{},{}\n", fmt_f64(s), scores.method.as_str()));
    }
    write_with_preamble(path, preamble, &body)
}

pub fn read_scores_csv(path: &Path) -> Result<VertexScores> {
    let name = path.display().to_string();
    let mut rows = Vec::new();
    let mut method = ScoreMethod::Sttp;
    for (line, fields) in read_rows(path, "vertex,score,method")? {
        expect_fields(&fields, 3, path, line)?;
        let v = parse_usize(&fields[0], &name, line)?;
        let s = parse_f64(&fields[1], &name, line)?;
        method = ScoreMethod::parse(&fields[2]).ok_or_else(|| Error::ParseFile {
            path: name.clone(),
            line,
            reason: format!("unknown method `{}`", fields[2]),
        })?;
        rows.push((v, s));
    }
    let n = rows.iter().map(|&(v, _)| v + 1).max().unwrap_or(0);
    let mut scores = vec![0.0; n];
    for (v, s) in rows {
        scores[v] = s;
    }
    Ok(VertexScores::new(scores, method))
}

/// Averaged ROC with the mandatory `pfa,pd_mean,pd_stderr,detector` header.
pub fn write_averaged_roc_csv(
    path: &Path,
    curves: &[AveragedRoc],
    preamble: &[String],
) -> Result<()> {
    let mut body = String::from("pfa,pd_mean,pd_stderr,detector\n");
    for c in curves {
        let name = match c.detector {
            ScoreMethod::Sttp => "sttp",
            ScoreMethod::Modularity => "spec",
            ScoreMethod::Fiedler => "fiedler",
        };
        for k in 0..c.pfa.len() {
            body.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(c.pfa[k]),
                fmt_f64(c.pd_mean[k]),
                fmt_f64(c.pd_stderr[k]),
                name
            ));
        }
    }
    write_with_preamble(path, preamble, &body)
}

/// Single-trial ROC: the averaged-ROC columns (stderr 0) plus the
/// false-alarm count at each operating point.
pub fn write_roc_curve_csv(
    path: &Path,
    curve: &RocCurve,
    method: ScoreMethod,
    preamble: &[String],
) -> Result<()> {
    let name = match method {
        ScoreMethod::Sttp => "sttp",
        ScoreMethod::Modularity => "spec",
        ScoreMethod::Fiedler => "fiedler",
    };
    let mut body = String::from("pfa,pd_mean,pd_stderr,detector,fa_count\n");
    for p in &curve.points {
        body.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(p.pfa),
            fmt_f64(p.pd),
            fmt_f64(0.0),
            name,
            p.fa_count
        ));
    }
    write_with_preamble(path, preamble, &body)
}
