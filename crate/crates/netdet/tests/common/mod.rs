//! Shared helpers for the integration and acceptance suites: seeded random
//! graphs and systems, and nalgebra-backed dense oracles independent of the
//! library's own solvers.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use netdet::graph::{Graph, Track, TrackGraph};
use netdet::matrix::SparseMatrix;
use netdet::sttp::{build_spacetime_system, Cue, SpaceTimeSystem, ThreatKernelParams, TimeGrid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_dmatrix(m: &SparseMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.rows(), m.cols());
    for (r, c, v) in m.triplets() {
        d[(r, c)] = v;
    }
    d
}

/// Erdos-Renyi-style random simple graph.
pub fn random_graph(n: usize, edge_prob: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < edge_prob {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Random connected graph: a random spanning tree plus extra random edges.
pub fn random_connected_graph(n: usize, extra_prob: f64, rng: &mut impl Rng) -> Graph {
    assert!(n >= 2);
    let mut edges = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 1..n {
        let j = rng.random_range(0..i);
        edges.push((order[i], order[j]));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < extra_prob {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

/// Random orientation of every edge.
pub fn random_orientation(g: &Graph, rng: &mut impl Rng) -> netdet::graph::Orientation {
    let pairs: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|&(u, v)| if rng.random::<bool>() { (u, v) } else { (v, u) })
        .collect();
    netdet::graph::Orientation::from_pairs(&pairs)
}

/// Eigenvalues of a symmetric sparse matrix via nalgebra, ascending.
pub fn dense_eigenvalues(m: &SparseMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = to_dmatrix(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

/// A random space-time system with at most `max_unknowns` space-time indices,
/// its cues, and the boundary values the solver will see.
pub fn random_spacetime_system(
    max_unknowns: usize,
    rng: &mut impl Rng,
) -> (SpaceTimeSystem, Vec<f64>) {
    let bins = *[2usize, 4, 8].choose(rng).unwrap();
    let n = rng.random_range(3..=(max_unknowns / bins).max(3));
    let horizon = 100.0;
    let track_count = rng.random_range(n..3 * n);
    let tracks: Vec<Track> = (0..track_count)
        .map(|id| {
            let src = rng.random_range(0..n);
            let mut dst = rng.random_range(0..n);
            while dst == src {
                dst = rng.random_range(0..n);
            }
            let a = rng.random::<f64>() * horizon;
            let b = rng.random::<f64>() * horizon;
            Track {
                id: id as u64,
                src,
                dst,
                depart: a.min(b),
                arrive: a.max(b),
            }
        })
        .collect();
    let tg = TrackGraph::new(n, horizon, tracks).unwrap();
    let grid = TimeGrid::new(horizon, bins).unwrap();
    let kernel = ThreatKernelParams::uniform(n, rng.random_range(0.005..0.1)).unwrap();
    let cue_count = rng.random_range(1..=2.min(n - 1));
    let cues: Vec<Cue> = (0..cue_count)
        .map(|i| Cue {
            vertex: i,
            time: rng.random::<f64>() * horizon,
            value: rng.random::<f64>(),
        })
        .collect();
    let sys = build_spacetime_system(&tg, &grid, &kernel, &cues).unwrap();
    let boundary_values = sys.boundary_values(netdet::sttp::BoundaryMode::KernelSpread);
    (sys, boundary_values)
}

/// Dense direct solve of the harmonic problem by LU factorization of the full
/// interior operator, independent of the iterative path. Unreachable interior
/// indices are pinned to zero the same way the solver defines them.
pub fn dense_harmonic_solve(sys: &SpaceTimeSystem, boundary_values: &[f64]) -> Vec<f64> {
    let dim = sys.dim();
    let mut full = vec![0.0; dim];
    let mut is_boundary = vec![false; dim];
    for (&idx, &val) in sys.boundary().iter().zip(boundary_values) {
        is_boundary[idx] = true;
        full[idx] = val;
    }
    let reachable = sys.reachable_interior();
    if reachable.is_empty() {
        return full;
    }
    let m = reachable.len();
    let mut slot = vec![usize::MAX; dim];
    for (s, &idx) in reachable.iter().enumerate() {
        slot[idx] = s;
    }
    let mut a = DMatrix::<f64>::identity(m, m);
    let mut b = nalgebra::DVector::<f64>::zeros(m);
    for (r, c, raw) in sys.propagation_entries() {
        let Some(&ri) = slot.get(r) else { continue };
        if ri == usize::MAX {
            continue;
        }
        if is_boundary[c] {
            b[ri] += raw * full[c];
        } else if slot[c] != usize::MAX {
            a[(ri, slot[c])] -= raw;
        }
    }
    let x = a.lu().solve(&b).expect("interior operator is nonsingular");
    for (s, &idx) in reachable.iter().enumerate() {
        full[idx] = x[s];
    }
    full
}
