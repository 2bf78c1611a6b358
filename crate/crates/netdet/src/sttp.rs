//! Space-time threat propagation.
//!
//! Tracks couple vertex-time bins through exponential threat kernels; cued
//! vertices form the boundary of a harmonic problem on the space-time graph,
//! and the interior threat probabilities solve `L_ii x = -L_ib b` with
//! `L = I - P` for the row-normalized space-time operator `P`. Thresholding
//! the resulting per-vertex scores is the likelihood-ratio detector.

use crate::bicg::bicgstab;
use crate::error::{Error, Result};
use crate::graph::TrackGraph;
use crate::matrix::{MatrixRole, SparseMatrix};
use crate::spectral::{ScoreMethod, VertexScores};

/// Uniform discretization of the horizon [0, T] into `bins` bins; kernels are
/// evaluated at bin centers.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    bins: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, bins: usize) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::InvalidParams {
                name: "horizon",
                reason: format!("must be positive, got {horizon}"),
            });
        }
        if bins == 0 {
            return Err(Error::InvalidParams {
                name: "bins",
                reason: "need at least one time bin".into(),
            });
        }
        Ok(TimeGrid { horizon, bins })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn width(&self) -> f64 {
        self.horizon / self.bins as f64
    }

    pub fn center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.width()
    }

    /// Bin containing time t; times at the horizon fall into the last bin.
    pub fn bin_of(&self, t: f64) -> usize {
        ((t / self.width()) as usize).min(self.bins - 1)
    }
}

/// Per-vertex Poisson decay rates of the threat jump process.
#[derive(Debug, Clone)]
pub struct ThreatKernelParams {
    rates: Vec<f64>,
}

impl ThreatKernelParams {
    pub fn uniform(n: usize, rate: f64) -> Result<Self> {
        Self::per_vertex(vec![rate; n])
    }

    pub fn per_vertex(rates: Vec<f64>) -> Result<Self> {
        if let Some(r) = rates.iter().find(|r| !(**r > 0.0)) {
            return Err(Error::InvalidParams {
                name: "lambda",
                reason: format!("rates must be positive, got {r}"),
            });
        }
        Ok(ThreatKernelParams { rates })
    }

    pub fn rate(&self, v: usize) -> f64 {
        self.rates[v]
    }
}

/// Probability that a threat observed `t` seconds away (either direction)
/// persists: e^{-lambda |t|}.
pub fn threat_kernel(lambda: f64, t: f64) -> f64 {
    (-lambda * t.abs()).exp()
}

/// An observed threat: the boundary condition of the harmonic solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Cue {
    pub vertex: usize,
    pub time: f64,
    pub value: f64,
}

impl Cue {
    fn validate(&self, n: usize, horizon: f64) -> Result<()> {
        if self.vertex >= n {
            return Err(Error::UnknownVertex {
                vertex: self.vertex,
                n,
            });
        }
        if !(0.0..=horizon).contains(&self.time) {
            return Err(Error::InvalidCue {
                vertex: self.vertex,
                reason: format!("time {} outside horizon [0, {horizon}]", self.time),
            });
        }
        if !(0.0..=1.0).contains(&self.value) {
            return Err(Error::InvalidCue {
                vertex: self.vertex,
                reason: format!("value {} outside [0, 1]", self.value),
            });
        }
        Ok(())
    }
}

/// How cue influence enters the boundary values over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryMode {
    /// Kernel-decayed from the cue time across all bins (default).
    #[default]
    KernelSpread,
    /// The cue's own bin only.
    Impulse,
}

/// Per-vertex aggregation of the space-time threat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Peak evidence over time (default).
    #[default]
    Max,
    Mean,
}

/// Discretized space-time system: raw kernel-weighted adjacency blocks, the
/// per-vertex track weights that normalize them, and the boundary index set
/// induced by the cues (every bin of each cued vertex).
#[derive(Debug, Clone)]
pub struct SpaceTimeSystem {
    n: usize,
    grid: TimeGrid,
    kernel: ThreatKernelParams,
    /// Raw block matrix before normalization; entry ((v,k),(u,j)) sums
    /// kernel columns over tracks between u and v.
    adjacency: SparseMatrix,
    /// w(v): number of tracks incident to v.
    weights: Vec<usize>,
    /// Per space-time row scale such that scale * raw row has sum <= 1.
    row_scale: Vec<f64>,
    /// Sorted space-time indices of the boundary.
    boundary: Vec<usize>,
    cued_vertices: Vec<usize>,
    cues: Vec<Cue>,
}

impl SpaceTimeSystem {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.n * self.grid.bins
    }

    pub fn index(&self, vertex: usize, bin: usize) -> usize {
        vertex * self.grid.bins + bin
    }

    pub fn vertex_of(&self, index: usize) -> usize {
        index / self.grid.bins
    }

    /// Raw (pre-normalization) space-time adjacency.
    pub fn raw_adjacency(&self) -> &SparseMatrix {
        &self.adjacency
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn cued_vertices(&self) -> &[usize] {
        &self.cued_vertices
    }

    pub fn cues(&self) -> &[Cue] {
        &self.cues
    }

    /// Entries of the row-normalized propagation operator P = D^{-1} A.
    pub fn propagation_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency
            .triplets()
            .map(move |(r, c, v)| (r, c, v * self.row_scale[r]))
    }

    /// Boundary values from the construction cues: each bin of a cued vertex
    /// carries the strongest kernel-decayed cue value, and the bin containing
    /// a cue time carries the full cue value (in-bin distance is below grid
    /// resolution).
    pub fn boundary_values(&self, mode: BoundaryMode) -> Vec<f64> {
        let mut values = vec![0.0; self.boundary.len()];
        for (slot, &idx) in self.boundary.iter().enumerate() {
            let v = self.vertex_of(idx);
            let k = idx % self.grid.bins;
            let mut best = 0.0f64;
            for cue in self.cues.iter().filter(|c| c.vertex == v) {
                let contribution = match mode {
                    BoundaryMode::KernelSpread => {
                        if self.grid.bin_of(cue.time) == k {
                            cue.value
                        } else {
                            cue.value * threat_kernel(self.kernel.rate(v), self.grid.center(k) - cue.time)
                        }
                    }
                    BoundaryMode::Impulse => {
                        if self.grid.bin_of(cue.time) == k {
                            cue.value
                        } else {
                            0.0
                        }
                    }
                };
                best = best.max(contribution);
            }
            values[slot] = best;
        }
        values
    }

    /// Interior space-time indices that can receive threat from the boundary
    /// through the propagation operator.
    pub fn reachable_interior(&self) -> Vec<usize> {
        let dim = self.dim();
        let mut is_boundary = vec![false; dim];
        for &b in &self.boundary {
            is_boundary[b] = true;
        }
        // Dependence edges run row -> col (a row reads its columns); threat
        // reaches row r once any of its columns is reached.
        let mut readers: Vec<Vec<u32>> = vec![Vec::new(); dim];
        for (r, c, _) in self.adjacency.triplets() {
            readers[c].push(r as u32);
        }
        let mut reached = vec![false; dim];
        let mut stack: Vec<usize> = self.boundary.clone();
        while let Some(j) = stack.pop() {
            for &r in &readers[j] {
                let r = r as usize;
                if !reached[r] && !is_boundary[r] {
                    reached[r] = true;
                    stack.push(r);
                }
            }
        }
        (0..dim).filter(|&i| reached[i]).collect()
    }
}

/// Build the discretized space-time system from tracks and cues.
///
/// For a track u -> v departing at `t_u` and arriving at `t_v`, block (v, u)
/// gains the column at bin(t_u) filled with the kernel centered on `t_v`, and
/// block (u, v) gains the column at bin(t_v) filled with the kernel centered
/// on `t_u` (time-reversed propagation). Coincident contributions sum.
pub fn build_spacetime_system(
    tg: &TrackGraph,
    grid: &TimeGrid,
    kernel: &ThreatKernelParams,
    cues: &[Cue],
) -> Result<SpaceTimeSystem> {
    let n = tg.order();
    for cue in cues {
        cue.validate(n, tg.horizon())?;
    }
    if tg.tracks().is_empty() {
        log::warn!("track list is empty; space-time adjacency is zero");
    }
    let bins = grid.bins();
    let dim = n * bins;
    let mut trips: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * bins * tg.tracks().len());
    for t in tg.tracks() {
        let (u, v) = (t.src, t.dst);
        let col_u = u * bins + grid.bin_of(t.depart);
        let col_v = v * bins + grid.bin_of(t.arrive);
        for k in 0..bins {
            let tk = grid.center(k);
            trips.push((v * bins + k, col_u, threat_kernel(kernel.rate(v), tk - t.arrive)));
            trips.push((u * bins + k, col_v, threat_kernel(kernel.rate(u), tk - t.depart)));
        }
    }
    let adjacency = SparseMatrix::from_triplets_summing(dim, dim, trips, MatrixRole::SpaceTime)?;

    let weights = tg.incident_counts();
    let mut row_scale = vec![0.0; dim];
    for (r, scale) in row_scale.iter_mut().enumerate() {
        let v = r / bins;
        let (cols, _) = adjacency.row(r);
        let denom = weights[v].max(cols.len());
        if denom > 0 {
            *scale = 1.0 / denom as f64;
        }
    }
    // Row-substochasticity underpins the maximum principle and convergence.
    #[cfg(debug_assertions)]
    for (r, &scale) in row_scale.iter().enumerate() {
        let (_, vals) = adjacency.row(r);
        let sum: f64 = vals.iter().sum::<f64>() * scale;
        debug_assert!(sum <= 1.0 + 1e-9, "row {r} sum {sum} exceeds 1");
    }

    let mut cued_vertices: Vec<usize> = cues.iter().map(|c| c.vertex).collect();
    cued_vertices.sort_unstable();
    cued_vertices.dedup();
    let boundary: Vec<usize> = cued_vertices
        .iter()
        .flat_map(|&v| (0..bins).map(move |k| v * bins + k))
        .collect();

    Ok(SpaceTimeSystem {
        n,
        grid: grid.clone(),
        kernel: kernel.clone(),
        adjacency,
        weights,
        row_scale,
        boundary,
        cued_vertices,
        cues: cues.to_vec(),
    })
}

/// Space-time threat probabilities with a per-vertex aggregate.
#[derive(Debug, Clone)]
pub struct ThreatVector {
    n: usize,
    bins: usize,
    /// Vertex-major (vertex * bins + bin), clamped to [0, 1].
    pub values: Vec<f64>,
    /// Aggregate score per vertex.
    pub per_vertex: Vec<f64>,
}

impl ThreatVector {
    pub fn get(&self, vertex: usize, bin: usize) -> f64 {
        self.values[vertex * self.bins + bin]
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    fn aggregate(values: &[f64], n: usize, bins: usize, how: Aggregation) -> Vec<f64> {
        (0..n)
            .map(|v| {
                let row = &values[v * bins..(v + 1) * bins];
                match how {
                    Aggregation::Max => row.iter().copied().fold(0.0, f64::max),
                    Aggregation::Mean => row.iter().sum::<f64>() / bins as f64,
                }
            })
            .collect()
    }
}

/// Solve the harmonic boundary-value problem: interior threat values satisfy
/// `(I - P)_ii x = P_ib b`. Interior components unreachable from the boundary
/// carry zero threat and are removed from the solve.
///
/// `boundary_values` aligns with `sys.boundary()` and must lie in [0, 1].
pub fn harmonic_solve(
    sys: &SpaceTimeSystem,
    boundary_values: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<ThreatVector> {
    if sys.boundary.is_empty() {
        return Err(Error::NoCue);
    }
    assert_eq!(boundary_values.len(), sys.boundary.len());
    for (&idx, &val) in sys.boundary.iter().zip(boundary_values) {
        if !(0.0..=1.0).contains(&val) {
            return Err(Error::InvalidCue {
                vertex: sys.vertex_of(idx),
                reason: format!("boundary value {val} outside [0, 1]"),
            });
        }
    }

    let dim = sys.dim();
    let mut full = vec![0.0; dim];
    let mut boundary_value_at = vec![f64::NAN; dim];
    for (&idx, &val) in sys.boundary.iter().zip(boundary_values) {
        full[idx] = val;
        boundary_value_at[idx] = val;
    }

    let reachable = sys.reachable_interior();
    if !reachable.is_empty() {
        let m = reachable.len();
        let mut slot_of = vec![usize::MAX; dim];
        for (slot, &idx) in reachable.iter().enumerate() {
            slot_of[idx] = slot;
        }

        // Reduced operator I - P_rr and right-hand side P_rb * b.
        let mut trips: Vec<(usize, usize, f64)> = (0..m).map(|i| (i, i, 1.0)).collect();
        let mut rhs = vec![0.0; m];
        for (r, c, raw) in sys.adjacency.triplets() {
            let Some(&ri) = slot_of.get(r) else { continue };
            if ri == usize::MAX {
                continue;
            }
            let p = raw * sys.row_scale[r];
            if !boundary_value_at[c].is_nan() {
                rhs[ri] += p * boundary_value_at[c];
            } else if slot_of[c] != usize::MAX {
                trips.push((ri, slot_of[c], -p));
            }
            // Columns that are neither boundary nor reachable carry zero
            // threat and drop out of the reduced system.
        }
        let lap = SparseMatrix::from_triplets_summing(m, m, trips, MatrixRole::SpaceTime)?;
        let x = bicgstab(&lap, &rhs, tol, max_iter)?;
        for (slot, &idx) in reachable.iter().enumerate() {
            full[idx] = x[slot];
        }
    }

    // Nonnegativity of the harmonic threat is structural; anything below is
    // solver noise.
    let mut clamped = 0.0f64;
    for v in full.iter_mut() {
        debug_assert!(*v >= -1e-10, "harmonic threat {v} below -1e-10");
        let c = v.clamp(0.0, 1.0);
        clamped += (c - *v).abs();
        *v = c;
    }
    if clamped > 1e-12 {
        log::debug!("clamped total threat magnitude {clamped:e} into [0, 1]");
    }

    let n = sys.n;
    let bins = sys.grid.bins;
    let per_vertex = ThreatVector::aggregate(&full, n, bins, Aggregation::Max);
    Ok(ThreatVector {
        n,
        bins,
        values: full,
        per_vertex,
    })
}

/// Solver and discretization settings for the threat-propagation detector.
#[derive(Debug, Clone)]
pub struct SttpOptions {
    pub bins: usize,
    /// Kernel decay rate; None derives e-folding time = horizon / 4.
    pub lambda: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub aggregation: Aggregation,
    pub boundary_mode: BoundaryMode,
}

impl Default for SttpOptions {
    fn default() -> Self {
        SttpOptions {
            bins: 64,
            lambda: None,
            tol: 1e-10,
            max_iter: 50_000,
            aggregation: Aggregation::Max,
            boundary_mode: BoundaryMode::KernelSpread,
        }
    }
}

impl SttpOptions {
    pub fn effective_lambda(&self, horizon: f64) -> f64 {
        self.lambda.unwrap_or(4.0 / horizon)
    }
}

/// End-to-end threat-propagation scores: build the space-time system from the
/// tracks, spread the cues onto the boundary, solve, and aggregate per vertex.
/// Cued vertices score their strongest boundary value.
pub fn sttp_scores(tg: &TrackGraph, cues: &[Cue], opts: &SttpOptions) -> Result<VertexScores> {
    if cues.is_empty() {
        return Err(Error::NoCue);
    }
    let grid = TimeGrid::new(tg.horizon(), opts.bins)?;
    let kernel = ThreatKernelParams::uniform(tg.order(), opts.effective_lambda(tg.horizon()))?;
    let sys = build_spacetime_system(tg, &grid, &kernel, cues)?;
    let boundary_values = sys.boundary_values(opts.boundary_mode);
    let threat = harmonic_solve(&sys, &boundary_values, opts.tol, opts.max_iter)?;

    let mut scores = match opts.aggregation {
        Aggregation::Max => threat.per_vertex.clone(),
        Aggregation::Mean => {
            ThreatVector::aggregate(&threat.values, threat.n, threat.bins, Aggregation::Mean)
        }
    };
    for (pos, &v) in sys.cued_vertices.iter().enumerate() {
        let _ = pos;
        let bins = sys.grid.bins();
        let start = sys
            .boundary
            .binary_search(&(v * bins))
            .expect("cued vertex bins are boundary");
        scores[v] = boundary_values[start..start + bins]
            .iter()
            .copied()
            .fold(0.0, f64::max);
    }
    Ok(VertexScores::new(scores, ScoreMethod::Sttp))
}

/// Likelihood-ratio detection: vertex v is detected when
/// `score(v) / null_weight(v) > threshold`. Null weights default to one
/// (uniform null distribution).
pub fn llr_detect(
    scores: &VertexScores,
    null_weights: Option<&[f64]>,
    threshold: f64,
) -> Result<Vec<usize>> {
    if let Some(w) = null_weights {
        assert_eq!(w.len(), scores.len());
        if let Some((v, &bad)) = w.iter().enumerate().find(|(_, w)| !(**w > 0.0)) {
            return Err(Error::NonPositiveNullWeight {
                vertex: v,
                weight: bad,
            });
        }
    }
    Ok((0..scores.len())
        .filter(|&v| {
            let w = null_weights.map_or(1.0, |w| w[v]);
            scores.scores[v] / w > threshold
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Track;

    fn track(id: u64, src: usize, dst: usize, depart: f64, arrive: f64) -> Track {
        Track {
            id,
            src,
            dst,
            depart,
            arrive,
        }
    }

    /// Static graph stand-in: every edge is one track spanning the whole
    /// horizon midpoint with a single bin and a kernel so slow it is ~1.
    fn static_system(n: usize, edges: &[(usize, usize)], cues: &[Cue]) -> SpaceTimeSystem {
        let tracks: Vec<Track> = edges
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| track(i as u64, u, v, 0.5, 0.5))
            .collect();
        let tg = TrackGraph::new(n, 1.0, tracks).unwrap();
        let grid = TimeGrid::new(1.0, 1).unwrap();
        let kernel = ThreatKernelParams::uniform(n, 1e-12).unwrap();
        build_spacetime_system(&tg, &grid, &kernel, cues).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert_eq!(threat_kernel(3.0, 0.0), 1.0);
        assert!((threat_kernel(1.0, std::f64::consts::LN_2) - 0.5).abs() < 1e-15);
        for t in [-2.5, -0.1, 0.1, 2.5] {
            assert_eq!(threat_kernel(0.7, t), threat_kernel(0.7, -t));
        }
    }

    #[test]
    fn grid_bins_and_centers() {
        let g = TimeGrid::new(10.0, 4).unwrap();
        assert_eq!(g.width(), 2.5);
        assert_eq!(g.center(0), 1.25);
        assert_eq!(g.bin_of(0.0), 0);
        assert_eq!(g.bin_of(9.99), 3);
        assert_eq!(g.bin_of(10.0), 3);
    }

    #[test]
    fn single_track_block_structure() {
        let tg = TrackGraph::new(2, 10.0, vec![track(0, 0, 1, 2.0, 7.0)]).unwrap();
        let grid = TimeGrid::new(10.0, 5).unwrap();
        let kernel = ThreatKernelParams::uniform(2, 0.3).unwrap();
        let sys = build_spacetime_system(&tg, &grid, &kernel, &[]).unwrap();
        let a = sys.raw_adjacency();
        // Block (1,0): one column at bin(depart)=1, kernel centered at arrive.
        for k in 0..5 {
            for j in 0..5 {
                let got = a.get(5 + k, j);
                let want = if j == 1 {
                    threat_kernel(0.3, grid.center(k) - 7.0)
                } else {
                    0.0
                };
                assert!((got - want).abs() < 1e-15, "block(1,0) row {k} col {j}");
            }
        }
        // Block (0,1): one column at bin(arrive)=3, kernel centered at depart.
        for k in 0..5 {
            for j in 0..5 {
                let got = a.get(k, 5 + j);
                let want = if j == 3 {
                    threat_kernel(0.3, grid.center(k) - 2.0)
                } else {
                    0.0
                };
                assert!((got - want).abs() < 1e-15, "block(0,1) row {k} col {j}");
            }
        }
        assert_eq!(sys.weights(), &[1, 1]);
    }

    #[test]
    fn no_tracks_zero_matrix() {
        let tg = TrackGraph::new(3, 1.0, vec![]).unwrap();
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let kernel = ThreatKernelParams::uniform(3, 1.0).unwrap();
        let sys = build_spacetime_system(&tg, &grid, &kernel, &[]).unwrap();
        assert_eq!(sys.raw_adjacency().nnz(), 0);
    }

    #[test]
    fn duplicate_tracks_double_block_values() {
        let grid = TimeGrid::new(10.0, 4).unwrap();
        let kernel = ThreatKernelParams::uniform(2, 0.2).unwrap();
        let one = build_spacetime_system(
            &TrackGraph::new(2, 10.0, vec![track(0, 0, 1, 1.0, 6.0)]).unwrap(),
            &grid,
            &kernel,
            &[],
        )
        .unwrap();
        let two = build_spacetime_system(
            &TrackGraph::new(
                2,
                10.0,
                vec![track(0, 0, 1, 1.0, 6.0), track(1, 0, 1, 1.0, 6.0)],
            )
            .unwrap(),
            &grid,
            &kernel,
            &[],
        )
        .unwrap();
        for (r, c, v) in one.raw_adjacency().triplets() {
            assert!((two.raw_adjacency().get(r, c) - 2.0 * v).abs() < 1e-15);
        }
    }

    #[test]
    fn cue_on_unknown_vertex_rejected() {
        let tg = TrackGraph::new(2, 1.0, vec![]).unwrap();
        let grid = TimeGrid::new(1.0, 2).unwrap();
        let kernel = ThreatKernelParams::uniform(2, 1.0).unwrap();
        let err = build_spacetime_system(
            &tg,
            &grid,
            &kernel,
            &[Cue {
                vertex: 5,
                time: 0.5,
                value: 1.0,
            }],
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnknownVertex { vertex: 5, n: 2 }));
    }

    #[test]
    fn all_ones_boundary_fills_connected_interior() {
        // Triangle, cue on vertex 0 with value 1 everywhere: L 1 = 0 forces
        // the interior to 1.
        let sys = static_system(
            3,
            &[(0, 1), (1, 2), (0, 2)],
            &[Cue {
                vertex: 0,
                time: 0.5,
                value: 1.0,
            }],
        );
        let ones = vec![1.0; sys.boundary().len()];
        let threat = harmonic_solve(&sys, &ones, 1e-12, 1000).unwrap();
        for v in 0..3 {
            assert!((threat.get(v, 0) - 1.0).abs() < 1e-9, "vertex {v}");
        }
    }

    #[test]
    fn static_p3_midpoint() {
        let sys = static_system(
            3,
            &[(0, 1), (1, 2)],
            &[
                Cue {
                    vertex: 0,
                    time: 0.5,
                    value: 1.0,
                },
                Cue {
                    vertex: 2,
                    time: 0.5,
                    value: 0.0,
                },
            ],
        );
        // Boundary values: vertex 0 -> 1, vertex 2 -> 0.
        let bv: Vec<f64> = sys
            .boundary()
            .iter()
            .map(|&i| if sys.vertex_of(i) == 0 { 1.0 } else { 0.0 })
            .collect();
        let threat = harmonic_solve(&sys, &bv, 1e-12, 1000).unwrap();
        assert!((threat.get(1, 0) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn static_four_cycle_midpoints() {
        let sys = static_system(
            4,
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
            &[
                Cue {
                    vertex: 0,
                    time: 0.5,
                    value: 1.0,
                },
                Cue {
                    vertex: 2,
                    time: 0.5,
                    value: 0.0,
                },
            ],
        );
        let bv: Vec<f64> = sys
            .boundary()
            .iter()
            .map(|&i| if sys.vertex_of(i) == 0 { 1.0 } else { 0.0 })
            .collect();
        let threat = harmonic_solve(&sys, &bv, 1e-12, 1000).unwrap();
        assert!((threat.get(1, 0) - 0.5).abs() < 1e-10);
        assert!((threat.get(3, 0) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn unreachable_interior_gets_zero() {
        // Component {0,1} cued; component {2,3} disconnected from it.
        let sys = static_system(
            4,
            &[(0, 1), (2, 3)],
            &[Cue {
                vertex: 0,
                time: 0.5,
                value: 1.0,
            }],
        );
        let bv = vec![1.0; sys.boundary().len()];
        let threat = harmonic_solve(&sys, &bv, 1e-12, 1000).unwrap();
        assert!((threat.get(1, 0) - 1.0).abs() < 1e-10);
        assert_eq!(threat.get(2, 0), 0.0);
        assert_eq!(threat.get(3, 0), 0.0);
    }

    #[test]
    fn boundary_scaling_scales_interior() {
        let sys = static_system(
            4,
            &[(0, 1), (1, 2), (2, 3)],
            &[Cue {
                vertex: 0,
                time: 0.5,
                value: 1.0,
            }],
        );
        let bv = vec![0.8; sys.boundary().len()];
        let full = harmonic_solve(&sys, &bv, 1e-13, 1000).unwrap();
        let scaled_bv: Vec<f64> = bv.iter().map(|v| v * 0.5).collect();
        let scaled = harmonic_solve(&sys, &scaled_bv, 1e-13, 1000).unwrap();
        for i in 0..full.values.len() {
            assert!((scaled.values[i] - 0.5 * full.values[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn cued_vertex_scores_one() {
        let tg = TrackGraph::new(2, 10.0, vec![track(0, 0, 1, 2.0, 3.0)]).unwrap();
        let cues = [Cue {
            vertex: 0,
            time: 2.0,
            value: 1.0,
        }];
        let scores = sttp_scores(&tg, &cues, &SttpOptions::default()).unwrap();
        assert_eq!(scores.scores[0], 1.0);
        assert_eq!(scores.method, ScoreMethod::Sttp);
    }

    #[test]
    fn trackless_vertex_scores_zero() {
        let tg = TrackGraph::new(3, 10.0, vec![track(0, 0, 1, 2.0, 3.0)]).unwrap();
        let cues = [Cue {
            vertex: 0,
            time: 2.0,
            value: 1.0,
        }];
        let scores = sttp_scores(&tg, &cues, &SttpOptions::default()).unwrap();
        assert_eq!(scores.scores[2], 0.0);
    }

    #[test]
    fn two_vertex_track_from_cue_scores_near_one() {
        // Cue at departure time; single track to vertex 1 with w(1) = 1: the
        // arrival bin reads the full cue value through the kernel at zero
        // offset from the arrival time.
        let tg = TrackGraph::new(2, 16.0, vec![track(0, 0, 1, 4.0, 9.0)]).unwrap();
        let cues = [Cue {
            vertex: 0,
            time: 4.0,
            value: 1.0,
        }];
        let opts = SttpOptions {
            bins: 16,
            lambda: Some(0.5),
            ..Default::default()
        };
        let scores = sttp_scores(&tg, &cues, &opts).unwrap();
        // Arrival bin center is 9.5 while the arrival is at 9.0: score is
        // K(0.5) times the boundary value at the departure bin (exactly 1).
        let want = threat_kernel(0.5, 9.5 - 9.0);
        assert!((scores.scores[1] - want).abs() < 1e-10, "{}", scores.scores[1]);
    }

    #[test]
    fn determinism_bit_for_bit() {
        let tg = TrackGraph::new(
            4,
            20.0,
            vec![
                track(0, 0, 1, 1.0, 3.0),
                track(1, 1, 2, 4.0, 6.0),
                track(2, 2, 3, 7.0, 9.0),
                track(3, 0, 3, 2.0, 11.0),
            ],
        )
        .unwrap();
        let cues = [Cue {
            vertex: 0,
            time: 1.0,
            value: 1.0,
        }];
        let a = sttp_scores(&tg, &cues, &SttpOptions::default()).unwrap();
        let b = sttp_scores(&tg, &cues, &SttpOptions::default()).unwrap();
        assert_eq!(a.scores, b.scores);
    }

    #[test]
    fn llr_detect_thresholds() {
        let scores = VertexScores::new(vec![0.9, 0.2, 0.5], ScoreMethod::Sttp);
        assert_eq!(
            llr_detect(&scores, None, f64::NEG_INFINITY).unwrap(),
            vec![0, 1, 2]
        );
        assert_eq!(llr_detect(&scores, None, f64::INFINITY).unwrap(), Vec::<usize>::new());
        assert_eq!(llr_detect(&scores, None, 0.4).unwrap(), vec![0, 2]);
    }

    #[test]
    fn llr_detect_weight_scale_invariance() {
        let scores = VertexScores::new(vec![0.9, 0.2, 0.5], ScoreMethod::Sttp);
        let w1 = vec![1.0, 1.0, 1.0];
        let w2 = vec![2.0, 2.0, 2.0];
        let a = llr_detect(&scores, Some(&w1), 0.4).unwrap();
        let b = llr_detect(&scores, Some(&w2), 0.2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn llr_detect_rejects_nonpositive_weight() {
        let scores = VertexScores::new(vec![0.9, 0.2], ScoreMethod::Sttp);
        let err = llr_detect(&scores, Some(&[1.0, 0.0]), 0.5).unwrap_err();
        assert!(matches!(err, Error::NonPositiveNullWeight { vertex: 1, .. }));
    }
}
