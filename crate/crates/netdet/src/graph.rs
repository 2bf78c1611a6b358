//! Static simple graphs, timestamped track graphs, and the structural
//! matrices built from them: adjacency, degree, incidence, and the three
//! Laplacians.
//!
//! Vertices are 0-indexed integers `0..n`. Simple graphs are undirected with
//! no self-loops and no duplicate edges; directed multigraph track data lives
//! in [`TrackGraph`].

use crate::error::{Error, Result};
use crate::matrix::{MatrixRole, SparseMatrix};

/// Undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    // Normalized (u < v), sorted, deduplicated.
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Build a simple graph from an edge list. Duplicate edges collapse
    /// (set semantics); self-loops and out-of-range endpoints are rejected
    /// with the offending edge.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidEdge {
                    u,
                    v,
                    n,
                    reason: "self-loop",
                });
            }
            if u >= n || v >= n {
                return Err(Error::InvalidEdge {
                    u,
                    v,
                    n,
                    reason: "vertex index out of range",
                });
            }
            norm.push((u.min(v), u.max(v)));
        }
        norm.sort_unstable();
        norm.dedup();
        Ok(Graph { n, edges: norm })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    /// Edges as normalized (u, v) pairs with u < v, ascending.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.n];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Symmetric {0,1} adjacency matrix with zero diagonal.
    pub fn adjacency(&self) -> SparseMatrix {
        let trips = self
            .edges
            .iter()
            .flat_map(|&(u, v)| [(u, v, 1.0), (v, u, 1.0)]);
        SparseMatrix::from_triplets(self.n, self.n, trips, MatrixRole::Adjacency)
            .expect("valid graph yields valid adjacency")
    }

    /// Diagonal matrix of vertex degrees.
    pub fn degree_matrix(&self) -> SparseMatrix {
        let trips = self
            .degrees()
            .into_iter()
            .enumerate()
            .filter(|&(_, d)| d > 0)
            .map(|(i, d)| (i, i, d as f64));
        SparseMatrix::from_triplets(self.n, self.n, trips, MatrixRole::Degree)
            .expect("valid graph yields valid degree matrix")
    }

    /// Oriented incidence matrix: column e has -1 at the initial vertex of
    /// edge e and +1 at its terminal vertex. The orientation must cover every
    /// edge of the graph.
    pub fn incidence(&self, orientation: &Orientation) -> Result<SparseMatrix> {
        let mut trips = Vec::with_capacity(2 * self.edges.len());
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            let (init, term) = orientation.of(u, v)?;
            trips.push((init, e, -1.0));
            trips.push((term, e, 1.0));
        }
        SparseMatrix::from_triplets(self.n, self.edges.len(), trips, MatrixRole::Incidence)
    }

    /// Kirchhoff (unnormalized Laplacian) matrix Q = D - A.
    pub fn kirchhoff(&self) -> SparseMatrix {
        let d = self.degrees();
        let mut trips: Vec<(usize, usize, f64)> = d
            .iter()
            .enumerate()
            .filter(|&(_, &deg)| deg > 0)
            .map(|(i, &deg)| (i, i, deg as f64))
            .collect();
        for &(u, v) in &self.edges {
            trips.push((u, v, -1.0));
            trips.push((v, u, -1.0));
        }
        SparseMatrix::from_triplets(self.n, self.n, trips, MatrixRole::Kirchhoff)
            .expect("valid graph yields valid Kirchhoff matrix")
    }

    /// Normalized Laplacian L = I - D^{-1/2} A D^{-1/2}.
    ///
    /// Isolated vertices have no degree to normalize by; their rows and
    /// columns are identity rows.
    pub fn normalized_laplacian(&self) -> SparseMatrix {
        let d = self.degrees();
        let inv_sqrt: Vec<f64> = d
            .iter()
            .map(|&deg| if deg > 0 { 1.0 / (deg as f64).sqrt() } else { 0.0 })
            .collect();
        let mut trips: Vec<(usize, usize, f64)> = (0..self.n).map(|i| (i, i, 1.0)).collect();
        for &(u, v) in &self.edges {
            let w = -inv_sqrt[u] * inv_sqrt[v];
            trips.push((u, v, w));
            trips.push((v, u, w));
        }
        SparseMatrix::from_triplets(self.n, self.n, trips, MatrixRole::Laplacian)
            .expect("valid graph yields valid normalized Laplacian")
    }

    /// Asymmetric (random-walk) Laplacian I - D^{-1} A, equal to D^{-1} Q on
    /// non-isolated vertices. Isolated vertices get identity rows.
    pub fn asymmetric_laplacian(&self) -> SparseMatrix {
        let d = self.degrees();
        let mut trips: Vec<(usize, usize, f64)> = (0..self.n).map(|i| (i, i, 1.0)).collect();
        for &(u, v) in &self.edges {
            trips.push((u, v, -1.0 / d[u] as f64));
            trips.push((v, u, -1.0 / d[v] as f64));
        }
        SparseMatrix::from_triplets(self.n, self.n, trips, MatrixRole::AsymLaplacian)
            .expect("valid graph yields valid asymmetric Laplacian")
    }

    /// Partition of the vertex set by reachability. Components are sorted by
    /// their smallest vertex; vertices within a component are ascending.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let adj = self.neighbors();
        let mut seen = vec![false; self.n];
        let mut parts = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            parts.push(comp);
        }
        parts
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.connected_components().len() == 1
    }

    /// Graph diameter: longest shortest path over all vertex pairs.
    /// Returns None for disconnected or empty graphs.
    pub fn diameter(&self) -> Option<usize> {
        if self.n == 0 || !self.is_connected() {
            return None;
        }
        let adj = self.neighbors();
        let mut best = 0usize;
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        for s in 0..self.n {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[s] = 0;
            queue.clear();
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        best = best.max(dist[w]);
                        queue.push_back(w);
                    }
                }
            }
        }
        Some(best)
    }
}

/// Per-edge orientation: an ordered (initial, terminal) pair whose underlying
/// unordered pair must be an edge of the graph it is applied to.
#[derive(Debug, Clone, Default)]
pub struct Orientation {
    // Keyed by normalized (min, max); value true when oriented min -> max.
    directed: std::collections::BTreeMap<(usize, usize), bool>,
}

impl Orientation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Orient the edge {init, term} from `init` to `term`.
    pub fn orient(&mut self, init: usize, term: usize) {
        let key = (init.min(term), init.max(term));
        self.directed.insert(key, init < term);
    }

    /// Build from ordered pairs.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Self {
        let mut o = Self::new();
        for &(init, term) in pairs {
            o.orient(init, term);
        }
        o
    }

    /// Every edge oriented from its smaller to its larger endpoint.
    pub fn lexicographic(graph: &Graph) -> Self {
        Self::from_pairs(graph.edges())
    }

    /// (initial, terminal) for the edge {u, v}; errors when uncovered.
    pub fn of(&self, u: usize, v: usize) -> Result<(usize, usize)> {
        let key = (u.min(v), u.max(v));
        match self.directed.get(&key) {
            Some(true) => Ok(key),
            Some(false) => Ok((key.1, key.0)),
            None => Err(Error::OrientationMissingEdge { u, v }),
        }
    }
}

/// One timestamped track: a directed edge that departs `src` at `depart`
/// seconds and arrives at `dst` at `arrive` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    pub src: usize,
    pub dst: usize,
    pub depart: f64,
    pub arrive: f64,
}

/// Directed multigraph of timestamped tracks over a declared horizon [0, T].
#[derive(Debug, Clone, PartialEq)]
pub struct TrackGraph {
    n: usize,
    horizon: f64,
    tracks: Vec<Track>,
}

impl TrackGraph {
    pub fn new(n: usize, horizon: f64, tracks: Vec<Track>) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::InvalidParams {
                name: "horizon",
                reason: format!("must be positive, got {horizon}"),
            });
        }
        for t in &tracks {
            if t.src == t.dst {
                return Err(Error::InvalidTrack {
                    id: t.id,
                    reason: format!("self-loop at vertex {}", t.src),
                });
            }
            if t.src >= n || t.dst >= n {
                return Err(Error::InvalidTrack {
                    id: t.id,
                    reason: format!("endpoint out of range for {n} vertices"),
                });
            }
            if !(t.depart <= t.arrive) {
                return Err(Error::InvalidTrack {
                    id: t.id,
                    reason: format!("departure {} after arrival {}", t.depart, t.arrive),
                });
            }
            if t.depart < 0.0 || t.arrive > horizon {
                return Err(Error::InvalidTrack {
                    id: t.id,
                    reason: format!(
                        "times [{}, {}] outside horizon [0, {horizon}]",
                        t.depart, t.arrive
                    ),
                });
            }
        }
        Ok(TrackGraph { n, horizon, tracks })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Number of tracks incident to each vertex (in either direction).
    pub fn incident_counts(&self) -> Vec<usize> {
        let mut w = vec![0usize; self.n];
        for t in &self.tracks {
            w[t.src] += 1;
            w[t.dst] += 1;
        }
        w
    }

    /// Collapse to the undirected simple graph with an edge wherever at least
    /// one track connects a vertex pair.
    pub fn to_static_graph(&self) -> Graph {
        let edges: Vec<(usize, usize)> = self.tracks.iter().map(|t| (t.src, t.dst)).collect();
        Graph::from_edges(self.n, &edges).expect("track endpoints already validated")
    }
}
