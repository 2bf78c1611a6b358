//! Spectral network detection: Fiedler-vector detection on the Kirchhoff
//! matrix and community detection on Newman's modularity matrix.
//!
//! Eigenpairs come from a two-path solver: a cyclic Jacobi decomposition for
//! small dense problems and shifted orthogonal iteration with Rayleigh-Ritz
//! extraction for larger sparse ones. The iterative path falls back to the
//! dense path (up to `dense_fallback`) when it stalls.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::{MatrixRole, SparseMatrix};

/// An eigenvalue with its unit-norm eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Which detector produced a score vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreMethod {
    Fiedler,
    Modularity,
    Sttp,
}

impl ScoreMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreMethod::Fiedler => "fiedler",
            ScoreMethod::Modularity => "modularity",
            ScoreMethod::Sttp => "sttp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fiedler" => Some(ScoreMethod::Fiedler),
            "modularity" => Some(ScoreMethod::Modularity),
            "sttp" => Some(ScoreMethod::Sttp),
            _ => None,
        }
    }
}

/// Per-vertex real detection scores, the common currency of the ROC harness.
#[derive(Debug, Clone)]
pub struct VertexScores {
    pub scores: Vec<f64>,
    pub method: ScoreMethod,
}

impl VertexScores {
    pub fn new(scores: Vec<f64>, method: ScoreMethod) -> Self {
        debug_assert!(scores.iter().all(|s| s.is_finite()));
        VertexScores { scores, method }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Eigensolver settings. `tol` is a residual bound relative to the matrix
/// infinity norm.
#[derive(Debug, Clone)]
pub struct EigenSolver {
    pub tol: f64,
    pub max_iter: usize,
    /// Problems of order <= this go straight to the dense Jacobi path.
    pub dense_cutoff: usize,
    /// On iterative non-convergence, retry dense when order <= this.
    pub dense_fallback: usize,
}

impl Default for EigenSolver {
    fn default() -> Self {
        EigenSolver {
            tol: 1e-8,
            max_iter: 20_000,
            dense_cutoff: 64,
            dense_fallback: 512,
        }
    }
}

impl EigenSolver {
    pub fn with_tol(tol: f64) -> Self {
        EigenSolver {
            tol,
            ..Default::default()
        }
    }

    /// The k smallest eigenpairs of a symmetric matrix, values ascending.
    pub fn smallest(&self, m: &SparseMatrix, k: usize) -> Result<Vec<EigenPair>> {
        let n = m.rows();
        if k > n {
            return Err(Error::TooManyEigenpairs { k, n });
        }
        if k == 0 {
            return Ok(Vec::new());
        }
        let scale = m.norm_inf().max(1.0);
        let asym = m.max_asymmetry();
        if asym > 1e-10 * scale {
            return Err(Error::NotSymmetric {
                max_asymmetry: asym,
            });
        }
        if m.nnz() == 0 {
            // Zero matrix: eigenvalue 0 with the canonical basis.
            return Ok((0..k)
                .map(|i| {
                    let mut v = vec![0.0; n];
                    v[i] = 1.0;
                    EigenPair { value: 0.0, vector: v }
                })
                .collect());
        }
        if n <= self.dense_cutoff {
            return Ok(self.dense_smallest(m, k));
        }
        match self.iterate_smallest(m, k) {
            Ok(pairs) => Ok(pairs),
            Err(e) if n <= self.dense_fallback => {
                log::warn!("iterative eigensolver stalled ({e}); using dense fallback");
                Ok(self.dense_smallest(m, k))
            }
            Err(e) => Err(e),
        }
    }

    /// The k largest eigenpairs of a symmetric matrix, values descending.
    pub fn largest(&self, m: &SparseMatrix, k: usize) -> Result<Vec<EigenPair>> {
        let negated: Vec<_> = m.triplets().map(|(r, c, v)| (r, c, -v)).collect();
        let neg = SparseMatrix::from_triplets(m.rows(), m.cols(), negated, m.role())
            .expect("negation preserves validity");
        let mut pairs = self.smallest(&neg, k)?;
        for p in &mut pairs {
            p.value = -p.value;
        }
        Ok(pairs)
    }

    fn dense_smallest(&self, m: &SparseMatrix, k: usize) -> Vec<EigenPair> {
        let n = m.rows();
        let mut a = vec![0.0; n * n];
        for (r, c, v) in m.triplets() {
            a[r * n + c] = v;
        }
        let (mut vals, vecs) = jacobi_eigh(&mut a, n);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        order.truncate(k);
        order
            .into_iter()
            .map(|j| {
                let mut v: Vec<f64> = (0..n).map(|i| vecs[i * n + j]).collect();
                normalize(&mut v);
                EigenPair {
                    value: std::mem::take(&mut vals[j]),
                    vector: v,
                }
            })
            .collect()
    }

    /// Orthogonal iteration on the Gershgorin-shifted operator cI - M, whose
    /// dominant eigenpairs are the smallest of M. Rayleigh-Ritz extraction
    /// deflates converged directions through the block.
    fn iterate_smallest(&self, m: &SparseMatrix, k: usize) -> Result<Vec<EigenPair>> {
        let n = m.rows();
        let scale = m.norm_inf().max(1.0);
        // Gershgorin upper bound on eigenvalues of M.
        let shift = (0..n)
            .map(|r| {
                let (cols, vals) = m.row(r);
                let diag = m.get(r, r);
                diag + cols
                    .iter()
                    .zip(vals)
                    .filter(|(&c, _)| c != r)
                    .map(|(_, v)| v.abs())
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);

        let block = (k + 4).min(n);
        let mut q = vec![0.0; n * block];
        for j in 0..block {
            for i in 0..n {
                q[i * block + j] = hash_unit(i as u64, j as u64);
            }
        }
        orthonormalize(&mut q, n, block);

        let apply = |x: &[f64], y: &mut [f64]| {
            m.matvec(x, y);
            for i in 0..n {
                y[i] = shift * x[i] - y[i];
            }
        };

        let mut z = vec![0.0; n * block];
        let mut xcol = vec![0.0; n];
        let mut ycol = vec![0.0; n];
        let mut best_residual = f64::INFINITY;
        let mut iter = 0;
        while iter < self.max_iter {
            // Power step on the whole block.
            for _ in 0..10 {
                for j in 0..block {
                    for i in 0..n {
                        xcol[i] = q[i * block + j];
                    }
                    apply(&xcol, &mut ycol);
                    for i in 0..n {
                        z[i * block + j] = ycol[i];
                    }
                }
                std::mem::swap(&mut q, &mut z);
                orthonormalize(&mut q, n, block);
                iter += 10;
            }

            // Rayleigh-Ritz: project, decompose the small block, rotate.
            let mut bq = vec![0.0; n * block];
            for j in 0..block {
                for i in 0..n {
                    xcol[i] = q[i * block + j];
                }
                apply(&xcol, &mut ycol);
                for i in 0..n {
                    bq[i * block + j] = ycol[i];
                }
            }
            let mut s = vec![0.0; block * block];
            for a in 0..block {
                for b in 0..block {
                    let mut acc = 0.0;
                    for i in 0..n {
                        acc += q[i * block + a] * bq[i * block + b];
                    }
                    s[a * block + b] = acc;
                }
            }
            // Symmetrize against roundoff before the dense decomposition.
            for a in 0..block {
                for b in (a + 1)..block {
                    let avg = 0.5 * (s[a * block + b] + s[b * block + a]);
                    s[a * block + b] = avg;
                    s[b * block + a] = avg;
                }
            }
            let (theta, u) = jacobi_eigh(&mut s, block);
            // Descending in the shifted operator = ascending in M.
            let mut order: Vec<usize> = (0..block).collect();
            order.sort_by(|&a, &b| theta[b].total_cmp(&theta[a]));

            let mut ritz = vec![0.0; n * block];
            for (slot, &src) in order.iter().enumerate() {
                for i in 0..n {
                    let mut acc = 0.0;
                    for a in 0..block {
                        acc += q[i * block + a] * u[a * block + src];
                    }
                    ritz[i * block + slot] = acc;
                }
            }

            let mut worst = 0.0f64;
            for slot in 0..k {
                for i in 0..n {
                    xcol[i] = ritz[i * block + slot];
                }
                normalize(&mut xcol);
                apply(&xcol, &mut ycol);
                let th = theta[order[slot]];
                let mut res = 0.0;
                for i in 0..n {
                    let d = ycol[i] - th * xcol[i];
                    res += d * d;
                }
                worst = worst.max(res.sqrt());
            }
            best_residual = best_residual.min(worst);

            if worst <= self.tol * scale {
                let mut out = Vec::with_capacity(k);
                for slot in 0..k {
                    let mut v: Vec<f64> = (0..n).map(|i| ritz[i * block + slot]).collect();
                    normalize(&mut v);
                    out.push(EigenPair {
                        value: shift - theta[order[slot]],
                        vector: v,
                    });
                }
                out.sort_by(|a, b| a.value.total_cmp(&b.value));
                return Ok(out);
            }
            q.copy_from_slice(&ritz);
        }
        Err(Error::EigenNoConvergence {
            iterations: self.max_iter,
            best_residual,
            tol: self.tol * scale,
        })
    }
}

/// The k smallest eigenpairs of a symmetric matrix at the given residual
/// tolerance, values ascending.
pub fn smallest_eigenpairs(m: &SparseMatrix, k: usize, tol: f64) -> Result<Vec<EigenPair>> {
    EigenSolver::with_tol(tol).smallest(m, k)
}

/// Second-smallest eigenpair of the Kirchhoff matrix (the algebraic
/// connectivity and its eigenvector), sign-fixed so the maximum-magnitude
/// entry is positive. Warns when the graph is disconnected, where the value
/// is zero and the vector does not discriminate.
pub fn fiedler(g: &Graph, tol: f64) -> Result<EigenPair> {
    let q = g.kirchhoff();
    let pairs = EigenSolver::with_tol(tol).smallest(&q, 2)?;
    let mut pair = pairs.into_iter().nth(1).expect("asked for two pairs");
    if pair.value.abs() <= 1e-9 * q.norm_inf().max(1.0) {
        log::warn!(
            "graph is disconnected (algebraic connectivity {:.3e}); Fiedler vector is not discriminative",
            pair.value
        );
    }
    fix_sign(&mut pair.vector);
    Ok(pair)
}

/// Vertices whose Fiedler-vector entry is at least `c`. For any nonpositive
/// threshold the induced subgraph is connected.
pub fn spectral_detect(g: &Graph, c: f64, tol: f64) -> Result<Vec<usize>> {
    if c > 0.0 {
        return Err(Error::PositiveThreshold { c });
    }
    let pair = fiedler(g, tol)?;
    // Entries exactly at the threshold carry solver noise well below 1e-12
    // on a unit-norm vector; count them as inside.
    Ok((0..g.order())
        .filter(|&v| pair.vector[v] >= c - 1e-12)
        .collect())
}

/// Newman modularity matrix M = A - d d^T / V, stored dense. Errors on
/// graphs without edges (zero volume).
pub fn modularity_matrix(g: &Graph) -> Result<SparseMatrix> {
    let n = g.order();
    let d: Vec<f64> = g.degrees().iter().map(|&x| x as f64).collect();
    let volume: f64 = d.iter().sum();
    if volume == 0.0 {
        return Err(Error::NoEdges);
    }
    let adj = g.adjacency();
    let mut trips = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let v = adj.get(i, j) - d[i] * d[j] / volume;
            if v != 0.0 {
                trips.push((i, j, v));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, trips, MatrixRole::ModularityDense)
}

/// Modularity community scores with solver metadata.
#[derive(Debug, Clone)]
pub struct ModularityScores {
    pub scores: VertexScores,
    pub eigenvalue: f64,
    /// Number of eigenvalues tied with the selected one; > 1 means the
    /// returned vector is an arbitrary member of the eigenspace.
    pub multiplicity: usize,
}

/// Principal-eigenvector community scores of the modularity matrix.
pub fn modularity_detect(g: &Graph, tol: f64) -> Result<ModularityScores> {
    modularity_detect_nth(g, 0, tol)
}

/// Community scores from the eigenvector of the (index+1)-th largest
/// modularity eigenvalue; index 0 is the principal eigenvector.
pub fn modularity_detect_nth(g: &Graph, index: usize, tol: f64) -> Result<ModularityScores> {
    let m = modularity_matrix(g)?;
    let n = g.order();
    let probe = (index + 3).min(n);
    let pairs = EigenSolver::with_tol(tol).largest(&m, probe)?;
    let selected = pairs
        .get(index)
        .ok_or(Error::TooManyEigenpairs { k: index + 1, n })?;
    let tie_tol = 1e-6 * m.norm_inf().max(1.0);
    let multiplicity = pairs
        .iter()
        .filter(|p| (p.value - selected.value).abs() <= tie_tol)
        .count();
    let mut vector = selected.vector.clone();
    fix_sign(&mut vector);
    Ok(ModularityScores {
        scores: VertexScores::new(vector, ScoreMethod::Modularity),
        eigenvalue: selected.value,
        multiplicity,
    })
}

/// Resolve eigenvector sign ambiguity: flip so the maximum-magnitude entry is
/// positive. Ties (within roundoff of the maximum) break toward the smallest
/// index so symmetric vectors get a stable representative.
pub fn fix_sign(v: &mut [f64]) {
    let max_abs = v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if max_abs == 0.0 {
        return;
    }
    let idx = v
        .iter()
        .position(|&x| x.abs() >= max_abs * (1.0 - 1e-9))
        .expect("some entry attains the maximum");
    if v[idx] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Deterministic pseudo-random value in [-0.5, 0.5) from an index pair
/// (splitmix64 finalizer); keeps the iterative path reproducible without an
/// RNG dependency.
fn hash_unit(i: u64, j: u64) -> f64 {
    let mut x = i.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(j ^ 0xd1b54a32d192ed03);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^= x >> 31;
    (x as f64 / u64::MAX as f64) - 0.5
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Columns that
/// collapse are replaced by fresh deterministic directions.
fn orthonormalize(q: &mut [f64], n: usize, block: usize) {
    for j in 0..block {
        for _pass in 0..2 {
            for p in 0..j {
                let mut dot = 0.0;
                for i in 0..n {
                    dot += q[i * block + p] * q[i * block + j];
                }
                for i in 0..n {
                    q[i * block + j] -= dot * q[i * block + p];
                }
            }
        }
        let mut norm = 0.0;
        for i in 0..n {
            norm += q[i * block + j] * q[i * block + j];
        }
        norm = norm.sqrt();
        if norm < 1e-12 {
            // Rank collapse: reseed this column and redo it.
            for i in 0..n {
                q[i * block + j] = hash_unit(i as u64, (j + block + 1) as u64);
            }
            for p in 0..j {
                let mut dot = 0.0;
                for i in 0..n {
                    dot += q[i * block + p] * q[i * block + j];
                }
                for i in 0..n {
                    q[i * block + j] -= dot * q[i * block + p];
                }
            }
            norm = 0.0;
            for i in 0..n {
                norm += q[i * block + j] * q[i * block + j];
            }
            norm = norm.sqrt().max(1e-300);
        }
        for i in 0..n {
            q[i * block + j] /= norm;
        }
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix stored row-major in
/// `a` (destroyed). Returns (eigenvalues, eigenvectors) with eigenvector j in
/// column j of the returned row-major matrix.
fn jacobi_eigh(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    if n == 0 {
        return (Vec::new(), v);
    }
    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = (1e-15 * frob).max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for i in 0..n {
                    let api = a[p * n + i];
                    let aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
                for i in 0..n {
                    let vip = v[i * n + p];
                    let viq = v[i * n + q];
                    v[i * n + p] = c * vip - s * viq;
                    v[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| a[i * n + i]).collect();
    (vals, v)
}
