//! Generative covert-network stochastic blockmodel.
//!
//! Nodes draw a lifestyle (a profile over communities), a Dirichlet
//! membership vector, and a power-law expected degree. Each unordered pair
//! fixes the community each endpoint uses toward the other, activates through
//! a sparsity Bernoulli, and interacts a Poisson number of times at rate
//! `I * lambda_i lambda_j / sum(lambda) * B[a][b]`. Interactions attach to
//! community meeting times; endpoint timestamps get independent Gaussian
//! jitter. Ground truth marks nodes whose lifestyle is foreground.
//!
//! Every sampling stage draws from its own seeded stream, so changing the
//! temporal parameters never perturbs the spatial draws.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, Normal, Poisson};

use crate::error::{Error, Result};
use crate::graph::{Track, TrackGraph};

/// Parameters of the generative model.
#[derive(Debug, Clone)]
pub struct BlockmodelParams {
    /// Node count N.
    pub n: usize,
    /// Community count K.
    pub communities: usize,
    /// Lifestyle count L.
    pub lifestyles: usize,
    /// Lifestyle probabilities, length L, summing to one.
    pub phi: Vec<f64>,
    /// Dirichlet concentration rows, L x K; each row needs a positive entry.
    pub concentration: Vec<Vec<f64>>,
    /// Community interaction-rate matrix B, K x K, nonnegative.
    pub rates: Vec<Vec<f64>>,
    /// Sparsity probabilities S, K x K, in [0, 1].
    pub sparsity: Vec<Vec<f64>>,
    /// Power-law exponent for expected degrees, > 1.
    pub alpha: f64,
    /// Expected meeting-time counts per community, each >= 1.
    pub meeting_times: Vec<f64>,
    /// Standard deviation of endpoint timestamp jitter, seconds.
    pub jitter_sd: f64,
    /// Simulation horizon T, seconds.
    pub horizon: f64,
    /// Lifestyle indices whose nodes are foreground truth.
    pub foreground_lifestyles: Vec<usize>,
    /// Community indices considered foreground (excursion bookkeeping).
    pub foreground_communities: Vec<usize>,
    /// Redraw the meeting community per interaction instead of using the
    /// fixed per-pair assignment.
    pub per_interaction_redraw: bool,
}

impl BlockmodelParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |name: &'static str, reason: String| Err(Error::InvalidParams { name, reason });
        if self.phi.len() != self.lifestyles {
            return fail("phi", format!("length {} != L = {}", self.phi.len(), self.lifestyles));
        }
        if self.phi.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return fail("phi", "entries must lie in [0, 1]".into());
        }
        let total: f64 = self.phi.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return fail("phi", format!("sums to {total}, not 1"));
        }
        if self.concentration.len() != self.lifestyles {
            return fail("concentration", "row count != L".into());
        }
        for (l, row) in self.concentration.iter().enumerate() {
            if row.len() != self.communities {
                return fail("concentration", format!("row {l} length != K"));
            }
            if row.iter().any(|&x| x < 0.0) {
                return fail("concentration", format!("row {l} has a negative entry"));
            }
            if !row.iter().any(|&x| x > 0.0) {
                return fail("concentration", format!("row {l} has no positive entry"));
            }
        }
        if self.rates.len() != self.communities
            || self.rates.iter().any(|r| r.len() != self.communities)
        {
            return fail("rates", "must be K x K".into());
        }
        if self.sparsity.len() != self.communities
            || self.sparsity.iter().any(|r| r.len() != self.communities)
        {
            return fail("sparsity", "must be K x K".into());
        }
        if self.rates.iter().flatten().any(|&x| x < 0.0) {
            return fail("rates", "entries must be nonnegative".into());
        }
        if self
            .sparsity
            .iter()
            .flatten()
            .any(|&x| !(0.0..=1.0).contains(&x))
        {
            return fail("sparsity", "entries must lie in [0, 1]".into());
        }
        if !(self.alpha > 1.0) {
            return fail(
                "alpha",
                format!("power-law exponent must exceed 1, got {}", self.alpha),
            );
        }
        if self.meeting_times.len() != self.communities {
            return fail("meeting_times", "length != K".into());
        }
        if let Some(p) = self.meeting_times.iter().find(|p| !(**p >= 1.0)) {
            return fail("meeting_times", format!("expected counts must be >= 1, got {p}"));
        }
        if !(self.jitter_sd >= 0.0) {
            return fail("jitter_sd", format!("must be nonnegative, got {}", self.jitter_sd));
        }
        if !(self.horizon > 0.0) {
            return fail("horizon", format!("must be positive, got {}", self.horizon));
        }
        if self
            .foreground_lifestyles
            .iter()
            .any(|&l| l >= self.lifestyles)
        {
            return fail("foreground_lifestyles", "index out of range".into());
        }
        if self
            .foreground_communities
            .iter()
            .any(|&k| k >= self.communities)
        {
            return fail("foreground_communities", "index out of range".into());
        }
        // Connectivity guideline: community diagonals below log(N_k)/N_k
        // leave that community almost surely disconnected.
        for (k, &mass) in self.expected_community_sizes().iter().enumerate() {
            if mass >= 2.0 {
                let threshold = mass.ln() / mass;
                if self.sparsity[k][k] < threshold * (1.0 - 1e-9) {
                    log::warn!(
                        "sparsity[{k}][{k}] = {:.4} below connectivity threshold log(N_k)/N_k = {threshold:.4}",
                        self.sparsity[k][k]
                    );
                }
            }
        }
        Ok(())
    }

    /// Expected membership mass per community: N * sum_l phi_l * Xhat[l][k]
    /// with Xhat the row-normalized concentration.
    pub fn expected_community_sizes(&self) -> Vec<f64> {
        let mut mass = vec![0.0; self.communities];
        for (l, row) in self.concentration.iter().enumerate() {
            let total: f64 = row.iter().sum();
            if total <= 0.0 {
                continue;
            }
            for (k, &x) in row.iter().enumerate() {
                mass[k] += self.phi[l] * x / total;
            }
        }
        mass.iter_mut().for_each(|m| *m *= self.n as f64);
        mass
    }
}

/// One activated pair with its fixed community assignments and realized
/// interaction count.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivePair {
    /// Smaller endpoint.
    pub i: usize,
    /// Larger endpoint.
    pub j: usize,
    /// Community i uses toward j.
    pub z_ij: usize,
    /// Community j uses toward i.
    pub z_ji: usize,
    /// Interaction rate lambda_ij.
    pub rate: f64,
    /// Poisson-realized interaction count.
    pub interactions: usize,
}

/// A sampled network with its generative ground truth.
#[derive(Debug, Clone)]
pub struct GeneratedNetwork {
    pub tracks: TrackGraph,
    /// Lifestyle per node.
    pub lifestyles: Vec<usize>,
    /// Membership simplex vector per node.
    pub memberships: Vec<Vec<f64>>,
    /// Expected degree per node.
    pub expected_degrees: Vec<f64>,
    /// Activated pairs with their community assignments.
    pub active_pairs: Vec<ActivePair>,
    /// 1 for foreground nodes, 0 for background.
    pub labels: Vec<u8>,
}

impl GeneratedNetwork {
    pub fn foreground_nodes(&self) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == 1)
            .collect()
    }
}

// Stream ids per sampling stage.
const STREAM_LIFESTYLES: u64 = 0;
const STREAM_MEMBERSHIPS: u64 = 1;
const STREAM_PAIR_COMMUNITIES: u64 = 2;
const STREAM_DEGREES: u64 = 3;
const STREAM_SPARSITY: u64 = 4;
const STREAM_COUNTS: u64 = 5;
const STREAM_MEETINGS: u64 = 6;
const STREAM_ASSIGNMENT: u64 = 7;
const STREAM_JITTER: u64 = 8;
const STREAM_REDRAW: u64 = 9;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn categorical(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// I.i.d. categorical lifestyle draws from phi.
pub fn sample_lifestyles(phi: &[f64], n: usize, rng: &mut impl Rng) -> Result<Vec<usize>> {
    let total: f64 = phi.iter().sum();
    if phi.is_empty() || phi.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParams {
            name: "phi",
            reason: "not a probability distribution".into(),
        });
    }
    Ok((0..n).map(|_| categorical(phi, rng)).collect())
}

/// Dirichlet membership draw with the given concentration row. Zero entries
/// are structural zeros (no mass); the row must have a positive entry.
pub fn sample_membership(concentration: &[f64], rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !concentration.iter().any(|&c| c > 0.0) {
        return Err(Error::InvalidParams {
            name: "concentration",
            reason: "row has no positive entry".into(),
        });
    }
    // Dirichlet via normalized Gamma(alpha_k, 1) draws.
    let mut pi = vec![0.0; concentration.len()];
    let mut total = 0.0;
    for (k, &c) in concentration.iter().enumerate() {
        if c > 0.0 {
            let g = Gamma::new(c, 1.0).expect("positive shape");
            let x: f64 = g.sample(rng);
            pi[k] = x;
            total += x;
        }
    }
    if total <= 0.0 {
        // Vanishingly small concentrations can underflow every draw; fall
        // back to the normalized concentration itself.
        let csum: f64 = concentration.iter().sum();
        for (p, &c) in pi.iter_mut().zip(concentration) {
            *p = c / csum;
        }
    } else {
        pi.iter_mut().for_each(|p| *p /= total);
    }
    Ok(pi)
}

/// Fixed per-ordered-pair community assignments: one-hot categorical draws
/// from each endpoint's membership, held for the whole simulation.
pub fn sample_pair_communities(pi_i: &[f64], pi_j: &[f64], rng: &mut impl Rng) -> (usize, usize) {
    let z_ij = categorical(pi_i, rng);
    let z_ji = categorical(pi_j, rng);
    (z_ij, z_ji)
}

/// I.i.d. expected degrees from a truncated power law p(x) ~ x^{-alpha} on
/// [1, sqrt(N)], drawn by inverse CDF.
pub fn sample_degrees(alpha: f64, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidParams {
            name: "alpha",
            reason: format!("power-law exponent must exceed 1, got {alpha}"),
        });
    }
    let x_min: f64 = 1.0;
    let x_max: f64 = (n as f64).sqrt().max(x_min);
    let a = 1.0 - alpha;
    let lo = x_min.powf(a);
    let hi = x_max.powf(a);
    Ok((0..n)
        .map(|_| {
            let u = rng.random::<f64>();
            (lo + u * (hi - lo)).powf(1.0 / a)
        })
        .collect())
}

/// Interaction rate of a pair:
/// `I * lambda_i lambda_j / sum_lambda * B[z_ij][z_ji]`.
pub fn interaction_rate(
    active: bool,
    lambda_i: f64,
    lambda_j: f64,
    sum_lambda: f64,
    rates: &[Vec<f64>],
    z_ij: usize,
    z_ji: usize,
) -> f64 {
    if !active {
        return 0.0;
    }
    lambda_i * lambda_j / sum_lambda * rates[z_ij][z_ji]
}

/// One Bernoulli(S[a][b]) sparsity draw for a pair interacting through
/// communities a and b.
pub fn sample_sparsity_indicator(
    sparsity: &[Vec<f64>],
    z_ij: usize,
    z_ji: usize,
    rng: &mut impl Rng,
) -> bool {
    rng.random::<f64>() < sparsity[z_ij][z_ji]
}

/// Poisson-realized interaction count at the given rate.
pub fn sample_interaction_count(rate: f64, rng: &mut impl Rng) -> usize {
    if rate <= 0.0 {
        return 0;
    }
    let p = Poisson::new(rate).expect("positive rate");
    let x: f64 = p.sample(rng);
    x as usize
}

/// Meeting times for one community: `1 + Poisson(psi - 1)` times drawn
/// uniformly over [0, T].
pub fn sample_meeting_times(psi: f64, horizon: f64, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !(psi >= 1.0) {
        return Err(Error::InvalidParams {
            name: "meeting_times",
            reason: format!("expected count must be >= 1, got {psi}"),
        });
    }
    let extra = if psi > 1.0 {
        let p = Poisson::new(psi - 1.0).expect("positive rate");
        let x: f64 = p.sample(rng);
        x as usize
    } else {
        0
    };
    Ok((0..1 + extra)
        .map(|_| rng.random::<f64>() * horizon)
        .collect())
}

/// Sample a full network. Deterministic in `seed`; per-stage streams keep the
/// spatial draws identical across temporal-parameter excursions.
pub fn generate(params: &BlockmodelParams, seed: u64) -> Result<GeneratedNetwork> {
    params.validate()?;
    let n = params.n;

    let lifestyles = sample_lifestyles(&params.phi, n, &mut stream_rng(seed, STREAM_LIFESTYLES))?;

    let mut membership_rng = stream_rng(seed, STREAM_MEMBERSHIPS);
    let mut memberships = Vec::with_capacity(n);
    for &l in &lifestyles {
        memberships.push(sample_membership(
            &params.concentration[l],
            &mut membership_rng,
        )?);
    }

    let expected_degrees = sample_degrees(params.alpha, n, &mut stream_rng(seed, STREAM_DEGREES))?;
    let sum_lambda: f64 = expected_degrees.iter().sum();

    // Fixed per-ordered-pair communities, lexicographic pair order.
    let mut pair_rng = stream_rng(seed, STREAM_PAIR_COMMUNITIES);
    let mut sparsity_rng = stream_rng(seed, STREAM_SPARSITY);
    let mut count_rng = stream_rng(seed, STREAM_COUNTS);
    let mut active_pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (z_ij, z_ji) =
                sample_pair_communities(&memberships[i], &memberships[j], &mut pair_rng);
            // The sparsity indicator matrix has independent entries at the
            // (a, b) and (b, a) coordinates of a pair; the pair is active
            // when either fires.
            let forward =
                sample_sparsity_indicator(&params.sparsity, z_ij, z_ji, &mut sparsity_rng);
            let backward =
                sample_sparsity_indicator(&params.sparsity, z_ji, z_ij, &mut sparsity_rng);
            if !(forward || backward) {
                continue;
            }
            let rate = interaction_rate(
                true,
                expected_degrees[i],
                expected_degrees[j],
                sum_lambda,
                &params.rates,
                z_ij,
                z_ji,
            );
            let interactions = sample_interaction_count(rate, &mut count_rng);
            active_pairs.push(ActivePair {
                i,
                j,
                z_ij,
                z_ji,
                rate,
                interactions,
            });
        }
    }

    // Temporal model: community meeting times, then per-interaction meeting
    // assignment, direction, and endpoint jitter.
    let mut meeting_rng = stream_rng(seed, STREAM_MEETINGS);
    let mut meetings = Vec::with_capacity(params.communities);
    for k in 0..params.communities {
        meetings.push(sample_meeting_times(
            params.meeting_times[k],
            params.horizon,
            &mut meeting_rng,
        )?);
    }

    let mut assign_rng = stream_rng(seed, STREAM_ASSIGNMENT);
    let mut jitter_rng = stream_rng(seed, STREAM_JITTER);
    let mut redraw_rng = stream_rng(seed, STREAM_REDRAW);
    let jitter = Normal::new(0.0, params.jitter_sd).expect("nonnegative standard deviation");
    let mut tracks = Vec::new();
    for pair in &active_pairs {
        for _ in 0..pair.interactions {
            // Meetings happen in the community the smaller endpoint uses
            // toward the larger one.
            let community = if params.per_interaction_redraw {
                categorical(&memberships[pair.i], &mut redraw_rng)
            } else {
                pair.z_ij
            };
            let times = &meetings[community];
            let meeting = times[assign_rng.random_range(0..times.len())];
            let initiator_is_i = assign_rng.random::<bool>();
            let e1: f64 = jitter.sample(&mut jitter_rng);
            let e2: f64 = jitter.sample(&mut jitter_rng);
            let t1 = (meeting + e1).clamp(0.0, params.horizon);
            let t2 = (meeting + e2).clamp(0.0, params.horizon);
            let (src, dst) = if initiator_is_i {
                (pair.i, pair.j)
            } else {
                (pair.j, pair.i)
            };
            tracks.push(Track {
                id: tracks.len() as u64,
                src,
                dst,
                depart: t1.min(t2),
                arrive: t1.max(t2),
            });
        }
    }

    let labels: Vec<u8> = lifestyles
        .iter()
        .map(|l| u8::from(params.foreground_lifestyles.contains(l)))
        .collect();

    Ok(GeneratedNetwork {
        tracks: TrackGraph::new(n, params.horizon, tracks)?,
        lifestyles,
        memberships,
        expected_degrees,
        active_pairs,
        labels,
    })
}

/// Shape of the shipped baseline: the last community is the foreground
/// community and the last two lifestyles are foreground. Background
/// lifestyles put a power-law membership profile over the background
/// communities, peaked at a home community. One foreground lifestyle mixes
/// uniformly across background communities, the other concentrates on a small
/// subset. Numeric defaults are engineering choices, not published values.
#[derive(Debug, Clone)]
pub struct BaselineConfig {
    pub n: usize,
    pub communities: usize,
    pub lifestyles: usize,
    pub alpha: f64,
    /// Total lifestyle probability of the two foreground lifestyles.
    pub fg_mass: f64,
    /// Diagonal of the community rate matrix B.
    pub b_diag: f64,
    /// Off-diagonal B entries as a fraction of the diagonal.
    pub b_offdiag_ratio: f64,
    /// Diagonal sparsity scale: S_kk = s_scale * log(N_k)/N_k.
    pub s_scale: f64,
    /// Extra factor on the foreground community diagonal.
    pub s_fg_factor: f64,
    /// Off-diagonal sparsity as a fraction of the geometric-mean diagonal.
    pub s_offdiag_ratio: f64,
    /// Expected meeting counts for background communities.
    pub psi_bg: f64,
    /// Expected meeting counts for the foreground community.
    pub psi_fg: f64,
    /// Endpoint timestamp jitter; None derives horizon / 200.
    pub jitter_sd: Option<f64>,
    pub horizon: f64,
    /// Fraction of a foreground lifestyle's concentration on the foreground
    /// community (the rest spreads over background communities).
    pub fg_concentration: f64,
    /// Total Dirichlet concentration per lifestyle row.
    pub concentration_total: f64,
    pub per_interaction_redraw: bool,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            n: 256,
            communities: 10,
            lifestyles: 11,
            alpha: 2.5,
            fg_mass: 0.10,
            b_diag: 250.0,
            b_offdiag_ratio: 0.1,
            s_scale: 1.0,
            s_fg_factor: 1.0,
            s_offdiag_ratio: 0.25,
            psi_bg: 8.0,
            psi_fg: 1.5,
            jitter_sd: None,
            horizon: 1000.0,
            fg_concentration: 0.75,
            concentration_total: 4.0,
            per_interaction_redraw: false,
        }
    }
}

impl BaselineConfig {
    pub fn build(&self) -> Result<BlockmodelParams> {
        let fail = |name: &'static str, reason: String| Err(Error::InvalidParams { name, reason });
        let k = self.communities;
        let l = self.lifestyles;
        if k < 2 {
            return fail("model.k", "need at least two communities".into());
        }
        if l != k + 1 {
            return fail(
                "model.l",
                format!("baseline shape needs L = K + 1 lifestyles, got L = {l}, K = {k}"),
            );
        }
        let bg_communities = k - 1;
        let bg_lifestyles = l - 2;
        let fg_community = k - 1;

        // phi: background lifestyles share 1 - fg_mass; the two foreground
        // lifestyles split fg_mass.
        let mut phi = vec![(1.0 - self.fg_mass) / bg_lifestyles as f64; bg_lifestyles];
        phi.push(self.fg_mass / 2.0);
        phi.push(self.fg_mass / 2.0);

        // Background lifestyle concentrations: power-law profile over
        // background communities by circular distance from the home one.
        let mut concentration = Vec::with_capacity(l);
        for home in 0..bg_lifestyles {
            let mut row = vec![0.0; k];
            let mut total = 0.0;
            for (c, slot) in row.iter_mut().take(bg_communities).enumerate() {
                let raw = (home as i64 - c as i64).unsigned_abs() as usize % bg_communities;
                let d = raw.min(bg_communities - raw);
                let w = ((d + 1) as f64).powf(-2.5);
                *slot = w;
                total += w;
            }
            for slot in row.iter_mut().take(bg_communities) {
                *slot *= self.concentration_total / total;
            }
            concentration.push(row);
        }
        // Foreground lifestyle A: uniform across background communities.
        {
            let mut row = vec![0.0; k];
            row[fg_community] = self.fg_concentration * self.concentration_total;
            let rest = (1.0 - self.fg_concentration) * self.concentration_total;
            for slot in row.iter_mut().take(bg_communities) {
                *slot = rest / bg_communities as f64;
            }
            concentration.push(row);
        }
        // Foreground lifestyle B: concentrated on a small background subset.
        {
            let mut row = vec![0.0; k];
            row[fg_community] = self.fg_concentration * self.concentration_total;
            let rest = (1.0 - self.fg_concentration) * self.concentration_total;
            let subset = 2.min(bg_communities);
            for slot in row.iter_mut().take(subset) {
                *slot = rest / subset as f64;
            }
            concentration.push(row);
        }

        let mut rates = vec![vec![self.b_diag * self.b_offdiag_ratio; k]; k];
        for (d, row) in rates.iter_mut().enumerate() {
            row[d] = self.b_diag;
        }

        let mut params = BlockmodelParams {
            n: self.n,
            communities: k,
            lifestyles: l,
            phi,
            concentration,
            rates,
            sparsity: vec![vec![0.0; k]; k],
            alpha: self.alpha,
            meeting_times: {
                let mut psi = vec![self.psi_bg; k];
                psi[fg_community] = self.psi_fg;
                psi
            },
            jitter_sd: self.jitter_sd.unwrap_or(self.horizon / 200.0),
            horizon: self.horizon,
            foreground_lifestyles: vec![l - 2, l - 1],
            foreground_communities: vec![fg_community],
            per_interaction_redraw: self.per_interaction_redraw,
        };

        // Sparsity diagonals sit at s_scale times the connectivity threshold
        // of the expected community size; off-diagonals stay low.
        let sizes = params.expected_community_sizes();
        let diag = |mass: f64, scale: f64| -> f64 {
            if mass >= 2.0 {
                (scale * mass.ln() / mass).min(1.0)
            } else {
                (scale * 0.5).min(1.0)
            }
        };
        let mut sparsity = vec![vec![0.0; k]; k];
        for (a, row) in sparsity.iter_mut().enumerate() {
            let scale = if a == fg_community {
                self.s_scale * self.s_fg_factor
            } else {
                self.s_scale
            };
            row[a] = diag(sizes[a], scale);
        }
        for a in 0..k {
            for b in 0..k {
                if a != b {
                    sparsity[a][b] =
                        self.s_offdiag_ratio * (sparsity[a][a] * sparsity[b][b]).sqrt();
                }
            }
        }
        params.sparsity = sparsity;
        params.validate()?;
        Ok(params)
    }
}
