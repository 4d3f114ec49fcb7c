//! A single Bernoulli-Bernoulli Restricted Boltzmann Machine.
//!
//! The joint configuration `(v, h)` has energy
//! `E(v, h) = -Σ a_i v_i - Σ b_j h_j - Σ_ij v_i h_j w_ij`, which gives the
//! factorized conditionals `p(h_j = 1 | v) = σ(b_j + Σ_i v_i w_ij)` and
//! `p(v_i = 1 | h) = σ(a_i + Σ_j h_j w_ij)`.
//!
//! Learning is contrastive divergence. The exact enumeration routines
//! ([`Rbm::exact_distribution`], [`Rbm::exact_gradient`]) exist to check the
//! sampled machinery on machines small enough to enumerate.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::numerics::{affine, bernoulli_sample, gauss_init, sigmoid, Matrix, RngState};
use crate::options::{Objective, TrainOptions, TrainTrace};

/// Standard deviation of the Gaussian used for fresh weights.
pub const DEFAULT_INIT_STDDEV: f64 = 0.2;

/// Largest `m + n` accepted by the enumeration oracles.
pub const ENUMERATION_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Rbm {
    /// `m x n` edge weights `w_ij`.
    weights: Matrix,
    /// Visible biases `a_i`.
    visible_bias: Vec<f64>,
    /// Hidden biases `b_j`.
    hidden_bias: Vec<f64>,
}

/// How the visible layer is reconstructed inside the CD chain.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Reconstruction {
    /// Visible reconstructions are the probabilities `p(v | h)`.
    #[default]
    MeanField,
    /// Visible reconstructions are binary samples, making the chain a true
    /// block Gibbs sampler whose CD-k estimate tends to the likelihood gradient.
    Sampled,
}

/// Parameter increments before scaling by the learning rate.
#[derive(Clone, Debug, PartialEq)]
pub struct CdGradients {
    pub weights: Matrix,
    pub visible_bias: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    /// Gibbs steps used; 0 marks an exact gradient.
    pub k: usize,
    pub batch_size: usize,
}

impl CdGradients {
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        CdGradients {
            weights: Matrix::zeros(n_visible, n_hidden),
            visible_bias: vec![0.0; n_visible],
            hidden_bias: vec![0.0; n_hidden],
            k: 0,
            batch_size: 0,
        }
    }

    /// Entrywise sum.
    pub fn add(&self, other: &CdGradients) -> Result<CdGradients> {
        let mut out = self.clone();
        out.weights.add_scaled(&other.weights, 1.0)?;
        if self.visible_bias.len() != other.visible_bias.len()
            || self.hidden_bias.len() != other.hidden_bias.len()
        {
            return Err(Error::shape(
                "gradient sum",
                "left",
                self.weights.shape(),
                "right",
                other.weights.shape(),
            ));
        }
        for (a, b) in out.visible_bias.iter_mut().zip(&other.visible_bias) {
            *a += b;
        }
        for (a, b) in out.hidden_bias.iter_mut().zip(&other.hidden_bias) {
            *a += b;
        }
        out.batch_size += other.batch_size;
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.weights.as_slice().iter().all(|&v| v == 0.0)
            && self.visible_bias.iter().all(|&v| v == 0.0)
            && self.hidden_bias.iter().all(|&v| v == 0.0)
    }
}

impl Rbm {
    pub fn new(weights: Matrix, visible_bias: Vec<f64>, hidden_bias: Vec<f64>) -> Result<Self> {
        let (m, n) = weights.shape();
        if m == 0 || n == 0 {
            return Err(Error::domain("an RBM needs at least one visible and one hidden unit"));
        }
        if visible_bias.len() != m {
            return Err(Error::shape(
                "Rbm::new",
                "weights",
                (m, n),
                "visible bias",
                (1, visible_bias.len()),
            ));
        }
        if hidden_bias.len() != n {
            return Err(Error::shape(
                "Rbm::new",
                "weights",
                (m, n),
                "hidden bias",
                (1, hidden_bias.len()),
            ));
        }
        let finite = weights.is_finite()
            && visible_bias.iter().chain(&hidden_bias).all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("RBM parameters must be finite"));
        }
        Ok(Rbm {
            weights,
            visible_bias,
            hidden_bias,
        })
    }

    /// All-zero parameters.
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Result<Self> {
        Self::new(
            Matrix::zeros(n_visible, n_hidden),
            vec![0.0; n_visible],
            vec![0.0; n_hidden],
        )
    }

    /// Gaussian weights with the given standard deviation and zero biases.
    pub fn random(n_visible: usize, n_hidden: usize, stddev: f64, rng: &mut RngState) -> Result<Self> {
        let weights = gauss_init(n_visible, n_hidden, stddev, rng)?;
        Self::new(weights, vec![0.0; n_visible], vec![0.0; n_hidden])
    }

    pub fn n_visible(&self) -> usize {
        self.weights.rows()
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn visible_bias(&self) -> &[f64] {
        &self.visible_bias
    }

    pub fn hidden_bias(&self) -> &[f64] {
        &self.hidden_bias
    }

    pub(crate) fn set_top(&mut self, weights: Matrix, hidden_bias: Vec<f64>) {
        debug_assert_eq!(weights.shape(), self.weights.shape());
        self.weights = weights;
        self.hidden_bias = hidden_bias;
    }

    pub(crate) fn params_mut(&mut self) -> (&mut Matrix, &mut Vec<f64>) {
        (&mut self.weights, &mut self.hidden_bias)
    }

    pub fn energy(&self, v: &[f64], h: &[f64]) -> Result<f64> {
        if v.len() != self.n_visible() || h.len() != self.n_hidden() {
            return Err(Error::shape(
                "energy",
                "(v, h)",
                (v.len(), h.len()),
                "rbm",
                self.weights.shape(),
            ));
        }
        let mut e = 0.0;
        for (i, &vi) in v.iter().enumerate() {
            e -= self.visible_bias[i] * vi;
            if vi != 0.0 {
                for (j, &hj) in h.iter().enumerate() {
                    e -= vi * hj * self.weights.get(i, j);
                }
            }
        }
        for (&bj, &hj) in self.hidden_bias.iter().zip(h) {
            e -= bj * hj;
        }
        Ok(e)
    }

    /// Rows of `p(h = 1 | v)` for each row of `v`.
    pub fn v2h_prob(&self, v: &Matrix) -> Result<Matrix> {
        if v.cols() != self.n_visible() {
            return Err(Error::shape("v2h_prob", "visible data", v.shape(), "weights", self.weights.shape()));
        }
        let mut out = affine(v, &self.weights, &self.hidden_bias)?;
        out.map_in_place(sigmoid);
        Ok(out)
    }

    /// Rows of `p(v = 1 | h)` for each row of `h`.
    pub fn h2v_prob(&self, h: &Matrix) -> Result<Matrix> {
        if h.cols() != self.n_hidden() {
            return Err(Error::shape("h2v_prob", "hidden data", h.shape(), "weights", self.weights.shape()));
        }
        let mut out = h.matmul_t(&self.weights)?;
        out.add_row_broadcast(&self.visible_bias);
        out.map_in_place(sigmoid);
        Ok(out)
    }

    /// One block Gibbs sweep from visible states: samples `h ~ p(h | v)` and
    /// then `v' ~ p(v | h)`, returning `(h, v')`.
    pub fn gibbs_sweep(&self, v: &Matrix, rng: &mut RngState) -> Result<(Matrix, Matrix)> {
        let h = bernoulli_sample(&self.v2h_prob(v)?, rng)?;
        let v_next = bernoulli_sample(&self.h2v_prob(&h)?, rng)?;
        Ok((h, v_next))
    }

    /// CD-k with mean-field visible reconstructions.
    pub fn cd_k(&self, v0: &Matrix, k: usize, rng: &mut RngState) -> Result<CdGradients> {
        self.cd_k_with(v0, k, Reconstruction::MeanField, rng)
    }

    /// Contrastive divergence with `k` Gibbs steps, averaged over the rows of `v0`.
    ///
    /// Hidden states driving the chain are binary samples. The final hidden
    /// statistics are probabilities, and so are the `<v h>` products.
    pub fn cd_k_with(
        &self,
        v0: &Matrix,
        k: usize,
        mode: Reconstruction,
        rng: &mut RngState,
    ) -> Result<CdGradients> {
        if k == 0 {
            return Err(Error::domain("contrastive divergence needs k >= 1"));
        }
        check_unit_interval(v0, "visible data")?;
        let s = v0.rows();
        if s == 0 {
            return Err(Error::domain("contrastive divergence needs at least one sample"));
        }
        let ph0 = self.v2h_prob(v0)?;
        let positive = v0.t_matmul(&ph0)?;

        let mut h = bernoulli_sample(&ph0, rng)?;
        let mut vk = Matrix::zeros(0, 0);
        let mut phk = Matrix::zeros(0, 0);
        for step in 1..=k {
            let pv = self.h2v_prob(&h)?;
            vk = match mode {
                Reconstruction::MeanField => pv,
                Reconstruction::Sampled => bernoulli_sample(&pv, rng)?,
            };
            phk = self.v2h_prob(&vk)?;
            if step < k {
                h = bernoulli_sample(&phk, rng)?;
            }
        }
        let negative = vk.t_matmul(&phk)?;

        let inv_s = 1.0 / s as f64;
        let weights = positive.zip_map(&negative, |p, n| (p - n) * inv_s)?;
        let visible_bias = v0.sub(&vk)?.column_means();
        let hidden_bias = ph0.sub(&phk)?.column_means();
        Ok(CdGradients {
            weights,
            visible_bias,
            hidden_bias,
            k,
            batch_size: s,
        })
    }

    /// `W += ε dW`, `a += ε da`, `b += ε db`.
    pub fn apply_update(&self, g: &CdGradients, epsilon: f64) -> Result<Rbm> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::domain(format!("learning rate must be positive, got {epsilon}")));
        }
        if g.weights.shape() != self.weights.shape()
            || g.visible_bias.len() != self.n_visible()
            || g.hidden_bias.len() != self.n_hidden()
        {
            return Err(Error::shape("apply_update", "rbm", self.weights.shape(), "gradients", g.weights.shape()));
        }
        let mut next = self.clone();
        next.weights.add_scaled(&g.weights, epsilon)?;
        for (a, d) in next.visible_bias.iter_mut().zip(&g.visible_bias) {
            *a += epsilon * d;
        }
        for (b, d) in next.hidden_bias.iter_mut().zip(&g.hidden_bias) {
            *b += epsilon * d;
        }
        Ok(next)
    }

    /// Mean loss between `data` and its one-step mean-field reconstruction.
    pub fn reconstruction_objective(&self, data: &Matrix, objective: Objective) -> Result<f64> {
        let recon = self.h2v_prob(&self.v2h_prob(data)?)?;
        objective.mean_loss(data, &recon)
    }

    /// Exact Boltzmann distribution over all `2^(m+n)` joint states.
    pub fn exact_distribution(&self) -> Result<JointDistribution> {
        let (m, n) = (self.n_visible(), self.n_hidden());
        if m + n > ENUMERATION_LIMIT {
            return Err(Error::Capacity {
                visible: m,
                hidden: n,
                limit: ENUMERATION_LIMIT,
            });
        }
        let states = 1usize << (m + n);
        let mut energies = Vec::with_capacity(states);
        let mut v = vec![0.0; m];
        let mut h = vec![0.0; n];
        for idx in 0..states {
            decode_state(idx, &mut v, &mut h);
            energies.push(self.energy(&v, &h)?);
        }
        let min_e = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let weights: Vec<f64> = energies.iter().map(|e| (-(e - min_e)).exp()).collect();
        let z_shifted: f64 = weights.iter().sum();
        Ok(JointDistribution {
            n_visible: m,
            n_hidden: n,
            probs: weights.iter().map(|w| w / z_shifted).collect(),
            log_partition: z_shifted.ln() - min_e,
        })
    }

    /// Exact log-likelihood gradient `E_data[v p(h|v)ᵀ] - E_model[v hᵀ]`,
    /// with the model expectation taken over the enumerated distribution.
    pub fn exact_gradient(&self, data: &Matrix) -> Result<CdGradients> {
        let dist = self.exact_distribution()?;
        if data.rows() == 0 {
            return Err(Error::domain("exact gradient needs at least one sample"));
        }
        let ph = self.v2h_prob(data)?;
        let s = data.rows() as f64;
        let (m, n) = (self.n_visible(), self.n_hidden());

        let mut weights = data.t_matmul(&ph)?.map(|x| x / s);
        let mut visible_bias = data.column_means();
        let mut hidden_bias = ph.column_means();

        let mut v = vec![0.0; m];
        let mut h = vec![0.0; n];
        for (idx, &p) in dist.probabilities().iter().enumerate() {
            decode_state(idx, &mut v, &mut h);
            for i in 0..m {
                visible_bias[i] -= p * v[i];
                for (j, &hj) in h.iter().enumerate() {
                    let w = weights.get(i, j);
                    weights.set(i, j, w - p * v[i] * hj);
                }
            }
            for j in 0..n {
                hidden_bias[j] -= p * h[j];
            }
        }
        Ok(CdGradients {
            weights,
            visible_bias,
            hidden_bias,
            k: 0,
            batch_size: data.rows(),
        })
    }
}

/// Maps a joint-state index to unit values: visible unit `i` is bit `n + i`,
/// hidden unit `j` is bit `j`.
fn decode_state(idx: usize, v: &mut [f64], h: &mut [f64]) {
    let n = h.len();
    for (j, hj) in h.iter_mut().enumerate() {
        *hj = ((idx >> j) & 1) as f64;
    }
    for (i, vi) in v.iter_mut().enumerate() {
        *vi = ((idx >> (n + i)) & 1) as f64;
    }
}

/// Enumerated joint distribution of a small RBM.
#[derive(Clone, Debug)]
pub struct JointDistribution {
    n_visible: usize,
    n_hidden: usize,
    probs: Vec<f64>,
    log_partition: f64,
}

impl JointDistribution {
    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    /// Probabilities indexed by [`JointDistribution::state_index`].
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    /// Index of the binary joint state `(v, h)`; entries are read as `!= 0`.
    pub fn state_index(&self, v: &[f64], h: &[f64]) -> usize {
        assert_eq!(v.len(), self.n_visible);
        assert_eq!(h.len(), self.n_hidden);
        let mut idx = 0;
        for (j, &hj) in h.iter().enumerate() {
            if hj != 0.0 {
                idx |= 1 << j;
            }
        }
        for (i, &vi) in v.iter().enumerate() {
            if vi != 0.0 {
                idx |= 1 << (self.n_hidden + i);
            }
        }
        idx
    }

    /// The unit values of state `idx`.
    pub fn state(&self, idx: usize) -> (Vec<f64>, Vec<f64>) {
        let mut v = vec![0.0; self.n_visible];
        let mut h = vec![0.0; self.n_hidden];
        decode_state(idx, &mut v, &mut h);
        (v, h)
    }

    pub fn prob(&self, v: &[f64], h: &[f64]) -> f64 {
        self.probs[self.state_index(v, h)]
    }

    /// `p(h_j = 1 | v)` for every hidden unit, by marginalizing the table.
    pub fn hidden_conditional(&self, v: &[f64]) -> Vec<f64> {
        let mut on = vec![0.0; self.n_hidden];
        let mut total = 0.0;
        for h_bits in 0..(1usize << self.n_hidden) {
            let h: Vec<f64> = (0..self.n_hidden).map(|j| ((h_bits >> j) & 1) as f64).collect();
            let p = self.prob(v, &h);
            total += p;
            for (o, &hj) in on.iter_mut().zip(&h) {
                *o += p * hj;
            }
        }
        on.iter().map(|o| o / total).collect()
    }

    /// `p(v_i = 1 | h)` for every visible unit, by marginalizing the table.
    pub fn visible_conditional(&self, h: &[f64]) -> Vec<f64> {
        let mut on = vec![0.0; self.n_visible];
        let mut total = 0.0;
        for v_bits in 0..(1usize << self.n_visible) {
            let v: Vec<f64> = (0..self.n_visible).map(|i| ((v_bits >> i) & 1) as f64).collect();
            let p = self.prob(&v, h);
            total += p;
            for (o, &vi) in on.iter_mut().zip(&v) {
                *o += p * vi;
            }
        }
        on.iter().map(|o| o / total).collect()
    }

    /// Total-variation distance to an empirical histogram over state indices.
    pub fn total_variation(&self, counts: &[u64]) -> f64 {
        assert_eq!(counts.len(), self.probs.len());
        let n: u64 = counts.iter().sum();
        let n = n.max(1) as f64;
        0.5 * self
            .probs
            .iter()
            .zip(counts)
            .map(|(&p, &c)| (p - c as f64 / n).abs())
            .sum::<f64>()
    }
}

pub(crate) fn check_unit_interval(m: &Matrix, what: &str) -> Result<()> {
    if let Some(pos) = m.as_slice().iter().position(|v| !(0.0..=1.0).contains(v)) {
        let cols = m.cols().max(1);
        return Err(Error::domain(format!(
            "{what} must lie in [0, 1]; found {} at row {}, column {}",
            m.as_slice()[pos],
            pos / cols,
            pos % cols
        )));
    }
    Ok(())
}

/// Trains one RBM by mini-batch CD-k.
///
/// Each epoch shuffles the rows, walks them in batches of `batch_size` (the
/// last one may be short), and applies one update per batch with learning
/// rate `step_ratio`. The reconstruction objective over all of `data` is
/// recorded after every epoch. A batch size larger than the data is clamped,
/// with a warning in the trace.
pub fn train_rbm(
    rbm: &Rbm,
    data: &Matrix,
    opts: &TrainOptions,
    rng: &mut RngState,
) -> Result<(Rbm, TrainTrace)> {
    opts.validate()?;
    if data.cols() != rbm.n_visible() {
        return Err(Error::shape("train_rbm", "data", data.shape(), "weights", rbm.weights.shape()));
    }
    check_unit_interval(data, "training data")?;
    let mut trace = TrainTrace::default();
    let mut current = rbm.clone();
    if opts.max_iter == 0 {
        return Ok((current, trace));
    }
    let s = data.rows();
    if s == 0 {
        return Err(Error::domain("training data has no rows"));
    }
    let mut batch = opts.batch_size;
    if batch > s {
        let msg = format!("batch size {batch} exceeds {s} training rows; using {s}");
        log::warn!("{msg}");
        trace.warnings.push(msg);
        batch = s;
    }

    let start = Instant::now();
    for epoch in 0..opts.max_iter {
        let order = rng.permutation(s);
        for chunk in order.chunks(batch) {
            let v0 = data.select_rows(chunk);
            let g = current.cd_k(&v0, opts.cd_k, rng)?;
            current = current.apply_update(&g, opts.step_ratio)?;
        }
        let obj = current.reconstruction_objective(data, opts.objective)?;
        if opts.verbose {
            log::info!("rbm epoch {}: {} = {obj:.6}", epoch + 1, opts.objective);
        }
        trace.objective.push(obj);
        trace.elapsed.push(start.elapsed().as_secs_f64());
    }
    Ok((current, trace))
}
