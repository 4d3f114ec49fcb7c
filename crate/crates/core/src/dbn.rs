//! Deep Belief Networks: stacked RBMs, greedy pretraining, a least-squares
//! label mapping, and supervised fine-tuning by backpropagation.
//!
//! After fine-tuning the same stack is used as a feed-forward network of
//! sigmoid layers; every forward pass uses probabilities, never samples.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::numerics::{lstsq_min_norm, Matrix, RngState};
use crate::options::{Objective, TrainOptions, TrainTrace};
use crate::rbm::{check_unit_interval, train_rbm, Rbm, DEFAULT_INIT_STDDEV};

#[derive(Clone, Debug, PartialEq)]
pub struct Dbn {
    nodes: Vec<usize>,
    layers: Vec<Rbm>,
}

/// Traces from [`Dbn::fit_supervised`]: one per pretrained layer, then fine-tuning.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SupervisedTrace {
    pub pretrain: Vec<TrainTrace>,
    pub finetune: TrainTrace,
}

/// Gradient of the supervised loss for one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGradient {
    pub weights: Matrix,
    pub hidden_bias: Vec<f64>,
}

impl Dbn {
    /// Assembles a stack, checking that adjacent layers chain.
    pub fn new(layers: Vec<Rbm>) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| Error::domain("a DBN needs at least one layer"))?;
        let mut nodes = vec![first.n_visible()];
        for (t, layer) in layers.iter().enumerate() {
            let expected = *nodes.last().unwrap();
            if layer.n_visible() != expected {
                return Err(Error::domain(format!(
                    "layer {} has {} visible units but the layer below outputs {expected}",
                    t + 1,
                    layer.n_visible()
                )));
            }
            nodes.push(layer.n_hidden());
        }
        Ok(Dbn { nodes, layers })
    }

    /// Fresh Bernoulli-Bernoulli stack for node sizes `[m, n1, ..., nr]`.
    pub fn random(nodes: &[usize], rng: &mut RngState) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::domain(format!(
                "a DBN needs at least 2 layer sizes, got {}",
                nodes.len()
            )));
        }
        if let Some(pos) = nodes.iter().position(|&n| n == 0) {
            return Err(Error::domain(format!("layer size {pos} is zero")));
        }
        let layers = nodes
            .windows(2)
            .map(|w| Rbm::random(w[0], w[1], DEFAULT_INIT_STDDEV, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn layers(&self) -> &[Rbm] {
        &self.layers
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn input_width(&self) -> usize {
        self.nodes[0]
    }

    pub fn output_width(&self) -> usize {
        *self.nodes.last().unwrap()
    }

    /// Deterministic upward pass through every layer.
    pub fn v2h(&self, v: &Matrix) -> Result<Matrix> {
        self.forward_through(v, self.layers.len())
    }

    /// Deterministic downward pass from the top layer to the visible units.
    pub fn h2v(&self, h: &Matrix) -> Result<Matrix> {
        if h.cols() != self.output_width() {
            return Err(Error::shape(
                "dbn h2v",
                "top activations",
                h.shape(),
                "network",
                (self.input_width(), self.output_width()),
            ));
        }
        let mut x = h.clone();
        for layer in self.layers.iter().rev() {
            x = layer.h2v_prob(&x)?;
        }
        Ok(x)
    }

    /// Activations after the first `depth` layers.
    fn forward_through(&self, v: &Matrix, depth: usize) -> Result<Matrix> {
        if v.cols() != self.input_width() {
            return Err(Error::shape(
                "dbn v2h",
                "input",
                v.shape(),
                "network",
                (self.input_width(), self.output_width()),
            ));
        }
        let mut x = v.clone();
        for layer in &self.layers[..depth] {
            x = layer.v2h_prob(&x)?;
        }
        Ok(x)
    }

    /// Greedy layer-wise pretraining.
    ///
    /// Layer 1 is trained on `data`, layer 2 on layer 1's hidden
    /// probabilities, and so on. `opts.layer` bounds how many layers are
    /// trained (0 trains all); untouched layers are returned bit-identical.
    pub fn pretrain(
        &self,
        data: &Matrix,
        opts: &TrainOptions,
        rng: &mut RngState,
    ) -> Result<(Dbn, Vec<TrainTrace>)> {
        opts.validate()?;
        if data.cols() != self.input_width() {
            return Err(Error::shape(
                "pretrain",
                "data",
                data.shape(),
                "network",
                (self.input_width(), self.output_width()),
            ));
        }
        let count = match opts.layer {
            0 => self.layers.len(),
            t => t.min(self.layers.len()),
        };
        let mut next = self.clone();
        let mut traces = Vec::with_capacity(count);
        let mut input = data.clone();
        for t in 0..count {
            if opts.verbose {
                log::info!("pretraining layer {} of {count}", t + 1);
            }
            let (trained, trace) = train_rbm(&next.layers[t], &input, opts, rng)?;
            next.layers[t] = trained;
            traces.push(trace);
            if t + 1 < count {
                input = next.layers[t].v2h_prob(&input)?;
            }
        }
        Ok((next, traces))
    }

    /// Replaces the top layer's weights with the minimum-norm least-squares
    /// map from the penultimate activations to `labels`, and zeroes its
    /// output biases.
    pub fn set_linear_mapping(&self, data: &Matrix, labels: &Matrix) -> Result<Dbn> {
        self.check_supervised_shapes("set_linear_mapping", data, labels)?;
        let top = self.layers.len() - 1;
        let activations = self.forward_through(data, top)?;
        let weights = lstsq_min_norm(&activations, labels)?;
        if !weights.is_finite() {
            return Err(Error::domain("least-squares mapping produced non-finite weights"));
        }
        let mut next = self.clone();
        next.layers[top].set_top(weights, vec![0.0; self.output_width()]);
        Ok(next)
    }

    /// Supervised mini-batch gradient descent on all layers.
    ///
    /// Minimizes [`Dbn::supervised_loss`] with learning rate `step_ratio` for
    /// `max_iter` epochs, shuffling rows each epoch. Visible biases do not
    /// take part in the forward pass and are left as they are.
    pub fn fine_tune(
        &self,
        data: &Matrix,
        labels: &Matrix,
        opts: &TrainOptions,
        rng: &mut RngState,
    ) -> Result<(Dbn, TrainTrace)> {
        opts.validate()?;
        self.check_supervised_shapes("fine_tune", data, labels)?;
        check_unit_interval(labels, "labels")?;
        let mut net = self.clone();
        let mut trace = TrainTrace::default();
        if opts.max_iter == 0 {
            return Ok((net, trace));
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
                let x = data.select_rows(chunk);
                let y = labels.select_rows(chunk);
                let (_, grads) = net.loss_gradients(&x, &y, opts.objective)?;
                for (layer, g) in net.layers.iter_mut().zip(&grads) {
                    let (w, b) = layer.params_mut();
                    w.add_scaled(&g.weights, -opts.step_ratio)?;
                    for (bj, gj) in b.iter_mut().zip(&g.hidden_bias) {
                        *bj -= opts.step_ratio * gj;
                    }
                }
            }
            let loss = net.supervised_loss(data, labels, opts.objective)?;
            if opts.verbose {
                log::info!("fine-tune epoch {}: {} = {loss:.6}", epoch + 1, opts.objective);
            }
            trace.objective.push(loss);
            trace.elapsed.push(start.elapsed().as_secs_f64());
        }
        Ok((net, trace))
    }

    /// The full supervised recipe: pretrain every layer except the top one
    /// with `pretrain`, fit the top layer by least squares, then fine-tune
    /// the whole stack with `finetune`.
    pub fn fit_supervised(
        &self,
        data: &Matrix,
        labels: &Matrix,
        pretrain: &TrainOptions,
        finetune: &TrainOptions,
        rng: &mut RngState,
    ) -> Result<(Dbn, SupervisedTrace)> {
        let below_top = self.layers.len() - 1;
        let (pretrained, pre_traces) = if below_top > 0 {
            let opts = TrainOptions { layer: below_top, ..pretrain.clone() };
            self.pretrain(data, &opts, rng)?
        } else {
            (self.clone(), Vec::new())
        };
        let mapped = pretrained.set_linear_mapping(data, labels)?;
        let opts = TrainOptions { layer: 0, ..finetune.clone() };
        let (tuned, tune_trace) = mapped.fine_tune(data, labels, &opts, rng)?;
        Ok((tuned, SupervisedTrace { pretrain: pre_traces, finetune: tune_trace }))
    }

    /// Per-sample loss summed over output units, averaged over rows.
    pub fn supervised_loss(&self, data: &Matrix, labels: &Matrix, objective: Objective) -> Result<f64> {
        self.check_supervised_shapes("supervised_loss", data, labels)?;
        let out = self.v2h(data)?;
        let c = labels.cols() as f64;
        Ok(objective.mean_loss(labels, &out)? * c)
    }

    /// Loss and its gradient with respect to every layer's weights and
    /// hidden biases, by backpropagation through the sigmoid stack.
    pub fn loss_gradients(
        &self,
        data: &Matrix,
        labels: &Matrix,
        objective: Objective,
    ) -> Result<(f64, Vec<LayerGradient>)> {
        self.check_supervised_shapes("loss_gradients", data, labels)?;
        let s = data.rows();
        if s == 0 {
            return Err(Error::domain("gradient needs at least one sample"));
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(data.clone());
        for layer in &self.layers {
            let next = layer.v2h_prob(acts.last().unwrap())?;
            acts.push(next);
        }
        let out = acts.last().unwrap();
        let c = labels.cols() as f64;
        let loss = objective.mean_loss(labels, out)? * c;

        let inv_s = 1.0 / s as f64;
        // dL/dz at the output, z being the pre-sigmoid input.
        let mut delta = match objective {
            Objective::CrossEntropy => out.zip_map(labels, |o, y| (o - y) * inv_s)?,
            Objective::Square => out.zip_map(labels, |o, y| 2.0 * (o - y) * o * (1.0 - o) * inv_s)?,
        };
        let mut grads = Vec::with_capacity(self.layers.len());
        for t in (0..self.layers.len()).rev() {
            let weights = acts[t].t_matmul(&delta)?;
            let hidden_bias = delta.column_sums();
            if t > 0 {
                let back = delta.matmul_t(self.layers[t].weights())?;
                delta = back.zip_map(&acts[t], |d, a| d * a * (1.0 - a))?;
            }
            grads.push(LayerGradient { weights, hidden_bias });
        }
        grads.reverse();
        Ok((loss, grads))
    }

    /// Root mean squared entrywise error between outputs and labels.
    pub fn calc_rmse(&self, data: &Matrix, labels: &Matrix) -> Result<f64> {
        self.check_supervised_shapes("calc_rmse", data, labels)?;
        let out = self.v2h(data)?;
        Ok(Objective::Square.mean_loss(labels, &out)?.sqrt())
    }

    /// Fraction of rows whose arg-max output disagrees with a one-hot label.
    pub fn calc_error_rate(&self, data: &Matrix, labels: &Matrix) -> Result<f64> {
        self.check_supervised_shapes("calc_error_rate", data, labels)?;
        error_rate(&self.v2h(data)?, labels)
    }

    fn check_supervised_shapes(&self, op: &'static str, data: &Matrix, labels: &Matrix) -> Result<()> {
        if data.cols() != self.input_width() {
            return Err(Error::shape(op, "data", data.shape(), "network", (self.input_width(), self.output_width())));
        }
        if labels.cols() != self.output_width() {
            return Err(Error::shape(op, "labels", labels.shape(), "network", (self.input_width(), self.output_width())));
        }
        if labels.rows() != data.rows() {
            return Err(Error::shape(op, "data", data.shape(), "labels", labels.shape()));
        }
        Ok(())
    }
}

/// Per row, 1 at the first maximal column and 0 elsewhere.
pub fn one_hot_argmax(out: &Matrix) -> Matrix {
    let mut hot = Matrix::zeros(out.rows(), out.cols());
    for (r, row) in out.row_iter().enumerate() {
        let mut best = 0;
        for (c, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = c;
            }
        }
        hot.set(r, best, 1.0);
    }
    hot
}

/// `mean_r( Σ_c |labels - onehot(out)|_rc / 2 )` for one-hot `labels`.
pub fn error_rate(out: &Matrix, labels: &Matrix) -> Result<f64> {
    if out.shape() != labels.shape() {
        return Err(Error::shape("error_rate", "outputs", out.shape(), "labels", labels.shape()));
    }
    if !is_one_hot(labels) {
        return Err(Error::domain("error rate needs one-hot labels"));
    }
    if out.rows() == 0 {
        return Ok(0.0);
    }
    let predicted = one_hot_argmax(out);
    let diff = labels.zip_map(&predicted, |a, b| (a - b).abs())?;
    let per_row: f64 = diff.row_iter().map(|r| r.iter().sum::<f64>() / 2.0).sum();
    Ok(per_row / out.rows() as f64)
}

/// Every entry is 0 or 1 and every row holds exactly one 1.
pub fn is_one_hot(labels: &Matrix) -> bool {
    labels.cols() > 0
        && labels.row_iter().all(|r| {
            r.iter().all(|&v| v == 0.0 || v == 1.0) && r.iter().filter(|&&v| v == 1.0).count() == 1
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn confusion_fixture() -> (Matrix, Matrix) {
        // Digits of the first ten MNIST test images, and the same table with
        // the first row misread as a 6.
        let truth = [7, 2, 1, 0, 4, 1, 4, 9, 5, 9];
        let mut predicted = truth;
        predicted[0] = 6;
        let hot = |digits: &[usize]| {
            let mut m = Matrix::zeros(digits.len(), 10);
            for (r, &d) in digits.iter().enumerate() {
                m.set(r, d, 1.0);
            }
            m
        };
        (hot(&predicted), hot(&truth))
    }

    #[test]
    fn random_stack_shapes() {
        let mut rng = RngState::new(0);
        let d = Dbn::random(&[6, 8], &mut rng).unwrap();
        assert_eq!(d.n_layers(), 1);
        assert_eq!(d.layers()[0].weights().shape(), (6, 8));

        let d = Dbn::random(&[2, 12, 1], &mut rng).unwrap();
        let shapes: Vec<_> = d.layers().iter().map(|l| l.weights().shape()).collect();
        assert_eq!(shapes, vec![(2, 12), (12, 1)]);
        assert!(d.layers().iter().all(|l| l.hidden_bias().iter().all(|&b| b == 0.0)));

        assert_eq!(
            Dbn::random(&[2, 12, 1], &mut RngState::new(5)).unwrap(),
            Dbn::random(&[2, 12, 1], &mut RngState::new(5)).unwrap()
        );
        assert!(Dbn::random(&[4], &mut rng).is_err());
        assert!(Dbn::random(&[4, 0, 2], &mut rng).is_err());
    }

    #[test]
    fn new_rejects_broken_chain() {
        let a = Rbm::zeros(3, 4).unwrap();
        let b = Rbm::zeros(5, 2).unwrap();
        assert!(Dbn::new(vec![a, b]).is_err());
        assert!(Dbn::new(vec![]).is_err());
    }

    #[test]
    fn single_layer_passes_match_rbm() {
        let mut rng = RngState::new(2);
        let rbm = Rbm::random(4, 3, 1.0, &mut rng).unwrap();
        let d = Dbn::new(vec![rbm.clone()]).unwrap();
        let v = Matrix::from_rows(&[[1.0, 0.0, 0.5, 1.0]]).unwrap();
        assert_eq!(d.v2h(&v).unwrap(), rbm.v2h_prob(&v).unwrap());
        let h = Matrix::from_rows(&[[0.0, 1.0, 1.0]]).unwrap();
        assert_eq!(d.h2v(&h).unwrap(), rbm.h2v_prob(&h).unwrap());
    }

    #[test]
    fn zero_network_outputs_half() {
        let d = Dbn::new(vec![Rbm::zeros(2, 5).unwrap(), Rbm::zeros(5, 3).unwrap()]).unwrap();
        let v = Matrix::from_rows(&[[0.0, 1.0], [1.0, 1.0]]).unwrap();
        assert!(d.v2h(&v).unwrap().as_slice().iter().all(|&x| x == 0.5));
        let h = Matrix::filled(2, 3, 1.0);
        assert!(d.h2v(&h).unwrap().as_slice().iter().all(|&x| x == 0.5));
        assert!(d.v2h(&Matrix::zeros(1, 3)).is_err());
        assert!(d.h2v(&Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn pretrain_respects_layer_limit() {
        let mut rng = RngState::new(4);
        let d = Dbn::random(&[4, 5, 3, 2], &mut rng).unwrap();
        let data = Matrix::from_rows(&[[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]]).unwrap();
        let opts = TrainOptions { max_iter: 3, batch_size: 2, layer: 1, ..Default::default() };
        let (p, traces) = d.pretrain(&data, &opts, &mut rng).unwrap();
        assert_eq!(traces.len(), 1);
        assert_ne!(p.layers()[0], d.layers()[0]);
        assert_eq!(p.layers()[1..], d.layers()[1..]);

        let opts = TrainOptions { layer: 0, ..opts };
        let (p, traces) = d.pretrain(&data, &opts, &mut rng).unwrap();
        assert_eq!(traces.len(), 3);
        assert!(p.layers().iter().zip(d.layers()).all(|(a, b)| a != b));

        let opts = TrainOptions { max_iter: 0, ..opts };
        let (p, _) = d.pretrain(&data, &opts, &mut rng).unwrap();
        assert_eq!(p, d);
    }

    #[test]
    fn one_layer_pretrain_equals_train_rbm() {
        let d = Dbn::random(&[3, 4], &mut RngState::new(6)).unwrap();
        let data = Matrix::from_rows(&[[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]]).unwrap();
        let opts = TrainOptions { max_iter: 5, batch_size: 1, ..Default::default() };
        let (p, traces) = d.pretrain(&data, &opts, &mut RngState::new(7)).unwrap();
        let (r, trace) = train_rbm(&d.layers()[0], &data, &opts, &mut RngState::new(7)).unwrap();
        assert_eq!(p.layers()[0], r);
        assert_eq!(traces[0].objective, trace.objective);
    }

    #[test]
    fn linear_mapping_identity_and_scalar() {
        // Single layer: the mapping acts on the data itself.
        let d = Dbn::random(&[3, 3], &mut RngState::new(1)).unwrap();
        let eye = Matrix::identity(3);
        let mapped = d.set_linear_mapping(&eye, &eye).unwrap();
        for (a, b) in mapped.layers()[0].weights().as_slice().iter().zip(eye.as_slice()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        assert!(mapped.layers()[0].hidden_bias().iter().all(|&b| b == 0.0));

        let d = Dbn::random(&[1, 1], &mut RngState::new(1)).unwrap();
        let mapped = d
            .set_linear_mapping(&Matrix::from_rows(&[[2.0]]).unwrap(), &Matrix::from_rows(&[[1.0]]).unwrap())
            .unwrap();
        assert_abs_diff_eq!(mapped.layers()[0].weights().get(0, 0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn linear_mapping_shape_errors() {
        let d = Dbn::random(&[2, 3, 1], &mut RngState::new(1)).unwrap();
        let x = Matrix::zeros(4, 2);
        assert!(d.set_linear_mapping(&x, &Matrix::zeros(4, 2)).is_err());
        assert!(d.set_linear_mapping(&x, &Matrix::zeros(3, 1)).is_err());
        assert!(d.set_linear_mapping(&Matrix::zeros(4, 3), &Matrix::zeros(4, 1)).is_err());
    }

    #[test]
    fn linear_mapping_is_least_squares_optimal() {
        let mut rng = RngState::new(31);
        let d = Dbn::random(&[3, 3, 2], &mut rng).unwrap();
        let d = Dbn::new(vec![Rbm::random(3, 3, 1.0, &mut rng).unwrap(), d.layers()[1].clone()]).unwrap();
        let x = Matrix::from_rows(&[[1.0, 0.0, 0.3], [0.2, 1.0, 0.0], [0.9, 0.9, 1.0], [0.0, 0.1, 0.5]]).unwrap();
        let y = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.0, 0.0]]).unwrap();
        let mapped = d.set_linear_mapping(&x, &y).unwrap();
        let a = d.layers()[0].v2h_prob(&x).unwrap();
        let residual = |w: &Matrix| {
            let r = a.matmul(w).unwrap().sub(&y).unwrap();
            r.as_slice().iter().map(|v| v * v).sum::<f64>()
        };
        let w_ls = mapped.layers()[1].weights().clone();
        let best = residual(&w_ls);
        for trial in 0..5000 {
            let scale = [1e-3, 1e-2, 1e-1, 1.0][trial % 4];
            let mut w = w_ls.clone();
            let noise = crate::numerics::gauss_init(3, 2, scale, &mut rng).unwrap();
            w.add_scaled(&noise, 1.0).unwrap();
            assert!(best <= residual(&w) + 1e-12, "trial {trial}");
            let random = crate::numerics::gauss_init(3, 2, 3.0, &mut rng).unwrap();
            assert!(best <= residual(&random) + 1e-12);
        }
    }

    #[test]
    fn fine_tune_zero_epochs_is_identity() {
        let d = Dbn::random(&[2, 3, 1], &mut RngState::new(2)).unwrap();
        let x = Matrix::from_rows(&[[0.0, 1.0]]).unwrap();
        let y = Matrix::from_rows(&[[1.0]]).unwrap();
        let opts = TrainOptions { max_iter: 0, ..Default::default() };
        let (t, trace) = d.fine_tune(&x, &y, &opts, &mut RngState::new(2)).unwrap();
        assert_eq!(t, d);
        assert_eq!(trace.epochs(), 0);
    }

    #[test]
    fn fine_tune_lowers_loss() {
        let mut rng = RngState::new(3);
        let d = Dbn::random(&[2, 6, 1], &mut rng).unwrap();
        let x = Matrix::from_rows(&[[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]).unwrap();
        let y = Matrix::from_rows(&[[0.0], [1.0], [1.0], [1.0]]).unwrap();
        let before = d.supervised_loss(&x, &y, Objective::CrossEntropy).unwrap();
        let opts = TrainOptions { max_iter: 50, batch_size: 4, step_ratio: 1.0, ..Default::default() };
        let (t, trace) = d.fine_tune(&x, &y, &opts, &mut rng).unwrap();
        assert_eq!(trace.epochs(), 50);
        assert!(*trace.objective.last().unwrap() < before);
        assert_eq!(t.layers()[0].visible_bias(), d.layers()[0].visible_bias());
    }

    #[test]
    fn rmse_examples() {
        let d = Dbn::new(vec![Rbm::zeros(1, 1).unwrap()]).unwrap();
        let x = Matrix::from_rows(&[[1.0]]).unwrap();
        assert_eq!(d.calc_rmse(&x, &Matrix::from_rows(&[[1.0]]).unwrap()).unwrap(), 0.5);
        assert_eq!(d.calc_rmse(&x, &Matrix::from_rows(&[[0.5]]).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn argmax_rule() {
        let out = Matrix::from_rows(&[[0.1, 0.9], [0.5, 0.5], [0.7, 0.2]]).unwrap();
        let hot = one_hot_argmax(&out);
        assert_eq!(hot, Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0], [1.0, 0.0]]).unwrap());
    }

    #[test]
    fn error_rate_seven_as_six_confusion() {
        let (confused, truth) = confusion_fixture();
        assert_eq!(error_rate(&truth, &truth).unwrap(), 0.0);
        assert_eq!(error_rate(&confused, &truth).unwrap(), 0.1);
        assert_eq!(one_hot_argmax(&truth).row(0), &[0., 0., 0., 0., 0., 0., 0., 1., 0., 0.]);
    }

    #[test]
    fn error_rate_requires_one_hot() {
        let out = Matrix::from_rows(&[[0.2, 0.8]]).unwrap();
        let two_hot = Matrix::from_rows(&[[1.0, 1.0]]).unwrap();
        let soft = Matrix::from_rows(&[[0.5, 0.5]]).unwrap();
        assert!(matches!(error_rate(&out, &two_hot), Err(Error::Domain(_))));
        assert!(error_rate(&out, &soft).is_err());
        assert!(error_rate(&out, &Matrix::zeros(1, 3)).is_err());
    }
}
