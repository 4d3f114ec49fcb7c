use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Output probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside logarithms.
pub const PROB_CLAMP: f64 = 1e-12;

/// Training objective for reconstructions and supervised outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Objective {
    Square,
    #[default]
    CrossEntropy,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Square => "square",
            Objective::CrossEntropy => "cross-entropy",
        }
    }

    /// Mean over all entries of the per-entry loss between `targets` and
    /// `outputs`. Cross-entropy clamps outputs to `[1e-12, 1 - 1e-12]`.
    pub fn mean_loss(self, targets: &Matrix, outputs: &Matrix) -> Result<f64> {
        if targets.shape() != outputs.shape() {
            return Err(Error::Shape {
                op: "objective",
                left_name: "targets",
                left: targets.shape(),
                right_name: "outputs",
                right: outputs.shape(),
            });
        }
        let n = targets.as_slice().len();
        if n == 0 {
            return Ok(0.0);
        }
        let total: f64 = targets
            .as_slice()
            .iter()
            .zip(outputs.as_slice())
            .map(|(&x, &p)| self.entry_loss(x, p))
            .sum();
        Ok(total / n as f64)
    }

    #[inline]
    pub(crate) fn entry_loss(self, target: f64, output: f64) -> f64 {
        match self {
            Objective::Square => (target - output).powi(2),
            Objective::CrossEntropy => {
                let p = output.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
            }
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    /// Accepts the canonical names plus the MATLAB toolbox spellings,
    /// including its misspelled `CrossEntorpy`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square" => Ok(Objective::Square),
            "cross-entropy" | "crossentropy" | "crossentorpy" => Ok(Objective::CrossEntropy),
            other => Err(Error::domain(format!(
                "unknown objective '{other}' (expected 'square' or 'cross-entropy')"
            ))),
        }
    }
}

/// Per-epoch record of a training run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainTrace {
    /// Objective value measured after each epoch.
    pub objective: Vec<f64>,
    /// Wall-clock seconds since the run started, at the end of each epoch.
    pub elapsed: Vec<f64>,
    pub warnings: Vec<String>,
}

impl TrainTrace {
    pub fn epochs(&self) -> usize {
        self.objective.len()
    }
}

/// Hyperparameters shared by RBM pretraining and supervised fine-tuning.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainOptions {
    /// Number of epochs.
    pub max_iter: usize,
    pub batch_size: usize,
    /// Learning rate.
    pub step_ratio: f64,
    pub objective: Objective,
    /// Gibbs steps per contrastive divergence update.
    pub cd_k: usize,
    /// Number of layers to pretrain; 0 means all of them.
    pub layer: usize,
    pub verbose: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            max_iter: 100,
            batch_size: 1,
            step_ratio: 2.5,
            objective: Objective::CrossEntropy,
            cd_k: 1,
            layer: 0,
            verbose: false,
        }
    }
}

impl TrainOptions {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::domain("batch size must be at least 1"));
        }
        if !(self.step_ratio > 0.0 && self.step_ratio.is_finite()) {
            return Err(Error::domain(format!(
                "step ratio must be positive, got {}",
                self.step_ratio
            )));
        }
        if self.cd_k == 0 {
            return Err(Error::domain("contrastive divergence needs k >= 1"));
        }
        Ok(())
    }
}
