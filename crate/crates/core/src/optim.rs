//! Sparse optimizers applied through gradient scatter.
//!
//! Adaptive rules keep one accumulator per table element, initialized to
//! zero. The accumulator is updated first and the weight update uses the
//! new value:
//!
//! * Adagrad: `A += G²`, `W -= lr·G/√(ε+A)`
//! * RMSprop: `A = γA + (1−γ)G²`, `W -= lr·G/√(ε+A)`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{check_scatter, gradient_scatter, CoalescedGradients};
use crate::tensor::{EmbeddingTable, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adagrad,
    Rmsprop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub lr: f64,
    pub gamma: f64,
    pub eps: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            kind: OptimizerKind::Adagrad,
            lr: 0.01,
            gamma: 0.9,
            eps: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidParameter(format!("lr must be positive, got {}", self.lr)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.kind == OptimizerKind::Rmsprop && !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Hyperparameters plus per-element accumulators for one table.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    config: OptimizerConfig,
    accum: Option<Matrix>,
}

impl OptimizerState {
    /// State sized for `table`. SGD carries no accumulator.
    pub fn new(config: OptimizerConfig, table: &EmbeddingTable) -> Result<Self> {
        config.validate()?;
        let accum = match config.kind {
            OptimizerKind::Sgd => None,
            OptimizerKind::Adagrad | OptimizerKind::Rmsprop => Some(Matrix::zeros(table.rows(), table.dim())),
        };
        Ok(OptimizerState { config, accum })
    }

    pub fn sgd(lr: f64, table: &EmbeddingTable) -> Result<Self> {
        Self::new(
            OptimizerConfig {
                kind: OptimizerKind::Sgd,
                lr,
                ..Default::default()
            },
            table,
        )
    }

    pub fn adagrad(lr: f64, eps: f64, table: &EmbeddingTable) -> Result<Self> {
        Self::new(
            OptimizerConfig {
                kind: OptimizerKind::Adagrad,
                lr,
                eps,
                ..Default::default()
            },
            table,
        )
    }

    pub fn rmsprop(lr: f64, gamma: f64, eps: f64, table: &EmbeddingTable) -> Result<Self> {
        Self::new(
            OptimizerConfig {
                kind: OptimizerKind::Rmsprop,
                lr,
                gamma,
                eps,
            },
            table,
        )
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.config
    }

    pub fn kind(&self) -> OptimizerKind {
        self.config.kind
    }

    pub fn accum(&self) -> Option<&Matrix> {
        self.accum.as_ref()
    }

    /// Dispatches on the configured kind.
    pub fn step(&mut self, table: &mut EmbeddingTable, coal: &CoalescedGradients) -> Result<()> {
        match self.config.kind {
            OptimizerKind::Sgd => sgd_step(self, table, coal),
            OptimizerKind::Adagrad => adagrad_step(self, table, coal),
            OptimizerKind::Rmsprop => rmsprop_step(self, table, coal),
        }
    }

    fn accum_for(&mut self, kind: OptimizerKind, table: &EmbeddingTable) -> Result<&mut Matrix> {
        if self.config.kind != kind {
            return Err(Error::InvalidParameter(format!(
                "{kind:?} step on {:?} state",
                self.config.kind
            )));
        }
        let acc = self
            .accum
            .as_mut()
            .ok_or_else(|| Error::InvalidParameter("missing accumulator".into()))?;
        if acc.rows() != table.rows() || acc.dim() != table.dim() {
            return Err(Error::Shape(format!(
                "accumulator {}x{} vs table {}x{}",
                acc.rows(),
                acc.dim(),
                table.rows(),
                table.dim()
            )));
        }
        Ok(acc)
    }
}

/// `W -= lr·G`. Works for any state kind; accumulators are left alone.
pub fn sgd_step(state: &OptimizerState, table: &mut EmbeddingTable, coal: &CoalescedGradients) -> Result<()> {
    let lr = state.config.lr;
    gradient_scatter(table, coal, |_, w, g| {
        for (w, &g) in w.iter_mut().zip(g) {
            *w = (*w as f64 - lr * g as f64) as f32;
        }
    })
}

pub fn adagrad_step(state: &mut OptimizerState, table: &mut EmbeddingTable, coal: &CoalescedGradients) -> Result<()> {
    let OptimizerConfig { lr, eps, .. } = state.config;
    adaptive_step(state, OptimizerKind::Adagrad, table, coal, lr, eps, |a, g| a + g * g)
}

pub fn rmsprop_step(state: &mut OptimizerState, table: &mut EmbeddingTable, coal: &CoalescedGradients) -> Result<()> {
    let OptimizerConfig { lr, eps, gamma, .. } = state.config;
    adaptive_step(state, OptimizerKind::Rmsprop, table, coal, lr, eps, |a, g| {
        gamma * a + (1.0 - gamma) * g * g
    })
}

fn adaptive_step(
    state: &mut OptimizerState,
    kind: OptimizerKind,
    table: &mut EmbeddingTable,
    coal: &CoalescedGradients,
    lr: f64,
    eps: f64,
    next_accum: impl Fn(f64, f64) -> f64,
) -> Result<()> {
    check_scatter(table, coal)?;
    let acc = state.accum_for(kind, table)?;
    gradient_scatter(table, coal, |row, w, g| {
        let a_row = acc.row_mut(row as usize);
        for ((w, a), &g) in w.iter_mut().zip(a_row.iter_mut()).zip(g) {
            let g = g as f64;
            let a_new = next_accum(*a as f64, g);
            *a = a_new as f32;
            *w = (*w as f64 - lr * g / (eps + a_new).sqrt()) as f32;
        }
    })
}
