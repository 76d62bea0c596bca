use super::gradient::{batch_objective, Gradients};
use super::{Matrix, ModelParameters, OptimizerKind, TrainingConfig, ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON};
use crate::data::Triple;
use crate::error::{Error, Result};

/// Optimizer moments plus a reusable gradient workspace. Owned by the training loop.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    kind: OptimizerKind,
    step: u64,
    first_moment: Vec<Matrix>,
    second_moment: Vec<Matrix>,
    grads: Gradients,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, params: &ModelParameters) -> Self {
        let zeros = || -> Vec<Matrix> {
            match kind {
                OptimizerKind::Adam => params.tables().map(|m| Matrix::zeros(m.rows(), m.cols())).collect(),
                OptimizerKind::Sgd => Vec::new(),
            }
        };
        OptimizerState {
            kind,
            step: 0,
            first_moment: zeros(),
            second_moment: zeros(),
            grads: Gradients::zeros_like(params),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }
}

/// One update on a batch of (positive, negative) pairs. Returns the batch
/// objective evaluated before the update. On a non-finite gradient the
/// parameters are left untouched and a numeric error is returned.
pub fn gradient_step(
    params: &mut ModelParameters,
    state: &mut OptimizerState,
    batch: &[(Triple, Triple)],
    config: &TrainingConfig,
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Config("gradient step on an empty batch".into()));
    }
    state.grads.clear();
    let objective = batch_objective(params, batch, config, Some(&mut state.grads));
    if !objective.is_finite() || !state.grads.is_finite() {
        state.grads.clear();
        return Err(Error::Numeric(format!(
            "non-finite loss or gradient at optimizer step {}",
            state.step + 1
        )));
    }
    state.step += 1;
    let lr = config.learning_rate;
    match state.kind {
        OptimizerKind::Sgd => {
            for (tab, m) in params.tables_mut().enumerate() {
                for &row in state.grads.touched(tab) {
                    let g = state.grads.row(tab, row);
                    for (p, gi) in m.row_mut(row).iter_mut().zip(g) {
                        *p -= lr * gi;
                    }
                }
            }
        }
        OptimizerKind::Adam => {
            let t = state.step as f64;
            let bias1 = 1.0 - ADAM_BETA1.powf(t);
            let bias2 = 1.0 - ADAM_BETA2.powf(t);
            let grads = state.grads.tables();
            for (tab, m) in params.tables_mut().enumerate() {
                let g = grads[tab].as_slice();
                let m1 = state.first_moment[tab].as_mut_slice();
                let m2 = state.second_moment[tab].as_mut_slice();
                for (i, p) in m.as_mut_slice().iter_mut().enumerate() {
                    m1[i] = ADAM_BETA1 * m1[i] + (1.0 - ADAM_BETA1) * g[i];
                    m2[i] = ADAM_BETA2 * m2[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                    let m_hat = m1[i] / bias1;
                    let v_hat = m2[i] / bias2;
                    *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
                }
            }
        }
    }
    params.project_normals();
    if config.unit_entities {
        params.project_entities();
    }
    Ok(objective)
}
