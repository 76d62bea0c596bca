use super::loss::{loss, loss_derivatives};
use super::scoring::score_raw;
use super::{Matrix, ModelKind, ModelParameters, Norm, TrainingConfig};
use crate::data::Triple;

/// Gradient buffers shaped like the parameter tables, with touched-row tracking
/// so that clearing costs O(touched rows).
#[derive(Debug, Clone)]
pub struct Gradients {
    tables: Vec<Matrix>,
    touched: Vec<Vec<usize>>,
    flags: Vec<Vec<bool>>,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParameters) -> Self {
        let tables: Vec<Matrix> = params.tables().map(|m| Matrix::zeros(m.rows(), m.cols())).collect();
        let flags = tables.iter().map(|m| vec![false; m.rows()]).collect();
        Gradients {
            touched: vec![Vec::new(); tables.len()],
            tables,
            flags,
        }
    }

    #[inline]
    fn row_mut(&mut self, table: usize, row: usize) -> &mut [f64] {
        if !self.flags[table][row] {
            self.flags[table][row] = true;
            self.touched[table].push(row);
        }
        self.tables[table].row_mut(row)
    }

    pub fn row(&self, table: usize, row: usize) -> &[f64] {
        self.tables[table].row(row)
    }

    pub fn tables(&self) -> &[Matrix] {
        &self.tables
    }

    /// Rows of `table` that received gradient since the last clear, in first-touch order.
    pub fn touched(&self, table: usize) -> &[usize] {
        &self.touched[table]
    }

    pub fn is_finite(&self) -> bool {
        self.touched
            .iter()
            .enumerate()
            .all(|(t, rows)| rows.iter().all(|&r| self.tables[t].row(r).iter().all(|v| v.is_finite())))
    }

    pub fn clear(&mut self) {
        for (t, rows) in self.touched.iter_mut().enumerate() {
            for &r in rows.iter() {
                self.tables[t].row_mut(r).fill(0.0);
                self.flags[t][r] = false;
            }
            rows.clear();
        }
    }

    fn axpy(&mut self, table: usize, row: usize, coeff: f64, x: &[f64]) {
        for (g, v) in self.row_mut(table, row).iter_mut().zip(x) {
            *g += coeff * v;
        }
    }
}

/// ∂(−‖v‖)/∂v
fn neg_norm_grad(v: &[f64], norm: Norm) -> Vec<f64> {
    match norm {
        Norm::L1 => v
            .iter()
            .map(|&x| match x.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => -1.0,
                Some(std::cmp::Ordering::Less) => 1.0,
                _ => 0.0,
            })
            .collect(),
        Norm::L2 => {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n == 0.0 {
                vec![0.0; v.len()]
            } else {
                v.iter().map(|x| -x / n).collect()
            }
        }
    }
}

fn hadamard(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// Adds `coeff · ∂score(triple)/∂θ` into `grads`.
pub fn add_score_gradient(params: &ModelParameters, triple: &Triple, coeff: f64, grads: &mut Gradients) {
    let Triple { h, r, t } = *triple;
    let e = &params.entity;
    let rel = &params.relation;
    let ne = params.kind.entity_tables();
    let d = params.dim;
    match params.kind {
        ModelKind::TransE => {
            let (hv, rv, tv) = (e[0].row(h), rel[0].row(r), e[0].row(t));
            let v: Vec<f64> = (0..d).map(|i| hv[i] + rv[i] - tv[i]).collect();
            let g = neg_norm_grad(&v, params.norm);
            grads.axpy(0, h, coeff, &g);
            grads.axpy(0, t, -coeff, &g);
            grads.axpy(ne, r, coeff, &g);
        }
        ModelKind::TransH => {
            let (hv, tv) = (e[0].row(h), e[0].row(t));
            let (dv, w) = (rel[0].row(r), rel[1].row(r));
            let u: Vec<f64> = (0..d).map(|i| hv[i] - tv[i]).collect();
            let a: f64 = u.iter().zip(w).map(|(x, y)| x * y).sum();
            let v: Vec<f64> = (0..d).map(|i| u[i] - a * w[i] + dv[i]).collect();
            let g = neg_norm_grad(&v, params.norm);
            let gw: f64 = g.iter().zip(w).map(|(x, y)| x * y).sum();
            let grad_u: Vec<f64> = (0..d).map(|i| g[i] - gw * w[i]).collect();
            let grad_w: Vec<f64> = (0..d).map(|i| -u[i] * gw - a * g[i]).collect();
            grads.axpy(0, h, coeff, &grad_u);
            grads.axpy(0, t, -coeff, &grad_u);
            grads.axpy(ne, r, coeff, &g);
            grads.axpy(ne + 1, r, coeff, &grad_w);
        }
        ModelKind::DistMult => {
            let (hv, rv, tv) = (e[0].row(h), rel[0].row(r), e[0].row(t));
            grads.axpy(0, h, coeff, &hadamard(rv, tv));
            grads.axpy(0, t, coeff, &hadamard(hv, rv));
            grads.axpy(ne, r, coeff, &hadamard(hv, tv));
        }
        ModelKind::ComplEx => {
            // s = Σ a c e − b d e + a d f + b c f, h = a + ib, r = c + id, t = e + if
            let (a, b) = (e[0].row(h), e[1].row(h));
            let (c, dd) = (rel[0].row(r), rel[1].row(r));
            let (ee, f) = (e[0].row(t), e[1].row(t));
            let d_a: Vec<f64> = (0..d).map(|i| c[i] * ee[i] + dd[i] * f[i]).collect();
            let d_b: Vec<f64> = (0..d).map(|i| c[i] * f[i] - dd[i] * ee[i]).collect();
            let d_c: Vec<f64> = (0..d).map(|i| a[i] * ee[i] + b[i] * f[i]).collect();
            let d_d: Vec<f64> = (0..d).map(|i| a[i] * f[i] - b[i] * ee[i]).collect();
            let d_e: Vec<f64> = (0..d).map(|i| a[i] * c[i] - b[i] * dd[i]).collect();
            let d_f: Vec<f64> = (0..d).map(|i| a[i] * dd[i] + b[i] * c[i]).collect();
            grads.axpy(0, h, coeff, &d_a);
            grads.axpy(1, h, coeff, &d_b);
            grads.axpy(ne, r, coeff, &d_c);
            grads.axpy(ne + 1, r, coeff, &d_d);
            grads.axpy(0, t, coeff, &d_e);
            grads.axpy(1, t, coeff, &d_f);
        }
        ModelKind::SimplE => {
            let half = 0.5 * coeff;
            let (hh, ht) = (e[0].row(h), e[1].row(h));
            let (th, tt) = (e[0].row(t), e[1].row(t));
            let (rf, rinv) = (rel[0].row(r), rel[1].row(r));
            grads.axpy(0, h, half, &hadamard(rf, tt));
            grads.axpy(1, t, half, &hadamard(hh, rf));
            grads.axpy(ne, r, half, &hadamard(hh, tt));
            grads.axpy(0, t, half, &hadamard(rinv, ht));
            grads.axpy(1, h, half, &hadamard(th, rinv));
            grads.axpy(ne + 1, r, half, &hadamard(th, ht));
        }
    }
}

/// `(table, row)` slots penalised by the L2 term for one triple. TransH
/// normals are excluded: they are kept on the unit sphere.
fn regularised_slots(kind: ModelKind, triple: Triple) -> impl Iterator<Item = (usize, usize)> {
    let ne = kind.entity_tables();
    let nr = match kind {
        ModelKind::TransH => 1,
        _ => kind.relation_tables(),
    };
    (0..ne)
        .flat_map(move |tab| [(tab, triple.h), (tab, triple.t)])
        .chain((0..nr).map(move |tab| (ne + tab, triple.r)))
}

/// Mean over pairs of `loss(s⁺, s⁻) + λ Σ‖touched rows‖²`; when `grads` is
/// given, its gradient is accumulated there.
pub fn batch_objective(
    params: &ModelParameters,
    batch: &[(Triple, Triple)],
    config: &TrainingConfig,
    mut grads: Option<&mut Gradients>,
) -> f64 {
    if batch.is_empty() {
        return 0.0;
    }
    let scale = 1.0 / batch.len() as f64;
    let lambda = config.l2_weight;
    let tables: Vec<&Matrix> = params.tables().collect();
    let mut total = 0.0;
    for (pos, neg) in batch {
        let sp = score_raw(params, pos);
        let sn = score_raw(params, neg);
        total += loss(config.loss, sp, sn, config.margin);
        if let Some(g) = grads.as_deref_mut() {
            let (dp, dn) = loss_derivatives(config.loss, sp, sn, config.margin);
            if dp != 0.0 {
                add_score_gradient(params, pos, dp * scale, g);
            }
            if dn != 0.0 {
                add_score_gradient(params, neg, dn * scale, g);
            }
        }
        if lambda > 0.0 {
            for triple in [pos, neg] {
                for (tab, row) in regularised_slots(params.kind, *triple) {
                    let x = tables[tab].row(row);
                    total += lambda * x.iter().map(|v| v * v).sum::<f64>();
                    if let Some(g) = grads.as_deref_mut() {
                        g.axpy(tab, row, 2.0 * lambda * scale, x);
                    }
                }
            }
        }
    }
    total * scale
}
