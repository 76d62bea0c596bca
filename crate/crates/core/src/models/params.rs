use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ModelKind, Norm};
use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Config(format!(
                "matrix data has {} values, expected {rows}×{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Embedding tables of one model.
///
/// | kind     | `entity`              | `relation`                     |
/// |----------|-----------------------|--------------------------------|
/// | TransE   | `[e]`                 | `[r]`                          |
/// | TransH   | `[e]`                 | `[d_r, w_r]` (unit-norm `w_r`) |
/// | DistMult | `[e]`                 | `[diag(W_r)]`                  |
/// | ComplEx  | `[Re e, Im e]`        | `[Re r, Im r]`                 |
/// | SimplE   | `[e (head), e (tail)]`| `[r, r⁻¹]`                     |
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub kind: ModelKind,
    pub dim: usize,
    pub seed: u64,
    pub norm: Norm,
    pub entity: Vec<Matrix>,
    pub relation: Vec<Matrix>,
}

impl ModelParameters {
    pub fn num_entities(&self) -> usize {
        self.entity[0].rows()
    }

    pub fn num_relations(&self) -> usize {
        self.relation[0].rows()
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    /// Hyperplane normals `w_r` (TransH only).
    pub fn transh_normals(&self) -> Option<&Matrix> {
        (self.kind == ModelKind::TransH).then(|| &self.relation[1])
    }

    /// All tables, entity tables first.
    pub fn tables(&self) -> impl Iterator<Item = &Matrix> {
        self.entity.iter().chain(&self.relation)
    }

    pub fn tables_mut(&mut self) -> impl Iterator<Item = &mut Matrix> {
        self.entity.iter_mut().chain(self.relation.iter_mut())
    }

    pub fn num_parameters(&self) -> usize {
        self.tables().map(|m| m.as_slice().len()).sum()
    }

    pub fn check_finite(&self) -> Result<()> {
        for (i, m) in self.tables().enumerate() {
            if let Some(pos) = m.as_slice().iter().position(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!(
                    "non-finite value in table {i} at row {}",
                    pos / m.cols()
                )));
            }
        }
        Ok(())
    }

    /// Scales every TransH normal that drifted off the unit sphere back onto it.
    pub(crate) fn project_normals(&mut self) {
        if self.kind == ModelKind::TransH {
            project_rows(&mut self.relation[1]);
        }
    }

    /// Scales every entity embedding onto the unit sphere.
    pub(crate) fn project_entities(&mut self) {
        self.entity.iter_mut().for_each(project_rows);
    }
}

fn project_rows(m: &mut Matrix) {
    for i in 0..m.rows() {
        let row = m.row_mut(i);
        let sq: f64 = row.iter().map(|v| v * v).sum();
        if (sq - 1.0).abs() > 1e-12 && sq > 0.0 {
            let inv = 1.0 / sq.sqrt();
            row.iter_mut().for_each(|v| *v *= inv);
        }
    }
}

/// Draws every entry uniformly from `[-6/√d, 6/√d]` with a ChaCha8 stream
/// seeded by `seed`; TransH normals are then scaled to unit length.
pub fn init_parameters(
    kind: ModelKind,
    (num_entities, num_relations, dim): (usize, usize, usize),
    seed: u64,
) -> Result<ModelParameters> {
    if num_entities == 0 || num_relations == 0 || dim == 0 {
        return Err(Error::Config(format!(
            "parameter shapes must be positive, got |E|={num_entities}, |R|={num_relations}, d={dim}"
        )));
    }
    let bound = 6.0 / (dim as f64).sqrt();
    let dist = Uniform::new_inclusive(-bound, bound);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |rows: usize| {
        let data = (0..rows * dim).map(|_| dist.sample(&mut rng)).collect();
        Matrix { rows, cols: dim, data }
    };
    let entity = (0..kind.entity_tables()).map(|_| draw(num_entities)).collect();
    let relation = (0..kind.relation_tables()).map(|_| draw(num_relations)).collect();
    let mut params = ModelParameters {
        kind,
        dim,
        seed,
        norm: Norm::default(),
        entity,
        relation,
    };
    if kind == ModelKind::TransH {
        for i in 0..num_relations {
            let row = params.relation[1].row_mut(i);
            let n = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            row.iter_mut().for_each(|v| *v /= n);
        }
    }
    Ok(params)
}
