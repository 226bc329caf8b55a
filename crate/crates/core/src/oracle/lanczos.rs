use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::basis::FixedWeightBasis;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::model::SpinConfiguration;

/// Real symmetric sparse matrix of a weight-conserving Hamiltonian on one
/// fixed-weight sector, rows indexed by colex rank.
#[derive(Clone, Debug)]
pub struct SectorMatrix {
    row_start: Vec<usize>,
    columns: Vec<u32>,
    values: Vec<f64>,
}

impl SectorMatrix {
    pub fn build(h: &Hamiltonian, basis: &FixedWeightBasis) -> Result<Self> {
        if !h.conserves_weight() {
            return Err(Error::Config("sector matrices need a weight-conserving Hamiltonian".into()));
        }
        if basis.dim() > u32::MAX as usize {
            return Err(Error::Capacity("sector too large for 32-bit column indices".into()));
        }
        let n = basis.n();
        let rows: Vec<Vec<(u32, f64)>> = (0..basis.dim())
            .into_par_iter()
            .map(|r| {
                let x = SpinConfiguration::new(basis.unrank(r), n).expect("sector state");
                let mut row: Vec<(u32, f64)> = Vec::new();
                h.for_each_connected(x, |y, v| row.push((basis.rank(y.bits()) as u32, v)));
                row.sort_by_key(|e| e.0);
                row
            })
            .collect();
        let mut row_start = Vec::with_capacity(rows.len() + 1);
        let mut columns = Vec::new();
        let mut values = Vec::new();
        row_start.push(0);
        for row in rows {
            for (c, v) in row {
                columns.push(c);
                values.push(v);
            }
            row_start.push(columns.len());
        }
        Ok(Self { row_start, columns, values })
    }

    pub fn dim(&self) -> usize {
        self.row_start.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row-parallel product; each row is reduced in a fixed order.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().with_min_len(1024).for_each(|(r, o)| {
            let range = self.row_start[r]..self.row_start[r + 1];
            *o = self.columns[range.clone()].iter().zip(&self.values[range]).map(|(&c, &h)| h * v[c as usize]).sum();
        });
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for r in 0..dim {
            for i in self.row_start[r]..self.row_start[r + 1] {
                m[(r, self.columns[i] as usize)] += self.values[i];
            }
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosConfig {
    /// Krylov vectors per cycle before restarting.
    pub max_basis: usize,
    pub max_restarts: usize,
    /// Required `‖H v - E v‖` per eigenpair.
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self { max_basis: 300, max_restarts: 60, residual_tol: 1e-8, seed: 0x5eed }
    }
}

/// Eigenpairs from [`lowest_eigenpairs`], ascending.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for q in against {
            let c = dot(v, q);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
    }
}

/// Lowest `count` eigenpairs of `op` by Lanczos with full
/// reorthogonalization and locking. Each cycle locks at most its lowest Ritz
/// pair and the next cycle restarts from the following Ritz vector plus a
/// random component, so degenerate partners are not skipped.
pub fn lowest_eigenpairs(op: &SectorMatrix, count: usize, config: &LanczosConfig) -> Result<Eigenpairs> {
    let dim = op.dim();
    let count = count.min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut random = |len: usize| -> Vec<f64> { (0..len).map(|_| StandardNormal.sample(&mut rng)).collect() };
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut start = random(dim);
    let mut work = vec![0.0; dim];
    let mut cycles = 0;

    while locked.len() < count {
        cycles += 1;
        if cycles > config.max_restarts {
            return Err(Error::Convergence(format!(
                "{} of {count} eigenpairs reached residual {:e} after {} cycles",
                locked.len(),
                config.residual_tol,
                config.max_restarts
            )));
        }
        orthogonalize(&mut start, &locked);
        let mut s_norm = norm(&start);
        if s_norm < 1e-10 {
            start = random(dim);
            orthogonalize(&mut start, &locked);
            s_norm = norm(&start);
        }
        let max_basis = config.max_basis.min(dim - locked.len()).max(1);
        let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|x| x / s_norm).collect()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();

        loop {
            let j = basis.len() - 1;
            op.apply(&basis[j], &mut work);
            let a = dot(&work, &basis[j]);
            alpha.push(a);
            orthogonalize(&mut work, &locked);
            orthogonalize(&mut work, &basis);
            let b = norm(&work);
            let m = basis.len();
            let exhausted = m >= max_basis || b <= 1e-12 * a.abs().max(1.0);
            if exhausted {
                break;
            }
            if m % 25 == 0 {
                let (_, s) = tridiagonal_eigen(&alpha, &beta);
                if (b * s[(m - 1, 0)]).abs() <= 0.1 * config.residual_tol {
                    break;
                }
            }
            beta.push(b);
            basis.push(work.iter().map(|x| x / b).collect());
        }

        let (theta, s) = tridiagonal_eigen(&alpha, &beta);
        let ritz = |i: usize, locked: &[Vec<f64>]| {
            let mut y = vec![0.0; dim];
            for (q, c) in basis.iter().zip(s.column(i).iter()) {
                y.iter_mut().zip(q).for_each(|(acc, x)| *acc += c * x);
            }
            orthogonalize(&mut y, locked);
            let ny = norm(&y);
            y.iter_mut().for_each(|x| *x /= ny);
            y
        };
        let y = ritz(0, &locked);
        let residual = residual_norm(op, &y, theta[0], &mut work);
        start = if residual <= config.residual_tol {
            locked.push(y);
            let noise = random(dim);
            let noise_norm = norm(&noise);
            if theta.len() > 1 {
                let mut v = ritz(1, &locked);
                v.iter_mut().zip(&noise).for_each(|(x, r)| *x += 1e-3 * r / noise_norm);
                v
            } else {
                noise
            }
        } else {
            y
        };
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = locked
        .into_iter()
        .map(|v| {
            op.apply(&v, &mut work);
            (dot(&v, &work), v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Eigenpairs { values: Vec::new(), vectors: Vec::new(), residuals: Vec::new() };
    for (e, v) in pairs {
        out.residuals.push(residual_norm(op, &v, e, &mut work));
        out.values.push(e);
        out.vectors.push(v);
    }
    Ok(out)
}

fn residual_norm(op: &SectorMatrix, v: &[f64], e: f64, work: &mut [f64]) -> f64 {
    op.apply(v, work);
    work.iter().zip(v).map(|(hv, x)| (hv - e * x).powi(2)).sum::<f64>().sqrt()
}

/// Eigen-decomposition of the Lanczos tridiagonal, ascending.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            alpha[r]
        } else if r == c + 1 {
            beta[c]
        } else if c == r + 1 {
            beta[r]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}
