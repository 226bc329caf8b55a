use num_complex::Complex64 as C64;

use super::activation::gelu_with_derivative;
use super::params::{Layout, ParameterVector};
use super::{check_finite, check_sites, SpinConfiguration, Wavefunction};
use crate::error::Result;

/// Three bias-free GELU layers `n → h1 → h2 → h3`; the log-amplitude is the
/// sum of the last layer's outputs.
///
/// Layout: `W_v` (h1 × n), `W_h1` (h2 × h1), `W_h2` (h3 × h2), all row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FeedForward {
    n: usize,
    hidden: [usize; 3],
    params: ParameterVector,
}

struct Activations {
    pre: [Vec<C64>; 3],
    slope: [Vec<C64>; 3],
    out: [Vec<C64>; 3],
}

fn matvec(w: &[C64], rows: usize, cols: usize, x: &[C64]) -> Vec<C64> {
    (0..rows)
        .map(|r| w[r * cols..(r + 1) * cols].iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

impl FeedForward {
    pub fn layout(n: usize, hidden: [usize; 3]) -> Layout {
        let [h1, h2, h3] = hidden;
        Layout::new(&[("W_v", h1, n), ("W_h1", h2, h1), ("W_h2", h3, h2)])
    }

    pub fn from_parameters(n: usize, hidden: [usize; 3], params: ParameterVector) -> Result<Self> {
        let params = ParameterVector::new(Self::layout(n, hidden), params.values().to_vec())?;
        Ok(Self { n, hidden, params })
    }

    pub fn hidden(&self) -> [usize; 3] {
        self.hidden
    }

    fn forward(&self, x: SpinConfiguration) -> Activations {
        let [h1, h2, h3] = self.hidden;
        let input: Vec<C64> = x.spins().map(|z| C64::new(z, 0.0)).collect();
        let shapes = [(h1, self.n, "W_v"), (h2, h1, "W_h1"), (h3, h2, "W_h2")];
        let mut acts = Activations {
            pre: Default::default(),
            slope: Default::default(),
            out: Default::default(),
        };
        let mut current = input;
        for (layer, &(rows, cols, name)) in shapes.iter().enumerate() {
            let pre = matvec(self.params.view(name), rows, cols, &current);
            let (out, slope): (Vec<C64>, Vec<C64>) =
                pre.iter().map(|&p| gelu_with_derivative(p)).unzip();
            acts.pre[layer] = pre;
            acts.slope[layer] = slope;
            acts.out[layer] = out.clone();
            current = out;
        }
        acts
    }
}

impl Wavefunction for FeedForward {
    fn n_sites(&self) -> usize {
        self.n
    }

    fn parameters(&self) -> &ParameterVector {
        &self.params
    }

    fn parameters_mut(&mut self) -> &mut ParameterVector {
        &mut self.params
    }

    fn log_amplitude(&self, x: SpinConfiguration) -> Result<C64> {
        check_sites(self.n, x)?;
        let acts = self.forward(x);
        check_finite(acts.out[2].iter().sum())
    }

    fn log_derivatives_into(&self, x: SpinConfiguration, out: &mut [C64]) -> Result<C64> {
        check_sites(self.n, x)?;
        let [h1, h2, h3] = self.hidden;
        let n = self.n;
        let acts = self.forward(x);
        let log_psi: C64 = acts.out[2].iter().sum();
        debug_assert_eq!(acts.pre[0].len(), h1);

        let off_v = 0;
        let off_h1 = h1 * n;
        let off_h2 = off_h1 + h2 * h1;

        // Backward pass; holomorphic, so plain (unconjugated) transposes.
        let g3: Vec<C64> = acts.slope[2].clone();
        for j in 0..h3 {
            for k in 0..h2 {
                out[off_h2 + j * h2 + k] = g3[j] * acts.out[1][k];
            }
        }
        let w_h2 = self.params.view("W_h2");
        let g2: Vec<C64> = (0..h2)
            .map(|k| acts.slope[1][k] * (0..h3).map(|j| w_h2[j * h2 + k] * g3[j]).sum::<C64>())
            .collect();
        for j in 0..h2 {
            for k in 0..h1 {
                out[off_h1 + j * h1 + k] = g2[j] * acts.out[0][k];
            }
        }
        let w_h1 = self.params.view("W_h1");
        let g1: Vec<C64> = (0..h1)
            .map(|k| acts.slope[0][k] * (0..h2).map(|j| w_h1[j * h1 + k] * g2[j]).sum::<C64>())
            .collect();
        for j in 0..h1 {
            for k in 0..n {
                out[off_v + j * n + k] = g1[j] * x.spin(k);
            }
        }
        check_finite(log_psi)
    }
}
