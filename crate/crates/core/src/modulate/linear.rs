use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::seed;

use super::weights::{Tensor, TensorSet};

/// Dense affine map `y = W x + b` with `W` stored `[out x in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Linear {
    pub fn new(weight: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        if weight.nrows() != bias.len() {
            return Err(Error::shape(
                format!("weight {}x{}", weight.nrows(), weight.ncols()),
                format!("bias {}", bias.len()),
            ));
        }
        Ok(Linear { weight, bias })
    }

    pub fn zeros(d_in: usize, d_out: usize) -> Self {
        Linear {
            weight: Array2::zeros((d_out, d_in)),
            bias: Array1::zeros(d_out),
        }
    }

    pub fn identity(d: usize) -> Self {
        Linear {
            weight: Array2::eye(d),
            bias: Array1::zeros(d),
        }
    }

    /// Weights and biases uniform in `[-scale, scale]`, rounded to `f32` so
    /// they survive a weight-file round trip unchanged.
    pub fn seeded(d_in: usize, d_out: usize, scale: f64, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let mut draw = || rng.random_range(-scale..=scale) as f32 as f64;
        let weight = Array2::from_shape_simple_fn((d_out, d_in), &mut draw);
        let bias = Array1::from_shape_simple_fn(d_out, &mut draw);
        Linear { weight, bias }
    }

    pub fn d_in(&self) -> usize {
        self.weight.ncols()
    }

    pub fn d_out(&self) -> usize {
        self.weight.nrows()
    }

    pub fn apply(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if x.len() != self.d_in() {
            return Err(Error::shape(
                format!("input of length {}", x.len()),
                format!("layer expecting {}", self.d_in()),
            ));
        }
        Ok(self.weight.dot(&x) + &self.bias)
    }

    /// Row-wise application to a `[tokens x d_in]` matrix.
    pub fn apply_rows(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.d_in() {
            return Err(Error::shape(
                format!("tokens of width {}", x.ncols()),
                format!("layer expecting {}", self.d_in()),
            ));
        }
        Ok(x.dot(&self.weight.t()) + &self.bias)
    }

    pub fn to_tensors(&self, prefix: &str) -> Vec<Tensor> {
        vec![
            Tensor::from_f64(
                format!("{prefix}.weight"),
                vec![self.d_out(), self.d_in()],
                self.weight.iter(),
            ),
            Tensor::from_f64(
                format!("{prefix}.bias"),
                vec![self.d_out()],
                self.bias.iter(),
            ),
        ]
    }

    pub fn from_tensors(set: &TensorSet, prefix: &str) -> Result<Self> {
        let w = set.get(&format!("{prefix}.weight"))?;
        let b = set.get(&format!("{prefix}.bias"))?;
        if w.shape.len() != 2 || b.shape.len() != 1 {
            return Err(Error::Invariant(format!(
                "tensors under '{prefix}' have the wrong rank"
            )));
        }
        let weight = Array2::from_shape_vec((w.shape[0], w.shape[1]), w.to_f64())
            .map_err(|e| Error::Invariant(e.to_string()))?;
        Linear::new(weight, Array1::from(b.to_f64()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_loop_oracle() {
        let l = Linear::seeded(5, 3, 1.0, 9);
        let x = Array1::from(vec![0.5, -1.0, 2.0, 0.0, 0.25]);
        let y = l.apply(x.view()).unwrap();
        for o in 0..3 {
            let mut acc = l.bias[o];
            for i in 0..5 {
                acc += l.weight[[o, i]] * x[i];
            }
            assert!((acc - y[o]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_wrong_input_length() {
        let l = Linear::zeros(4, 2);
        assert!(matches!(
            l.apply(Array1::zeros(3).view()),
            Err(Error::Shape { .. })
        ));
        assert!(Linear::new(Array2::zeros((2, 2)), Array1::zeros(3)).is_err());
    }
}
