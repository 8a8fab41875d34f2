use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

use super::linear::Linear;

/// Query, key and value projections of one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct QkvProjection {
    pub q: Linear,
    pub k: Linear,
    pub v: Linear,
}

impl QkvProjection {
    pub fn new(q: Linear, k: Linear, v: Linear) -> Result<Self> {
        if q.d_in() != k.d_in() || k.d_in() != v.d_in() {
            return Err(Error::shape(
                format!("q/k/v inputs {}/{}/{}", q.d_in(), k.d_in(), v.d_in()),
                "a common token width",
            ));
        }
        if q.d_out() != k.d_out() {
            return Err(Error::shape(
                format!("query width {}", q.d_out()),
                format!("key width {}", k.d_out()),
            ));
        }
        Ok(QkvProjection { q, k, v })
    }

    pub fn identity(d: usize) -> Self {
        QkvProjection {
            q: Linear::identity(d),
            k: Linear::identity(d),
            v: Linear::identity(d),
        }
    }

    pub fn seeded(d_model: usize, d_key: usize, d_value: usize, seed: u64) -> Self {
        let s = (d_model as f64).sqrt().recip();
        QkvProjection {
            q: Linear::seeded(d_model, d_key, s, seed),
            k: Linear::seeded(d_model, d_key, s, seed.wrapping_add(1)),
            v: Linear::seeded(d_model, d_value, s, seed.wrapping_add(2)),
        }
    }

    /// `(Q, K, V)` of a `[tokens x d_model]` matrix.
    pub fn project(
        &self,
        tokens: ArrayView2<'_, f64>,
    ) -> Result<(Array2<f64>, Array2<f64>, Array2<f64>)> {
        Ok((
            self.q.apply_rows(tokens)?,
            self.k.apply_rows(tokens)?,
            self.v.apply_rows(tokens)?,
        ))
    }
}

/// Row-wise softmax with the row maximum subtracted first.
pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

fn check_scale(d_k: f64) -> Result<()> {
    if d_k > 0.0 && d_k.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "attention scale d_k must be positive, got {d_k}"
        )))
    }
}

/// `softmax(Q K^T / d_k)`.
pub fn attention_weights(q: &Array2<f64>, k: &Array2<f64>, d_k: f64) -> Result<Array2<f64>> {
    check_scale(d_k)?;
    if q.ncols() != k.ncols() {
        return Err(Error::shape(
            format!("queries of width {}", q.ncols()),
            format!("keys of width {}", k.ncols()),
        ));
    }
    Ok(softmax_rows(&(q.dot(&k.t()) / d_k)))
}

/// `softmax(Q K^T / d_k) V`.
pub fn attend(q: &Array2<f64>, k: &Array2<f64>, v: &Array2<f64>, d_k: f64) -> Result<Array2<f64>> {
    if k.nrows() != v.nrows() {
        return Err(Error::shape(
            format!("{} keys", k.nrows()),
            format!("{} values", v.nrows()),
        ));
    }
    Ok(attention_weights(q, k, d_k)?.dot(v))
}

/// Query exchange between two branches: returns
/// `(softmax(Q_a K_b^T / d_k) V_b, softmax(Q_b K_a^T / d_k) V_a)`.
pub fn cross_attend(
    f_alpha: &Array2<f64>,
    f_beta: &Array2<f64>,
    proj_alpha: &QkvProjection,
    proj_beta: &QkvProjection,
    d_k: f64,
) -> Result<(Array2<f64>, Array2<f64>)> {
    let (qa, ka, va) = proj_alpha.project(f_alpha.view())?;
    let (qb, kb, vb) = proj_beta.project(f_beta.view())?;
    Ok((attend(&qa, &kb, &vb, d_k)?, attend(&qb, &ka, &va, d_k)?))
}

/// `softmax(Q K^T / d_k) V` within one branch.
pub fn self_attend(f_gamma: &Array2<f64>, proj: &QkvProjection, d_k: f64) -> Result<Array2<f64>> {
    let (q, k, v) = proj.project(f_gamma.view())?;
    attend(&q, &k, &v, d_k)
}
