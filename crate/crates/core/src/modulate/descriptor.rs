use std::str::FromStr;

use ndarray::Array1;

use crate::degrade::Tag;
use crate::error::{Error, Result};

use super::linear::Linear;
use super::weights::{Tensor, TensorSet};

pub const D_TEXT: usize = 512;
pub const D_HIDDEN: usize = 64;
pub const LEAKY_SLOPE: f64 = 0.01;

/// Embedding of a degradation description.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDescriptor {
    pub embedding: Array1<f64>,
}

impl TaskDescriptor {
    pub fn dim(&self) -> usize {
        self.embedding.len()
    }
}

/// Multi-hot indicator of `tags` over the tag vocabulary in its canonical
/// order, zero-padded to `d_text`. Duplicates and order are irrelevant.
pub fn encode_tag_set(tags: &[Tag], d_text: usize) -> Result<TaskDescriptor> {
    if d_text < Tag::VOCABULARY.len() {
        return Err(Error::Parameter(format!(
            "descriptor width {d_text} is smaller than the {}-token vocabulary",
            Tag::VOCABULARY.len()
        )));
    }
    let mut embedding = Array1::zeros(d_text);
    for t in tags {
        embedding[t.index()] = 1.0;
    }
    Ok(TaskDescriptor { embedding })
}

/// [`encode_tag_set`] over token strings such as `"noisy"`, with the
/// default width of 512.
pub fn encode_tags<S: AsRef<str>>(tokens: &[S]) -> Result<TaskDescriptor> {
    let tags = tokens
        .iter()
        .map(|t| Tag::from_str(t.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    encode_tag_set(&tags, D_TEXT)
}

pub fn leaky_relu(x: f64, slope: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

/// Two-layer adapter `layer2(leaky(layer1(x)))`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdapterWeights {
    pub layer1: Linear,
    pub layer2: Linear,
    pub slope: f64,
}

impl AdapterWeights {
    pub fn new(layer1: Linear, layer2: Linear, slope: f64) -> Result<Self> {
        if layer1.d_out() != layer2.d_in() {
            return Err(Error::shape(
                format!("layer1 output {}", layer1.d_out()),
                format!("layer2 input {}", layer2.d_in()),
            ));
        }
        if !slope.is_finite() {
            return Err(Error::Parameter("leaky slope must be finite".into()));
        }
        Ok(AdapterWeights {
            layer1,
            layer2,
            slope,
        })
    }

    pub fn zeros(d_tag: usize, d_hidden: usize, d_text: usize) -> Self {
        AdapterWeights {
            layer1: Linear::zeros(d_tag, d_hidden),
            layer2: Linear::zeros(d_hidden, d_text),
            slope: LEAKY_SLOPE,
        }
    }

    pub fn seeded(d_tag: usize, d_hidden: usize, d_text: usize, seed: u64) -> Self {
        AdapterWeights {
            layer1: Linear::seeded(d_tag, d_hidden, (d_tag as f64).sqrt().recip(), seed),
            layer2: Linear::seeded(
                d_hidden,
                d_text,
                (d_hidden as f64).sqrt().recip(),
                seed ^ 0xA5A5,
            ),
            slope: LEAKY_SLOPE,
        }
    }

    pub fn to_tensors(&self) -> Vec<Tensor> {
        let mut out = self.layer1.to_tensors("adapter.layer1");
        out.extend(self.layer2.to_tensors("adapter.layer2"));
        out.push(Tensor::from_f64(
            "adapter.slope".into(),
            vec![1],
            [self.slope].iter(),
        ));
        out
    }

    pub fn from_tensors(set: &TensorSet) -> Result<Self> {
        let slope = set.get("adapter.slope")?;
        AdapterWeights::new(
            Linear::from_tensors(set, "adapter.layer1")?,
            Linear::from_tensors(set, "adapter.layer2")?,
            slope.values[0] as f64,
        )
    }
}

pub fn adapt(descriptor: &TaskDescriptor, weights: &AdapterWeights) -> Result<TaskDescriptor> {
    let hidden = weights
        .layer1
        .apply(descriptor.embedding.view())?
        .mapv(|v| leaky_relu(v, weights.slope));
    Ok(TaskDescriptor {
        embedding: weights.layer2.apply(hidden.view())?,
    })
}

/// Per-channel intensity and bias controllers.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerPair {
    pub lambda_low: Array1<f64>,
    pub lambda_high: Array1<f64>,
    pub mu: Array1<f64>,
}

impl ControllerPair {
    pub fn zeros(channels: usize) -> Self {
        ControllerPair {
            lambda_low: Array1::zeros(channels),
            lambda_high: Array1::zeros(channels),
            mu: Array1::zeros(channels),
        }
    }

    pub fn channels(&self) -> usize {
        self.mu.len()
    }

    /// `lambda_low ++ lambda_high ++ mu`.
    pub fn concat(&self) -> Array1<f64> {
        self.lambda_low
            .iter()
            .chain(self.lambda_high.iter())
            .chain(self.mu.iter())
            .copied()
            .collect()
    }
}

/// One projection of the descriptor, split into three contiguous chunks of
/// equal length.
pub fn make_controllers(
    descriptor: &TaskDescriptor,
    projection: &Linear,
) -> Result<ControllerPair> {
    if !projection.d_out().is_multiple_of(3) {
        return Err(Error::shape(
            format!("projection output {}", projection.d_out()),
            "a multiple of 3",
        ));
    }
    let out = projection.apply(descriptor.embedding.view())?;
    let d = out.len() / 3;
    Ok(ControllerPair {
        lambda_low: out.slice(ndarray::s![..d]).to_owned(),
        lambda_high: out.slice(ndarray::s![d..2 * d]).to_owned(),
        mu: out.slice(ndarray::s![2 * d..]).to_owned(),
    })
}
