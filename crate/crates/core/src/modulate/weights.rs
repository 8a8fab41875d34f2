//! Named-tensor files.
//!
//! ```text
//! HSW1
//! dtype=f32le
//! tensor=adapter.layer1.weight:64,512
//! tensor=adapter.layer1.bias:64
//!
//! <little-endian f32 payloads, concatenated in header order>
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const HSW_MAGIC: &str = "HSW1";

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f32>,
}

impl Tensor {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, values: Vec<f32>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.contains([':', ',', '\n', '=']) {
            return Err(Error::Parameter(format!("invalid tensor name `{name}`")));
        }
        let count: usize = shape.iter().product();
        if shape.is_empty() || count != values.len() {
            return Err(Error::shape(
                format!("shape {shape:?}"),
                format!("{} values", values.len()),
            ));
        }
        Ok(Tensor {
            name,
            shape,
            values,
        })
    }

    pub(crate) fn from_f64<'a>(
        name: String,
        shape: Vec<usize>,
        values: impl Iterator<Item = &'a f64>,
    ) -> Tensor {
        Tensor {
            name,
            shape,
            values: values.map(|&v| v as f32).collect(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

/// Ordered collection of tensors with unique names.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TensorSet {
    pub tensors: Vec<Tensor>,
}

impl TensorSet {
    pub fn new(tensors: Vec<Tensor>) -> Result<Self> {
        let mut set = TensorSet::default();
        for t in tensors {
            set.push(t)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, tensor: Tensor) -> Result<()> {
        if self.tensors.iter().any(|t| t.name == tensor.name) {
            return Err(Error::Parameter(format!(
                "duplicate tensor `{}`",
                tensor.name
            )));
        }
        self.tensors.push(tensor);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::Parameter(format!("weight file lacks tensor `{name}`")))
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut header = format!("{HSW_MAGIC}\ndtype=f32le\n");
        for t in &self.tensors {
            let dims: Vec<String> = t.shape.iter().map(|d| d.to_string()).collect();
            header.push_str(&format!("tensor={}:{}\n", t.name, dims.join(",")));
        }
        header.push('\n');
        let mut out = header.into_bytes();
        for t in &self.tensors {
            for v in &t.values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let end = bytes
            .windows(2)
            .position(|w| w == b"\n\n")
            .ok_or_else(|| Error::format(1, "", "missing blank line terminating the header"))?;
        let header = std::str::from_utf8(&bytes[..end])
            .map_err(|_| Error::format(1, "", "header is not valid UTF-8"))?;
        let mut payload = &bytes[end + 2..];
        let mut lines = header.split('\n').enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, HSW_MAGIC)) => {}
            Some((n, other)) => return Err(Error::format(n, other, "expected magic `HSW1`")),
            None => return Err(Error::format(1, "", "empty header")),
        }
        let mut specs = Vec::new();
        for (n, line) in lines {
            match line.split_once('=') {
                Some(("dtype", "f32le")) => {}
                Some(("dtype", _)) => {
                    return Err(Error::format(n, line, "only dtype=f32le is supported"))
                }
                Some(("tensor", spec)) => {
                    let (name, dims) = spec
                        .rsplit_once(':')
                        .ok_or_else(|| Error::format(n, line, "expected tensor=name:d0,d1,..."))?;
                    let shape = dims
                        .split(',')
                        .map(|d| d.parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| Error::format(n, line, "bad tensor dimensions"))?;
                    specs.push((n, line, name.to_string(), shape));
                }
                _ => return Err(Error::format(n, line, "unknown header line")),
            }
        }
        let expected: usize = specs
            .iter()
            .map(|s| s.3.iter().product::<usize>() * 4)
            .sum();
        if payload.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                found: payload.len(),
            });
        }
        let mut set = TensorSet::default();
        for (n, line, name, shape) in specs {
            let count: usize = shape.iter().product();
            let (chunk, rest) = payload.split_at(count * 4);
            payload = rest;
            let values = chunk
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            let tensor = Tensor::new(name, shape, values)
                .map_err(|e| Error::format(n, line, e.to_string()))?;
            set.push(tensor)
                .map_err(|e| Error::format(n, line, e.to_string()))?;
        }
        Ok(set)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        TensorSet::decode(&bytes)
    }
}
