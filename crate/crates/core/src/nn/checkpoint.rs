//! Plain-text network checkpoints.
//!
//! Layout (UTF-8, one record per line, fields separated by single spaces):
//!
//! ```text
//! swae-network-checkpoint
//! version 1
//! layers <count>
//! layer <in_dim> <out_dim> <activation>
//! weights <out_dim * in_dim values, row-major>
//! bias <out_dim values>
//! ...                      (layer / weights / bias repeated per layer)
//! ```
//!
//! Activation tags are `identity`, `relu`, `sigmoid` and `leaky_relu:<slope>`.
//! Values are written with 17 significant digits so `f64` parameters
//! round-trip exactly.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Activation, DenseLayer, DenseNetwork};
use crate::cloud::format_sig17;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

const MAGIC: &str = "swae-network-checkpoint";
pub const FORMAT_VERSION: u32 = 1;

pub fn write<T: Scalar, W: Write>(net: &DenseNetwork<T>, mut out: W) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "version {FORMAT_VERSION}")?;
    writeln!(out, "layers {}", net.layers().len())?;
    for layer in net.layers() {
        writeln!(
            out,
            "layer {} {} {}",
            layer.in_dim(),
            layer.out_dim(),
            layer.activation
        )?;
        write_values(&mut out, "weights", layer.weights.as_slice())?;
        write_values(&mut out, "bias", &layer.bias)?;
    }
    out.flush()?;
    Ok(())
}

fn write_values<T: Scalar, W: Write>(out: &mut W, tag: &str, values: &[T]) -> Result<()> {
    write!(out, "{tag}")?;
    for v in values {
        write!(out, " {}", format_sig17(v.as_f64()))?;
    }
    writeln!(out)?;
    Ok(())
}

pub fn save<T: Scalar>(net: &DenseNetwork<T>, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write(net, std::io::BufWriter::new(f))
}

pub fn read<T: Scalar, R: Read>(input: R) -> Result<DenseNetwork<T>> {
    let mut lines = BufReader::new(input).lines();
    let mut next = |what: &str| -> Result<String> {
        lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::Checkpoint(format!("unexpected end of file, expected {what}")))
    };

    if next("header")?.trim() != MAGIC {
        return Err(Error::Checkpoint("missing header line".into()));
    }
    let version: u32 = parse_field(&next("version")?, "version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let count: usize = parse_field(&next("layer count")?, "layers")?;
    let mut layers = Vec::with_capacity(count);
    for k in 0..count {
        let head = next("layer header")?;
        let parts: Vec<&str> = head.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "layer" {
            return Err(Error::Checkpoint(format!("bad layer header {head:?}")));
        }
        let in_dim: usize = parse_num(parts[1])?;
        let out_dim: usize = parse_num(parts[2])?;
        let activation: Activation = parts[3].parse()?;
        let weights = parse_values::<T>(&next("weights")?, "weights", in_dim * out_dim, k)?;
        let bias = parse_values::<T>(&next("bias")?, "bias", out_dim, k)?;
        layers.push(DenseLayer {
            weights: Matrix::from_vec(out_dim, in_dim, weights)?,
            bias,
            activation,
        });
    }
    DenseNetwork::new(layers)
}

pub fn load<T: Scalar>(path: impl AsRef<Path>) -> Result<DenseNetwork<T>> {
    read(std::fs::File::open(path)?)
}

fn parse_num<N: std::str::FromStr>(s: &str) -> Result<N> {
    s.parse()
        .map_err(|_| Error::Checkpoint(format!("cannot parse {s:?}")))
}

fn parse_field<N: std::str::FromStr>(line: &str, key: &str) -> Result<N> {
    match line.split_whitespace().collect::<Vec<_>>().as_slice() {
        [k, v] if *k == key => parse_num(v),
        _ => Err(Error::Checkpoint(format!(
            "expected `{key} <value>`, got {line:?}"
        ))),
    }
}

fn parse_values<T: Scalar>(line: &str, tag: &str, expected: usize, layer: usize) -> Result<Vec<T>> {
    let mut it = line.split_whitespace();
    if it.next() != Some(tag) {
        return Err(Error::Checkpoint(format!(
            "layer {layer}: expected `{tag}` record"
        )));
    }
    let values = it
        .map(|v| parse_num::<f64>(v).map(T::of))
        .collect::<Result<Vec<T>>>()?;
    if values.len() != expected {
        return Err(Error::Checkpoint(format!(
            "layer {layer}: {tag} has {} values, expected {expected}",
            values.len()
        )));
    }
    Ok(values)
}
