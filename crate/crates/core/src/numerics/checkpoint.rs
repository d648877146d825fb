//! Bit-exact parameter checkpoints.
//!
//! Line-oriented text format: a version header, the output activation,
//! layer sizes, then one line per tensor with every f32 spelled as its
//! 8-digit hex bit pattern (row-major). Hex bits round-trip exactly.

use crate::error::{Error, Result};
use crate::numerics::mlp::{Layer, Mlp, OutputActivation};
use ndarray::{Array1, Array2};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

const MAGIC: &str = "gdg-mlp v1";

pub fn write_mlp<W: Write>(out: &mut W, net: &Mlp) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "activation {}", net.output_activation().name())?;
    let sizes: Vec<String> = net.layer_sizes().iter().map(|s| s.to_string()).collect();
    writeln!(out, "sizes {}", sizes.join(" "))?;
    for (li, layer) in net.layers().iter().enumerate() {
        let mut wl = String::with_capacity(layer.w.len() * 9 + 16);
        write!(wl, "layer {li} w").expect("string write");
        for v in layer.w.iter() {
            write!(wl, " {:08x}", v.to_bits()).expect("string write");
        }
        writeln!(out, "{wl}")?;
        let mut bl = String::with_capacity(layer.b.len() * 9 + 16);
        write!(bl, "layer {li} b").expect("string write");
        for v in layer.b.iter() {
            write!(bl, " {:08x}", v.to_bits()).expect("string write");
        }
        writeln!(out, "{bl}")?;
    }
    writeln!(out, "end")?;
    Ok(())
}

pub fn read_mlp<R: Read>(input: R) -> Result<Mlp> {
    let mut lines = BufReader::new(input).lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::Checkpoint("unexpected end of file".into()))?
            .map_err(Error::from)
    };

    if next()? != MAGIC {
        return Err(Error::Checkpoint("bad magic line".into()));
    }
    let act_line = next()?;
    let act = act_line
        .strip_prefix("activation ")
        .ok_or_else(|| Error::Checkpoint("missing activation line".into()))?;
    let activation = OutputActivation::from_name(act)?;

    let sizes_line = next()?;
    let sizes: Vec<usize> = sizes_line
        .strip_prefix("sizes ")
        .ok_or_else(|| Error::Checkpoint("missing sizes line".into()))?
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| Error::Checkpoint(format!("bad size: {e}"))))
        .collect::<Result<_>>()?;
    if sizes.len() < 2 {
        return Err(Error::Checkpoint("need at least two layer sizes".into()));
    }

    let mut layers = Vec::with_capacity(sizes.len() - 1);
    for li in 0..sizes.len() - 1 {
        let (fan_in, fan_out) = (sizes[li], sizes[li + 1]);
        let w = parse_tensor(&next()?, &format!("layer {li} w"), fan_in * fan_out)?;
        let b = parse_tensor(&next()?, &format!("layer {li} b"), fan_out)?;
        layers.push(Layer {
            w: Array2::from_shape_vec((fan_in, fan_out), w)
                .map_err(|e| Error::Checkpoint(e.to_string()))?,
            b: Array1::from_vec(b),
        });
    }
    if next()? != "end" {
        return Err(Error::Checkpoint("missing end marker".into()));
    }
    Mlp::from_layers(layers, activation)
}

fn parse_tensor(line: &str, prefix: &str, expect: usize) -> Result<Vec<f32>> {
    let rest = line
        .strip_prefix(prefix)
        .ok_or_else(|| Error::Checkpoint(format!("expected `{prefix}` line")))?;
    let vals: Vec<f32> = rest
        .split_whitespace()
        .map(|t| {
            u32::from_str_radix(t, 16)
                .map(f32::from_bits)
                .map_err(|e| Error::Checkpoint(format!("bad hex float: {e}")))
        })
        .collect::<Result<_>>()?;
    if vals.len() != expect {
        return Err(Error::Checkpoint(format!(
            "{prefix}: expected {expect} values, got {}",
            vals.len()
        )));
    }
    Ok(vals)
}

pub fn save_mlp(path: &Path, net: &Mlp) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_mlp(&mut file, net)
}

pub fn load_mlp(path: &Path) -> Result<Mlp> {
    read_mlp(std::fs::File::open(path)?)
}
