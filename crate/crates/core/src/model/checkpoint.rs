//! Parameter checkpoints: a JSON array of `[re, im]` pairs, or a flat
//! little-endian `f64` stream `re0 im0 re1 im1 ...`, both in layout order.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;

use super::params::{Layout, ParameterVector};
use crate::error::{config_err, Result};

pub fn to_json(params: &ParameterVector) -> Result<String> {
    let pairs: Vec<[f64; 2]> = params.values().iter().map(|v| [v.re, v.im]).collect();
    Ok(serde_json::to_string(&pairs)?)
}

pub fn from_json(layout: Layout, text: &str) -> Result<ParameterVector> {
    let pairs: Vec<[f64; 2]> = serde_json::from_str(text)?;
    ParameterVector::new(layout, pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect())
}

pub fn write_binary<W: Write>(params: &ParameterVector, mut w: W) -> Result<()> {
    for v in params.values() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(layout: Layout, mut r: R) -> Result<ParameterVector> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 16 * layout.len() {
        return config_err(format!(
            "binary checkpoint has {} bytes, expected {}",
            bytes.len(),
            16 * layout.len()
        ));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            C64::new(re, im)
        })
        .collect();
    ParameterVector::new(layout, values)
}
