//! Bit labeling: groups of `log2 M` bits per user, users served round-robin.

use crate::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Labeling {
    /// Bit group read as an MSB-first binary number.
    #[default]
    Natural,
    /// Neighboring codeword indices differ in one bit.
    Gray,
}

pub fn bits_per_symbol(m: usize) -> Result<usize> {
    if m < 2 || !m.is_power_of_two() {
        return Err(SimError::Config(format!("codebook size {m} is not a power of two >= 2")));
    }
    Ok(m.trailing_zeros() as usize)
}

fn gray_decode(mut g: usize) -> usize {
    let mut shift = g >> 1;
    while shift != 0 {
        g ^= shift;
        shift >>= 1;
    }
    g
}

/// Maps a bit stream to one codeword tuple per multiplexed symbol.
pub fn map_bits(bits: &[u8], users: usize, m: usize, labeling: Labeling) -> Result<Vec<Vec<usize>>> {
    let b = bits_per_symbol(m)?;
    let per_symbol = users * b;
    if users == 0 || !bits.len().is_multiple_of(per_symbol) {
        return Err(SimError::Config(format!(
            "{} bits do not split into symbols of {per_symbol} bits",
            bits.len()
        )));
    }
    if let Some(pos) = bits.iter().position(|&x| x > 1) {
        return Err(SimError::Config(format!("bit {pos} is {}, not 0 or 1", bits[pos])));
    }
    Ok(bits
        .chunks_exact(per_symbol)
        .map(|sym| {
            sym.chunks_exact(b)
                .map(|group| {
                    let v = group.iter().fold(0usize, |acc, &x| (acc << 1) | usize::from(x));
                    match labeling {
                        Labeling::Natural => v,
                        Labeling::Gray => gray_decode(v),
                    }
                })
                .collect()
        })
        .collect())
}

/// Inverse of [`map_bits`].
pub fn demap(symbols: &[Vec<usize>], m: usize, labeling: Labeling) -> Result<Vec<u8>> {
    let b = bits_per_symbol(m)?;
    let mut out = Vec::with_capacity(symbols.iter().map(Vec::len).sum::<usize>() * b);
    for sym in symbols {
        for &idx in sym {
            if idx >= m {
                return Err(SimError::Config(format!("codeword index {idx} out of range for M = {m}")));
            }
            let v = match labeling {
                Labeling::Natural => idx,
                Labeling::Gray => idx ^ (idx >> 1),
            };
            out.extend((0..b).rev().map(|i| ((v >> i) & 1) as u8));
        }
    }
    Ok(out)
}
