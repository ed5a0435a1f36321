//! "Move bits" operations: fixed relocations that never change a value.
//!
//! A vector of length `n * w` is read as `n` consecutive `w`-bit words, each
//! little-endian (index 0 holds weight `2^0`). Rotations and shifts are defined
//! on integer weight and translated into index maps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitMove {
    /// Rotate each `w`-bit word right by `k`.
    Rotr { k: usize, w: usize },
    /// Rotate each `w`-bit word left by `k`.
    Rotl { k: usize, w: usize },
    /// Logical shift left by `k` within each `w`-bit word.
    Shl { k: usize, w: usize },
    /// Logical shift right by `k` within each `w`-bit word.
    Shr { k: usize, w: usize },
    /// Reverse the byte order of each `w`-bit word.
    Lebe { w: usize },
    /// `out[i] = in[indices[i]]`.
    Permute(Vec<usize>),
}

impl BitMove {
    /// For every output index, the source index or `None` for a zero fill.
    pub fn source_map(&self, len: usize) -> Result<Vec<Option<usize>>> {
        let word_map =
            |w: usize, f: &dyn Fn(usize) -> Option<usize>| -> Result<Vec<Option<usize>>> {
                if w == 0 || !len.is_multiple_of(w) {
                    return Err(Error::Shape(format!(
                        "length {len} is not a multiple of word width {w}"
                    )));
                }
                Ok((0..len)
                    .map(|i| {
                        let base = i - i % w;
                        f(i % w).map(|j| base + j)
                    })
                    .collect())
            };
        match *self {
            BitMove::Rotr { k, w } => word_map(w, &|i| Some((i + k) % w)),
            BitMove::Rotl { k, w } => word_map(w, &|i| Some((i + w - k % w) % w)),
            BitMove::Shl { k, w } => word_map(w, &|i| i.checked_sub(k)),
            BitMove::Shr { k, w } => word_map(w, &|i| Some(i + k).filter(|&j| j < w)),
            BitMove::Lebe { w } => {
                if w % 8 != 0 {
                    return Err(Error::Shape(format!("LEBE needs a byte multiple, got {w}")));
                }
                let bytes = w / 8;
                word_map(w, &|i| Some((bytes - 1 - i / 8) * 8 + i % 8))
            }
            BitMove::Permute(ref indices) => indices
                .iter()
                .map(|&j| {
                    if j < len {
                        Ok(Some(j))
                    } else {
                        Err(Error::Shape(format!(
                            "permutation index {j} out of range for length {len}"
                        )))
                    }
                })
                .collect(),
        }
    }
}

/// Applies `mv` to `values`, filling vacated positions with `zero`.
pub fn move_bits<V: Clone>(values: &[V], mv: &BitMove, zero: V) -> Result<Vec<V>> {
    Ok(mv
        .source_map(values.len())?
        .into_iter()
        .map(|src| src.map_or_else(|| zero.clone(), |j| values[j].clone()))
        .collect())
}
