//! Exact implementations on machine words.
//!
//! This path is deliberately independent of the fuzzy circuits: it is the
//! oracle they are checked against and the generator of training data.

use super::constants::{md5_word_index, KECCAK_RC, KECCAK_RHO, MD5_S};
use super::pad::{pad_keccak, pad_md, Endian};
use super::spec::{Algorithm, HashSpec, Step, StepMask};
use crate::bits::BitVector;
use crate::error::{Error, Result};

fn add(a: u32, b: u32, as_xor: bool) -> u32 {
    if as_xor {
        a ^ b
    } else {
        a.wrapping_add(b)
    }
}

/// Checks the spec and the message length for `spec.algorithm`.
pub(crate) fn check_message(spec: &HashSpec, len: usize) -> Result<()> {
    spec.validate()?;
    match spec.algorithm.fixed_message_bits() {
        Some(n) if n != len => Err(Error::Shape(format!(
            "{} takes a {n}-bit message, got {len}",
            spec.algorithm
        ))),
        _ => Ok(()),
    }
}

/// Exact digest of `message` under `spec`, truncated to `spec.out_bits()`.
pub fn digest_bits(spec: &HashSpec, message: &BitVector) -> Result<BitVector> {
    check_message(spec, message.len())?;
    let full = match spec.algorithm {
        Algorithm::Md5 => md5(spec, message)?,
        Algorithm::Sha1 => sha1(spec, message)?,
        Algorithm::Sha256 => sha256(spec, message)?,
        Algorithm::Keccak1600 => keccak_sponge(spec, message),
        Algorithm::Keccak200Perm => {
            let mut lanes = state_to_lanes(message, 8);
            keccak_f_lanes(&mut lanes, 8, spec.rounds(), spec.steps());
            lanes_to_state(&lanes, 8)
        }
        Algorithm::Sha1RoundState => {
            let w = |i: usize| message.word_le(32 * i, 32) as u32;
            let state = [w(0), w(1), w(2), w(3), w(4)];
            let k = spec.k_table()?[0];
            let out = sha1_round_state(state, w(5), k, spec.add_as_xor);
            words_le(&out)
        }
        Algorithm::AddToy => {
            let x = message.word_le(0, 32) as u32;
            let y = message.word_le(32, 32) as u32;
            BitVector::from_word_le(add(x, y, spec.add_as_xor) as u64, 32)
        }
    };
    Ok(full.slice(0..spec.out_bits()))
}

fn words_le(words: &[u32]) -> BitVector {
    let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
    BitVector::from_bytes(&bytes)
}

fn words_be(words: &[u32]) -> BitVector {
    let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_be_bytes()).collect();
    BitVector::from_bytes(&bytes)
}

fn blocks(padded: &BitVector, endian: Endian) -> Vec<[u32; 16]> {
    padded
        .to_bytes()
        .chunks(64)
        .map(|chunk| {
            let mut w = [0u32; 16];
            for (j, b) in chunk.chunks(4).enumerate() {
                let b = [b[0], b[1], b[2], b[3]];
                w[j] = match endian {
                    Endian::Little => u32::from_le_bytes(b),
                    Endian::Big => u32::from_be_bytes(b),
                };
            }
            w
        })
        .collect()
}

fn chain(state: &mut [u32], working: &[u32], spec: &HashSpec) {
    for (s, &v) in state.iter_mut().zip(working) {
        *s = if spec.feed_forward {
            add(*s, v, spec.add_as_xor)
        } else {
            v
        };
    }
}

fn md5(spec: &HashSpec, message: &BitVector) -> Result<BitVector> {
    let k = spec.k_table()?;
    let mut state = spec.iv_table()?;
    let x = spec.add_as_xor;
    for block in blocks(&pad_md(message, Endian::Little), Endian::Little) {
        let [mut a, mut b, mut c, mut d] = [state[0], state[1], state[2], state[3]];
        for i in 0..spec.rounds() {
            let f = match i / 16 {
                0 => (b & c) | (!b & d),
                1 => (b & d) | (c & !d),
                2 => b ^ c ^ d,
                _ => c ^ (b | !d),
            };
            let t = add(add(add(a, f, x), k[i], x), block[md5_word_index(i)], x);
            a = d;
            d = c;
            c = b;
            b = add(b, t.rotate_left(MD5_S[i]), x);
        }
        chain(&mut state, &[a, b, c, d], spec);
    }
    Ok(words_le(&state))
}

/// One SHA1 step with the step-0 function (choose) and constant `k`.
pub fn sha1_round_state(state: [u32; 5], w: u32, k: u32, add_as_xor: bool) -> [u32; 5] {
    let [a, b, c, d, e] = state;
    let x = add_as_xor;
    let f = (b & c) | (!b & d);
    let t = add(add(add(add(a.rotate_left(5), f, x), e, x), k, x), w, x);
    [t, a, b.rotate_left(30), c, d]
}

fn sha1(spec: &HashSpec, message: &BitVector) -> Result<BitVector> {
    let k = spec.k_table()?;
    let mut state = spec.iv_table()?;
    let x = spec.add_as_xor;
    let rounds = spec.rounds();
    for block in blocks(&pad_md(message, Endian::Big), Endian::Big) {
        let mut w = block.to_vec();
        for t in 16..rounds {
            w.push((w[t - 3] ^ w[t - 8] ^ w[t - 14] ^ w[t - 16]).rotate_left(1));
        }
        let [mut a, mut b, mut c, mut d, mut e] =
            [state[0], state[1], state[2], state[3], state[4]];
        for t in 0..rounds {
            let f = match t / 20 {
                0 => (b & c) | (!b & d),
                2 => (b & c) | (b & d) | (c & d),
                _ => b ^ c ^ d,
            };
            let tmp = add(
                add(add(add(a.rotate_left(5), f, x), e, x), k[t], x),
                w[t],
                x,
            );
            e = d;
            d = c;
            c = b.rotate_left(30);
            b = a;
            a = tmp;
        }
        chain(&mut state, &[a, b, c, d, e], spec);
    }
    Ok(words_be(&state))
}

fn sha256(spec: &HashSpec, message: &BitVector) -> Result<BitVector> {
    let k = spec.k_table()?;
    let mut state = spec.iv_table()?;
    let x = spec.add_as_xor;
    let rounds = spec.rounds();
    for block in blocks(&pad_md(message, Endian::Big), Endian::Big) {
        let mut w = block.to_vec();
        for i in 16..rounds {
            let s = w[i - 15];
            let r0 = s.rotate_right(7) ^ s.rotate_right(18) ^ (s >> 3);
            let s = w[i - 2];
            let r1 = s.rotate_right(17) ^ s.rotate_right(19) ^ (s >> 10);
            w.push(add(add(add(w[i - 16], r0, x), w[i - 7], x), r1, x));
        }
        let mut v = [0u32; 8];
        v.copy_from_slice(&state);
        let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut h] = v;
        for i in 0..rounds {
            let s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
            let p = (e & f) | (!e & g);
            let t1 = add(add(add(add(h, s1, x), p, x), k[i], x), w[i], x);
            let s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
            let m = (a & b) ^ (a & c) ^ (b & c);
            let t2 = add(s0, m, x);
            h = g;
            g = f;
            f = e;
            e = add(d, t1, x);
            d = c;
            c = b;
            b = a;
            a = add(t1, t2, x);
        }
        chain(&mut state, &[a, b, c, d, e, f, g, h], spec);
    }
    Ok(words_be(&state))
}

fn rotl(v: u64, k: u32, w: u32) -> u64 {
    let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
    let k = k % w;
    if k == 0 {
        v & mask
    } else {
        ((v << k) | (v >> (w - k))) & mask
    }
}

/// Keccak-p on 25 lanes of width `w` (64 or 8), lane `(x, y)` at `5y + x`.
///
/// Each round applies the steps present in `steps` in the order theta,
/// rho, pi, chi, iota, with round constants indexed from round 0.
#[allow(clippy::needless_range_loop)]
pub fn keccak_f_lanes(lanes: &mut [u64; 25], w: u32, rounds: usize, steps: StepMask) {
    let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
    for round in 0..rounds {
        if steps.contains(Step::Theta) {
            let c: Vec<u64> = (0..5)
                .map(|x| (0..5).fold(0, |acc, y| acc ^ lanes[x + 5 * y]))
                .collect();
            for x in 0..5 {
                let d = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1, w);
                for y in 0..5 {
                    lanes[x + 5 * y] ^= d;
                }
            }
        }
        if steps.contains(Step::Rho) {
            for (i, lane) in lanes.iter_mut().enumerate() {
                *lane = rotl(*lane, KECCAK_RHO[i], w);
            }
        }
        if steps.contains(Step::Pi) {
            let old = *lanes;
            for x in 0..5 {
                for y in 0..5 {
                    lanes[x + 5 * y] = old[(x + 3 * y) % 5 + 5 * x];
                }
            }
        }
        if steps.contains(Step::Chi) {
            let old = *lanes;
            for x in 0..5 {
                for y in 0..5 {
                    lanes[x + 5 * y] = old[x + 5 * y]
                        ^ (!old[(x + 1) % 5 + 5 * y] & old[(x + 2) % 5 + 5 * y] & mask);
                }
            }
        }
        if steps.contains(Step::Iota) {
            lanes[0] ^= KECCAK_RC[round] & mask;
        }
    }
}

pub(crate) fn state_to_lanes(state: &BitVector, w: u32) -> [u64; 25] {
    let mut lanes = [0u64; 25];
    for (i, lane) in lanes.iter_mut().enumerate() {
        *lane = state.word_le(i * w as usize, w as usize);
    }
    lanes
}

pub(crate) fn lanes_to_state(lanes: &[u64; 25], w: u32) -> BitVector {
    let mut out = BitVector::new(Vec::with_capacity(25 * w as usize));
    for &lane in lanes {
        out.extend_from(&BitVector::from_word_le(lane, w as usize));
    }
    out
}

fn keccak_sponge(spec: &HashSpec, message: &BitVector) -> BitVector {
    let rate = spec.rate();
    let padded = pad_keccak(message, rate, spec.domain_byte());
    let mut lanes = [0u64; 25];
    for start in (0..padded.len()).step_by(rate) {
        let mut block = padded.slice(start..start + rate);
        block.extend_from(&BitVector::zeros(1600 - rate));
        for (lane, b) in lanes.iter_mut().zip(state_to_lanes(&block, 64)) {
            *lane ^= b;
        }
        keccak_f_lanes(&mut lanes, 64, spec.rounds(), spec.steps());
    }
    lanes_to_state(&lanes, 64)
}
