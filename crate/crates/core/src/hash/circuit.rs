//! Fuzzy hash circuits: every algorithm written once more over tape
//! variables, with every bit operation replaced by its fuzzy gate.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::binary::check_message;
use super::constants::{md5_word_index, KECCAK_RC, KECCAK_RHO, MD5_S};
use super::pad::{keccak_tail, md_tail, Endian};
use super::spec::{Algorithm, HashSpec, Step, StepMask};
use crate::autodiff::{Evaluation, Tape, TapeBuilder, Var};
use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::fuzzy::{move_bits, Algebra, BitMove, FuzVector, Gates, OpVariantSet};
use crate::scalar::Scalar;

type Word = Vec<Var>;

struct Ctx<T> {
    b: TapeBuilder<T>,
    g: Gates,
    add_as_xor: bool,
    choose_xor: bool,
}

impl<T: Scalar> Ctx<T> {
    fn new(algebra: Algebra, variants: OpVariantSet) -> Self {
        Self {
            b: TapeBuilder::new(),
            g: Gates::new(algebra, variants),
            add_as_xor: false,
            choose_xor: false,
        }
    }

    fn konst(&mut self, value: u32) -> Word {
        self.g.word_const(&mut self.b, value as u64, 32)
    }

    fn bits(&mut self, bits: &BitVector) -> Vec<Var> {
        bits.iter()
            .map(|bit| self.g.bit(&mut self.b, bit))
            .collect()
    }

    fn mv(&mut self, x: &[Var], m: BitMove) -> Word {
        let zero = self.b.zero();
        move_bits(x, &m, zero).expect("word moves are shape-checked by construction")
    }

    fn rotl(&mut self, x: &[Var], k: usize) -> Word {
        self.mv(x, BitMove::Rotl { k, w: x.len() })
    }

    fn rotr(&mut self, x: &[Var], k: usize) -> Word {
        self.mv(x, BitMove::Rotr { k, w: x.len() })
    }

    fn shr(&mut self, x: &[Var], k: usize) -> Word {
        self.mv(x, BitMove::Shr { k, w: x.len() })
    }

    fn lebe(&mut self, x: &[Var]) -> Word {
        self.mv(x, BitMove::Lebe { w: x.len() })
    }

    fn xor(&mut self, x: &[Var], y: &[Var]) -> Word {
        x.iter()
            .zip(y)
            .map(|(&p, &q)| self.g.xor(&mut self.b, p, q))
            .collect()
    }

    fn and(&mut self, x: &[Var], y: &[Var]) -> Word {
        x.iter()
            .zip(y)
            .map(|(&p, &q)| self.g.and(&mut self.b, p, q))
            .collect()
    }

    fn or(&mut self, x: &[Var], y: &[Var]) -> Word {
        x.iter()
            .zip(y)
            .map(|(&p, &q)| self.g.or(&mut self.b, p, q))
            .collect()
    }

    fn not(&mut self, x: &[Var]) -> Word {
        x.iter().map(|&p| self.g.not(&mut self.b, p)).collect()
    }

    fn add(&mut self, x: &[Var], y: &[Var]) -> Word {
        if self.add_as_xor {
            self.xor(x, y)
        } else {
            let mut carry = self.b.zero();
            x.iter()
                .zip(y)
                .map(|(&p, &q)| {
                    let (d, c) = self.g.digit_carry(&mut self.b, p, q, carry);
                    carry = c;
                    d
                })
                .collect()
        }
    }

    /// `(x AND y) OR (z AND w)`, or XOR in place of OR when `choose_xor` is set.
    fn choose_join(&mut self, l: &[Var], r: &[Var]) -> Word {
        if self.choose_xor {
            self.xor(l, r)
        } else {
            self.or(l, r)
        }
    }

    /// `(x AND y) OR (NOT x AND z)`
    fn choose(&mut self, x: &[Var], y: &[Var], z: &[Var]) -> Word {
        let l = self.and(x, y);
        let nx = self.not(x);
        let r = self.and(&nx, z);
        self.choose_join(&l, &r)
    }

    fn xor3(&mut self, x: &[Var], y: &[Var], z: &[Var]) -> Word {
        let t = self.xor(x, y);
        self.xor(&t, z)
    }

    fn chain(&mut self, state: &mut [Word], working: &[Word], feed_forward: bool) {
        for (s, v) in state.iter_mut().zip(working) {
            *s = if feed_forward {
                self.add(s, v)
            } else {
                v.clone()
            };
        }
    }
}

fn md5<T: Scalar>(cx: &mut Ctx<T>, spec: &HashSpec, padded: &[Var]) -> Result<Vec<Var>> {
    let k = spec.k_table()?;
    let mut state: Vec<Word> = spec.iv_table()?.into_iter().map(|v| cx.konst(v)).collect();
    for block in padded.chunks(512) {
        let m: Vec<&[Var]> = block.chunks(32).collect();
        let [mut a, mut b, mut c, mut d] = [0, 1, 2, 3].map(|i| state[i].clone());
        for i in 0..spec.rounds() {
            let f = match i / 16 {
                0 => cx.choose(&b, &c, &d),
                1 => {
                    let l = cx.and(&b, &d);
                    let nd = cx.not(&d);
                    let r = cx.and(&c, &nd);
                    cx.choose_join(&l, &r)
                }
                2 => cx.xor3(&b, &c, &d),
                _ => {
                    let nd = cx.not(&d);
                    let o = cx.or(&b, &nd);
                    cx.xor(&c, &o)
                }
            };
            let ki = cx.konst(k[i]);
            let t = cx.add(&a, &f);
            let t = cx.add(&t, &ki);
            let t = cx.add(&t, m[md5_word_index(i)]);
            let t = cx.rotl(&t, MD5_S[i] as usize);
            a = d;
            d = c;
            c = b.clone();
            b = cx.add(&b, &t);
        }
        cx.chain(&mut state, &[a, b, c, d], spec.feed_forward);
    }
    Ok(state.concat())
}

/// Big-endian message words of one 512-bit block.
fn be_words<T: Scalar>(cx: &mut Ctx<T>, block: &[Var]) -> Vec<Word> {
    block.chunks(32).map(|c| cx.lebe(c)).collect()
}

fn be_output<T: Scalar>(cx: &mut Ctx<T>, state: &[Word]) -> Vec<Var> {
    state.iter().flat_map(|w| cx.lebe(w)).collect()
}

fn sha1_step<T: Scalar>(cx: &mut Ctx<T>, v: [Word; 5], t: usize, k: u32, w: &[Var]) -> [Word; 5] {
    let [a, b, c, d, e] = v;
    let f = match t / 20 {
        0 => cx.choose(&b, &c, &d),
        2 => {
            let bc = cx.and(&b, &c);
            let bd = cx.and(&b, &d);
            let cd = cx.and(&c, &d);
            let o = cx.or(&bc, &bd);
            cx.or(&o, &cd)
        }
        _ => cx.xor3(&b, &c, &d),
    };
    let ka = cx.rotl(&a, 5);
    let kk = cx.konst(k);
    let tmp = cx.add(&ka, &f);
    let tmp = cx.add(&tmp, &e);
    let tmp = cx.add(&tmp, &kk);
    let tmp = cx.add(&tmp, w);
    let c2 = cx.rotl(&b, 30);
    [tmp, a, c2, c, d]
}

fn sha1<T: Scalar>(cx: &mut Ctx<T>, spec: &HashSpec, padded: &[Var]) -> Result<Vec<Var>> {
    let k = spec.k_table()?;
    let rounds = spec.rounds();
    let mut state: Vec<Word> = spec.iv_table()?.into_iter().map(|v| cx.konst(v)).collect();
    for block in padded.chunks(512) {
        let mut w = be_words(cx, block);
        for t in 16..rounds {
            let x = cx.xor(&w[t - 3], &w[t - 8]);
            let x = cx.xor(&x, &w[t - 14]);
            let x = cx.xor(&x, &w[t - 16]);
            w.push(cx.rotl(&x, 1));
        }
        let mut v = [0, 1, 2, 3, 4].map(|i| state[i].clone());
        for t in 0..rounds {
            v = sha1_step(cx, v, t, k[t], &w[t]);
        }
        cx.chain(&mut state, &v, spec.feed_forward);
    }
    Ok(be_output(cx, &state))
}

fn sigma<T: Scalar>(cx: &mut Ctx<T>, x: &[Var], r: [usize; 3], shift_last: bool) -> Word {
    let p = cx.rotr(x, r[0]);
    let q = cx.rotr(x, r[1]);
    let s = if shift_last {
        cx.shr(x, r[2])
    } else {
        cx.rotr(x, r[2])
    };
    cx.xor3(&p, &q, &s)
}

fn sha256<T: Scalar>(cx: &mut Ctx<T>, spec: &HashSpec, padded: &[Var]) -> Result<Vec<Var>> {
    let k = spec.k_table()?;
    let rounds = spec.rounds();
    let mut state: Vec<Word> = spec.iv_table()?.into_iter().map(|v| cx.konst(v)).collect();
    for block in padded.chunks(512) {
        let mut w = be_words(cx, block);
        for i in 16..rounds {
            let r0 = sigma(cx, &w[i - 15].clone(), [7, 18, 3], true);
            let r1 = sigma(cx, &w[i - 2].clone(), [17, 19, 10], true);
            let x = cx.add(&w[i - 16].clone(), &r0);
            let x = cx.add(&x, &w[i - 7].clone());
            w.push(cx.add(&x, &r1));
        }
        let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut h] =
            [0, 1, 2, 3, 4, 5, 6, 7].map(|i| state[i].clone());
        for i in 0..rounds {
            let s1 = sigma(cx, &e, [6, 11, 25], false);
            let p = cx.choose(&e, &f, &g);
            let ki = cx.konst(k[i]);
            let t1 = cx.add(&h, &s1);
            let t1 = cx.add(&t1, &p);
            let t1 = cx.add(&t1, &ki);
            let t1 = cx.add(&t1, &w[i]);
            let s0 = sigma(cx, &a, [2, 13, 22], false);
            let ab = cx.and(&a, &b);
            let ac = cx.and(&a, &c);
            let bc = cx.and(&b, &c);
            let m = cx.xor3(&ab, &ac, &bc);
            let t2 = cx.add(&s0, &m);
            h = g;
            g = f;
            f = e;
            e = cx.add(&d, &t1);
            d = c;
            c = b;
            b = a;
            a = cx.add(&t1, &t2);
        }
        cx.chain(&mut state, &[a, b, c, d, e, f, g, h], spec.feed_forward);
    }
    Ok(be_output(cx, &state))
}

/// Keccak-p on a state of 25 lanes of `w` bits, bit `z` of lane `(x, y)`
/// at `w(5y + x) + z`.
#[allow(clippy::needless_range_loop)]
fn keccak_rounds<T: Scalar>(
    cx: &mut Ctx<T>,
    state: &mut [Var],
    w: usize,
    rounds: usize,
    steps: StepMask,
) {
    let at = |x: usize, y: usize, z: usize| w * (x + 5 * y) + z;
    for round in 0..rounds {
        if steps.contains(Step::Theta) {
            let mut c = vec![Vec::new(); 5];
            for (x, col) in c.iter_mut().enumerate() {
                for z in 0..w {
                    let mut acc = state[at(x, 0, z)];
                    for y in 1..5 {
                        acc = cx.g.xor(&mut cx.b, acc, state[at(x, y, z)]);
                    }
                    col.push(acc);
                }
            }
            for x in 0..5 {
                for z in 0..w {
                    let d = cx.g.xor(
                        &mut cx.b,
                        c[(x + 4) % 5][z],
                        c[(x + 1) % 5][(z + w - 1) % w],
                    );
                    for y in 0..5 {
                        let i = at(x, y, z);
                        state[i] = cx.g.xor(&mut cx.b, state[i], d);
                    }
                }
            }
        }
        if steps.contains(Step::Rho) {
            for lane in 0..25 {
                let r = KECCAK_RHO[lane] as usize % w;
                let old: Vec<Var> = state[lane * w..(lane + 1) * w].to_vec();
                for z in 0..w {
                    state[lane * w + z] = old[(z + w - r) % w];
                }
            }
        }
        if steps.contains(Step::Pi) {
            let old = state.to_vec();
            for x in 0..5 {
                for y in 0..5 {
                    let src = (x + 3 * y) % 5;
                    for z in 0..w {
                        state[at(x, y, z)] = old[at(src, x, z)];
                    }
                }
            }
        }
        if steps.contains(Step::Chi) {
            let old = state.to_vec();
            for x in 0..5 {
                for y in 0..5 {
                    for z in 0..w {
                        let nb = cx.g.not(&mut cx.b, old[at((x + 1) % 5, y, z)]);
                        let t = cx.g.and(&mut cx.b, nb, old[at((x + 2) % 5, y, z)]);
                        state[at(x, y, z)] = cx.g.xor(&mut cx.b, old[at(x, y, z)], t);
                    }
                }
            }
        }
        if steps.contains(Step::Iota) {
            for z in 0..w {
                let bit = cx.g.bit(&mut cx.b, (KECCAK_RC[round] >> z) & 1 == 1);
                state[z] = cx.g.xor(&mut cx.b, state[z], bit);
            }
        }
    }
}

fn keccak_sponge<T: Scalar>(cx: &mut Ctx<T>, spec: &HashSpec, padded: &[Var]) -> Vec<Var> {
    let rate = spec.rate();
    let zero = cx.b.zero();
    let mut state = vec![zero; 1600];
    for block in padded.chunks(rate) {
        for (s, &m) in state.iter_mut().zip(block) {
            *s = cx.g.xor(&mut cx.b, *s, m);
        }
        keccak_rounds(cx, &mut state, 64, spec.rounds(), spec.steps());
    }
    state
}

/// A fuzzy hash compiled for one message length.
#[derive(Debug)]
pub struct Circuit<T> {
    spec: HashSpec,
    message_bits: usize,
    tape: Tape<T>,
}

impl<T: Scalar> Circuit<T> {
    pub fn build(spec: &HashSpec, message_bits: usize) -> Result<Self> {
        check_message(spec, message_bits)?;
        let mut cx = Ctx::new(spec.algebra, spec.variants);
        cx.add_as_xor = spec.add_as_xor;
        cx.choose_xor = spec.choose_xor;
        let message = cx.b.inputs(message_bits);
        let md_pad = |cx: &mut Ctx<T>, endian| {
            let tail = md_tail(message_bits, endian);
            [message.clone(), cx.bits(&tail)].concat()
        };
        let mut out = match spec.algorithm {
            Algorithm::Md5 => {
                let padded = md_pad(&mut cx, Endian::Little);
                md5(&mut cx, spec, &padded)?
            }
            Algorithm::Sha1 => {
                let padded = md_pad(&mut cx, Endian::Big);
                sha1(&mut cx, spec, &padded)?
            }
            Algorithm::Sha256 => {
                let padded = md_pad(&mut cx, Endian::Big);
                sha256(&mut cx, spec, &padded)?
            }
            Algorithm::Keccak1600 => {
                let tail = keccak_tail(message_bits, spec.rate(), spec.domain_byte());
                let padded = [message.clone(), cx.bits(&tail)].concat();
                keccak_sponge(&mut cx, spec, &padded)
            }
            Algorithm::Keccak200Perm => {
                let mut state = message.clone();
                keccak_rounds(&mut cx, &mut state, 8, spec.rounds(), spec.steps());
                state
            }
            Algorithm::Sha1RoundState => {
                let words: Vec<Word> = message.chunks(32).map(<[Var]>::to_vec).collect();
                let k = spec.k_table()?[0];
                let v = [0, 1, 2, 3, 4].map(|i| words[i].clone());
                sha1_step(&mut cx, v, 0, k, &words[5]).concat()
            }
            Algorithm::AddToy => {
                let (x, y) = message.split_at(32);
                cx.add(x, y)
            }
        };
        out.truncate(spec.out_bits());
        Ok(Self {
            spec: spec.clone(),
            message_bits,
            tape: cx.b.finish(&out),
        })
    }

    pub fn spec(&self) -> &HashSpec {
        &self.spec
    }

    pub fn message_bits(&self) -> usize {
        self.message_bits
    }

    pub fn out_bits(&self) -> usize {
        self.tape.num_outputs()
    }

    pub fn tape(&self) -> &Tape<T> {
        &self.tape
    }

    /// Fuzzy digest of raw message values, without domain checks.
    pub fn eval(&self, message: &[T], eval: &mut Evaluation<T>) -> Result<Vec<T>> {
        self.tape.forward_into(message, eval)?;
        Ok(eval.outputs(&self.tape))
    }

    /// `sum_j seeds[j] * d h_j / d m_i` at the point of the last `eval`.
    pub fn vjp(&self, eval: &mut Evaluation<T>, seeds: &[T]) -> Result<Vec<T>> {
        self.tape.vjp(eval, seeds)
    }
}

type CacheKey = (TypeId, String, usize);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<dyn Any + Send + Sync>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<dyn Any + Send + Sync>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// The circuit for `(spec, message_bits)`, built on first use and shared afterwards.
pub fn compile<T: Scalar>(spec: &HashSpec, message_bits: usize) -> Result<Arc<Circuit<T>>> {
    let key = (TypeId::of::<T>(), spec.canonical_json(), message_bits);
    let mut map = cache().lock().unwrap_or_else(|e| e.into_inner());
    if let Some(hit) = map.get(&key) {
        if let Ok(c) = Arc::clone(hit).downcast::<Circuit<T>>() {
            return Ok(c);
        }
    }
    let circuit = Arc::new(Circuit::<T>::build(spec, message_bits)?);
    log::debug!(
        "compiled {} for {message_bits}-bit messages: {} nodes",
        spec.algorithm,
        circuit.tape.len()
    );
    map.insert(key, circuit.clone());
    Ok(circuit)
}

/// Fuzzy digest; on binbits it rounds to [`super::digest_bits`].
pub fn digest_fuzzy<T: Scalar>(spec: &HashSpec, message: &FuzVector<T>) -> Result<FuzVector<T>> {
    if message.algebra() != spec.algebra {
        return Err(Error::Usage(format!(
            "message uses the {} algebra but the spec uses {}",
            message.algebra(),
            spec.algebra
        )));
    }
    let circuit = compile::<T>(spec, message.len())?;
    let out = circuit.eval(message.values(), &mut Evaluation::new())?;
    FuzVector::new(snap(out, spec.algebra), spec.algebra)
}

/// Rounding slack tolerated outside the domain before reporting an error.
const DOMAIN_SLACK: f64 = 1e-9;

/// Pulls values within [`DOMAIN_SLACK`] outside the domain back onto its
/// boundary; trig variants land a few ulps outside on binbits.
fn snap<T: Scalar>(mut values: Vec<T>, algebra: Algebra) -> Vec<T> {
    for v in &mut values {
        let x = v.to_f64_lossy();
        if algebra == Algebra::Unit && (-DOMAIN_SLACK..0.0).contains(&x) {
            *v = T::zero();
        } else if x > 1.0 && x <= 1.0 + DOMAIN_SLACK {
            *v = T::one();
        }
    }
    values
}

/// Hash bit `hash_bit` as message bit `msg_bit` takes each of `values`,
/// all other bits fixed to `message`.
pub fn fuzzy_sensitivity(
    spec: &HashSpec,
    message: &BitVector,
    msg_bit: usize,
    hash_bit: usize,
    values: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if msg_bit >= message.len() {
        return Err(Error::Usage(format!(
            "message bit {msg_bit} out of range for {} bits",
            message.len()
        )));
    }
    if hash_bit >= spec.out_bits() {
        return Err(Error::Usage(format!(
            "hash bit {hash_bit} out of range for {} bits",
            spec.out_bits()
        )));
    }
    let circuit = compile::<f64>(spec, message.len())?;
    let mut point: Vec<f64> = message.iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
    let mut eval = Evaluation::new();
    values
        .iter()
        .map(|&v| {
            point[msg_bit] = spec.algebra.check(v)?;
            Ok((v, circuit.eval(&point, &mut eval)?[hash_bit]))
        })
        .collect()
}

/// [`fuzzy_sensitivity`] on `samples` evenly spaced points spanning the
/// algebra's domain: `[0, 1]`, or `(-1, 1]` with the open end excluded.
pub fn fuzzy_sensitivity_trace(
    spec: &HashSpec,
    message: &BitVector,
    msg_bit: usize,
    hash_bit: usize,
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    if samples < 2 {
        return Err(Error::Usage("a trace needs at least 2 samples".into()));
    }
    let values: Vec<f64> = match spec.algebra {
        Algebra::Unit => (0..samples)
            .map(|i| i as f64 / (samples - 1) as f64)
            .collect(),
        Algebra::Circular => (1..=samples)
            .map(|i| -1.0 + 2.0 * i as f64 / samples as f64)
            .collect(),
    };
    fuzzy_sensitivity(spec, message, msg_bit, hash_bit, &values)
}

fn eval_once<T: Scalar>(
    b: TapeBuilder<T>,
    outputs: &[Var],
    input: &[T],
    algebra: Algebra,
) -> Result<FuzVector<T>> {
    let tape = b.finish(outputs);
    let out = tape.forward(input)?.outputs(&tape);
    FuzVector::new(snap(out, algebra), algebra)
}

/// The Keccak-p permutation on a fuzzy state of 1600 or 200 bits.
pub fn keccak_f<T: Scalar>(
    state: &FuzVector<T>,
    rounds: usize,
    steps: StepMask,
    variants: &OpVariantSet,
) -> Result<FuzVector<T>> {
    let (w, max_rounds) = match state.len() {
        1600 => (64, 24),
        200 => (8, 18),
        n => {
            return Err(Error::Shape(format!(
                "Keccak state must have 1600 or 200 bits, got {n}"
            )))
        }
    };
    if rounds > max_rounds {
        return Err(Error::Config(format!(
            "at most {max_rounds} rounds, got {rounds}"
        )));
    }
    let mut cx = Ctx::new(state.algebra(), *variants);
    let mut vars = cx.b.inputs(state.len());
    keccak_rounds(&mut cx, &mut vars, w, rounds, steps);
    eval_once(cx.b, &vars, state.values(), state.algebra())
}

/// One SHA1 step with the step-0 constant, without the IV feed-forward.
pub fn sha1_round_state_transform<T: Scalar>(
    state: &FuzVector<T>,
    word: &FuzVector<T>,
    variants: &OpVariantSet,
) -> Result<FuzVector<T>> {
    if state.len() != 160 || word.len() != 32 {
        return Err(Error::Shape(format!(
            "SHA1 round takes a 160-bit state and a 32-bit word, got {} and {}",
            state.len(),
            word.len()
        )));
    }
    if state.algebra() != word.algebra() {
        return Err(Error::Usage("state and word use different algebras".into()));
    }
    let mut spec = HashSpec::new(Algorithm::Sha1RoundState).with_algebra(state.algebra());
    spec.variants = *variants;
    let input = [state.values(), word.values()].concat();
    digest_fuzzy(&spec, &FuzVector::new(input, state.algebra())?)
}

/// Fuzzy sum of the two 32-bit halves of a 64-bit message.
pub fn add_toy_forward<T: Scalar>(
    message: &FuzVector<T>,
    variants: &OpVariantSet,
) -> Result<FuzVector<T>> {
    let mut spec = HashSpec::new(Algorithm::AddToy).with_algebra(message.algebra());
    spec.variants = *variants;
    digest_fuzzy(&spec, message)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{AdderVariant, AndVariant, NotVariant, OrVariant, XorVariant};
    use crate::hash::digest_bits;
    use crate::hash::ConstantsOverride;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn agrees(spec: &HashSpec, len: usize, trials: usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(len as u64);
        for _ in 0..trials {
            let m = BitVector::random(len, &mut rng);
            let want = digest_bits(spec, &m).unwrap();
            let got = digest_fuzzy(spec, &FuzVector::<f64>::from_bits(&m, spec.algebra)).unwrap();
            assert_eq!(got.round_to_bin(), want, "{}", spec.canonical_json());
        }
    }

    #[test]
    fn binbits_reproduce_the_binary_digest() {
        for algebra in [Algebra::Unit, Algebra::Circular] {
            for alg in [Algorithm::Md5, Algorithm::Sha1, Algorithm::Sha256] {
                agrees(
                    &HashSpec::new(alg).with_algebra(algebra).with_rounds(8),
                    40,
                    3,
                );
            }
            agrees(
                &HashSpec::keccak(256).with_algebra(algebra).with_rounds(2),
                64,
                3,
            );
            agrees(
                &HashSpec::new(Algorithm::Keccak200Perm).with_algebra(algebra),
                200,
                3,
            );
            agrees(
                &HashSpec::new(Algorithm::Sha1RoundState).with_algebra(algebra),
                192,
                3,
            );
            agrees(
                &HashSpec::new(Algorithm::AddToy).with_algebra(algebra),
                64,
                3,
            );
        }
    }

    #[test]
    fn full_rounds_match_the_binary_digest() {
        agrees(&HashSpec::new(Algorithm::Md5), 100, 1);
        agrees(&HashSpec::new(Algorithm::Sha1), 600, 1);
        agrees(&HashSpec::new(Algorithm::Sha256), 24, 1);
        agrees(&HashSpec::sha3(256), 1100, 1);
    }

    #[test]
    fn options_match_the_binary_digest() {
        let mut s = HashSpec::new(Algorithm::Sha1).with_rounds(30);
        s.add_as_xor = true;
        s.choose_xor = true;
        agrees(&s, 64, 2);
        let mut s = HashSpec::new(Algorithm::Sha256).with_rounds(20);
        s.feed_forward = false;
        s.add_as_xor = true;
        agrees(&s, 64, 2);
        let mut s = HashSpec::new(Algorithm::Md5).with_rounds(40);
        s.constants_override = Some(ConstantsOverride::preset("regular").unwrap());
        s.choose_xor = true;
        agrees(&s, 64, 2);
        let s = HashSpec::keccak(128)
            .with_rounds(6)
            .with_steps("rho,pi,chi,iota".parse().unwrap());
        agrees(&s, 256, 2);
    }

    #[test]
    fn binbits_survive_every_variant() {
        let mut variants = vec![];
        for not in [NotVariant::Std, NotVariant::Square, NotVariant::Cos] {
            for and in [AndVariant::Product, AndVariant::Min, AndVariant::Power] {
                variants.push(OpVariantSet {
                    not_variant: not,
                    and_variant: and,
                    ..Default::default()
                });
            }
        }
        for or in [OrVariant::Max, OrVariant::SubMin, OrVariant::CapSum] {
            for xor in [
                XorVariant::NonAssoc,
                XorVariant::AbsPow,
                XorVariant::Tent,
                XorVariant::Sine,
            ] {
                variants.push(OpVariantSet {
                    or_variant: or,
                    xor_variant: xor,
                    ..Default::default()
                });
            }
        }
        for add in [
            AdderVariant::FullFuzzy,
            AdderVariant::Cosine,
            AdderVariant::Clamp,
        ] {
            variants.push(OpVariantSet {
                adder_variant: add,
                push_after_add: true,
                push_after_xor: true,
                ..Default::default()
            });
        }
        for v in variants {
            let mut s = HashSpec::new(Algorithm::Sha1).with_rounds(3);
            s.variants = v;
            agrees(&s, 32, 1);
        }
    }

    #[test]
    fn tape_gradients_match_finite_differences() {
        use crate::autodiff::grad_check;
        let spec = HashSpec::new(Algorithm::Sha1).with_rounds(2);
        let c = compile::<f64>(&spec, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let point: Vec<f64> = (0..16).map(|_| rng.random_range(0.2..0.8)).collect();
        for out in [0, 37, 159] {
            let g = grad_check(c.tape(), out, &point, 1e-6).unwrap();
            assert!(g.passes(1e-5), "{g:?}");
        }
    }

    #[test]
    fn compile_is_cached() {
        let spec = HashSpec::new(Algorithm::Md5).with_rounds(4);
        let a = compile::<f64>(&spec, 32).unwrap();
        let b = compile::<f64>(&spec, 32).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let c = compile::<f32>(&spec, 32).unwrap();
        assert_eq!(c.out_bits(), 128);
    }

    #[test]
    fn algebra_mismatch_is_rejected() {
        let spec = HashSpec::new(Algorithm::AddToy);
        let m = FuzVector::<f64>::from_bits(&BitVector::zeros(64), Algebra::Circular);
        assert!(matches!(digest_fuzzy(&spec, &m), Err(Error::Usage(_))));
        let m = FuzVector::<f64>::from_bits(&BitVector::zeros(63), Algebra::Unit);
        assert!(matches!(digest_fuzzy(&spec, &m), Err(Error::Shape(_))));
    }

    #[test]
    fn sensitivity_endpoints_are_the_binary_digests() {
        let spec = HashSpec::new(Algorithm::Sha1).with_rounds(2);
        let m = BitVector::from_bytes(b"hi there");
        let trace = fuzzy_sensitivity_trace(&spec, &m, 5, 31, 11).unwrap();
        assert_eq!(trace.len(), 11);
        let mut lo = m.clone();
        lo.set(5, false);
        let mut hi = m.clone();
        hi.set(5, true);
        let bit = |m: &BitVector| digest_bits(&spec, m).unwrap().get(31).unwrap() as u8 as f64;
        assert_eq!(trace[0].1, bit(&lo));
        assert_eq!(trace[10].1, bit(&hi));
        assert!(fuzzy_sensitivity_trace(&spec, &m, 64, 0, 5).is_err());
        assert!(fuzzy_sensitivity_trace(&spec, &m, 0, 160, 5).is_err());
        assert!(fuzzy_sensitivity(&spec, &m, 0, 0, &[1.5]).is_err());
    }

    #[test]
    fn state_transforms() {
        let v = OpVariantSet::default();
        let state = FuzVector::<f64>::from_bits(&BitVector::zeros(1600), Algebra::Unit);
        let out = keccak_f(&state, 24, StepMask::ALL, &v).unwrap();
        let mut lanes = [0u64; 25];
        crate::hash::keccak_f_lanes(&mut lanes, 64, 24, StepMask::ALL);
        assert_eq!(
            out.round_to_bin(),
            crate::hash::binary::lanes_to_state(&lanes, 64)
        );

        let half = FuzVector::new(vec![0.5; 200], Algebra::Unit).unwrap();
        assert_eq!(keccak_f(&half, 0, StepMask::ALL, &v).unwrap(), half);
        assert!(keccak_f(&half, 19, StepMask::ALL, &v).is_err());

        let a = BitVector::from_word_le(3, 32);
        let mut m = a.clone();
        m.extend_from(&BitVector::from_word_le(5, 32));
        let s = add_toy_forward(&FuzVector::<f64>::from_bits(&m, Algebra::Unit), &v).unwrap();
        assert_eq!(s.round_to_bin().word_le(0, 32), 8);

        let st = FuzVector::<f64>::from_bits(&BitVector::zeros(160), Algebra::Unit);
        let w = FuzVector::<f64>::from_bits(&BitVector::zeros(32), Algebra::Unit);
        let out = sha1_round_state_transform(&st, &w, &v)
            .unwrap()
            .round_to_bin();
        assert_eq!(out.word_le(0, 32), 0x5A82_7999);
    }
}
