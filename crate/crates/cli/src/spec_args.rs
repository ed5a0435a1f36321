use clap::{ArgGroup, Args};

use fuzhash::hash::{Algorithm, ConstantsOverride, HashSpec, StepMask};
use fuzhash::{Algebra, BitVector, OpVariantSet, Result};

/// Flags that build a [`HashSpec`].
#[derive(Args, Debug)]
pub struct SpecArgs {
    /// md5, sha1, sha2_256, keccak1600, keccak200_perm, sha1_round_state or add_toy.
    #[arg(long)]
    alg: Algorithm,
    /// Rounds (SHA/MD steps or Keccak-f rounds); full strength if omitted
    #[arg(long)]
    rounds: Option<usize>,
    /// Keccak output length
    #[arg(long)]
    out_bits: Option<usize>,
    /// Keccak rate in bits
    #[arg(long)]
    rate: Option<usize>,
    /// Keccak capacity in bits
    #[arg(long)]
    capacity: Option<usize>,
    /// Replace every ADD by XOR.
    #[arg(long)]
    add_as_xor: bool,
    /// Use XOR instead of OR inside the choose functions.
    #[arg(long)]
    choose_xor: bool,
    /// Skip adding the chaining value after the rounds.
    #[arg(long)]
    no_feed_forward: bool,
    /// Keccak steps, e.g. `all`, `all-theta` or `chi,iota`.
    #[arg(long)]
    steps: Option<StepMask>,
    /// `unit` or `circular` fuzbits
    #[arg(long, default_value = "unit")]
    algebra: Algebra,
    /// Comma list such as `and=min,or=max,xor=abs_pow,p=2,push`.
    #[arg(long)]
    variants: Option<OpVariantSet>,
    /// Keccak padding domain byte, decimal or 0x-prefixed hex.
    #[arg(long, value_parser = parse_byte)]
    domain_byte: Option<u8>,
    /// `zero` or `regular`.
    #[arg(long)]
    constants_preset: Option<String>,
}

fn parse_byte(s: &str) -> std::result::Result<u8, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u8::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("`{s}` is not a byte: {e}"))
}

impl SpecArgs {
    pub fn spec(&self) -> Result<HashSpec> {
        let mut spec = HashSpec::new(self.alg);
        spec.rounds = self.rounds;
        spec.out_bits = self.out_bits;
        spec.rate = self.rate;
        spec.capacity = self.capacity;
        spec.add_as_xor = self.add_as_xor;
        spec.choose_xor = self.choose_xor;
        spec.feed_forward = !self.no_feed_forward;
        spec.step_mask = self.steps;
        spec.algebra = self.algebra;
        spec.variants = self.variants.unwrap_or_default();
        spec.domain_byte = self.domain_byte;
        spec.constants_override = self
            .constants_preset
            .as_deref()
            .map(ConstantsOverride::preset)
            .transpose()?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Exactly one way of giving the message.
#[derive(Args, Debug)]
#[command(group(ArgGroup::new("message").required(true)))]
pub struct MessageArgs {
    /// Message as ASCII text
    #[arg(long, group = "message")]
    ascii: Option<String>,
    /// Bytes as hex, bit 0 being the low bit of the first byte.
    #[arg(long, group = "message")]
    hex: Option<String>,
    /// Bits as `0`/`1` characters, bit 0 first.
    #[arg(long, group = "message")]
    bits: Option<String>,
    /// Comma-separated fuzbit values; prints the fuzzy digest.
    #[arg(long, group = "message", allow_hyphen_values = true)]
    fuzzy: Option<String>,
}

pub enum Message {
    Binary(BitVector),
    Fuzzy(Vec<f64>),
}

impl MessageArgs {
    pub fn message(&self) -> Result<Message> {
        if let Some(text) = &self.ascii {
            return Ok(Message::Binary(BitVector::from_ascii(text)?));
        }
        if let Some(hex) = &self.hex {
            return Ok(Message::Binary(BitVector::from_hex(hex)?));
        }
        if let Some(bits) = &self.bits {
            return Ok(Message::Binary(BitVector::from_bit_str(bits)?));
        }
        let list = self.fuzzy.as_deref().unwrap_or_default();
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| fuzhash::Error::Parse(format!("fuzbit `{v}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Message::Fuzzy(values))
    }

    /// The message as binbits; fuzzy input is refused.
    pub fn binary(&self) -> Result<BitVector> {
        match self.message()? {
            Message::Binary(bits) => Ok(bits),
            Message::Fuzzy(_) => Err(fuzhash::Error::Usage(
                "this command takes a binary message (--ascii, --hex or --bits)".into(),
            )),
        }
    }
}
