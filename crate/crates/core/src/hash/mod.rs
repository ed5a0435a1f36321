//! Bit-level hash functions, binary and fuzzy.

mod binary;
mod circuit;
mod constants;
mod pad;
mod spec;

pub use binary::{digest_bits, keccak_f_lanes, sha1_round_state};
pub use circuit::{
    add_toy_forward, compile, digest_fuzzy, fuzzy_sensitivity, fuzzy_sensitivity_trace, keccak_f,
    sha1_round_state_transform, Circuit,
};
pub use constants::{
    KECCAK_RC, KECCAK_RHO, MD5_IV, MD5_S, MD5_T, SHA1_IV, SHA1_K, SHA256_IV, SHA256_K,
};
pub use pad::{keccak_tail, md_tail, pad_keccak, pad_md, Endian};
pub use spec::{
    Algorithm, ConstantsOverride, HashSpec, MaskSpec, Step, StepMask, KECCAK_DOMAIN,
    REGULAR_CONSTANT, SHA3_DOMAIN,
};
