//! Message padding for arbitrary bit lengths.
//!
//! Padding only appends bits, so it is described by a tail that depends on
//! the message length alone. The fuzzy circuits splice the same tail, as
//! constant binbits, after the message fuzbits.

use crate::bits::BitVector;

/// Byte order of the 64-bit length field in Merkle-Damgard padding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endian {
    /// MD5
    Little,
    /// SHA1 and SHA2
    Big,
}

/// Bits appended to an `len`-bit message by [`pad_md`].
///
/// The marker is the most significant bit of the byte holding bit `len`,
/// which is the usual `0x80` byte for byte-aligned messages.
pub fn md_tail(len: usize, endian: Endian) -> BitVector {
    let marker = 8 * (len / 8) + 7;
    let bytes_before_length = len / 8 + 1;
    let blocks = (bytes_before_length + 8).div_ceil(64);
    let total = blocks * 512;
    let mut tail = BitVector::zeros(total - len);
    tail.set(marker - len, true);
    let field = match endian {
        Endian::Little => (len as u64).to_le_bytes(),
        Endian::Big => (len as u64).to_be_bytes(),
    };
    for (i, bit) in BitVector::from_bytes(&field).iter().enumerate() {
        tail.set(total - 64 + i - len, bit);
    }
    tail
}

/// Merkle-Damgard padding to a multiple of 512 bits with a 64-bit length field.
pub fn pad_md(message: &BitVector, endian: Endian) -> BitVector {
    let mut out = message.clone();
    out.extend_from(&md_tail(message.len(), endian));
    out
}

/// Bits appended to an `len`-bit message by [`pad_keccak`].
///
/// The domain byte is read LSB-first up to its highest set bit, which also
/// serves as the first 1 of pad10*1; the last bit of the final block is the
/// closing 1. This reproduces the byte-oriented rule of the standards.
pub fn keccak_tail(len: usize, rate: usize, domain_byte: u8) -> BitVector {
    let domain_bits = 8 - domain_byte.leading_zeros() as usize;
    let total = (len + domain_bits + 1).div_ceil(rate) * rate;
    let mut tail = BitVector::zeros(total - len);
    for i in 0..domain_bits {
        tail.set(i, (domain_byte >> i) & 1 == 1);
    }
    tail.set(total - len - 1, true);
    tail
}

/// Multi-rate padding with a domain separator (0x06 for SHA3, 0x01 for
/// Keccak) to a multiple of `rate` bits.
pub fn pad_keccak(message: &BitVector, rate: usize, domain_byte: u8) -> BitVector {
    let mut out = message.clone();
    out.extend_from(&keccak_tail(message.len(), rate, domain_byte));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn md_examples() {
        let p = pad_md(&BitVector::new(vec![]), Endian::Big);
        assert_eq!(p.len(), 512);
        assert_eq!(p.to_bytes()[0], 0x80);
        assert_eq!(p.count_ones(), 1);

        let p = pad_md(&BitVector::from_bytes(&[1, 2, 3, 4]), Endian::Big);
        assert_eq!(p.len(), 512);
        assert_eq!(p.to_bytes()[4], 0x80);
        assert_eq!(p.to_bytes()[63], 32);
        let p = pad_md(&BitVector::from_bytes(&[1, 2, 3, 4]), Endian::Little);
        assert_eq!(p.to_bytes()[56], 32);

        assert_eq!(pad_md(&BitVector::zeros(448), Endian::Big).len(), 1024);
        assert_eq!(pad_md(&BitVector::zeros(440), Endian::Big).len(), 512);
    }

    #[test]
    fn md_unaligned_marker_shares_the_last_byte() {
        let m = BitVector::from_bit_str("1011").unwrap();
        let p = pad_md(&m, Endian::Big);
        assert_eq!(p.len(), 512);
        assert_eq!(p.to_bytes()[0], 0b1000_1101);
        assert_eq!(p.to_bytes()[63], 4);
    }

    #[test]
    fn keccak_examples() {
        let p = pad_keccak(&BitVector::new(vec![]), 1088, 0x06);
        let bytes = p.to_bytes();
        assert_eq!(p.len(), 1088);
        assert_eq!(bytes[0], 0x06);
        assert_eq!(bytes[135], 0x80);
        assert_eq!(pad_keccak(&BitVector::zeros(64), 1088, 0x06).len(), 1088);
        assert_eq!(pad_keccak(&BitVector::zeros(1087), 1088, 0x06).len(), 2176);
        assert_eq!(
            pad_keccak(&BitVector::zeros(1080), 1088, 0x01).to_bytes()[135],
            0x81
        );
        assert_eq!(
            pad_keccak(&BitVector::zeros(1080), 1088, 0x06).to_bytes()[135],
            0x86
        );
        assert_eq!(pad_keccak(&BitVector::zeros(1086), 1088, 0x01).len(), 1088);
    }

    #[test]
    fn padding_is_a_pure_suffix() {
        for len in [0usize, 1, 7, 8, 63, 447, 448, 511, 512, 1000] {
            let m = BitVector::from_iter((0..len).map(|i| i % 3 == 0));
            let p = pad_md(&m, Endian::Little);
            assert_eq!(p.len() % 512, 0);
            assert_eq!(p.slice(0..len), m);
            let p = pad_keccak(&m, 576, 0x06);
            assert_eq!(p.len() % 576, 0);
            assert_eq!(p.slice(0..len), m);
        }
    }
}
