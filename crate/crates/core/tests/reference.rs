//! Full-round digests against the RustCrypto implementations.

use md5::Md5;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha1::Sha1;
use sha2::{Digest, Sha256};

use fuzhash::hash::{digest_bits, keccak_f_lanes, Algorithm, HashSpec, StepMask};
use fuzhash::BitVector;

fn ours(spec: &HashSpec, data: &[u8]) -> Vec<u8> {
    digest_bits(spec, &BitVector::from_bytes(data))
        .unwrap()
        .to_bytes()
}

fn samples() -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // lengths straddling the one- and two-block padding boundaries
    let mut lens: Vec<usize> = (0..=140).collect();
    lens.extend([135, 136, 137, 143, 144, 145, 200, 1000]);
    lens.into_iter()
        .map(|n| (0..n).map(|_| rng.random()).collect())
        .collect()
}

#[test]
fn md_family_matches_reference() {
    let specs = [
        HashSpec::new(Algorithm::Md5),
        HashSpec::new(Algorithm::Sha1),
        HashSpec::new(Algorithm::Sha256),
    ];
    for data in samples() {
        assert_eq!(
            ours(&specs[0], &data),
            Md5::digest(&data).to_vec(),
            "md5 {}",
            data.len()
        );
        assert_eq!(
            ours(&specs[1], &data),
            Sha1::digest(&data).to_vec(),
            "sha1 {}",
            data.len()
        );
        assert_eq!(
            ours(&specs[2], &data),
            Sha256::digest(&data).to_vec(),
            "sha256 {}",
            data.len()
        );
    }
}

#[test]
fn keccak_sponges_match_reference() {
    for data in samples() {
        assert_eq!(
            ours(&HashSpec::sha3(224), &data),
            sha3::Sha3_224::digest(&data).to_vec()
        );
        assert_eq!(
            ours(&HashSpec::sha3(256), &data),
            sha3::Sha3_256::digest(&data).to_vec()
        );
        assert_eq!(
            ours(&HashSpec::sha3(384), &data),
            sha3::Sha3_384::digest(&data).to_vec()
        );
        assert_eq!(
            ours(&HashSpec::sha3(512), &data),
            sha3::Sha3_512::digest(&data).to_vec()
        );
        assert_eq!(
            ours(&HashSpec::keccak(256), &data),
            sha3::Keccak256::digest(&data).to_vec()
        );
        assert_eq!(
            ours(&HashSpec::keccak(512), &data),
            sha3::Keccak512::digest(&data).to_vec()
        );
    }
}

#[test]
fn permutation_matches_reference_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let mut a: [u64; 25] = std::array::from_fn(|_| rng.random());
        let mut b = a;
        keccak::f1600(&mut a);
        keccak_f_lanes(&mut b, 64, 24, StepMask::ALL);
        assert_eq!(a, b);
    }
}

#[test]
fn small_permutation_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let mut a: [u8; 25] = std::array::from_fn(|_| rng.random());
        let mut wide: [u64; 25] = std::array::from_fn(|i| a[i] as u64);
        keccak::f200(&mut a);
        keccak_f_lanes(&mut wide, 8, 18, StepMask::ALL);
        let narrow: [u8; 25] = std::array::from_fn(|i| wide[i] as u8);
        assert_eq!(a, narrow);
    }
}

#[test]
fn standard_vectors() {
    let hex = |spec: HashSpec, text: &str| {
        digest_bits(&spec, &BitVector::from_ascii(text).unwrap())
            .unwrap()
            .to_hex()
    };
    assert_eq!(
        hex(HashSpec::new(Algorithm::Md5), ""),
        "d41d8cd98f00b204e9800998ecf8427e"
    );
    assert_eq!(
        hex(HashSpec::new(Algorithm::Sha1), "abc"),
        "a9993e364706816aba3e25717850c26c9cd0d89d"
    );
    assert_eq!(
        hex(HashSpec::new(Algorithm::Sha256), "abc"),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
    assert_eq!(
        hex(HashSpec::sha3(256), ""),
        "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a"
    );
    assert_eq!(
        hex(HashSpec::keccak(256), ""),
        "c5d2460186f7233c927e7db2dcc703c0e500b653ca82273b7bfad8045d85a470"
    );
}
