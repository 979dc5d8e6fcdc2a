//! Hash-chain iteration and Merkle node hashing shared by every scheme.
//!
//! One 256-bit hash backs all constructions. Each use prefixes its own
//! one-octet tag, so a chain step can never collide with a pair hash, a
//! single-child hash, a leaf hash or a 2-3 tree node hash. Outputs are
//! truncated to the width of the inputs, which lets the 100-bit setting
//! (13 octets) and the full 32-octet setting share the same code.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::error::Error;

/// Largest supported digest width in octets.
pub const MAX_WIDTH: usize = 32;

const TAG_CHAIN: u8 = 0x01;
const TAG_PAIR: u8 = 0x02;
const TAG_SINGLE: u8 = 0x03;
const TAG_LEAF: u8 = 0x04;
const TAG_NODE2: u8 = 0x05;
const TAG_NODE3: u8 = 0x06;
const TAG_EMPTY: u8 = 0x07;
const TAG_SEED: u8 = 0x08;
const TAG_SIGN: u8 = 0x10;

/// Output width selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum HashMode {
    /// 100-bit values rounded up to 13 octets.
    Compact,
    /// Full 32-octet digests.
    #[default]
    Modern,
}

impl HashMode {
    pub fn width(self) -> usize {
        match self {
            HashMode::Compact => 13,
            HashMode::Modern => 32,
        }
    }

    pub fn from_width(width: usize) -> Option<Self> {
        match width {
            13 => Some(HashMode::Compact),
            32 => Some(HashMode::Modern),
            _ => None,
        }
    }
}

/// Fixed-width octet string. Unused trailing storage is always zero, so
/// the derived comparisons are bytewise over the live prefix.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest {
    len: u8,
    bytes: [u8; MAX_WIDTH],
}

impl Digest {
    pub fn from_slice(bytes: &[u8]) -> Result<Self, Error> {
        if bytes.is_empty() || bytes.len() > MAX_WIDTH {
            return Err(Error::WidthMismatch {
                expected: MAX_WIDTH,
                found: bytes.len(),
            });
        }
        let mut out = [0u8; MAX_WIDTH];
        out[..bytes.len()].copy_from_slice(bytes);
        Ok(Digest {
            len: bytes.len() as u8,
            bytes: out,
        })
    }

    /// A digest whose trailing eight octets hold `value` big-endian, zero-padded in front.
    pub fn from_u64(width: usize, value: u64) -> Self {
        let mut bytes = [0u8; MAX_WIDTH];
        let be = value.to_be_bytes();
        let n = width.min(8);
        bytes[width - n..width].copy_from_slice(&be[8 - n..]);
        Digest {
            len: width as u8,
            bytes,
        }
    }

    pub fn random<R: rand::Rng + ?Sized>(width: usize, rng: &mut R) -> Self {
        let mut bytes = [0u8; MAX_WIDTH];
        rng.fill_bytes(&mut bytes[..width]);
        Digest {
            len: width as u8,
            bytes,
        }
    }

    pub fn width(&self) -> usize {
        self.len as usize
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes[..self.len as usize]
    }

    pub fn to_hex(&self) -> String {
        self.as_bytes().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Result<Self, Error> {
        if !s.len().is_multiple_of(2) {
            return Err(Error::Malformed("odd-length hex digest".into()));
        }
        let bytes = (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16))
            .collect::<Result<Vec<u8>, _>>()
            .map_err(|e| Error::Malformed(format!("bad hex digest: {e}")))?;
        Digest::from_slice(&bytes)
    }

    /// Flips one bit, for tamper tests.
    pub fn with_bit_flipped(mut self, bit: usize) -> Self {
        self.bytes[bit / 8] ^= 1 << (bit % 8);
        self
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

fn tagged(width: usize, tag: u8, parts: &[&[u8]]) -> Digest {
    let mut h = Sha256::new();
    h.update([tag]);
    for p in parts {
        h.update(p);
    }
    let full = h.finalize();
    let mut bytes = [0u8; MAX_WIDTH];
    bytes[..width].copy_from_slice(&full[..width]);
    Digest {
        len: width as u8,
        bytes,
    }
}

/// Hash-chain parameters: chain depth (days of validity) and value width in bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainParams {
    depth: u32,
    width_bits: u32,
}

impl ChainParams {
    pub fn new(depth: u32, width_bits: u32) -> Result<Self, Error> {
        if depth == 0 {
            return Err(Error::InvalidParameter("chain depth must be at least 1".into()));
        }
        if width_bits < 80 || width_bits as usize > MAX_WIDTH * 8 {
            return Err(Error::InvalidParameter(format!(
                "chain width {width_bits} bits outside 80..=256"
            )));
        }
        Ok(ChainParams { depth, width_bits })
    }

    pub fn compact() -> Self {
        ChainParams {
            depth: 365,
            width_bits: 100,
        }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn width_bits(&self) -> u32 {
        self.width_bits
    }

    /// Width in whole octets.
    pub fn width(&self) -> usize {
        self.width_bits.div_ceil(8) as usize
    }
}

/// One application of the one-way function F.
pub fn step(x: &Digest) -> Digest {
    tagged(x.width(), TAG_CHAIN, &[x.as_bytes()])
}

/// F applied `k` times to `seed`.
pub fn iterate(seed: &Digest, k: u32) -> Digest {
    let mut cur = *seed;
    for _ in 0..k {
        cur = step(&cur);
    }
    cur
}

/// H(left ‖ right), order-sensitive.
pub fn merkle_pair(left: &Digest, right: &Digest) -> Result<Digest, Error> {
    if left.width() != right.width() {
        return Err(Error::WidthMismatch {
            expected: left.width(),
            found: right.width(),
        });
    }
    Ok(tagged(
        left.width(),
        TAG_PAIR,
        &[left.as_bytes(), right.as_bytes()],
    ))
}

/// H(only), for an odd trailing node.
pub fn merkle_single(only: &Digest) -> Digest {
    tagged(only.width(), TAG_SINGLE, &[only.as_bytes()])
}

/// Hash of an encoded leaf record (CRT statement, dictionary leaf).
pub fn hash_leaf(width: usize, encoded: &[u8]) -> Digest {
    tagged(width, TAG_LEAF, &[encoded])
}

/// Arity-tagged interior hash over pre-encoded child summaries.
pub fn hash_node(width: usize, children: &[&[u8]]) -> Digest {
    let tag = if children.len() == 3 { TAG_NODE3 } else { TAG_NODE2 };
    tagged(width, tag, children)
}

/// Root value of an empty dictionary.
pub fn empty_root(width: usize) -> Digest {
    tagged(width, TAG_EMPTY, &[])
}

/// Deterministic per-index secret derived from a master secret.
pub fn derive_seed(master: &Digest, label: &[u8]) -> Digest {
    tagged(master.width(), TAG_SEED, &[master.as_bytes(), label])
}

/// Authenticated-bytes wrapper standing in for a CA signature: a tag, the
/// signer id and a hash over the payload. It binds content to a signer id
/// but carries no cryptographic unforgeability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub signer: u32,
    pub payload_hash: Digest,
}

impl Signature {
    pub const ENCODED_LEN: usize = 1 + 4 + MAX_WIDTH;

    pub fn sign(signer: u32, payload: &[u8]) -> Self {
        Signature {
            signer,
            payload_hash: tagged(MAX_WIDTH, TAG_SIGN, &[&signer.to_be_bytes(), payload]),
        }
    }

    pub fn verify(&self, signer: u32, payload: &[u8]) -> bool {
        self.signer == signer && *self == Signature::sign(signer, payload)
    }

    pub fn encode(&self, out: &mut Vec<u8>) {
        out.push(TAG_SIGN);
        out.extend_from_slice(&self.signer.to_be_bytes());
        out.extend_from_slice(self.payload_hash.as_bytes());
    }

    pub fn decode(r: &mut crate::codec::Reader<'_>) -> Result<Self, Error> {
        if r.u8()? != TAG_SIGN {
            return Err(Error::Malformed("bad signature tag".into()));
        }
        let signer = r.u32()?;
        let payload_hash = r.digest(MAX_WIDTH)?;
        Ok(Signature {
            signer,
            payload_hash,
        })
    }
}
