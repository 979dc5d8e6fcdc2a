//! Hierarchical revocation over a complete binary tree.
//!
//! Leaves are serials written as `l`-bit vectors; every node (leaves and
//! interior nodes alike) owns a hash chain of length `D`. On day `i` the
//! CA releases `F^(D-i)(r)` for each day-i verification node: the roots
//! of the maximal subtrees that contain no revoked leaf. A certificate
//! embeds the chain anchors of every node on its leaf-to-root path, so a
//! single released value from any ancestor vouches for it.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;

use crate::codec::{self, Reader};
use crate::error::Error;
use crate::primitives::{derive_seed, iterate, Digest};

/// Binary vector of length `len ≤ 63`, most significant bit first.
/// The empty vector is the root φ.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeVec {
    bits: u64,
    len: u8,
}

impl NodeVec {
    pub const ROOT: NodeVec = NodeVec { bits: 0, len: 0 };

    pub fn new(bits: u64, len: u8) -> Self {
        assert!(len < 64, "node vectors are limited to 63 bits");
        let mask = if len == 0 { 0 } else { (1u64 << len) - 1 };
        NodeVec {
            bits: bits & mask,
            len,
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        if s == "φ" || s.is_empty() {
            return Ok(Self::ROOT);
        }
        if s.len() >= 64 || !s.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::Malformed(format!("bad node vector {s:?}")));
        }
        Ok(NodeVec::new(u64::from_str_radix(s, 2).unwrap(), s.len() as u8))
    }

    pub fn leaf(serial: u64, depth: u8) -> Self {
        NodeVec::new(serial, depth)
    }

    pub fn len(&self) -> u8 {
        self.len
    }

    pub fn is_root(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn parent(&self) -> Option<NodeVec> {
        (self.len > 0).then(|| NodeVec::new(self.bits >> 1, self.len - 1))
    }

    pub fn child(&self, bit: u8) -> NodeVec {
        NodeVec::new((self.bits << 1) | bit as u64, self.len + 1)
    }

    pub fn prefix(&self, len: u8) -> NodeVec {
        debug_assert!(len <= self.len);
        NodeVec::new(self.bits >> (self.len - len), len)
    }

    /// True if `self` lies on the path from `other` to the root
    /// (a node is its own ancestor).
    pub fn is_ancestor_of(&self, other: &NodeVec) -> bool {
        self.len <= other.len && other.prefix(self.len) == *self
    }

    /// Ancestors from `self` up to and including the root.
    pub fn path_to_root(&self) -> impl Iterator<Item = NodeVec> + '_ {
        (0..=self.len).rev().map(move |l| self.prefix(l))
    }

    fn bit(&self, i: u8) -> u64 {
        (self.bits >> (self.len - 1 - i)) & 1
    }

    /// Depth-prefixed packed encoding: one length octet, then the bits
    /// MSB-first in `ceil(len/8)` octets.
    pub fn encode(&self, out: &mut Vec<u8>) {
        codec::put_u8(out, self.len);
        let nbytes = (self.len as usize).div_ceil(8);
        let shifted = if self.len == 0 {
            0
        } else {
            self.bits << (nbytes * 8 - self.len as usize)
        };
        out.extend_from_slice(&shifted.to_be_bytes()[8 - nbytes..]);
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self, Error> {
        let len = r.u8()?;
        if len >= 64 {
            return Err(Error::Malformed("node vector too long".into()));
        }
        let nbytes = (len as usize).div_ceil(8);
        let mut buf = [0u8; 8];
        buf[8 - nbytes..].copy_from_slice(r.take(nbytes)?);
        let raw = u64::from_be_bytes(buf);
        let pad = nbytes * 8 - len as usize;
        if pad > 0 && raw & ((1 << pad) - 1) != 0 {
            return Err(Error::Malformed("nonzero padding in node vector".into()));
        }
        Ok(NodeVec::new(raw >> pad, len))
    }
}

/// Lexicographic string order: a prefix sorts before its extensions.
impl Ord for NodeVec {
    fn cmp(&self, other: &Self) -> Ordering {
        let common = self.len.min(other.len);
        for i in 0..common {
            match self.bit(i).cmp(&other.bit(i)) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for NodeVec {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NodeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("φ");
        }
        for i in 0..self.len {
            f.write_str(if self.bit(i) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for NodeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeVec({self})")
    }
}

/// Nodes whose subtree contains at least one revoked leaf.
pub fn dirty_nodes(revoked: &BTreeSet<NodeVec>) -> BTreeSet<NodeVec> {
    revoked.iter().flat_map(|leaf| leaf.path_to_root()).collect()
}

/// Minimum day-i verification node set: every clean node whose parent is
/// dirty, plus φ when nothing is revoked. Runs in O(R·l).
pub fn hcrs_cover(depth: u8, revoked: &BTreeSet<NodeVec>) -> BTreeSet<NodeVec> {
    debug_assert!(revoked.iter().all(|v| v.len() == depth));
    if revoked.is_empty() {
        return [NodeVec::ROOT].into_iter().collect();
    }
    let dirty = dirty_nodes(revoked);
    let mut cover = BTreeSet::new();
    for node in &dirty {
        if node.len() == depth {
            continue;
        }
        for bit in 0..2 {
            let c = node.child(bit);
            if !dirty.contains(&c) {
                cover.insert(c);
            }
        }
    }
    cover
}

/// Tree of per-node chains held by the CA. Node seeds are derived from a
/// master secret so the tree need not store 2^(l+1) values; anchors are
/// memoised on first use.
#[derive(Debug, Clone)]
pub struct HcrsTree {
    depth: u8,
    validity_days: u32,
    population: u64,
    master: Digest,
    anchors: BTreeMap<NodeVec, Digest>,
}

impl HcrsTree {
    pub fn new<R: Rng + ?Sized>(depth: u8, validity_days: u32, width: usize, rng: &mut R) -> Result<Self, Error> {
        if depth >= 40 {
            return Err(Error::InvalidParameter(format!("tree depth {depth} too large")));
        }
        if validity_days == 0 {
            return Err(Error::InvalidParameter("validity must be at least one day".into()));
        }
        Ok(HcrsTree {
            depth,
            validity_days,
            population: 1u64 << depth,
            master: Digest::random(width, rng),
            anchors: BTreeMap::new(),
        })
    }

    /// Smallest tree holding `population` leaves; leaves past the
    /// population are virtual and permanently revoked.
    pub fn for_population<R: Rng + ?Sized>(population: u64, validity_days: u32, width: usize, rng: &mut R) -> Result<Self, Error> {
        if population == 0 {
            return Err(Error::InvalidParameter("empty population".into()));
        }
        let depth = (64 - (population - 1).leading_zeros()) as u8;
        let mut t = Self::new(depth, validity_days, width, rng)?;
        t.population = population;
        Ok(t)
    }

    pub fn depth(&self) -> u8 {
        self.depth
    }

    pub fn validity_days(&self) -> u32 {
        self.validity_days
    }

    pub fn population(&self) -> u64 {
        self.population
    }

    pub fn leaf_count(&self) -> u64 {
        1u64 << self.depth
    }

    pub fn contains(&self, node: &NodeVec) -> bool {
        node.len() <= self.depth
    }

    fn seed(&self, node: &NodeVec) -> Digest {
        let mut label = Vec::with_capacity(10);
        node.encode(&mut label);
        derive_seed(&self.master, &label)
    }

    /// `F^D(r)` for `node`.
    pub fn anchor(&mut self, node: &NodeVec) -> Digest {
        if let Some(a) = self.anchors.get(node) {
            return *a;
        }
        let a = iterate(&self.seed(node), self.validity_days);
        self.anchors.insert(*node, a);
        a
    }

    /// `F^(D-i)(r)` for `node`.
    pub fn value(&self, node: &NodeVec, day: u32) -> Result<Digest, Error> {
        if day == 0 || day > self.validity_days {
            return Err(Error::DayOutOfRange {
                day,
                max: self.validity_days,
            });
        }
        Ok(iterate(&self.seed(node), self.validity_days - day))
    }

    /// Anchors for the certificate of `leaf`.
    pub fn cert_path(&mut self, leaf: NodeVec) -> Result<HcrsCertPath, Error> {
        if leaf.len() != self.depth {
            return Err(Error::InvalidParameter(format!("{leaf} is not a leaf")));
        }
        let path_anchors = (0..=self.depth).map(|l| self.anchor(&leaf.prefix(l))).collect();
        Ok(HcrsCertPath {
            leaf,
            path_anchors,
        })
    }

    /// Real revoked leaves plus every virtual leaf past the population.
    pub fn effective_revoked(&self, revoked: &BTreeSet<NodeVec>) -> BTreeSet<NodeVec> {
        let mut all = revoked.clone();
        for s in self.population..self.leaf_count() {
            all.insert(NodeVec::leaf(s, self.depth));
        }
        all
    }
}

/// Anchors embedded in one certificate; `path_anchors[j]` belongs to the
/// length-`j` prefix of `leaf`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HcrsCertPath {
    pub leaf: NodeVec,
    pub path_anchors: Vec<Digest>,
}

/// One day's released values, keyed by node in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationNodeSet {
    pub day: u32,
    pub values: BTreeMap<NodeVec, Digest>,
}

impl VerificationNodeSet {
    pub fn nodes(&self) -> impl Iterator<Item = &NodeVec> {
        self.values.keys()
    }

    /// DirectoryPayload: day, count, then (node, digest) pairs.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        codec::put_u32(&mut out, self.day);
        codec::put_u32(&mut out, self.values.len() as u32);
        let width = self.values.values().next().map_or(0, |d| d.width());
        codec::put_u8(&mut out, width as u8);
        for (n, d) in &self.values {
            n.encode(&mut out);
            codec::put_digest(&mut out, d);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        let day = r.u32()?;
        let n = r.u32()?;
        let width = r.u8()? as usize;
        let mut values = BTreeMap::new();
        for _ in 0..n {
            let node = NodeVec::decode(&mut r)?;
            values.insert(node, r.digest(width)?);
        }
        r.finish()?;
        Ok(VerificationNodeSet { day, values })
    }
}

/// CA daily step: compute the cover of `revoked` and release its values.
pub fn hcrs_daily_update(tree: &HcrsTree, revoked: &BTreeSet<NodeVec>, day: u32) -> Result<VerificationNodeSet, Error> {
    if day == 0 || day > tree.validity_days {
        return Err(Error::DayOutOfRange {
            day,
            max: tree.validity_days,
        });
    }
    let cover = hcrs_cover(tree.depth, &tree.effective_revoked(revoked));
    let values = cover
        .into_iter()
        .map(|n| Ok((n, tree.value(&n, day)?)))
        .collect::<Result<_, Error>>()?;
    Ok(VerificationNodeSet { day, values })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HcrsAnswer {
    Vouch { node: NodeVec, value: Digest },
    Refused,
}

impl HcrsAnswer {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            HcrsAnswer::Vouch { node, value } => {
                codec::put_u8(&mut out, 0);
                node.encode(&mut out);
                codec::put_u8(&mut out, value.width() as u8);
                codec::put_digest(&mut out, value);
            }
            HcrsAnswer::Refused => codec::put_u8(&mut out, 1),
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        let ans = match r.u8()? {
            0 => {
                let node = NodeVec::decode(&mut r)?;
                let w = r.u8()? as usize;
                HcrsAnswer::Vouch {
                    node,
                    value: r.digest(w)?,
                }
            }
            1 => HcrsAnswer::Refused,
            _ => return Err(Error::Malformed("answer tag".into())),
        };
        r.finish()?;
        Ok(ans)
    }
}

/// Directory role for one tree.
#[derive(Debug, Clone)]
pub struct HcrsDirectory {
    depth: u8,
    current: Option<VerificationNodeSet>,
}

impl HcrsDirectory {
    pub fn new(depth: u8) -> Self {
        HcrsDirectory {
            depth,
            current: None,
        }
    }

    pub fn ingest(&mut self, update: VerificationNodeSet) {
        self.current = Some(update);
    }

    pub fn day(&self) -> Option<u32> {
        self.current.as_ref().map(|c| c.day)
    }

    /// Deepest ancestor of `leaf` in the current cover, with its value.
    pub fn answer(&self, leaf: &NodeVec) -> HcrsAnswer {
        let Some(cur) = &self.current else {
            return HcrsAnswer::Refused;
        };
        if leaf.len() != self.depth {
            return HcrsAnswer::Refused;
        }
        leaf.path_to_root()
            .find_map(|n| {
                cur.values.get(&n).map(|v| HcrsAnswer::Vouch {
                    node: n,
                    value: *v,
                })
            })
            .unwrap_or(HcrsAnswer::Refused)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HcrsVerdict {
    Valid,
    Invalid,
}

/// Valid iff `node` is on the certificate's path and F^i(value) equals
/// the anchor stored for that node.
pub fn hcrs_verify(cert: &HcrsCertPath, node: &NodeVec, value: &Digest, day: u32) -> HcrsVerdict {
    match cert.path_anchors.get(node.len() as usize) {
        Some(anchor) => hcrs_check(&cert.leaf, node, anchor, value, day),
        None => HcrsVerdict::Invalid,
    }
}

/// [`hcrs_verify`] given only the anchor belonging to `node`.
pub fn hcrs_check(leaf: &NodeVec, node: &NodeVec, anchor: &Digest, value: &Digest, day: u32) -> HcrsVerdict {
    if day == 0 || !node.is_ancestor_of(leaf) || iterate(value, day) != *anchor {
        HcrsVerdict::Invalid
    } else {
        HcrsVerdict::Valid
    }
}
