//! Authenticated dictionary of revoked serials over a 2-3 tree.
//!
//! Leaves hold `(serial, revocation tick)` in increasing serial order, all
//! at the same depth. Each interior node hashes its children's
//! `(min, max, digest)` summaries with an arity-tagged hash, so a verifier
//! can check from sibling summaries alone that two leaves are adjacent.
//! Updates recompute only digests on the affected path plus the siblings
//! touched by splits, borrows and merges.

use crate::codec::{self, Reader};
use crate::error::Error;
use crate::model::{Day, Serial, Tick};
use crate::primitives::{empty_root, hash_leaf, hash_node, Digest, Signature};

/// Key range and digest of a subtree, as bound into its parent's hash.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Summary {
    pub min: Serial,
    pub max: Serial,
    pub digest: Digest,
}

impl Summary {
    fn bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.digest.width());
        codec::put_u64(&mut out, self.min);
        codec::put_u64(&mut out, self.max);
        codec::put_digest(&mut out, &self.digest);
        out
    }
}

fn leaf_digest(width: usize, serial: Serial, tick: Tick) -> Digest {
    let mut b = Vec::with_capacity(12);
    codec::put_u64(&mut b, serial);
    codec::put_u32(&mut b, tick);
    hash_leaf(width, &b)
}

fn interior_digest(width: usize, children: &[Summary]) -> Digest {
    let parts: Vec<Vec<u8>> = children.iter().map(Summary::bytes).collect();
    let refs: Vec<&[u8]> = parts.iter().map(Vec::as_slice).collect();
    hash_node(width, &refs)
}

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        serial: Serial,
        tick: Tick,
        digest: Digest,
    },
    Internal {
        children: Vec<Node>,
        summary: Summary,
    },
}

impl Node {
    fn leaf(width: usize, serial: Serial, tick: Tick, log: &mut Vec<(u8, Serial)>) -> Node {
        log.push((0, serial));
        Node::Leaf {
            serial,
            tick,
            digest: leaf_digest(width, serial, tick),
        }
    }

    fn internal(width: usize, height: u8, children: Vec<Node>, log: &mut Vec<(u8, Serial)>) -> Node {
        let mut n = Node::Internal {
            children,
            summary: Summary {
                min: 0,
                max: 0,
                digest: empty_root(width),
            },
        };
        n.refresh(width, height, log);
        n
    }

    fn summary(&self) -> Summary {
        match self {
            Node::Leaf { serial, digest, .. } => Summary {
                min: *serial,
                max: *serial,
                digest: *digest,
            },
            Node::Internal { summary, .. } => *summary,
        }
    }

    fn children(&self) -> &[Node] {
        match self {
            Node::Leaf { .. } => &[],
            Node::Internal { children, .. } => children,
        }
    }

    fn children_mut(&mut self) -> &mut Vec<Node> {
        match self {
            Node::Leaf { .. } => unreachable!("leaf has no children"),
            Node::Internal { children, .. } => children,
        }
    }

    /// Recomputes this interior node's summary from its children.
    fn refresh(&mut self, width: usize, height: u8, log: &mut Vec<(u8, Serial)>) {
        if let Node::Internal { children, summary } = self {
            let sums: Vec<Summary> = children.iter().map(Node::summary).collect();
            *summary = Summary {
                min: sums[0].min,
                max: sums[sums.len() - 1].max,
                digest: interior_digest(width, &sums),
            };
            log.push((height, summary.min));
        }
    }

    /// Index of the child whose subtree should hold `key`.
    fn route(&self, key: Serial) -> usize {
        let ch = self.children();
        ch.iter().rposition(|c| c.summary().min <= key).unwrap_or(0)
    }
}

/// Outcome of one update: the digest positions `(height, subtree min)`
/// that were recomputed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateReport {
    pub recomputed: Vec<(u8, Serial)>,
}

impl UpdateReport {
    pub fn count(&self) -> usize {
        self.recomputed.len()
    }
}

#[derive(Debug, Clone)]
pub struct TwoThreeTree {
    width: usize,
    root: Option<Node>,
    /// Leaf depth; a lone leaf root has height 0.
    height: u8,
    len: usize,
}

impl TwoThreeTree {
    pub fn new(width: usize) -> Self {
        TwoThreeTree {
            width,
            root: None,
            height: 0,
            len: 0,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn depth(&self) -> u8 {
        self.height
    }

    pub fn root_hash(&self) -> Digest {
        self.root
            .as_ref()
            .map_or_else(|| empty_root(self.width), |n| n.summary().digest)
    }

    pub fn contains(&self, serial: Serial) -> bool {
        self.get(serial).is_some()
    }

    /// Revocation tick stored with `serial`.
    pub fn get(&self, serial: Serial) -> Option<Tick> {
        let mut node = self.root.as_ref()?;
        loop {
            match node {
                Node::Leaf { serial: s, tick, .. } => return (*s == serial).then_some(*tick),
                Node::Internal { children, .. } => node = &children[node.route(serial)],
            }
        }
    }

    /// Leaves in key order.
    pub fn entries(&self) -> Vec<(Serial, Tick)> {
        fn walk(n: &Node, out: &mut Vec<(Serial, Tick)>) {
            match n {
                Node::Leaf { serial, tick, .. } => out.push((*serial, *tick)),
                Node::Internal { children, .. } => children.iter().for_each(|c| walk(c, out)),
            }
        }
        let mut out = Vec::with_capacity(self.len);
        if let Some(r) = &self.root {
            walk(r, &mut out);
        }
        out
    }

    pub fn insert(&mut self, serial: Serial, tick: Tick) -> Result<UpdateReport, Error> {
        if self.contains(serial) {
            return Err(Error::AlreadyPresent(serial));
        }
        let w = self.width;
        let mut log = Vec::new();
        match self.root.take() {
            None => {
                self.root = Some(Node::leaf(w, serial, tick, &mut log));
                self.height = 0;
            }
            Some(old @ Node::Leaf { .. }) => {
                let new = Node::leaf(w, serial, tick, &mut log);
                let pair = if serial < old.summary().min { vec![new, old] } else { vec![old, new] };
                self.root = Some(Node::internal(w, 1, pair, &mut log));
                self.height = 1;
            }
            Some(mut root) => {
                if let Some(split) = insert_rec(&mut root, self.height, serial, tick, w, &mut log) {
                    self.height += 1;
                    root = Node::internal(w, self.height, vec![root, split], &mut log);
                }
                self.root = Some(root);
            }
        }
        self.len += 1;
        Ok(UpdateReport { recomputed: log })
    }

    pub fn delete(&mut self, serial: Serial) -> Result<UpdateReport, Error> {
        if !self.contains(serial) {
            return Err(Error::NotPresent(serial));
        }
        let w = self.width;
        let mut log = Vec::new();
        let mut root = self.root.take().expect("contains implies nonempty");
        if let Node::Leaf { .. } = root {
            self.height = 0;
            self.len = 0;
            return Ok(UpdateReport { recomputed: log });
        }
        delete_rec(&mut root, self.height, serial, w, &mut log);
        while let Node::Internal { children, .. } = &mut root {
            if children.len() != 1 {
                break;
            }
            root = children.pop().unwrap();
            self.height -= 1;
        }
        self.root = Some(root);
        self.len -= 1;
        Ok(UpdateReport { recomputed: log })
    }

    /// Membership proof if present, otherwise the bracketing pair.
    pub fn prove(&self, serial: Serial) -> TtProof {
        if self.contains(serial) {
            return TtProof::Member(self.membership(serial));
        }
        let root = self.root.as_ref();
        let left = root.and_then(|r| predecessor(r, serial)).map(|s| self.membership(s));
        let right = root.and_then(|r| successor(r, serial)).map(|s| self.membership(s));
        TtProof::NonMember(NonMembershipProof { left, right })
    }

    fn membership(&self, serial: Serial) -> MembershipProof {
        let mut node = self.root.as_ref().expect("serial present");
        let mut levels = Vec::new();
        let tick = loop {
            match node {
                Node::Leaf { tick, .. } => break *tick,
                Node::Internal { children, .. } => {
                    let i = node.route(serial);
                    let siblings = children
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, c)| c.summary())
                        .collect();
                    levels.push(ProofLevel {
                        position: i as u8,
                        siblings,
                    });
                    node = &children[i];
                }
            }
        };
        levels.reverse();
        MembershipProof { serial, tick, levels }
    }

    /// Checks arity, uniform leaf depth, key order, ranges and digests.
    pub fn check_invariants(&self) -> Result<(), String> {
        fn check(n: &Node, h: u8, w: usize, leaves: &mut Vec<Serial>) -> Result<(), String> {
            match n {
                Node::Leaf { serial, tick, digest } => {
                    if h != 0 {
                        return Err(format!("leaf {serial} at wrong depth"));
                    }
                    if *digest != leaf_digest(w, *serial, *tick) {
                        return Err(format!("leaf {serial} digest"));
                    }
                    leaves.push(*serial);
                    Ok(())
                }
                Node::Internal { children, summary } => {
                    if h == 0 {
                        return Err("interior node at leaf depth".into());
                    }
                    if !(2..=3).contains(&children.len()) {
                        return Err(format!("interior node with {} children", children.len()));
                    }
                    for c in children {
                        check(c, h - 1, w, leaves)?;
                    }
                    let sums: Vec<Summary> = children.iter().map(Node::summary).collect();
                    let want = Summary {
                        min: sums[0].min,
                        max: sums[sums.len() - 1].max,
                        digest: interior_digest(w, &sums),
                    };
                    if want != *summary {
                        return Err(format!("stale summary at height {h}"));
                    }
                    Ok(())
                }
            }
        }
        let mut leaves = Vec::new();
        if let Some(r) = &self.root {
            check(r, self.height, self.width, &mut leaves)?;
        }
        if leaves.windows(2).any(|w| w[0] >= w[1]) {
            return Err("leaf keys not strictly increasing".into());
        }
        if leaves.len() != self.len {
            return Err("length counter out of sync".into());
        }
        Ok(())
    }

    pub fn bulletin(&self, issuer: u32, day: Day) -> Bulletin {
        Bulletin::new(issuer, day, self.root_hash())
    }
}

fn insert_rec(node: &mut Node, h: u8, serial: Serial, tick: Tick, w: usize, log: &mut Vec<(u8, Serial)>) -> Option<Node> {
    let i = node.route(serial);
    let children = node.children_mut();
    if h == 1 {
        let at = if serial < children[i].summary().min { i } else { i + 1 };
        children.insert(at, Node::leaf(w, serial, tick, log));
    } else if let Some(split) = insert_rec(&mut children[i], h - 1, serial, tick, w, log) {
        children.insert(i + 1, split);
    }
    if children.len() == 4 {
        let right = children.split_off(2);
        node.refresh(w, h, log);
        Some(Node::internal(w, h, right, log))
    } else {
        node.refresh(w, h, log);
        None
    }
}

fn delete_rec(node: &mut Node, h: u8, serial: Serial, w: usize, log: &mut Vec<(u8, Serial)>) {
    let i = node.route(serial);
    let children = node.children_mut();
    if h == 1 {
        children.remove(i);
        node.refresh(w, h, log);
        return;
    }
    delete_rec(&mut children[i], h - 1, serial, w, log);
    if children[i].children().len() == 1 {
        let ch = h - 1;
        let orphan = children[i].children_mut().pop().unwrap();
        if i > 0 && children[i - 1].children().len() == 3 {
            let moved = children[i - 1].children_mut().pop().unwrap();
            children[i].children_mut().extend([moved, orphan]);
            children[i - 1].refresh(w, ch, log);
            children[i].refresh(w, ch, log);
        } else if i + 1 < children.len() && children[i + 1].children().len() == 3 {
            let moved = children[i + 1].children_mut().remove(0);
            children[i].children_mut().extend([orphan, moved]);
            children[i].refresh(w, ch, log);
            children[i + 1].refresh(w, ch, log);
        } else if i > 0 {
            children[i - 1].children_mut().push(orphan);
            children[i - 1].refresh(w, ch, log);
            children.remove(i);
        } else {
            children[i + 1].children_mut().insert(0, orphan);
            children[i + 1].refresh(w, ch, log);
            children.remove(i);
        }
    }
    node.refresh(w, h, log);
}

fn predecessor(n: &Node, q: Serial) -> Option<Serial> {
    match n {
        Node::Leaf { serial, .. } => (*serial < q).then_some(*serial),
        Node::Internal { children, .. } => children
            .iter()
            .rev()
            .find(|c| c.summary().min < q)
            .and_then(|c| predecessor(c, q)),
    }
}

fn successor(n: &Node, q: Serial) -> Option<Serial> {
    match n {
        Node::Leaf { serial, .. } => (*serial > q).then_some(*serial),
        Node::Internal { children, .. } => children
            .iter()
            .find(|c| c.summary().max > q)
            .and_then(|c| successor(c, q)),
    }
}

/// One level of a membership path: where the running node sits among its
/// siblings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofLevel {
    pub position: u8,
    pub siblings: Vec<Summary>,
}

/// Path from a leaf to the root, bottom-up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipProof {
    pub serial: Serial,
    pub tick: Tick,
    pub levels: Vec<ProofLevel>,
}

impl MembershipProof {
    /// Root digest plus every sibling summary seen on the way up; `None`
    /// if the path is structurally impossible.
    fn fold(&self, width: usize) -> Option<(Digest, Vec<Summary>)> {
        let mut cur = Summary {
            min: self.serial,
            max: self.serial,
            digest: leaf_digest(width, self.serial, self.tick),
        };
        let mut seen = Vec::new();
        for lvl in &self.levels {
            let arity = lvl.siblings.len() + 1;
            if !(2..=3).contains(&arity) || lvl.position as usize >= arity {
                return None;
            }
            let mut kids = lvl.siblings.clone();
            kids.insert(lvl.position as usize, cur);
            if kids.iter().any(|k| k.min > k.max) || kids.windows(2).any(|p| p[0].max >= p[1].min) {
                return None;
            }
            seen.extend_from_slice(&lvl.siblings);
            cur = Summary {
                min: kids[0].min,
                max: kids[arity - 1].max,
                digest: interior_digest(width, &kids),
            };
        }
        Some((cur.digest, seen))
    }

    fn encode(&self, out: &mut Vec<u8>) {
        codec::put_u64(out, self.serial);
        codec::put_u32(out, self.tick);
        codec::put_u8(out, self.levels.len() as u8);
        for lvl in &self.levels {
            codec::put_u8(out, ((lvl.siblings.len() as u8 + 1) << 4) | lvl.position);
            for s in &lvl.siblings {
                out.extend_from_slice(&s.bytes());
            }
        }
    }

    fn decode(r: &mut Reader<'_>, width: usize) -> Result<Self, Error> {
        let serial = r.u64()?;
        let tick = r.u32()?;
        let n = r.u8()?;
        let mut levels = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let ap = r.u8()?;
            let (arity, position) = (ap >> 4, ap & 0x0f);
            if !(2..=3).contains(&arity) || position >= arity {
                return Err(Error::Malformed("bad arity/position octet".into()));
            }
            let siblings = (1..arity)
                .map(|_| {
                    Ok(Summary {
                        min: r.u64()?,
                        max: r.u64()?,
                        digest: r.digest(width)?,
                    })
                })
                .collect::<Result<_, Error>>()?;
            levels.push(ProofLevel { position, siblings });
        }
        Ok(MembershipProof { serial, tick, levels })
    }
}

/// Neighbouring leaves around an absent serial; `None` stands for the
/// −∞ / +∞ sentinel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonMembershipProof {
    pub left: Option<MembershipProof>,
    pub right: Option<MembershipProof>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TtProof {
    Member(MembershipProof),
    NonMember(NonMembershipProof),
}

const TAG_MEMBER: u8 = 0x01;
const TAG_NON_MEMBER: u8 = 0x02;

impl TtProof {
    /// Tag, digest width, then the membership path(s). A non-membership
    /// proof carries a presence octet (bit 0 left, bit 1 right).
    pub fn encode(&self, width: usize) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            TtProof::Member(m) => {
                out.push(TAG_MEMBER);
                out.push(width as u8);
                m.encode(&mut out);
            }
            TtProof::NonMember(nm) => {
                out.push(TAG_NON_MEMBER);
                out.push(width as u8);
                out.push(nm.left.is_some() as u8 | ((nm.right.is_some() as u8) << 1));
                for m in nm.left.iter().chain(nm.right.iter()) {
                    m.encode(&mut out);
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<(Self, usize), Error> {
        let mut r = Reader::new(bytes);
        let tag = r.u8()?;
        let width = r.u8()? as usize;
        if !(1..=crate::primitives::MAX_WIDTH).contains(&width) {
            return Err(Error::Malformed("bad digest width".into()));
        }
        let p = match tag {
            TAG_MEMBER => TtProof::Member(MembershipProof::decode(&mut r, width)?),
            TAG_NON_MEMBER => {
                let flags = r.u8()?;
                if flags > 3 {
                    return Err(Error::Malformed("bad presence octet".into()));
                }
                let left = (flags & 1 != 0).then(|| MembershipProof::decode(&mut r, width)).transpose()?;
                let right = (flags & 2 != 0).then(|| MembershipProof::decode(&mut r, width)).transpose()?;
                TtProof::NonMember(NonMembershipProof { left, right })
            }
            _ => return Err(Error::Malformed("unknown proof tag".into())),
        };
        r.finish()?;
        Ok((p, width))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TtVerdict {
    Revoked,
    Valid,
    Invalid,
}

pub fn tt_verify(root: &Digest, proof: &TtProof, serial: Serial) -> TtVerdict {
    let width = root.width();
    match proof {
        TtProof::Member(m) => match m.fold(width) {
            Some((d, _)) if m.serial == serial && d == *root => TtVerdict::Revoked,
            _ => TtVerdict::Invalid,
        },
        TtProof::NonMember(nm) => {
            if nm.left.is_none() && nm.right.is_none() {
                return if *root == empty_root(width) { TtVerdict::Valid } else { TtVerdict::Invalid };
            }
            let lo = nm.left.as_ref().map(|m| m.serial);
            let hi = nm.right.as_ref().map(|m| m.serial);
            if lo.is_some_and(|l| l >= serial) || hi.is_some_and(|h| h <= serial) {
                return TtVerdict::Invalid;
            }
            // Any leaf strictly between the pair would sit in a sibling
            // subtree of one of the two paths.
            let between = |s: &Summary| lo.is_none_or(|l| s.max > l) && hi.is_none_or(|h| s.min < h);
            for m in nm.left.iter().chain(nm.right.iter()) {
                match m.fold(width) {
                    Some((d, seen)) if d == *root && !seen.iter().any(between) => {}
                    _ => return TtVerdict::Invalid,
                }
            }
            TtVerdict::Valid
        }
    }
}

/// Signed daily publication of the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bulletin {
    pub day: Day,
    pub root: Digest,
    pub signature: Signature,
}

impl Bulletin {
    fn body(day: Day, root: &Digest) -> Vec<u8> {
        let mut b = Vec::new();
        codec::put_u32(&mut b, day);
        codec::put_digest(&mut b, root);
        b
    }

    pub fn new(issuer: u32, day: Day, root: Digest) -> Self {
        Bulletin {
            day,
            root,
            signature: Signature::sign(issuer, &Self::body(day, &root)),
        }
    }

    pub fn verify(&self, issuer: u32) -> bool {
        self.signature.verify(issuer, &Self::body(self.day, &self.root))
    }

    /// Day, width octet, root, signature.
    pub fn encode(&self, out: &mut Vec<u8>) {
        codec::put_u32(out, self.day);
        codec::put_u8(out, self.root.width() as u8);
        codec::put_digest(out, &self.root);
        self.signature.encode(out);
    }

    pub fn encoded_len(&self) -> usize {
        5 + self.root.width() + Signature::ENCODED_LEN
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self, Error> {
        let day = r.u32()?;
        let w = r.u8()? as usize;
        Ok(Bulletin {
            day,
            root: r.digest(w)?,
            signature: Signature::decode(r)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn tree_of(keys: &[Serial]) -> TwoThreeTree {
        let mut t = TwoThreeTree::new(32);
        for &k in keys {
            t.insert(k, k as Tick).unwrap();
        }
        t
    }

    #[test]
    fn single_leaf_and_empty() {
        let mut t = TwoThreeTree::new(32);
        assert_eq!(t.root_hash(), empty_root(32));
        let rep = t.insert(7, 3).unwrap();
        assert_eq!(rep.count(), 1);
        assert_eq!(t.root_hash(), leaf_digest(32, 7, 3));
        assert_eq!(t.depth(), 0);
        t.delete(7).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.root_hash(), empty_root(32));
        assert_eq!(tt_verify(&t.root_hash(), &t.prove(5), 5), TtVerdict::Valid);
    }

    #[test]
    fn errors() {
        let mut t = tree_of(&[1, 2]);
        assert_eq!(t.insert(1, 0), Err(Error::AlreadyPresent(1)));
        assert_eq!(t.delete(9), Err(Error::NotPresent(9)));
    }

    #[test]
    fn thousand_inserts_depth_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = TwoThreeTree::new(32);
        let mut oracle = BTreeSet::new();
        while oracle.len() < 1000 {
            let k = rng.gen_range(0..1_000_000u64);
            if oracle.insert(k) {
                t.insert(k, 0).unwrap();
                assert_eq!(t.len(), oracle.len());
            }
        }
        t.check_invariants().unwrap();
        assert!(t.depth() as f64 <= (1000f64).log2() + 1.0);
        let keys: Vec<Serial> = t.entries().into_iter().map(|(k, _)| k).collect();
        assert_eq!(keys, oracle.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn insert_then_delete_restores_set() {
        let mut t = tree_of(&[10, 20, 30, 40, 50]);
        let before = t.entries();
        t.insert(35, 1).unwrap();
        t.delete(35).unwrap();
        t.check_invariants().unwrap();
        assert_eq!(t.entries(), before);
    }

    #[test]
    fn proofs_for_members_and_gaps() {
        let t = tree_of(&[10, 20, 30, 40, 50, 60, 70]);
        let r = t.root_hash();
        assert_eq!(tt_verify(&r, &t.prove(30), 30), TtVerdict::Revoked);
        // a membership proof is not evidence about another serial
        assert_eq!(tt_verify(&r, &t.prove(30), 31), TtVerdict::Invalid);
        match t.prove(35) {
            TtProof::NonMember(nm) => {
                assert_eq!(nm.left.as_ref().unwrap().serial, 30);
                assert_eq!(nm.right.as_ref().unwrap().serial, 40);
            }
            _ => panic!("expected non-membership"),
        }
        assert_eq!(tt_verify(&r, &t.prove(35), 35), TtVerdict::Valid);
        let below = t.prove(5);
        match &below {
            TtProof::NonMember(nm) => {
                assert!(nm.left.is_none());
                assert_eq!(nm.right.as_ref().unwrap().serial, 10);
            }
            _ => panic!(),
        }
        assert_eq!(tt_verify(&r, &below, 5), TtVerdict::Valid);
        assert_eq!(tt_verify(&r, &t.prove(99), 99), TtVerdict::Valid);
        // bracket does not contain the query
        assert_eq!(tt_verify(&r, &t.prove(35), 45), TtVerdict::Invalid);
    }

    #[test]
    fn skipping_a_leaf_is_rejected() {
        let t = tree_of(&[10, 20, 30, 40, 50, 60, 70]);
        let forged = TtProof::NonMember(NonMembershipProof {
            left: Some(t.membership(20)),
            right: Some(t.membership(40)),
        });
        assert_eq!(tt_verify(&t.root_hash(), &forged, 30), TtVerdict::Invalid);
        let forged = TtProof::NonMember(NonMembershipProof {
            left: None,
            right: Some(t.membership(20)),
        });
        assert_eq!(tt_verify(&t.root_hash(), &forged, 15), TtVerdict::Invalid);
        let empty = TtProof::NonMember(NonMembershipProof { left: None, right: None });
        assert_eq!(tt_verify(&t.root_hash(), &empty, 15), TtVerdict::Invalid);
    }

    #[test]
    fn bit_flip_sweep() {
        let t = tree_of(&(0..40).map(|i| i * 3).collect::<Vec<_>>());
        let r = t.root_hash();
        for q in [31u64, 33, 500] {
            let bytes = t.prove(q).encode(32);
            let (back, _) = TtProof::decode(&bytes).unwrap();
            assert_ne!(tt_verify(&r, &back, q), TtVerdict::Invalid);
            for bit in 0..bytes.len() * 8 {
                let mut b = bytes.clone();
                b[bit / 8] ^= 1 << (bit % 8);
                let v = TtProof::decode(&b).map_or(TtVerdict::Invalid, |(p, _)| tt_verify(&r, &p, q));
                assert_eq!(v, TtVerdict::Invalid, "query {q} bit {bit}");
            }
        }
    }

    #[test]
    fn bulletin_signature() {
        let t = tree_of(&[1, 2, 3]);
        let b = t.bulletin(4, 9);
        assert!(b.verify(4));
        assert!(!b.verify(5));
        let mut bytes = Vec::new();
        b.encode(&mut bytes);
        assert_eq!(bytes.len(), b.encoded_len());
        assert_eq!(Bulletin::decode(&mut Reader::new(&bytes)).unwrap(), b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn interleaved_ops_match_oracle(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut t = TwoThreeTree::new(13);
            let mut oracle = BTreeSet::new();
            for _ in 0..300 {
                let k = rng.gen_range(0..200u64);
                let rep = if oracle.contains(&k) && rng.gen_bool(0.6) {
                    oracle.remove(&k);
                    t.delete(k).unwrap()
                } else if !oracle.contains(&k) {
                    oracle.insert(k);
                    t.insert(k, 1).unwrap()
                } else {
                    continue;
                };
                prop_assert!(t.check_invariants().is_ok());
                prop_assert!(rep.count() <= 3 * (t.depth() as usize + 1));
                let q = rng.gen_range(0..200u64);
                let want = if oracle.contains(&q) { TtVerdict::Revoked } else { TtVerdict::Valid };
                prop_assert_eq!(tt_verify(&t.root_hash(), &t.prove(q), q), want);
            }
            let keys: Vec<Serial> = t.entries().into_iter().map(|(k, _)| k).collect();
            prop_assert_eq!(keys, oracle.into_iter().collect::<Vec<_>>());
        }
    }
}
