//! Certificate Revocation Trees.
//!
//! The issuer partitions the (CA hash, serial) plane into range
//! statements so that every point matches exactly one statement, hashes
//! the statements into a binary tree and publishes the root. A proof is
//! the matching statement plus the co-path to the root.
//!
//! Level `i+1` pairs level `i` left to right; an odd trailing node is
//! hashed alone. Eleven statements therefore give levels of 11, 6, 3, 2
//! and 1 nodes.

use std::cmp::Ordering;
use std::fmt;

use crate::codec::{self, Reader};
use crate::error::Error;
use crate::model::Serial;
use crate::primitives::{hash_leaf, merkle_pair, merkle_single, Digest, Signature};

/// Hash of a CA public key; CAs are ordered bytewise by it.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CaHash(pub [u8; 32]);

impl CaHash {
    pub fn of_public_key(key: &[u8]) -> Self {
        use sha2::{Digest as _, Sha256};
        CaHash(Sha256::digest(key).into())
    }

    pub fn from_u64(v: u64) -> Self {
        let mut b = [0u8; 32];
        b[24..].copy_from_slice(&v.to_be_bytes());
        CaHash(b)
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for CaHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CaHash({}..)", &self.to_hex()[..12])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T: Ord> Bound<T> {
    /// Position of a finite value relative to this bound.
    fn cmp_value(&self, v: &T) -> Ordering {
        match self {
            Bound::NegInf => Ordering::Less,
            Bound::Finite(b) => b.cmp(v),
            Bound::PosInf => Ordering::Greater,
        }
    }
}

const SENTINEL_NEG: u8 = 0x00;
const SENTINEL_FINITE: u8 = 0x01;
const SENTINEL_POS: u8 = 0x02;

fn put_bound(out: &mut Vec<u8>, b: Bound<&[u8]>, width: usize) {
    match b {
        Bound::NegInf => {
            out.push(SENTINEL_NEG);
            out.extend(std::iter::repeat_n(0, width));
        }
        Bound::Finite(v) => {
            out.push(SENTINEL_FINITE);
            out.extend_from_slice(v);
        }
        Bound::PosInf => {
            out.push(SENTINEL_POS);
            out.extend(std::iter::repeat_n(0, width));
        }
    }
}

fn put_ca(out: &mut Vec<u8>, b: &Bound<CaHash>) {
    match b {
        Bound::Finite(c) => put_bound(out, Bound::Finite(&c.0), 32),
        Bound::NegInf => put_bound(out, Bound::NegInf, 32),
        Bound::PosInf => put_bound(out, Bound::PosInf, 32),
    }
}

fn put_serial(out: &mut Vec<u8>, b: &Bound<Serial>) {
    match b {
        Bound::Finite(x) => put_bound(out, Bound::Finite(&x.to_be_bytes()), 8),
        Bound::NegInf => put_bound(out, Bound::NegInf, 8),
        Bound::PosInf => put_bound(out, Bound::PosInf, 8),
    }
}

fn get_bound<'a>(r: &mut Reader<'a>, width: usize) -> Result<Bound<&'a [u8]>, Error> {
    let s = r.u8()?;
    let v = r.take(width)?;
    match s {
        SENTINEL_FINITE => Ok(Bound::Finite(v)),
        SENTINEL_NEG | SENTINEL_POS if v.iter().all(|&b| b == 0) => Ok(if s == SENTINEL_NEG {
            Bound::NegInf
        } else {
            Bound::PosInf
        }),
        _ => Err(Error::Malformed("bad bound sentinel".into())),
    }
}

fn ca_bound(b: Bound<&[u8]>) -> Bound<CaHash> {
    match b {
        Bound::NegInf => Bound::NegInf,
        Bound::Finite(v) => Bound::Finite(CaHash(v.try_into().unwrap())),
        Bound::PosInf => Bound::PosInf,
    }
}

fn serial_bound(b: Bound<&[u8]>) -> Bound<Serial> {
    match b {
        Bound::NegInf => Bound::NegInf,
        Bound::Finite(v) => Bound::Finite(u64::from_be_bytes(v.try_into().unwrap())),
        Bound::PosInf => Bound::PosInf,
    }
}

/// One range statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statement {
    /// `low < CA_X < high`: revocation status unknown.
    UnknownCa { low: Bound<CaHash>, high: Bound<CaHash> },
    /// `CA_X = ca` and `x_low ≤ X < x_high`: X is revoked iff
    /// `X = revoked_iff` (`None` stands for −∞, i.e. nothing revoked).
    CaRange {
        ca: CaHash,
        x_low: Bound<Serial>,
        x_high: Bound<Serial>,
        revoked_iff: Option<Serial>,
    },
}

const KIND_UNKNOWN_CA: u8 = 0x01;
const KIND_CA_RANGE: u8 = 0x02;

/// Encoded statement size: kind + two CA bounds + three serial bounds.
pub const STATEMENT_LEN: usize = 1 + 2 * 33 + 3 * 9;

impl Statement {
    pub fn contains(&self, ca: &CaHash, x: Serial) -> bool {
        match self {
            Statement::UnknownCa { low, high } => {
                low.cmp_value(ca) == Ordering::Less && high.cmp_value(ca) == Ordering::Greater
            }
            Statement::CaRange {
                ca: c, x_low, x_high, ..
            } => c == ca && x_low.cmp_value(&x) != Ordering::Greater && x_high.cmp_value(&x) == Ordering::Greater,
        }
    }

    /// Where this statement's region lies relative to a point.
    fn cmp_point(&self, ca: &CaHash, x: Serial) -> Ordering {
        if self.contains(ca, x) {
            return Ordering::Equal;
        }
        match self {
            Statement::UnknownCa { high, .. } => {
                if high.cmp_value(ca) != Ordering::Greater {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
            Statement::CaRange { ca: c, x_high, .. } => match c.cmp(ca) {
                Ordering::Equal => {
                    if x_high.cmp_value(&x) != Ordering::Greater {
                        Ordering::Less
                    } else {
                        Ordering::Greater
                    }
                }
                o => o,
            },
        }
    }

    pub fn is_unknown_ca(&self) -> bool {
        matches!(self, Statement::UnknownCa { .. })
    }

    /// Canonical fixed-width encoding.
    pub fn encode(&self, out: &mut Vec<u8>) {
        match self {
            Statement::UnknownCa { low, high } => {
                out.push(KIND_UNKNOWN_CA);
                put_ca(out, low);
                put_ca(out, high);
                put_serial(out, &Bound::NegInf);
                put_serial(out, &Bound::PosInf);
                put_serial(out, &Bound::NegInf);
            }
            Statement::CaRange {
                ca,
                x_low,
                x_high,
                revoked_iff,
            } => {
                out.push(KIND_CA_RANGE);
                put_ca(out, &Bound::Finite(*ca));
                put_ca(out, &Bound::Finite(*ca));
                put_serial(out, x_low);
                put_serial(out, x_high);
                put_serial(out, &revoked_iff.map_or(Bound::NegInf, Bound::Finite));
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(STATEMENT_LEN);
        self.encode(&mut out);
        out
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self, Error> {
        let kind = r.u8()?;
        let ca_low = ca_bound(get_bound(r, 32)?);
        let ca_high = ca_bound(get_bound(r, 32)?);
        let x_low = serial_bound(get_bound(r, 8)?);
        let x_high = serial_bound(get_bound(r, 8)?);
        let rev = serial_bound(get_bound(r, 8)?);
        let st = match kind {
            KIND_UNKNOWN_CA => {
                if x_low != Bound::NegInf || x_high != Bound::PosInf || rev != Bound::NegInf {
                    return Err(Error::Malformed("unknown-CA statement with serial bounds".into()));
                }
                Statement::UnknownCa {
                    low: ca_low,
                    high: ca_high,
                }
            }
            KIND_CA_RANGE => {
                let (Bound::Finite(a), Bound::Finite(b)) = (ca_low, ca_high) else {
                    return Err(Error::Malformed("CA range needs a finite CA".into()));
                };
                if a != b || matches!(x_low, Bound::PosInf) || matches!(x_high, Bound::NegInf) {
                    return Err(Error::Malformed("inconsistent CA range statement".into()));
                }
                let revoked_iff = match rev {
                    Bound::NegInf => None,
                    Bound::Finite(s) => Some(s),
                    Bound::PosInf => return Err(Error::Malformed("revoked_iff = +inf".into())),
                };
                Statement::CaRange {
                    ca: a,
                    x_low,
                    x_high,
                    revoked_iff,
                }
            }
            _ => return Err(Error::Malformed("unknown statement kind".into())),
        };
        Ok(st)
    }

    pub fn leaf_hash(&self, width: usize) -> Digest {
        hash_leaf(width, &self.to_bytes())
    }

    /// Human-readable form; `label` names CA hashes.
    pub fn describe(&self, label: &dyn Fn(&CaHash) -> String) -> String {
        let cab = |b: &Bound<CaHash>| match b {
            Bound::NegInf => "-inf".to_string(),
            Bound::Finite(c) => label(c),
            Bound::PosInf => "inf".to_string(),
        };
        let xb = |b: &Bound<Serial>| match b {
            Bound::NegInf => "-inf".to_string(),
            Bound::Finite(x) => x.to_string(),
            Bound::PosInf => "inf".to_string(),
        };
        match self {
            Statement::UnknownCa { low, high } => format!(
                "If: {} < CA_X < {}  Then: Unknown CA (revocation status unknown)",
                cab(low),
                cab(high)
            ),
            Statement::CaRange {
                ca,
                x_low,
                x_high,
                revoked_iff,
            } => format!(
                "If: CA_X = {} and {} <= X < {}  Then: X is revoked if and only if X = {}",
                label(ca),
                xb(x_low),
                xb(x_high),
                revoked_iff.map_or("-inf".to_string(), |s| s.to_string())
            ),
        }
    }
}

/// Builds the exhaustive statement list for CAs sorted by hash, each with
/// its sorted revoked serials.
pub fn crt_build_statements(cas: &[(CaHash, Vec<Serial>)]) -> Result<Vec<Statement>, Error> {
    for w in cas.windows(2) {
        match w[0].0.cmp(&w[1].0) {
            Ordering::Less => {}
            Ordering::Equal => return Err(Error::DuplicateCa),
            Ordering::Greater => return Err(Error::Unsorted("CA hashes must increase")),
        }
    }
    let mut out = Vec::new();
    let mut prev = Bound::NegInf;
    for (ca, serials) in cas {
        for w in serials.windows(2) {
            match w[0].cmp(&w[1]) {
                Ordering::Less => {}
                Ordering::Equal => return Err(Error::DuplicateSerial(w[0])),
                Ordering::Greater => return Err(Error::Unsorted("serials must increase")),
            }
        }
        out.push(Statement::UnknownCa {
            low: prev,
            high: Bound::Finite(*ca),
        });
        let mut x_low = Bound::NegInf;
        let mut revoked_iff = None;
        for &s in serials {
            out.push(Statement::CaRange {
                ca: *ca,
                x_low,
                x_high: Bound::Finite(s),
                revoked_iff,
            });
            x_low = Bound::Finite(s);
            revoked_iff = Some(s);
        }
        out.push(Statement::CaRange {
            ca: *ca,
            x_low,
            x_high: Bound::PosInf,
            revoked_iff,
        });
        prev = Bound::Finite(*ca);
    }
    out.push(Statement::UnknownCa {
        low: prev,
        high: Bound::PosInf,
    });
    Ok(out)
}

/// Which side of the running hash a co-path sibling sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    /// No sibling: the node was an odd trailing node, hashed alone.
    Alone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoPathEntry {
    pub side: Side,
    pub sibling: Option<Digest>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrtProof {
    pub statement: Statement,
    pub leaf_index: u32,
    pub co_path: Vec<CoPathEntry>,
}

impl CrtProof {
    /// Statement, leaf index (4), digest width (1), co-path length (1),
    /// then per level a side octet followed by the sibling digest unless
    /// the node was hashed alone.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = self.statement.to_bytes();
        codec::put_u32(&mut out, self.leaf_index);
        let width = self
            .co_path
            .iter()
            .find_map(|e| e.sibling.map(|d| d.width()))
            .unwrap_or(0);
        codec::put_u8(&mut out, width as u8);
        codec::put_u8(&mut out, self.co_path.len() as u8);
        for e in &self.co_path {
            match (e.side, e.sibling) {
                (Side::Left, Some(d)) => {
                    out.push(0);
                    codec::put_digest(&mut out, &d);
                }
                (Side::Right, Some(d)) => {
                    out.push(1);
                    codec::put_digest(&mut out, &d);
                }
                _ => out.push(2),
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        let statement = Statement::decode(&mut r)?;
        let leaf_index = r.u32()?;
        let width = r.u8()? as usize;
        let n = r.u8()?;
        let mut co_path = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let e = match r.u8()? {
                0 => CoPathEntry {
                    side: Side::Left,
                    sibling: Some(r.digest(width)?),
                },
                1 => CoPathEntry {
                    side: Side::Right,
                    sibling: Some(r.digest(width)?),
                },
                2 => CoPathEntry {
                    side: Side::Alone,
                    sibling: None,
                },
                _ => return Err(Error::Malformed("bad co-path side".into())),
            };
            co_path.push(e);
        }
        r.finish()?;
        Ok(CrtProof {
            statement,
            leaf_index,
            co_path,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrtTree {
    pub statements: Vec<Statement>,
    /// `levels[i][j]` is N_{i,j}; the last level holds only the root.
    pub levels: Vec<Vec<Digest>>,
}

impl CrtTree {
    pub fn root(&self) -> Digest {
        self.levels.last().unwrap()[0]
    }

    pub fn node(&self, level: usize, index: usize) -> Option<Digest> {
        self.levels.get(level).and_then(|l| l.get(index)).copied()
    }

    /// Nodes hashed by a full build.
    pub fn node_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn signed_root(&self, issuer: u32) -> Signature {
        Signature::sign(issuer, self.root().as_bytes())
    }

    /// Index of the unique statement containing the point.
    pub fn find(&self, ca: &CaHash, x: Serial) -> Option<usize> {
        self.statements
            .binary_search_by(|s| s.cmp_point(ca, x))
            .ok()
    }

    /// (level, index) of each co-path node, bottom-up; `None` where the
    /// node was hashed alone.
    pub fn co_path_positions(&self, leaf_index: usize) -> Vec<Option<(usize, usize)>> {
        let mut idx = leaf_index;
        let mut out = Vec::new();
        for (lvl, nodes) in self.levels[..self.levels.len() - 1].iter().enumerate() {
            let sib = idx ^ 1;
            out.push((sib < nodes.len()).then_some((lvl, sib)));
            idx /= 2;
        }
        out
    }
}

pub fn crt_build_tree(statements: Vec<Statement>, width: usize) -> Result<CrtTree, Error> {
    if statements.is_empty() {
        return Err(Error::InvalidParameter("at least one statement required".into()));
    }
    let mut levels = vec![statements.iter().map(|s| s.leaf_hash(width)).collect::<Vec<_>>()];
    while levels.last().unwrap().len() > 1 {
        let prev = levels.last().unwrap();
        let next = prev
            .chunks(2)
            .map(|c| match c {
                [a, b] => merkle_pair(a, b),
                [a] => Ok(merkle_single(a)),
                _ => unreachable!(),
            })
            .collect::<Result<Vec<_>, _>>()?;
        levels.push(next);
    }
    Ok(CrtTree { statements, levels })
}

/// Proof for the statement covering `(ca, x)`.
pub fn crt_lookup(tree: &CrtTree, ca: &CaHash, x: Serial) -> CrtProof {
    let leaf_index = tree
        .find(ca, x)
        .expect("statements partition the whole space");
    let co_path = tree
        .co_path_positions(leaf_index)
        .into_iter()
        .enumerate()
        .map(|(lvl, pos)| match pos {
            Some((l, j)) => CoPathEntry {
                side: if j < (leaf_index >> lvl) { Side::Left } else { Side::Right },
                sibling: Some(tree.levels[l][j]),
            },
            None => CoPathEntry {
                side: Side::Alone,
                sibling: None,
            },
        })
        .collect();
    CrtProof {
        statement: tree.statements[leaf_index],
        leaf_index: leaf_index as u32,
        co_path,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrtVerdict {
    Valid,
    Revoked,
    UnknownCa,
    Invalid,
}

/// Folds the proof to a root, returning each intermediate value
/// (N_{1,*}, N_{2,*}, ...); `None` if sides disagree with the leaf index.
pub fn fold_proof(proof: &CrtProof, width: usize) -> Option<Vec<Digest>> {
    let mut cur = proof.statement.leaf_hash(width);
    let mut idx = proof.leaf_index;
    let mut out = Vec::with_capacity(proof.co_path.len());
    for e in &proof.co_path {
        cur = match (e.side, e.sibling, idx & 1) {
            (Side::Left, Some(s), 1) => merkle_pair(&s, &cur).ok()?,
            (Side::Right, Some(s), 0) => merkle_pair(&cur, &s).ok()?,
            (Side::Alone, None, 0) => merkle_single(&cur),
            _ => return None,
        };
        idx >>= 1;
        out.push(cur);
    }
    (idx == 0).then_some(out)
}

pub fn crt_verify(root: &Digest, proof: &CrtProof, ca: &CaHash, x: Serial) -> CrtVerdict {
    if !proof.statement.contains(ca, x) {
        return CrtVerdict::Invalid;
    }
    let top = match fold_proof(proof, root.width()) {
        Some(v) => v.last().copied().unwrap_or_else(|| proof.statement.leaf_hash(root.width())),
        None => return CrtVerdict::Invalid,
    };
    if top != *root {
        return CrtVerdict::Invalid;
    }
    match proof.statement {
        Statement::UnknownCa { .. } => CrtVerdict::UnknownCa,
        Statement::CaRange { revoked_iff, .. } if revoked_iff == Some(x) => CrtVerdict::Revoked,
        Statement::CaRange { .. } => CrtVerdict::Valid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example() -> (Vec<CaHash>, CrtTree) {
        let cas: Vec<CaHash> = (1..=3).map(|i| CaHash::from_u64(i * 1000)).collect();
        let st = crt_build_statements(&[
            (cas[0], vec![156, 343, 344]),
            (cas[1], vec![]),
            (cas[2], vec![987]),
        ])
        .unwrap();
        (cas.clone(), crt_build_tree(st, 32).unwrap())
    }

    #[test]
    fn eleven_statements_and_level_shape() {
        let (_, tree) = example();
        assert_eq!(tree.statements.len(), 11);
        let sizes: Vec<usize> = tree.levels.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![11, 6, 3, 2, 1]);
        assert_eq!(tree.node_count(), 23);
        let n = |i, j| tree.node(i, j).unwrap();
        assert_eq!(n(2, 2), merkle_pair(&n(1, 4), &n(1, 5)).unwrap());
        assert_eq!(n(3, 1), merkle_single(&n(2, 2)));
        assert_eq!(n(1, 5), merkle_single(&n(0, 10)));
    }

    #[test]
    fn lookup_600_under_ca1() {
        let (cas, tree) = example();
        let p = crt_lookup(&tree, &cas[0], 600);
        assert_eq!(
            p.statement,
            Statement::CaRange {
                ca: cas[0],
                x_low: Bound::Finite(344),
                x_high: Bound::PosInf,
                revoked_iff: Some(344)
            }
        );
        assert_eq!(p.leaf_index, 4);
        assert_eq!(
            tree.co_path_positions(4),
            vec![Some((0, 5)), Some((1, 3)), Some((2, 0)), Some((3, 1))]
        );
        assert_eq!(crt_verify(&tree.root(), &p, &cas[0], 600), CrtVerdict::Valid);
        // same proof, query outside its range
        assert_eq!(crt_verify(&tree.root(), &p, &cas[0], 343), CrtVerdict::Invalid);
    }

    #[test]
    fn unknown_ca_and_revoked_verdicts() {
        let (cas, tree) = example();
        let between = CaHash::from_u64(1500);
        let p = crt_lookup(&tree, &between, 12);
        assert!(p.statement.is_unknown_ca());
        assert_eq!(crt_verify(&tree.root(), &p, &between, 12), CrtVerdict::UnknownCa);
        let p = crt_lookup(&tree, &cas[0], 156);
        assert_eq!(crt_verify(&tree.root(), &p, &cas[0], 156), CrtVerdict::Revoked);
        let p = crt_lookup(&tree, &cas[2], 987);
        assert_eq!(crt_verify(&tree.root(), &p, &cas[2], 987), CrtVerdict::Revoked);
    }

    #[test]
    fn zero_cas_single_statement() {
        let st = crt_build_statements(&[]).unwrap();
        assert_eq!(
            st,
            vec![Statement::UnknownCa {
                low: Bound::NegInf,
                high: Bound::PosInf
            }]
        );
        let tree = crt_build_tree(st.clone(), 32).unwrap();
        assert_eq!(tree.root(), st[0].leaf_hash(32));
        let ca = CaHash::from_u64(3);
        let p = crt_lookup(&tree, &ca, 5);
        assert!(p.co_path.is_empty());
        assert_eq!(crt_verify(&tree.root(), &p, &ca, 5), CrtVerdict::UnknownCa);
    }

    #[test]
    fn four_leaves_hand_composed() {
        let ca = CaHash::from_u64(1);
        let st = crt_build_statements(&[(ca, vec![10, 20])]).unwrap();
        let st: Vec<Statement> = st.into_iter().take(4).collect();
        let leaves: Vec<Digest> = st.iter().map(|s| s.leaf_hash(32)).collect();
        let tree = crt_build_tree(st, 32).unwrap();
        let hand = merkle_pair(
            &merkle_pair(&leaves[0], &leaves[1]).unwrap(),
            &merkle_pair(&leaves[2], &leaves[3]).unwrap(),
        )
        .unwrap();
        assert_eq!(tree.root(), hand);
    }

    #[test]
    fn input_validation() {
        let a = CaHash::from_u64(1);
        let b = CaHash::from_u64(2);
        assert_eq!(crt_build_statements(&[(a, vec![]), (a, vec![])]), Err(Error::DuplicateCa));
        assert!(matches!(crt_build_statements(&[(b, vec![]), (a, vec![])]), Err(Error::Unsorted(_))));
        assert_eq!(crt_build_statements(&[(a, vec![3, 3])]), Err(Error::DuplicateSerial(3)));
        assert!(crt_build_tree(vec![], 32).is_err());
    }

    #[test]
    fn proof_encoding_round_trip_and_bit_flips() {
        let (cas, tree) = example();
        let p = crt_lookup(&tree, &cas[0], 600);
        let bytes = p.encode();
        assert_eq!(CrtProof::decode(&bytes).unwrap(), p);
        for bit in 0..bytes.len() * 8 {
            let mut b = bytes.clone();
            b[bit / 8] ^= 1 << (bit % 8);
            let verdict = CrtProof::decode(&b)
                .map(|q| crt_verify(&tree.root(), &q, &cas[0], 600))
                .unwrap_or(CrtVerdict::Invalid);
            assert_eq!(verdict, CrtVerdict::Invalid, "bit {bit}");
        }
    }

    #[test]
    fn tampered_statement_is_invalid() {
        let (cas, tree) = example();
        let mut p = crt_lookup(&tree, &cas[0], 600);
        p.statement = Statement::CaRange {
            ca: cas[0],
            x_low: Bound::Finite(344),
            x_high: Bound::PosInf,
            revoked_iff: None,
        };
        assert_eq!(crt_verify(&tree.root(), &p, &cas[0], 600), CrtVerdict::Invalid);
    }

    proptest! {
        #[test]
        fn every_point_matches_one_statement(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n_ca = rng.gen_range(0..5usize);
            let mut hashes: Vec<u64> = rand::seq::index::sample(&mut rng, 64, n_ca).into_iter().map(|v| v as u64).collect();
            hashes.sort();
            let cas: Vec<(CaHash, Vec<Serial>)> = hashes.iter().map(|&h| {
                let k = rng.gen_range(0..6usize);
                let mut s: Vec<u64> = rand::seq::index::sample(&mut rng, 256, k).into_iter().map(|v| v as u64).collect();
                s.sort();
                (CaHash::from_u64(h), s)
            }).collect();
            let st = crt_build_statements(&cas).unwrap();
            let per_ca: usize = cas.iter().map(|(_, s)| s.len() + 1).sum();
            prop_assert_eq!(st.len(), per_ca + cas.len() + 1);
            let tree = crt_build_tree(st, 13).unwrap();
            for h in 0..64u64 {
                let ca = CaHash::from_u64(h);
                for x in (0..256u64).step_by(7) {
                    prop_assert_eq!(tree.statements.iter().filter(|s| s.contains(&ca, x)).count(), 1);
                    let p = crt_lookup(&tree, &ca, x);
                    prop_assert_ne!(crt_verify(&tree.root(), &p, &ca, x), CrtVerdict::Invalid);
                }
            }
        }
    }
}
