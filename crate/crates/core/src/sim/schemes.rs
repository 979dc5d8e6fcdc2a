//! Common interface over every revocation scheme, as driven by the
//! simulator and the CLI.
//!
//! Each scheme instance serves one CA. `publish` is called once per tick
//! and reports the CA→Directory payloads it produced; `answer` is the
//! Directory (or responder) side of a status query; `verify` is the
//! verifier's check of what it received.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::Rng;

use crate::authdict::{tt_verify, Bulletin, TtProof, TtVerdict, TwoThreeTree};
use crate::codec::{self, Reader};
use crate::crl::{
    issue_segment, reconstruct, Crl, DeltaCrl, IssuanceSchedule, OverIssuer, SegmentedCrlSet,
};
use crate::crs::{crs_verify, CrsAnswer, CrsAuthority, CrsDirectory, CrsVerdict};
use crate::crt::{crt_build_statements, crt_build_tree, crt_lookup, crt_verify, CaHash, CrtProof, CrtTree, CrtVerdict, STATEMENT_LEN};
use crate::error::Error;
use crate::hcrs::{hcrs_check, hcrs_daily_update, HcrsAnswer, HcrsDirectory, HcrsTree, HcrsVerdict, NodeVec};
use crate::model::{day_of, day_start, CaId, Day, CertRecord, RevocationState, Serial, Status, Tick, TICKS_PER_DAY};
use crate::ocsp::{NetworkConfig, ResponderNetwork, StatusRequest, StatusResponse};
use crate::primitives::ChainParams;

use super::scenario::{Scenario, SchemeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Good,
    Revoked,
    Unknown,
    Invalid,
}

impl Verdict {
    pub fn expected(status: Status) -> Verdict {
        match status {
            Status::Good => Verdict::Good,
            Status::Revoked => Verdict::Revoked,
            Status::Unknown => Verdict::Unknown,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Verdict::Good => "good",
            Verdict::Revoked => "revoked",
            Verdict::Unknown => "unknown",
            Verdict::Invalid => "invalid",
        }
    }
}

/// Scheme-specific evidence about one certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidityProof {
    Crl(Crl),
    Delta(DeltaCrl),
    Segment { index: u16, count: u16, crl: Crl },
    Crs(CrsAnswer),
    Hcrs(HcrsAnswer),
    Crt { bulletin: Bulletin, proof: CrtProof },
    Authdict { bulletin: Bulletin, proof: TtProof },
    Ocsp(StatusResponse),
}

impl ValidityProof {
    fn tag(&self) -> u8 {
        match self {
            ValidityProof::Crl(_) => 1,
            ValidityProof::Delta(_) => 2,
            ValidityProof::Segment { .. } => 3,
            ValidityProof::Crs(_) => 4,
            ValidityProof::Hcrs(_) => 5,
            ValidityProof::Crt { .. } => 6,
            ValidityProof::Authdict { .. } => 7,
            ValidityProof::Ocsp(_) => 8,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ValidityProof::Crl(_) => "crl",
            ValidityProof::Delta(_) => "delta-crl",
            ValidityProof::Segment { .. } => "crl-segment",
            ValidityProof::Crs(_) => "crs-answer",
            ValidityProof::Hcrs(_) => "hcrs-answer",
            ValidityProof::Crt { .. } => "crt-proof",
            ValidityProof::Authdict { .. } => "authdict-proof",
            ValidityProof::Ocsp(_) => "ocsp-response",
        }
    }

    /// Tag octet followed by the scheme's own encoding.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = vec![self.tag()];
        match self {
            ValidityProof::Crl(c) => out.extend(c.encode()),
            ValidityProof::Delta(d) => out.extend(d.encode()),
            ValidityProof::Segment { index, count, crl } => {
                codec::put_u16(&mut out, *index);
                codec::put_u16(&mut out, *count);
                out.extend(crl.encode());
            }
            ValidityProof::Crs(a) => out.extend(a.encode()),
            ValidityProof::Hcrs(a) => out.extend(a.encode()),
            ValidityProof::Crt { bulletin, proof } => {
                bulletin.encode(&mut out);
                out.extend(proof.encode());
            }
            ValidityProof::Authdict { bulletin, proof } => {
                bulletin.encode(&mut out);
                out.extend(proof.encode(bulletin.root.width()));
            }
            ValidityProof::Ocsp(r) => out.extend(r.encode()),
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, Error> {
        let (&tag, rest) = bytes
            .split_first()
            .ok_or_else(|| Error::Malformed("empty proof".into()))?;
        Ok(match tag {
            1 => ValidityProof::Crl(Crl::decode(rest)?),
            2 => ValidityProof::Delta(DeltaCrl::decode(rest)?),
            3 => {
                let mut r = Reader::new(rest);
                let index = r.u16()?;
                let count = r.u16()?;
                ValidityProof::Segment {
                    index,
                    count,
                    crl: Crl::decode(&rest[4..])?,
                }
            }
            4 => ValidityProof::Crs(CrsAnswer::decode(rest)?),
            5 => ValidityProof::Hcrs(HcrsAnswer::decode(rest)?),
            6 | 7 => {
                let mut r = Reader::new(rest);
                let bulletin = Bulletin::decode(&mut r)?;
                let tail = &rest[bulletin.encoded_len()..];
                if tag == 6 {
                    ValidityProof::Crt {
                        bulletin,
                        proof: CrtProof::decode(tail)?,
                    }
                } else {
                    let (proof, width) = TtProof::decode(tail)?;
                    if width != bulletin.root.width() {
                        return Err(Error::WidthMismatch {
                            expected: bulletin.root.width(),
                            found: width,
                        });
                    }
                    ValidityProof::Authdict { bulletin, proof }
                }
            }
            8 => ValidityProof::Ocsp(StatusResponse::decode(rest)?),
            _ => return Err(Error::Malformed(format!("unknown proof tag {tag}"))),
        })
    }
}

/// Count octet, then each proof as a length-prefixed byte string.
pub fn encode_parts(parts: &[&ValidityProof]) -> Vec<u8> {
    let mut out = vec![parts.len() as u8];
    for p in parts {
        codec::put_bytes(&mut out, &p.encode());
    }
    out
}

pub fn decode_parts(bytes: &[u8]) -> Result<Vec<ValidityProof>, Error> {
    let mut r = Reader::new(bytes);
    let n = r.u8()?;
    let parts = (0..n)
        .map(|_| ValidityProof::decode(r.bytes()?))
        .collect::<Result<Vec<_>, _>>()?;
    r.finish()?;
    Ok(parts)
}

/// One independently cacheable piece of an answer.
#[derive(Debug, Clone)]
pub struct Part {
    pub key: u64,
    /// Last tick (exclusive) at which a verifier may reuse this part.
    pub expires: Tick,
    pub proof: Arc<ValidityProof>,
    pub wire_len: usize,
}

impl Part {
    fn new(key: u64, expires: Tick, proof: Arc<ValidityProof>) -> Self {
        let wire_len = proof.encode().len();
        Part {
            key,
            expires,
            proof,
            wire_len,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Answer {
    pub parts: Vec<Part>,
    /// Tick whose authoritative state the answer describes.
    pub produced_at: Tick,
    /// The whole answer may be reused until this tick (exclusive).
    pub expires: Tick,
    /// Bytes of each message exchanged between responders.
    pub responder_hops: Vec<usize>,
}

/// Work counters for comparing schemes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Telemetry {
    /// Digests or tree nodes recomputed to maintain the structure.
    pub update_work: u64,
    /// Individual values pushed CA→Directory (chain values, node values).
    pub pushed_values: u64,
    pub publications: u64,
}

pub trait RevocationScheme: Send {
    fn kind(&self) -> SchemeKind;

    /// Sizes of the CA→Directory payloads issued at `tick`.
    fn publish(&mut self, state: &RevocationState, tick: Tick) -> Result<Vec<usize>, Error>;

    /// Key under which a verifier may cache the answer about `serial`.
    fn cache_key(&self, serial: Serial) -> u64;

    fn answer(&mut self, serial: Serial, tick: Tick) -> Result<Answer, Error>;

    fn verify(&mut self, serial: Serial, parts: &[&ValidityProof], tick: Tick) -> Verdict;

    /// Octets the scheme adds to each certificate.
    fn certificate_extension_bytes(&self) -> usize {
        0
    }

    fn telemetry(&self) -> Telemetry;
}

fn not_ready() -> Error {
    Error::Scenario("status queried before the first publication".into())
}

const KEY_FULL: u64 = 1 << 40;
const KEY_BASE: u64 = 2 << 40;
const KEY_DELTA: u64 = 3 << 40;
const KEY_SEGMENT: u64 = 4 << 40;

/// Full CRLs, over-issued or not, optionally with deltas.
pub struct CrlScheme {
    ca: CaId,
    with_delta: bool,
    issuer: OverIssuer,
    latest: Option<Part>,
    latest_delta: Option<(Part, Part)>,
    telemetry: Telemetry,
}

impl CrlScheme {
    pub fn new(ca: CaId, schedule: IssuanceSchedule, with_delta: bool) -> Self {
        CrlScheme {
            ca,
            with_delta,
            issuer: OverIssuer::new(ca, schedule),
            latest: None,
            latest_delta: None,
            telemetry: Telemetry::default(),
        }
    }
}

impl RevocationScheme for CrlScheme {
    fn kind(&self) -> SchemeKind {
        if self.with_delta {
            SchemeKind::DeltaCrl
        } else {
            SchemeKind::Crl
        }
    }

    fn publish(&mut self, state: &RevocationState, tick: Tick) -> Result<Vec<usize>, Error> {
        let mut sizes = Vec::new();
        for iss in self.issuer.advance(state, tick, self.with_delta) {
            sizes.push(iss.full.encoded_len());
            self.telemetry.publications += 1;
            self.telemetry.pushed_values += iss.full.entries.len() as u64;
            if let Some(d) = iss.delta {
                sizes.push(d.encoded_len());
                let base = self.issuer.find(d.base_ref)?.clone();
                let keep = d.next_update;
                let base_part = Part::new(KEY_BASE | base.this_update as u64, base.next_update.max(keep), Arc::new(ValidityProof::Crl(base)));
                let delta_part = Part::new(KEY_DELTA | d.this_update as u64, keep, Arc::new(ValidityProof::Delta(d)));
                self.latest_delta = Some((base_part, delta_part));
            }
            let next = iss.full.next_update;
            self.latest = Some(Part::new(KEY_FULL | iss.full.this_update as u64, next, Arc::new(ValidityProof::Crl(iss.full))));
        }
        Ok(sizes)
    }

    fn cache_key(&self, _serial: Serial) -> u64 {
        0
    }

    fn answer(&mut self, _serial: Serial, _tick: Tick) -> Result<Answer, Error> {
        if self.with_delta {
            let (base, delta) = self.latest_delta.clone().ok_or_else(not_ready)?;
            let ValidityProof::Delta(d) = delta.proof.as_ref() else { unreachable!() };
            return Ok(Answer {
                produced_at: d.this_update,
                expires: d.next_update,
                parts: vec![base, delta],
                responder_hops: Vec::new(),
            });
        }
        let part = self.latest.clone().ok_or_else(not_ready)?;
        let ValidityProof::Crl(c) = part.proof.as_ref() else { unreachable!() };
        Ok(Answer {
            produced_at: c.this_update,
            expires: c.next_update,
            parts: vec![part],
            responder_hops: Vec::new(),
        })
    }

    fn verify(&mut self, serial: Serial, parts: &[&ValidityProof], tick: Tick) -> Verdict {
        match parts {
            [ValidityProof::Crl(c)] if !self.with_delta => {
                if c.issuer != self.ca || !c.is_current_at(tick) {
                    Verdict::Invalid
                } else if c.contains(serial) {
                    Verdict::Revoked
                } else {
                    Verdict::Good
                }
            }
            [ValidityProof::Crl(base), ValidityProof::Delta(d)] if self.with_delta => {
                if d.issuer != self.ca || d.this_update > tick || tick >= d.next_update {
                    return Verdict::Invalid;
                }
                match reconstruct(base, d) {
                    Ok(entries) if entries.binary_search_by_key(&serial, |e| e.serial).is_ok() => Verdict::Revoked,
                    Ok(_) => Verdict::Good,
                    Err(_) => Verdict::Invalid,
                }
            }
            _ => Verdict::Invalid,
        }
    }

    fn telemetry(&self) -> Telemetry {
        self.telemetry
    }
}

/// Segmented CRL with staggered issuance groups.
pub struct SegmentedScheme {
    ca: CaId,
    schedule: IssuanceSchedule,
    count: usize,
    current: Vec<Option<Part>>,
    telemetry: Telemetry,
}

impl SegmentedScheme {
    pub fn new(ca: CaId, period: Tick, segments: usize, stagger_intervals: u32) -> Result<Self, Error> {
        Ok(SegmentedScheme {
            ca,
            schedule: IssuanceSchedule::evenly_staggered(period, stagger_intervals)?,
            count: segments,
            current: vec![None; segments],
            telemetry: Telemetry::default(),
        })
    }

    fn segment_part(&self, index: usize, crl: Crl) -> Part {
        Part::new(
            KEY_SEGMENT | (index as u64) << 32 | crl.this_update as u64,
            crl.next_update,
            Arc::new(ValidityProof::Segment {
                index: index as u16,
                count: self.count as u16,
                crl,
            }),
        )
    }
}

impl RevocationScheme for SegmentedScheme {
    fn kind(&self) -> SchemeKind {
        SchemeKind::SegmentedCrl
    }

    fn publish(&mut self, state: &RevocationState, tick: Tick) -> Result<Vec<usize>, Error> {
        let mut sizes = Vec::new();
        for i in 0..self.count {
            let due = self.schedule.segment_issue_at_or_before(i, self.count, tick) == Some(tick);
            let crl = if due {
                issue_segment(state, self.ca, tick, &self.schedule, i, self.count)
            } else if tick == 0 && self.current[i].is_none() {
                // bootstrap list for groups whose first slot lies ahead
                let first = self.schedule.group_offset(self.schedule.group_of_segment(i, self.count));
                let full = issue_segment(state, self.ca, 0, &self.schedule, i, self.count);
                Crl::new(self.ca, 0, first, full.entries)?
            } else {
                continue;
            };
            sizes.push(crl.encoded_len());
            self.telemetry.publications += 1;
            self.telemetry.pushed_values += crl.entries.len() as u64;
            self.current[i] = Some(self.segment_part(i, crl));
        }
        Ok(sizes)
    }

    fn cache_key(&self, serial: Serial) -> u64 {
        SegmentedCrlSet::segment_of(self.count, serial) as u64
    }

    fn answer(&mut self, serial: Serial, _tick: Tick) -> Result<Answer, Error> {
        let i = SegmentedCrlSet::segment_of(self.count, serial);
        let part = self.current[i].clone().ok_or_else(not_ready)?;
        let ValidityProof::Segment { crl, .. } = part.proof.as_ref() else { unreachable!() };
        Ok(Answer {
            produced_at: crl.this_update,
            expires: crl.next_update,
            parts: vec![part],
            responder_hops: Vec::new(),
        })
    }

    fn verify(&mut self, serial: Serial, parts: &[&ValidityProof], tick: Tick) -> Verdict {
        let [ValidityProof::Segment { index, count, crl }] = parts else {
            return Verdict::Invalid;
        };
        let want = SegmentedCrlSet::segment_of(self.count, serial);
        if *count as usize != self.count
            || *index as usize != want
            || crl.issuer != self.ca
            || !crl.is_current_at(tick)
            || crl.entries.iter().any(|e| SegmentedCrlSet::segment_of(self.count, e.serial) != want)
        {
            return Verdict::Invalid;
        }
        if crl.contains(serial) {
            Verdict::Revoked
        } else {
            Verdict::Good
        }
    }

    fn telemetry(&self) -> Telemetry {
        self.telemetry
    }
}

pub struct CrsScheme {
    authority: CrsAuthority,
    directory: CrsDirectory,
    issue_day: BTreeMap<Serial, Day>,
    published_once: bool,
    telemetry: Telemetry,
}

impl CrsScheme {
    pub fn new<R: Rng + ?Sized>(ca: CaId, state: &RevocationState, width_bits: u32, serial_bits: u8, rng: &mut R) -> Result<Self, Error> {
        let mut authority = CrsAuthority::new(ca, width_bits, serial_bits);
        let mut issue_day = BTreeMap::new();
        for c in state.certs() {
            authority.issue(*c, rng)?;
            issue_day.insert(c.serial, c.issue_day);
        }
        Ok(CrsScheme {
            authority,
            directory: CrsDirectory::new(),
            issue_day,
            published_once: false,
            telemetry: Telemetry::default(),
        })
    }

    pub fn authority(&self) -> &CrsAuthority {
        &self.authority
    }
}

impl RevocationScheme for CrsScheme {
    fn kind(&self) -> SchemeKind {
        SchemeKind::Crs
    }

    fn publish(&mut self, state: &RevocationState, tick: Tick) -> Result<Vec<usize>, Error> {
        if !tick.is_multiple_of(TICKS_PER_DAY) || tick == 0 {
            return Ok(Vec::new());
        }
        let upd = self.authority.daily_update(state, day_of(tick), !self.published_once)?;
        self.directory.ingest(&upd)?;
        self.published_once = true;
        self.telemetry.publications += 1;
        self.telemetry.pushed_values += upd.values.len() as u64;
        Ok(vec![upd.encode().len()])
    }

    fn cache_key(&self, serial: Serial) -> u64 {
        serial
    }

    fn answer(&mut self, serial: Serial, _tick: Tick) -> Result<Answer, Error> {
        let day = self.directory.day().ok_or_else(not_ready)?;
        let proof = Arc::new(ValidityProof::Crs(self.directory.answer(serial)));
        Ok(Answer {
            parts: vec![Part::new(serial, day_start(day + 1), proof)],
            produced_at: day_start(day),
            expires: day_start(day + 1),
            responder_hops: Vec::new(),
        })
    }

    fn verify(&mut self, serial: Serial, parts: &[&ValidityProof], tick: Tick) -> Verdict {
        let [ValidityProof::Crs(ans)] = parts else {
            return Verdict::Invalid;
        };
        let (Some(ext), Some(&issued)) = (self.authority.extension(serial), self.issue_day.get(&serial)) else {
            return Verdict::Invalid;
        };
        match ans {
            CrsAnswer::Value(v) => match crs_verify(ext, v, day_of(tick).saturating_sub(issued)) {
                CrsVerdict::Valid => Verdict::Good,
                CrsVerdict::Revoked => Verdict::Revoked,
                CrsVerdict::Invalid => Verdict::Invalid,
            },
            CrsAnswer::NotFound { .. } => Verdict::Unknown,
        }
    }

    fn certificate_extension_bytes(&self) -> usize {
        self.authority.extension(0).map_or(0, |e| e.encoded_len())
    }

    fn telemetry(&self) -> Telemetry {
        self.telemetry
    }
}

pub struct HcrsScheme {
    tree: HcrsTree,
    directory: HcrsDirectory,
    telemetry: Telemetry,
}

impl HcrsScheme {
    pub fn new<R: Rng + ?Sized>(state: &RevocationState, validity_days: u32, width: usize, rng: &mut R) -> Result<Self, Error> {
        let population = state.certs().map(|c| c.serial + 1).max().unwrap_or(1);
        let tree = HcrsTree::for_population(population, validity_days, width, rng)?;
        Ok(HcrsScheme {
            directory: HcrsDirectory::new(tree.depth()),
            tree,
            telemetry: Telemetry::default(),
        })
    }
}

impl RevocationScheme for HcrsScheme {
    fn kind(&self) -> SchemeKind {
        SchemeKind::Hcrs
    }

    fn publish(&mut self, state: &RevocationState, tick: Tick) -> Result<Vec<usize>, Error> {
        if !tick.is_multiple_of(TICKS_PER_DAY) || tick == 0 {
            return Ok(Vec::new());
        }
        let day = day_of(tick);
        let depth = self.tree.depth();
        let revoked: BTreeSet<NodeVec> = state.revoked_live(tick).map(|(s, _)| NodeVec::leaf(s, depth)).collect();
        let upd = hcrs_daily_update(&self.tree, &revoked, day)?;
        self.telemetry.publications += 1;
        self.telemetry.pushed_values += upd.values.len() as u64;
        let len = upd.encode().len();
        self.directory.ingest(upd);
        Ok(vec![len])
    }

    fn cache_key(&self, serial: Serial) -> u64 {
        serial
    }

    fn answer(&mut self, serial: Serial, _tick: Tick) -> Result<Answer, Error> {
        let day = self.directory.day().ok_or_else(not_ready)?;
        let leaf = NodeVec::leaf(serial, self.tree.depth());
        let proof = Arc::new(ValidityProof::Hcrs(self.directory.answer(&leaf)));
        Ok(Answer {
            parts: vec![Part::new(serial, day_start(day + 1), proof)],
            produced_at: day_start(day),
            expires: day_start(day + 1),
            responder_hops: Vec::new(),
        })
    }

    fn verify(&mut self, serial: Serial, parts: &[&ValidityProof], tick: Tick) -> Verdict {
        let [ValidityProof::Hcrs(ans)] = parts else {
            return Verdict::Invalid;
        };
        match ans {
            // no clean ancestor is vouched for: the leaf is revoked
            HcrsAnswer::Refused => Verdict::Revoked,
            HcrsAnswer::Vouch { node, value } => {
                let leaf = NodeVec::leaf(serial, self.tree.depth());
                if !self.tree.contains(node) {
                    return Verdict::Invalid;
                }
                // the certificate carries this anchor among its path anchors
                let anchor = self.tree.anchor(node);
                match hcrs_check(&leaf, node, &anchor, value, day_of(tick)) {
                    HcrsVerdict::Valid => Verdict::Good,
                    HcrsVerdict::Invalid => Verdict::Invalid,
                }
            }
        }
    }

    fn certificate_extension_bytes(&self) -> usize {
        (self.tree.depth() as usize + 1) * self.directory_width()
    }

    fn telemetry(&self) -> Telemetry {
        self.telemetry
    }
}

impl HcrsScheme {
    fn directory_width(&self) -> usize {
        self.tree.value(&NodeVec::ROOT, 1).map_or(0, |d| d.width())
    }
}

pub struct CrtScheme {
    ca: CaId,
    ca_hash: CaHash,
    width: usize,
    current: Option<(CrtTree, Bulletin)>,
    telemetry: Telemetry,
}

impl CrtScheme {
    pub fn new(ca: CaId, width: usize) -> Self {
        CrtScheme {
            ca,
            ca_hash: CaHash::of_public_key(&ca.to_be_bytes()),
            width,
            current: None,
            telemetry: Telemetry::default(),
        }
    }
}

impl RevocationScheme for CrtScheme {
    fn kind(&self) -> SchemeKind {
        SchemeKind::Crt
    }

    fn publish(&mut self, state: &RevocationState, tick: Tick) -> Result<Vec<usize>, Error> {
        if !tick.is_multiple_of(TICKS_PER_DAY) || tick == 0 {
            return Ok(Vec::new());
        }
        let revoked: Vec<Serial> = state.revoked_live(tick).map(|(s, _)| s).collect();
        let statements = crt_build_statements(&[(self.ca_hash, revoked)])?;
        let n = statements.len();
        let tree = crt_build_tree(statements, self.width)?;
        self.telemetry.update_work += tree.node_count() as u64;
        self.telemetry.publications += 1;
        let bulletin = Bulletin::new(self.ca, day_of(tick), tree.root());
        let size = n * STATEMENT_LEN + bulletin.encoded_len();
        self.current = Some((tree, bulletin));
        Ok(vec![size])
    }

    fn cache_key(&self, serial: Serial) -> u64 {
        serial
    }

    fn answer(&mut self, serial: Serial, _tick: Tick) -> Result<Answer, Error> {
        let (tree, bulletin) = self.current.as_ref().ok_or_else(not_ready)?;
        let proof = crt_lookup(tree, &self.ca_hash, serial);
        let day = bulletin.day;
        let p = Arc::new(ValidityProof::Crt {
            bulletin: bulletin.clone(),
            proof,
        });
        Ok(Answer {
            parts: vec![Part::new(serial, day_start(day + 1), p)],
            produced_at: day_start(day),
            expires: day_start(day + 1),
            responder_hops: Vec::new(),
        })
    }

    fn verify(&mut self, serial: Serial, parts: &[&ValidityProof], tick: Tick) -> Verdict {
        let [ValidityProof::Crt { bulletin, proof }] = parts else {
            return Verdict::Invalid;
        };
        if !bulletin.verify(self.ca) || bulletin.day != day_of(tick) {
            return Verdict::Invalid;
        }
        match crt_verify(&bulletin.root, proof, &self.ca_hash, serial) {
            CrtVerdict::Valid => Verdict::Good,
            CrtVerdict::Revoked => Verdict::Revoked,
            CrtVerdict::UnknownCa => Verdict::Unknown,
            CrtVerdict::Invalid => Verdict::Invalid,
        }
    }

    fn telemetry(&self) -> Telemetry {
        self.telemetry
    }
}

pub struct AuthdictScheme {
    ca: CaId,
    tree: TwoThreeTree,
    bulletin: Option<Bulletin>,
    telemetry: Telemetry,
}

impl AuthdictScheme {
    pub fn new(ca: CaId, width: usize) -> Self {
        AuthdictScheme {
            ca,
            tree: TwoThreeTree::new(width),
            bulletin: None,
            telemetry: Telemetry::default(),
        }
    }
}

impl RevocationScheme for AuthdictScheme {
    fn kind(&self) -> SchemeKind {
        SchemeKind::Authdict
    }

    fn publish(&mut self, state: &RevocationState, tick: Tick) -> Result<Vec<usize>, Error> {
        if !tick.is_multiple_of(TICKS_PER_DAY) || tick == 0 {
            return Ok(Vec::new());
        }
        let target: Vec<(Serial, Tick)> = state.revoked_live(tick).map(|(s, r)| (s, r.at)).collect();
        let wanted: BTreeSet<Serial> = target.iter().map(|(s, _)| *s).collect();
        let gone: Vec<Serial> = self
            .tree
            .entries()
            .into_iter()
            .map(|(s, _)| s)
            .filter(|s| !wanted.contains(s))
            .collect();
        let mut bytes = 0;
        for s in gone {
            self.telemetry.update_work += self.tree.delete(s)?.count() as u64;
            bytes += 8;
        }
        for (s, at) in target {
            if !self.tree.contains(s) {
                self.telemetry.update_work += self.tree.insert(s, at)?.count() as u64;
                bytes += 12;
            }
        }
        let b = self.tree.bulletin(self.ca, day_of(tick));
        bytes += b.encoded_len();
        self.bulletin = Some(b);
        self.telemetry.publications += 1;
        Ok(vec![bytes])
    }

    fn cache_key(&self, serial: Serial) -> u64 {
        serial
    }

    fn answer(&mut self, serial: Serial, _tick: Tick) -> Result<Answer, Error> {
        let bulletin = self.bulletin.clone().ok_or_else(not_ready)?;
        let day = bulletin.day;
        let p = Arc::new(ValidityProof::Authdict {
            proof: self.tree.prove(serial),
            bulletin,
        });
        Ok(Answer {
            parts: vec![Part::new(serial, day_start(day + 1), p)],
            produced_at: day_start(day),
            expires: day_start(day + 1),
            responder_hops: Vec::new(),
        })
    }

    fn verify(&mut self, serial: Serial, parts: &[&ValidityProof], tick: Tick) -> Verdict {
        let [ValidityProof::Authdict { bulletin, proof }] = parts else {
            return Verdict::Invalid;
        };
        if !bulletin.verify(self.ca) || bulletin.day != day_of(tick) {
            return Verdict::Invalid;
        }
        match tt_verify(&bulletin.root, proof, serial) {
            TtVerdict::Revoked => Verdict::Revoked,
            TtVerdict::Valid => Verdict::Good,
            TtVerdict::Invalid => Verdict::Invalid,
        }
    }

    fn telemetry(&self) -> Telemetry {
        self.telemetry
    }
}

pub struct OcspScheme {
    ca: CaId,
    network: ResponderNetwork,
    max_age: Tick,
    client_responder: u32,
    telemetry: Telemetry,
}

impl OcspScheme {
    /// Chain of `length` responders ending in the co-located one. The
    /// state is the whole trajectory; queries read it at their own tick.
    pub fn new(ca: CaId, state: RevocationState, length: u32, max_age: Tick, cache_ttl: Tick) -> Result<Self, Error> {
        let ids: Vec<u32> = (1..=length).collect();
        let cfg = NetworkConfig {
            cache_ttl: Some(cache_ttl),
            ..Default::default()
        };
        Ok(OcspScheme {
            ca,
            network: ResponderNetwork::chain(cfg, ca, state, &ids)?,
            max_age,
            client_responder: 1,
            telemetry: Telemetry::default(),
        })
    }
}

impl RevocationScheme for OcspScheme {
    fn kind(&self) -> SchemeKind {
        SchemeKind::Ocsp
    }

    fn publish(&mut self, _state: &RevocationState, tick: Tick) -> Result<Vec<usize>, Error> {
        if tick.is_multiple_of(TICKS_PER_DAY) {
            self.network.invalidate_on_update(tick);
        }
        Ok(Vec::new())
    }

    fn cache_key(&self, serial: Serial) -> u64 {
        serial
    }

    fn answer(&mut self, serial: Serial, tick: Tick) -> Result<Answer, Error> {
        let req = StatusRequest {
            issuer: self.ca,
            serial,
            max_age: self.max_age,
        };
        let (resp, traffic) = self.network.handle(self.client_responder, &req, tick);
        self.telemetry.update_work += traffic.authoritative_lookups as u64;
        Ok(Answer {
            parts: vec![Part::new(serial, resp.produced_at + self.max_age + 1, Arc::new(ValidityProof::Ocsp(resp)))],
            produced_at: resp.produced_at,
            expires: resp.produced_at + self.max_age + 1,
            responder_hops: traffic.hops.iter().map(|h| h.bytes).collect(),
        })
    }

    fn verify(&mut self, serial: Serial, parts: &[&ValidityProof], tick: Tick) -> Verdict {
        let [ValidityProof::Ocsp(r)] = parts else {
            return Verdict::Invalid;
        };
        if !r.verify_signature() || r.serial != serial || r.issuer != self.ca || r.age_at(tick) > self.max_age || r.produced_at > tick {
            return Verdict::Invalid;
        }
        Verdict::expected(r.verdict)
    }

    fn telemetry(&self) -> Telemetry {
        self.telemetry
    }
}

/// Builds the scheme instance serving CA `ca` with trajectory `state`.
pub fn build_scheme<R: Rng + ?Sized>(sc: &Scenario, ca: CaId, state: &RevocationState, rng: &mut R) -> Result<Box<dyn RevocationScheme>, Error> {
    let period = sc.crl_period_hours;
    let width_bits = match sc.hash_mode {
        crate::primitives::HashMode::Compact => 100,
        crate::primitives::HashMode::Modern => 256,
    };
    let width = sc.hash_mode.width();
    Ok(match sc.scheme {
        SchemeKind::Crl | SchemeKind::DeltaCrl => {
            let schedule = IssuanceSchedule::new(period, sc.over_issue_factor, Vec::new())?;
            Box::new(CrlScheme::new(ca, schedule, sc.scheme == SchemeKind::DeltaCrl))
        }
        SchemeKind::SegmentedCrl => Box::new(SegmentedScheme::new(ca, period, sc.segments as usize, sc.stagger_intervals)?),
        SchemeKind::Crs => {
            ChainParams::new(sc.validity_days, width_bits)?;
            Box::new(CrsScheme::new(ca, state, width_bits, sc.serial_bits, rng)?)
        }
        SchemeKind::Hcrs => Box::new(HcrsScheme::new(state, sc.validity_days, width, rng)?),
        SchemeKind::Crt => Box::new(CrtScheme::new(ca, width)),
        SchemeKind::Authdict => Box::new(AuthdictScheme::new(ca, width)),
        SchemeKind::Ocsp => Box::new(OcspScheme::new(
            ca,
            state.clone(),
            sc.ocsp_chain_length,
            sc.ocsp_max_age_hours,
            sc.ocsp_cache_ttl_hours,
        )?),
    })
}

/// Authoritative trajectory for one CA: `population` certificates issued
/// on day 0, an initial revoked fraction at tick 0, then daily revocations
/// at uniformly drawn ticks.
pub fn build_state<R: Rng + ?Sized>(sc: &Scenario, ca: CaId, population: u64, rng: &mut R) -> Result<RevocationState, Error> {
    let mut state = RevocationState::new();
    for serial in 0..population {
        state.add_cert(CertRecord::new(serial, ca, 0, sc.validity_days))?;
    }
    let initial = (sc.revoked_fraction * population as f64).round() as usize;
    for s in rand::seq::index::sample(rng, population as usize, initial.min(population as usize)) {
        state.revoke(s as Serial, 0, rng.gen_range(0..=10))?;
    }
    let daily = sc.daily_revocation_rate * population as f64;
    for day in 0..=sc.horizon_days {
        let n = daily.floor() as u64 + rng.gen_bool(daily.fract()) as u64;
        for _ in 0..n {
            let s = rng.gen_range(0..population);
            let at = day_start(day) + rng.gen_range(0..TICKS_PER_DAY);
            state.revoke(s, at, rng.gen_range(0..=10))?;
        }
    }
    Ok(state)
}
