//! Certificate revocation lists: full (base) CRLs, delta-CRLs, segmented
//! and staggered sets, and over-issuance schedules.
//!
//! Timestamps are ticks (see [`crate::model`]). All lists are canonically
//! encoded so byte counts are reproducible: big-endian integers, fixed
//! field order, count-prefixed sequences, entries sorted by serial.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::codec::{self, Reader};
use crate::error::Error;
use crate::model::{CaId, Hold, ReasonCode, RevocationState, Serial, Tick};
use crate::primitives::Signature;

/// Encoded size of one entry: serial (8) + revocation time (4) + reason (1).
pub const ENTRY_LEN: usize = 13;

const KIND_CRL: u8 = 0x01;
const KIND_DELTA: u8 = 0x02;
const OPEN_END: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CrlEntry {
    pub serial: Serial,
    pub revoked_at: Tick,
    pub reason: ReasonCode,
}

impl CrlEntry {
    fn encode(&self, out: &mut Vec<u8>) {
        codec::put_u64(out, self.serial);
        codec::put_u32(out, self.revoked_at);
        codec::put_u8(out, self.reason);
    }

    fn decode(r: &mut Reader<'_>) -> Result<Self, Error> {
        Ok(CrlEntry {
            serial: r.u64()?,
            revoked_at: r.u32()?,
            reason: r.u8()?,
        })
    }
}

fn check_sorted(entries: &[CrlEntry]) -> Result<(), Error> {
    if entries.windows(2).all(|w| w[0].serial < w[1].serial) {
        Ok(())
    } else {
        Err(Error::Unsorted("CRL entries must be strictly ascending by serial"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crl {
    pub issuer: CaId,
    pub this_update: Tick,
    pub next_update: Tick,
    pub entries: Vec<CrlEntry>,
    pub signature: Signature,
}

impl Crl {
    pub fn new(
        issuer: CaId,
        this_update: Tick,
        next_update: Tick,
        entries: Vec<CrlEntry>,
    ) -> Result<Self, Error> {
        if this_update >= next_update {
            return Err(Error::InvalidParameter(
                "this_update must precede next_update".into(),
            ));
        }
        check_sorted(&entries)?;
        if entries.iter().any(|e| e.revoked_at > this_update) {
            return Err(Error::InvalidParameter(
                "entry revoked after this_update".into(),
            ));
        }
        let mut crl = Crl {
            issuer,
            this_update,
            next_update,
            entries,
            signature: Signature::sign(issuer, &[]),
        };
        crl.signature = Signature::sign(issuer, &crl.body());
        Ok(crl)
    }

    /// Signed portion of the encoding.
    pub fn body(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(17 + self.entries.len() * ENTRY_LEN);
        codec::put_u8(&mut out, KIND_CRL);
        codec::put_u32(&mut out, self.issuer);
        codec::put_u32(&mut out, self.this_update);
        codec::put_u32(&mut out, self.next_update);
        codec::put_u32(&mut out, self.entries.len() as u32);
        for e in &self.entries {
            e.encode(&mut out);
        }
        out
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = self.body();
        self.signature.encode(&mut out);
        out
    }

    pub fn encoded_len(&self) -> usize {
        17 + self.entries.len() * ENTRY_LEN + Signature::ENCODED_LEN
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        if r.u8()? != KIND_CRL {
            return Err(Error::Malformed("not a CRL".into()));
        }
        let issuer = r.u32()?;
        let this_update = r.u32()?;
        let next_update = r.u32()?;
        let n = r.u32()? as usize;
        let entries = (0..n)
            .map(|_| CrlEntry::decode(&mut r))
            .collect::<Result<Vec<_>, _>>()?;
        let signature = Signature::decode(&mut r)?;
        r.finish()?;
        let crl = Crl::new(issuer, this_update, next_update, entries)?;
        if crl.signature != signature {
            return Err(Error::Malformed("CRL signature mismatch".into()));
        }
        Ok(crl)
    }

    pub fn verify_signature(&self) -> bool {
        self.signature.verify(self.issuer, &self.body())
    }

    pub fn contains(&self, serial: Serial) -> bool {
        self.entries
            .binary_search_by_key(&serial, |e| e.serial)
            .is_ok()
    }

    pub fn serials(&self) -> BTreeSet<Serial> {
        self.entries.iter().map(|e| e.serial).collect()
    }

    pub fn is_current_at(&self, t: Tick) -> bool {
        self.this_update <= t && t < self.next_update
    }

    /// `serial,revoked_at,reason` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("serial,revoked_at,reason\n");
        for e in &self.entries {
            let _ = writeln!(s, "{},{},{}", e.serial, e.revoked_at, e.reason);
        }
        s
    }
}

/// Nominal update period, over-issuance factor and stagger offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct IssuanceSchedule {
    /// Ticks between nominal updates; also the lifetime of each list.
    pub period: Tick,
    pub over_issue_factor: u32,
    /// Fractions of a period in `[0, 1)`, strictly increasing. One per
    /// stagger group; empty means every segment goes out at offset 0.
    pub stagger_offsets: Vec<f64>,
}

impl IssuanceSchedule {
    pub fn new(period: Tick, over_issue_factor: u32, stagger_offsets: Vec<f64>) -> Result<Self, Error> {
        if period == 0 {
            return Err(Error::InvalidParameter("period must be positive".into()));
        }
        if over_issue_factor == 0 {
            return Err(Error::InvalidParameter("over_issue_factor must be >= 1".into()));
        }
        if over_issue_factor > period {
            return Err(Error::InvalidParameter(
                "over_issue_factor exceeds ticks per period".into(),
            ));
        }
        if stagger_offsets.iter().any(|o| !(0.0..1.0).contains(o))
            || stagger_offsets.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidParameter(
                "stagger offsets must be strictly increasing in [0, 1)".into(),
            ));
        }
        Ok(IssuanceSchedule {
            period,
            over_issue_factor,
            stagger_offsets,
        })
    }

    pub fn simple(period: Tick) -> Self {
        IssuanceSchedule {
            period,
            over_issue_factor: 1,
            stagger_offsets: Vec::new(),
        }
    }

    /// `intervals` evenly spaced offsets: 0, 1/m, 2/m, ...
    pub fn evenly_staggered(period: Tick, intervals: u32) -> Result<Self, Error> {
        let offsets = (0..intervals.max(1))
            .map(|i| i as f64 / intervals.max(1) as f64)
            .collect();
        Self::new(period, 1, offsets)
    }

    /// n-th full-list issuance time: floor(n * period / k). Consecutive
    /// issuances k apart are exactly one period apart.
    pub fn issue_time(&self, n: u64) -> Tick {
        (n * self.period as u64 / self.over_issue_factor as u64) as Tick
    }

    /// Index of the latest full issuance at or before `t`.
    pub fn latest_index(&self, t: Tick) -> u64 {
        let k = self.over_issue_factor as u64;
        let mut n = t as u64 * k / self.period as u64;
        while self.issue_time(n + 1) <= t {
            n += 1;
        }
        while n > 0 && self.issue_time(n) > t {
            n -= 1;
        }
        n
    }

    pub fn stagger_groups(&self) -> usize {
        self.stagger_offsets.len().max(1)
    }

    /// Offset in ticks of stagger group `g`.
    pub fn group_offset(&self, g: usize) -> Tick {
        self.stagger_offsets
            .get(g)
            .map(|o| (o * self.period as f64).floor() as Tick)
            .unwrap_or(0)
    }

    /// Stagger group of a segment: segments are split into contiguous,
    /// near-equal groups in index order.
    pub fn group_of_segment(&self, segment: usize, segment_count: usize) -> usize {
        segment * self.stagger_groups() / segment_count.max(1)
    }

    /// Latest issuance time of `segment` at or before `t`, if any.
    pub fn segment_issue_at_or_before(&self, segment: usize, segment_count: usize, t: Tick) -> Option<Tick> {
        let off = self.group_offset(self.group_of_segment(segment, segment_count));
        if t < off {
            return None;
        }
        Some(off + (t - off) / self.period * self.period)
    }
}

/// Full CRL at `at`: every revoked certificate that has not expired.
pub fn issue_crl(state: &RevocationState, issuer: CaId, at: Tick, schedule: &IssuanceSchedule) -> Crl {
    let entries = state
        .revoked_live(at)
        .map(|(serial, r)| CrlEntry {
            serial,
            revoked_at: r.at,
            reason: r.reason,
        })
        .collect();
    Crl::new(issuer, at, at + schedule.period, entries).expect("state yields a well-formed list")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct HoldRecord {
    pub serial: Serial,
    pub start: Tick,
    pub end: Option<Tick>,
}

impl From<&Hold> for HoldRecord {
    fn from(h: &Hold) -> Self {
        HoldRecord {
            serial: h.serial,
            start: h.start,
            end: h.end,
        }
    }
}

impl HoldRecord {
    pub fn active_at(&self, t: Tick) -> bool {
        self.start <= t && self.end.is_none_or(|e| t < e)
    }
}

/// Difference list against a base CRL.
///
/// `added` lists revocations absent from the base. `expired` lists base
/// entries whose certificates expired since the base was issued; those
/// are the only entries a delta ever takes away. `on_hold_history`
/// records hold intervals overlapping `(base_ref, this_update]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaCrl {
    pub issuer: CaId,
    pub base_ref: Tick,
    pub this_update: Tick,
    pub next_update: Tick,
    pub added: Vec<CrlEntry>,
    pub expired: Vec<Serial>,
    pub on_hold_history: Vec<HoldRecord>,
    pub signature: Signature,
}

impl DeltaCrl {
    pub fn body(&self) -> Vec<u8> {
        let mut out = Vec::new();
        codec::put_u8(&mut out, KIND_DELTA);
        codec::put_u32(&mut out, self.issuer);
        codec::put_u32(&mut out, self.base_ref);
        codec::put_u32(&mut out, self.this_update);
        codec::put_u32(&mut out, self.next_update);
        codec::put_u32(&mut out, self.added.len() as u32);
        for e in &self.added {
            e.encode(&mut out);
        }
        codec::put_u32(&mut out, self.expired.len() as u32);
        for s in &self.expired {
            codec::put_u64(&mut out, *s);
        }
        codec::put_u32(&mut out, self.on_hold_history.len() as u32);
        for h in &self.on_hold_history {
            codec::put_u64(&mut out, h.serial);
            codec::put_u32(&mut out, h.start);
            codec::put_u32(&mut out, h.end.unwrap_or(OPEN_END));
        }
        out
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = self.body();
        self.signature.encode(&mut out);
        out
    }

    pub fn encoded_len(&self) -> usize {
        self.encode().len()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        if r.u8()? != KIND_DELTA {
            return Err(Error::Malformed("not a delta-CRL".into()));
        }
        let issuer = r.u32()?;
        let base_ref = r.u32()?;
        let this_update = r.u32()?;
        let next_update = r.u32()?;
        let n = r.u32()? as usize;
        let added = (0..n)
            .map(|_| CrlEntry::decode(&mut r))
            .collect::<Result<Vec<_>, _>>()?;
        let n = r.u32()? as usize;
        let expired = (0..n).map(|_| r.u64()).collect::<Result<Vec<_>, _>>()?;
        let n = r.u32()? as usize;
        let mut on_hold_history = Vec::with_capacity(n);
        for _ in 0..n {
            let serial = r.u64()?;
            let start = r.u32()?;
            let end = r.u32()?;
            on_hold_history.push(HoldRecord {
                serial,
                start,
                end: (end != OPEN_END).then_some(end),
            });
        }
        let signature = Signature::decode(&mut r)?;
        r.finish()?;
        check_sorted(&added)?;
        let delta = DeltaCrl {
            issuer,
            base_ref,
            this_update,
            next_update,
            added,
            expired,
            on_hold_history,
            signature,
        };
        if !delta.verify_signature() {
            return Err(Error::Malformed("delta-CRL signature mismatch".into()));
        }
        Ok(delta)
    }

    pub fn verify_signature(&self) -> bool {
        self.signature.verify(self.issuer, &self.body())
    }

    /// Serials on hold at this delta's issuance time.
    pub fn on_hold_now(&self) -> BTreeSet<Serial> {
        self.on_hold_history
            .iter()
            .filter(|h| h.active_at(self.this_update))
            .map(|h| h.serial)
            .collect()
    }
}

/// Delta against `base` describing the state at `at`.
pub fn issue_delta(
    state: &RevocationState,
    base: &Crl,
    at: Tick,
    schedule: &IssuanceSchedule,
) -> Result<DeltaCrl, Error> {
    if base.this_update > at {
        return Err(Error::UnknownBase(base.this_update));
    }
    let full = issue_crl(state, base.issuer, at, schedule);
    let base_serials = base.serials();
    let full_serials = full.serials();
    let added: Vec<CrlEntry> = full
        .entries
        .iter()
        .filter(|e| !base_serials.contains(&e.serial))
        .copied()
        .collect();
    let expired: Vec<Serial> = base_serials.difference(&full_serials).copied().collect();
    let mut on_hold_history: Vec<HoldRecord> = state
        .holds()
        .iter()
        .filter(|h| h.overlaps(base.this_update, at) && h.start <= at)
        .map(|h| {
            let mut rec = HoldRecord::from(h);
            // history is as of `at`
            if rec.end.is_some_and(|e| e > at) {
                rec.end = None;
            }
            rec
        })
        .collect();
    on_hold_history.sort();
    let mut delta = DeltaCrl {
        issuer: base.issuer,
        base_ref: base.this_update,
        this_update: at,
        next_update: at + schedule.period,
        added,
        expired,
        on_hold_history,
        signature: Signature::sign(base.issuer, &[]),
    };
    delta.signature = Signature::sign(base.issuer, &delta.body());
    Ok(delta)
}

/// Verifier-side composition of a base and a delta into the full entry list.
pub fn reconstruct(base: &Crl, delta: &DeltaCrl) -> Result<Vec<CrlEntry>, Error> {
    if delta.base_ref != base.this_update || delta.issuer != base.issuer {
        return Err(Error::BaseMismatch {
            delta_base: delta.base_ref,
            supplied: base.this_update,
        });
    }
    let expired: BTreeSet<Serial> = delta.expired.iter().copied().collect();
    let mut out: Vec<CrlEntry> = base
        .entries
        .iter()
        .filter(|e| !expired.contains(&e.serial))
        .chain(delta.added.iter())
        .copied()
        .collect();
    out.sort();
    out.dedup_by_key(|e| e.serial);
    Ok(out)
}

/// A CRL split by `serial mod segment_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentedCrlSet {
    pub segment_count: usize,
    pub segments: Vec<Crl>,
}

impl SegmentedCrlSet {
    pub fn segment_of(segment_count: usize, serial: Serial) -> usize {
        (serial % segment_count as u64) as usize
    }

    /// Every segment issued at the same instant.
    pub fn issue(
        state: &RevocationState,
        issuer: CaId,
        at: Tick,
        schedule: &IssuanceSchedule,
        segment_count: usize,
    ) -> Result<Self, Error> {
        if segment_count == 0 {
            return Err(Error::InvalidParameter("segment_count must be positive".into()));
        }
        let segments = (0..segment_count)
            .map(|i| issue_segment(state, issuer, at, schedule, i, segment_count))
            .collect();
        Ok(SegmentedCrlSet {
            segment_count,
            segments,
        })
    }

    /// Replaces one segment after a staggered reissue.
    pub fn replace(&mut self, index: usize, crl: Crl) {
        self.segments[index] = crl;
    }
}

/// One segment of the full list, issued at `at`.
pub fn issue_segment(
    state: &RevocationState,
    issuer: CaId,
    at: Tick,
    schedule: &IssuanceSchedule,
    index: usize,
    segment_count: usize,
) -> Crl {
    let entries = state
        .revoked_live(at)
        .filter(|(s, _)| SegmentedCrlSet::segment_of(segment_count, *s) == index)
        .map(|(serial, r)| CrlEntry {
            serial,
            revoked_at: r.at,
            reason: r.reason,
        })
        .collect();
    Crl::new(issuer, at, at + schedule.period, entries).expect("state yields a well-formed list")
}

pub fn segment_lookup(set: &SegmentedCrlSet, serial: Serial) -> &Crl {
    &set.segments[SegmentedCrlSet::segment_of(set.segment_count, serial)]
}

/// Issues over-issued full CRLs on schedule and, optionally, a delta with
/// every issuance whose base is the oldest not-yet-expired full CRL.
#[derive(Debug, Clone)]
pub struct OverIssuer {
    pub issuer: CaId,
    pub schedule: IssuanceSchedule,
    issued: Vec<Crl>,
    next_index: u64,
}

#[derive(Debug, Clone)]
pub struct Issuance {
    pub full: Crl,
    pub delta: Option<DeltaCrl>,
}

impl OverIssuer {
    pub fn new(issuer: CaId, schedule: IssuanceSchedule) -> Self {
        OverIssuer {
            issuer,
            schedule,
            issued: Vec::new(),
            next_index: 0,
        }
    }

    /// Issues everything scheduled at or before `t`. With `with_delta`,
    /// each full CRL comes with a delta against the oldest unexpired one.
    pub fn advance(&mut self, state: &RevocationState, t: Tick, with_delta: bool) -> Vec<Issuance> {
        let mut out = Vec::new();
        while self.schedule.issue_time(self.next_index) <= t {
            let at = self.schedule.issue_time(self.next_index);
            self.next_index += 1;
            let full = issue_crl(state, self.issuer, at, &self.schedule);
            self.issued.retain(|c| c.next_update > at);
            self.issued.push(full.clone());
            let delta = with_delta.then(|| {
                let base = self.oldest_unexpired(at).expect("just issued one");
                issue_delta(state, base, at, &self.schedule).expect("base precedes issuance")
            });
            out.push(Issuance { full, delta });
        }
        out
    }

    pub fn unexpired_at(&self, t: Tick) -> impl Iterator<Item = &Crl> {
        self.issued.iter().filter(move |c| c.is_current_at(t))
    }

    pub fn oldest_unexpired(&self, t: Tick) -> Option<&Crl> {
        self.unexpired_at(t).min_by_key(|c| c.this_update)
    }

    pub fn latest(&self) -> Option<&Crl> {
        self.issued.last()
    }

    pub fn find(&self, this_update: Tick) -> Result<&Crl, Error> {
        self.issued
            .iter()
            .find(|c| c.this_update == this_update)
            .ok_or(Error::UnknownBase(this_update))
    }
}
