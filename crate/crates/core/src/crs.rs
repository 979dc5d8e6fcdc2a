//! Certificate Revocation Status: per-certificate YES/NO hash-chain
//! anchors, the daily CA→Directory push, Directory lookups and the
//! user-side check.
//!
//! A certificate valid for `D` days carries `Y = F^D(Y0)` and `N = F(N0)`.
//! On day `i` the Directory receives `F^(D-i)(Y0)` for every good
//! certificate; applying F `i` times to it lands on `Y`. A revoked
//! certificate is answered with `N0` for the rest of its life.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use crate::codec::{self, Reader};
use crate::error::Error;
use crate::model::{day_start, CaId, CertRecord, Day, ReasonCode, RevocationState, Serial, Tick};
use crate::primitives::{iterate, ChainParams, Digest, Signature};

/// Spacing of stored chain checkpoints held by the CA.
const CHECKPOINT_STRIDE: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrsCertExtension {
    pub y_anchor: Digest,
    pub n_anchor: Digest,
    pub validity_days: u32,
}

impl CrsCertExtension {
    /// Octets the extension adds to a certificate.
    pub fn encoded_len(&self) -> usize {
        self.y_anchor.width() + self.n_anchor.width() + 4
    }
}

/// CA-held secrets behind one certificate's anchors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrsSecrets {
    pub y_seed: Digest,
    pub n_seed: Digest,
}

/// Draws fresh seeds and derives the anchors for a `D`-day certificate.
pub fn crs_issue<R: Rng + ?Sized>(
    params: ChainParams,
    rng: &mut R,
) -> (CrsCertExtension, CrsSecrets) {
    let width = params.width();
    let secrets = CrsSecrets {
        y_seed: Digest::random(width, rng),
        n_seed: Digest::random(width, rng),
    };
    let ext = CrsCertExtension {
        y_anchor: iterate(&secrets.y_seed, params.depth()),
        n_anchor: iterate(&secrets.n_seed, 1),
        validity_days: params.depth(),
    };
    (ext, secrets)
}

/// `F^(D-i)(Y0)`, the YES value released on day `i` (0 ≤ i ≤ D).
pub fn yes_value(secrets: &CrsSecrets, validity_days: u32, i: u32) -> Result<Digest, Error> {
    if i > validity_days {
        return Err(Error::DayOutOfRange {
            day: i,
            max: validity_days,
        });
    }
    Ok(iterate(&secrets.y_seed, validity_days - i))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrsVerdict {
    Valid,
    Revoked,
    Invalid,
}

/// User check for day `i`: Valid iff F^i(value) = Y, Revoked iff
/// F(value) = N. Days outside `1..=D` are Invalid.
pub fn crs_verify(ext: &CrsCertExtension, value: &Digest, i: u32) -> CrsVerdict {
    if i == 0 || i > ext.validity_days || value.width() != ext.y_anchor.width() {
        return CrsVerdict::Invalid;
    }
    if iterate(value, 1) == ext.n_anchor {
        return CrsVerdict::Revoked;
    }
    if iterate(value, i) == ext.y_anchor {
        CrsVerdict::Valid
    } else {
        CrsVerdict::Invalid
    }
}

/// Signed bit string over the whole serial space: bit `s` is set iff
/// serial `s` is issued and not yet expired on `day`, revoked or not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatusBitmap {
    pub serial_bits: u8,
    pub day: Day,
    bits: Vec<u8>,
    pub signature: Signature,
}

impl StatusBitmap {
    pub fn new(issuer: CaId, serial_bits: u8, day: Day, ones: impl IntoIterator<Item = Serial>) -> Result<Self, Error> {
        if serial_bits == 0 || serial_bits > 32 {
            return Err(Error::InvalidParameter(format!(
                "serial width {serial_bits} outside 1..=32"
            )));
        }
        let nbits = 1u64 << serial_bits;
        let mut bits = vec![0u8; nbits.div_ceil(8) as usize];
        for s in ones {
            if s >= nbits {
                return Err(Error::InvalidParameter(format!(
                    "serial {s} exceeds {serial_bits}-bit space"
                )));
            }
            bits[(s / 8) as usize] |= 0x80 >> (s % 8);
        }
        let mut bm = StatusBitmap {
            serial_bits,
            day,
            bits,
            signature: Signature::sign(issuer, &[]),
        };
        bm.signature = Signature::sign(issuer, &bm.body());
        Ok(bm)
    }

    pub fn get(&self, serial: Serial) -> bool {
        if serial >> self.serial_bits != 0 {
            return false;
        }
        self.bits[(serial / 8) as usize] & (0x80 >> (serial % 8)) != 0
    }

    pub fn ones(&self) -> impl Iterator<Item = Serial> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, b)| {
            (0..8u64)
                .filter(move |j| b & (0x80 >> j) != 0)
                .map(move |j| i as u64 * 8 + j)
        })
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    fn body(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(5 + self.bits.len());
        codec::put_u8(&mut out, self.serial_bits);
        codec::put_u32(&mut out, self.day);
        out.extend_from_slice(&self.bits);
        out
    }

    pub fn verify_signature(&self, issuer: CaId) -> bool {
        self.signature.verify(issuer, &self.body())
    }

    pub fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.body());
        self.signature.encode(out);
    }

    pub fn decode(r: &mut Reader<'_>) -> Result<Self, Error> {
        let serial_bits = r.u8()?;
        if serial_bits == 0 || serial_bits > 32 {
            return Err(Error::Malformed("serial width".into()));
        }
        let day = r.u32()?;
        let bits = r.take((1u64 << serial_bits).div_ceil(8) as usize)?.to_vec();
        let signature = Signature::decode(r)?;
        Ok(StatusBitmap {
            serial_bits,
            day,
            bits,
            signature,
        })
    }
}

/// One day's CA→Directory push.
///
/// `values` holds the day's YES value for every good certificate and N0
/// for certificates revoked since the previous push. In a `full` push it
/// also re-sends N0 for every earlier revocation still on the bitmap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrsDailyUpdate {
    pub bitmap: StatusBitmap,
    pub values: BTreeMap<Serial, Digest>,
    pub reasons: BTreeMap<Serial, ReasonCode>,
    pub full: bool,
}

impl CrsDailyUpdate {
    /// DirectoryPayload encoding: full flag, signed bitmap, then
    /// (serial, digest) pairs and (serial, reason) pairs, each sorted.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        codec::put_u8(&mut out, self.full as u8);
        self.bitmap.encode(&mut out);
        let width = self.values.values().next().map_or(0, |d| d.width());
        codec::put_u8(&mut out, width as u8);
        codec::put_u32(&mut out, self.values.len() as u32);
        for (s, d) in &self.values {
            codec::put_u64(&mut out, *s);
            codec::put_digest(&mut out, d);
        }
        codec::put_u32(&mut out, self.reasons.len() as u32);
        for (s, r) in &self.reasons {
            codec::put_u64(&mut out, *s);
            codec::put_u8(&mut out, *r);
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        let full = match r.u8()? {
            0 => false,
            1 => true,
            _ => return Err(Error::Malformed("full flag".into())),
        };
        let bitmap = StatusBitmap::decode(&mut r)?;
        let width = r.u8()? as usize;
        let n = r.u32()?;
        let mut values = BTreeMap::new();
        for _ in 0..n {
            let s = r.u64()?;
            values.insert(s, r.digest(width)?);
        }
        let n = r.u32()?;
        let mut reasons = BTreeMap::new();
        for _ in 0..n {
            let s = r.u64()?;
            reasons.insert(s, r.u8()?);
        }
        r.finish()?;
        Ok(CrsDailyUpdate {
            bitmap,
            values,
            reasons,
            full,
        })
    }
}

#[derive(Debug, Clone)]
struct IssuedCert {
    cert: CertRecord,
    ext: CrsCertExtension,
    secrets: CrsSecrets,
    /// F^(k·stride)(Y0) for k = 0, 1, ...
    checkpoints: Vec<Digest>,
}

impl IssuedCert {
    fn yes_value(&self, i: u32) -> Result<Digest, Error> {
        let d = self.ext.validity_days;
        if i > d {
            return Err(Error::DayOutOfRange { day: i, max: d });
        }
        let k = d - i;
        let cp = (k / CHECKPOINT_STRIDE) as usize;
        Ok(iterate(&self.checkpoints[cp], k % CHECKPOINT_STRIDE))
    }
}

/// CA role: issues certificates and produces daily updates.
#[derive(Debug, Clone)]
pub struct CrsAuthority {
    pub issuer: CaId,
    pub width_bits: u32,
    pub serial_bits: u8,
    certs: BTreeMap<Serial, IssuedCert>,
}

impl CrsAuthority {
    pub fn new(issuer: CaId, width_bits: u32, serial_bits: u8) -> Self {
        CrsAuthority {
            issuer,
            width_bits,
            serial_bits,
            certs: BTreeMap::new(),
        }
    }

    pub fn issue<R: Rng + ?Sized>(&mut self, cert: CertRecord, rng: &mut R) -> Result<CrsCertExtension, Error> {
        if cert.serial >> self.serial_bits != 0 {
            return Err(Error::InvalidParameter(format!(
                "serial {} exceeds {}-bit space",
                cert.serial, self.serial_bits
            )));
        }
        let params = ChainParams::new(cert.validity_days(), self.width_bits)?;
        let (ext, secrets) = crs_issue(params, rng);
        let mut checkpoints = vec![secrets.y_seed];
        let mut cur = secrets.y_seed;
        for _ in 0..params.depth() / CHECKPOINT_STRIDE {
            cur = iterate(&cur, CHECKPOINT_STRIDE);
            checkpoints.push(cur);
        }
        self.certs.insert(
            cert.serial,
            IssuedCert {
                cert,
                ext,
                secrets,
                checkpoints,
            },
        );
        Ok(ext)
    }

    pub fn extension(&self, serial: Serial) -> Option<&CrsCertExtension> {
        self.certs.get(&serial).map(|c| &c.ext)
    }

    pub fn secrets(&self, serial: Serial) -> Option<&CrsSecrets> {
        self.certs.get(&serial).map(|c| &c.secrets)
    }

    /// Update for global `day`. Revocations recorded at or before the
    /// start of `day` count; "new" ones are those after the previous
    /// day's start.
    pub fn daily_update(&self, state: &RevocationState, day: Day, full: bool) -> Result<CrsDailyUpdate, Error> {
        let now: Tick = day_start(day);
        let prev: Option<Tick> = day.checked_sub(1).map(day_start);
        let mut ones = Vec::new();
        let mut values = BTreeMap::new();
        let mut reasons = BTreeMap::new();
        for (serial, c) in &self.certs {
            let Some(i) = c.cert.day_index(day) else { continue };
            if i > c.ext.validity_days {
                continue;
            }
            ones.push(*serial);
            match state.revocation(*serial).filter(|r| r.at <= now) {
                Some(r) => {
                    let fresh = prev.is_none_or(|p| r.at > p);
                    if fresh || full {
                        values.insert(*serial, c.secrets.n_seed);
                        reasons.insert(*serial, r.reason);
                    }
                }
                None => {
                    values.insert(*serial, c.yes_value(i)?);
                }
            }
        }
        Ok(CrsDailyUpdate {
            bitmap: StatusBitmap::new(self.issuer, self.serial_bits, day, ones)?,
            values,
            reasons,
            full,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrsAnswer {
    Value(Digest),
    /// Bit is 0 (or nothing ingested yet); carries the signed bitmap day.
    NotFound { day: Day, bitmap_signature: Option<Signature> },
}

impl CrsAnswer {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self {
            CrsAnswer::Value(d) => {
                codec::put_u8(&mut out, 0);
                codec::put_u8(&mut out, d.width() as u8);
                codec::put_digest(&mut out, d);
            }
            CrsAnswer::NotFound {
                day,
                bitmap_signature,
            } => {
                codec::put_u8(&mut out, 1);
                codec::put_u32(&mut out, *day);
                if let Some(sig) = bitmap_signature {
                    sig.encode(&mut out);
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        let ans = match r.u8()? {
            0 => {
                let w = r.u8()? as usize;
                CrsAnswer::Value(r.digest(w)?)
            }
            1 => {
                let day = r.u32()?;
                let bitmap_signature = if r.remaining() > 0 {
                    Some(Signature::decode(&mut r)?)
                } else {
                    None
                };
                CrsAnswer::NotFound {
                    day,
                    bitmap_signature,
                }
            }
            _ => return Err(Error::Malformed("answer tag".into())),
        };
        r.finish()?;
        Ok(ans)
    }
}

/// Directory role: ingests daily pushes, answers per-serial queries.
#[derive(Debug, Clone, Default)]
pub struct CrsDirectory {
    bitmap: Option<StatusBitmap>,
    yes: HashMap<Serial, Digest>,
    no_cache: HashMap<Serial, Digest>,
}

impl CrsDirectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces the day's state. Fails, leaving the old state in place,
    /// when the answerable serials would not equal the bitmap's 1-bits.
    pub fn ingest(&mut self, update: &CrsDailyUpdate) -> Result<(), Error> {
        let bm = &update.bitmap;
        let mut no_cache: HashMap<Serial, Digest> = if update.full {
            HashMap::new()
        } else {
            self.no_cache
                .iter()
                .filter(|(s, _)| bm.get(**s))
                .map(|(s, d)| (*s, *d))
                .collect()
        };
        let mut yes = HashMap::with_capacity(update.values.len());
        for (s, d) in &update.values {
            if !bm.get(*s) {
                return Err(Error::Malformed(format!("value for 0-bit serial {s}")));
            }
            if update.reasons.contains_key(s) {
                no_cache.insert(*s, *d);
            } else {
                yes.insert(*s, *d);
            }
        }
        let answerable = yes.len() + no_cache.keys().filter(|s| !yes.contains_key(s)).count();
        if answerable != bm.count_ones() {
            return Err(Error::Malformed(format!(
                "bitmap lists {} certificates but {} are answerable",
                bm.count_ones(),
                answerable
            )));
        }
        self.bitmap = Some(update.bitmap.clone());
        self.yes = yes;
        self.no_cache = no_cache;
        Ok(())
    }

    pub fn day(&self) -> Option<Day> {
        self.bitmap.as_ref().map(|b| b.day)
    }

    pub fn answer(&self, serial: Serial) -> CrsAnswer {
        let Some(bm) = &self.bitmap else {
            return CrsAnswer::NotFound {
                day: 0,
                bitmap_signature: None,
            };
        };
        if bm.get(serial) {
            if let Some(v) = self.yes.get(&serial).or_else(|| self.no_cache.get(&serial)) {
                return CrsAnswer::Value(*v);
            }
        }
        CrsAnswer::NotFound {
            day: bm.day,
            bitmap_signature: Some(bm.signature),
        }
    }

    /// Every value the Directory currently holds.
    pub fn stored_values(&self) -> impl Iterator<Item = &Digest> {
        self.yes.values().chain(self.no_cache.values())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn issue_satisfies_anchor_relations() {
        let mut r = rng();
        let (ext, sec) = crs_issue(ChainParams::compact(), &mut r);
        assert_eq!(iterate(&sec.y_seed, 365), ext.y_anchor);
        assert_eq!(iterate(&sec.n_seed, 1), ext.n_anchor);
        assert_eq!(ext.y_anchor.width(), 13);
        let (ext1, sec1) = crs_issue(ChainParams::new(1, 100).unwrap(), &mut r);
        assert_eq!(ext1.y_anchor, iterate(&sec1.y_seed, 1));
    }

    #[test]
    fn seeds_do_not_collide() {
        let mut r = rng();
        let mut seen = HashSet::new();
        for _ in 0..10_000 {
            let (_, s) = crs_issue(ChainParams::new(1, 100).unwrap(), &mut r);
            assert!(seen.insert(s.y_seed));
            assert!(seen.insert(s.n_seed));
        }
    }

    #[test]
    fn day_one_value_is_f364() {
        let mut r = rng();
        let (ext, sec) = crs_issue(ChainParams::compact(), &mut r);
        let v = yes_value(&sec, 365, 1).unwrap();
        assert_eq!(v, iterate(&sec.y_seed, 364));
        assert_eq!(crs_verify(&ext, &v, 1), CrsVerdict::Valid);
        assert_eq!(crs_verify(&ext, &v, 2), CrsVerdict::Invalid);
        assert_eq!(crs_verify(&ext, &sec.n_seed, 200), CrsVerdict::Revoked);
        assert!(yes_value(&sec, 365, 366).is_err());
        assert_eq!(crs_verify(&ext, &ext.y_anchor, 0), CrsVerdict::Invalid);
    }

    #[test]
    fn random_digests_are_invalid() {
        let mut r = rng();
        let (ext, _) = crs_issue(ChainParams::new(30, 100).unwrap(), &mut r);
        for i in 0..1000u32 {
            let d = Digest::random(13, &mut r);
            assert_eq!(crs_verify(&ext, &d, 1 + i % 30), CrsVerdict::Invalid);
        }
    }

    fn setup(n: u64, days: u32) -> (CrsAuthority, RevocationState) {
        let mut r = rng();
        let mut ca = CrsAuthority::new(1, 100, 10);
        let mut st = RevocationState::new();
        for serial in 0..n {
            let c = CertRecord::new(serial, 1, 0, days);
            st.add_cert(c).unwrap();
            ca.issue(c, &mut r).unwrap();
        }
        (ca, st)
    }

    #[test]
    fn checkpoints_match_direct_iteration() {
        let (ca, _) = setup(3, 100);
        let c = &ca.certs[&1];
        for i in 0..=100 {
            assert_eq!(c.yes_value(i).unwrap(), yes_value(&c.secrets, 100, i).unwrap());
        }
    }

    #[test]
    fn end_to_end_with_revocation_and_expiry() {
        let (mut ca, mut st) = setup(8, 20);
        let mut r = rng();
        let short = CertRecord::new(9, 1, 0, 3);
        st.add_cert(short).unwrap();
        ca.issue(short, &mut r).unwrap();
        st.revoke(2, day_start(4) - 5, 3).unwrap();
        let mut dir = CrsDirectory::new();
        for day in 1..=20 {
            let upd = ca.daily_update(&st, day, day == 1).unwrap();
            dir.ingest(&upd).unwrap();
            for serial in 0..8 {
                let ext = ca.extension(serial).unwrap();
                let CrsAnswer::Value(v) = dir.answer(serial) else { panic!("missing {serial}") };
                let want = if serial == 2 && day >= 4 { CrsVerdict::Revoked } else { CrsVerdict::Valid };
                assert_eq!(crs_verify(ext, &v, day), want, "serial {serial} day {day}");
            }
            let nine = dir.answer(9);
            assert_eq!(matches!(nine, CrsAnswer::Value(_)), day <= 3);
            // N0 sent only on the revocation day in incremental pushes
            if day > 4 {
                assert!(!upd.values.contains_key(&2));
            }
            if day == 4 {
                assert_eq!(upd.values[&2], ca.secrets(2).unwrap().n_seed);
            }
        }
        assert!(matches!(dir.answer(500), CrsAnswer::NotFound { day: 20, bitmap_signature: Some(_) }));
    }

    #[test]
    fn directory_rejects_disagreeing_bitmap() {
        let (ca, st) = setup(4, 5);
        let mut upd = ca.daily_update(&st, 1, true).unwrap();
        upd.values.remove(&1);
        assert!(CrsDirectory::new().ingest(&upd).is_err());
    }

    #[test]
    fn stale_values_cannot_prove_earlier_day() {
        let (ca, st) = setup(4, 30);
        let mut dir = CrsDirectory::new();
        dir.ingest(&ca.daily_update(&st, 10, true).unwrap()).unwrap();
        for serial in 0..4 {
            let ext = ca.extension(serial).unwrap();
            // a value valid for day 10 cannot pass as day 11
            assert!(dir
                .stored_values()
                .all(|v| crs_verify(ext, v, 11) != CrsVerdict::Valid));
        }
    }

    #[test]
    fn payload_round_trip() {
        let (ca, mut st) = setup(6, 10);
        st.revoke(3, 0, 4).unwrap();
        let upd = ca.daily_update(&st, 2, true).unwrap();
        let bytes = upd.encode();
        assert_eq!(CrsDailyUpdate::decode(&bytes).unwrap(), upd);
        // bitmap 2^10 bits = 128 octets
        assert!(bytes.len() > 128);
        assert!(upd.bitmap.verify_signature(1));
        for a in [CrsAnswer::Value(Digest::from_u64(13, 5)), CrsAnswer::NotFound { day: 3, bitmap_signature: Some(upd.bitmap.signature) }] {
            assert_eq!(CrsAnswer::decode(&a.encode()).unwrap(), a);
        }
    }

    #[test]
    fn serial_outside_space_rejected() {
        let mut ca = CrsAuthority::new(1, 100, 4);
        assert!(ca.issue(CertRecord::new(16, 1, 0, 5), &mut rng()).is_err());
    }
}
