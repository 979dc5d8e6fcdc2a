//! Certificates and the authoritative per-CA revocation state.
//!
//! Time is counted in hourly ticks. Day `d` spans ticks `[24d, 24d + 24)`;
//! a certificate issued on day `a` with validity `D` days is live on days
//! `a..=a + D` and expires at the start of day `a + D + 1`.

use std::collections::BTreeMap;

use crate::error::Error;

pub type Serial = u64;
pub type Tick = u32;
pub type Day = u32;
pub type CaId = u32;
pub type ReasonCode = u8;

pub const TICKS_PER_DAY: Tick = 24;

pub fn day_start(day: Day) -> Tick {
    day * TICKS_PER_DAY
}

pub fn day_of(tick: Tick) -> Day {
    tick / TICKS_PER_DAY
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CertRecord {
    pub serial: Serial,
    pub issuer: CaId,
    pub issue_day: Day,
    /// Last day on which the certificate is live.
    pub expiry_day: Day,
}

impl CertRecord {
    pub fn new(serial: Serial, issuer: CaId, issue_day: Day, validity_days: u32) -> Self {
        CertRecord {
            serial,
            issuer,
            issue_day,
            expiry_day: issue_day + validity_days,
        }
    }

    pub fn validity_days(&self) -> u32 {
        self.expiry_day - self.issue_day
    }

    pub fn is_live_at(&self, t: Tick) -> bool {
        t >= day_start(self.issue_day) && t < day_start(self.expiry_day + 1)
    }

    /// Day index relative to issuance (0 on the issue day).
    pub fn day_index(&self, day: Day) -> Option<u32> {
        day.checked_sub(self.issue_day)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Revocation {
    pub at: Tick,
    pub reason: ReasonCode,
}

/// A certificate-hold interval; `end == None` means still on hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hold {
    pub serial: Serial,
    pub start: Tick,
    pub end: Option<Tick>,
}

impl Hold {
    pub fn active_at(&self, t: Tick) -> bool {
        self.start <= t && self.end.is_none_or(|e| t < e)
    }

    pub fn overlaps(&self, from: Tick, to: Tick) -> bool {
        self.start <= to && self.end.is_none_or(|e| e > from)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Good,
    Revoked,
    /// Expired, not yet issued, or never issued.
    Unknown,
}

/// Authoritative CA-side record of issued certificates, revocations and
/// holds. Queries take the tick at which the state is observed, so one
/// value describes a whole trajectory.
#[derive(Debug, Clone, Default)]
pub struct RevocationState {
    certs: BTreeMap<Serial, CertRecord>,
    revocations: BTreeMap<Serial, Revocation>,
    holds: Vec<Hold>,
}

impl RevocationState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_cert(&mut self, cert: CertRecord) -> Result<(), Error> {
        if self.certs.contains_key(&cert.serial) {
            return Err(Error::AlreadyPresent(cert.serial));
        }
        self.certs.insert(cert.serial, cert);
        Ok(())
    }

    /// Records a revocation. A second revocation of the same serial keeps the earlier one.
    pub fn revoke(&mut self, serial: Serial, at: Tick, reason: ReasonCode) -> Result<(), Error> {
        if !self.certs.contains_key(&serial) {
            return Err(Error::UnknownSerial(serial));
        }
        let entry = self
            .revocations
            .entry(serial)
            .or_insert(Revocation { at, reason });
        if at < entry.at {
            *entry = Revocation { at, reason };
        }
        Ok(())
    }

    pub fn place_on_hold(&mut self, serial: Serial, at: Tick) -> Result<(), Error> {
        if !self.certs.contains_key(&serial) {
            return Err(Error::UnknownSerial(serial));
        }
        self.holds.push(Hold {
            serial,
            start: at,
            end: None,
        });
        Ok(())
    }

    pub fn release_hold(&mut self, serial: Serial, at: Tick) -> Result<(), Error> {
        let hold = self
            .holds
            .iter_mut()
            .rev()
            .find(|h| h.serial == serial && h.end.is_none())
            .ok_or(Error::NotPresent(serial))?;
        hold.end = Some(at.max(hold.start + 1));
        Ok(())
    }

    pub fn cert(&self, serial: Serial) -> Option<&CertRecord> {
        self.certs.get(&serial)
    }

    pub fn certs(&self) -> impl Iterator<Item = &CertRecord> {
        self.certs.values()
    }

    pub fn len(&self) -> usize {
        self.certs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.certs.is_empty()
    }

    pub fn revocation(&self, serial: Serial) -> Option<Revocation> {
        self.revocations.get(&serial).copied()
    }

    pub fn is_live(&self, serial: Serial, t: Tick) -> bool {
        self.certs.get(&serial).is_some_and(|c| c.is_live_at(t))
    }

    pub fn is_revoked(&self, serial: Serial, t: Tick) -> bool {
        self.revocations.get(&serial).is_some_and(|r| r.at <= t)
    }

    pub fn status(&self, serial: Serial, t: Tick) -> Status {
        if !self.is_live(serial, t) {
            Status::Unknown
        } else if self.is_revoked(serial, t) {
            Status::Revoked
        } else {
            Status::Good
        }
    }

    /// Live certificates revoked at or before `t`, in serial order.
    pub fn revoked_live(&self, t: Tick) -> impl Iterator<Item = (Serial, Revocation)> + '_ {
        self.revocations
            .iter()
            .filter(move |(s, r)| r.at <= t && self.is_live(**s, t))
            .map(|(s, r)| (*s, *r))
    }

    pub fn holds(&self) -> &[Hold] {
        &self.holds
    }

    pub fn on_hold_at(&self, serial: Serial, t: Tick) -> bool {
        self.holds
            .iter()
            .any(|h| h.serial == serial && h.active_at(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state() -> RevocationState {
        let mut s = RevocationState::new();
        for serial in 0..10 {
            s.add_cert(CertRecord::new(serial, 1, 0, 5)).unwrap();
        }
        s
    }

    #[test]
    fn liveness_window() {
        let c = CertRecord::new(1, 1, 2, 3);
        assert!(!c.is_live_at(day_start(2) - 1));
        assert!(c.is_live_at(day_start(2)));
        assert!(c.is_live_at(day_start(6) - 1));
        assert!(!c.is_live_at(day_start(6)));
        assert_eq!(c.day_index(5), Some(3));
    }

    #[test]
    fn revocation_is_sticky_and_earliest_wins() {
        let mut s = state();
        s.revoke(3, 30, 1).unwrap();
        s.revoke(3, 20, 2).unwrap();
        assert_eq!(s.revocation(3).unwrap().at, 20);
        assert!(!s.is_revoked(3, 19));
        assert!(s.is_revoked(3, 20));
        assert_eq!(s.status(3, 100), Status::Revoked);
        assert_eq!(s.status(3, day_start(6)), Status::Unknown);
        assert!(s.revoke(99, 1, 0).is_err());
    }

    #[test]
    fn revoked_live_drops_expired() {
        let mut s = state();
        s.add_cert(CertRecord::new(50, 1, 0, 1)).unwrap();
        s.revoke(50, 1, 0).unwrap();
        s.revoke(4, 1, 0).unwrap();
        let at = |t| s.revoked_live(t).map(|(x, _)| x).collect::<Vec<_>>();
        assert_eq!(at(5), vec![4, 50]);
        assert_eq!(at(day_start(2)), vec![4]);
    }

    #[test]
    fn holds() {
        let mut s = state();
        s.place_on_hold(2, 10).unwrap();
        assert!(s.on_hold_at(2, 10));
        s.release_hold(2, 15).unwrap();
        assert!(!s.on_hold_at(2, 15));
        assert!(s.release_hold(2, 16).is_err());
    }
}
