//! Request-rate model for CRL fetching.
//!
//! Verifiers validate at uniformly drawn ticks and fetch a list only when
//! their cached copy has expired. With one issuance per period every cache
//! expires at the same tick, so the next burst of validations all become
//! fetches. Over-issuance and staggered segments spread those expiries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::crl::{IssuanceSchedule, SegmentedCrlSet};
use crate::error::Error;
use crate::model::{Tick, TICKS_PER_DAY};

#[derive(Debug, Clone, PartialEq)]
pub struct LoadConfig {
    pub verifiers: u32,
    pub horizon_days: u32,
    pub period: Tick,
    pub validations_per_day: f64,
    pub seed: u64,
}

impl Default for LoadConfig {
    fn default() -> Self {
        LoadConfig {
            verifiers: 10_000,
            horizon_days: 30,
            period: 24,
            validations_per_day: 24.0,
            seed: 1,
        }
    }
}

/// Fetch requests per tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadProfile {
    pub requests: Vec<u64>,
    /// Ticks before this index are warm-up and excluded from statistics.
    pub warmup: usize,
}

impl LoadProfile {
    fn measured(&self) -> &[u64] {
        &self.requests[self.warmup.min(self.requests.len())..]
    }

    pub fn peak(&self) -> u64 {
        self.measured().iter().copied().max().unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        let m = self.measured();
        if m.is_empty() {
            0.0
        } else {
            m.iter().sum::<u64>() as f64 / m.len() as f64
        }
    }

    /// Share of measured ticks whose load exceeds `fraction` of the peak.
    pub fn fraction_above(&self, fraction: f64) -> f64 {
        let m = self.measured();
        let limit = fraction * self.peak() as f64;
        if m.is_empty() {
            return 0.0;
        }
        m.iter().filter(|&&r| r as f64 > limit).count() as f64 / m.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("tick,requests\n");
        for (t, r) in self.requests.iter().enumerate() {
            s.push_str(&format!("{t},{r}\n"));
        }
        s
    }
}

/// Drives validations day by day; `fetch(verifier, tick, rng)` returns
/// whether the validation caused a fetch.
fn drive<F>(cfg: &LoadConfig, rng: &mut ChaCha8Rng, mut fetch: F) -> Vec<u64>
where
    F: FnMut(usize, Tick, &mut ChaCha8Rng) -> bool,
{
    let end = cfg.horizon_days * TICKS_PER_DAY;
    let mut requests = vec![0u64; end as usize];
    let whole = cfg.validations_per_day.floor() as u32;
    let frac = cfg.validations_per_day.fract();
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); TICKS_PER_DAY as usize];
    for day in 0..cfg.horizon_days {
        buckets.iter_mut().for_each(Vec::clear);
        for v in 0..cfg.verifiers {
            let n = whole + rng.gen_bool(frac) as u32;
            for _ in 0..n {
                buckets[rng.gen_range(0..TICKS_PER_DAY) as usize].push(v);
            }
        }
        for slot in 0..TICKS_PER_DAY {
            let t = day * TICKS_PER_DAY + slot;
            let bucket = std::mem::take(&mut buckets[slot as usize]);
            for &v in &bucket {
                if fetch(v as usize, t, rng) {
                    requests[t as usize] += 1;
                }
            }
            buckets[slot as usize] = bucket;
        }
    }
    requests
}

/// Full CRLs issued `k` times per period, each valid for one period.
/// Verifiers start holding one of the `k` unexpired lists, chosen
/// uniformly.
pub fn over_issue_load(cfg: &LoadConfig, k: u32) -> Result<LoadProfile, Error> {
    let schedule = IssuanceSchedule::new(cfg.period, k, Vec::new())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let p = cfg.period as u64;
    let mut expiry: Vec<Tick> = (0..cfg.verifiers)
        .map(|_| {
            let j = rng.gen_range(0..k as u64);
            (p - j * p / k as u64) as Tick
        })
        .collect();
    let requests = drive(cfg, &mut rng, |v, t, _| {
        if t < expiry[v] {
            return false;
        }
        expiry[v] = schedule.issue_time(schedule.latest_index(t)) + cfg.period;
        true
    });
    Ok(LoadProfile {
        requests,
        warmup: cfg.period as usize,
    })
}

/// `segments` segments in `intervals` stagger groups; each validation
/// needs the segment of a uniformly drawn serial. Caches start holding the
/// current copy of every segment.
pub fn staggered_load(cfg: &LoadConfig, segments: usize, intervals: u32) -> Result<LoadProfile, Error> {
    if segments == 0 {
        return Err(Error::InvalidParameter("segment count must be positive".into()));
    }
    let schedule = IssuanceSchedule::evenly_staggered(cfg.period, intervals)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let first_expiry: Vec<Tick> = (0..segments)
        .map(|s| {
            let off = schedule.group_offset(schedule.group_of_segment(s, segments));
            if off > 0 {
                off
            } else {
                cfg.period
            }
        })
        .collect();
    let mut expiry: Vec<Vec<Tick>> = vec![first_expiry; cfg.verifiers as usize];
    let requests = drive(cfg, &mut rng, |v, t, rng| {
        let serial: u64 = rng.gen();
        let s = SegmentedCrlSet::segment_of(segments, serial);
        if t < expiry[v][s] {
            return false;
        }
        let issued = schedule.segment_issue_at_or_before(s, segments, t).unwrap_or(0);
        expiry[v][s] = issued + cfg.period;
        true
    });
    Ok(LoadProfile {
        requests,
        warmup: cfg.period as usize,
    })
}
