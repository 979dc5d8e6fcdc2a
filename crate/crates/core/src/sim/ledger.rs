//! Per-link, per-tick traffic counters.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::model::Tick;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Link {
    CaToDirectory,
    UserToDirectory,
    DirectoryToUser,
    /// The certificate being validated.
    CertificateFetch,
    /// Forwarding between status responders.
    ResponderHop,
}

impl Link {
    pub const ALL: [Link; 5] = [
        Link::CaToDirectory,
        Link::UserToDirectory,
        Link::DirectoryToUser,
        Link::CertificateFetch,
        Link::ResponderHop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Link::CaToDirectory => "ca_to_directory",
            Link::UserToDirectory => "user_to_directory",
            Link::DirectoryToUser => "directory_to_user",
            Link::CertificateFetch => "certificate_fetch",
            Link::ResponderHop => "responder_hop",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counter {
    pub requests: u64,
    pub bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrafficLedger {
    entries: BTreeMap<(Link, Tick), Counter>,
}

impl TrafficLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, link: Link, tick: Tick, requests: u64, bytes: u64) {
        let c = self.entries.entry((link, tick)).or_default();
        c.requests += requests;
        c.bytes += bytes;
    }

    pub fn entries(&self) -> impl Iterator<Item = (Link, Tick, Counter)> + '_ {
        self.entries.iter().map(|(&(l, t), &c)| (l, t, c))
    }

    pub fn link_total(&self, link: Link) -> Counter {
        self.entries
            .range((link, Tick::MIN)..=(link, Tick::MAX))
            .fold(Counter::default(), |acc, (_, c)| Counter {
                requests: acc.requests + c.requests,
                bytes: acc.bytes + c.bytes,
            })
    }

    pub fn total_bytes(&self) -> u64 {
        self.entries.values().map(|c| c.bytes).sum()
    }

    /// Highest request count on `link` in any single tick.
    pub fn peak_requests(&self, link: Link) -> u64 {
        self.entries
            .range((link, Tick::MIN)..=(link, Tick::MAX))
            .map(|(_, c)| c.requests)
            .max()
            .unwrap_or(0)
    }

    /// Requests on `link` for each tick in `[from, to)`.
    pub fn requests_per_tick(&self, link: Link, from: Tick, to: Tick) -> Vec<u64> {
        let mut out = vec![0; to.saturating_sub(from) as usize];
        for (&(_, t), c) in self.entries.range((link, from)..(link, to)) {
            out[(t - from) as usize] = c.requests;
        }
        out
    }

    /// `link,tick,requests,bytes`, one row per nonzero cell.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("link,tick,requests,bytes\n");
        for (&(l, t), c) in &self.entries {
            let _ = writeln!(s, "{},{},{},{}", l.name(), t, c.requests, c.bytes);
        }
        s
    }
}
