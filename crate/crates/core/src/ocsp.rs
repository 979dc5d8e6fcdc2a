//! Online status responders with caching and forwarding.
//!
//! Responders form an explicit digraph. A responder co-located with a CA
//! answers from that CA's revocation state and never forwards; any other
//! responder serves fresh cache entries, otherwise asks its neighbours in
//! order and caches the answer on the way back.

use std::collections::{BTreeMap, HashMap};

use crate::codec::{self, Reader};
use crate::error::Error;
use crate::model::{CaId, RevocationState, Serial, Status, Tick};
use crate::primitives::Signature;

pub type ResponderId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StatusRequest {
    pub issuer: CaId,
    pub serial: Serial,
    /// Oldest acceptable response, in ticks.
    pub max_age: Tick,
}

impl StatusRequest {
    pub const ENCODED_LEN: usize = 16;

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::ENCODED_LEN);
        codec::put_u32(&mut out, self.issuer);
        codec::put_u64(&mut out, self.serial);
        codec::put_u32(&mut out, self.max_age);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        let req = StatusRequest {
            issuer: r.u32()?,
            serial: r.u64()?,
            max_age: r.u32()?,
        };
        r.finish()?;
        Ok(req)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatusResponse {
    pub issuer: CaId,
    pub serial: Serial,
    pub verdict: Status,
    pub produced_at: Tick,
    pub responder: ResponderId,
    pub signature: Signature,
}

fn status_octet(s: Status) -> u8 {
    match s {
        Status::Good => 0,
        Status::Revoked => 1,
        Status::Unknown => 2,
    }
}

impl StatusResponse {
    pub const ENCODED_LEN: usize = 4 + 8 + 1 + 4 + 4 + Signature::ENCODED_LEN;

    fn body(issuer: CaId, serial: Serial, verdict: Status, produced_at: Tick, responder: ResponderId) -> Vec<u8> {
        let mut b = Vec::with_capacity(21);
        codec::put_u32(&mut b, issuer);
        codec::put_u64(&mut b, serial);
        codec::put_u8(&mut b, status_octet(verdict));
        codec::put_u32(&mut b, produced_at);
        codec::put_u32(&mut b, responder);
        b
    }

    fn new(req: &StatusRequest, verdict: Status, produced_at: Tick, responder: ResponderId) -> Self {
        let body = Self::body(req.issuer, req.serial, verdict, produced_at, responder);
        StatusResponse {
            issuer: req.issuer,
            serial: req.serial,
            verdict,
            produced_at,
            responder,
            signature: Signature::sign(responder, &body),
        }
    }

    pub fn verify_signature(&self) -> bool {
        let body = Self::body(self.issuer, self.serial, self.verdict, self.produced_at, self.responder);
        self.signature.verify(self.responder, &body)
    }

    pub fn age_at(&self, now: Tick) -> Tick {
        now.saturating_sub(self.produced_at)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Self::body(self.issuer, self.serial, self.verdict, self.produced_at, self.responder);
        self.signature.encode(&mut out);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, Error> {
        let mut r = Reader::new(bytes);
        let issuer = r.u32()?;
        let serial = r.u64()?;
        let verdict = match r.u8()? {
            0 => Status::Good,
            1 => Status::Revoked,
            2 => Status::Unknown,
            _ => return Err(Error::Malformed("bad status octet".into())),
        };
        let produced_at = r.u32()?;
        let responder = r.u32()?;
        let signature = Signature::decode(&mut r)?;
        r.finish()?;
        Ok(StatusResponse {
            issuer,
            serial,
            verdict,
            produced_at,
            responder,
            signature,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct ResponderNode {
    pub id: ResponderId,
    pub cache: HashMap<(CaId, Serial), StatusResponse>,
    pub neighbours: Vec<ResponderId>,
    /// CA whose database this responder reads directly.
    pub co_located: Option<CaId>,
}

/// One message crossing a responder link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hop {
    pub from: ResponderId,
    pub to: ResponderId,
    pub bytes: usize,
    pub is_request: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Traffic {
    pub hops: Vec<Hop>,
    /// Requests answered from a co-located responder's database.
    pub authoritative_lookups: usize,
    /// Simulated service latency accumulated along the path.
    pub latency: Tick,
}

impl Traffic {
    /// Requests sent from one responder to another.
    pub fn upstream_requests(&self) -> usize {
        self.hops.iter().filter(|h| h.is_request).count()
    }

    pub fn bytes(&self) -> usize {
        self.hops.iter().map(|h| h.bytes).sum()
    }
}

#[derive(Debug, Clone)]
pub struct NetworkConfig {
    /// Lifetime of cache entries; `None` disables caching entirely.
    pub cache_ttl: Option<Tick>,
    pub hop_limit: u8,
    /// Per-responder service time, reported as latency only.
    pub service_ticks: Tick,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            cache_ttl: Some(24),
            hop_limit: 8,
            service_ticks: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResponderNetwork {
    pub config: NetworkConfig,
    nodes: BTreeMap<ResponderId, ResponderNode>,
    cas: BTreeMap<CaId, RevocationState>,
}

impl ResponderNetwork {
    pub fn new(config: NetworkConfig) -> Self {
        ResponderNetwork {
            config,
            nodes: BTreeMap::new(),
            cas: BTreeMap::new(),
        }
    }

    pub fn add_ca(&mut self, ca: CaId, state: RevocationState) {
        self.cas.insert(ca, state);
    }

    pub fn ca_state_mut(&mut self, ca: CaId) -> Option<&mut RevocationState> {
        self.cas.get_mut(&ca)
    }

    pub fn ca_state(&self, ca: CaId) -> Option<&RevocationState> {
        self.cas.get(&ca)
    }

    pub fn add_responder(&mut self, id: ResponderId, co_located: Option<CaId>, neighbours: Vec<ResponderId>) -> Result<(), Error> {
        if co_located.is_some() && !neighbours.is_empty() {
            return Err(Error::InvalidParameter("a co-located responder never forwards".into()));
        }
        self.nodes.insert(
            id,
            ResponderNode {
                id,
                cache: HashMap::new(),
                neighbours,
                co_located,
            },
        );
        Ok(())
    }

    pub fn node(&self, id: ResponderId) -> Option<&ResponderNode> {
        self.nodes.get(&id)
    }

    /// Straight chain `ids[0] -> ids[1] -> ...`, the last co-located with `ca`.
    pub fn chain(config: NetworkConfig, ca: CaId, state: RevocationState, ids: &[ResponderId]) -> Result<Self, Error> {
        let mut net = ResponderNetwork::new(config);
        net.add_ca(ca, state);
        for (i, &id) in ids.iter().enumerate() {
            if i + 1 == ids.len() {
                net.add_responder(id, Some(ca), vec![])?;
            } else {
                net.add_responder(id, None, vec![ids[i + 1]])?;
            }
        }
        Ok(net)
    }

    /// Answers `req` arriving at responder `at` at tick `now`.
    pub fn handle(&mut self, at: ResponderId, req: &StatusRequest, now: Tick) -> (StatusResponse, Traffic) {
        let mut traffic = Traffic::default();
        let resp = self.handle_inner(at, req, now, 0, &mut traffic);
        (resp, traffic)
    }

    fn handle_inner(&mut self, at: ResponderId, req: &StatusRequest, now: Tick, hops: u8, traffic: &mut Traffic) -> StatusResponse {
        traffic.latency += self.config.service_ticks;
        let ttl = self.config.cache_ttl;
        let Some(node) = self.nodes.get(&at) else {
            return StatusResponse::new(req, Status::Unknown, now, at);
        };
        if let (Some(ttl), Some(hit)) = (ttl, node.cache.get(&(req.issuer, req.serial))) {
            let age = hit.age_at(now);
            if age <= req.max_age && age <= ttl {
                return *hit;
            }
        }
        if let Some(ca) = node.co_located {
            let verdict = if ca == req.issuer {
                traffic.authoritative_lookups += 1;
                self.cas.get(&ca).map_or(Status::Unknown, |s| s.status(req.serial, now))
            } else {
                Status::Unknown
            };
            let resp = StatusResponse::new(req, verdict, now, at);
            self.store(at, resp);
            return resp;
        }
        if hops >= self.config.hop_limit {
            return StatusResponse::new(req, Status::Unknown, now, at);
        }
        for next in node.neighbours.clone() {
            traffic.hops.push(Hop {
                from: at,
                to: next,
                bytes: StatusRequest::ENCODED_LEN,
                is_request: true,
            });
            let resp = self.handle_inner(next, req, now, hops + 1, traffic);
            traffic.hops.push(Hop {
                from: next,
                to: at,
                bytes: StatusResponse::ENCODED_LEN,
                is_request: false,
            });
            if resp.verdict != Status::Unknown {
                self.store(at, resp);
                return resp;
            }
        }
        StatusResponse::new(req, Status::Unknown, now, at)
    }

    fn store(&mut self, at: ResponderId, resp: StatusResponse) {
        if self.config.cache_ttl.is_none() || resp.verdict == Status::Unknown {
            return;
        }
        if let Some(n) = self.nodes.get_mut(&at) {
            n.cache.insert((resp.issuer, resp.serial), resp);
        }
    }

    /// Evicts entries older than the cache TTL at every responder.
    pub fn invalidate_on_update(&mut self, now: Tick) {
        let ttl = self.config.cache_ttl.unwrap_or(0);
        for n in self.nodes.values_mut() {
            n.cache.retain(|_, r| r.age_at(now) <= ttl);
        }
    }

    pub fn cache_len(&self, id: ResponderId) -> usize {
        self.nodes.get(&id).map_or(0, |n| n.cache.len())
    }
}
