//! Acceptance criteria. Runs as a plain binary under `cargo test` and
//! prints one PASS/FAIL line per criterion; exits nonzero on any FAIL.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use certrev::authdict::{tt_verify, TtProof, TtVerdict, TwoThreeTree};
use certrev::crl::{issue_crl, issue_delta, reconstruct, IssuanceSchedule, OverIssuer};
use certrev::crs::{crs_verify, CrsAnswer, CrsAuthority, CrsDirectory, CrsVerdict};
use certrev::crt::{crt_build_statements, crt_build_tree, crt_lookup, crt_verify, Bound, CaHash, CrtVerdict, Statement};
use certrev::demo::{demo_crt, demo_hcrs, parse_revoked};
use certrev::hcrs::{hcrs_cover, NodeVec};
use certrev::model::{day_start, CertRecord, RevocationState, Status, Tick};
use certrev::ocsp::{NetworkConfig, ResponderNetwork, StatusRequest};
use certrev::primitives::Digest;
use certrev::sim::load::{over_issue_load, staggered_load, LoadConfig};
use certrev::sim::run::cost_of;
use certrev::sim::{cost_report, run, Link, Scenario, SchemeKind, VerifierCache};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1

fn crt_worked_example() -> Outcome {
    let d = demo_crt(&[]).map_err(|e| e.to_string())?;
    ensure(d.statements.len() == 11, || format!("{} statements", d.statements.len()))?;
    let want = Statement::CaRange {
        ca: d.cas[0],
        x_low: Bound::Finite(344),
        x_high: Bound::PosInf,
        revoked_iff: Some(344),
    };
    ensure(d.statement == want, || format!("statement {:?}", d.statement))?;
    // Leaf level: the statement and its sibling are the pair N_{0,4}, N_{0,5}
    // folded as H(N_{0,4}|N_{0,5}); above it the co-path is exact.
    let leaf_pair: BTreeSet<(usize, usize)> = [(0, d.leaf_index), d.supporting[0]].into();
    ensure(leaf_pair == [(0, 4), (0, 5)].into(), || format!("leaf pair {leaf_pair:?}"))?;
    ensure(d.supporting[1..] == [(1, 3), (2, 0), (3, 1)], || format!("supporting {:?}", d.supporting))?;
    let eqs: Vec<&str> = d.fold.iter().map(|f| f.0.as_str()).collect();
    let expected = [
        "N_{1,2} = H(N_{0,4}|N_{0,5})",
        "N_{2,1} = H(N_{1,2}|N_{1,3})",
        "N_{3,0} = H(N_{2,0}|N_{2,1})",
        "N_{4,0} = H(N_{3,0}|N_{3,1})",
    ];
    ensure(eqs == expected, || format!("fold {eqs:?}"))?;
    ensure(d.fold[3].1 == d.root, || "fold does not reach the root".into())?;
    ensure(d.verdict == CrtVerdict::Valid, || format!("verdict {:?}", d.verdict))?;
    Ok("11 statements; (CA_1, 600) -> [344, inf) revoked iff 344; co-path N_{0,5} N_{1,3} N_{2,0} N_{3,1}; four-step fold reaches N_{4,0}".into())
}

// 2

/// Every antichain of clean nodes whose subtrees partition the valid
/// leaves, by exhaustive search.
fn all_exact_covers(depth: u8, revoked: &BTreeSet<NodeVec>) -> Vec<BTreeSet<NodeVec>> {
    let n = 1u64 << depth;
    let revoked_mask: u64 = revoked.iter().map(|l| 1u64 << l.bits()).sum();
    let valid = (if n == 64 { u64::MAX } else { (1u64 << n) - 1 }) & !revoked_mask;
    let mut clean = Vec::new();
    for len in 0..=depth {
        for bits in 0..1u64 << len {
            let span = depth - len;
            let block = if span == 6 { u64::MAX } else { ((1u64 << (1u64 << span)) - 1) << (bits << span) };
            if block & revoked_mask == 0 {
                clean.push((NodeVec::new(bits, len), block));
            }
        }
    }
    fn go(i: usize, used: u64, valid: u64, clean: &[(NodeVec, u64)], cur: &mut Vec<NodeVec>, out: &mut Vec<BTreeSet<NodeVec>>) {
        if used == valid {
            out.push(cur.iter().copied().collect());
            return;
        }
        if i == clean.len() {
            return;
        }
        let (node, block) = clean[i];
        if block & used == 0 {
            cur.push(node);
            go(i + 1, used | block, valid, clean, cur, out);
            cur.pop();
        }
        go(i + 1, used, valid, clean, cur, out);
    }
    let mut out = Vec::new();
    go(0, 0, valid, &clean, &mut Vec::new(), &mut out);
    out
}

fn hcrs_worked_example() -> Outcome {
    let revoked = parse_revoked("0100,0101,1111").map_err(|e| e.to_string())?;
    let d = demo_hcrs(revoked.clone());
    let want: BTreeSet<NodeVec> = ["00", "011", "10", "110", "1110"]
        .iter()
        .map(|s| NodeVec::parse(s).unwrap())
        .collect();
    ensure(d.cover == want, || format!("cover {:?}", d.cover))?;
    ensure(d.ok(), || "cover fails a condition".into())?;
    let covers = all_exact_covers(4, &revoked);
    let min = covers.iter().map(BTreeSet::len).min().unwrap_or(0);
    let minimal: Vec<_> = covers.iter().filter(|c| c.len() == min).collect();
    ensure(min == 5, || format!("brute-force minimum {min}"))?;
    ensure(minimal.len() == 1 && *minimal[0] == want, || format!("{} minimum covers", minimal.len()))?;
    Ok(format!(
        "cover {{00, 011, 10, 110, 1110}}; brute force over {} exact covers: minimum 5, unique",
        covers.len()
    ))
}

// 3

/// Minimum number of aligned dyadic blocks partitioning the valid leaves,
/// by dynamic programming over leaf positions.
fn interval_minimum(depth: u8, revoked: &BTreeSet<u64>) -> usize {
    let n = 1usize << depth;
    let mut best = vec![usize::MAX; n + 1];
    best[n] = 0;
    for p in (0..n).rev() {
        if revoked.contains(&(p as u64)) {
            // a revoked leaf is skipped, never covered
            best[p] = best[p + 1];
            continue;
        }
        let mut size = 1;
        while p % size == 0 && p + size <= n && (p..p + size).all(|q| !revoked.contains(&(q as u64))) {
            if best[p + size] != usize::MAX {
                best[p] = best[p].min(1 + best[p + size]);
            }
            size *= 2;
        }
    }
    best[0]
}

fn hcrs_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut checked = 0;
    let mut exact = 0;
    for l in 1..=10u8 {
        let n = 1u64 << l;
        for _ in 0..200 {
            let r = rng.gen_range(1..=n / 2);
            let mut all: Vec<u64> = (0..n).collect();
            all.shuffle(&mut rng);
            let serials: BTreeSet<u64> = all[..r as usize].iter().copied().collect();
            let revoked: BTreeSet<NodeVec> = serials.iter().map(|&s| NodeVec::leaf(s, l)).collect();
            let cover = hcrs_cover(l, &revoked);
            let bound = r * (n as f64 / r as f64).log2().ceil() as u64;
            ensure(cover.len() as u64 <= bound, || format!("l={l} R={r}: |cover| {} > {bound}", cover.len()))?;
            // exact partition of the valid leaves
            let mut covered = BTreeSet::new();
            for c in &cover {
                let span = l - c.len();
                for s in c.bits() << span..(c.bits() + 1) << span {
                    ensure(covered.insert(s), || format!("l={l}: overlapping cover"))?;
                }
            }
            ensure(covered.iter().all(|s| !serials.contains(s)) && covered.len() as u64 + r == n, || {
                format!("l={l} R={r}: cover is not exact")
            })?;
            if n <= 64 {
                let min = interval_minimum(l, &serials);
                ensure(cover.len() == min, || format!("l={l} R={r}: |cover| {} vs minimum {min}", cover.len()))?;
                exact += 1;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} revoked sets, zero bound violations; {exact} sets with N <= 64 match the minimum"))
}

// 4

fn crs_end_to_end() -> Outcome {
    const D: u32 = 365;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut state = RevocationState::new();
    let mut ca = CrsAuthority::new(1, 100, 10);
    for s in 0..1000 {
        let cert = CertRecord::new(s, 1, 0, D);
        state.add_cert(cert).map_err(|e| e.to_string())?;
        ca.issue(cert, &mut rng).map_err(|e| e.to_string())?;
    }
    for s in rand::seq::index::sample(&mut rng, 1000, 100) {
        let at = rng.gen_range(1..day_start(D));
        state.revoke(s as u64, at, 1).map_err(|e| e.to_string())?;
    }
    let mut dir = CrsDirectory::new();
    let (mut valid, mut revoked) = (0u64, 0u64);
    for i in 1..=D {
        let up = ca.daily_update(&state, i, i == 1).map_err(|e| e.to_string())?;
        dir.ingest(&up).map_err(|e| format!("day {i}: {e}"))?;
        for s in 0..1000 {
            let ext = ca.extension(s).unwrap();
            let CrsAnswer::Value(v) = dir.answer(s) else {
                return Err(format!("day {i}: no value for {s}"));
            };
            let is_revoked = state.revocation(s).is_some_and(|r| r.at <= day_start(i));
            let got = crs_verify(ext, &v, i);
            let want = if is_revoked { CrsVerdict::Revoked } else { CrsVerdict::Valid };
            ensure(got == want, || format!("day {i} serial {s}: {got:?}, expected {want:?}"))?;
            if is_revoked {
                revoked += 1;
            } else {
                valid += 1;
            }
        }
    }
    for _ in 0..1000 {
        let s = rng.gen_range(0..1000);
        let i = rng.gen_range(1..=D);
        let v = Digest::random(ca.extension(s).unwrap().y_anchor.width(), &mut rng);
        let got = crs_verify(ca.extension(s).unwrap(), &v, i);
        ensure(got == CrsVerdict::Invalid, || format!("random digest accepted: {got:?}"))?;
    }
    Ok(format!("{valid} valid and {revoked} revoked day checks over 365 days; 1000 random digests Invalid"))
}

// 5

fn crt_partition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let space: Vec<CaHash> = (0..64).map(CaHash::from_u64).collect();
    let mut points = 0u64;
    for _ in 0..50 {
        let k = rng.gen_range(0..=12);
        let mut cas: Vec<CaHash> = space.choose_multiple(&mut rng, k).copied().collect();
        cas.sort();
        let config: Vec<(CaHash, Vec<u64>)> = cas
            .iter()
            .map(|c| {
                let m = rng.gen_range(0..=12);
                let mut r: Vec<u64> = rand::seq::index::sample(&mut rng, 256, m).into_iter().map(|x| x as u64).collect();
                r.sort();
                (*c, r)
            })
            .collect();
        let revoked: BTreeMap<CaHash, BTreeSet<u64>> = config.iter().map(|(c, r)| (*c, r.iter().copied().collect())).collect();
        let tree = crt_build_tree(crt_build_statements(&config).map_err(|e| e.to_string())?, 32).map_err(|e| e.to_string())?;
        let root = tree.root();
        for ca in &space {
            for x in 0..256u64 {
                let matching = tree.statements.iter().filter(|s| s.contains(ca, x)).count();
                ensure(matching == 1, || format!("{matching} statements match ({ca:?}, {x})"))?;
                let want = match revoked.get(ca) {
                    None => CrtVerdict::UnknownCa,
                    Some(r) if r.contains(&x) => CrtVerdict::Revoked,
                    Some(_) => CrtVerdict::Valid,
                };
                let got = crt_verify(&root, &crt_lookup(&tree, ca, x), ca, x);
                ensure(got == want, || format!("({ca:?}, {x}): {got:?}, expected {want:?}"))?;
                points += 1;
            }
        }
    }
    Ok(format!("{points} points over 50 configurations: each in exactly one statement, verdicts correct"))
}

// 6

fn two_three_tree() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut t = TwoThreeTree::new(32);
    let mut oracle: BTreeMap<u64, Tick> = BTreeMap::new();
    let mut nonmember = 0u64;
    let mut worst = 0usize;
    for op in 0..10_000u32 {
        let k = rng.gen_range(0..3000u64);
        let depth_before = t.depth() as usize;
        let rep = if oracle.contains_key(&k) && rng.gen_bool(0.45) {
            oracle.remove(&k);
            t.delete(k)
        } else if !oracle.contains_key(&k) {
            oracle.insert(k, op);
            t.insert(k, op)
        } else {
            continue;
        }
        .map_err(|e| format!("op {op}: {e}"))?;
        t.check_invariants().map_err(|e| format!("op {op}: {e}"))?;
        let bound = 3 * (depth_before.max(t.depth() as usize) + 1);
        ensure(rep.count() <= bound, || format!("op {op}: {} recomputed > {bound}", rep.count()))?;
        worst = worst.max(rep.count());
        if op % 10 == 0 {
            let got: Vec<(u64, Tick)> = t.entries();
            let want: Vec<(u64, Tick)> = oracle.iter().map(|(k, v)| (*k, *v)).collect();
            ensure(got == want, || format!("op {op}: leaf set differs from oracle"))?;
        }
        if op % 50 == 0 {
            let root = t.root_hash();
            for _ in 0..20 {
                let q = rng.gen_range(0..3100u64);
                let want = if oracle.contains_key(&q) { TtVerdict::Revoked } else { TtVerdict::Valid };
                let got = tt_verify(&root, &t.prove(q), q);
                ensure(got == want, || format!("op {op}: query {q} {got:?}"))?;
                nonmember += (want == TtVerdict::Valid) as u64;
            }
        }
    }
    let root = t.root_hash();
    let q = (0..).find(|q| !oracle.contains_key(q) && oracle.range(..q).next().is_some()).unwrap();
    let bytes = t.prove(q).encode(32);
    for bit in 0..bytes.len() * 8 {
        let mut b = bytes.clone();
        b[bit / 8] ^= 1 << (bit % 8);
        let v = TtProof::decode(&b).map_or(TtVerdict::Invalid, |(p, _)| tt_verify(&root, &p, q));
        ensure(v == TtVerdict::Invalid, || format!("bit {bit} flipped still verifies"))?;
    }
    Ok(format!(
        "10000 ops, invariants and oracle hold, max {worst} digests per op, {nonmember} non-membership proofs verified, {} flipped bits all Invalid",
        bytes.len() * 8
    ))
}

// 7

fn peak_rate() -> Outcome {
    let cfg = LoadConfig::default();
    let p1 = over_issue_load(&cfg, 1).map_err(|e| e.to_string())?.peak() as f64;
    let mut parts = vec![format!("peak(1)={p1}")];
    for k in [2u32, 4] {
        let pk = over_issue_load(&cfg, k).map_err(|e| e.to_string())?.peak() as f64;
        let rel = pk / (p1 / k as f64) - 1.0;
        parts.push(format!("peak({k})={pk} ({:+.1}%)", rel * 100.0));
        ensure(rel.abs() <= 0.15, || parts.join(", "))?;
    }
    Ok(parts.join(", "))
}

// 8

fn staggered_trend() -> Outcome {
    let cfg = LoadConfig::default();
    let mut f = Vec::new();
    for m in [1u32, 2, 4] {
        f.push(staggered_load(&cfg, 4, m).map_err(|e| e.to_string())?.fraction_above(0.5));
    }
    let text = format!("ticks above half peak: m=1 {:.3}, m=2 {:.3}, m=4 {:.3}", f[0], f[1], f[2]);
    ensure(f[0] < f[1] && f[1] < f[2], || text.clone())?;
    Ok(text)
}

// 9

fn delta_trajectory() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut state = RevocationState::new();
    for s in 0..3000u64 {
        let issue = rng.gen_range(0..50);
        let validity = rng.gen_range(5..30);
        state.add_cert(CertRecord::new(s, 3, issue, validity)).map_err(|e| e.to_string())?;
        if rng.gen_bool(0.3) {
            let from = day_start(issue);
            let to = day_start(issue + validity + 1);
            state.revoke(s, rng.gen_range(from..to), rng.gen_range(0..=10)).map_err(|e| e.to_string())?;
        }
    }
    let horizon = day_start(60);
    let mut compared = 0u64;
    let same = |a: &[certrev::crl::CrlEntry], b: &[certrev::crl::CrlEntry]| {
        let x: BTreeSet<_> = a.iter().collect();
        let y: BTreeSet<_> = b.iter().collect();
        x == y
    };

    // daily base, hourly deltas
    let daily = IssuanceSchedule::simple(24);
    let mut base = issue_crl(&state, 3, 0, &daily);
    for t in 0..horizon {
        if t % 24 == 0 {
            base = issue_crl(&state, 3, t, &daily);
        }
        let delta = issue_delta(&state, &base, t, &IssuanceSchedule::simple(1)).map_err(|e| e.to_string())?;
        let full = issue_crl(&state, 3, t, &daily);
        let rebuilt = reconstruct(&base, &delta).map_err(|e| e.to_string())?;
        ensure(same(&rebuilt, &full.entries), || format!("tick {t}: reconstruction differs"))?;
        compared += 1;
    }

    // over-issued full lists, each delta against the oldest unexpired one
    for k in [2u32, 4, 6] {
        let schedule = IssuanceSchedule::new(24, k, vec![]).map_err(|e| e.to_string())?;
        let mut issuer = OverIssuer::new(3, schedule.clone());
        for t in 0..horizon {
            for iss in issuer.advance(&state, t, true) {
                let delta = iss.delta.expect("delta requested");
                let base = issuer.find(delta.base_ref).map_err(|e| e.to_string())?;
                let oldest = issuer.oldest_unexpired(delta.this_update).unwrap().this_update;
                ensure(base.this_update == oldest, || format!("k={k} tick {t}: base is not the oldest unexpired"))?;
                let rebuilt = reconstruct(base, &delta).map_err(|e| e.to_string())?;
                let full = issue_crl(&state, 3, delta.this_update, &schedule);
                ensure(same(&rebuilt, &full.entries), || format!("k={k} tick {t}: reconstruction differs"))?;
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} base+delta reconstructions over 60 days equal the full list"))
}

// 10

fn reference_scenario(kind: SchemeKind, per_day: f64) -> Scenario {
    Scenario {
        scheme: kind,
        population: 30_000,
        users_per_ca: 30_000,
        revoked_fraction: 0.1,
        crl_period_hours: 84,
        validations_per_user_per_day: per_day,
        cost_per_kb: 0.02,
        horizon_days: 2,
        verifier_cache: VerifierCache::None,
        ..Default::default()
    }
}

fn cost_model() -> Outcome {
    let mut shares = Vec::new();
    let mut crl_down = 0;
    for v in [5.0, 20.0, 100.0] {
        let sc = reference_scenario(SchemeKind::Crl, v);
        let r = run(&sc).map_err(|e| e.to_string())?;
        ensure(r.audit.incorrect == 0, || format!("{} incorrect verdicts", r.audit.incorrect))?;
        let rep = cost_report(&r.ledger, &sc);
        let mut total = 0u64;
        for l in &rep.links {
            let cells: u64 = r.ledger.entries().filter(|e| e.0 == l.link).map(|e| e.2.bytes).sum();
            ensure(cells == l.counter.bytes, || format!("{}: aggregate differs from cells", l.link.name()))?;
            let want = cells as f64 / 1024.0 * sc.cost_per_kb;
            ensure((l.cost - want).abs() <= 1e-9 * want.max(1.0), || format!("{}: cost {} vs {want}", l.link.name(), l.cost))?;
            total += cells;
        }
        ensure(total == rep.total_bytes, || "total bytes differ from link sum".into())?;
        ensure((rep.total_cost - cost_of(total, sc.cost_per_kb)).abs() <= 1e-9 * rep.total_cost.max(1.0), || {
            "total cost differs".into()
        })?;
        shares.push(rep.status_share);
        if v == 5.0 {
            crl_down = r.ledger.link_total(Link::DirectoryToUser).bytes;
        }
    }
    let share_text = format!("status share {:.4} / {:.4} / {:.4}", shares[0], shares[1], shares[2]);
    ensure(shares.windows(2).all(|w| w[0] <= w[1]), || share_text.clone())?;
    let sc = reference_scenario(SchemeKind::Crs, 5.0);
    let r = run(&sc).map_err(|e| e.to_string())?;
    ensure(r.audit.incorrect == 0, || "CRS verdicts incorrect".into())?;
    let crs_down = r.ledger.link_total(Link::DirectoryToUser).bytes;
    let ratio = crl_down as f64 / crs_down.max(1) as f64;
    ensure(ratio >= 100.0, || format!("CRL/CRS directory-to-user ratio {ratio:.1}"))?;
    Ok(format!("cost = KB x rate on every link; {share_text} at 5/20/100 per day; CRL/CRS directory-to-user bytes {ratio:.0}x"))
}

// 11

fn ocsp_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut state = RevocationState::new();
    for s in 0..500u64 {
        let issue = rng.gen_range(0..10);
        let validity = rng.gen_range(15..40);
        state.add_cert(CertRecord::new(s, 2, issue, validity)).map_err(|e| e.to_string())?;
        if rng.gen_bool(0.2) {
            state.revoke(s, rng.gen_range(day_start(issue)..day_start(30)), 1).map_err(|e| e.to_string())?;
        }
    }
    let mut queries: Vec<(Tick, StatusRequest)> = (0..10_000)
        .map(|_| {
            let issuer = if rng.gen_bool(0.05) { 7 } else { 2 };
            let req = StatusRequest {
                issuer,
                serial: rng.gen_range(0..520),
                max_age: *[0, 1, 4, 24, 72].choose(&mut rng).unwrap(),
            };
            (rng.gen_range(0..day_start(30)), req)
        })
        .collect();
    queries.sort_by_key(|q| q.0);

    let mut upstream = Vec::new();
    for ttl in [None, Some(0), Some(2), Some(8), Some(32), Some(128)] {
        let config = NetworkConfig {
            cache_ttl: ttl,
            ..Default::default()
        };
        let mut net = ResponderNetwork::chain(config, 2, state.clone(), &[1, 2, 3, 4]).map_err(|e| e.to_string())?;
        let mut sent = 0usize;
        for (now, req) in &queries {
            let (resp, traffic) = net.handle(1, req, *now);
            sent += traffic.upstream_requests();
            ensure(resp.verify_signature(), || "bad response signature".into())?;
            let want = if req.issuer == 2 { state.status(req.serial, resp.produced_at) } else { Status::Unknown };
            ensure(resp.verdict == want, || format!("ttl {ttl:?} tick {now}: {:?} vs {want:?}", resp.verdict))?;
            ensure(resp.age_at(*now) <= req.max_age, || format!("ttl {ttl:?}: response older than max_age"))?;
        }
        upstream.push((ttl, sent));
    }
    let text: Vec<String> = upstream
        .iter()
        .map(|(t, n)| format!("{}:{n}", t.map_or("off".to_string(), |t| t.to_string())))
        .collect();
    ensure(upstream.windows(2).all(|w| w[0].1 >= w[1].1), || format!("upstream requests {}", text.join(" ")))?;
    Ok(format!("3-hop chain, 10000 queries per TTL, verdicts and ages correct; upstream requests by TTL {}", text.join(" ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("CRT worked example", crt_worked_example),
        ("HCRS worked example", hcrs_worked_example),
        ("HCRS cover bound", hcrs_bound),
        ("CRS end to end", crs_end_to_end),
        ("CRT partition", crt_partition),
        ("2-3 tree properties", two_three_tree),
        ("peak-rate proportionality", peak_rate),
        ("staggered-segment trend", staggered_trend),
        ("delta reconstruction", delta_trajectory),
        ("cost-model properties", cost_model),
        ("OCSP correctness", ocsp_chain),
    ];
    let results: Vec<(Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                s.spawn(move || {
                    let start = Instant::now();
                    let r = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
                    (r, start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for (i, ((name, _), (r, secs))) in criteria.iter().zip(results).enumerate() {
        match r {
            Ok(detail) => println!("PASS criterion {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
