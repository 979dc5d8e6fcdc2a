//! The two worked examples: a three-CA revocation tree and a 16-leaf
//! hierarchical chain tree.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::crt::{crt_build_statements, crt_build_tree, crt_lookup, crt_verify, fold_proof, CaHash, CrtVerdict, Side, Statement};
use crate::error::Error;
use crate::hcrs::{dirty_nodes, hcrs_cover, NodeVec};
use crate::primitives::{Digest, HashMode};

pub const CRT_QUERY_SERIAL: u64 = 600;

#[derive(Debug, Clone)]
pub struct CrtDemo {
    pub text: String,
    pub cas: Vec<CaHash>,
    pub statements: Vec<Statement>,
    /// Statement returned for (CA_1, 600) and its leaf index.
    pub statement: Statement,
    pub leaf_index: usize,
    /// (level, index) of each supporting node, bottom-up.
    pub supporting: Vec<(usize, usize)>,
    /// Each fold step as text, e.g. `N_{1,2} = H(N_{0,4}|N_{0,5})`, with
    /// the value it produced.
    pub fold: Vec<(String, Digest)>,
    pub root: Digest,
    pub verdict: CrtVerdict,
}

impl CrtDemo {
    pub fn ok(&self) -> bool {
        self.verdict == CrtVerdict::Valid && self.fold.last().map(|f| f.1) == Some(self.root)
    }
}

fn label(cas: &[CaHash], h: &CaHash) -> String {
    cas.iter()
        .position(|c| c == h)
        .map_or_else(|| h.to_hex(), |i| format!("CA_{}", i + 1))
}

/// Three CAs whose key hashes sort as CA_1 < CA_2 < CA_3; CA_1 revoked
/// 156, 343 and 344, CA_2 nothing, CA_3 987. `extra` adds revocations
/// `(ca_number, serial)` before building.
pub fn demo_crt(extra: &[(usize, u64)]) -> Result<CrtDemo, Error> {
    let width = HashMode::Modern.width();
    let mut cas: Vec<CaHash> = ["CA_1", "CA_2", "CA_3"]
        .iter()
        .map(|n| CaHash::of_public_key(n.as_bytes()))
        .collect();
    cas.sort();
    let mut revoked: Vec<BTreeSet<u64>> = vec![[156, 343, 344].into(), BTreeSet::new(), [987].into()];
    for &(n, s) in extra {
        let set = revoked
            .get_mut(n.wrapping_sub(1))
            .ok_or_else(|| Error::InvalidParameter(format!("no CA_{n} in the example")))?;
        set.insert(s);
    }
    let input: Vec<(CaHash, Vec<u64>)> = cas
        .iter()
        .zip(&revoked)
        .map(|(c, r)| (*c, r.iter().copied().collect()))
        .collect();
    let statements = crt_build_statements(&input)?;
    let tree = crt_build_tree(statements.clone(), width)?;
    let names = |h: &CaHash| label(&cas, h);

    let mut t = String::new();
    let _ = writeln!(t, "CAs (ordered by key hash):");
    for (i, c) in cas.iter().enumerate() {
        let r: Vec<String> = revoked[i].iter().map(u64::to_string).collect();
        let _ = writeln!(t, "  CA_{} = {}  revoked {{{}}}", i + 1, c.to_hex(), r.join(", "));
    }
    let _ = writeln!(t, "statements ({}):", statements.len());
    for (j, s) in statements.iter().enumerate() {
        let _ = writeln!(t, "  N_{{0,{j}}}  {}", s.describe(&names));
    }
    let _ = writeln!(t, "tree levels:");
    for (i, level) in tree.levels.iter().enumerate() {
        let _ = writeln!(t, "  level {i} ({} nodes)", level.len());
        for (j, d) in level.iter().enumerate() {
            let _ = writeln!(t, "    N_{{{i},{j}}} = {}", d.to_hex());
        }
    }

    let proof = crt_lookup(&tree, &cas[0], CRT_QUERY_SERIAL);
    let leaf_index = proof.leaf_index as usize;
    let supporting: Vec<(usize, usize)> = tree.co_path_positions(leaf_index).into_iter().flatten().collect();
    let values = fold_proof(&proof, width).ok_or_else(|| Error::Malformed("proof does not fold".into()))?;
    let mut fold = Vec::new();
    let mut idx = leaf_index;
    for (lvl, (e, v)) in proof.co_path.iter().zip(&values).enumerate() {
        let cur = format!("N_{{{lvl},{idx}}}");
        let sib = format!("N_{{{lvl},{}}}", idx ^ 1);
        let rhs = match e.side {
            Side::Left => format!("H({sib}|{cur})"),
            Side::Right => format!("H({cur}|{sib})"),
            Side::Alone => format!("H({cur})"),
        };
        idx /= 2;
        fold.push((format!("N_{{{},{idx}}} = {rhs}", lvl + 1), *v));
    }
    let root = tree.root();
    let verdict = crt_verify(&root, &proof, &cas[0], CRT_QUERY_SERIAL);

    let _ = writeln!(t, "lookup (CA_1, {CRT_QUERY_SERIAL}):");
    let _ = writeln!(t, "  statement N_{{0,{leaf_index}}}  {}", proof.statement.describe(&names));
    let sup: Vec<String> = supporting.iter().map(|(l, j)| format!("N_{{{l},{j}}}")).collect();
    let _ = writeln!(t, "  supporting nodes: {}", sup.join(", "));
    let _ = writeln!(t, "  fold:");
    for (eq, v) in &fold {
        let _ = writeln!(t, "    {eq} = {}", v.to_hex());
    }
    let _ = writeln!(t, "  published root N_{{{},0}} = {}", tree.levels.len() - 1, root.to_hex());
    let _ = writeln!(
        t,
        "  verdict: {}",
        match verdict {
            CrtVerdict::Valid => "valid (not revoked)",
            CrtVerdict::Revoked => "revoked",
            CrtVerdict::UnknownCa => "unknown CA",
            CrtVerdict::Invalid => "INVALID PROOF",
        }
    );

    Ok(CrtDemo {
        text: t,
        cas,
        statements,
        statement: proof.statement,
        leaf_index,
        supporting,
        fold,
        root,
        verdict,
    })
}

pub const HCRS_DEPTH: u8 = 4;

#[derive(Debug, Clone)]
pub struct HcrsDemo {
    pub text: String,
    pub revoked: BTreeSet<NodeVec>,
    /// Dirty interior nodes, deepest first.
    pub excluded: Vec<NodeVec>,
    pub cover: BTreeSet<NodeVec>,
    /// Cover subtrees hold exactly the non-revoked leaves.
    pub covers_exactly: bool,
    /// Every cover node is clean and its parent (if any) is dirty.
    pub minimal: bool,
}

impl HcrsDemo {
    pub fn ok(&self) -> bool {
        self.covers_exactly && self.minimal
    }
}

/// Parses `--revoked`: comma/space separated 4-bit leaves, `""` for none
/// or `all`.
pub fn parse_revoked(spec: &str) -> Result<BTreeSet<NodeVec>, Error> {
    let spec = spec.trim();
    if spec == "all" {
        return Ok((0..1u64 << HCRS_DEPTH).map(|s| NodeVec::leaf(s, HCRS_DEPTH)).collect());
    }
    spec.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            let v = NodeVec::parse(s)?;
            if v.len() != HCRS_DEPTH {
                return Err(Error::InvalidParameter(format!("{s} is not a {HCRS_DEPTH}-bit leaf")));
            }
            Ok(v)
        })
        .collect()
}

fn leaves_under(node: &NodeVec, depth: u8) -> impl Iterator<Item = NodeVec> {
    let span = depth - node.len();
    let first = node.bits() << span;
    (first..first + (1u64 << span)).map(move |s| NodeVec::leaf(s, depth))
}

fn join(nodes: impl IntoIterator<Item = NodeVec>) -> String {
    let v: Vec<String> = nodes.into_iter().map(|n| n.to_string()).collect();
    format!("{{{}}}", v.join(", "))
}

pub fn demo_hcrs(revoked: BTreeSet<NodeVec>) -> HcrsDemo {
    let depth = HCRS_DEPTH;
    let dirty = dirty_nodes(&revoked);
    let mut excluded: Vec<NodeVec> = dirty.iter().filter(|n| n.len() < depth).copied().collect();
    excluded.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let cover = hcrs_cover(depth, &revoked);

    let mut covered = BTreeSet::new();
    let mut disjoint = true;
    for n in &cover {
        for leaf in leaves_under(n, depth) {
            disjoint &= covered.insert(leaf);
        }
    }
    let valid: BTreeSet<NodeVec> = (0..1u64 << depth)
        .map(|s| NodeVec::leaf(s, depth))
        .filter(|l| !revoked.contains(l))
        .collect();
    let covers_exactly = disjoint && covered == valid;
    let minimal = cover
        .iter()
        .all(|n| !dirty.contains(n) && n.parent().is_none_or(|p| dirty.contains(&p)));

    let mut t = String::new();
    let _ = writeln!(t, "leaves ({}; R = revoked):", 1u64 << depth);
    let row: Vec<String> = (0..1u64 << depth)
        .map(|s| {
            let l = NodeVec::leaf(s, depth);
            format!("{l}{}", if revoked.contains(&l) { "R" } else { "" })
        })
        .collect();
    let _ = writeln!(t, "  {}", row.join(" "));
    let _ = writeln!(t, "revoked: {}", join(revoked.iter().copied()));
    let _ = writeln!(t, "excluded nodes: {}", join(excluded.iter().copied()));
    let _ = writeln!(t, "cover ({}): {}", cover.len(), join(cover.iter().copied()));
    let _ = writeln!(t, "covers exactly the valid leaves: {}", if covers_exactly { "yes" } else { "NO" });
    let _ = writeln!(t, "every cover node clean with a revoked sibling subtree: {}", if minimal { "yes" } else { "NO" });

    HcrsDemo {
        text: t,
        revoked,
        excluded,
        cover,
        covers_exactly,
        minimal,
    }
}
