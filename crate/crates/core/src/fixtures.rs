//! Built-in target programs: the two-route motivating example, the
//! path-probability worked example, a parameterized random CFG generator,
//! and a hand-instrumented TLV record parser.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{BlockId, Branch, ProgramGraph};
use crate::prob::TraceView;
use crate::program::{PredicateProgram, SolveAnnotation, TargetProgram};

fn program(doc: serde_json::Value) -> PredicateProgram {
    PredicateProgram::from_json(&doc.to_string()).expect("builtin fixture document is valid")
}

/// Two routes to target T. Route 1 (M,a,b,c,d,T; 5 hops) is guarded by
/// byte ranges, each satisfiable with probability >= 1/16. Route 2
/// (M,e,d,T; 3 hops) is gated at M->e by a 4-byte magic value whose last
/// byte overlaps the final guard at d, so an input holding the magic can
/// never take d->T. Bundled seeds cover <M,a,b,c,d,f> and <M,e,d,f>.
pub fn fig1() -> PredicateProgram {
    let labels = ["M", "a", "b", "c", "d", "e", "f", "T"];
    program(serde_json::json!({
        "name": "fig1",
        "entry": 0,
        "targets": [7],
        "blocks": labels.iter().enumerate()
            .map(|(i, l)| serde_json::json!({"id": i, "label": l, "func": "main"}))
            .collect::<Vec<_>>(),
        "branches": [
            {"src": 0, "dst": 5, "pred": {"byte": 0, "op": "eq", "val": [0xDE, 0xAD, 0xBE, 0xEF]},
             "solvable": true, "solve_cost_s": 2.0},
            [0, 1],
            {"src": 1, "dst": 2, "pred": {"byte": 4, "op": "range", "val": [0x01, 0xFF]}},
            [1, 6],
            {"src": 2, "dst": 3, "pred": {"byte": 5, "op": "range", "val": [0x01, 0xFF]}},
            [2, 6],
            {"src": 3, "dst": 4, "pred": {"byte": 6, "op": "range", "val": [0x40, 0x4F]}},
            [3, 6],
            {"src": 4, "dst": 7, "pred": {"byte": 3, "op": "range", "val": [0x90, 0x9F]},
             "solvable": true, "solve_cost_s": 0.2},
            [4, 6],
            [5, 4]
        ],
        "seeds": [
            [0x00, 0x00, 0x00, 0x00, 0x40, 0x40, 0x48,
             0x01, 0x01, 0x01, 0x01, 0x01, 0x01, 0x01, 0x01, 0x01],
            [0xDE, 0xAD, 0xBE, 0xEF, 0x40, 0x40, 0xB7,
             0x01, 0x01, 0x01, 0x01, 0x01, 0x01, 0x01, 0x01, 0x01]
        ]
    }))
}

/// The 15-block path-probability example: entry b1, targets b10 and b14.
/// Under uniform random bytes the b1 sibling pair splits 0.5/0.5.
pub fn fig3() -> PredicateProgram {
    let blocks: Vec<serde_json::Value> = (1..=15)
        .map(|i| serde_json::json!({"id": i, "label": format!("b{i}"), "func": "main"}))
        .collect();
    program(serde_json::json!({
        "name": "fig3",
        "entry": 1,
        "targets": [10, 14],
        "blocks": blocks,
        "branches": [
            {"src": 1, "dst": 2, "pred": {"byte": 0, "op": "lt", "val": 0x80}},
            [1, 11],
            {"src": 2, "dst": 3, "pred": {"byte": 1, "op": "lt", "val": 77}},
            [2, 4],
            {"src": 3, "dst": 5, "pred": {"byte": 2, "op": "lt", "val": 77}},
            [3, 6],
            {"src": 5, "dst": 8, "pred": {"byte": 3, "op": "lt", "val": 0xC0}},
            [5, 7],
            {"src": 8, "dst": 10, "pred": {"byte": 4, "op": "lt", "val": 0xC0}},
            [8, 9],
            {"src": 11, "dst": 13, "pred": {"byte": 1, "op": "lt", "val": 0xC0}},
            [11, 12],
            {"src": 13, "dst": 14, "pred": {"byte": 2, "op": "ge", "val": 0xC0}},
            [13, 15]
        ],
        "seeds": [
            [0x00, 0x00, 0x00, 0x00, 0x00],
            [0xFF, 0x00, 0x00, 0x00, 0x00]
        ]
    }))
}

/// Deterministic layered-DAG generator. `hardness` in [0, 1] controls
/// guard widths and magic-branch density: at 0 every branch (guard and
/// else side alike) is satisfiable with probability 1/2, and there are no
/// magic comparisons; as it grows, guards narrow and 2-byte magic checks
/// appear, including on the in-edges of the target when hardness > 0.3.
/// Magic branches are the solver-solvable ones; everything else is
/// annotated not-solvable with zero give-up cost.
pub fn random_cfg(n: usize, gen_seed: u64, hardness: f64) -> PredicateProgram {
    let n = n.max(6);
    let h = hardness.clamp(0.0, 1.0);
    let mut rng =
        ChaCha8Rng::seed_from_u64(gen_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ n as u64);
    let layers = (n / 5).max(3);

    let mut layer_of = vec![0usize; n];
    let mut layer_blocks: Vec<Vec<u32>> = vec![Vec::new(); layers];
    layer_blocks[0].push(0);
    for i in 1..n {
        let l = (1 + ((i - 1) * (layers - 1)) / (n - 1)).min(layers - 1);
        layer_of[i] = l;
        layer_blocks[l].push(i as u32);
    }

    // Forward edges between adjacent layers.
    let max_out = if h == 0.0 { 2usize } else { 3 };
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut edge_set: BTreeSet<(u32, u32)> = BTreeSet::new();
    for l in 0..layers - 1 {
        let next = layer_blocks[l + 1].clone();
        if next.is_empty() {
            continue;
        }
        for &b in &layer_blocks[l] {
            let k = rng.gen_range(1..=max_out.min(next.len()));
            let mut chosen = BTreeSet::new();
            while chosen.len() < k {
                chosen.insert(next[rng.gen_range(0..next.len())]);
            }
            for d in chosen {
                if edge_set.insert((b, d)) {
                    edges.push((b, d));
                }
            }
        }
    }
    // Give every deeper block at least one predecessor.
    for l in 1..layers {
        let prev = layer_blocks[l - 1].clone();
        for &b in &layer_blocks[l] {
            if !edges.iter().any(|&(_, d)| d == b) {
                let src = prev[rng.gen_range(0..prev.len())];
                if edge_set.insert((src, b)) {
                    edges.push((src, b));
                }
            }
        }
    }

    // Reachable set from the entry.
    let mut reachable: BTreeSet<u32> = BTreeSet::new();
    let mut queue = VecDeque::from([0u32]);
    reachable.insert(0);
    while let Some(b) = queue.pop_front() {
        for &(s, d) in &edges {
            if s == b && reachable.insert(d) {
                queue.push_back(d);
            }
        }
    }

    // Target: a reachable block in the deepest reachable layer.
    let deepest = reachable.iter().map(|&b| layer_of[b as usize]).max().unwrap_or(0);
    let candidates: Vec<u32> = layer_blocks[deepest]
        .iter()
        .copied()
        .filter(|b| reachable.contains(b))
        .collect();
    let target = candidates[rng.gen_range(0..candidates.len())];
    let gate_magic = h > 0.3 && rng.gen_bool(0.5 + 0.5 * (h - 0.3));

    // Successor lists in edge order.
    let mut succs: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &(s, d) in &edges {
        succs.entry(s).or_default().push(d);
    }

    let p_lo = 0.5 * (1.0 - h) + (1.0 / 16.0) * h;
    let p_hi = 0.9 * (1.0 - h) + 0.3 * h;
    let mut guard_offset = 0usize;
    let mut magic_offset = 0usize;
    let mut branch_docs: Vec<serde_json::Value> = Vec::new();

    for (&src, dsts) in &succs {
        for (i, &dst) in dsts.iter().enumerate() {
            let is_default = i + 1 == dsts.len() && dsts.len() > 1;
            let single = dsts.len() == 1;
            let gate = gate_magic && dst == target;
            if single || (is_default && !gate) {
                branch_docs.push(serde_json::json!({
                    "src": src, "dst": dst, "solvable": false, "solve_cost_s": 0.0
                }));
                continue;
            }
            let magic = gate || (h > 0.0 && rng.gen_bool(0.25 * h));
            if magic {
                let off = 10 + (magic_offset % 6);
                magic_offset += 2;
                let bytes = [rng.gen::<u8>(), rng.gen::<u8>()];
                let cost = 1.0 + 3.0 * rng.gen::<f64>();
                branch_docs.push(serde_json::json!({
                    "src": src, "dst": dst,
                    "pred": {"byte": off, "op": "eq", "val": [bytes[0], bytes[1]]},
                    "solvable": true, "solve_cost_s": (cost * 100.0).round() / 100.0
                }));
            } else {
                let p = if h == 0.0 { 0.5 } else { p_lo + (p_hi - p_lo) * rng.gen::<f64>() };
                let width = ((256.0 * p).round() as u16).clamp(1, 256);
                let lo = rng.gen_range(0..=(256 - width)) as u8;
                let hi = (lo as u16 + width - 1).min(255) as u8;
                let off = guard_offset % 10;
                guard_offset += 1;
                branch_docs.push(serde_json::json!({
                    "src": src, "dst": dst,
                    "pred": {"byte": off, "op": "range", "val": [lo, hi]},
                    "solvable": false, "solve_cost_s": 0.0
                }));
            }
        }
    }

    let mut seeds: Vec<Vec<u8>> = (0..10)
        .map(|_| (0..16).map(|_| rng.gen::<u8>()).collect())
        .collect();
    // Plant holders for some non-gate magics: a seed that already carries
    // the magic bytes traverses a branch the mutation engine will rarely
    // re-satisfy, luring static distance toward a low-probability path.
    let mut slot = 0usize;
    for doc in &branch_docs {
        if slot >= seeds.len() / 2 {
            break;
        }
        let dst = doc["dst"].as_u64().unwrap_or(0) as u32;
        if doc["solvable"].as_bool() == Some(true) && dst != target && rng.gen_bool(0.6) {
            if let (Some(off), Some(vals)) =
                (doc["pred"]["byte"].as_u64(), doc["pred"]["val"].as_array())
            {
                for (i, v) in vals.iter().enumerate() {
                    seeds[slot][off as usize + i] = v.as_u64().unwrap_or(0) as u8;
                }
                slot += 1;
            }
        }
    }

    program(serde_json::json!({
        "name": format!("random_cfg_n{n}_s{gen_seed}_h{h}"),
        "entry": 0,
        "targets": [target],
        "blocks": (0..n).map(|i| serde_json::json!({
            "id": i,
            "label": if i as u32 == target { "t".to_string() } else { format!("n{i}") },
            "func": "main"
        })).collect::<Vec<_>>(),
        "branches": branch_docs,
        "seeds": seeds
    }))
}

/// Block ids of the record parser.
mod parser_blocks {
    pub const ENTRY: u32 = 0;
    pub const LOOP_HEAD: u32 = 1;
    pub const DONE: u32 = 2;
    pub const READ_HDR: u32 = 3;
    pub const ERR_TRUNC: u32 = 4;
    pub const DISPATCH: u32 = 5;
    pub const H_INT: u32 = 6;
    pub const H_STR: u32 = 7;
    pub const H_EXT: u32 = 8;
    pub const ERR_TYPE: u32 = 9;
    pub const INT_OK: u32 = 10;
    pub const ERR_LEN: u32 = 11;
    pub const STR_OK: u32 = 12;
    pub const EXT_DEEP: u32 = 13;
    pub const BUG_A: u32 = 14;
    pub const ERR_SUM: u32 = 15;
    pub const SKIP: u32 = 16;
    pub const BUG_B: u32 = 17;
}

/// In-process parser of a TLV record stream: records are
/// `[type:1][len:1][payload:len]`. Type 0x01 expects 4-byte payloads,
/// 0x02 is a string record, 0x7F is an extension record whose payloads of
/// 8 or more bytes carry a trailing checksum byte. Two deep blocks are the
/// planted targets: the valid-checksum extension path and the palindromic
/// string path.
pub struct MiniRecordParser {
    graph: ProgramGraph,
}

impl MiniRecordParser {
    pub fn new() -> Self {
        use parser_blocks::*;
        let labels: [(u32, &str); 18] = [
            (ENTRY, "start"),
            (LOOP_HEAD, "loop_head"),
            (DONE, "done"),
            (READ_HDR, "read_hdr"),
            (ERR_TRUNC, "err_trunc"),
            (DISPATCH, "dispatch"),
            (H_INT, "h_int"),
            (H_STR, "h_str"),
            (H_EXT, "h_ext"),
            (ERR_TYPE, "err_type"),
            (INT_OK, "int_ok"),
            (ERR_LEN, "err_len"),
            (STR_OK, "str_ok"),
            (EXT_DEEP, "ext_deep"),
            (BUG_A, "bug_a"),
            (ERR_SUM, "err_sum"),
            (SKIP, "skip"),
            (BUG_B, "bug_b"),
        ];
        let blocks = labels
            .iter()
            .map(|&(id, l)| (id, Some(l.to_owned()), "parse".to_owned()))
            .collect();
        let branches = [
            (ENTRY, LOOP_HEAD),
            (LOOP_HEAD, DONE),
            (LOOP_HEAD, READ_HDR),
            (READ_HDR, ERR_TRUNC),
            (READ_HDR, DISPATCH),
            (DISPATCH, H_INT),
            (DISPATCH, H_STR),
            (DISPATCH, H_EXT),
            (DISPATCH, ERR_TYPE),
            (H_INT, INT_OK),
            (H_INT, ERR_LEN),
            (INT_OK, LOOP_HEAD),
            (H_STR, BUG_B),
            (H_STR, STR_OK),
            (STR_OK, LOOP_HEAD),
            (H_EXT, EXT_DEEP),
            (H_EXT, SKIP),
            (SKIP, LOOP_HEAD),
            (EXT_DEEP, BUG_A),
            (EXT_DEEP, ERR_SUM),
        ];
        let graph = ProgramGraph::build(ENTRY, &[BUG_A, BUG_B], blocks, &branches, &[])
            .expect("parser graph is valid");
        MiniRecordParser { graph }
    }
}

impl Default for MiniRecordParser {
    fn default() -> Self {
        Self::new()
    }
}

impl TargetProgram for MiniRecordParser {
    fn name(&self) -> &str {
        "mini_record_parser"
    }

    fn graph(&self) -> &ProgramGraph {
        &self.graph
    }

    fn execute(&self, input: &[u8]) -> TraceView {
        use parser_blocks::*;
        let mut blocks: Vec<u32> = vec![ENTRY];
        let mut cursor = 0usize;
        loop {
            blocks.push(LOOP_HEAD);
            if cursor >= input.len() {
                blocks.push(DONE);
                break;
            }
            blocks.push(READ_HDR);
            if cursor + 2 > input.len() {
                blocks.push(ERR_TRUNC);
                break;
            }
            let ty = input[cursor];
            let len = input[cursor + 1] as usize;
            if cursor + 2 + len > input.len() {
                blocks.push(ERR_TRUNC);
                break;
            }
            blocks.push(DISPATCH);
            let payload = &input[cursor + 2..cursor + 2 + len];
            match ty {
                0x01 => {
                    blocks.push(H_INT);
                    if len == 4 {
                        blocks.push(INT_OK);
                    } else {
                        blocks.push(ERR_LEN);
                        break;
                    }
                }
                0x02 => {
                    blocks.push(H_STR);
                    if len >= 4 && payload[0] == payload[len - 1] {
                        blocks.push(BUG_B);
                        break;
                    }
                    blocks.push(STR_OK);
                }
                0x7F => {
                    blocks.push(H_EXT);
                    if len >= 8 {
                        blocks.push(EXT_DEEP);
                        let sum = payload[..len - 1]
                            .iter()
                            .fold(0u8, |acc, &b| acc.wrapping_add(b));
                        if sum == payload[len - 1] {
                            blocks.push(BUG_A);
                        } else {
                            blocks.push(ERR_SUM);
                        }
                        break;
                    }
                    blocks.push(SKIP);
                }
                _ => {
                    blocks.push(ERR_TYPE);
                    break;
                }
            }
            cursor += 2 + len;
        }
        let ids = blocks.into_iter().map(BlockId).collect();
        TraceView::from_blocks(&self.graph, ids).expect("parser trace follows its graph")
    }

    fn solve_annotation(&self, _br: Branch) -> SolveAnnotation {
        // No byte-level constraint model for hand-written code.
        SolveAnnotation { solvable: false, cost_us: 0 }
    }

    fn try_flip(&self, _input: &[u8], _flip: Branch) -> Option<Vec<u8>> {
        None
    }

    fn initial_seeds(&self) -> Vec<Vec<u8>> {
        vec![
            vec![0x01, 0x04, 1, 2, 3, 4],
            vec![0x02, 0x03, b'a', b'b', b'c'],
            vec![0x7F, 0x02, 0x00, 0x00],
        ]
    }
}

/// Looks a fixture up by name: `fig1`, `fig3`, `parser`, or
/// `random:<n>:<seed>:<hardness>`.
pub fn builtin(name: &str) -> Option<Box<dyn TargetProgram>> {
    match name {
        "fig1" => Some(Box::new(fig1())),
        "fig3" => Some(Box::new(fig3())),
        "parser" | "mini_record_parser" => Some(Box::new(MiniRecordParser::new())),
        other => {
            let rest = other.strip_prefix("random:")?;
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return None;
            }
            let n = parts[0].parse().ok()?;
            let seed = parts[1].parse().ok()?;
            let hardness = parts[2].parse().ok()?;
            Some(Box::new(random_cfg(n, seed, hardness)))
        }
    }
}

/// The canonical fixture set.
pub fn builtin_fixtures() -> Vec<Box<dyn TargetProgram>> {
    vec![
        Box::new(fig1()),
        Box::new(fig3()),
        Box::new(random_cfg(30, 7, 0.0)),
        Box::new(MiniRecordParser::new()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::compute_bb_distance;
    use crate::prob::BranchStatsTable;

    #[test]
    fn fig1_block_set_is_exact() {
        let p = fig1();
        let names: BTreeSet<String> = p
            .graph()
            .blocks()
            .map(|b| p.graph().block_name(b))
            .collect();
        let expect: BTreeSet<String> =
            ["M", "a", "b", "c", "d", "e", "f", "T"].iter().map(|s| s.to_string()).collect();
        assert_eq!(names, expect);
    }

    #[test]
    fn fig1_seed_traces() {
        let p = fig1();
        let seeds = p.initial_seeds();
        let t1 = p.execute(&seeds[0]);
        let names: Vec<String> =
            t1.blocks().iter().map(|&b| p.graph().block_name(b)).collect();
        assert_eq!(names, ["M", "a", "b", "c", "d", "f"]);
        let t2 = p.execute(&seeds[1]);
        let names2: Vec<String> =
            t2.blocks().iter().map(|&b| p.graph().block_name(b)).collect();
        assert_eq!(names2, ["M", "e", "d", "f"]);
    }

    #[test]
    fn fig1_route2_cannot_reach_target() {
        // Taking M->e pins byte3 to 0xEF, but d->T needs byte3 in
        // [0x90, 0x9F]: any magic-holding input ends at f.
        let p = fig1();
        let e = p.graph().block_by_label("e").unwrap();
        let d = p.graph().block_by_label("d").unwrap();
        let t = p.graph().block_by_label("T").unwrap();
        for tail in [[0x00u8, 0x00, 0x00], [0x40, 0x40, 0x40], [0xFF, 0xFF, 0xFF]] {
            let mut input = vec![0xDE, 0xAD, 0xBE, 0xEF];
            input.extend_from_slice(&tail);
            let trace = p.execute(&input);
            assert!(trace.branches().contains(&Branch { src: e, dst: d }));
            assert!(!trace.blocks().contains(&t));
        }
    }

    #[test]
    fn fig1_route1_reaches_target() {
        let p = fig1();
        let trace = p.execute(&[0x00, 0x00, 0x00, 0x90, 0x40, 0x40, 0x40]);
        let names: Vec<String> =
            trace.blocks().iter().map(|&b| p.graph().block_name(b)).collect();
        assert_eq!(names, ["M", "a", "b", "c", "d", "T"]);
    }

    #[test]
    fn fig3_uniform_bytes_split_b1_evenly() {
        let p = fig3();
        let mut stats = BranchStatsTable::new(p.graph(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..20_000 {
            let input: Vec<u8> = (0..5).map(|_| rng.gen::<u8>()).collect();
            let trace = p.execute(&input);
            stats.record_trace(&trace).unwrap();
        }
        stats.refresh_probabilities(1);
        let p12 = stats.prob(Branch::new(1, 2)).unwrap();
        assert!((p12 - 0.5).abs() < 0.02, "got {p12}");
    }

    #[test]
    fn fig3_distances() {
        let p = fig3();
        let d = compute_bb_distance(p.graph());
        let by = |l: &str| p.graph().block_by_label(l).unwrap();
        assert_eq!(d.distance(by("b10")), Some(0.0));
        assert_eq!(d.distance(by("b8")), Some(1.0));
        assert_eq!(d.distance(by("b5")), Some(2.0));
        assert_eq!(d.distance(by("b3")), Some(3.0));
        assert_eq!(d.distance(by("b2")), Some(4.0));
        assert_eq!(d.distance(by("b13")), Some(1.0));
        assert_eq!(d.distance(by("b11")), Some(2.0));
        assert_eq!(d.distance(by("b15")), None);
        // b1 reaches b10 in 5 hops and b14 in 3: harmonic mean 2/(1/5+1/3).
        let b1 = d.distance(by("b1")).unwrap();
        assert!((b1 - 2.0 / (1.0 / 5.0 + 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn fig3_seed_traces() {
        let p = fig3();
        let seeds = p.initial_seeds();
        let ta: Vec<String> = p
            .execute(&seeds[0])
            .blocks()
            .iter()
            .map(|&b| p.graph().block_name(b))
            .collect();
        assert_eq!(ta, ["b1", "b2", "b3", "b5", "b8", "b10"]);
        let tb: Vec<String> = p
            .execute(&seeds[1])
            .blocks()
            .iter()
            .map(|&b| p.graph().block_name(b))
            .collect();
        assert_eq!(tb, ["b1", "b11", "b13", "b15"]);
    }

    #[test]
    fn random_cfg_hardness_zero_is_wide_open() {
        let p = random_cfg(30, 11, 0.0);
        // Every guarded branch has satisfaction probability exactly 1/2,
        // so every sibling (guard or else) is satisfiable with p >= 1/2.
        for br in p.graph().branches() {
            if let Some(pred) = p.pred(*br) {
                let sat = (0u32..256)
                    .filter(|&v| {
                        let mut input = vec![0u8; 16];
                        if let crate::predicate::BytePred::Range { offset, .. } = pred {
                            input[*offset] = v as u8;
                        }
                        pred.eval(&input)
                    })
                    .count();
                assert_eq!(sat, 128, "hardness-0 guards are half-width");
            }
        }
    }

    #[test]
    fn random_cfg_is_deterministic_and_reachable() {
        let a = random_cfg(60, 3, 0.6);
        let b = random_cfg(60, 3, 0.6);
        assert_eq!(a.to_json(), b.to_json());
        let d = compute_bb_distance(a.graph());
        assert!(d.distance(a.graph().entry()).is_some(), "entry must reach the target");
        assert_eq!(a.initial_seeds().len(), 10);
    }

    #[test]
    fn parser_traces() {
        use parser_blocks::*;
        let p = MiniRecordParser::new();
        // Valid int record then end of input.
        let t = p.execute(&[0x01, 0x04, 1, 2, 3, 4]);
        let ids: Vec<u32> = t.blocks().iter().map(|b| b.0).collect();
        assert_eq!(ids, [ENTRY, LOOP_HEAD, READ_HDR, DISPATCH, H_INT, INT_OK, LOOP_HEAD, DONE]);
        // Truncated header.
        let t2 = p.execute(&[0x01]);
        assert_eq!(t2.blocks().last().unwrap().0, ERR_TRUNC);
        // Unknown type.
        let t3 = p.execute(&[0x33, 0x00]);
        assert_eq!(t3.blocks().last().unwrap().0, ERR_TYPE);
    }

    #[test]
    fn parser_bug_blocks_reachable_by_construction() {
        use parser_blocks::*;
        let p = MiniRecordParser::new();
        // Checksum: payload of 8 bytes, last byte = sum of first 7.
        let payload = [1u8, 2, 3, 4, 5, 6, 7];
        let sum = payload.iter().fold(0u8, |a, &b| a.wrapping_add(b));
        let mut input = vec![0x7F, 0x08];
        input.extend_from_slice(&payload);
        input.push(sum);
        let t = p.execute(&input);
        assert_eq!(t.blocks().last().unwrap().0, BUG_A);
        // Palindromic string record.
        let t2 = p.execute(&[0x02, 0x04, b'x', b'y', b'z', b'x']);
        assert_eq!(t2.blocks().last().unwrap().0, BUG_B);
    }

    #[test]
    fn builtin_lookup() {
        assert!(builtin("fig1").is_some());
        assert!(builtin("fig3").is_some());
        assert!(builtin("parser").is_some());
        assert!(builtin("random:30:7:0.5").is_some());
        assert!(builtin("random:30:7").is_none());
        assert!(builtin("nope").is_none());
        assert_eq!(builtin_fixtures().len(), 4);
    }
}
