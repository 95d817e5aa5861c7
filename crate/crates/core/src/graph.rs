//! Program-under-test model: annotated control-flow/call graph, block
//! distances to the target set, and sibling-branch grouping.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stable identifier of a basic block within one [`ProgramGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u32);

impl std::fmt::Display for BlockId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// A directed edge between two basic blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Branch {
    pub src: BlockId,
    pub dst: BlockId,
}

impl Branch {
    pub fn new(src: u32, dst: u32) -> Self {
        Branch { src: BlockId(src), dst: BlockId(dst) }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<{},{}>", self.src, self.dst)
    }
}

/// All out-edges of one source block. Two branches are siblings iff they
/// share a source block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiblingGroup {
    pub src: BlockId,
    /// In document order; partition of the out-edges of `src`.
    pub members: Vec<Branch>,
}

/// Per-block metadata carried by the graph document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockInfo {
    pub label: Option<String>,
    pub func: String,
}

/// Validated program graph: blocks, branches, call edges, entry and the
/// non-empty target set.
#[derive(Debug, Clone)]
pub struct ProgramGraph {
    blocks: BTreeMap<BlockId, BlockInfo>,
    branches: BTreeSet<Branch>,
    calls: BTreeSet<(BlockId, BlockId)>,
    entry: BlockId,
    targets: BTreeSet<BlockId>,
    /// Out-edges per block, in document order.
    successors: BTreeMap<BlockId, Vec<BlockId>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed graph document: {0}")]
    Malformed(String),
    #[error("dangling endpoint: branch [{src},{dst}] references undeclared block {missing}")]
    DanglingEndpoint { src: u32, dst: u32, missing: u32 },
    #[error("dangling endpoint: call [{src},{dst}] references undeclared block {missing}")]
    DanglingCall { src: u32, dst: u32, missing: u32 },
    #[error("empty target set")]
    EmptyTargets,
    #[error("unknown entry block {0}")]
    UnknownEntry(u32),
    #[error("unknown target block {0}")]
    UnknownTarget(u32),
    #[error("duplicate block id {0}")]
    DuplicateBlock(u32),
    #[error("duplicate branch [{0},{1}]")]
    DuplicateBranch(u32, u32),
    #[error("unknown block {0}")]
    UnknownBlock(u32),
}

#[derive(Debug, Serialize, Deserialize)]
struct BlockDoc {
    id: u32,
    #[serde(default)]
    label: Option<String>,
    #[serde(default = "default_func")]
    func: String,
}

fn default_func() -> String {
    "main".to_owned()
}

/// Wire format of the graph document (External Interfaces).
#[derive(Debug, Serialize, Deserialize)]
pub struct GraphDoc {
    pub entry: u32,
    pub targets: Vec<u32>,
    blocks: Vec<BlockDoc>,
    pub branches: Vec<(u32, u32)>,
    #[serde(default)]
    pub calls: Vec<(u32, u32)>,
}

impl ProgramGraph {
    /// Builds and validates a graph from its parts. `blocks` and `branches`
    /// keep their given order for sibling enumeration.
    pub fn build(
        entry: u32,
        targets: &[u32],
        blocks: Vec<(u32, Option<String>, String)>,
        branches: &[(u32, u32)],
        calls: &[(u32, u32)],
    ) -> Result<Self, GraphError> {
        let mut block_map = BTreeMap::new();
        for (id, label, func) in blocks {
            if block_map.insert(BlockId(id), BlockInfo { label, func }).is_some() {
                return Err(GraphError::DuplicateBlock(id));
            }
        }
        if targets.is_empty() {
            return Err(GraphError::EmptyTargets);
        }
        if !block_map.contains_key(&BlockId(entry)) {
            return Err(GraphError::UnknownEntry(entry));
        }
        let mut target_set = BTreeSet::new();
        for &t in targets {
            if !block_map.contains_key(&BlockId(t)) {
                return Err(GraphError::UnknownTarget(t));
            }
            target_set.insert(BlockId(t));
        }
        let mut branch_set = BTreeSet::new();
        let mut successors: BTreeMap<BlockId, Vec<BlockId>> = BTreeMap::new();
        for &(src, dst) in branches {
            for end in [src, dst] {
                if !block_map.contains_key(&BlockId(end)) {
                    return Err(GraphError::DanglingEndpoint { src, dst, missing: end });
                }
            }
            if !branch_set.insert(Branch::new(src, dst)) {
                return Err(GraphError::DuplicateBranch(src, dst));
            }
            successors.entry(BlockId(src)).or_default().push(BlockId(dst));
        }
        let mut call_set = BTreeSet::new();
        for &(src, dst) in calls {
            for end in [src, dst] {
                if !block_map.contains_key(&BlockId(end)) {
                    return Err(GraphError::DanglingCall { src, dst, missing: end });
                }
            }
            call_set.insert((BlockId(src), BlockId(dst)));
        }
        Ok(ProgramGraph {
            blocks: block_map,
            branches: branch_set,
            calls: call_set,
            entry: BlockId(entry),
            targets: target_set,
            successors,
        })
    }

    pub fn from_doc(doc: GraphDoc) -> Result<Self, GraphError> {
        let blocks = doc
            .blocks
            .into_iter()
            .map(|b| (b.id, b.label, b.func))
            .collect();
        Self::build(doc.entry, &doc.targets, blocks, &doc.branches, &doc.calls)
    }

    pub fn entry(&self) -> BlockId {
        self.entry
    }

    pub fn targets(&self) -> &BTreeSet<BlockId> {
        &self.targets
    }

    pub fn blocks(&self) -> impl Iterator<Item = BlockId> + '_ {
        self.blocks.keys().copied()
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn contains_block(&self, b: BlockId) -> bool {
        self.blocks.contains_key(&b)
    }

    pub fn block_info(&self, b: BlockId) -> Option<&BlockInfo> {
        self.blocks.get(&b)
    }

    /// Label of a block if present, else its numeric form.
    pub fn block_name(&self, b: BlockId) -> String {
        match self.blocks.get(&b).and_then(|i| i.label.clone()) {
            Some(l) => l,
            None => b.to_string(),
        }
    }

    /// Looks a block up by label.
    pub fn block_by_label(&self, label: &str) -> Option<BlockId> {
        self.blocks
            .iter()
            .find(|(_, i)| i.label.as_deref() == Some(label))
            .map(|(b, _)| *b)
    }

    pub fn branches(&self) -> &BTreeSet<Branch> {
        &self.branches
    }

    pub fn contains_branch(&self, br: Branch) -> bool {
        self.branches.contains(&br)
    }

    pub fn calls(&self) -> &BTreeSet<(BlockId, BlockId)> {
        &self.calls
    }

    /// Out-edges of `b` in document order.
    pub fn successors(&self, b: BlockId) -> &[BlockId] {
        self.successors.get(&b).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Parses and validates a JSON graph document.
pub fn load_graph(source: &str) -> Result<ProgramGraph, GraphError> {
    let doc: GraphDoc =
        serde_json::from_str(source).map_err(|e| GraphError::Malformed(e.to_string()))?;
    ProgramGraph::from_doc(doc)
}

/// Static block distance to the target set. Unreachable blocks carry no
/// entry; `distance` returns `None` for them.
#[derive(Debug, Clone)]
pub struct BbDistanceMap {
    dist: HashMap<BlockId, f64>,
    known: BTreeSet<BlockId>,
}

impl BbDistanceMap {
    /// `None` means the block cannot reach any target.
    pub fn distance(&self, b: BlockId) -> Option<f64> {
        self.dist.get(&b).copied()
    }

    pub fn is_known(&self, b: BlockId) -> bool {
        self.known.contains(&b)
    }
}

/// `true` iff `b` can reach at least one target.
pub fn is_reachable(d: &BbDistanceMap, b: BlockId) -> Result<bool, GraphError> {
    if !d.is_known(b) {
        return Err(GraphError::UnknownBlock(b.0));
    }
    Ok(d.distance(b).is_some())
}

/// Unit-weight shortest-path hop counts to each target over the union of
/// branch and call edges, combined per block as the harmonic mean over the
/// targets it reaches. Targets themselves get 0.
pub fn compute_bb_distance(g: &ProgramGraph) -> BbDistanceMap {
    // Reverse adjacency over branches plus call edges.
    let mut rev: HashMap<BlockId, Vec<BlockId>> = HashMap::new();
    for br in g.branches() {
        rev.entry(br.dst).or_default().push(br.src);
    }
    for &(src, dst) in g.calls() {
        rev.entry(dst).or_default().push(src);
    }

    // hops[b] = list of hop counts, one per target b reaches.
    let mut hops: HashMap<BlockId, Vec<u64>> = HashMap::new();
    for &t in g.targets() {
        let mut seen: HashMap<BlockId, u64> = HashMap::new();
        let mut queue = VecDeque::new();
        seen.insert(t, 0);
        queue.push_back(t);
        while let Some(b) = queue.pop_front() {
            let h = seen[&b];
            if let Some(preds) = rev.get(&b) {
                for &p in preds {
                    if !seen.contains_key(&p) {
                        seen.insert(p, h + 1);
                        queue.push_back(p);
                    }
                }
            }
        }
        for (b, h) in seen {
            hops.entry(b).or_default().push(h);
        }
    }

    let mut dist = HashMap::new();
    for b in g.blocks() {
        if g.targets().contains(&b) {
            dist.insert(b, 0.0);
            continue;
        }
        if let Some(hs) = hops.get(&b) {
            // Harmonic mean over reached targets; every h >= 1 here.
            let inv_sum: f64 = hs.iter().map(|&h| 1.0 / h as f64).sum();
            dist.insert(b, hs.len() as f64 / inv_sum);
        }
    }
    BbDistanceMap { dist, known: g.blocks().collect() }
}

/// Groups every out-edge by its source block. The groups partition the
/// branch set.
pub fn sibling_groups(g: &ProgramGraph) -> Vec<SiblingGroup> {
    g.successors
        .iter()
        .map(|(&src, dsts)| SiblingGroup {
            src,
            members: dsts.iter().map(|&dst| Branch { src, dst }).collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_doc() -> String {
        // M=0 a=1 b=2 c=3 d=4 e=5 f=6 T=7
        serde_json::json!({
            "entry": 0,
            "targets": [7],
            "blocks": (0..8).map(|i| serde_json::json!({"id": i, "func": "main"})).collect::<Vec<_>>(),
            "branches": [[0,1],[0,5],[1,2],[1,6],[2,3],[2,6],[3,4],[3,6],[4,7],[4,6],[5,4],[5,6]],
            "calls": []
        })
        .to_string()
    }

    #[test]
    fn loads_fig1_shape() {
        let g = load_graph(&fig1_doc()).unwrap();
        assert_eq!(g.block_count(), 8);
        assert_eq!(g.entry(), BlockId(0));
        assert_eq!(g.branches().len(), 12);
    }

    #[test]
    fn single_block_graph_is_valid() {
        let g = load_graph(r#"{"entry":1,"targets":[1],"blocks":[{"id":1,"func":"main"}],"branches":[]}"#)
            .unwrap();
        assert_eq!(g.block_count(), 1);
        assert!(g.branches().is_empty());
        let d = compute_bb_distance(&g);
        assert_eq!(d.distance(BlockId(1)), Some(0.0));
    }

    #[test]
    fn dangling_endpoint_is_reported() {
        let err = load_graph(
            r#"{"entry":0,"targets":[0],"blocks":[{"id":0,"func":"main"}],"branches":[[0,9]]}"#,
        )
        .unwrap_err();
        assert_eq!(err, GraphError::DanglingEndpoint { src: 0, dst: 9, missing: 9 });
    }

    #[test]
    fn empty_targets_rejected() {
        let err = load_graph(
            r#"{"entry":0,"targets":[],"blocks":[{"id":0,"func":"main"}],"branches":[]}"#,
        )
        .unwrap_err();
        assert_eq!(err, GraphError::EmptyTargets);
    }

    #[test]
    fn unknown_entry_rejected() {
        let err = load_graph(
            r#"{"entry":5,"targets":[0],"blocks":[{"id":0,"func":"main"}],"branches":[]}"#,
        )
        .unwrap_err();
        assert_eq!(err, GraphError::UnknownEntry(5));
    }

    #[test]
    fn malformed_document_rejected() {
        assert!(matches!(load_graph("{not json"), Err(GraphError::Malformed(_))));
    }

    #[test]
    fn fig1_trace_distances() {
        // Trace 1 <M,a,b,c,d,f>: finite distances (3,4,3,2,1), f unreachable.
        // Trace 2 <M,e,d,f>: finite distances (3,2,1).
        let g = load_graph(&fig1_doc()).unwrap();
        let d = compute_bb_distance(&g);
        assert_eq!(d.distance(BlockId(0)), Some(3.0)); // M via e
        assert_eq!(d.distance(BlockId(1)), Some(4.0)); // a
        assert_eq!(d.distance(BlockId(2)), Some(3.0)); // b
        assert_eq!(d.distance(BlockId(3)), Some(2.0)); // c
        assert_eq!(d.distance(BlockId(4)), Some(1.0)); // d
        assert_eq!(d.distance(BlockId(5)), Some(2.0)); // e
        assert_eq!(d.distance(BlockId(6)), None); // f is a sink
        assert_eq!(d.distance(BlockId(7)), Some(0.0)); // T
    }

    #[test]
    fn target_block_distance_is_zero() {
        let g = load_graph(&fig1_doc()).unwrap();
        let d = compute_bb_distance(&g);
        assert_eq!(d.distance(BlockId(7)), Some(0.0));
    }

    #[test]
    fn two_target_diamond_harmonic_mean() {
        // m(0) -> x(1) -> t1(2), m -> y(3) -> z(4) -> w(5) -> t2(6)
        // hops(m,t1)=2, hops(m,t2)=4 => 2/(1/2+1/4) = 8/3.
        let g = ProgramGraph::build(
            0,
            &[2, 6],
            (0..7).map(|i| (i, None, "main".into())).collect(),
            &[(0, 1), (1, 2), (0, 3), (3, 4), (4, 5), (5, 6)],
            &[],
        )
        .unwrap();
        let d = compute_bb_distance(&g);
        let got = d.distance(BlockId(0)).unwrap();
        assert!((got - 8.0 / 3.0).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn call_edges_count_in_distance() {
        // caller(0) -call-> callee entry(1) -> t(2); no branch from 0.
        let g = ProgramGraph::build(
            0,
            &[2],
            vec![
                (0, None, "caller".into()),
                (1, None, "callee".into()),
                (2, None, "callee".into()),
            ],
            &[(1, 2)],
            &[(0, 1)],
        )
        .unwrap();
        let d = compute_bb_distance(&g);
        assert_eq!(d.distance(BlockId(0)), Some(2.0));
    }

    #[test]
    fn sibling_groups_partition_out_edges() {
        let g = load_graph(&fig1_doc()).unwrap();
        let groups = sibling_groups(&g);
        let total: usize = groups.iter().map(|grp| grp.members.len()).sum();
        assert_eq!(total, g.branches().len());
        let m_group = groups.iter().find(|grp| grp.src == BlockId(0)).unwrap();
        assert_eq!(m_group.members.len(), 2);
    }

    #[test]
    fn singleton_and_switch_groups() {
        let g = ProgramGraph::build(
            0,
            &[3],
            (0..5).map(|i| (i, None, "main".into())).collect(),
            &[(0, 1), (1, 2), (1, 3), (1, 4)],
            &[],
        )
        .unwrap();
        let groups = sibling_groups(&g);
        assert_eq!(groups.iter().find(|grp| grp.src == BlockId(0)).unwrap().members.len(), 1);
        assert_eq!(groups.iter().find(|grp| grp.src == BlockId(1)).unwrap().members.len(), 3);
    }

    #[test]
    fn reachability_queries() {
        let g = load_graph(&fig1_doc()).unwrap();
        let d = compute_bb_distance(&g);
        assert!(is_reachable(&d, BlockId(3)).unwrap()); // c
        assert!(!is_reachable(&d, BlockId(6)).unwrap()); // f
        assert!(is_reachable(&d, BlockId(7)).unwrap()); // target
        assert_eq!(is_reachable(&d, BlockId(99)), Err(GraphError::UnknownBlock(99)));
    }
}
