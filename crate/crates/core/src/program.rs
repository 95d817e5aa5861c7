//! Target-program contract and the predicate-driven fixture runtime. A
//! fixture program is the graph document extended with per-branch input
//! predicates, solver annotations, and suggested initial seeds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BlockId, Branch, GraphError, ProgramGraph};
use crate::predicate::{BytePred, PredDoc, PredError};
use crate::prob::{ProbError, TraceView, MICROS_PER_SEC};

pub const DEFAULT_EXEC_COST_US: u64 = 1_000; // 0.001 s per execution
pub const DEFAULT_SOLVE_COST_US: u64 = MICROS_PER_SEC; // 1 s per solve

/// Per-branch solver behaviour declared by the fixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveAnnotation {
    pub solvable: bool,
    /// Time the solver needs to produce an answer (or to give up).
    pub cost_us: u64,
}

impl Default for SolveAnnotation {
    fn default() -> Self {
        SolveAnnotation { solvable: true, cost_us: DEFAULT_SOLVE_COST_US }
    }
}

/// An executable program under test. Execution is deterministic and every
/// trace starts at the graph entry and follows graph edges.
pub trait TargetProgram {
    fn name(&self) -> &str;
    fn graph(&self) -> &ProgramGraph;
    fn execute(&self, input: &[u8]) -> TraceView;
    fn exec_cost_us(&self) -> u64 {
        DEFAULT_EXEC_COST_US
    }
    fn solve_annotation(&self, br: Branch) -> SolveAnnotation {
        let _ = br;
        SolveAnnotation::default()
    }
    /// Constructs an input that covers `flip` by patching `input`, or
    /// `None` when the flip is infeasible along this input's path (or the
    /// program exposes no byte-level model).
    fn try_flip(&self, input: &[u8], flip: Branch) -> Option<Vec<u8>>;
    /// Initial corpus suggested by the fixture.
    fn initial_seeds(&self) -> Vec<Vec<u8>> {
        vec![vec![0u8; 8]]
    }
}

#[derive(Debug, Error)]
pub enum ProgramError {
    #[error("malformed program document: {0}")]
    Malformed(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("branch [{0},{1}]: {2}")]
    Pred(u32, u32, PredError),
    #[error("block {0} has more than one default branch")]
    MultipleDefaults(u32),
}

/// Branch entry in the extended document: either a bare `[src, dst]` pair
/// or an object carrying a predicate and solver annotation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BranchDoc {
    Pair(u32, u32),
    Full {
        src: u32,
        dst: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pred: Option<PredDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        solvable: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        solve_cost_s: Option<f64>,
    },
}

impl BranchDoc {
    fn ends(&self) -> (u32, u32) {
        match self {
            BranchDoc::Pair(s, d) => (*s, *d),
            BranchDoc::Full { src, dst, .. } => (*src, *dst),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BlockEntry {
    id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default = "default_func")]
    func: String,
}

fn default_func() -> String {
    "main".to_owned()
}

/// Extended program document (External Interfaces).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub entry: u32,
    pub targets: Vec<u32>,
    blocks: Vec<BlockEntry>,
    branches: Vec<BranchDoc>,
    #[serde(default)]
    pub calls: Vec<(u32, u32)>,
    /// Suggested initial corpus, one byte array per seed.
    #[serde(default)]
    pub seeds: Vec<Vec<u8>>,
    #[serde(default)]
    pub exec_cost_s: Option<f64>,
}

/// Compiled predicate program: graph plus an input-driven branch walker.
#[derive(Debug, Clone)]
pub struct PredicateProgram {
    name: String,
    graph: ProgramGraph,
    preds: BTreeMap<Branch, BytePred>,
    annotations: BTreeMap<Branch, SolveAnnotation>,
    /// Per block: predicated successors in document order, then the
    /// optional default successor.
    dispatch: BTreeMap<BlockId, (Vec<(BlockId, BytePred)>, Option<BlockId>)>,
    seeds: Vec<Vec<u8>>,
    exec_cost_us: u64,
    doc: ProgramDoc,
}

impl PredicateProgram {
    pub fn from_json(source: &str) -> Result<Self, ProgramError> {
        let doc: ProgramDoc =
            serde_json::from_str(source).map_err(|e| ProgramError::Malformed(e.to_string()))?;
        Self::from_doc(doc)
    }

    pub fn from_doc(doc: ProgramDoc) -> Result<Self, ProgramError> {
        let blocks: Vec<(u32, Option<String>, String)> = doc
            .blocks
            .iter()
            .map(|b| (b.id, b.label.clone(), b.func.clone()))
            .collect();
        let pairs: Vec<(u32, u32)> = doc.branches.iter().map(|b| b.ends()).collect();
        let graph = ProgramGraph::build(doc.entry, &doc.targets, blocks, &pairs, &doc.calls)?;

        let mut preds = BTreeMap::new();
        let mut annotations = BTreeMap::new();
        for b in &doc.branches {
            if let BranchDoc::Full { src, dst, pred, solvable, solve_cost_s } = b {
                let br = Branch::new(*src, *dst);
                if let Some(p) = pred {
                    let compiled =
                        BytePred::from_doc(p).map_err(|e| ProgramError::Pred(*src, *dst, e))?;
                    preds.insert(br, compiled);
                }
                if solvable.is_some() || solve_cost_s.is_some() {
                    annotations.insert(
                        br,
                        SolveAnnotation {
                            solvable: solvable.unwrap_or(true),
                            cost_us: solve_cost_s
                                .map(|s| (s * MICROS_PER_SEC as f64) as u64)
                                .unwrap_or(DEFAULT_SOLVE_COST_US),
                        },
                    );
                }
            }
        }

        let mut dispatch = BTreeMap::new();
        for src in graph.blocks() {
            let succs = graph.successors(src);
            if succs.is_empty() {
                continue;
            }
            let mut guarded = Vec::new();
            let mut default = None;
            for &dst in succs {
                match preds.get(&Branch { src, dst }) {
                    Some(p) => guarded.push((dst, p.clone())),
                    None => {
                        if default.replace(dst).is_some() {
                            return Err(ProgramError::MultipleDefaults(src.0));
                        }
                    }
                }
            }
            dispatch.insert(src, (guarded, default));
        }

        let exec_cost_us = doc
            .exec_cost_s
            .map(|s| (s * MICROS_PER_SEC as f64) as u64)
            .unwrap_or(DEFAULT_EXEC_COST_US);
        Ok(PredicateProgram {
            name: doc.name.clone().unwrap_or_else(|| "program".into()),
            graph,
            preds,
            annotations,
            dispatch,
            seeds: doc.seeds.clone(),
            exec_cost_us,
            doc,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.doc).expect("document serializes")
    }

    pub fn pred(&self, br: Branch) -> Option<&BytePred> {
        self.preds.get(&br)
    }

    fn walk(&self, input: &[u8]) -> Vec<BlockId> {
        let mut blocks = vec![self.graph.entry()];
        let mut cur = self.graph.entry();
        // A DAG path never revisits a block; the cap guards cyclic docs.
        while blocks.len() <= self.graph.block_count() {
            let Some((guarded, default)) = self.dispatch.get(&cur) else { break };
            let mut next = None;
            for (dst, pred) in guarded {
                if pred.eval(input) {
                    next = Some(*dst);
                    break;
                }
            }
            let next = match next.or(*default) {
                Some(n) => n,
                None => break, // no predicate matched and no default: stop
            };
            blocks.push(next);
            cur = next;
        }
        blocks
    }
}

impl TargetProgram for PredicateProgram {
    fn name(&self) -> &str {
        &self.name
    }

    fn graph(&self) -> &ProgramGraph {
        &self.graph
    }

    fn execute(&self, input: &[u8]) -> TraceView {
        let blocks = self.walk(input);
        TraceView::from_blocks(&self.graph, blocks).expect("walker follows graph edges")
    }

    fn exec_cost_us(&self) -> u64 {
        self.exec_cost_us
    }

    fn solve_annotation(&self, br: Branch) -> SolveAnnotation {
        self.annotations.get(&br).copied().unwrap_or_default()
    }

    /// Patch-and-verify: apply the byte assignments the flipped branch
    /// needs, then re-walk. Divergence before the flip means the flip is
    /// infeasible along this input's path constraints.
    fn try_flip(&self, input: &[u8], flip: Branch) -> Option<Vec<u8>> {
        let mut candidate = input.to_vec();
        match self.preds.get(&flip) {
            Some(p) => {
                if !p.force_true(&mut candidate) {
                    return None;
                }
            }
            None => {
                // Default branch: every guarded sibling must evaluate false.
                let (guarded, default) = self.dispatch.get(&flip.src)?;
                if *default != Some(flip.dst) {
                    return None;
                }
                for (_, pred) in guarded {
                    if !pred.force_false(&mut candidate) {
                        return None;
                    }
                }
            }
        }
        let blocks = self.walk(&candidate);
        let covers = blocks.windows(2).any(|w| w[0] == flip.src && w[1] == flip.dst);
        if covers {
            Some(candidate)
        } else {
            None
        }
    }

    fn initial_seeds(&self) -> Vec<Vec<u8>> {
        if self.seeds.is_empty() {
            vec![vec![0u8; 8]]
        } else {
            self.seeds.clone()
        }
    }
}

/// Re-executes `input` and checks the trace covers `br`.
pub fn trace_covers(prog: &dyn TargetProgram, input: &[u8], br: Branch) -> Result<bool, ProbError> {
    let trace = prog.execute(input);
    Ok(trace.branches().iter().any(|&b| b == br))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_doc() -> String {
        serde_json::json!({
            "name": "tiny",
            "entry": 0,
            "targets": [2],
            "blocks": [
                {"id": 0, "label": "start", "func": "main"},
                {"id": 1, "func": "main"},
                {"id": 2, "func": "main"},
                {"id": 3, "func": "main"}
            ],
            "branches": [
                {"src": 0, "dst": 1, "pred": {"byte": 0, "op": "ge", "val": 128}},
                [0, 3],
                {"src": 1, "dst": 2, "pred": {"byte": 1, "op": "eq", "val": [0xAB, 0xCD]},
                 "solvable": true, "solve_cost_s": 2.0},
                [1, 3]
            ],
            "seeds": [[0xFF, 0, 0]]
        })
        .to_string()
    }

    #[test]
    fn walks_by_predicates() {
        let p = PredicateProgram::from_json(&tiny_doc()).unwrap();
        let t = p.execute(&[0xFF, 0xAB, 0xCD]);
        assert_eq!(
            t.blocks(),
            &[BlockId(0), BlockId(1), BlockId(2)]
        );
        let t2 = p.execute(&[0x00]);
        assert_eq!(t2.blocks(), &[BlockId(0), BlockId(3)]);
        let t3 = p.execute(&[0xFF, 0xAB, 0x00]);
        assert_eq!(t3.blocks(), &[BlockId(0), BlockId(1), BlockId(3)]);
    }

    #[test]
    fn annotations_and_defaults() {
        let p = PredicateProgram::from_json(&tiny_doc()).unwrap();
        let ann = p.solve_annotation(Branch::new(1, 2));
        assert!(ann.solvable);
        assert_eq!(ann.cost_us, 2 * MICROS_PER_SEC);
        assert_eq!(p.solve_annotation(Branch::new(0, 1)), SolveAnnotation::default());
    }

    #[test]
    fn try_flip_patches_magic() {
        let p = PredicateProgram::from_json(&tiny_doc()).unwrap();
        let got = p.try_flip(&[0xFF, 0, 0], Branch::new(1, 2)).unwrap();
        assert_eq!(got, vec![0xFF, 0xAB, 0xCD]);
        assert!(trace_covers(&p, &got, Branch::new(1, 2)).unwrap());
    }

    #[test]
    fn try_flip_reports_infeasible_path() {
        let p = PredicateProgram::from_json(&tiny_doc()).unwrap();
        // From an input that goes 0->3, flipping 1->2 requires byte0 >= 128
        // as well; the patch only sets the flip bytes, so the walk diverges.
        assert!(p.try_flip(&[0x00], Branch::new(1, 2)).is_none());
    }

    #[test]
    fn try_flip_default_branch_negates_siblings() {
        let p = PredicateProgram::from_json(&tiny_doc()).unwrap();
        let got = p.try_flip(&[0xFF, 0xAB, 0xCD], Branch::new(1, 3)).unwrap();
        assert!(trace_covers(&p, &got, Branch::new(1, 3)).unwrap());
    }

    #[test]
    fn multiple_defaults_rejected() {
        let doc = serde_json::json!({
            "entry": 0, "targets": [1],
            "blocks": [{"id":0,"func":"main"},{"id":1,"func":"main"},{"id":2,"func":"main"}],
            "branches": [[0,1],[0,2]]
        })
        .to_string();
        assert!(matches!(
            PredicateProgram::from_json(&doc),
            Err(ProgramError::MultipleDefaults(0))
        ));
    }

    #[test]
    fn document_roundtrip() {
        let p = PredicateProgram::from_json(&tiny_doc()).unwrap();
        let p2 = PredicateProgram::from_json(&p.to_json()).unwrap();
        assert_eq!(p2.graph().block_count(), 4);
        assert_eq!(p2.initial_seeds(), vec![vec![0xFF, 0, 0]]);
    }
}
