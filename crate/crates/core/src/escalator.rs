//! Escalator trees for sums of generalized m-gonal numbers.
//!
//! The root is the empty sum (truant 1). A node `[a_1, ..., a_n]` with truant
//! `T` has one child `[a_1, ..., a_n, a]` for each `a_n <= a <= T` such that
//! the child represents `T`. Nodes representing all of `[1, B]` are leaves.
//! The largest truant in a complete tree is the empirical γ_m.
//!
//! Nodes are stored in one flat vector ordered lexicographically by
//! coefficient vector, so the root sits at index 0 and every parent precedes
//! its children. The JSON document uses the same array.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polygonal::{polygonal_values_up_to, PolygonalForm, RepresentationSet, Truant};

pub const DEFAULT_MAX_DEPTH: usize = 4;
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeConfig {
    pub bound: u64,
    pub max_depth: usize,
    pub node_cap: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            bound: crate::polygonal::DEFAULT_BOUND,
            max_depth: DEFAULT_MAX_DEPTH,
            node_cap: DEFAULT_NODE_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EscalatorNode {
    pub form: PolygonalForm,
    pub truant: Truant,
    /// Indices into [`EscalatorTree::nodes`], ascending by last coefficient.
    pub children: Vec<usize>,
}

impl EscalatorNode {
    /// Number of coefficients; the root has depth 0.
    pub fn depth(&self) -> usize {
        self.form.rank()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EscalatorTree {
    m: u64,
    bound: u64,
    max_depth: usize,
    nodes: Vec<EscalatorNode>,
    /// Set when the node cap stopped expansion before `max_depth`.
    truncated: bool,
}

/// Whether a γ estimate comes from a complete tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaKind {
    /// Every frontier node is B-universal.
    Empirical,
    /// Depth or node cap reached with non-universal frontier nodes.
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GammaEstimate {
    pub value: u64,
    pub kind: GammaKind,
}

impl fmt::Display for GammaEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GammaKind::Empirical => write!(f, "{} (empirical γ)", self.value),
            GammaKind::LowerBound => write!(f, ">= {} (lower bound)", self.value),
        }
    }
}

/// Children of a node: every `a` in `[a_n, T]` (`[1, T]` at the root) whose
/// extension represents the truant `T`, ascending in `a`.
pub fn escalate(form: &PolygonalForm, truant: u64, bound: u64) -> Result<Vec<PolygonalForm>> {
    let set = crate::polygonal::represented_set(form, bound.max(truant))?;
    let values = polygonal_values_up_to(form.m(), bound.max(truant))?;
    Ok(escalations(form, &set, truant, &values)?
        .into_iter()
        .map(|(f, _)| f)
        .collect())
}

fn escalations(
    form: &PolygonalForm,
    set: &RepresentationSet,
    truant: u64,
    values: &[u64],
) -> Result<Vec<(PolygonalForm, RepresentationSet)>> {
    let lo = form.coeffs().last().copied().unwrap_or(1);
    let mut out = Vec::new();
    for a in lo..=truant {
        let child_set = set.fold(a, values);
        if child_set.contains(truant) {
            out.push((form.extended(a)?, child_set));
        }
    }
    Ok(out)
}

struct Pending {
    index: usize,
    set: RepresentationSet,
}

/// Builds the tree breadth-first, erroring if the node cap is hit.
pub fn build_tree(m: u64, config: &TreeConfig) -> Result<EscalatorTree> {
    let tree = grow_tree(m, config)?;
    if tree.truncated {
        return Err(Error::Resource(format!(
            "escalator tree for m={m} exceeds the node cap of {}",
            config.node_cap
        )));
    }
    Ok(tree)
}

/// Like [`build_tree`], but a node-cap hit returns the partial tree with
/// [`EscalatorTree::is_truncated`] set.
pub fn grow_tree(m: u64, config: &TreeConfig) -> Result<EscalatorTree> {
    if config.max_depth < 1 || config.bound < 1 || config.node_cap < 1 {
        return Err(Error::domain(
            "max_depth, bound and node_cap must be positive",
        ));
    }
    let root = PolygonalForm::empty(m)?;
    let values = polygonal_values_up_to(m, config.bound)?;
    let root_set = RepresentationSet::zero_only(config.bound)?;
    let mut nodes = vec![EscalatorNode {
        form: root,
        truant: root_set.truant(),
        children: Vec::new(),
    }];
    let mut frontier = vec![Pending {
        index: 0,
        set: root_set,
    }];
    let mut truncated = false;

    for _depth in 0..config.max_depth {
        let expandable: Vec<&Pending> = frontier
            .iter()
            .filter(|p| !nodes[p.index].truant.is_universal())
            .collect();
        if expandable.is_empty() {
            break;
        }
        let families: Vec<Vec<(PolygonalForm, RepresentationSet)>> = expandable
            .par_iter()
            .map(|p| {
                let node = &nodes[p.index];
                let t = node
                    .truant
                    .value()
                    .expect("expandable nodes have a finite truant");
                escalations(&node.form, &p.set, t, &values)
            })
            .collect::<Result<_>>()?;

        let added: usize = families.iter().map(Vec::len).sum();
        if nodes.len() + added > config.node_cap {
            truncated = true;
            break;
        }
        let mut next = Vec::with_capacity(added);
        for (parent, family) in expandable.iter().map(|p| p.index).zip(families) {
            for (form, set) in family {
                let index = nodes.len();
                nodes.push(EscalatorNode {
                    form,
                    truant: set.truant(),
                    children: Vec::new(),
                });
                nodes[parent].children.push(index);
                next.push(Pending { index, set });
            }
        }
        frontier = next;
    }

    Ok(EscalatorTree::from_parts(
        m,
        config.bound,
        config.max_depth,
        nodes,
        truncated,
    ))
}

impl EscalatorTree {
    /// Reorders an arena (root at 0, parents before children) lexicographically
    /// by coefficient vector and remaps child indices.
    fn from_parts(
        m: u64,
        bound: u64,
        max_depth: usize,
        nodes: Vec<EscalatorNode>,
        truncated: bool,
    ) -> Self {
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&i, &j| nodes[i].form.coeffs().cmp(nodes[j].form.coeffs()));
        let mut position = vec![0usize; nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            position[old] = new;
        }
        let mut slots: Vec<Option<EscalatorNode>> = nodes.into_iter().map(Some).collect();
        let nodes = order
            .iter()
            .map(|&old| {
                let mut node = slots[old].take().expect("each node moved once");
                for c in &mut node.children {
                    *c = position[*c];
                }
                node
            })
            .collect();
        Self {
            m,
            bound,
            max_depth,
            nodes,
            truncated,
        }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn nodes(&self) -> &[EscalatorNode] {
        &self.nodes
    }

    pub fn root(&self) -> &EscalatorNode {
        &self.nodes[0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn nodes_at_depth(&self, depth: usize) -> impl Iterator<Item = &EscalatorNode> {
        self.nodes.iter().filter(move |n| n.depth() == depth)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.truant.is_universal())
            .count()
    }

    /// Largest finite truant over all nodes.
    pub fn max_truant(&self) -> u64 {
        self.nodes
            .iter()
            .filter_map(|n| n.truant.value())
            .max()
            .unwrap_or(1)
    }

    /// True when no node still waits for expansion: every childless node is
    /// B-universal and the node cap was not hit.
    pub fn is_complete(&self) -> bool {
        !self.truncated
            && self
                .nodes
                .iter()
                .all(|n| !n.children.is_empty() || n.truant.is_universal())
    }

    /// Depth of the shallowest B-universal node.
    pub fn min_leaf_depth(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter(|n| n.truant.is_universal())
            .map(EscalatorNode::depth)
            .min()
    }

    pub fn gamma_estimate(&self) -> GammaEstimate {
        GammaEstimate {
            value: self.max_truant(),
            kind: if self.is_complete() {
                GammaKind::Empirical
            } else {
                GammaKind::LowerBound
            },
        }
    }

    pub fn to_document(&self) -> TreeDocument {
        TreeDocument {
            m: self.m,
            bound: self.bound,
            max_depth: self.max_depth,
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeDocument {
                    coeffs: n.form.coeffs().to_vec(),
                    truant: n.truant,
                    children: n.children.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_document())
            .map_err(|e| Error::Internal(format!("tree serialization failed: {e}")))
    }

    /// Parses and validates a tree document.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: TreeDocument = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        Self::from_document(doc)
    }

    pub fn from_document(doc: TreeDocument) -> Result<Self> {
        let bad = |path: String, message: String| Error::Parse { path, message };
        if doc.nodes.is_empty() {
            return Err(bad("nodes".into(), "tree has no root".into()));
        }
        if !doc.nodes[0].coeffs.is_empty() {
            return Err(bad(
                "nodes[0].coeffs".into(),
                "root must be the empty form".into(),
            ));
        }
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        let mut has_parent = vec![false; doc.nodes.len()];
        for (i, n) in doc.nodes.iter().enumerate() {
            if i > 0 && doc.nodes[i - 1].coeffs >= n.coeffs {
                return Err(bad(
                    format!("nodes[{i}].coeffs"),
                    "nodes must be strictly increasing lexicographically".into(),
                ));
            }
            if n.coeffs.len() > doc.max_depth {
                return Err(bad(
                    format!("nodes[{i}].coeffs"),
                    "node deeper than max_depth".into(),
                ));
            }
            for (k, &c) in n.children.iter().enumerate() {
                let path = format!("nodes[{i}].children[{k}]");
                let child = doc
                    .nodes
                    .get(c)
                    .ok_or_else(|| bad(path.clone(), format!("index {c} out of range")))?;
                let extends =
                    child.coeffs.len() == n.coeffs.len() + 1 && child.coeffs.starts_with(&n.coeffs);
                if !extends || has_parent[c] {
                    return Err(bad(path, format!("node {c} is not a child of node {i}")));
                }
                has_parent[c] = true;
            }
            let form = if n.coeffs.is_empty() {
                PolygonalForm::empty(doc.m)
            } else {
                PolygonalForm::new(doc.m, n.coeffs.clone())
            }
            .map_err(|e| bad(format!("nodes[{i}].coeffs"), e.to_string()))?;
            if form.coeffs() != n.coeffs.as_slice() {
                return Err(bad(
                    format!("nodes[{i}].coeffs"),
                    "coefficients must be sorted".into(),
                ));
            }
            nodes.push(EscalatorNode {
                form,
                truant: n.truant,
                children: n.children.clone(),
            });
        }
        if let Some(orphan) = (1..nodes.len()).find(|&i| !has_parent[i]) {
            return Err(bad(format!("nodes[{orphan}]"), "node has no parent".into()));
        }
        Ok(Self {
            m: doc.m,
            bound: doc.bound,
            max_depth: doc.max_depth,
            nodes,
            truncated: false,
        })
    }
}

/// On-disk form of an [`EscalatorTree`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDocument {
    pub m: u64,
    pub bound: u64,
    pub max_depth: usize,
    pub nodes: Vec<NodeDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDocument {
    pub coeffs: Vec<u64>,
    pub truant: Truant,
    pub children: Vec<usize>,
}
