//! Social-network release: the owner answers every user `j` reachable in
//! the graph at level `ε_j = 1/d(owner, j)`, all from one noise path per
//! coordinate. A coalition `A` then learns at most what the single response
//! at `max_{j∈A} ε_j` reveals.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::level::PrivacyLevel;
use crate::mechanism::{MechanismState, PrivateVector, Response};

pub type NodeId = u64;

#[derive(Debug, Clone, PartialEq)]
pub struct SocialGraph {
    nodes: BTreeSet<NodeId>,
    adjacency: BTreeMap<NodeId, BTreeSet<NodeId>>,
}

impl SocialGraph {
    pub fn from_edges(edges: &[(NodeId, NodeId)]) -> Self {
        let mut nodes = BTreeSet::new();
        let mut adjacency: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
        for &(a, b) in edges {
            nodes.insert(a);
            nodes.insert(b);
            if a != b {
                adjacency.entry(a).or_default().insert(b);
                adjacency.entry(b).or_default().insert(a);
            }
        }
        SocialGraph { nodes, adjacency }
    }

    /// Parses an edge list: one `u v` pair of integers per line, blank lines
    /// and `#` comments ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<NodeId>()
                    .map_err(|e| Error::Parse(format!("line {}: bad node {s:?}: {e}", lineno + 1)))
            };
            match fields.as_slice() {
                [a, b] => edges.push((parse(a)?, parse(b)?)),
                _ => {
                    return Err(Error::Parse(format!(
                        "line {}: expected two node ids, got {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(SocialGraph::from_edges(&edges))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.nodes.contains(&node)
    }

    /// Unweighted shortest-path distances from `source`; unreachable nodes
    /// are absent.
    pub fn distances(&self, source: NodeId) -> BTreeMap<NodeId, u64> {
        let mut dist = BTreeMap::new();
        if !self.contains(source) {
            return dist;
        }
        dist.insert(source, 0);
        let mut queue = VecDeque::from([source]);
        while let Some(node) = queue.pop_front() {
            let d = dist[&node];
            for &next in self.adjacency.get(&node).into_iter().flatten() {
                if !dist.contains_key(&next) {
                    dist.insert(next, d + 1);
                    queue.push_back(next);
                }
            }
        }
        dist
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeResponse {
    pub node: NodeId,
    /// `None` when the node cannot be reached from the owner.
    pub distance: Option<u64>,
    pub eps: Option<PrivacyLevel>,
    pub response: Option<Response>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    /// Reachable users by decreasing ε, then unreachable ones.
    pub per_node: Vec<NodeResponse>,
    /// Largest ε handed to anyone.
    pub collusion_bound: Option<PrivacyLevel>,
    /// Largest ε within the requested coalition, if one was given.
    pub subset_bound: Option<PrivacyLevel>,
    /// The owner's state after all releases.
    pub state: MechanismState,
}

/// Releases `data` to every other node. Levels are materialized from the
/// largest ε down so every new level sits below the stored range and is
/// drawn with the backward kernel; no bridge sampling is ever needed.
pub fn run_scenario(
    graph: &SocialGraph,
    owner: NodeId,
    data: PrivateVector,
    alpha: f64,
    seed: u64,
    subset: Option<&[NodeId]>,
) -> Result<ScenarioResult> {
    if !graph.contains(owner) {
        return Err(Error::InvalidArgument(format!("owner {owner} is not in the graph")));
    }
    if let Some(missing) = subset.into_iter().flatten().find(|n| !graph.contains(**n)) {
        return Err(Error::InvalidArgument(format!("subset node {missing} is not in the graph")));
    }
    let dist = graph.distances(owner);
    let mut state = MechanismState::new(data, alpha, seed)?;

    let distinct: BTreeSet<u64> = dist.values().copied().filter(|&d| d > 0).collect();
    let mut by_distance: BTreeMap<u64, (PrivacyLevel, Response)> = BTreeMap::new();
    for d in distinct {
        let eps = PrivacyLevel::new(1.0 / d as f64)?;
        by_distance.insert(d, (eps, state.release(eps)?));
    }

    let mut reachable: Vec<(u64, NodeId)> = dist
        .iter()
        .filter(|(_, &d)| d > 0)
        .map(|(&n, &d)| (d, n))
        .collect();
    reachable.sort_unstable();
    let mut per_node: Vec<NodeResponse> = reachable
        .into_iter()
        .map(|(d, node)| {
            let (eps, response) = by_distance[&d].clone();
            NodeResponse {
                node,
                distance: Some(d),
                eps: Some(eps),
                response: Some(response),
            }
        })
        .collect();
    per_node.extend(
        graph
            .nodes
            .iter()
            .filter(|n| !dist.contains_key(n))
            .map(|&node| NodeResponse {
                node,
                distance: None,
                eps: None,
                response: None,
            }),
    );

    let level_of = |node: &NodeId| {
        dist.get(node)
            .filter(|&&d| d > 0)
            .map(|&d| by_distance[&d].0)
    };
    let max_level = |it: &mut dyn Iterator<Item = PrivacyLevel>| {
        it.fold(None, |acc: Option<PrivacyLevel>, e| match acc {
            Some(a) if a.value() >= e.value() => Some(a),
            _ => Some(e),
        })
    };
    let collusion_bound = max_level(&mut per_node.iter().filter_map(|r| r.eps));
    let subset_bound = subset.and_then(|s| max_level(&mut s.iter().filter_map(level_of)));
    Ok(ScenarioResult {
        per_node,
        collusion_bound,
        subset_bound,
        state,
    })
}
