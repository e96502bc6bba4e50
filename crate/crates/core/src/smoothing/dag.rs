//! Partial successive abstraction over a DAG of context generalizations.

use std::collections::BTreeSet;

use super::{ConditionalDistribution, Observation, SmoothingError, SuccessiveAbstraction};

#[derive(Debug, Clone, PartialEq)]
pub struct DagNode {
    /// One-step generalizations of this context. Empty only for roots.
    pub parents: Vec<usize>,
    pub observation: Observation,
    /// Given distribution of a root node.
    pub fixed: Option<ConditionalDistribution>,
}

impl DagNode {
    pub fn root(dist: ConditionalDistribution) -> Self {
        let dim = dist.len();
        DagNode { parents: Vec::new(), observation: Observation::new(vec![0.0; dim], 0), fixed: Some(dist) }
    }

    pub fn context(parents: Vec<usize>, observation: Observation) -> Self {
        DagNode { parents, observation, fixed: None }
    }
}

/// Contexts linked to their one-step generalizations. Every parentless node
/// must carry a given distribution; every other node is estimated from its
/// observation and its parents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeneralizationDag {
    nodes: Vec<DagNode>,
}

impl GeneralizationDag {
    pub fn new(nodes: Vec<DagNode>) -> Result<Self, SmoothingError> {
        for (id, node) in nodes.iter().enumerate() {
            if let Some(&p) = node.parents.iter().find(|&&p| p >= nodes.len()) {
                return Err(SmoothingError::InvalidGraph(format!("node {id} has unknown parent {p}")));
            }
            match (node.parents.is_empty(), node.fixed.is_some()) {
                (true, false) => {
                    return Err(SmoothingError::InvalidGraph(format!(
                        "node {id} has no parents and no given distribution"
                    )))
                }
                (false, true) => {
                    return Err(SmoothingError::InvalidGraph(format!(
                        "node {id} has both parents and a given distribution"
                    )))
                }
                _ => {}
            }
        }
        Ok(GeneralizationDag { nodes })
    }

    pub fn nodes(&self) -> &[DagNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Parents-first order; among ready nodes the smallest index goes first.
    pub fn topological_order(&self) -> Result<Vec<usize>, SmoothingError> {
        let n = self.nodes.len();
        let mut pending: Vec<usize> = self.nodes.iter().map(|node| distinct(&node.parents).len()).collect();
        let mut children = vec![Vec::new(); n];
        for (id, node) in self.nodes.iter().enumerate() {
            for p in distinct(&node.parents) {
                children[p].push(id);
            }
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| pending[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(next) = ready.pop_first() {
            order.push(next);
            for &c in &children[next] {
                pending[c] -= 1;
                if pending[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() != n {
            return Err(SmoothingError::Cycle);
        }
        Ok(order)
    }

    pub fn smooth(&self, sa: &SuccessiveAbstraction) -> Result<Vec<ConditionalDistribution>, SmoothingError> {
        let order = self.topological_order()?;
        self.smooth_in_order(sa, &order)
    }

    /// Evaluates nodes in the given order, which must list every node once
    /// with parents before children.
    pub fn smooth_in_order(
        &self,
        sa: &SuccessiveAbstraction,
        order: &[usize],
    ) -> Result<Vec<ConditionalDistribution>, SmoothingError> {
        let mut out: Vec<Option<ConditionalDistribution>> = vec![None; self.nodes.len()];
        if order.len() != self.nodes.len() {
            return Err(SmoothingError::InvalidGraph("order does not list every node".into()));
        }
        for &id in order {
            let node = self
                .nodes
                .get(id)
                .ok_or_else(|| SmoothingError::InvalidGraph(format!("order names unknown node {id}")))?;
            if out[id].is_some() {
                return Err(SmoothingError::InvalidGraph(format!("order lists node {id} twice")));
            }
            let dist = match &node.fixed {
                Some(d) => d.clone(),
                None => {
                    let parents =
                        node.parents.iter().map(|&p| out[p].as_ref()).collect::<Option<Vec<_>>>().ok_or_else(|| {
                            SmoothingError::InvalidGraph(format!("node {id} evaluated before a parent"))
                        })?;
                    let obs = &node.observation;
                    match parents.as_slice() {
                        [single] => sa.step(&obs.freqs, single, obs.count)?,
                        many => sa.partial(&obs.freqs, obs.count, many)?,
                    }
                }
            };
            out[id] = Some(dist);
        }
        Ok(out.into_iter().map(|d| d.expect("every node evaluated")).collect())
    }
}

fn distinct(parents: &[usize]) -> BTreeSet<usize> {
    parents.iter().copied().collect()
}

/// Estimates every node of `dag` with the default weighting.
pub fn smooth_dag(dag: &GeneralizationDag) -> Result<Vec<ConditionalDistribution>, SmoothingError> {
    dag.smooth(&SuccessiveAbstraction::default())
}
