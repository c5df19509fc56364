//! Scenario construction: seeded uniform deployment, anchor placement and
//! unit-disk connectivity.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::anchor_space::{eval_f, AnchorCoords, AnchorSet, PhysPoint};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Area {
    pub width: f64,
    pub height: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AnchorPlacement {
    /// Anchors are sensors of the deployment, picked at random.
    RandomNodes,
    /// Anchors are external emitters placed anywhere in the area.
    ExternalPoints,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NetworkConfig {
    pub node_count: usize,
    pub area: Area,
    pub radio_range: f64,
    pub anchor_count: usize,
    pub anchor_placement: AnchorPlacement,
    pub rng_seed: u64,
    pub min_separation: f64,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.node_count == 0 {
            return Err(Error::InvalidConfig("node_count must be positive"));
        }
        if !(self.area.width > 0.0 && self.area.height > 0.0)
            || !self.area.width.is_finite()
            || !self.area.height.is_finite()
        {
            return Err(Error::InvalidConfig("area must have positive finite sides"));
        }
        if !(self.radio_range > 0.0) || !self.radio_range.is_finite() {
            return Err(Error::InvalidConfig("radio_range must be positive"));
        }
        if self.anchor_count < 3 {
            return Err(Error::InvalidConfig("anchor_count must be at least 3"));
        }
        if self.anchor_placement == AnchorPlacement::RandomNodes
            && self.anchor_count > self.node_count
        {
            return Err(Error::InvalidConfig("more anchors than nodes"));
        }
        if !(self.min_separation >= 1e-6) || !self.min_separation.is_finite() {
            return Err(Error::InvalidConfig("min_separation must be at least 1e-6"));
        }
        Ok(())
    }
}

/// A deployed network. Positions are ground truth; routing only ever sees
/// `coords` and `adjacency`.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkGraph {
    nodes: Vec<PhysPoint>,
    adjacency: Vec<Vec<usize>>,
    anchors: AnchorSet,
    anchor_nodes: Vec<usize>,
    coords: Vec<AnchorCoords>,
    radio_range: f64,
}

impl NetworkGraph {
    /// Builds the unit-disk graph over explicit positions.
    ///
    /// `anchor_nodes` lists the node indices that double as anchors (empty
    /// for external anchors); it is bookkeeping only.
    pub fn from_parts(
        nodes: Vec<PhysPoint>,
        anchors: AnchorSet,
        radio_range: f64,
        anchor_nodes: Vec<usize>,
    ) -> Result<Self> {
        if !(radio_range > 0.0) {
            return Err(Error::InvalidConfig("radio_range must be positive"));
        }
        if nodes.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(&bad) = anchor_nodes.iter().find(|&&i| i >= nodes.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: nodes.len(),
            });
        }
        let adjacency = unit_disk_adjacency(&nodes, radio_range);
        let coords = nodes.iter().map(|p| eval_f(*p, &anchors)).collect();
        Ok(Self {
            nodes,
            adjacency,
            anchors,
            anchor_nodes,
            coords,
            radio_range,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[PhysPoint] {
        &self.nodes
    }

    pub fn position(&self, v: usize) -> Result<PhysPoint> {
        self.nodes.get(v).copied().ok_or(Error::IndexOutOfRange {
            index: v,
            len: self.len(),
        })
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn anchors(&self) -> &AnchorSet {
        &self.anchors
    }

    pub fn anchor_nodes(&self) -> &[usize] {
        &self.anchor_nodes
    }

    pub fn coords(&self) -> &[AnchorCoords] {
        &self.coords
    }

    pub fn radio_range(&self) -> f64 {
        self.radio_range
    }

    /// Neighbors of `v`, ascending.
    pub fn neighbors(&self, v: usize) -> Result<&[usize]> {
        self.adjacency
            .get(v)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index: v,
                len: self.len(),
            })
    }

    pub fn mean_degree(&self) -> f64 {
        let total: usize = self.adjacency.iter().map(Vec::len).sum();
        total as f64 / self.len() as f64
    }

    /// Connected-component label of every node (labels in discovery order).
    pub fn component_labels(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.len()];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.len() {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &w in &self.adjacency[u] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

fn unit_disk_adjacency(nodes: &[PhysPoint], range: f64) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); nodes.len()];
    for u in 0..nodes.len() {
        for v in u + 1..nodes.len() {
            if nodes[u].distance(nodes[v]) <= range {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    // pushes happen in ascending order of the partner, so lists are sorted
    adj
}

/// Deploys a network from a config; deterministic in `rng_seed`.
pub fn generate(config: &NetworkConfig) -> Result<NetworkGraph> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let area = config.area;
    let budget = 1000 * config.node_count;
    let mut attempts = 0;
    let mut nodes: Vec<PhysPoint> = Vec::with_capacity(config.node_count);
    let draw = |rng: &mut ChaCha8Rng| {
        PhysPoint::new(
            rng.gen::<f64>() * area.width,
            rng.gen::<f64>() * area.height,
        )
    };
    while nodes.len() < config.node_count {
        if attempts >= budget {
            return Err(Error::InfeasibleDensity { attempts });
        }
        attempts += 1;
        let p = draw(&mut rng);
        if nodes.iter().all(|q| q.distance(p) >= config.min_separation) {
            nodes.push(p);
        }
    }

    let (anchor_pos, anchor_nodes) = match config.anchor_placement {
        AnchorPlacement::RandomNodes => {
            let mut idx =
                rand::seq::index::sample(&mut rng, config.node_count, config.anchor_count)
                    .into_vec();
            idx.sort_unstable();
            (idx.iter().map(|&i| nodes[i]).collect(), idx)
        }
        AnchorPlacement::ExternalPoints => {
            let mut pts: Vec<PhysPoint> = Vec::with_capacity(config.anchor_count);
            let mut tries = 0;
            while pts.len() < config.anchor_count {
                if tries >= budget {
                    return Err(Error::InfeasibleDensity { attempts: tries });
                }
                tries += 1;
                let p = draw(&mut rng);
                let clear = nodes
                    .iter()
                    .chain(pts.iter())
                    .all(|q| q.distance(p) >= config.min_separation);
                if clear {
                    pts.push(p);
                }
            }
            (pts, Vec::new())
        }
    };
    let anchors = AnchorSet::new(anchor_pos)?;
    NetworkGraph::from_parts(nodes, anchors, config.radio_range, anchor_nodes)
}
