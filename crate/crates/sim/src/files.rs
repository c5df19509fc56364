//! JSON scenario and network files.
//!
//! A scenario file is a `NetworkConfig` with an optional `policy` block. A
//! network file is a deployed scenario: the config it came from plus node
//! positions, anchors and provenance. Commands taking `--net` accept either.

use std::fs;
use std::path::Path;

use anchor_coords::anchor_space::{AnchorSet, PhysPoint};
use anchor_coords::network::{generate, NetworkConfig, NetworkGraph};
use anchor_coords::routing::RoutingPolicy;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SimError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub network: NetworkConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<RoutingPolicy>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub seed: u64,
    pub spec_hash: String,
    pub config: NetworkConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<RoutingPolicy>,
    pub radio_range: f64,
    pub nodes: Vec<PhysPoint>,
    pub anchors: AnchorSet,
    pub anchor_nodes: Vec<usize>,
}

impl NetworkFile {
    pub fn from_graph(scenario: &Scenario, spec_hash: String, g: &NetworkGraph) -> Self {
        Self {
            seed: scenario.network.rng_seed,
            spec_hash,
            config: scenario.network.clone(),
            policy: scenario.policy,
            radio_range: g.radio_range(),
            nodes: g.nodes().to_vec(),
            anchors: g.anchors().clone(),
            anchor_nodes: g.anchor_nodes().to_vec(),
        }
    }

    pub fn graph(&self) -> Result<NetworkGraph> {
        Ok(NetworkGraph::from_parts(
            self.nodes.clone(),
            self.anchors.clone(),
            self.radio_range,
            self.anchor_nodes.clone(),
        )?)
    }
}

/// A network ready for routing, with the provenance of the file it came from.
#[derive(Clone, Debug)]
pub struct LoadedNetwork {
    pub graph: NetworkGraph,
    pub config: NetworkConfig,
    pub policy: Option<RoutingPolicy>,
    pub seed: u64,
    pub spec_hash: String,
}

/// SHA-256 of the canonical (sorted-key, compact) JSON form.
pub fn spec_hash<T: Serialize>(value: &T) -> String {
    let canonical = serde_json::to_value(value).expect("serializable spec");
    let bytes = serde_json::to_vec(&canonical).expect("serializable value");
    hex::encode(Sha256::digest(&bytes))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| SimError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| SimError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| SimError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_scenario(path: &Path) -> Result<Scenario> {
    read_json(path)
}

/// Loads a network file, or generates the network described by a scenario.
pub fn load_network(path: &Path) -> Result<LoadedNetwork> {
    let value: serde_json::Value = read_json(path)?;
    let parse_err = |source| SimError::Parse {
        path: path.to_path_buf(),
        source,
    };
    if value.get("nodes").is_some() {
        let file: NetworkFile = serde_json::from_value(value).map_err(parse_err)?;
        if file.anchors.len() != file.config.anchor_count
            || file.nodes.len() != file.config.node_count
        {
            return Err(SimError::Input(format!(
                "{}: node or anchor count disagrees with config",
                path.display()
            )));
        }
        Ok(LoadedNetwork {
            graph: file.graph()?,
            config: file.config,
            policy: file.policy,
            seed: file.seed,
            spec_hash: file.spec_hash,
        })
    } else {
        let scenario: Scenario = serde_json::from_value(value).map_err(parse_err)?;
        let hash = spec_hash(&scenario);
        Ok(LoadedNetwork {
            graph: generate(&scenario.network)?,
            seed: scenario.network.rng_seed,
            config: scenario.network,
            policy: scenario.policy,
            spec_hash: hash,
        })
    }
}
