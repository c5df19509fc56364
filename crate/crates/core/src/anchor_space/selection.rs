//! In-flight anchor selection.
//!
//! When source and destination sit on opposite borders, every anchor lies
//! between them and the apparent destination can point backwards. Far from
//! the destination the message therefore routes on the anchors close to `D`
//! only, and switches back to the full set once it gets near. Two thresholds
//! give hysteresis:
//!
//! * `l_A = max(‖f(D)‖∞, ‖f(X₀)‖∞)`, an estimate of the network diameter;
//! * `l_X = ‖f(D) − f(X)‖∞`, a lower bound on `d(X, D)`;
//! * all → subset when `l_X > 2·l_A/3`, keeping `{i : f(D)_i < l_A/3}`;
//! * subset → all when `l_X < l_A/2`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mdvec::VecN;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SubsetMode {
    All,
    Subset,
}

/// Active anchor indices plus the mode flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetState {
    mode: SubsetMode,
    active: Vec<usize>,
}

impl SubsetState {
    pub fn all(n: usize) -> Self {
        Self {
            mode: SubsetMode::All,
            active: (0..n).collect(),
        }
    }

    /// A subset state over explicit indices (sorted, non-empty).
    pub fn subset(mut active: Vec<usize>) -> Result<Self> {
        if active.is_empty() {
            return Err(Error::EmptySubset);
        }
        active.sort_unstable();
        active.dedup();
        Ok(Self {
            mode: SubsetMode::Subset,
            active,
        })
    }

    pub fn mode(&self) -> SubsetMode {
        self.mode
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Restricts a full coordinate vector to the active anchors.
    pub fn mask(&self, v: &VecN) -> Result<VecN> {
        match self.mode {
            SubsetMode::All => Ok(v.clone()),
            SubsetMode::Subset => v.select(&self.active),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubsetThresholds {
    pub l_a: f64,
    pub l_x: f64,
}

impl SubsetThresholds {
    pub fn shrink(&self) -> bool {
        self.l_x > 2.0 * self.l_a / 3.0
    }

    pub fn restore(&self) -> bool {
        self.l_x < self.l_a / 2.0
    }
}

pub fn subset_thresholds(fx0: &VecN, fd: &VecN, fx: &VecN) -> Result<SubsetThresholds> {
    let l_a = fd.norm_inf().max(fx0.norm_inf());
    let l_x = fd.sub(fx)?.norm_inf();
    Ok(SubsetThresholds { l_a, l_x })
}

/// One step of the hysteresis rule. Vectors are over all anchors.
///
/// Returns [`Error::EmptySubset`] when a shrink is due but no anchor is
/// within `l_A/3` of the destination.
pub fn select_anchor_subset(
    fx0: &VecN,
    fd: &VecN,
    fx: &VecN,
    current: &SubsetState,
) -> Result<SubsetState> {
    if fx0.len() != fd.len() {
        return Err(Error::DimensionMismatch {
            left: fx0.len(),
            right: fd.len(),
        });
    }
    let t = subset_thresholds(fx0, fd, fx)?;
    match current.mode {
        SubsetMode::All if t.shrink() => {
            let radius = t.l_a / 3.0;
            let active: Vec<usize> = fd
                .as_slice()
                .iter()
                .enumerate()
                .filter(|(_, d)| **d < radius)
                .map(|(i, _)| i)
                .collect();
            SubsetState::subset(active)
        }
        SubsetMode::Subset if t.restore() => Ok(SubsetState::all(fd.len())),
        _ => Ok(current.clone()),
    }
}
