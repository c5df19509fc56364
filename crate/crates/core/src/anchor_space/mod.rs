//! The anchor coordinate system.
//!
//! A node at physical position `X` is addressed by `f(X)`, the vector of its
//! Euclidean distances to `n` anchors. The image `f(R²)` is a two-dimensional
//! surface in `Rⁿ` wherever `X` and the anchors are not all on one line; this
//! module provides the map itself, its Jacobian, tangent-plane bases estimated
//! from neighbor coordinates, the directional linear form that greedy routing
//! maximizes, and the consistency predicates built on top of it.

mod apparent;
mod basis;
mod jacobian;
mod selection;
mod virtual_consistency;

use alloc::vec::Vec;
use core::ops::Deref;

use crate::error::{Error, Result};
use crate::mdvec::VecN;

pub use apparent::{
    alpha_coefficients, apparent_destination, classify_region, directional_form,
    directional_form_nd, physically_consistent, Region,
};
pub use basis::{
    orientation_sigma, pick_orthogonal_neighbors, tangent_basis_from_neighbors, TangentBasis,
};
pub use jacobian::{jacobian, tangent_rank, Jacobian2n, RANK_TOL};
pub use selection::{
    select_anchor_subset, subset_thresholds, SubsetMode, SubsetState, SubsetThresholds,
};
pub use virtual_consistency::{virtually_consistent, ProbeGrid, VirtualConsistency, EPS_PROJ};

/// A location in the physical plane, in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(from = "[f64; 2]", into = "[f64; 2]"))]
pub struct PhysPoint {
    pub x: f64,
    pub y: f64,
}

/// A displacement in the physical plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysVec {
    pub x: f64,
    pub y: f64,
}

impl PhysPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Vector from `self` to `other`.
    #[inline]
    pub fn to(self, other: PhysPoint) -> PhysVec {
        PhysVec::new(other.x - self.x, other.y - self.y)
    }

    #[inline]
    pub fn distance(self, other: PhysPoint) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    #[inline]
    pub fn offset(self, v: PhysVec) -> PhysPoint {
        PhysPoint::new(self.x + v.x, self.y + v.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for PhysPoint {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<PhysPoint> for [f64; 2] {
    fn from(p: PhysPoint) -> Self {
        [p.x, p.y]
    }
}

impl PhysVec {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: PhysVec) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    #[inline]
    pub fn scale(self, k: f64) -> PhysVec {
        PhysVec::new(k * self.x, k * self.y)
    }

    #[inline]
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: PhysVec) -> PhysVec {
        PhysVec::new(self.x + other.x, self.y + other.y)
    }

    /// z-component of the 2-D cross product.
    #[inline]
    pub fn cross(self, other: PhysVec) -> f64 {
        self.x * other.y - self.y * other.x
    }
}

/// Physical anchor positions `A_1 … A_n`, `n ≥ 3`, pairwise distinct.
///
/// Collinear anchor sets are allowed; the tangent space then degenerates on
/// the anchor line (see [`tangent_rank`]).
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(try_from = "Vec<PhysPoint>", into = "Vec<PhysPoint>")
)]
pub struct AnchorSet(Vec<PhysPoint>);

impl AnchorSet {
    pub fn new(positions: Vec<PhysPoint>) -> Result<Self> {
        if positions.len() < 3 {
            return Err(Error::TooFewAnchors {
                count: positions.len(),
            });
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite);
        }
        for (i, a) in positions.iter().enumerate() {
            if let Some(j) = positions[i + 1..].iter().position(|b| a == b) {
                return Err(Error::DuplicateAnchor {
                    first: i,
                    second: i + 1 + j,
                });
            }
        }
        Ok(Self(positions))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn positions(&self) -> &[PhysPoint] {
        &self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, PhysPoint> {
        self.0.iter()
    }

    /// Index of the first anchor within `EPS_NORM` of `x`, if any.
    pub(crate) fn coincident(&self, x: PhysPoint) -> Option<usize> {
        self.0
            .iter()
            .position(|a| a.distance(x) <= crate::mdvec::EPS_NORM)
    }
}

impl TryFrom<Vec<PhysPoint>> for AnchorSet {
    type Error = Error;

    fn try_from(v: Vec<PhysPoint>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AnchorSet> for Vec<PhysPoint> {
    fn from(a: AnchorSet) -> Self {
        a.0
    }
}

/// Distances from one node to every anchor, in anchor order.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct AnchorCoords(VecN);

impl AnchorCoords {
    /// Wraps a distance vector; every entry must be non-negative.
    pub fn new(distances: VecN) -> Result<Self> {
        if distances.as_slice().iter().any(|d| *d < 0.0) {
            return Err(Error::InvalidArgument(
                "anchor distances must be non-negative",
            ));
        }
        Ok(Self(distances))
    }

    pub fn as_vec(&self) -> &VecN {
        &self.0
    }

    pub fn into_vec(self) -> VecN {
        self.0
    }

    /// Checks `|d_i − d_j| ≤ d(A_i, A_j) ≤ d_i + d_j` for every anchor pair.
    pub fn satisfies_triangle(&self, anchors: &AnchorSet, tol: f64) -> bool {
        let d = self.0.as_slice();
        if d.len() != anchors.len() {
            return false;
        }
        let pos = anchors.positions();
        for i in 0..d.len() {
            for j in i + 1..d.len() {
                let aij = pos[i].distance(pos[j]);
                if (d[i] - d[j]).abs() > aij + tol || aij > d[i] + d[j] + tol {
                    return false;
                }
            }
        }
        true
    }
}

impl Deref for AnchorCoords {
    type Target = VecN;

    fn deref(&self) -> &VecN {
        &self.0
    }
}

/// The anchor coordinates `f(X)`.
pub fn eval_f(x: PhysPoint, anchors: &AnchorSet) -> AnchorCoords {
    AnchorCoords(VecN::from_raw(
        anchors.iter().map(|a| x.distance(*a)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn unit_triangle() -> AnchorSet {
        AnchorSet::new(vec![
            PhysPoint::new(0.0, 0.0),
            PhysPoint::new(0.0, 1.0),
            PhysPoint::new(1.0, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn eval_f_examples() {
        let anchors = unit_triangle();
        let f0 = eval_f(PhysPoint::new(0.0, 0.0), &anchors);
        assert_eq!(f0.as_slice(), &[0.0, 1.0, 1.0]);
        let f1 = eval_f(PhysPoint::new(1.0, 1.0), &anchors);
        assert_eq!(f1.as_slice(), &[core::f64::consts::SQRT_2, 1.0, 1.0]);
        let f2 = eval_f(PhysPoint::new(0.0, 1.0), &anchors);
        assert_eq!(f2[1], 0.0);
    }

    #[test]
    fn anchor_set_validation() {
        let p = PhysPoint::new;
        assert_eq!(
            AnchorSet::new(vec![p(0.0, 0.0), p(1.0, 0.0)]),
            Err(Error::TooFewAnchors { count: 2 })
        );
        assert_eq!(
            AnchorSet::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(0.0, 0.0)]),
            Err(Error::DuplicateAnchor {
                first: 0,
                second: 2
            })
        );
        assert!(AnchorSet::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(f64::NAN, 0.0)]).is_err());
        // collinear is fine
        assert!(AnchorSet::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)]).is_ok());
    }

    #[test]
    fn coords_obey_triangle_inequality() {
        let anchors = unit_triangle();
        for &(x, y) in &[(0.3, 0.9), (-4.0, 2.5), (10.0, -3.0), (0.5, 0.5)] {
            let fx = eval_f(PhysPoint::new(x, y), &anchors);
            assert!(fx.satisfies_triangle(&anchors, 1e-12));
        }
        let bogus = AnchorCoords::new(VecN::new(vec![0.0, 5.0, 0.0]).unwrap()).unwrap();
        assert!(!bogus.satisfies_triangle(&anchors, 1e-12));
        assert!(AnchorCoords::new(VecN::new(vec![-1.0, 1.0, 1.0]).unwrap()).is_err());
    }
}
