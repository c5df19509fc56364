//! Dense n-dimensional vectors.
//!
//! The operation set is deliberately small: sum, difference, scaling, scalar
//! product and normalization. Everything the routing layer does in anchor
//! space is expressed with these, so the cost of a forwarding decision is the
//! cost of a handful of `O(n)` passes plus one square root per normalization.

use alloc::vec::Vec;
use core::ops::Index;

use crate::error::{Error, Result};

/// Near-zero threshold below which a vector is not normalized.
pub const EPS_NORM: f64 = 1e-12;

/// A fixed-length vector of finite reals.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<f64>", into = "Vec<f64>"))]
pub struct VecN(Vec<f64>);

impl VecN {
    /// Builds a vector, rejecting empty input and non-finite components.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument(
                "vector must have at least one component",
            ));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(components))
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "zero-length vector");
        Self(alloc::vec![0.0; len])
    }

    /// Wraps components already known to be finite and non-empty.
    pub(crate) fn from_raw(components: Vec<f64>) -> Self {
        debug_assert!(!components.is_empty());
        debug_assert!(components.iter().all(|c| c.is_finite()));
        Self(components)
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
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.len() == other.len() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.len(),
                right: other.len(),
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        self.finite(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        self.finite(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::NonFinite);
        }
        self.finite(self.0.iter().map(|a| k * a).collect())
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(dot_slices(&self.0, &other.0))
    }

    #[inline]
    pub fn norm_squared(&self) -> f64 {
        dot_slices(&self.0, &self.0)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_squared())
    }

    /// Largest absolute component.
    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| f64::max(m, c.abs()))
    }

    /// Unit vector in the direction of `self`.
    ///
    /// Fails with [`Error::DegenerateVector`] when `‖self‖ ≤ EPS_NORM`; callers
    /// typically hit this with coincident points.
    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if norm <= EPS_NORM {
            return Err(Error::DegenerateVector { norm });
        }
        let inv = 1.0 / norm;
        Ok(Self(self.0.iter().map(|a| a * inv).collect()))
    }

    /// Components at the given indices, in order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("empty index selection"));
        }
        let mut out = Vec::with_capacity(indices.len());
        for &i in indices {
            let c = self.0.get(i).ok_or(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })?;
            out.push(*c);
        }
        Ok(Self(out))
    }

    fn finite(&self, out: Vec<f64>) -> Result<Self> {
        if out.iter().all(|c| c.is_finite()) {
            Ok(Self(out))
        } else {
            Err(Error::NonFinite)
        }
    }
}

#[inline]
pub(crate) fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Index<usize> for VecN {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for VecN {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<VecN> for Vec<f64> {
    fn from(v: VecN) -> Self {
        v.0
    }
}

impl AsRef<[f64]> for VecN {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}
