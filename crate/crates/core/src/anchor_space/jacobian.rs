use alloc::vec::Vec;

use super::{AnchorSet, PhysPoint, PhysVec};
use crate::error::{Error, Result};
use crate::mdvec::{dot_slices, VecN};

/// Relative threshold on the smaller singular value for rank 2.
pub const RANK_TOL: f64 = 1e-8;

/// The `n × 2` Jacobian of `f`; row `i` is the unit vector from `A_i` to `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian2n {
    rows: Vec<[f64; 2]>,
}

impl Jacobian2n {
    /// Builds a Jacobian from explicit rows (any `n × 2` matrix).
    pub fn from_rows(rows: Vec<[f64; 2]>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("jacobian needs at least one row"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[[f64; 2]] {
        &self.rows
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Column `c` (0 → ∂f/∂x, 1 → ∂f/∂y).
    pub fn column(&self, c: usize) -> VecN {
        VecN::from_raw(self.rows.iter().map(|r| r[c]).collect())
    }

    /// `J v`, the tangent-space image of a physical displacement.
    pub fn apply(&self, v: PhysVec) -> VecN {
        VecN::from_raw(self.rows.iter().map(|r| r[0] * v.x + r[1] * v.y).collect())
    }

    /// `Jᵀ w` for an n-vector `w`.
    pub fn apply_transpose(&self, w: &VecN) -> Result<PhysVec> {
        if w.len() != self.n() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: w.len(),
            });
        }
        let (mut x, mut y) = (0.0, 0.0);
        for (r, wi) in self.rows.iter().zip(w.as_slice()) {
            x += r[0] * wi;
            y += r[1] * wi;
        }
        Ok(PhysVec::new(x, y))
    }

    /// Singular values `(σ₁, σ₂)`, `σ₁ ≥ σ₂ ≥ 0`.
    pub fn singular_values(&self) -> (f64, f64) {
        let [p, q] = self.orthogonal_columns();
        let (a, b) = (norm(&p), norm(&q));
        if a >= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// Numerical rank under [`RANK_TOL`].
    pub fn rank(&self) -> u8 {
        let (s1, s2) = self.singular_values();
        if s2 > RANK_TOL * s1.max(1.0) {
            2
        } else {
            1
        }
    }

    /// Norm of the orthogonal projection of `w` onto the column space.
    ///
    /// When the matrix has rank 1 only the dominant direction is used.
    pub fn project_norm(&self, w: &VecN) -> Result<f64> {
        if w.len() != self.n() {
            return Err(Error::DimensionMismatch {
                left: self.n(),
                right: w.len(),
            });
        }
        let [p, q] = self.orthogonal_columns();
        let (np, nq) = (norm(&p), norm(&q));
        let (big, nbig, small, nsmall) = if np >= nq {
            (p, np, q, nq)
        } else {
            (q, nq, p, np)
        };
        if nbig == 0.0 {
            return Ok(0.0);
        }
        let w = w.as_slice();
        let c1 = dot_slices(&big, w) / nbig;
        let mut sq = c1 * c1;
        if nsmall > RANK_TOL * nbig.max(1.0) {
            let c2 = dot_slices(&small, w) / nsmall;
            sq += c2 * c2;
        }
        Ok(libm::sqrt(sq))
    }

    /// The two columns after a one-sided Jacobi rotation that makes them
    /// orthogonal. Their norms are the singular values; computing them this
    /// way keeps a tiny `σ₂` accurate, unlike the eigenvalues of `JᵀJ`.
    fn orthogonal_columns(&self) -> [Vec<f64>; 2] {
        let a: Vec<f64> = self.rows.iter().map(|r| r[0]).collect();
        let b: Vec<f64> = self.rows.iter().map(|r| r[1]).collect();
        let alpha = dot_slices(&a, &a);
        let beta = dot_slices(&b, &b);
        let gamma = dot_slices(&a, &b);
        if gamma == 0.0 {
            return [a, b];
        }
        let zeta = (beta - alpha) / (2.0 * gamma);
        let t = libm::copysign(1.0, zeta) / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
        let c = 1.0 / libm::sqrt(1.0 + t * t);
        let s = c * t;
        let p = a.iter().zip(&b).map(|(x, y)| c * x - s * y).collect();
        let q = a.iter().zip(&b).map(|(x, y)| s * x + c * y).collect();
        [p, q]
    }
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(dot_slices(v, v))
}

/// Jacobian of `f` at `x`; fails if `x` coincides with an anchor.
pub fn jacobian(x: PhysPoint, anchors: &AnchorSet) -> Result<Jacobian2n> {
    if let Some(anchor) = anchors.coincident(x) {
        return Err(Error::Singularity { anchor });
    }
    let rows = anchors
        .iter()
        .map(|a| {
            let d = x.distance(*a);
            [(x.x - a.x) / d, (x.y - a.y) / d]
        })
        .collect();
    Ok(Jacobian2n { rows })
}

/// Dimension of the tangent space of `f(R²)` at `f(x)`: 1 exactly when `x`
/// and all anchors lie on one line.
pub fn tangent_rank(x: PhysPoint, anchors: &AnchorSet) -> Result<u8> {
    Ok(jacobian(x, anchors)?.rank())
}
