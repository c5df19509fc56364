//! Directional form and apparent destination.
//!
//! Greedy routing in anchor space picks the neighbor `X'` maximizing
//! `f(X)f(X') · f(X)f(D)`. To first order `f(X') ≈ f(X) + J(X)·XX'`, so the
//! score is the linear form `s_X(v) = J(X)v · (f(D) − f(X))`, which equals
//! `v · (D' − X)` with `D' = X + Σ α_i (A_i − X)` and
//! `α_i = (d(X,A_i) − d(D,A_i)) / d(X,A_i)`. Messages therefore drift toward
//! the apparent destination `D'`, not toward `D`.

use alloc::vec::Vec;

use super::{eval_f, jacobian, AnchorSet, PhysPoint, PhysVec};
use crate::error::{Error, Result};

/// `α_i` for every anchor.
pub fn alpha_coefficients(x: PhysPoint, d: PhysPoint, anchors: &AnchorSet) -> Result<Vec<f64>> {
    if let Some(anchor) = anchors.coincident(x) {
        return Err(Error::Singularity { anchor });
    }
    Ok(anchors
        .iter()
        .map(|a| {
            let dx = x.distance(*a);
            let dd = d.distance(*a);
            if dx == dd {
                0.0
            } else {
                (dx - dd) / dx
            }
        })
        .collect())
}

/// `D' = X + Σ α_i (A_i − X)`.
pub fn apparent_destination(x: PhysPoint, d: PhysPoint, anchors: &AnchorSet) -> Result<PhysPoint> {
    let alpha = alpha_coefficients(x, d, anchors)?;
    let shift = anchors
        .iter()
        .zip(&alpha)
        .fold(PhysVec::new(0.0, 0.0), |acc, (a, k)| {
            acc.add(x.to(*a).scale(*k))
        });
    Ok(x.offset(shift))
}

/// `s_X(v)`: the greedy score of a physical displacement `v` taken at `X`.
pub fn directional_form(
    x: PhysPoint,
    d: PhysPoint,
    anchors: &AnchorSet,
    v: PhysVec,
) -> Result<f64> {
    let dp = apparent_destination(x, d, anchors)?;
    Ok(v.dot(x.to(dp)))
}

/// `s_X(v)` computed literally as `J(X)v · (f(D) − f(X))` in `Rⁿ`.
pub fn directional_form_nd(
    x: PhysPoint,
    d: PhysPoint,
    anchors: &AnchorSet,
    v: PhysVec,
) -> Result<f64> {
    let j = jacobian(x, anchors)?;
    let w = eval_f(d, anchors).sub(&eval_f(x, anchors))?;
    j.apply(v).dot(&w)
}

/// `XD' · XD > 0`: greedy progress in anchor space is also progress toward
/// `D` in the plane.
pub fn physically_consistent(x: PhysPoint, d: PhysPoint, anchors: &AnchorSet) -> Result<bool> {
    if x == d {
        return Err(Error::CoincidentPoints);
    }
    let dp = apparent_destination(x, d, anchors)?;
    Ok(x.to(dp).dot(x.to(d)) > 0.0)
}

/// The four regions of the plane relative to a message at `X` bound for `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// Behind `X`: `XX'·XD ≤ 0`.
    P1,
    /// Ahead of `X` and closer to it than `D`.
    P2,
    /// Ahead of `X`, at least as far as `D`, on `X`'s side of `D`.
    P3,
    /// Beyond `D`: `DX'·DX ≤ 0`.
    P4,
}

/// Region of `p`; `P1` takes precedence where `P1` and `P3` overlap, and the
/// `d(X,p) = d(X,D)` boundary belongs to `P3`.
pub fn classify_region(x: PhysPoint, d: PhysPoint, p: PhysPoint) -> Region {
    let xd = x.to(d);
    if x.to(p).dot(xd) <= 0.0 {
        Region::P1
    } else if d.to(p).dot(d.to(x)) <= 0.0 {
        Region::P4
    } else if x.distance(p) < xd.norm() {
        Region::P2
    } else {
        Region::P3
    }
}
