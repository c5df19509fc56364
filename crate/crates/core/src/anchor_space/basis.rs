use crate::error::{Error, Result};
use crate::mdvec::{VecN, EPS_NORM};

/// Orthonormal pair spanning an estimated tangent plane.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentBasis {
    pub i: VecN,
    pub j: VecN,
}

impl TangentBasis {
    /// Coordinates `(u·i, u·j)` of `u` in the tangent plane; the normal
    /// component is dropped.
    pub fn project(&self, u: &VecN) -> Result<(f64, f64)> {
        Ok((u.dot(&self.i)?, u.dot(&self.j)?))
    }

    /// The same plane with reversed orientation.
    pub fn flipped(&self) -> Self {
        Self {
            i: self.i.clone(),
            j: self.j.scale(-1.0).expect("finite"),
        }
    }

    pub fn dim(&self) -> usize {
        self.i.len()
    }
}

/// Signed area `(i·i_old)(j·j_old) − (i·j_old)(j·i_old)` relating two bases.
///
/// Positive when `(i, j)` keeps the orientation of `old` after projecting
/// one plane onto the other.
pub fn orientation_sigma(i: &VecN, j: &VecN, old: &TangentBasis) -> Result<f64> {
    Ok(i.dot(&old.i)? * j.dot(&old.j)? - i.dot(&old.j)? * j.dot(&old.i)?)
}

/// Tangent basis at `f(X)` from two neighbor coordinates, oriented to agree
/// with `prev` when one is given.
pub fn tangent_basis_from_neighbors(
    fx: &VecN,
    fx1: &VecN,
    fx2: &VecN,
    prev: Option<&TangentBasis>,
) -> Result<TangentBasis> {
    let e1 = fx1.sub(fx)?;
    let e2 = fx2.sub(fx)?;
    let i = e1.normalize()?;
    let u = e2.sub(&i.scale(i.dot(&e2)?)?)?;
    let residual = u.norm();
    if residual <= EPS_NORM {
        return Err(Error::DegenerateBasis { residual });
    }
    let v = u.normalize()?;
    let j = match prev {
        None => v,
        Some(old) => {
            if old.dim() != i.len() {
                return Err(Error::DimensionMismatch {
                    left: old.dim(),
                    right: i.len(),
                });
            }
            if orientation_sigma(&i, &v, old)? >= 0.0 {
                v
            } else {
                v.scale(-1.0)?
            }
        }
    };
    Ok(TangentBasis { i, j })
}

/// Index pair `(a, b)`, `a < b`, whose directions from `f(X)` are closest
/// to orthogonal. Ties go to the lexicographically smallest pair; neighbors
/// sharing `f(X)` are never chosen.
pub fn pick_orthogonal_neighbors(fx: &VecN, neighbors: &[VecN]) -> Result<(usize, usize)> {
    if neighbors.len() < 2 {
        return Err(Error::InsufficientNeighbors {
            count: neighbors.len(),
        });
    }
    let mut dirs = alloc::vec::Vec::with_capacity(neighbors.len());
    for nb in neighbors {
        let d = nb.sub(fx)?;
        dirs.push(d.normalize().ok());
    }
    let mut best: Option<((usize, usize), f64)> = None;
    for (a, da) in dirs.iter().enumerate() {
        let Some(da) = da else { continue };
        for (b, db) in dirs.iter().enumerate().skip(a + 1) {
            let Some(db) = db else { continue };
            let score = da.dot(db)?.abs();
            if best.is_none_or(|(_, s)| score < s) {
                best = Some(((a, b), score));
            }
        }
    }
    best.map(|(pair, _)| pair)
        .ok_or(Error::InsufficientNeighbors {
            count: dirs.iter().filter(|d| d.is_some()).count(),
        })
}
