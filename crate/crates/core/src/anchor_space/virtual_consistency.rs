use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{eval_f, jacobian, AnchorSet, PhysPoint};
use crate::error::{Error, Result};

/// Relative floor on the projected norm, as a fraction of `d(X, D)`.
pub const EPS_PROJ: f64 = 1e-6;

/// Where the virtual-consistency check samples.
///
/// The sample set is a regular grid over a box, uniform random points in the
/// same box, and rings around the destination at radii `scale·10⁻ᵏ`
/// (`k = 1..=ring_decades`), where `scale` is the box diagonal. The rings
/// matter: on a fold of the surface the projected norm vanishes only in the
/// limit `X → D`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProbeGrid {
    pub min: PhysPoint,
    pub max: PhysPoint,
    pub resolution: usize,
    pub random_samples: usize,
    pub seed: u64,
    pub ring_decades: u32,
    pub ring_angles: usize,
}

impl ProbeGrid {
    /// Square box of half-width `half` centred on `d`, 41×41 grid, 1000
    /// random points, 8 decades of 16-point rings.
    pub fn around(d: PhysPoint, half: f64) -> Self {
        Self {
            min: PhysPoint::new(d.x - half, d.y - half),
            max: PhysPoint::new(d.x + half, d.y + half),
            resolution: 41,
            random_samples: 1000,
            seed: 0,
            ring_decades: 8,
            ring_angles: 16,
        }
    }

    fn for_each_sample(&self, d: PhysPoint, mut visit: impl FnMut(PhysPoint)) {
        let (w, h) = (self.max.x - self.min.x, self.max.y - self.min.y);
        if self.resolution >= 2 {
            let last = (self.resolution - 1) as f64;
            for a in 0..self.resolution {
                for b in 0..self.resolution {
                    visit(PhysPoint::new(
                        self.min.x + w * (a as f64 / last),
                        self.min.y + h * (b as f64 / last),
                    ));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random_samples {
            visit(PhysPoint::new(
                self.min.x + w * rng.gen::<f64>(),
                self.min.y + h * rng.gen::<f64>(),
            ));
        }
        let scale = libm::hypot(w, h);
        for k in 1..=self.ring_decades {
            let radius = scale * libm::pow(10.0, -(k as f64));
            for m in 0..self.ring_angles {
                let theta = core::f64::consts::TAU * m as f64 / self.ring_angles as f64;
                visit(PhysPoint::new(
                    d.x + radius * libm::cos(theta),
                    d.y + radius * libm::sin(theta),
                ));
            }
        }
    }
}

/// Outcome of a sampled virtual-consistency check. `consistent` is evidence
/// over the sample set, not a proof over the whole ball.
#[derive(Clone, Debug, PartialEq)]
pub struct VirtualConsistency {
    pub consistent: bool,
    /// Samples inside the ball that were evaluated.
    pub checked: usize,
    /// Samples skipped because they sit on an anchor.
    pub skipped: usize,
    /// Smallest `‖proj f(X)f(D)‖ / d(X,D)` seen.
    pub worst_ratio: f64,
    pub worst_point: Option<PhysPoint>,
}

/// Checks that `f(X)f(D)` keeps a non-negligible component in the tangent
/// plane at every sampled `X ≠ D` with `‖f(X) − f(D)‖ ≤ r`.
pub fn virtually_consistent(
    d: PhysPoint,
    anchors: &AnchorSet,
    r: f64,
    probe: &ProbeGrid,
) -> Result<VirtualConsistency> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive"));
    }
    let fd = eval_f(d, anchors);
    let mut out = VirtualConsistency {
        consistent: true,
        checked: 0,
        skipped: 0,
        worst_ratio: f64::INFINITY,
        worst_point: None,
    };
    let mut failure = None;
    probe.for_each_sample(d, |x| {
        if failure.is_some() || x == d {
            return;
        }
        let fx = eval_f(x, anchors);
        let w = match fd.sub(&fx) {
            Ok(w) => w,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        if w.norm() > r {
            return;
        }
        let j = match jacobian(x, anchors) {
            Ok(j) => j,
            Err(_) => {
                out.skipped += 1;
                return;
            }
        };
        out.checked += 1;
        let ratio = match j.project_norm(&w) {
            Ok(p) => p / x.distance(d),
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        if ratio < out.worst_ratio {
            out.worst_ratio = ratio;
            out.worst_point = Some(x);
        }
        if ratio <= EPS_PROJ {
            out.consistent = false;
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}
