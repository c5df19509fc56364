//! Continuous counterpart of greedy routing.
//!
//! A message forwarded greedily in anchor space moves, in the limit of a
//! dense network, along the integral curve of `X ↦ D' − X`. This module
//! integrates that curve, reports whether it reaches `D`, and evaluates the
//! length bound `√n · max‖J⁺‖ · d(X₀, D)` along it.

use alloc::vec::Vec;

use crate::anchor_space::{
    apparent_destination, jacobian, AnchorSet, Jacobian2n, PhysPoint, PhysVec,
};
use crate::error::{Error, Result};
use crate::mdvec::EPS_NORM;
use crate::network::NetworkGraph;
use crate::routing::RouteTrace;

/// Consecutive field reversals that count as a stall.
const REVERSAL_LIMIT: usize = 8;
/// Steps per window of the stall test; a window whose net displacement is
/// under `STALL_RATIO` of the nominal travel `Σh` is a stall.
const STALL_WINDOW: usize = 256;
const STALL_RATIO: f64 = 0.01;
/// Each stall halves the step scale; a stall at this scale is stationary.
const MIN_STEP_SCALE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveOptions {
    /// Stop once `‖X − D‖ ≤ eps_conv`.
    pub eps_conv: f64,
    pub max_steps: usize,
}

impl CurveOptions {
    /// `eps_conv = 1e-3 · scale`, one million steps.
    pub fn for_scale(scale: f64) -> Self {
        Self {
            eps_conv: 1e-3 * scale,
            max_steps: 1_000_000,
        }
    }
}

impl Default for CurveOptions {
    fn default() -> Self {
        Self::for_scale(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurveStop {
    Converged,
    /// The field vanished, kept reversing, or stalled away from `D`.
    Stationary {
        at: PhysPoint,
    },
    /// The curve ran into an anchor, where the field is undefined.
    Singular {
        anchor: usize,
    },
    MaxSteps,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveResult {
    pub samples: Vec<PhysPoint>,
    /// Integration time at each sample; equals arc length up to
    /// discretization since the field has unit speed.
    pub times: Vec<f64>,
    pub arc_length: f64,
    pub converged: bool,
    pub stop: CurveStop,
    /// Largest `‖J⁺‖` over the samples (a lower bound of the supremum);
    /// infinite if some sample had a rank-1 Jacobian.
    pub max_pinv_norm: f64,
    /// `√n · max_pinv_norm · d(X₀, D)`.
    pub bound_value: f64,
    pub eps_conv: f64,
}

impl CurveResult {
    /// `arc_length / d(X₀, D)`.
    pub fn stretch(&self, d: PhysPoint) -> f64 {
        self.arc_length / self.samples[0].distance(d)
    }
}

/// Unit field `(D' − X)/‖D' − X‖`, `None` where it vanishes.
fn unit_field(x: PhysPoint, d: PhysPoint, anchors: &AnchorSet) -> Result<Option<PhysVec>> {
    let g = x.to(apparent_destination(x, d, anchors)?);
    let n = g.norm();
    Ok((n > EPS_NORM).then(|| g.scale(1.0 / n)))
}

enum StepOutcome {
    Moved(PhysPoint),
    Vanished,
}

fn rk4_step(x: PhysPoint, d: PhysPoint, anchors: &AnchorSet, h: f64) -> Result<StepOutcome> {
    let Some(k1) = unit_field(x, d, anchors)? else {
        return Ok(StepOutcome::Vanished);
    };
    // a vanishing intermediate stage contributes nothing
    let zero = PhysVec::new(0.0, 0.0);
    let k2 = unit_field(x.offset(k1.scale(0.5 * h)), d, anchors)?.unwrap_or(zero);
    let k3 = unit_field(x.offset(k2.scale(0.5 * h)), d, anchors)?.unwrap_or(zero);
    let k4 = unit_field(x.offset(k3.scale(h)), d, anchors)?.unwrap_or(zero);
    let incr = k1
        .add(k2.scale(2.0))
        .add(k3.scale(2.0))
        .add(k4)
        .scale(h / 6.0);
    Ok(StepOutcome::Moved(x.offset(incr)))
}

/// Integrates the apparent-destination field from `x0` toward `d`.
///
/// Steps are `step` long, shortened to half the remaining distance near `D`
/// so the iterate cannot jump over it. When the iterate stalls or keeps
/// reversing, both lengths are halved; a stall once they have shrunk by
/// `1e-9` is reported as [`CurveStop::Stationary`].
pub fn integrate_curve(
    x0: PhysPoint,
    d: PhysPoint,
    anchors: &AnchorSet,
    step: f64,
    opts: &CurveOptions,
) -> Result<CurveResult> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidArgument("step must be positive"));
    }
    if x0 == d {
        return Err(Error::CoincidentPoints);
    }
    for p in [x0, d] {
        if let Some(anchor) = anchors.coincident(p) {
            return Err(Error::Singularity { anchor });
        }
    }
    let mut samples = alloc::vec![x0];
    let mut times = alloc::vec![0.0];
    let mut max_pinv = pinv_norm_at(x0, anchors);
    let mut arc = 0.0;
    let mut t = 0.0;
    let mut x = x0;
    let mut last_dir: Option<PhysVec> = None;
    let mut reversals = 0;
    let mut window_start = x0;
    let mut window_len = 0.0;
    let mut scale = 1.0;

    let stop = loop {
        let dist = x.distance(d);
        if dist <= opts.eps_conv {
            break CurveStop::Converged;
        }
        if samples.len() > opts.max_steps {
            break CurveStop::MaxSteps;
        }
        let h = scale * step.min(0.5 * dist);
        let next = match rk4_step(x, d, anchors, h) {
            Ok(StepOutcome::Moved(p)) => p,
            Ok(StepOutcome::Vanished) => break CurveStop::Stationary { at: x },
            Err(Error::Singularity { anchor }) => break CurveStop::Singular { anchor },
            Err(e) => return Err(e),
        };
        let dir = x.to(next);
        if let Some(prev) = last_dir {
            if dir.dot(prev) < -0.9 * dir.norm() * prev.norm() {
                reversals += 1;
            } else {
                reversals = 0;
            }
        }
        last_dir = Some(dir);
        if anchors.coincident(next).is_some() {
            break CurveStop::Singular {
                anchor: anchors.coincident(next).unwrap_or(0),
            };
        }
        arc += dir.norm();
        t += h;
        x = next;
        samples.push(x);
        times.push(t);
        max_pinv = max_pinv.max(pinv_norm_at(x, anchors));
        window_len += h;
        let window_full = (samples.len() - 1) % STALL_WINDOW == 0;
        let stalled = window_full && window_start.distance(x) < STALL_RATIO * window_len;
        if stalled || reversals >= REVERSAL_LIMIT {
            if scale <= MIN_STEP_SCALE {
                break CurveStop::Stationary { at: x };
            }
            scale *= 0.5;
            reversals = 0;
            last_dir = None;
        }
        if window_full || stalled {
            window_start = x;
            window_len = 0.0;
        }
    };

    let n = anchors.len() as f64;
    Ok(CurveResult {
        bound_value: libm::sqrt(n) * max_pinv * x0.distance(d),
        converged: stop == CurveStop::Converged,
        samples,
        times,
        arc_length: arc,
        stop,
        max_pinv_norm: max_pinv,
        eps_conv: opts.eps_conv,
    })
}

fn pinv_norm_at(x: PhysPoint, anchors: &AnchorSet) -> f64 {
    jacobian(x, anchors)
        .and_then(|j| pseudoinverse_norm(&j))
        .unwrap_or(f64::INFINITY)
}

/// Operator norm of the Moore–Penrose pseudoinverse, `1/σ₂`.
pub fn pseudoinverse_norm(j: &Jacobian2n) -> Result<f64> {
    if j.rank() < 2 {
        let (_, s2) = j.singular_values();
        return Err(Error::RankDeficient { sigma_min: s2 });
    }
    Ok(1.0 / j.singular_values().1)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviationReport {
    /// Largest distance from a path node to its nearest curve sample.
    pub max: f64,
    pub mean: f64,
    pub nodes: usize,
}

/// How far a delivered route strays from the integral curve.
pub fn route_vs_curve(
    g: &NetworkGraph,
    trace: &RouteTrace,
    curve: &CurveResult,
) -> Result<DeviationReport> {
    if !trace.delivered() {
        return Err(Error::InvalidArgument("route was not delivered"));
    }
    if !curve.converged {
        return Err(Error::InvalidArgument("curve did not converge"));
    }
    let src = g.position(trace.source)?;
    let dst = g.position(trace.dest)?;
    let first = curve.samples[0];
    let last = curve.samples[curve.samples.len() - 1];
    let tol = curve.eps_conv + 1e-9 * (1.0 + src.distance(dst));
    if src.distance(first) > 1e-9 * (1.0 + src.distance(dst)) || dst.distance(last) > tol {
        return Err(Error::EndpointMismatch);
    }
    let path = trace.path();
    let mut max: f64 = 0.0;
    let mut sum = 0.0;
    for &v in &path {
        let p = g.position(v)?;
        let near = curve
            .samples
            .iter()
            .map(|s| s.distance(p))
            .fold(f64::INFINITY, f64::min);
        max = max.max(near);
        sum += near;
    }
    Ok(DeviationReport {
        max,
        mean: sum / path.len() as f64,
        nodes: path.len(),
    })
}
