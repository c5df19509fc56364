//! Message forwarding over coordinates only.
//!
//! The engine never sees physical positions: a [`RoutingView`] carries the
//! adjacency lists and one coordinate vector per node, which is either the
//! anchor coordinates `f(X)` or, for the physical baseline, `(x, y)` itself.
//!
//! Forwarding is greedy by default (three scoring variants). When greedy
//! finds no neighbor making progress the message switches to a rotation
//! fallback on the estimated tangent plane, walking faces of a locally
//! planarized graph with the right-hand rule, and returns to greedy as soon
//! as greedy would reach a node strictly closer to the destination than the
//! node where the fallback started.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::anchor_space::{
    pick_orthogonal_neighbors, select_anchor_subset, subset_thresholds,
    tangent_basis_from_neighbors, SubsetMode, SubsetState, SubsetThresholds, TangentBasis,
};
use crate::error::{Error, Result};
use crate::mdvec::{VecN, EPS_NORM};
use crate::network::NetworkGraph;

/// Greedy scoring rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreedyVariant {
    /// Minimize `‖f(X') − f(D)‖`.
    Distance,
    /// Maximize `f(X)f(X') · f(X)f(D)`.
    Projection,
    /// Maximize `f(X)f(X')/‖f(X)f(X')‖ · f(X)f(D)`.
    NormalizedProjection,
}

impl GreedyVariant {
    pub fn number(self) -> u8 {
        match self {
            Self::Distance => 1,
            Self::Projection => 2,
            Self::NormalizedProjection => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Self::Distance),
            2 => Ok(Self::Projection),
            3 => Ok(Self::NormalizedProjection),
            _ => Err(Error::InvalidConfig("greedy variant must be 1, 2 or 3")),
        }
    }

    fn hop_mode(self) -> HopMode {
        match self {
            Self::Distance => HopMode::Greedy1,
            Self::Projection => HopMode::Greedy2,
            Self::NormalizedProjection => HopMode::Greedy3,
        }
    }
}

#[cfg(feature = "serde")]
impl serde::Serialize for GreedyVariant {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.number())
    }
}

#[cfg(feature = "serde")]
impl<'de> serde::Deserialize<'de> for GreedyVariant {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let n = u8::deserialize(d)?;
        Self::from_number(n).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RoutingPolicy {
    pub variant: GreedyVariant,
    #[cfg_attr(feature = "serde", serde(with = "on_off"))]
    pub fallback: bool,
    #[cfg_attr(feature = "serde", serde(with = "on_off"))]
    pub anchor_selection: bool,
    pub ttl_multiplier: usize,
}

impl Default for RoutingPolicy {
    fn default() -> Self {
        Self {
            variant: GreedyVariant::Distance,
            fallback: true,
            anchor_selection: false,
            ttl_multiplier: 10,
        }
    }
}

/// `"on"` / `"off"` switches; plain booleans are accepted on input.
#[cfg(feature = "serde")]
mod on_off {
    use serde::{de, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(if *v { "on" } else { "off" })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = bool;

            fn expecting(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
                f.write_str("\"on\", \"off\" or a boolean")
            }

            fn visit_bool<E: de::Error>(self, v: bool) -> Result<bool, E> {
                Ok(v)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<bool, E> {
                match v {
                    "on" => Ok(true),
                    "off" => Ok(false),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(Visitor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum HopMode {
    Greedy1,
    Greedy2,
    Greedy3,
    Fallback,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hop {
    /// Node the message was forwarded to.
    pub node: usize,
    pub mode: HopMode,
    /// Anchor mode in force when the forwarding decision was made.
    pub subset: SubsetMode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Outcome {
    Delivered,
    TtlExpired,
    Stuck,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Delivered => "delivered",
            Self::TtlExpired => "ttl-expired",
            Self::Stuck => "stuck",
        }
    }
}

/// An anchor-subset switch made at `node` before forwarding.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetEvent {
    pub node: usize,
    /// Number of hops already taken.
    pub hop_index: usize,
    pub from: SubsetMode,
    pub to: SubsetMode,
    pub thresholds: SubsetThresholds,
    pub active: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RouteTrace {
    pub source: usize,
    pub dest: usize,
    pub hops: Vec<Hop>,
    pub outcome: Outcome,
    /// Ground-truth length in meters; filled by [`RouteTrace::measure`].
    pub physical_length: Option<f64>,
    /// Greedy ↔ fallback transitions.
    pub mode_switches: usize,
    pub subset_events: Vec<SubsetEvent>,
    /// Hops at which a subset switch was due but fewer than
    /// [`MIN_SUBSET`] anchors qualified.
    pub empty_subset_hops: usize,
}

impl RouteTrace {
    /// Source followed by every node the message visited.
    pub fn path(&self) -> Vec<usize> {
        core::iter::once(self.source)
            .chain(self.hops.iter().map(|h| h.node))
            .collect()
    }

    pub fn hop_count(&self) -> usize {
        self.hops.len()
    }

    pub fn delivered(&self) -> bool {
        self.outcome == Outcome::Delivered
    }

    /// Fills `physical_length` from ground-truth positions.
    pub fn measure(&mut self, g: &NetworkGraph) -> Result<f64> {
        let path = self.path();
        let mut len = 0.0;
        for w in path.windows(2) {
            len += g.position(w[0])?.distance(g.position(w[1])?);
        }
        self.physical_length = Some(len);
        Ok(len)
    }
}

/// How coordinate vectors relate to the plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoordKind {
    /// Each component is a distance to some fixed point.
    Distances,
    /// Components are affine in position, e.g. `(x, y)` itself.
    Linear,
}

/// What the router is allowed to know: adjacency and per-node coordinates.
#[derive(Clone, Debug)]
pub struct RoutingView<'a> {
    adjacency: &'a [Vec<usize>],
    coords: Vec<VecN>,
    kind: CoordKind,
}

impl<'a> RoutingView<'a> {
    pub fn new(adjacency: &'a [Vec<usize>], coords: Vec<VecN>) -> Result<Self> {
        if adjacency.len() != coords.len() {
            return Err(Error::DimensionMismatch {
                left: adjacency.len(),
                right: coords.len(),
            });
        }
        if let Some(first) = coords.first() {
            if let Some(bad) = coords.iter().find(|c| c.len() != first.len()) {
                return Err(Error::DimensionMismatch {
                    left: first.len(),
                    right: bad.len(),
                });
            }
        }
        for list in adjacency {
            if let Some(&bad) = list.iter().find(|&&v| v >= adjacency.len()) {
                return Err(Error::IndexOutOfRange {
                    index: bad,
                    len: adjacency.len(),
                });
            }
        }
        Ok(Self {
            adjacency,
            coords,
            kind: CoordKind::Distances,
        })
    }

    pub fn with_kind(mut self, kind: CoordKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn kind(&self) -> CoordKind {
        self.kind
    }

    /// Anchor-coordinate view of a deployed network.
    pub fn anchor(g: &'a NetworkGraph) -> Self {
        Self {
            adjacency: g.adjacency(),
            coords: g.coords().iter().map(|c| c.as_vec().clone()).collect(),
            kind: CoordKind::Distances,
        }
    }

    /// Baseline view: coordinates are the physical `(x, y)`.
    pub fn physical(g: &'a NetworkGraph) -> Self {
        Self {
            adjacency: g.adjacency(),
            coords: g
                .nodes()
                .iter()
                .map(|p| VecN::new(alloc::vec![p.x, p.y]).expect("finite positions"))
                .collect(),
            kind: CoordKind::Linear,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.coords.first().map_or(0, VecN::len)
    }

    pub fn coords(&self) -> &[VecN] {
        &self.coords
    }

    pub fn neighbors(&self, v: usize) -> Result<&[usize]> {
        self.adjacency
            .get(v)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index: v,
                len: self.len(),
            })
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: v,
                len: self.len(),
            })
        }
    }
}

/// Per-message routing state carried from hop to hop.
#[derive(Clone, Debug)]
pub struct MessageState {
    pub current: usize,
    dest: usize,
    /// `f(D)` over all anchors.
    dest_full: VecN,
    /// `f(X₀)` over all anchors.
    origin_coords: VecN,
    /// `f(D)` restricted to the active anchors.
    dest_coords: VecN,
    pub basis: Option<TangentBasis>,
    subset: SubsetState,
    pub ttl: usize,
    /// Node where the current fallback episode began.
    fallback_from: Option<usize>,
    /// Node the last fallback hop came from.
    fallback_prev: Option<usize>,
    /// Furthest point, as a fraction of the way from the fallback start to
    /// the destination, where the walk has changed faces.
    face_crossing: f64,
    /// Directed edges walked since the last face change.
    face_edges: Vec<(usize, usize)>,
    /// Rotate counterclockwise; set once a clockwise walk has looped.
    counter_clockwise: bool,
    pub trace: RouteTrace,
}

impl MessageState {
    pub fn new(view: &RoutingView<'_>, source: usize, dest: usize, ttl: usize) -> Result<Self> {
        view.check(source)?;
        view.check(dest)?;
        let dest_full = view.coords[dest].clone();
        Ok(Self {
            current: source,
            dest,
            origin_coords: view.coords[source].clone(),
            dest_coords: dest_full.clone(),
            dest_full,
            basis: None,
            subset: SubsetState::all(view.dim()),
            ttl,
            fallback_from: None,
            fallback_prev: None,
            face_crossing: 0.0,
            face_edges: Vec::new(),
            counter_clockwise: false,
            trace: RouteTrace {
                source,
                dest,
                hops: Vec::new(),
                outcome: Outcome::Stuck,
                physical_length: None,
                mode_switches: 0,
                subset_events: Vec::new(),
                empty_subset_hops: 0,
            },
        })
    }

    pub fn dest_coords(&self) -> &VecN {
        &self.dest_coords
    }

    pub fn origin_coords(&self) -> &VecN {
        &self.origin_coords
    }

    pub fn subset(&self) -> &SubsetState {
        &self.subset
    }

    pub fn in_fallback(&self) -> bool {
        self.fallback_from.is_some()
    }

    fn masked(&self, view: &RoutingView<'_>, v: usize) -> Result<VecN> {
        self.subset.mask(&view.coords[v])
    }

    fn dist_to_dest(&self, view: &RoutingView<'_>, v: usize) -> Result<f64> {
        Ok(self.masked(view, v)?.sub(&self.dest_coords)?.norm())
    }

    fn set_subset(&mut self, subset: SubsetState) -> Result<()> {
        self.dest_coords = subset.mask(&self.dest_full)?;
        self.subset = subset;
        // the old basis lives in a space of different dimension
        self.basis = None;
        Ok(())
    }
}

/// One greedy decision at `m.current`, or `None` at a local minimum.
///
/// A neighbor whose coordinates equal `f(D)` is taken under every variant.
/// Ties go to the smallest node index.
pub fn greedy_step(
    view: &RoutingView<'_>,
    m: &MessageState,
    variant: GreedyVariant,
) -> Result<Option<usize>> {
    let neighbors = view.neighbors(m.current)?;
    if neighbors.is_empty() {
        return Err(Error::NoNeighbors { node: m.current });
    }
    let fx = m.masked(view, m.current)?;
    let fd = &m.dest_coords;
    let to_dest = fd.sub(&fx)?;
    let mut best: Option<(usize, f64)> = None;
    for &nb in neighbors {
        let fnb = m.masked(view, nb)?;
        let remaining = fnb.sub(fd)?.norm();
        if remaining == 0.0 {
            return Ok(Some(nb));
        }
        // every score is "larger is better"
        let score = match variant {
            GreedyVariant::Distance => -remaining,
            GreedyVariant::Projection => fnb.sub(&fx)?.dot(&to_dest)?,
            GreedyVariant::NormalizedProjection => match fnb.sub(&fx)?.normalize() {
                Ok(dir) => dir.dot(&to_dest)?,
                Err(_) => continue,
            },
        };
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((nb, score));
        }
    }
    let Some((nb, score)) = best else {
        return Ok(None);
    };
    let productive = match variant {
        GreedyVariant::Distance => -score < to_dest.norm(),
        GreedyVariant::Projection | GreedyVariant::NormalizedProjection => score > 0.0,
    };
    Ok(productive.then_some(nb))
}

/// Angle, in `[0, 2π)`, of a clockwise rotation taking `from` onto `to`.
fn clockwise_angle(from: (f64, f64), to: (f64, f64)) -> f64 {
    let a = libm::atan2(from.1, from.0) - libm::atan2(to.1, to.0);
    let r = a - TAU * libm::floor(a / TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// One fallback decision on the tangent plane: rotate clockwise and take the
/// first neighbor met.
///
/// Only edges of the local Gabriel subgraph are considered, so successive
/// hops walk the faces of a planar graph. The first hop of a fallback episode
/// rotates from the destination direction, later hops from the edge back to
/// the previous node. When the chosen edge crosses the segment from the
/// episode's start to the destination nearer the destination than any
/// earlier crossing, the walk moves on to the next face. A walk that repeats
/// a directed edge without changing faces restarts counterclockwise, and
/// gives up if that loops too. Updates `m.basis`, keeping the orientation
/// inherited from earlier hops.
pub fn fallback_step(view: &RoutingView<'_>, m: &mut MessageState) -> Result<Option<usize>> {
    let neighbors = view.neighbors(m.current)?;
    match neighbors {
        [] => return Err(Error::NoNeighbors { node: m.current }),
        // every rotation ends on the only neighbor
        [only] => return Ok(Some(*only)),
        _ => {}
    }
    let fx = m.masked(view, m.current)?;
    let nb_coords = neighbors
        .iter()
        .map(|&nb| m.masked(view, nb))
        .collect::<Result<Vec<_>>>()?;
    let frame = LocalFrame::new(view.kind, &fx, &nb_coords)?;
    let origin = VecN::zeros(frame.dim());
    let (a, b) = pick_orthogonal_neighbors(&origin, &frame.disp)?;
    let prev = m.basis.as_ref().filter(|old| old.dim() == frame.dim());
    let basis = tangent_basis_from_neighbors(&origin, &frame.disp[a], &frame.disp[b], prev)?;

    let projected = frame
        .disp
        .iter()
        .map(|d| basis.project(d))
        .collect::<Result<Vec<_>>>()?;
    let planar = gabriel_neighbors(&projected, frame.metric(&basis, &projected));
    let dest = basis.project(&frame.linearize(&fx, &m.dest_coords)?.0)?;
    let start = m.fallback_from.unwrap_or(m.current);
    let start = basis.project(&frame.linearize(&fx, &m.masked(view, start)?)?.0)?;

    let back = m
        .fallback_prev
        .and_then(|prev| neighbors.iter().position(|&nb| nb == prev))
        .filter(|&k| libm::hypot(projected[k].0, projected[k].1) > EPS_NORM);
    m.basis = Some(basis);
    loop {
        // a mirrored plane turns clockwise into counterclockwise
        let mirror = |p: (f64, f64)| if m.counter_clockwise { (p.0, -p.1) } else { p };
        let points: Vec<(f64, f64)> = projected.iter().map(|&p| mirror(p)).collect();
        let (dest, start) = (mirror(dest), mirror(start));
        let mut pick = match back {
            Some(k) => next_clockwise(points[k], &points, &planar, false),
            None if libm::hypot(dest.0, dest.1) > EPS_NORM => {
                next_clockwise(dest, &points, &planar, true)
            }
            None => None,
        };
        // change faces where the edge crosses the start-destination segment
        // nearer to the destination than the last crossing
        for _ in 0..neighbors.len() {
            let Some(k) = pick else { break };
            match segment_crossing(points[k], start, dest) {
                Some(t) if t > m.face_crossing + 1e-12 => {
                    m.face_crossing = t;
                    m.face_edges.clear();
                    pick = next_clockwise(points[k], &points, &planar, false);
                }
                _ => break,
            }
        }
        let Some(k) = pick else { return Ok(None) };
        let edge = (m.current, neighbors[k]);
        if !m.face_edges.contains(&edge) {
            m.face_edges.push(edge);
            return Ok(Some(neighbors[k]));
        }
        // the walk has closed a loop without leaving the face
        if m.counter_clockwise {
            return Ok(None);
        }
        m.counter_clockwise = true;
        m.face_edges.clear();
    }
}

/// Index of the first usable neighbor met rotating clockwise from `from`.
/// A neighbor lying exactly on `from` counts as met first only when
/// `inclusive`, otherwise last.
fn next_clockwise(
    from: (f64, f64),
    projected: &[(f64, f64)],
    planar: &[bool],
    inclusive: bool,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, &p) in projected.iter().enumerate() {
        if !planar[k] || libm::hypot(p.0, p.1) <= EPS_NORM {
            continue;
        }
        let mut turn = clockwise_angle(from, p);
        if turn == 0.0 && !inclusive {
            turn = TAU;
        }
        if best.is_none_or(|(_, t)| turn < t) {
            best = Some((k, turn));
        }
    }
    best.map(|(k, _)| k)
}

/// Parameter `t ∈ [0, 1]` along `start → dest` where the edge from the
/// origin to `p` crosses it, if it does.
fn segment_crossing(p: (f64, f64), start: (f64, f64), dest: (f64, f64)) -> Option<f64> {
    let cross = |a: (f64, f64), b: (f64, f64)| a.0 * b.1 - a.1 * b.0;
    let r = (dest.0 - start.0, dest.1 - start.1);
    let denom = cross(p, r);
    if denom.abs() <= EPS_NORM * libm::hypot(p.0, p.1) * libm::hypot(r.0, r.1) {
        return None;
    }
    // origin + s·p = start + t·r
    let s = cross(start, r) / denom;
    let t = cross(start, p) / denom;
    ((0.0..=1.0).contains(&s) && (0.0..=1.0).contains(&t)).then_some(t)
}

/// Neighbor displacements around the current node, made exactly linear in
/// the physical displacement where the coordinate kind allows it.
///
/// For distance coordinates `f_i(u)² − f_i(X)² = 2 f_i(X) ∇f_i·v + |v|²`, so
/// `y_i = (f_i(u)² − f_i(X)²) / (2 f_i(X))` equals `J v + |v|² h` with
/// `h_i = 1 / (2 f_i(X))`. Removing the `h` component leaves a linear image
/// of `v`, free of the curvature error of plain differences.
struct LocalFrame {
    disp: Vec<VecN>,
    /// `y·ĥ` per neighbor and `‖h‖`.
    along: Option<(Vec<f64>, f64)>,
    /// Zero on components that vanish at the current node; empty when the
    /// plain differences are used.
    h: Vec<f64>,
    h_hat: Vec<f64>,
}

impl LocalFrame {
    fn new(kind: CoordKind, fx: &VecN, nb_coords: &[VecN]) -> Result<Self> {
        let usable = (0..fx.len()).filter(|&i| fx[i] > EPS_NORM).count();
        let mut frame = Self {
            disp: Vec::with_capacity(nb_coords.len()),
            along: None,
            h: Vec::new(),
            h_hat: Vec::new(),
        };
        if kind == CoordKind::Distances && usable >= 3 {
            frame.h = (0..fx.len())
                .map(|i| if fx[i] > EPS_NORM { 0.5 / fx[i] } else { 0.0 })
                .collect();
            let h_norm = libm::sqrt(frame.h.iter().map(|x| x * x).sum());
            frame.h_hat = frame.h.iter().map(|x| x / h_norm).collect();
            frame.along = Some((Vec::with_capacity(nb_coords.len()), h_norm));
        }
        for c in nb_coords {
            let (d, s) = frame.linearize(fx, c)?;
            frame.disp.push(d);
            if let Some((along, _)) = &mut frame.along {
                along.push(s);
            }
        }
        Ok(frame)
    }

    /// Displacement of `c` from `fx` in the frame, with its `ĥ` component.
    fn linearize(&self, fx: &VecN, c: &VecN) -> Result<(VecN, f64)> {
        if self.h.is_empty() {
            return Ok((c.sub(fx)?, 0.0));
        }
        let y: Vec<f64> = (0..fx.len())
            .map(|i| (c[i] - fx[i]) * (c[i] + fx[i]) * self.h[i])
            .collect();
        let s: f64 = y.iter().zip(&self.h_hat).map(|(a, b)| a * b).sum();
        Ok((
            VecN::new(y.iter().zip(&self.h_hat).map(|(a, b)| a - s * b).collect())?,
            s,
        ))
    }

    fn dim(&self) -> usize {
        self.disp.first().map_or(0, VecN::len)
    }

    /// Quadratic form `(a, b, c)` on tangent-plane coordinates giving the
    /// squared physical length `a·x² + 2b·xy + c·y²`, i.e. `Q = (M Mᵀ)⁻¹`
    /// for `p = M v` the projected displacement.
    ///
    /// Writing `J = B M + ĥ cᵀ`, every row of `J` is a unit vector, which is
    /// linear in `G = M Mᵀ`, `M c` and `|c|²`: six unknowns, one equation per
    /// anchor. With fewer than six usable anchors the neighbors are used
    /// instead, through `y·ĥ = c·v + ‖h‖ |v|²`, linear in `Q` and `M⁻ᵀc`.
    /// Falls back to the plain metric when neither system is solvable or the
    /// result is not positive definite.
    fn metric(&self, basis: &TangentBasis, projected: &[(f64, f64)]) -> (f64, f64, f64) {
        const PLAIN: (f64, f64, f64) = (1.0, 0.0, 1.0);
        let Some((along, h_norm)) = &self.along else {
            return PLAIN;
        };
        let usable = self.h_hat.iter().filter(|h| **h > 0.0).count();
        let q = if usable >= 6 {
            let rows = basis
                .i
                .as_slice()
                .iter()
                .zip(basis.j.as_slice())
                .zip(&self.h_hat)
                .filter(|(_, h)| **h > 0.0)
                .map(|((&x, &y), &h)| {
                    (
                        [x * x, 2.0 * x * y, y * y, 2.0 * h * x, 2.0 * h * y, h * h],
                        1.0,
                    )
                });
            least_squares::<6>(rows).and_then(|[ga, gb, gc, ..]| {
                let det = ga * gc - gb * gb;
                (det > 0.0).then(|| (gc / det, -gb / det, ga / det))
            })
        } else if projected.len() >= 5 {
            let rows = projected.iter().zip(along).map(|(&(x, y), &s)| {
                (
                    [x, y, h_norm * x * x, 2.0 * h_norm * x * y, h_norm * y * y],
                    s,
                )
            });
            least_squares::<5>(rows).map(|[_, _, qa, qb, qc]| (qa, qb, qc))
        } else {
            None
        };
        match q {
            Some((a, b, c)) if a > 0.0 && a * c - b * b > 0.0 => (a, b, c),
            _ => PLAIN,
        }
    }
}

fn least_squares<const N: usize>(rows: impl Iterator<Item = ([f64; N], f64)>) -> Option<[f64; N]> {
    let mut ata = [[0.0f64; N]; N];
    let mut atb = [0.0f64; N];
    for (row, rhs) in rows {
        for r in 0..N {
            atb[r] += row[r] * rhs;
            for c in 0..N {
                ata[r][c] += row[r] * row[c];
            }
        }
    }
    solve(ata, atb)
}

fn solve<const N: usize>(mut m: [[f64; N]; N], mut v: [f64; N]) -> Option<[f64; N]> {
    let scale = m.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
    for col in 0..N {
        let pivot = (col..N).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for r in col + 1..N {
            let k = m[r][col] / m[col][col];
            let pivot_row = m[col];
            for (c, e) in m[r].iter_mut().enumerate().skip(col) {
                *e -= k * pivot_row[c];
            }
            v[r] -= k * v[col];
        }
    }
    let mut x = [0.0; N];
    for r in (0..N).rev() {
        let tail: f64 = (r + 1..N).map(|c| m[r][c] * x[c]).sum();
        x[r] = (v[r] - tail) / m[r][r];
    }
    Some(x)
}

/// Gabriel test on the tangent plane around the origin: the edge to `p[k]`
/// survives unless another neighbor lies strictly inside the circle having
/// that edge as diameter, lengths measured with `metric`.
fn gabriel_neighbors(p: &[(f64, f64)], metric: (f64, f64, f64)) -> Vec<bool> {
    let (a, b, c) = metric;
    let len2 = |x: f64, y: f64| a * x * x + 2.0 * b * x * y + c * y * y;
    p.iter()
        .enumerate()
        .map(|(k, &(x, y))| {
            let (mx, my) = (0.5 * x, 0.5 * y);
            let r2 = 0.25 * len2(x, y);
            !p.iter()
                .enumerate()
                .any(|(w, &(wx, wy))| w != k && len2(wx - mx, wy - my) < r2)
        })
        .collect()
}

/// Routes one message from `source` to `dest`.
pub fn route(
    view: &RoutingView<'_>,
    source: usize,
    dest: usize,
    policy: &RoutingPolicy,
) -> Result<RouteTrace> {
    view.check(source)?;
    view.check(dest)?;
    if source == dest {
        return Err(Error::InvalidArgument("source and destination must differ"));
    }
    if policy.ttl_multiplier == 0 {
        return Err(Error::InvalidConfig("ttl_multiplier must be positive"));
    }
    let mut m = MessageState::new(view, source, dest, policy.ttl_multiplier * view.len())?;
    let greedy_mode = policy.variant.hop_mode();

    let outcome = loop {
        if m.current == m.dest {
            break Outcome::Delivered;
        }
        if m.ttl == 0 {
            break Outcome::TtlExpired;
        }
        if policy.anchor_selection {
            apply_anchor_selection(view, &mut m)?;
        }

        let greedy = match greedy_step(view, &m, policy.variant) {
            Ok(g) => g,
            Err(Error::NoNeighbors { .. }) => break Outcome::Stuck,
            Err(e) => return Err(e),
        };
        let next = match (m.fallback_from, greedy) {
            (None, Some(nb)) => Some((nb, greedy_mode)),
            (Some(start), Some(nb))
                if m.dist_to_dest(view, nb)? < m.dist_to_dest(view, start)? =>
            {
                m.fallback_from = None;
                m.fallback_prev = None;
                m.trace.mode_switches += 1;
                Some((nb, greedy_mode))
            }
            _ if !policy.fallback => None,
            (from, _) => {
                if from.is_none() {
                    m.fallback_from = Some(m.current);
                    m.fallback_prev = None;
                    m.face_crossing = 0.0;
                    m.face_edges.clear();
                    m.counter_clockwise = false;
                    m.trace.mode_switches += 1;
                }
                match fallback_step(view, &mut m) {
                    Ok(Some(nb)) => Some((nb, HopMode::Fallback)),
                    Ok(None)
                    | Err(Error::DegenerateBasis { .. })
                    | Err(Error::DegenerateVector { .. })
                    | Err(Error::InsufficientNeighbors { .. }) => None,
                    Err(e) => return Err(e),
                }
            }
        };
        let Some((nb, mode)) = next else {
            break Outcome::Stuck;
        };
        m.trace.hops.push(Hop {
            node: nb,
            mode,
            subset: m.subset.mode(),
        });
        m.ttl -= 1;
        m.fallback_prev = (mode == HopMode::Fallback).then_some(m.current);
        m.current = nb;
    };
    m.trace.outcome = outcome;
    Ok(m.trace)
}

/// Smallest anchor subset worth switching to.
pub const MIN_SUBSET: usize = 3;

fn apply_anchor_selection(view: &RoutingView<'_>, m: &mut MessageState) -> Result<()> {
    let fx = &view.coords[m.current];
    match select_anchor_subset(&m.origin_coords, &m.dest_full, fx, &m.subset) {
        // one or two distances do not pin down a point of the plane
        Ok(next) if next.mode() == SubsetMode::Subset && next.active().len() < MIN_SUBSET => {
            m.trace.empty_subset_hops += 1;
            Ok(())
        }
        Ok(next) if next != m.subset => {
            let thresholds = subset_thresholds(&m.origin_coords, &m.dest_full, fx)?;
            m.trace.subset_events.push(SubsetEvent {
                node: m.current,
                hop_index: m.trace.hops.len(),
                from: m.subset.mode(),
                to: next.mode(),
                thresholds,
                active: next.active().to_vec(),
            });
            m.set_subset(next)
        }
        Ok(_) => Ok(()),
        Err(Error::EmptySubset) => {
            m.trace.empty_subset_hops += 1;
            Ok(())
        }
        Err(e) => Err(e),
    }
}
