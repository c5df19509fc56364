//! Invariant suite run against a deployed scenario.

use anchor_coords::anchor_space::{
    apparent_destination, directional_form_nd, eval_f, jacobian, tangent_rank, AnchorSet,
    PhysPoint, PhysVec,
};
use anchor_coords::network::NetworkGraph;
use anchor_coords::routing::{route, RoutingPolicy, RoutingView};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckLine {
    fn new(name: &'static str, failures: usize, of: usize) -> Self {
        Self {
            name,
            passed: failures == 0,
            detail: format!("{failures} of {of} failed"),
        }
    }
}

/// Whether `x` and every anchor lie on one line, from cross products
/// relative to the configuration's extent.
pub fn collinear_with(x: PhysPoint, anchors: &AnchorSet) -> bool {
    let scale = anchors.iter().map(|a| a.distance(x)).fold(0.0, f64::max);
    let Some(&far) = anchors.iter().find(|a| a.distance(x) == scale) else {
        return true;
    };
    anchors
        .iter()
        .all(|a| x.to(far).cross(x.to(*a)).abs() <= 1e-12 * scale * scale)
}

fn at_anchor(x: PhysPoint, anchors: &AnchorSet) -> bool {
    anchors.iter().any(|a| a.distance(x) == 0.0)
}

/// Runs every check; `samples` bounds the per-node numerical checks.
pub fn run_checks(
    g: &NetworkGraph,
    policy: &RoutingPolicy,
    samples: usize,
    seed: u64,
) -> Result<Vec<CheckLine>> {
    let mut out = Vec::new();
    let n = g.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    let picks: Vec<usize> = (0..samples.min(n)).map(|_| rng.gen_range(0..n)).collect();

    let mut bad = 0;
    for u in 0..n {
        let adj = &g.adjacency()[u];
        if adj.windows(2).any(|w| w[0] >= w[1]) || adj.contains(&u) {
            bad += 1;
            continue;
        }
        for v in 0..n {
            let edge = u != v && g.nodes()[u].distance(g.nodes()[v]) <= g.radio_range();
            if edge != adj.binary_search(&v).is_ok()
                || edge != g.adjacency()[v].binary_search(&u).is_ok()
            {
                bad += 1;
                break;
            }
        }
    }
    out.push(CheckLine::new("unit-disk adjacency", bad, n));

    let anchors = g.anchors();
    let mut bad = 0;
    for (p, c) in g.nodes().iter().zip(g.coords()) {
        if &eval_f(*p, anchors) != c || !c.satisfies_triangle(anchors, 1e-9) {
            bad += 1;
        }
    }
    out.push(CheckLine::new("anchor coordinates", bad, n));

    let bad = g
        .anchor_nodes()
        .iter()
        .zip(anchors.iter())
        .filter(|(&v, a)| g.nodes()[v] != **a)
        .count();
    out.push(CheckLine::new("anchor nodes", bad, g.anchor_nodes().len()));

    let h = 1e-6 * g.radio_range();
    let mut bad = 0;
    let mut tried = 0;
    for &v in &picks {
        let x = g.nodes()[v];
        if at_anchor(x, anchors) {
            continue;
        }
        tried += 1;
        let j = jacobian(x, anchors)?;
        for (axis, step) in [PhysVec::new(h, 0.0), PhysVec::new(0.0, h)]
            .into_iter()
            .enumerate()
        {
            let fp = eval_f(x.offset(step), anchors);
            let fm = eval_f(x.offset(step.scale(-1.0)), anchors);
            let diff = fp.as_vec().sub(fm.as_vec())?.scale(0.5 / h)?;
            if j.rows()
                .iter()
                .zip(diff.as_slice())
                .any(|(r, d)| (r[axis] - d).abs() > 1e-5)
            {
                bad += 1;
                break;
            }
        }
    }
    out.push(CheckLine::new("jacobian vs finite differences", bad, tried));

    let mut bad = 0;
    let mut tried = 0;
    for &v in &picks {
        let x = g.nodes()[v];
        if at_anchor(x, anchors) {
            continue;
        }
        tried += 1;
        let expected = if collinear_with(x, anchors) { 1 } else { 2 };
        if tangent_rank(x, anchors)? != expected {
            bad += 1;
        }
    }
    out.push(CheckLine::new("tangent rank", bad, tried));

    let mut bad = 0;
    let mut tried = 0;
    for &v in &picks {
        let d = g.nodes()[rng.gen_range(0..n)];
        let x = g.nodes()[v];
        if at_anchor(x, anchors) || x == d {
            continue;
        }
        tried += 1;
        let dir = PhysVec::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        let nd = directional_form_nd(x, d, anchors, dir)?;
        let plane = dir.dot(x.to(apparent_destination(x, d, anchors)?));
        // |Jv · w| ≤ n |v| d(X, D)
        let scale = anchors.len() as f64 * dir.norm() * x.distance(d);
        if (nd - plane).abs() > 1e-9 * scale {
            bad += 1;
        }
    }
    out.push(CheckLine::new("directional form", bad, tried));

    let views = [RoutingView::anchor(g), RoutingView::physical(g)];
    let labels = g.component_labels();
    let mut bad = 0;
    let mut tried = 0;
    for &s in &picks {
        let d = rng.gen_range(0..n);
        if s == d {
            continue;
        }
        for view in &views {
            tried += 1;
            let a = route(view, s, d, policy)?;
            let b = route(view, s, d, policy)?;
            let path = a.path();
            let edges_ok = path
                .windows(2)
                .all(|w| g.adjacency()[w[0]].binary_search(&w[1]).is_ok());
            let ttl_ok = a.hop_count() <= policy.ttl_multiplier * n;
            let reach_ok = !a.delivered() || labels[s] == labels[d];
            if a != b || !edges_ok || !ttl_ok || !reach_ok {
                bad += 1;
            }
        }
    }
    out.push(CheckLine::new("routing determinism and safety", bad, tried));
    Ok(out)
}
