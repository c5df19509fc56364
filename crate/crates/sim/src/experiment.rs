//! Batch routing runs and their metrics.

use std::io::Write;

use anchor_coords::network::{generate, Area, NetworkConfig, NetworkGraph};
use anchor_coords::routing::{route, Outcome, RoutingPolicy, RoutingView};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Fraction of the area side defining a border strip.
pub const BORDER_FRACTION: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSelection {
    UniformRandomPairs,
    /// Source and destination in strips along opposite borders.
    BorderPairs,
    /// Explicit `(src, dst)` pairs, reused cyclically.
    Fixed(Vec<(usize, usize)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoordinateMode {
    Anchor,
    PhysicalBaseline,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub network: NetworkConfig,
    #[serde(default)]
    pub policy: RoutingPolicy,
    pub trials: usize,
    pub pair_selection: PairSelection,
    pub coordinate_mode: CoordinateMode,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        if self.trials == 0 {
            return Err(SimError::Input("trials must be at least 1".into()));
        }
        if self.policy.ttl_multiplier == 0 {
            return Err(SimError::Input("ttl_multiplier must be positive".into()));
        }
        if let PairSelection::Fixed(pairs) = &self.pair_selection {
            if pairs.is_empty() {
                return Err(SimError::Input("fixed pair list is empty".into()));
            }
            let n = self.network.node_count;
            if let Some(&(s, d)) = pairs.iter().find(|&&(s, d)| s >= n || d >= n || s == d) {
                return Err(SimError::Input(format!("invalid fixed pair ({s}, {d})")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub src: usize,
    pub dst: usize,
    pub outcome: Outcome,
    pub hops: usize,
    pub phys_length: f64,
    pub straight_dist: f64,
    pub mode_switches: usize,
    pub subset_switches: usize,
}

impl TrialRow {
    pub fn stretch(&self) -> f64 {
        self.phys_length / self.straight_dist
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub seed: u64,
    pub coordinate_mode: CoordinateMode,
    pub trials: usize,
    pub delivered: usize,
    pub delivery_rate: f64,
    /// Means over delivered trials; `None` when nothing was delivered.
    pub mean_hops: Option<f64>,
    pub mean_stretch: Option<f64>,
    pub mean_phys_length: Option<f64>,
    pub mean_degree: f64,
    #[serde(skip)]
    pub rows: Vec<TrialRow>,
}

/// Aggregates per-trial rows, summing in row order.
pub fn summarize(rows: &[TrialRow]) -> (usize, f64, Option<f64>, Option<f64>, Option<f64>) {
    let mut delivered = 0usize;
    let (mut hops, mut stretch, mut length) = (0.0, 0.0, 0.0);
    for r in rows.iter().filter(|r| r.outcome == Outcome::Delivered) {
        delivered += 1;
        hops += r.hops as f64;
        stretch += r.stretch();
        length += r.phys_length;
    }
    let rate = delivered as f64 / rows.len() as f64;
    let mean = |sum: f64| (delivered > 0).then(|| sum / delivered as f64);
    (delivered, rate, mean(hops), mean(stretch), mean(length))
}

/// Draws `count` source/destination pairs, deterministic in `seed`.
///
/// Random pairs are distinct nodes of the same connected component.
pub fn select_pairs(
    g: &NetworkGraph,
    area: Area,
    selection: &PairSelection,
    count: usize,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    if let PairSelection::Fixed(list) = selection {
        if let Some(&(s, d)) = list
            .iter()
            .find(|&&(s, d)| s >= g.len() || d >= g.len() || s == d)
        {
            return Err(SimError::Input(format!("invalid fixed pair ({s}, {d})")));
        }
        return Ok(list.iter().copied().cycle().take(count).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let labels = g.component_labels();
    let side = [area.width, area.height];
    let budget = 1000 * count.max(1);
    let mut pairs = Vec::with_capacity(count);
    let mut attempts = 0;
    while pairs.len() < count {
        if attempts >= budget {
            return Err(SimError::Failed(format!(
                "found only {} eligible pairs in {attempts} draws",
                pairs.len()
            )));
        }
        attempts += 1;
        let pair = match selection {
            PairSelection::BorderPairs => {
                let axis = rng.gen_range(0..2usize);
                let forward = rng.gen::<bool>();
                let coord = |v: usize| {
                    let p = g.nodes()[v];
                    let c = if axis == 0 { p.x } else { p.y };
                    c / side[axis]
                };
                let low: Vec<usize> = (0..g.len())
                    .filter(|&v| coord(v) <= BORDER_FRACTION)
                    .collect();
                let high: Vec<usize> = (0..g.len())
                    .filter(|&v| coord(v) >= 1.0 - BORDER_FRACTION)
                    .collect();
                if low.is_empty() || high.is_empty() {
                    continue;
                }
                let a = low[rng.gen_range(0..low.len())];
                let b = high[rng.gen_range(0..high.len())];
                if forward {
                    (a, b)
                } else {
                    (b, a)
                }
            }
            _ => (rng.gen_range(0..g.len()), rng.gen_range(0..g.len())),
        };
        if pair.0 != pair.1 && labels[pair.0] == labels[pair.1] {
            pairs.push(pair);
        }
    }
    Ok(pairs)
}

/// The policy actually run in `mode`: the physical baseline has no anchors
/// to select from.
pub fn effective_policy(policy: &RoutingPolicy, mode: CoordinateMode) -> RoutingPolicy {
    match mode {
        CoordinateMode::Anchor => *policy,
        CoordinateMode::PhysicalBaseline => RoutingPolicy {
            anchor_selection: false,
            ..*policy
        },
    }
}

/// Routes every pair over the chosen coordinates.
pub fn run_trials(
    g: &NetworkGraph,
    pairs: &[(usize, usize)],
    policy: &RoutingPolicy,
    mode: CoordinateMode,
) -> Result<Vec<TrialRow>> {
    let view = match mode {
        CoordinateMode::Anchor => RoutingView::anchor(g),
        CoordinateMode::PhysicalBaseline => RoutingView::physical(g),
    };
    let policy = effective_policy(policy, mode);
    let mut rows = Vec::with_capacity(pairs.len());
    for (trial, &(src, dst)) in pairs.iter().enumerate() {
        let mut trace = route(&view, src, dst, &policy)?;
        let phys_length = trace.measure(g)?;
        rows.push(TrialRow {
            trial,
            src,
            dst,
            outcome: trace.outcome,
            hops: trace.hop_count(),
            phys_length,
            straight_dist: g.position(src)?.distance(g.position(dst)?),
            mode_switches: trace.mode_switches,
            subset_switches: trace.subset_events.len(),
        });
        log::debug!("trial {trial}: {src} -> {dst} {}", trace.outcome.as_str());
    }
    Ok(rows)
}

pub fn report(
    g: &NetworkGraph,
    seed: u64,
    mode: CoordinateMode,
    rows: Vec<TrialRow>,
) -> MetricsReport {
    let (delivered, delivery_rate, mean_hops, mean_stretch, mean_phys_length) = summarize(&rows);
    MetricsReport {
        seed,
        coordinate_mode: mode,
        trials: rows.len(),
        delivered,
        delivery_rate,
        mean_hops,
        mean_stretch,
        mean_phys_length,
        mean_degree: g.mean_degree(),
        rows,
    }
}

/// Generates the network, draws the pairs and routes them.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<MetricsReport> {
    spec.validate()?;
    let g = generate(&spec.network)?;
    let seed = spec.network.rng_seed;
    let pairs = select_pairs(
        &g,
        spec.network.area,
        &spec.pair_selection,
        spec.trials,
        seed,
    )?;
    let rows = run_trials(&g, &pairs, &spec.policy, spec.coordinate_mode)?;
    Ok(report(&g, seed, spec.coordinate_mode, rows))
}

pub const CSV_HEADER: [&str; 9] = [
    "trial",
    "src",
    "dst",
    "outcome",
    "hops",
    "phys_length",
    "straight_dist",
    "mode_switches",
    "subset_switches",
];

/// Per-trial CSV, preceded by a `#` provenance line.
pub fn write_trials_csv<W: Write>(
    mut out: W,
    rows: &[TrialRow],
    seed: u64,
    spec_hash: &str,
) -> Result<()> {
    writeln!(out, "# seed={seed} spec_hash={spec_hash}").map_err(csv::Error::from)?;
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_trials_csv<R: std::io::Read>(input: R) -> Result<Vec<TrialRow>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub spec_hash: String,
    #[serde(flatten)]
    pub report: MetricsReport,
}
