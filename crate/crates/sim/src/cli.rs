//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anchor_coords::analysis::{integrate_curve, CurveOptions, CurveStop};
use anchor_coords::anchor_space::PhysPoint;
use anchor_coords::network::generate;
use anchor_coords::routing::{route, GreedyVariant, RoutingPolicy, RoutingView};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::check::run_checks;
use crate::error::{Result, SimError};
use crate::experiment::{
    effective_policy, run_experiment, write_trials_csv, CoordinateMode, ExperimentSpec, Summary,
};
use crate::files::{
    load_network, read_json, read_scenario, spec_hash, write_bytes, write_json, NetworkFile,
};

#[derive(Debug, Parser)]
#[command(
    name = "anchor-sim",
    version,
    about = "Routing experiments on anchor-distance coordinates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deploy a scenario and write the network file
    Generate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's rng_seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Route one message and print its hops
    Route {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        src: usize,
        #[arg(long)]
        dst: usize,
        #[command(flatten)]
        policy: PolicyArgs,
        #[arg(long, value_enum, default_value_t = Mode::Anchor)]
        mode: Mode,
        /// Print the trace as JSON
        #[arg(long)]
        json: bool,
    },
    /// Run an experiment spec, writing summary.json and trials.csv
    Experiment {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrate the continuous descent curve and write it as CSV
    Curve {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, requires = "dst", conflicts_with = "from")]
        src: Option<usize>,
        #[arg(long, requires = "src", conflicts_with = "to")]
        dst: Option<usize>,
        /// Start point `x,y`
        #[arg(long, value_parser = parse_point, requires = "to")]
        from: Option<PhysPoint>,
        /// End point `x,y`
        #[arg(long, value_parser = parse_point, requires = "from")]
        to: Option<PhysPoint>,
        /// Integration step; defaults to a tenth of the radio range
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the invariant suite on a scenario or network file
    Check {
        #[arg(long)]
        net: PathBuf,
        /// Nodes sampled by the per-node checks
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Anchor,
    PhysicalBaseline,
}

/// Overrides for the policy stored with the network.
#[derive(Debug, Args)]
pub struct PolicyArgs {
    /// Greedy variant (1, 2 or 3)
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    variant: Option<u8>,
    #[arg(long, value_enum)]
    fallback: Option<Switch>,
    #[arg(long, value_enum)]
    anchor_selection: Option<Switch>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    ttl_multiplier: Option<u64>,
}

impl PolicyArgs {
    fn apply(&self, mut p: RoutingPolicy) -> Result<RoutingPolicy> {
        if let Some(v) = self.variant {
            p.variant = GreedyVariant::from_number(v)?;
        }
        if let Some(s) = self.fallback {
            p.fallback = s == Switch::On;
        }
        if let Some(s) = self.anchor_selection {
            p.anchor_selection = s == Switch::On;
        }
        if let Some(t) = self.ttl_multiplier {
            p.ttl_multiplier = t as usize;
        }
        Ok(p)
    }
}

fn parse_point(s: &str) -> std::result::Result<PhysPoint, String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let x: f64 = x.trim().parse().map_err(|e| format!("{e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("{e}"))?;
    if !(x.is_finite() && y.is_finite()) {
        return Err("coordinates must be finite".into());
    }
    Ok(PhysPoint::new(x, y))
}

#[derive(Serialize)]
struct RouteOutput<'a> {
    seed: u64,
    spec_hash: &'a str,
    source: usize,
    dest: usize,
    outcome: &'static str,
    physical_length: f64,
    mode_switches: usize,
    subset_switches: usize,
    hops: &'a [anchor_coords::routing::Hop],
}

fn io_err(e: std::io::Error) -> SimError {
    SimError::Failed(format!("cannot write output: {e}"))
}

pub fn run<W: Write>(cli: Cli, stdout: &mut W) -> Result<()> {
    match cli.command {
        Command::Generate {
            scenario,
            out,
            seed,
        } => {
            let mut s = read_scenario(&scenario)?;
            if let Some(seed) = seed {
                s.network.rng_seed = seed;
            }
            let g = generate(&s.network)?;
            let hash = spec_hash(&s);
            write_json(&out, &NetworkFile::from_graph(&s, hash, &g))?;
            let components = g.component_labels().into_iter().max().map_or(0, |m| m + 1);
            writeln!(
                stdout,
                "nodes {} anchors {} mean_degree {:.3} components {components}",
                g.len(),
                g.anchors().len(),
                g.mean_degree()
            )
            .map_err(io_err)?;
        }
        Command::Route {
            net,
            src,
            dst,
            policy,
            mode,
            json,
        } => {
            let loaded = load_network(&net)?;
            let g = &loaded.graph;
            let policy = policy.apply(loaded.policy.unwrap_or_default())?;
            let (view, mode) = match mode {
                Mode::Anchor => (RoutingView::anchor(g), CoordinateMode::Anchor),
                Mode::PhysicalBaseline => {
                    (RoutingView::physical(g), CoordinateMode::PhysicalBaseline)
                }
            };
            let policy = effective_policy(&policy, mode);
            let mut trace = route(&view, src, dst, &policy)?;
            let length = trace.measure(g)?;
            if json {
                let out = RouteOutput {
                    seed: loaded.seed,
                    spec_hash: &loaded.spec_hash,
                    source: src,
                    dest: dst,
                    outcome: trace.outcome.as_str(),
                    physical_length: length,
                    mode_switches: trace.mode_switches,
                    subset_switches: trace.subset_events.len(),
                    hops: &trace.hops,
                };
                let text = serde_json::to_string_pretty(&out).expect("serializable trace");
                writeln!(stdout, "{text}").map_err(io_err)?;
            } else {
                let mut text = format!("# seed={} spec_hash={}\n", loaded.seed, loaded.spec_hash);
                text += &format!(
                    "{src} -> {dst}: {} in {} hops, {length} m, {} mode switches, {} subset switches\n",
                    trace.outcome.as_str(),
                    trace.hop_count(),
                    trace.mode_switches,
                    trace.subset_events.len()
                );
                text += "hop,node,mode,subset\n";
                text += &format!("0,{src},source,all\n");
                for (i, h) in trace.hops.iter().enumerate() {
                    let mode = serde_json::to_value(h.mode).expect("mode");
                    let subset = serde_json::to_value(h.subset).expect("subset");
                    text += &format!(
                        "{},{},{},{}\n",
                        i + 1,
                        h.node,
                        mode.as_str().unwrap_or_default(),
                        subset.as_str().unwrap_or_default()
                    );
                }
                stdout.write_all(text.as_bytes()).map_err(io_err)?;
            }
        }
        Command::Experiment { spec, out } => {
            let raw: serde_json::Value = read_json(&spec)?;
            let parsed: ExperimentSpec =
                serde_json::from_value(raw).map_err(|source| SimError::Parse {
                    path: spec.clone(),
                    source,
                })?;
            parsed.validate()?;
            let hash = spec_hash(&parsed);
            log::info!("running {} trials", parsed.trials);
            let report = run_experiment(&parsed)?;
            fs::create_dir_all(&out).map_err(|source| SimError::Write {
                path: out.clone(),
                source,
            })?;
            let mut csv = Vec::new();
            write_trials_csv(&mut csv, &report.rows, report.seed, &hash)?;
            write_bytes(&out.join("trials.csv"), &csv)?;
            let mode = report.coordinate_mode;
            let summary = Summary {
                spec_hash: hash,
                report,
            };
            write_json(&out.join("summary.json"), &summary)?;
            let r = &summary.report;
            writeln!(
                stdout,
                "{} trials, delivery_rate {}, mean_hops {}, mean_stretch {} ({})",
                r.trials,
                r.delivery_rate,
                fmt_opt(r.mean_hops),
                fmt_opt(r.mean_stretch),
                match mode {
                    CoordinateMode::Anchor => "anchor",
                    CoordinateMode::PhysicalBaseline => "physical-baseline",
                }
            )
            .map_err(io_err)?;
        }
        Command::Curve {
            net,
            src,
            dst,
            from,
            to,
            step,
            out,
        } => {
            let loaded = load_network(&net)?;
            let g = &loaded.graph;
            let (x0, d) = match (src, dst, from, to) {
                (Some(s), Some(t), _, _) => (g.position(s)?, g.position(t)?),
                (_, _, Some(a), Some(b)) => (a, b),
                _ => return Err(SimError::Input("give --src/--dst or --from/--to".into())),
            };
            let step = step.unwrap_or(g.radio_range() / 10.0);
            if !(step > 0.0 && step.is_finite()) {
                return Err(SimError::Input("step must be positive".into()));
            }
            let opts = CurveOptions::for_scale(g.radio_range());
            let c = integrate_curve(x0, d, g.anchors(), step, &opts)?;
            let mut text = format!("# seed={} spec_hash={}\n", loaded.seed, loaded.spec_hash);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["t", "x", "y", "dist_to_D"])?;
            for (p, t) in c.samples.iter().zip(&c.times) {
                w.serialize((t, p.x, p.y, p.distance(d)))?;
            }
            let body = w
                .into_inner()
                .map_err(|e| SimError::Failed(e.to_string()))?;
            text += &String::from_utf8(body).expect("ascii csv");
            write_bytes(&out, text.as_bytes())?;
            let stop = match c.stop {
                CurveStop::Converged => "converged".to_string(),
                CurveStop::Stationary { at } => format!("stationary at ({}, {})", at.x, at.y),
                CurveStop::Singular { anchor } => format!("reached anchor {anchor}"),
                CurveStop::MaxSteps => "step limit".to_string(),
            };
            writeln!(
                stdout,
                "{stop}: {} samples, arc_length {}, bound_value {}, straight {}",
                c.samples.len(),
                c.arc_length,
                c.bound_value,
                x0.distance(d)
            )
            .map_err(io_err)?;
        }
        Command::Check { net, samples } => {
            let loaded = load_network(&net)?;
            let policy = loaded.policy.unwrap_or_default();
            let lines = run_checks(&loaded.graph, &policy, samples, loaded.seed)?;
            let mut failed = 0;
            for l in &lines {
                let verdict = if l.passed { "ok" } else { "FAIL" };
                writeln!(stdout, "{verdict:4} {}: {}", l.name, l.detail).map_err(io_err)?;
                failed += usize::from(!l.passed);
            }
            if failed > 0 {
                return Err(SimError::Failed(format!("{failed} checks failed")));
            }
        }
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| v.to_string())
}
