//! Command-line interface: argument parsing and the four commands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use confbill_core::billiard::{simulate, simulate_via_source, Trajectory};
use confbill_core::conformal::{map_wall, BranchPolicy};
use confbill_core::geometry::Curve;
use confbill_core::{Execution, ForceField, SimConfig, Vec2};

use crate::figures::{self, Which};
use crate::scenario::{Resolved, Scenario};
use crate::svg::{Role, Svg, SvgPath};
use crate::{conjugacy, output, suites, write_file, LabError, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "CONFBILL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "confbill", version, about = "Mechanical billiards with conic walls")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate every initial state of a scenario and write CSV tables and an SVG.
    Simulate {
        scenario: PathBuf,
        /// Output directory; defaults to the scenario's `output.dir`, then `out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with status 1 when a trajectory ends before its stop condition.
        #[arg(long)]
        strict: bool,
    },
    /// Draw the images of conic walls: `fig1` (z²), `fig3` (z³) or `birkhoff`.
    Figures {
        which: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a verification suite and write one report per check.
    Check {
        /// hooke, kepler, stark, twocenter, free, appendixB, appendixC or all.
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare a pushed-forward source billiard with a direct target-plane billiard.
    Conjugacy {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Size the global thread pool from [`THREADS_VAR`] if it is set.
pub fn configure_threads() -> Result<()> {
    let Ok(val) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = val
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| LabError::Config(format!("{THREADS_VAR}={val:?} is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| LabError::Config(format!("{THREADS_VAR}: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

/// Run a parsed command, returning the text to print on success.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Simulate { scenario, out, strict } => {
            let res = Scenario::load(&scenario)?.resolve()?;
            let dir = out.or_else(|| res.out_dir.clone()).unwrap_or_else(|| "out".into());
            cmd_simulate(&res, &dir, strict)
        }
        Command::Figures { which, out } => {
            let which: Which = which.parse()?;
            let set = figures::render(which, &out)?;
            Ok(figures::summary_text(&set))
        }
        Command::Check { suite, seed, out } => cmd_check(&suite, seed, &out),
        Command::Conjugacy { scenario, out } => {
            let res = Scenario::load(&scenario)?.resolve()?;
            let dir = out.or_else(|| res.out_dir.clone()).unwrap_or_else(|| "out".into());
            cmd_conjugacy(&res, &dir)
        }
    }
}

pub fn cmd_check(suite: &str, seed: u64, out: &Path) -> Result<String> {
    let run = suites::run(suite, seed)?;
    run.write(out)?;
    let summary = run.summary();
    if run.passed() {
        Ok(summary)
    } else {
        Err(LabError::Verification(format!("{suite}: unexpected verdicts\n{summary}")))
    }
}

pub fn cmd_conjugacy(res: &Resolved, out: &Path) -> Result<String> {
    let report = conjugacy::run(res)?;
    let text = report.to_text();
    write_file(&out.join(&res.name).join("conjugacy.txt"), &text)?;
    if report.passed() {
        Ok(text)
    } else {
        Err(LabError::Verification(format!(
            "deviation {:e} exceeds {:e}\n{text}",
            report.max_deviation(),
            report.tolerance
        )))
    }
}

/// Simulated trajectories of a scenario in the plane of its target field.
pub fn trajectories(res: &Resolved) -> Result<Vec<Trajectory>> {
    if res.wall.is_empty() {
        return Err(LabError::Config("simulate needs at least one wall".into()));
    }
    if res.initial.is_empty() {
        return Err(LabError::Config("simulate needs at least one initial state".into()));
    }
    let runs = Execution::default().map(&res.initial, |s| match &res.pairing {
        None => simulate(&res.field, &res.wall, *s, res.stop, &res.sim),
        Some(p) => {
            let cfg = SimConfig { branch_hint: Some(s.q), ..res.sim.clone() };
            let t0 = p.push_state(s)?;
            simulate_via_source(p, &res.wall, t0, res.stop, &cfg)
        }
    });
    runs.into_iter().map(|r| r.map_err(LabError::from)).collect()
}

fn target_field(res: &Resolved) -> &ForceField {
    res.pairing.as_ref().map_or(&res.field, |p| &p.target_field)
}

fn scene_svg(res: &Resolved, trajs: &[Trajectory]) -> Result<Svg> {
    let reach = trajs
        .iter()
        .flat_map(|t| t.samples().map(|(_, s)| s.state.q.norm()))
        .filter(|r| r.is_finite())
        .fold(1.0f64, f64::max);
    let mut svg = Svg::new(format!("{}: {}", res.name, target_field(res).name()));
    match &res.pairing {
        None => {
            for comp in &res.wall.components {
                let conic = match &comp.curve {
                    Curve::Conic(c) => Some(*c),
                    _ => None,
                };
                for pl in comp.curve.polylines(512, 1.2 * reach)? {
                    let mut path = SvgPath::new(Role::Wall, pl.points, pl.closed);
                    path.conic = conic;
                    svg.push(path);
                }
            }
        }
        Some(p) => {
            let extent = p.map.inverse_branches(Vec2::new(1.2 * reach, 0.0)).ok().map_or(reach, |zs| {
                zs.iter().map(|z| z.norm()).fold(1.0f64, f64::max) * 1.5
            });
            let mapped = map_wall(p.map, &res.wall, BranchPolicy::Covering, 512, extent)?;
            for (comp, img) in res.wall.components.iter().zip(&mapped.components) {
                for pl in &img.polylines {
                    let mut path = SvgPath::new(Role::Image, pl.points.clone(), pl.closed);
                    if let Curve::Conic(c) = &comp.curve {
                        path = path.conic(*c).mapped(p.map, img.closed_form);
                    }
                    svg.push(path);
                }
            }
        }
    }
    for t in trajs {
        for arc in &t.arcs {
            svg.push(SvgPath::new(Role::Trajectory, arc.samples.iter().map(|s| s.state.q).collect(), false));
        }
    }
    Ok(svg)
}

pub fn cmd_simulate(res: &Resolved, out: &Path, strict: bool) -> Result<String> {
    let trajs = trajectories(res)?;
    let dir = out.join(&res.name);
    let field = target_field(res);
    let names: Vec<String> = res.wall.components.iter().map(|c| c.name.clone()).collect();
    let mut summary = String::new();
    let _ = writeln!(summary, "scenario = {}", res.name);
    let _ = writeln!(summary, "field = {}", field.name());
    if let Some(p) = &res.pairing {
        let _ = writeln!(summary, "map = {}", p.map);
        let _ = writeln!(summary, "source_field = {}", p.source_field.name());
    }
    let mut stopped = Vec::new();
    for (i, t) in trajs.iter().enumerate() {
        write_file(&dir.join(format!("trajectory_{i}.csv")), output::trajectory_csv(t, field)?)?;
        write_file(&dir.join(format!("events_{i}.csv")), output::events_csv(t, &names)?)?;
        let energies: Vec<f64> = t.samples().filter_map(|(_, s)| field.hamiltonian(&s.state).ok()).collect();
        let drift = energies
            .first()
            .map_or(0.0, |e0| energies.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max));
        let _ = writeln!(summary, "[initial {i}]");
        let _ = writeln!(summary, "outcome = {}", t.outcome.label());
        let _ = writeln!(summary, "reflections = {}", t.events.len());
        let _ = writeln!(summary, "grazing = {}", t.grazing);
        let _ = writeln!(summary, "steps = {}", t.steps);
        let _ = writeln!(summary, "max_energy_drift = {drift:e}");
        if !t.outcome.is_completed() {
            stopped.push(format!("initial {i}: {:?}", t.outcome));
        }
    }
    if res.svg {
        write_file(&dir.join("trajectory.svg"), scene_svg(res, &trajs)?.render())?;
    }
    write_file(&dir.join("summary.txt"), &summary)?;
    if strict && !stopped.is_empty() {
        return Err(LabError::Runtime(stopped.join("; ")));
    }
    Ok(summary)
}
