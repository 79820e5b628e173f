use std::fmt::Write as _;

use oamsort::field::propagate_tree_field;
use oamsort::{sample_lg, BeamGeometry, ModeIndex, PortLabel, Sorter, StageSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::format::sig12;
use crate::CliError;

/// Per-row power tolerance of the mode-space engine.
pub const ANALYTIC_TOLERANCE: f64 = 1e-12;
/// Per-row power tolerance of the grid engine (interpolated rotations lose a little).
pub const FIELD_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Analytic,
    Field,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageErrorEntry {
    pub kind: &'static str,
    /// OAM port the FRFT tree hangs off; absent for OAM stages.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<u32>,
    pub n: u32,
    pub k: u32,
    pub rot_err: f64,
    pub phase_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorSettings {
    pub seed: Option<u64>,
    pub sigma: f64,
    /// Stages with a non-zero error, after random draws.
    pub stages: Vec<StageErrorEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSettings {
    pub grid: usize,
    pub waist: f64,
    pub extent: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub l: i32,
    pub p: u32,
    pub expected_port: String,
    pub bright_port: String,
    pub powers: Vec<f64>,
    pub total_power: f64,
    pub power_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub engine: Engine,
    pub depth: u32,
    pub frft_depth: Option<u32>,
    pub ports: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSettings>,
    pub errors: ErrorSettings,
    pub tolerance: f64,
    pub rows: Vec<ReportRow>,
    pub all_power_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// Crosstalk matrix: one row per input mode, one column per port.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("l,p");
        for p in &self.ports {
            write!(out, ",port_{p}").unwrap();
        }
        out.push('\n');
        for row in &self.rows {
            write!(out, "{},{}", row.l, row.p).unwrap();
            for &w in &row.powers {
                write!(out, ",{}", sig12(w)).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn perturb(spec: StageSpec, rng: &mut ChaCha8Rng, normal: &Normal<f64>) -> StageSpec {
    let da = normal.sample(rng);
    let dp = normal.sample(rng);
    spec.with_arm_error(spec.arm_error() + da)
        .with_phase_error(spec.phase_error() + dp)
}

/// Adds independent `N(0, sigma)` rotator and shifter errors to every stage.
pub fn randomize_errors(sorter: &mut Sorter, sigma: f64, seed: u64) -> Result<(), CliError> {
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| CliError::Usage(format!("invalid --error-sigma: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let oam = sorter.oam_tree_mut();
    for s in oam.stages().to_vec() {
        oam.set_stage(perturb(s, &mut rng, &normal))?;
    }
    for t in sorter.order_trees_mut() {
        for s in t.stages().to_vec() {
            t.set_stage(perturb(s, &mut rng, &normal))?;
        }
    }
    Ok(())
}

fn error_entries(sorter: &Sorter) -> Vec<StageErrorEntry> {
    let entry = |s: &StageSpec, tree| StageErrorEntry {
        kind: s.kind().as_str(),
        tree,
        n: s.n(),
        k: s.k(),
        rot_err: s.arm_error(),
        phase_err: s.phase_error(),
    };
    let nonzero = |s: &&StageSpec| s.arm_error() != 0.0 || s.phase_error() != 0.0;
    let mut out: Vec<_> = sorter
        .oam_tree()
        .stages()
        .iter()
        .filter(nonzero)
        .map(|s| entry(s, None))
        .collect();
    for (port, t) in sorter.order_trees().iter().enumerate() {
        out.extend(
            t.stages()
                .iter()
                .filter(nonzero)
                .map(|s| entry(s, Some(port as u32))),
        );
    }
    out
}

pub struct RunOptions {
    pub engine: Engine,
    pub geometry: BeamGeometry,
    pub seed: Option<u64>,
    pub sigma: f64,
}

fn row(
    m: ModeIndex,
    expected: PortLabel,
    ports: &[PortLabel],
    powers: Vec<f64>,
    tol: f64,
) -> ReportRow {
    let total: f64 = powers.iter().sum();
    let bright = powers
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &w)| {
            if w > best.1 {
                (i, w)
            } else {
                best
            }
        })
        .0;
    ReportRow {
        l: m.l,
        p: m.p,
        expected_port: expected.to_string(),
        bright_port: ports[bright].to_string(),
        powers,
        total_power: total,
        power_ok: (total - 1.0).abs() <= tol,
    }
}

/// Runs every mode through `sorter` with the chosen engine.
pub fn run(sorter: &Sorter, modes: &[ModeIndex], opts: &RunOptions) -> Result<RunReport, CliError> {
    let ports = sorter.port_labels();
    let (tolerance, grid) = match opts.engine {
        Engine::Analytic => (ANALYTIC_TOLERANCE, None),
        Engine::Field => (
            FIELD_TOLERANCE,
            Some(GridSettings {
                grid: opts.geometry.grid_size(),
                waist: opts.geometry.waist(),
                extent: opts.geometry.extent(),
            }),
        ),
    };
    if opts.engine == Engine::Field && sorter.frft_depth().is_some() {
        return Err(CliError::Usage(
            "the field engine cannot simulate FRFT stages; use --engine analytic".into(),
        ));
    }

    let mut rows = Vec::with_capacity(modes.len());
    for &m in modes {
        let powers: Vec<f64> = match opts.engine {
            Engine::Analytic => {
                let dist = sorter.simulate(m);
                ports.iter().map(|&p| dist.power(p)).collect()
            }
            Engine::Field => {
                let input =
                    sample_lg(m, &opts.geometry).map_err(|e| CliError::Guard(e.to_string()))?;
                let fields = propagate_tree_field(input, sorter.oam_tree())?;
                ports.iter().map(|p| fields[&p.oam].power()).collect()
            }
        };
        rows.push(row(m, sorter.route(m), &ports, powers, tolerance));
    }

    Ok(RunReport {
        engine: opts.engine,
        depth: sorter.oam_tree().depth(),
        frft_depth: sorter.frft_depth(),
        ports: ports.iter().map(PortLabel::to_string).collect(),
        grid,
        errors: ErrorSettings {
            seed: opts.seed,
            sigma: opts.sigma,
            stages: error_entries(sorter),
        },
        tolerance,
        all_power_ok: rows.iter().all(|r| r.power_ok),
        rows,
        timing_ms: None,
    })
}
