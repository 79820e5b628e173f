//! Command-line front end: `route`, `simulate`, `check` and `dump-field`.
//!
//! Exit codes: 0 success, 1 usage error, 2 netlist parse/semantic error,
//! 3 numerical guard tripped.

pub mod format;
pub mod modes;
pub mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oamsort::field::propagate_tree_field;
use oamsort::netlist::{parse_netlist, Netlist, NetlistError};
use oamsort::{
    append_frft_sorter, build_tree, sample_lg, BeamGeometry, ModeIndex, PortLabel, Sorter,
};
use serde::Serialize;
use thiserror::Error;

use crate::modes::IntList;
use crate::report::{randomize_errors, Engine, RunOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Netlist {
        path: String,
        #[source]
        source: NetlistError,
    },
    #[error("numerical guard: {0}")]
    Guard(String),
    #[error(transparent)]
    Core(#[from] oamsort::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 1,
            CliError::Netlist { .. } => 2,
            CliError::Guard(_) | CliError::Core(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "oamsort",
    version,
    about = "Simulate converter-free OAM mode sorters"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Samples per side of the field grid.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    #[arg(long, default_value_t = 1.0)]
    pub waist: f64,
    /// Full width of the grid.
    #[arg(long, default_value_t = 8.0)]
    pub extent: f64,
}

impl GridArgs {
    fn geometry(&self) -> Result<BeamGeometry, CliError> {
        BeamGeometry::new(self.waist, self.grid, self.extent)
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Route one mode through an error-free sorter and print the port powers.
    Route {
        #[arg(long, allow_hyphen_values = true)]
        l: i32,
        #[arg(long, default_value_t = 0)]
        p: u32,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        frft_depth: Option<u32>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Run a netlist over a set of input modes and write a report.
    Simulate {
        netlist: PathBuf,
        /// OAM indices, e.g. `0:3` or `-2,0,5` (default: 0 .. 2^depth - 1).
        #[arg(long, allow_hyphen_values = true)]
        l: Option<IntList>,
        /// Radial indices (default: 0).
        #[arg(long)]
        p: Option<IntList>,
        #[arg(long, value_enum, default_value_t = Engine::Analytic)]
        engine: Engine,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the CSV crosstalk matrix to this path.
        #[arg(long)]
        matrix: Option<PathBuf>,
        /// Seed for `--error-sigma`.
        #[arg(long)]
        seed: Option<u64>,
        /// Standard deviation (rad) of random rotator/shifter errors added to every stage.
        #[arg(long, default_value_t = 0.0)]
        error_sigma: f64,
        /// Allow field-engine modes outside |l| <= 3, p <= 2.
        #[arg(long)]
        force: bool,
        /// Include wall-clock time in the JSON report.
        #[arg(long)]
        timing: bool,
    },
    /// Validate a netlist.
    Check { netlist: PathBuf },
    /// Write a sampled field as `grid <N> extent <e>` followed by `re,im` lines.
    DumpField {
        #[arg(long, allow_hyphen_values = true)]
        l: i32,
        #[arg(long, default_value_t = 0)]
        p: u32,
        #[command(flatten)]
        grid: GridArgs,
        /// Dump the field leaving this port of the netlist's OAM tree instead of the input.
        #[arg(long, requires = "port")]
        netlist: Option<PathBuf>,
        #[arg(long, requires = "netlist")]
        port: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Field-engine modes accepted without `--force`.
pub const FIELD_MAX_L: i32 = 3;
pub const FIELD_MAX_P: u32 = 2;

fn read_netlist(path: &Path) -> Result<Netlist, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_netlist(&text).map_err(|source| CliError::Netlist {
        path: path.display().to_string(),
        source,
    })
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

#[derive(Serialize)]
struct RoutePort {
    port: String,
    power: f64,
}

#[derive(Serialize)]
struct RouteReport {
    l: i32,
    p: u32,
    depth: u32,
    frft_depth: Option<u32>,
    port: String,
    power: f64,
    ports: Vec<RoutePort>,
}

fn cmd_route(
    m: ModeIndex,
    depth: u32,
    frft_depth: Option<u32>,
    format: OutputFormat,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let tree = build_tree(depth).map_err(|e| CliError::Usage(e.to_string()))?;
    let sorter = match frft_depth {
        Some(f) => append_frft_sorter(tree, f).map_err(|e| CliError::Usage(e.to_string()))?,
        None => Sorter::from(tree),
    };
    let port = sorter.route(m);
    let dist = sorter.simulate(m);
    let ports: Vec<RoutePort> = sorter
        .port_labels()
        .into_iter()
        .map(|p| RoutePort {
            port: p.to_string(),
            power: dist.power(p),
        })
        .collect();
    let text = match format {
        OutputFormat::Text => {
            let mut s = format!("l {} p {} depth {}", m.l, m.p, depth);
            if let Some(f) = frft_depth {
                write!(s, " frft_depth {f}").unwrap();
            }
            writeln!(s).unwrap();
            writeln!(s, "port {port}, power {:.12}", dist.power(port)).unwrap();
            for rp in &ports {
                writeln!(s, "  port {:>5}  power {:.12}", rp.port, rp.power).unwrap();
            }
            s
        }
        OutputFormat::Json => {
            let r = RouteReport {
                l: m.l,
                p: m.p,
                depth,
                frft_depth,
                port: port.to_string(),
                power: dist.power(port),
                ports,
            };
            serde_json::to_string_pretty(&r).expect("serialisable") + "\n"
        }
        OutputFormat::Csv => {
            let mut s = String::from("port,power\n");
            for rp in &ports {
                writeln!(s, "{},{}", rp.port, format::sig12(rp.power)).unwrap();
            }
            s
        }
    };
    write_output(None, &text, stdout)
}

fn mode_list(ls: &IntList, ps: &IntList) -> Result<Vec<ModeIndex>, CliError> {
    let mut out = Vec::new();
    for &l in &ls.0 {
        let l = i32::try_from(l).map_err(|_| CliError::Usage(format!("--l {l} out of range")))?;
        for &p in &ps.0 {
            let p = u32::try_from(p)
                .map_err(|_| CliError::Usage(format!("--p must be non-negative, got {p}")))?;
            out.push(ModeIndex::new(l, p));
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    path: &Path,
    l: Option<IntList>,
    p: Option<IntList>,
    engine: Engine,
    grid: &GridArgs,
    format: OutputFormat,
    out: Option<&Path>,
    matrix: Option<&Path>,
    seed: Option<u64>,
    error_sigma: f64,
    force: bool,
    timing: bool,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let start = Instant::now();
    let netlist = read_netlist(path)?;
    let mut sorter = netlist.build()?;
    let ls = l.unwrap_or_else(|| IntList((0..1i64 << netlist.tree.depth).collect()));
    let ps = p.unwrap_or(IntList(vec![0]));
    let modes = mode_list(&ls, &ps)?;

    if !(error_sigma.is_finite() && error_sigma >= 0.0) {
        return Err(CliError::Usage(format!(
            "--error-sigma must be a non-negative number, got {error_sigma}"
        )));
    }
    let seed = if error_sigma > 0.0 {
        let s = seed.unwrap_or(0);
        randomize_errors(&mut sorter, error_sigma, s)?;
        Some(s)
    } else {
        seed
    };

    let geometry = grid.geometry()?;
    if engine == Engine::Field && !force {
        if let Some(m) = modes
            .iter()
            .find(|m| m.l.abs() > FIELD_MAX_L || m.p > FIELD_MAX_P)
        {
            return Err(CliError::Guard(format!(
                "{m} is outside the field engine's validated range |l| <= {FIELD_MAX_L}, p <= {FIELD_MAX_P} (use --force)"
            )));
        }
    }
    if format == OutputFormat::Text {
        return Err(CliError::Usage("simulate writes json or csv".into()));
    }

    let opts = RunOptions {
        engine,
        geometry,
        seed,
        sigma: error_sigma,
    };
    let mut report = report::run(&sorter, &modes, &opts)?;
    if timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let text = match format {
        OutputFormat::Csv => report.to_csv(),
        _ => report.to_json(),
    };
    write_output(out, &text, stdout)?;
    if let Some(m) = matrix {
        write_output(Some(m), &report.to_csv(), stdout)?;
    }
    if !report.all_power_ok {
        let bad: Vec<String> = report
            .rows
            .iter()
            .filter(|r| !r.power_ok)
            .map(|r| format!("LG(l={}, p={}) total {}", r.l, r.p, r.total_power))
            .collect();
        return Err(CliError::Guard(format!(
            "power not conserved within {}: {}",
            report.tolerance,
            bad.join("; ")
        )));
    }
    Ok(())
}

fn cmd_check(path: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let n = read_netlist(path)?;
    n.build()?;
    let total = n.resolved_stages().len();
    let text = format!(
        "ok: depth={} frft_depth={} stages={} explicit={}\n",
        n.tree.depth,
        n.tree.frft_depth.map_or("-".to_string(), |d| d.to_string()),
        total,
        n.stages.len()
    );
    write_output(None, &text, stdout)
}

fn cmd_dump_field(
    m: ModeIndex,
    grid: &GridArgs,
    netlist: Option<&Path>,
    port: Option<u32>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let geometry = grid.geometry()?;
    let input = sample_lg(m, &geometry).map_err(|e| CliError::Guard(e.to_string()))?;
    let field = match (netlist, port) {
        (Some(path), Some(port)) => {
            let sorter = read_netlist(path)?.build()?;
            let label = PortLabel {
                oam: port,
                order: None,
            };
            let mut fields = propagate_tree_field(input, sorter.oam_tree())?;
            fields
                .remove(&port)
                .ok_or_else(|| CliError::Usage(format!("netlist has no port {label}")))?
        }
        _ => input,
    };
    let mut buf = Vec::new();
    field.write_dump(&mut buf).expect("writing to memory");
    write_output(out, &String::from_utf8(buf).expect("ascii dump"), stdout)
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Route {
            l,
            p,
            depth,
            frft_depth,
            format,
        } => cmd_route(ModeIndex::new(l, p), depth, frft_depth, format, stdout),
        Command::Simulate {
            netlist,
            l,
            p,
            engine,
            grid,
            format,
            out,
            matrix,
            seed,
            error_sigma,
            force,
            timing,
        } => cmd_simulate(
            &netlist,
            l,
            p,
            engine,
            &grid,
            format,
            out.as_deref(),
            matrix.as_deref(),
            seed,
            error_sigma,
            force,
            timing,
            stdout,
        ),
        Command::Check { netlist } => cmd_check(&netlist, stdout),
        Command::DumpField {
            l,
            p,
            grid,
            netlist,
            port,
            out,
        } => cmd_dump_field(
            ModeIndex::new(l, p),
            &grid,
            netlist.as_deref(),
            port,
            out.as_deref(),
            stdout,
        ),
    }
}

/// Runs the tool with `args` (including the program name); returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
