//! The `spin-atlas` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use spin_atlas_core::catalog;
use spin_atlas_core::spin::SpinSystemSpec;
use spin_atlas_core::sweep::{CrossingFeature, FieldRange, SweepOptions, DEFAULT_POINTS};
use spin_atlas_core::thermal::ThermalZfsModel;
use spin_atlas_core::trace::{auto_seeds, fit_dips, side_peak_separations, FitOptions};
use spin_atlas_core::Error;

use crate::config::Config;
use crate::{default_engine, io, AtlasEngine, AtlasError};

/// Default sweep bounds, G.
pub const DEFAULT_RANGE: (f64, f64) = (0.0, 1100.0);
/// Default temperature, K.
pub const DEFAULT_TEMPERATURE: f64 = 300.0;
/// Half width of the window searched for the `tshift` feature, G.
pub const DEFAULT_TSHIFT_WINDOW: f64 = 40.0;
/// Grid spacing of the `tshift` locating sweep, G.
const TSHIFT_STEP: f64 = 0.25;
/// Default prominence factor for automatic trace seeds.
pub const DEFAULT_PROMINENCE: f64 = 5.0;

#[derive(Debug, Parser)]
#[command(name = "spin-atlas", version, about = "Level-crossing maps of NV spin clusters")]
struct Cli {
    /// TOML file with defaults for any subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List catalog systems.
    Catalog {
        #[arg(long, value_enum, default_value_t = CatalogFormat::Text)]
        format: CatalogFormat,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Eigenvalues and probe projections over a field grid.
    Sweep {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        model: ThermalArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Detected crossing features.
    Features {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[command(flatten)]
        model: ThermalArgs,
        #[command(flatten)]
        detect: DetectArgs,
        /// Also compute each feature's shift rate at 300 K.
        #[arg(long)]
        slopes: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Position of one feature against temperature.
    Tshift {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        model: ThermalArgs,
        #[command(flatten)]
        detect: DetectArgs,
        /// Approximate feature field at 300 K, G.
        #[arg(long, value_name = "GAUSS")]
        feature: f64,
        #[arg(long)]
        tmin: Option<f64>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        tstep: Option<f64>,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Fit Lorentzian dips to a measured trace.
    FitTrace {
        /// CSV with columns B_gauss,pl.
        trace: PathBuf,
        /// Initial dip centers, G. Found automatically when absent.
        #[arg(long, num_args = 1.., value_delimiter = ',', allow_negative_numbers = true)]
        seeds: Option<Vec<f64>>,
        /// Dip to measure separations from, G.
        #[arg(long)]
        central: Option<f64>,
        /// Prominence factor for automatic seeds.
        #[arg(long)]
        prominence: Option<f64>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CatalogFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct SystemArgs {
    /// Catalog id.
    #[arg(long, conflicts_with = "spec")]
    system: Option<String>,
    /// Spin-system JSON file.
    #[arg(long, value_name = "FILE")]
    spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RangeArgs {
    #[arg(long, allow_negative_numbers = true)]
    bmin: Option<f64>,
    #[arg(long)]
    bmax: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Temperature, K.
    #[arg(long)]
    temp: Option<f64>,
}

#[derive(Debug, Args)]
struct ThermalArgs {
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c2: Option<f64>,
    #[arg(long)]
    delta1: Option<f64>,
    #[arg(long)]
    delta2: Option<f64>,
}

#[derive(Debug, Args)]
struct DetectArgs {
    #[arg(long)]
    jump_threshold: Option<f64>,
    #[arg(long)]
    gap_ceiling: Option<f64>,
    #[arg(long)]
    gap_true: Option<f64>,
    #[arg(long)]
    cluster_radius: Option<f64>,
}

/// Run with process arguments (the first is the program name), writing
/// to stdout and stderr. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code();
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

struct Source {
    label: String,
    spec: SpinSystemSpec,
}

fn source(args: &SystemArgs, cfg: &Config) -> Result<Source, AtlasError> {
    let (system, spec) = match (&args.system, &args.spec) {
        (None, None) => (cfg.sweep.system.clone(), cfg.sweep.spec.as_ref().map(PathBuf::from)),
        (s, p) => (s.clone(), p.clone()),
    };
    match (system, spec) {
        (Some(id), None) => match catalog::get_system(&id) {
            Ok(e) => Ok(Source { label: e.id.to_string(), spec: e.spec }),
            Err(e @ Error::UnknownSystem { .. }) => Err(AtlasError::Usage(e.to_string())),
            Err(e) => Err(e.into()),
        },
        (None, Some(path)) => Ok(Source { label: path.display().to_string(), spec: io::load_spec(&path)? }),
        (Some(_), Some(_)) => Err(AtlasError::Usage("give either a system id or a spec file, not both".into())),
        (None, None) => Err(AtlasError::Usage("no system given; use --system <id> or --spec <file>".into())),
    }
}

fn thermal(args: &ThermalArgs, cfg: &Config) -> ThermalZfsModel {
    let m = cfg.thermal_model(ThermalZfsModel::default());
    ThermalZfsModel {
        d0: args.d0.unwrap_or(m.d0),
        c1: args.c1.unwrap_or(m.c1),
        c2: args.c2.unwrap_or(m.c2),
        delta1: args.delta1.unwrap_or(m.delta1),
        delta2: args.delta2.unwrap_or(m.delta2),
        ..m
    }
}

fn options(args: Option<&DetectArgs>, cfg: &Config) -> SweepOptions {
    let o = cfg.sweep_options(SweepOptions::default());
    let Some(a) = args else { return o };
    SweepOptions {
        jump_threshold: a.jump_threshold.unwrap_or(o.jump_threshold),
        gap_ceiling: a.gap_ceiling.unwrap_or(o.gap_ceiling),
        gap_true: a.gap_true.unwrap_or(o.gap_true),
        cluster_radius: a.cluster_radius.unwrap_or(o.cluster_radius),
        ..o
    }
}

fn range(args: &RangeArgs, cfg: &Config) -> Result<(FieldRange, f64), AtlasError> {
    let s = &cfg.sweep;
    let r = FieldRange::new(
        args.bmin.or(s.bmin).unwrap_or(DEFAULT_RANGE.0),
        args.bmax.or(s.bmax).unwrap_or(DEFAULT_RANGE.1),
        args.points.or(s.points).unwrap_or(DEFAULT_POINTS),
    )
    .map_err(|e| AtlasError::Usage(e.to_string()))?;
    let t = args.temp.or(s.temp).unwrap_or(DEFAULT_TEMPERATURE);
    Ok((r, t))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), AtlasError> {
    match path {
        Some(p) => io::write_atomic(p, text.as_bytes()),
        None => out.write_all(text.as_bytes()).map_err(|e| AtlasError::io("<stdout>", e)),
    }
}

/// Temperatures `tmin, tmin + tstep, …` up to and including `tmax`.
pub fn temperature_grid(tmin: f64, tmax: f64, tstep: f64) -> Result<Vec<f64>, AtlasError> {
    if !(tmin >= 0.0 && tmax >= tmin && tstep > 0.0) || !tmax.is_finite() {
        return Err(AtlasError::Usage(format!("invalid temperature grid {tmin}..{tmax} step {tstep}")));
    }
    let n = ((tmax - tmin) / tstep + 1e-9).floor() as usize;
    let mut ts: Vec<f64> = (0..=n).map(|k| tmin + k as f64 * tstep).collect();
    if tmax - ts[n] > 1e-9 * tstep.max(1.0) {
        ts.push(tmax);
    }
    Ok(ts)
}

/// Feature nearest `field` in a 300 K sweep of `field ± window`.
pub fn locate_feature(
    engine: &AtlasEngine,
    spec: &SpinSystemSpec,
    field: f64,
    window: f64,
    model: &ThermalZfsModel,
) -> Result<CrossingFeature, AtlasError> {
    let lo = (field - window).max(0.0);
    let hi = field + window;
    let points = ((hi - lo) / TSHIFT_STEP).round() as usize + 1;
    let r = FieldRange::new(lo, hi, points).map_err(|e| AtlasError::Usage(e.to_string()))?;
    let a = engine.analyze(spec, r, DEFAULT_TEMPERATURE, model)?;
    a.features
        .into_iter()
        .min_by(|x, y| (x.center - field).abs().total_cmp(&(y.center - field).abs()))
        .ok_or_else(|| Error::InvalidParameter(format!("no crossing feature within {window} G of {field} G at 300 K")).into())
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), AtlasError> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Catalog { format, output } => {
            let list = catalog::list_systems();
            let text = match format {
                CatalogFormat::Text => list.iter().map(|(id, d)| format!("{id}\t{d}\n")).collect(),
                CatalogFormat::Json => {
                    let docs: Vec<_> =
                        list.iter().map(|(id, d)| serde_json::json!({ "id": id, "description": d })).collect();
                    serde_json::to_string_pretty(&docs).expect("serialisable") + "\n"
                }
            };
            emit(out, output.as_deref(), &text)
        }
        Command::Sweep { system, range: ra, model, format, output } => {
            let src = source(&system, &cfg)?;
            let (r, t) = range(&ra, &cfg)?;
            let engine = default_engine(options(None, &cfg));
            let sr = engine.sweep(&src.spec, r, t, &thermal(&model, &cfg))?;
            let text = match format {
                Format::Csv => io::sweep_csv(&sr),
                Format::Json => io::sweep_json(&sr),
            };
            emit(out, output.as_deref(), &text)
        }
        Command::Features { system, range: ra, model, detect, slopes, format, output } => {
            let src = source(&system, &cfg)?;
            let (r, t) = range(&ra, &cfg)?;
            let m = thermal(&model, &cfg);
            let engine = default_engine(options(Some(&detect), &cfg));
            let a = engine.analyze(&src.spec, r, t, &m)?;
            let rates: Vec<Option<f64>> = if slopes {
                a.features
                    .iter()
                    .map(|f| engine.temperature_shift(&src.spec, f, &[], &m).map(|s| s.slope_300k).unwrap_or(None))
                    .collect()
            } else {
                Vec::new()
            };
            let text = match format {
                Format::Json => {
                    let h = io::ReportHeader {
                        system: &src.label,
                        temperature: t,
                        zfs: a.sweep.zfs,
                        range: (r.b_min, r.b_max),
                    };
                    io::features_json(&h, &a.features, &rates)
                }
                Format::Csv => io::features_csv(&a.features, &rates),
            };
            emit(out, output.as_deref(), &text)
        }
        Command::Tshift { system, model, detect, feature, tmin, tmax, tstep, output } => {
            let src = source(&system, &cfg)?;
            let m = thermal(&model, &cfg);
            let ts = &cfg.tshift;
            let temps = temperature_grid(
                tmin.or(ts.tmin).unwrap_or(4.0),
                tmax.or(ts.tmax).unwrap_or(DEFAULT_TEMPERATURE),
                tstep.or(ts.tstep).unwrap_or(8.0),
            )?;
            let engine = default_engine(options(Some(&detect), &cfg));
            let f = locate_feature(&engine, &src.spec, feature, DEFAULT_TSHIFT_WINDOW, &m)?;
            let shift = engine.temperature_shift(&src.spec, &f, &temps, &m)?;
            emit(out, output.as_deref(), &io::tshift_csv(&shift))
        }
        Command::FitTrace { trace, seeds, central, prominence, tolerance, max_iterations, output } => {
            let tr = io::load_trace(&trace)?;
            let fc = &cfg.fit;
            let base = FitOptions::default();
            let opts = FitOptions {
                tolerance: tolerance.or(fc.tolerance).unwrap_or(base.tolerance),
                max_iterations: max_iterations.or(fc.max_iterations).unwrap_or(base.max_iterations),
                ..base
            };
            let seeds = match seeds.or_else(|| fc.seeds.clone()) {
                Some(s) => s,
                None => auto_seeds(&tr, prominence.or(fc.prominence).unwrap_or(DEFAULT_PROMINENCE)),
            };
            let fit = fit_dips(&tr, &seeds, &opts)?;
            let central = central.or(fc.central);
            let seps = central.map(|c| side_peak_separations(&fit, c)).unwrap_or_default();
            emit(out, output.as_deref(), &io::fit_json(&fit, central, &seps))
        }
    }
}
