//! Command-line front end. Exit codes: 0 success, 1 runtime error, 2 usage.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::load_scene;
use crate::dataset::read_dataset;
use crate::diffraction::QuadratureSpec;
use crate::error::{Error, Result};
use crate::geometry::{default_scene, Scene};
use crate::imaging::attenuation_map;
use crate::mom2d::{assemble_and_solve, discretize_contour, relative_rms, Shape, Vec2};
use crate::pipeline;
use crate::stats::{ArraySelector, NamedArray, DEFAULT_BIN_WIDTH_DB};

#[derive(Debug, Parser)]
#[command(
    name = "blockage",
    version,
    about = "Body-blockage field simulation and analysis"
)]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate free space and body ensembles into a dataset file.
    Simulate(SimulateArgs),
    /// Mean and standard-deviation attenuation maps for one position.
    Image(ImageArgs),
    /// Attenuation PMF along a line array parallel to the line of sight.
    Stats(StatsArgs),
    /// Single-state attenuation map.
    Export(ExportArgs),
    /// Check the 2D MoM solver against the circular-cylinder series.
    ValidateMom(ValidateMomArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario file (`key = value`); defaults to the standard scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "p1,p2,p3")]
    positions: String,
    /// Keep only the first N surfaces.
    #[arg(long)]
    surfaces: Option<usize>,
    /// Keep only the central N rows.
    #[arg(long)]
    rows: Option<usize>,
    /// Keep only the central N columns.
    #[arg(long)]
    cols: Option<usize>,
    /// Relative convergence tolerance of the diffraction quadrature.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_refinements: Option<u32>,
    /// Initial quadrature step in wavelengths.
    #[arg(long)]
    step_lambda: Option<f64>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct ImageArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    pos: String,
    #[arg(long, default_value_t = 0)]
    surface: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Named line array A, B or C.
    #[arg(long, conflicts_with_all = ["row", "col"], required_unless_present_all = ["row", "col"])]
    array: Option<String>,
    #[arg(long, requires = "col")]
    row: Option<usize>,
    #[arg(long, requires = "row")]
    col: Option<usize>,
    #[arg(long)]
    pos: String,
    #[arg(long, default_value_t = DEFAULT_BIN_WIDTH_DB)]
    bin_width: f64,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    state: usize,
    #[arg(long, default_value_t = 0)]
    surface: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateMomArgs {
    #[arg(long, default_value_t = 1.0)]
    radius_lambda: f64,
    #[arg(long, default_value_t = 20)]
    segments_per_lambda: usize,
    /// Source distance from the axis, in wavelengths.
    #[arg(long, default_value_t = 5.0)]
    source_lambda: f64,
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::invalid("threads", "must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid("threads", e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(cli.command))),
        None => dispatch(cli.command),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Image(a) => image(a),
        Command::Stats(a) => stats(a),
        Command::Export(a) => export(a),
        Command::ValidateMom(a) => validate_mom(a),
    }
}

fn restricted_scene(a: &SimulateArgs) -> Result<Scene> {
    let scene = match &a.config {
        Some(p) => load_scene(p)?,
        None => default_scene(),
    };
    let m = scene.manifold;
    if a.surfaces.is_none() && a.rows.is_none() && a.cols.is_none() {
        return Ok(scene);
    }
    scene.with_window(
        a.surfaces.unwrap_or(m.n_surfaces),
        a.rows.unwrap_or(m.n_rows),
        a.cols.unwrap_or(m.n_cols),
    )
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let scene = restricted_scene(&a)?;
    let lambda = scene.wavelength();
    let mut quad = QuadratureSpec::for_wavelength(lambda);
    if let Some(t) = a.tolerance {
        quad.tolerance = t;
    }
    if let Some(r) = a.max_refinements {
        quad.max_refinements = r;
    }
    if let Some(s) = a.step_lambda {
        quad.initial_step = s * lambda;
    }
    quad.validate(lambda)?;
    let positions = pipeline::parse_positions(&a.positions)?;
    let header = pipeline::ensemble_header(&scene, &positions)?;
    let started = Instant::now();
    let quiet = a.quiet;
    let out = BufWriter::new(File::create(&a.out)?);
    let out = pipeline::simulate(&scene, &header, &quad, out, |done, total| {
        if !quiet {
            eprintln!(
                "state {done}/{total} done ({:.1} s)",
                started.elapsed().as_secs_f64()
            );
        }
    })?;
    out.into_inner()
        .map_err(|e| Error::Io(e.into_error()))?
        .sync_all()?;
    if !quiet {
        eprintln!(
            "wrote {} ({} states, {} bytes)",
            a.out.display(),
            header.states.len(),
            header.file_bytes()
        );
    }
    Ok(())
}

fn position_index(name: &str) -> Result<u32> {
    Ok(crate::ensemble::nominal_by_name(name)?.0 as u32 + 1)
}

fn image(a: ImageArgs) -> Result<()> {
    let ds = read_dataset(&a.input)?;
    let q = position_index(&a.pos)?;
    let (mean, std) = pipeline::ensemble_maps(&ds, q, a.surface)?;
    let tag = a.pos.trim().to_ascii_lowercase();
    let mut written = mean.export(&a.out_dir, &format!("mean_{tag}_s{}", a.surface))?;
    written.extend(std.export(&a.out_dir, &format!("std_{tag}_s{}", a.surface))?);
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn stats(a: StatsArgs) -> Result<()> {
    let ds = read_dataset(&a.input)?;
    let q = position_index(&a.pos)?;
    let selector = match (&a.array, a.row, a.col) {
        (Some(name), _, _) => ArraySelector::Named(name.parse::<NamedArray>()?),
        (None, Some(row), Some(col)) => ArraySelector::Cell { row, col },
        _ => {
            return Err(Error::invalid(
                "array",
                "give --array or both --row and --col",
            ))
        }
    };
    let (sel, hist, summary) = pipeline::line_array_stats(&ds, q, selector, a.bin_width)?;
    let csv = hist.to_csv();
    match &a.out {
        Some(p) => write_file(p, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    println!(
        "# array row={} col={} y={:.6} z={:.6} {}",
        sel.fixed_row, sel.fixed_col, sel.y, sel.z, summary
    );
    Ok(())
}

fn export(a: ExportArgs) -> Result<()> {
    let ds = read_dataset(&a.input)?;
    let map = attenuation_map(&ds.grid(a.state)?, &ds.grid(0)?, a.surface)?;
    for p in map.export(&a.out_dir, &format!("state{}_s{}", a.state, a.surface))? {
        println!("{}", p.display());
    }
    Ok(())
}

fn validate_mom(a: ValidateMomArgs) -> Result<()> {
    use crate::cylinder_series::{PecCylinderSeries, DEFAULT_TERMS};
    if !(a.radius_lambda > 0.0 && a.source_lambda > a.radius_lambda) {
        return Err(Error::invalid(
            "radius-lambda",
            "need 0 < radius < source distance",
        ));
    }
    let k = 2.0 * std::f64::consts::PI;
    let contour = discretize_contour(
        Shape::Circle {
            radius: a.radius_lambda,
        },
        a.segments_per_lambda,
        k,
    )?;
    let src = Vec2::new(-a.source_lambda, 0.0);
    let sol = assemble_and_solve(&contour, src, k)?;
    let series = PecCylinderSeries::new(a.radius_lambda, k, src, DEFAULT_TERMS);
    let phis: Vec<f64> = (0..360).map(|i| (i as f64).to_radians()).collect();
    let mom: Vec<_> = phis.iter().map(|&p| sol.far_pattern(p)).collect();
    let exact: Vec<_> = phis.iter().map(|&p| series.far_pattern(p)).collect();
    let rms = relative_rms(&mom, &exact);
    println!("radius_lambda={}", a.radius_lambda);
    println!("segments={}", contour.len());
    println!("residual={:.3e}", sol.residual);
    println!("far_field_rms_error={:.6e}", rms);
    println!("pass={}", rms < 0.01);
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut f = File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}
