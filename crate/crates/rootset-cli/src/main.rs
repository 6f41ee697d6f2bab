//! Command-line frontend: every pipeline with deterministic, file-based
//! outputs. Exit codes: 0 success, 2 invalid arguments or unusable job,
//! 3 resource-cap refusal, 4 certified failure (the failure document is
//! still written).

use clap::{Args, Parser, Subcommand, ValueEnum};
use rootset_core::Complex64;
use rootset_core::coverage::{coverage_report, hole_search, AnnulusGrid};
use rootset_core::enumeration::{
    all_roots, ResourceGuard, RootCloud, SymmetryMode, DEFAULT_ENUMERATION_CAP,
};
use rootset_core::expansion::{expand, validate_certificate, ExpansionError};
use rootset_core::io::{
    certificate_document, cloud_rows, coverage_document, exclusion_document,
    expansion_failure_document, format_significant, parse_root_cloud_csv, render_counts,
    write_csv_rows, write_pgm,
};
use rootset_core::DigitSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

const THREADS_ENV: &str = "ROOTSET_THREADS";

#[derive(Parser)]
#[command(name = "rootset", version, about = "Root sets of unit-modulus-coefficient polynomials and power series")]
struct Cli {
    /// Worker threads (overrides ROOTSET_THREADS; default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetryArg {
    None,
    #[value(name = "phase-orbit")]
    PhaseOrbit,
}

impl From<SymmetryArg> for SymmetryMode {
    fn from(arg: SymmetryArg) -> SymmetryMode {
        match arg {
            SymmetryArg::None => SymmetryMode::None,
            SymmetryArg::PhaseOrbit => SymmetryMode::PhaseOrbit,
        }
    }
}

#[derive(Args)]
struct GuardArgs {
    /// Refuse jobs needing more polynomial solves than this
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u128,

    /// Run the job even if it exceeds the cap
    #[arg(long)]
    override_cap: bool,
}

impl GuardArgs {
    fn guard(&self) -> ResourceGuard {
        ResourceGuard {
            cap: self.cap,
            allow_over_cap: self.override_cap,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Density threshold for a radius, or gap statistics for a digit set
    Threshold {
        /// Radius in (1/2, 1): print the gap bound 2·arccos((5-4r²)/4)
        #[arg(long)]
        r: Option<f64>,
        /// Digit set spec: print its max gap and guaranteed coverage radius
        #[arg(long)]
        set: Option<String>,
    },
    /// Greedy digit expansion of a target at base z, written as a certificate document
    Expand {
        #[arg(long)]
        set: String,
        /// Base point as RE,IM with 1/2 < |z| < 1
        #[arg(long, value_parser = parse_complex)]
        z: Complex64,
        /// Target as RE,IM inside the closed radius-2 disk (default 0)
        #[arg(long, value_parser = parse_complex, default_value = "0,0")]
        target: Complex64,
        /// Number of recurrence steps N (the certificate carries N+1 digits)
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve every polynomial up to a degree and write the root cloud CSV
    Enumerate {
        #[arg(long)]
        set: String,
        #[arg(long)]
        max_degree: usize,
        #[arg(long, value_enum, default_value = "none")]
        symmetry: SymmetryArg,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        guard: GuardArgs,
    },
    /// Coverage of an annulus grid by the enumerated root cloud
    Coverage {
        #[arg(long)]
        set: String,
        #[arg(long)]
        max_degree: usize,
        /// Inner modulus of the annulus
        #[arg(long)]
        rin: f64,
        /// Outer modulus of the annulus
        #[arg(long)]
        rout: f64,
        /// Cell side length
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: PathBuf,
        /// Optional PGM cell map (255 hit, 64 miss, 0 outside the grid)
        #[arg(long)]
        raster: Option<PathBuf>,
        #[command(flatten)]
        guard: GuardArgs,
    },
    /// Search a circle for a certified root-free ball
    Exclude {
        #[arg(long)]
        set: String,
        /// Circle modulus in (0, 1)
        #[arg(long)]
        modulus: f64,
        /// Equally spaced arguments to sweep (at least 8)
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rasterize a root-cloud CSV to a log-scaled PGM density plot
    Render {
        #[arg(long, name = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
    },
}

fn parse_complex(text: &str) -> Result<Complex64, String> {
    let (re, im) = text
        .split_once(',')
        .ok_or_else(|| format!("expected RE,IM, got `{text}`"))?;
    let re: f64 = re.trim().parse().map_err(|_| format!("bad real part `{re}`"))?;
    let im: f64 = im.trim().parse().map_err(|_| format!("bad imaginary part `{im}`"))?;
    Ok(Complex64::new(re, im))
}

enum Failure {
    /// Invalid arguments or unusable job: exit 2.
    Usage(String),
    /// Resource-cap refusal: exit 3.
    Cap(String),
    /// Certified negative outcome; details were written: exit 4.
    Certified(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Cap(_) => 3,
            Failure::Certified(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Cap(m) | Failure::Certified(m) => m,
        }
    }
}

fn usage(err: impl std::fmt::Display) -> Failure {
    Failure::Usage(err.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
    });
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build();
    let pool = match pool {
        Ok(pool) => pool,
        Err(err) => {
            eprintln!("rootset: {err}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("rootset: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn parse_set(spec: &str) -> Result<Arc<DigitSet>, Failure> {
    DigitSet::parse(spec).map(Arc::new).map_err(usage)
}

fn create_out(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|err| usage(format!("cannot write {}: {err}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|err| usage(format!("cannot write {}: {err}", path.display())))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Threshold { r, set } => threshold(r, set),
        Command::Expand {
            set,
            z,
            target,
            steps,
            out,
        } => expand_command(&set, z, target, steps, &out),
        Command::Enumerate {
            set,
            max_degree,
            symmetry,
            out,
            guard,
        } => enumerate_command(&set, max_degree, symmetry.into(), &out, &guard.guard()),
        Command::Coverage {
            set,
            max_degree,
            rin,
            rout,
            eps,
            out,
            raster,
            guard,
        } => coverage_command(
            &set,
            max_degree,
            rin,
            rout,
            eps,
            &out,
            raster.as_deref(),
            &guard.guard(),
        ),
        Command::Exclude {
            set,
            modulus,
            samples,
            out,
        } => exclude_command(&set, modulus, samples, &out),
        Command::Render {
            input,
            out,
            width,
            height,
        } => render_command(&input, &out, width, height),
    }
}

fn threshold(r: Option<f64>, set: Option<String>) -> Result<(), Failure> {
    match (r, set) {
        (Some(radius), None) => {
            let value = rootset_core::density_threshold(radius).map_err(usage)?;
            println!("{}", format_significant(value));
            Ok(())
        }
        (None, Some(spec)) => {
            let set = parse_set(&spec)?;
            println!("max_gap = {}", format_significant(set.max_gap()));
            match set.min_covered_radius() {
                Some(radius) => {
                    println!("min_covered_radius = {}", format_significant(radius))
                }
                None => println!("min_covered_radius = none"),
            }
            Ok(())
        }
        _ => Err(Failure::Usage(
            "pass exactly one of --r or --set".to_string(),
        )),
    }
}

fn expand_command(
    spec: &str,
    z: Complex64,
    target: Complex64,
    steps: usize,
    out: &Path,
) -> Result<(), Failure> {
    let set = parse_set(spec)?;
    match expand(z, target, &set, steps) {
        Ok(cert) => {
            let report = validate_certificate(&cert).map_err(usage)?;
            write_text(out, &certificate_document(&cert, &report))?;
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Certified(format!(
                    "certificate failed validation: residual {} exceeds bound {}",
                    format_significant(report.achieved_residual),
                    format_significant(report.tail_bound + report.numerical_slack),
                )))
            }
        }
        Err(ExpansionError::StepFailed {
            index,
            min_distance,
            bound,
        }) => {
            write_text(
                out,
                &expansion_failure_document(z, target, index, min_distance, bound),
            )?;
            Err(Failure::Certified(format!(
                "no digit within reach at step {index}; details in {}",
                out.display()
            )))
        }
        Err(err) => Err(usage(err)),
    }
}

fn build_cloud(
    spec: &str,
    max_degree: usize,
    symmetry: SymmetryMode,
    guard: &ResourceGuard,
) -> Result<RootCloud, Failure> {
    let set = parse_set(spec)?;
    all_roots(&set, max_degree, symmetry, guard).map_err(|err| match err {
        rootset_core::enumeration::EnumerationError::OverCap { .. } => {
            Failure::Cap(err.to_string())
        }
        other => usage(other),
    })
}

fn enumerate_command(
    spec: &str,
    max_degree: usize,
    symmetry: SymmetryMode,
    out: &Path,
    guard: &ResourceGuard,
) -> Result<(), Failure> {
    let cloud = build_cloud(spec, max_degree, symmetry, guard)?;
    let mut writer = create_out(out)?;
    write_csv_rows(&mut writer, &cloud_rows(&cloud))
        .and_then(|()| writer.flush())
        .map_err(usage)?;
    if cloud.non_converged > 0 {
        eprintln!(
            "rootset: warning: {} polynomial(s) did not meet the residual bound",
            cloud.non_converged
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn coverage_command(
    spec: &str,
    max_degree: usize,
    rin: f64,
    rout: f64,
    eps: f64,
    out: &Path,
    raster: Option<&Path>,
    guard: &ResourceGuard,
) -> Result<(), Failure> {
    let grid = AnnulusGrid::new(rin, rout, eps).map_err(usage)?;
    let cloud = build_cloud(spec, max_degree, SymmetryMode::None, guard)?;
    let report = coverage_report(&cloud, &grid);
    write_text(out, &coverage_document(&report))?;
    if let Some(path) = raster {
        let (pixels, width, height) = coverage_cell_map(&grid, &report);
        let mut writer = create_out(path)?;
        write_pgm(&mut writer, width, height, &pixels)
            .and_then(|()| writer.flush())
            .map_err(usage)?;
    }
    Ok(())
}

/// One pixel per lattice cell over the grid's bounding box: 255 for hit
/// cells, 64 for in-grid misses, 0 outside the annulus. Top row carries the
/// largest imaginary parts.
fn coverage_cell_map(
    grid: &AnnulusGrid,
    report: &rootset_core::CoverageReport,
) -> (Vec<u8>, usize, usize) {
    let cells = grid.cells();
    let min_x = cells.iter().map(|c| c.0).min().unwrap();
    let max_x = cells.iter().map(|c| c.0).max().unwrap();
    let min_y = cells.iter().map(|c| c.1).min().unwrap();
    let max_y = cells.iter().map(|c| c.1).max().unwrap();
    let width = (max_x - min_x + 1) as usize;
    let height = (max_y - min_y + 1) as usize;
    let mut pixels = vec![0u8; width * height];
    for (slot, &(ix, iy)) in cells.iter().enumerate() {
        let col = (ix - min_x) as usize;
        let row = (max_y - iy) as usize;
        pixels[row * width + col] = if report.hit_flags[slot] { 255 } else { 64 };
    }
    (pixels, width, height)
}

fn exclude_command(spec: &str, modulus: f64, samples: usize, out: &Path) -> Result<(), Failure> {
    let set = parse_set(spec)?;
    let outcome = hole_search(&set, modulus, samples).map_err(usage)?;
    write_text(out, &exclusion_document(&outcome))?;
    if outcome.certificate.is_some() {
        Ok(())
    } else {
        Err(Failure::Certified(format!(
            "no positive margin on the circle of modulus {modulus}; details in {}",
            out.display()
        )))
    }
}

fn render_command(input: &Path, out: &Path, width: usize, height: usize) -> Result<(), Failure> {
    if width == 0 || height == 0 {
        return Err(Failure::Usage("width and height must be positive".into()));
    }
    let file = File::open(input)
        .map_err(|err| usage(format!("cannot read {}: {err}", input.display())))?;
    let rows = parse_root_cloud_csv(BufReader::new(file)).map_err(usage)?;
    let pixels = render_counts(&rows, width, height);
    let mut writer = create_out(out)?;
    write_pgm(&mut writer, width, height, &pixels)
        .and_then(|()| writer.flush())
        .map_err(usage)?;
    Ok(())
}
