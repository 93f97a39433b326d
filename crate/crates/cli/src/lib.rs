//! The `fock` command line: one subcommand per experiment, a JSON report per
//! run and CSV side files for tables and grids.
//!
//! Exit codes: 0 on success, 2 when the configuration or the inputs violate
//! a precondition, 3 when a numerical diagnostic fails mid-computation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fock_core::canonical::{growth_check, CanonicalProduct, SigmaFunction, DEFAULT_TRUNCATION};
use fock_core::interpolation::{
    build_interpolant, norm_growth_report, pointwise_bound, random_bounded_data, residual_check, InterpolationProblem,
    LagrangeReconstructor,
};
use fock_core::io::{self, ProblemJson};
use fock_core::pointsets::{closeness, density_estimate, lattice_points, perturb, separation, PointSet, SquareLattice};
use fock_core::sampling::frame_bounds;
use fock_core::{Complex, FockError, FockFunction, FockParameter, LogComplex};
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "fock",
    version,
    about = "Sampling and interpolation experiments in the Bargmann-Fock space"
)]
pub struct Cli {
    /// Gaussian weight exponent.
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Seed for perturbations and random data.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created on success.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Format of the main side file.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// A square lattice, optionally perturbed.
#[derive(Debug, Clone, Args)]
pub struct LatticeArgs {
    /// Lattice spacing.
    #[arg(long, conflicts_with = "density_ratio", allow_negative_numbers = true)]
    pub spacing: Option<f64>,
    /// Density as a multiple of the critical density alpha/pi (default 1).
    #[arg(long, allow_negative_numbers = true)]
    pub density_ratio: Option<f64>,
    /// Largest random displacement of the lattice points.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub perturb: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a (perturbed) square lattice inside a disk.
    Lattice {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, allow_negative_numbers = true)]
        window: f64,
    },
    /// Estimate lower and upper uniform densities.
    Density {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, allow_negative_numbers = true)]
        window: f64,
        /// Square sides as "start:stop:step" or a comma list.
        #[arg(long)]
        radii: String,
        #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
        translate_step: f64,
    },
    /// Frame bounds on span{e_0..e_N} for a ladder of degrees.
    Frame {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, allow_negative_numbers = true)]
        window: f64,
        #[arg(long, default_value = "8,16,24")]
        degree_ladder: String,
    },
    /// Reconstruct a known function from its samples.
    Reconstruct {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, allow_negative_numbers = true)]
        window: f64,
        #[arg(long, allow_negative_numbers = true)]
        truncation_radius: f64,
        /// Target `basis:N` (the basis function e_N).
        #[arg(long, default_value = "basis:0", conflicts_with = "function")]
        target: String,
        /// Target read from a function JSON file.
        #[arg(long)]
        function: Option<PathBuf>,
        /// "xmin,xmax,ymin,ymax,step"
        #[arg(long, default_value = "-2,2,-2,2,0.25", allow_hyphen_values = true)]
        grid: String,
    },
    /// Solve a weighted interpolation problem with the explicit series.
    Interpolate {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Window of the generated problem (ignored with --problem).
        #[arg(long, allow_negative_numbers = true)]
        window: Option<f64>,
        /// Problem JSON; without it random data in the unit disk is drawn.
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long, allow_negative_numbers = true)]
        truncation_radius: f64,
        #[arg(long, default_value = "-2,2,-2,2,0.25", allow_hyphen_values = true)]
        grid: String,
        /// Degree of the projection used for the norm estimate.
        #[arg(long, default_value_t = 32)]
        degree: usize,
    },
    /// Evaluate sigma (or the canonical product of a perturbed lattice) on a grid.
    SigmaGrid {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, default_value = "-2,2,-2,2,0.1", allow_hyphen_values = true)]
        grid: String,
        /// Window of the perturbed set (default: twice the grid extent).
        #[arg(long, allow_negative_numbers = true)]
        window: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        truncation: usize,
    },
    /// Fit the growth bounds of a canonical product.
    GrowthCheck {
        #[command(flatten)]
        lattice: LatticeArgs,
        #[arg(long, allow_negative_numbers = true)]
        window: f64,
        #[arg(long, allow_negative_numbers = true)]
        grid_radius: f64,
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        grid_step: f64,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
        truncation: usize,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: String,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            kind: "InvalidParameter".into(),
            message: message.into(),
        }
    }

    /// The single-line JSON written to stderr.
    pub fn to_json_line(&self) -> String {
        json!({"error": self.kind, "message": self.message, "exit_code": self.code}).to_string()
    }
}

impl From<FockError> for Failure {
    fn from(e: FockError) -> Self {
        Failure {
            code: if e.is_validation() {
                EXIT_VALIDATION
            } else {
                EXIT_NUMERICAL
            },
            kind: e.kind().into(),
            message: e.to_string(),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

/// Files produced by a run, written only once the run has succeeded.
#[derive(Debug, Default)]
pub struct Output {
    pub report: Value,
    pub files: Vec<(String, Vec<u8>)>,
    /// Exit code of a run that completed but failed its check.
    pub code: i32,
}

fn positive(name: &str, v: f64) -> Outcome<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Failure::validation(format!("{name} must be positive, got {v}")))
    }
}

/// "start:stop:step" (inclusive) or a comma list of positive radii.
pub fn parse_radii(text: &str) -> Outcome<Vec<f64>> {
    let bad = || Failure::validation(format!("cannot parse radii {text:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let radii = if text.contains(':') {
        let parts: Vec<f64> = text.split(':').map(num).collect::<Outcome<_>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad());
        };
        positive("radius step", step)?;
        let count = ((stop - start) / step + 1e-9).floor();
        if !(0.0..1e6).contains(&count) {
            return Err(bad());
        }
        (0..=count as usize).map(|k| start + k as f64 * step).collect()
    } else {
        text.split(',').map(num).collect::<Outcome<Vec<f64>>>()?
    };
    for &r in &radii {
        positive("radius", r)?;
    }
    if radii.is_empty() {
        return Err(bad());
    }
    Ok(radii)
}

pub fn parse_ladder(text: &str) -> Outcome<Vec<usize>> {
    let ladder: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::validation(format!("cannot parse degree ladder {text:?}")))?;
    if ladder.is_empty() {
        return Err(Failure::validation("empty degree ladder"));
    }
    Ok(ladder)
}

/// A rectangular grid `xmin + i*step`, `ymin + j*step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub step: f64,
}

impl Grid {
    pub fn parse(text: &str) -> Outcome<Grid> {
        let bad = || Failure::validation(format!("grid must be \"xmin,xmax,ymin,ymax,step\", got {text:?}"));
        let v: Vec<f64> = text
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Outcome<_>>()?;
        let [xmin, xmax, ymin, ymax, step] = v[..] else {
            return Err(bad());
        };
        positive("grid step", step)?;
        if !(xmin.is_finite() && ymin.is_finite() && xmax >= xmin && ymax >= ymin) {
            return Err(bad());
        }
        let g = Grid {
            xmin,
            xmax,
            ymin,
            ymax,
            step,
        };
        if g.points().len() > 4_000_000 {
            return Err(Failure::validation("grid has more than 4e6 points"));
        }
        Ok(g)
    }

    pub fn points(&self) -> Vec<Complex> {
        let nx = ((self.xmax - self.xmin) / self.step + 1e-9).floor() as usize;
        let ny = ((self.ymax - self.ymin) / self.step + 1e-9).floor() as usize;
        (0..=ny)
            .flat_map(|j| {
                (0..=nx).map(move |i| Complex::new(self.xmin + i as f64 * self.step, self.ymin + j as f64 * self.step))
            })
            .collect()
    }

    /// Largest modulus on the grid.
    pub fn reach(&self) -> f64 {
        let x = self.xmin.abs().max(self.xmax.abs());
        let y = self.ymin.abs().max(self.ymax.abs());
        x.hypot(y)
    }
}

/// Lattice flags resolved against alpha.
struct ResolvedLattice {
    lattice: SquareLattice,
    perturb: f64,
    config: Value,
}

fn resolve_lattice(args: &LatticeArgs, alpha: FockParameter) -> Outcome<ResolvedLattice> {
    let lattice = match (args.spacing, args.density_ratio) {
        (Some(s), _) => SquareLattice::new(positive("spacing", s)?)?,
        (None, r) => SquareLattice::with_density_ratio(alpha, positive("density_ratio", r.unwrap_or(1.0))?)?,
    };
    if !(args.perturb.is_finite() && args.perturb >= 0.0 && args.perturb < 0.5 * lattice.spacing()) {
        return Err(Failure::validation(format!(
            "perturb must lie in [0, spacing/2), got {}",
            args.perturb
        )));
    }
    let ratio = lattice.beta() / alpha.value();
    Ok(ResolvedLattice {
        lattice,
        perturb: args.perturb,
        config: json!({
            "spacing": lattice.spacing(),
            "density_ratio": ratio,
            "perturb": args.perturb,
        }),
    })
}

fn build_set(r: &ResolvedLattice, window: f64, seed: u64) -> Outcome<PointSet> {
    let base = lattice_points(&r.lattice, window)?;
    if r.perturb > 0.0 {
        Ok(perturb(&base, r.perturb, seed)?)
    } else {
        Ok(base)
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> fock_core::Result<()>) -> Outcome<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn json_bytes<T: Serialize + ?Sized>(v: &T) -> Outcome<Vec<u8>> {
    Ok(io::to_json_string(v)?.into_bytes())
}

/// Name of the command as typed.
pub fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Lattice { .. } => "lattice",
        Command::Density { .. } => "density",
        Command::Frame { .. } => "frame",
        Command::Reconstruct { .. } => "reconstruct",
        Command::Interpolate { .. } => "interpolate",
        Command::SigmaGrid { .. } => "sigma-grid",
        Command::GrowthCheck { .. } => "growth-check",
    }
}

/// Validate, compute and assemble the outputs of one run. Nothing is written.
pub fn execute(cli: &Cli) -> Outcome<Output> {
    let alpha = FockParameter::new(cli.alpha)?;
    let name = command_name(&cli.command);
    let start = Instant::now();
    let (config, results, files, code) = match &cli.command {
        Command::Lattice { lattice, window } => {
            let r = resolve_lattice(lattice, alpha)?;
            let window = positive("window", *window)?;
            let gamma = build_set(&r, window, cli.seed)?;
            let sep = if gamma.len() >= 2 {
                Some(separation(&gamma)?)
            } else {
                None
            };
            let q = closeness(&gamma, &r.lattice)?.q;
            let file = match cli.format {
                Format::Csv => ("points.csv".to_string(), csv_bytes(|b| io::pointset_to_csv(&gamma, b))?),
                Format::Json => ("points.json".to_string(), json_bytes(&io::PointSetJson::from(&gamma))?),
            };
            let config = json!({"lattice": r.config, "window": window});
            let results = json!({"points": gamma.len(), "separation": sep, "closeness": q});
            (config, results, vec![file], EXIT_OK)
        }
        Command::Density {
            lattice,
            window,
            radii,
            translate_step,
        } => {
            let r = resolve_lattice(lattice, alpha)?;
            let window = positive("window", *window)?;
            let radii = parse_radii(radii)?;
            let step = positive("translate_step", *translate_step)?;
            let gamma = build_set(&r, window, cli.seed)?;
            let report = density_estimate(&gamma, &radii, step)?;
            let table = csv_bytes(|b| {
                let mut w = csv::Writer::from_writer(b);
                w.write_record(["r", "n_minus", "n_plus", "reliable"])?;
                for i in 0..report.radii.len() {
                    w.write_record([
                        io::f17(report.radii[i]),
                        report.n_minus[i].to_string(),
                        report.n_plus[i].to_string(),
                        report.reliable[i].to_string(),
                    ])?;
                }
                w.flush()?;
                Ok(())
            })?;
            let config = json!({"lattice": r.config, "window": window, "radii": radii, "translate_step": step});
            let target = r.lattice.density();
            let results = json!({"report": to_value(&report), "lattice_density": target});
            (config, results, vec![("density.csv".to_string(), table)], EXIT_OK)
        }
        Command::Frame {
            lattice,
            window,
            degree_ladder,
        } => {
            let r = resolve_lattice(lattice, alpha)?;
            let window = positive("window", *window)?;
            let ladder = parse_ladder(degree_ladder)?;
            let gamma = build_set(&r, window, cli.seed)?;
            let estimates = ladder
                .iter()
                .map(|&n| frame_bounds(&gamma, alpha, n, window))
                .collect::<fock_core::Result<Vec<_>>>()?;
            let file = match cli.format {
                Format::Csv => {
                    let bytes = csv_bytes(|b| {
                        let mut w = csv::Writer::from_writer(b);
                        w.write_record(["N", "A_N", "B_N"])?;
                        for e in &estimates {
                            w.write_record([e.degree.to_string(), io::f17(e.a), io::f17(e.b)])?;
                        }
                        w.flush()?;
                        Ok(())
                    })?;
                    ("frame.csv".to_string(), bytes)
                }
                Format::Json => ("frame_estimates.json".to_string(), json_bytes(&estimates)?),
            };
            let config = json!({"lattice": r.config, "window": window, "degree_ladder": ladder});
            let a: Vec<f64> = estimates.iter().map(|e| e.a).collect();
            let results = json!({"A": a, "estimates": to_value(&estimates)});
            (config, results, vec![file], EXIT_OK)
        }
        Command::Reconstruct {
            lattice,
            window,
            truncation_radius,
            target,
            function,
            grid,
        } => {
            let r = resolve_lattice(lattice, alpha)?;
            let window = positive("window", *window)?;
            let radius = positive("truncation_radius", *truncation_radius)?;
            let grid = Grid::parse(grid)?;
            let (f, target_label) = match function {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
                    let f = io::function_from_json(&text)?;
                    if f.alpha() != alpha {
                        return Err(FockError::AlphaMismatch(f.alpha().value(), alpha.value()).into());
                    }
                    (f, path.display().to_string())
                }
                None => {
                    let n = target
                        .strip_prefix("basis:")
                        .and_then(|n| n.parse::<usize>().ok())
                        .ok_or_else(|| Failure::validation(format!("target must be basis:N, got {target:?}")))?;
                    (FockFunction::basis(alpha, n), target.clone())
                }
            };
            if grid.reach() >= 0.5 * radius {
                return Err(Failure::validation(
                    "the grid must lie strictly inside half the truncation radius",
                ));
            }
            let gamma = build_set(&r, window, cli.seed)?;
            let index = gamma.lattice_index().expect("lattice sets are indexed");
            let samples: BTreeMap<(i64, i64), Complex> = gamma
                .points()
                .iter()
                .zip(index)
                .map(|(&z, &p)| Ok((p, f.eval(z)?)))
                .collect::<fock_core::Result<_>>()?;
            let rec = LagrangeReconstructor::new(&gamma, &r.lattice, alpha, &samples, radius)?;
            let mut rows = Vec::new();
            let mut sup_error: f64 = 0.0;
            for z in grid.points() {
                let v = rec.eval(z)?;
                sup_error = sup_error.max((v - f.eval(z)?).norm());
                let weighted = v.norm() * (-0.5 * alpha.value() * z.norm_sqr()).exp();
                rows.push((z, v, weighted));
            }
            let config = json!({
                "lattice": r.config, "window": window, "truncation_radius": radius,
                "target": target_label, "grid": to_value(&grid),
            });
            let results = json!({"sup_error": sup_error, "grid_points": rows.len()});
            let file = csv_bytes(|b| io::value_grid_to_csv(&rows, b))?;
            (config, results, vec![("reconstruction.csv".to_string(), file)], EXIT_OK)
        }
        Command::Interpolate {
            lattice,
            window,
            problem,
            truncation_radius,
            grid,
            degree,
        } => {
            let radius = positive("truncation_radius", *truncation_radius)?;
            let grid = Grid::parse(grid)?;
            let (p, source) = match problem {
                Some(path) => {
                    let j: ProblemJson = io::read_json(path)?;
                    let p = InterpolationProblem::try_from(j)?;
                    (p, json!({"problem": path.display().to_string()}))
                }
                None => {
                    let r = resolve_lattice(lattice, alpha)?;
                    let window = positive("window", window.unwrap_or(radius))?;
                    let gamma = build_set(&r, window, cli.seed)?;
                    let data = random_bounded_data(gamma.len(), cli.seed);
                    let p = InterpolationProblem::new(gamma, r.lattice, alpha, data)?;
                    (
                        p,
                        json!({"lattice": r.config, "window": window, "data": "uniform in the unit disk"}),
                    )
                }
            };
            let ev = build_interpolant(&p, radius)?;
            let residual = residual_check(&ev)?;
            let identity = ev.node_identity_error()?;
            let bound = pointwise_bound(&ev, (0.05 * radius).max(grid.step))?;
            let growth = norm_growth_report(&ev, *degree)?;
            let pts = grid.points();
            let values = ev.eval_weighted_many(&pts)?;
            let rows: Vec<(Complex, Complex, f64)> = pts
                .iter()
                .zip(&values)
                .map(|(&z, &w)| {
                    let f = LogComplex::from_complex(w)
                        .mul_exp(Complex::new(0.5 * p.alpha().value() * z.norm_sqr(), 0.0))
                        .to_complex()?;
                    Ok((z, f, w.norm()))
                })
                .collect::<fock_core::Result<_>>()?;
            let mut config = json!({
                "alpha_problem": p.alpha().value(), "truncation_radius": radius,
                "grid": to_value(&grid), "degree": degree,
            });
            config["source"] = source;
            let results = json!({
                "residual": residual, "node_identity_error": identity, "terms": ev.len(),
                "pointwise_bound": to_value(&bound), "norm_growth": to_value(&growth),
            });
            let mut files = vec![(
                "interpolant.csv".to_string(),
                csv_bytes(|b| io::value_grid_to_csv(&rows, b))?,
            )];
            if cli.format == Format::Json {
                files.push(("problem.json".to_string(), json_bytes(&ProblemJson::from(&p))?));
            }
            (config, results, files, EXIT_OK)
        }
        Command::SigmaGrid {
            lattice,
            grid,
            window,
            truncation,
        } => {
            let r = resolve_lattice(lattice, alpha)?;
            let grid = Grid::parse(grid)?;
            let pts = grid.points();
            // the window only matters for a perturbed set
            let window = match (r.perturb > 0.0, window) {
                (false, _) => None,
                (true, w) => Some(positive(
                    "window",
                    w.unwrap_or(2.0 * grid.reach() + 4.0 * r.lattice.spacing()),
                )?),
            };
            let values: Vec<LogComplex> = if let Some(window) = window {
                let gamma = build_set(&r, window, cli.seed)?;
                let cp = CanonicalProduct::new(&gamma, &r.lattice, *truncation)?;
                pts.iter().map(|&z| cp.log(z)).collect::<fock_core::Result<_>>()?
            } else {
                let sigma = SigmaFunction::new(r.lattice, *truncation)?;
                pts.iter().map(|&z| sigma.log(z)).collect::<fock_core::Result<_>>()?
            };
            let rows: Vec<(Complex, LogComplex)> = pts.iter().copied().zip(values.iter().copied()).collect();
            let zeros = values.iter().filter(|v| v.is_zero()).count();
            let config =
                json!({"lattice": r.config, "grid": to_value(&grid), "truncation": truncation, "window": window});
            let results = json!({
                "function": if r.perturb > 0.0 { "canonical_product" } else { "sigma" },
                "grid_points": rows.len(), "zeros": zeros,
            });
            let file = csv_bytes(|b| io::log_grid_to_csv(&rows, b))?;
            (config, results, vec![("sigma_grid.csv".to_string(), file)], EXIT_OK)
        }
        Command::GrowthCheck {
            lattice,
            window,
            grid_radius,
            grid_step,
            truncation,
        } => {
            let r = resolve_lattice(lattice, alpha)?;
            let window = positive("window", *window)?;
            let radius = positive("grid_radius", *grid_radius)?;
            let step = positive("grid_step", *grid_step)?;
            let gamma = build_set(&r, window, cli.seed)?;
            let cp = CanonicalProduct::new(&gamma, &r.lattice, *truncation)?;
            let fit = growth_check(&cp, alpha, radius, step)?;
            let code = if fit.violations == 0 { EXIT_OK } else { EXIT_NUMERICAL };
            let config = json!({
                "lattice": r.config, "window": window, "grid_radius": radius,
                "grid_step": step, "truncation": truncation,
            });
            (config, json!({"fit": to_value(&fit)}), Vec::new(), code)
        }
    };
    let mut config = config;
    config["alpha"] = json!(alpha.value());
    config["seed"] = json!(cli.seed);
    config["format"] = to_value(&cli.format);
    let report = json!({
        "command": name,
        "version": fock_core::VERSION,
        "config": config,
        "results": results,
        "wall_time_s": start.elapsed().as_secs_f64(),
    });
    Ok(Output { report, files, code })
}

/// Write the report `<command>.json` and the side files into `dir`.
pub fn write_output(dir: &Path, command: &str, out: &Output) -> Outcome<()> {
    let io_failure = |e: std::io::Error| Failure {
        code: EXIT_NUMERICAL,
        kind: "Io".into(),
        message: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(io_failure)?;
    let report = io::to_json_string(&out.report)?;
    fs::write(dir.join(format!("{command}.json")), report).map_err(io_failure)?;
    for (name, bytes) in &out.files {
        fs::write(dir.join(name), bytes).map_err(io_failure)?;
    }
    Ok(())
}

/// Parse, run and write; returns the exit code. Errors go to stderr as one
/// JSON line.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let f = Failure {
                code: EXIT_VALIDATION,
                kind: "Usage".into(),
                message: e
                    .to_string()
                    .lines()
                    .next()
                    .unwrap_or_default()
                    .trim_start_matches("error: ")
                    .to_string(),
            };
            eprintln!("{}", f.to_json_line());
            return f.code;
        }
    };
    let result = execute(&cli).and_then(|out| {
        write_output(&cli.out, command_name(&cli.command), &out)?;
        Ok(out.code)
    });
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("{}", f.to_json_line());
            f.code
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::from(FockError::from(e))
    }
}
