use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use coupstab::assembly::{assemble_with, FarField, SchemeSpec};
use coupstab::config::SweepConfig;
use coupstab::output::{self, write_text};
use coupstab::spectral::{classify, pair_spectrum, update_matrix};
use coupstab::stepper::{growth_rate, random_state, simulate, trajectory_csv, MonolithicStepper, PartitionedStepper, Stepper, DEFAULT_BURN_IN};
use coupstab::sweep::{self, run_sweep_with_workers, workers_from_env, SweepSpec};
use coupstab::validate::{run_suite, Suite};
use coupstab::{DimensionlessParams, Error};

#[derive(Parser)]
#[command(name = "coupstab", version, about = "Stability analysis of partitioned coupling schemes for two-domain 1D diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stability field over two parameters, from a config file or a figure preset.
    Sweep(SweepArgs),
    /// Eigenvalues of the update matrix at one parameter point.
    Spectrum(SpectrumArgs),
    /// Time-step a scheme and report the trajectory.
    Simulate(SimulateArgs),
    /// Analytic one-way stability limits.
    Bounds(BoundsArgs),
    /// Normal-mode versus matrix cross-checks.
    Validate(ValidateArgs),
    /// Dense A and B matrices as CSV.
    DumpMatrices(DumpArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep configuration.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Named figure preset (fig3..fig9); writes one CSV and PGM per panel.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory for preset panels.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    pgm: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<SchemeSpec>,
    #[arg(long)]
    n_minus: Option<usize>,
    #[arg(long)]
    n_plus: Option<usize>,
    /// Points per axis (overrides both axes).
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: COUPSTAB_WORKERS, else all cores).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, default_value = "bulk-explicit")]
    scheme: SchemeSpec,
    #[arg(long, default_value_t = 0.0)]
    d_plus: f64,
    #[arg(long, default_value_t = 0.0)]
    d_minus: f64,
    #[arg(long, default_value_t = 0.0)]
    beta_plus: f64,
    #[arg(long, default_value_t = 0.0)]
    beta_minus: f64,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    #[arg(long, default_value_t = sweep::DEFAULT_N_MINUS)]
    n_minus: usize,
    #[arg(long, default_value_t = sweep::DEFAULT_N_PLUS)]
    n_plus: usize,
    #[arg(long, value_enum, default_value_t = FarFieldArg::Dirichlet)]
    far_field: FarFieldArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FarFieldArg {
    Dirichlet,
    Reflective,
}

impl PointArgs {
    fn params(&self) -> coupstab::Result<DimensionlessParams> {
        DimensionlessParams::new(self.d_plus, self.d_minus, self.beta_plus, self.beta_minus, self.r)
    }

    fn far(&self) -> FarField {
        match self.far_field {
            FarFieldArg::Dirichlet => FarField::Dirichlet,
            FarFieldArg::Reflective => FarField::Reflective,
        }
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Write `re,im` rows here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = coupstab::spectral::DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the partitioned stepper instead of the matrix iteration.
    #[arg(long)]
    partitioned: bool,
    /// Keep raw norms instead of renormalizing every step.
    #[arg(long)]
    no_renormalize: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Single diffusion Courant number; omit for a table.
    #[arg(long)]
    d: Option<f64>,
    #[arg(long, default_value_t = 1e-2)]
    d_min: f64,
    #[arg(long, default_value_t = 1e3)]
    d_max: f64,
    #[arg(long, default_value_t = 101)]
    points: usize,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value = "all", value_parser = ["one-way", "bulk", "dn", "all"])]
    suite: String,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Write A.csv and B.csv here instead of stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Validation,
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::ParameterDomain(_) | Error::Scheme(_) | Error::Io { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Validate(a) => cmd_validate(a),
        Command::DumpMatrices(a) => cmd_dump(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `coupstab --help` for usage");
            ExitCode::from(2)
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => Ok(write_text(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn apply_overrides(spec: &mut SweepSpec, a: &SweepArgs) -> Result<(), Failure> {
    if let Some(s) = a.scheme {
        spec.scheme = s;
    }
    if let Some(n) = a.n_minus {
        spec.n_minus = n;
    }
    if let Some(n) = a.n_plus {
        spec.n_plus = n;
    }
    if let Some(n) = a.points {
        spec.axis_x.points = n;
        spec.axis_y.points = n;
    }
    if let Some(t) = a.tol {
        spec.tol = t;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    Ok(spec.validate()?)
}

fn run_and_write(spec: &SweepSpec, workers: Option<usize>, csv: &Path, pgm: Option<&Path>) -> Result<(), Failure> {
    let field = run_sweep_with_workers(spec, workers)?;
    if field.warnings > 0 {
        log::warn!("{} grid points failed and are recorded as NaN", field.warnings);
    }
    output::write_csv(&field, csv)?;
    let mut meta = csv.as_os_str().to_owned();
    meta.push(".meta.toml");
    write_text(Path::new(&meta), &output::metadata_toml(&field.metadata)?)?;
    if let Some(p) = pgm {
        output::write_pgm(&field, p)?;
    }
    eprintln!(
        "{}: {} stable, {} marginal, {} unstable, {} failed -> {}",
        spec.scheme,
        field.count(coupstab::spectral::Stability::Stable),
        field.count(coupstab::spectral::Stability::Marginal),
        field.count(coupstab::spectral::Stability::Unstable),
        field.warnings,
        csv.display()
    );
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let workers = a.workers.or_else(workers_from_env);
    if let Some(name) = &a.preset {
        for panel in sweep::preset(name)? {
            let mut spec = panel.spec;
            apply_overrides(&mut spec, &a)?;
            let stem = a.out_dir.join(format!("{name}_{}", panel.label));
            run_and_write(&spec, workers, &stem.with_extension("csv"), Some(&stem.with_extension("pgm")))?;
        }
        return Ok(());
    }
    let path = a.config.as_deref().expect("clap requires config or preset");
    let cfg = SweepConfig::load(path)?;
    let mut spec = cfg.sweep_spec()?;
    apply_overrides(&mut spec, &a)?;
    let csv = a
        .csv
        .clone()
        .or(cfg.output.csv.clone())
        .ok_or_else(|| Failure::Usage("no CSV output path (set [output] csv or --csv)".into()))?;
    let pgm = a.pgm.clone().or(cfg.output.pgm.clone());
    run_and_write(&spec, workers, &csv, pgm.as_deref())
}

fn cmd_spectrum(a: SpectrumArgs) -> Result<(), Failure> {
    let p = a.point.params()?;
    let pair = assemble_with(&a.point.scheme, &p, a.point.n_minus, a.point.n_plus, a.point.far())?;
    let mut spec = pair_spectrum(&pair)?;
    spec.eigenvalues
        .sort_by(|x, y| y.norm().total_cmp(&x.norm()).then(x.re.total_cmp(&y.re)).then(x.im.total_cmp(&y.im)));
    emit(a.csv.as_deref(), &output::spectrum_csv(&spec.eigenvalues))?;
    eprintln!(
        "lambda_max = {} ({}), backward error {:.1e}",
        spec.lambda_max,
        classify(spec.lambda_max, a.tol),
        spec.residual_bound
    );
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Failure> {
    let pt = &a.point;
    let p = pt.params()?;
    let stepper: Box<dyn Stepper> = if a.partitioned {
        Box::new(PartitionedStepper::with_far_field(&pt.scheme, &p, pt.n_minus, pt.n_plus, pt.far())?)
    } else {
        Box::new(MonolithicStepper::new(assemble_with(&pt.scheme, &p, pt.n_minus, pt.n_plus, pt.far())?)?)
    };
    let x0 = random_state(stepper.layout(), a.seed);
    let traj = simulate(stepper.as_ref(), &x0, a.steps, !a.no_renormalize)?;
    emit(a.csv.as_deref(), &trajectory_csv(&traj))?;
    match growth_rate(&traj, DEFAULT_BURN_IN) {
        Ok(g) => eprintln!("seed {}: growth rate {g}", a.seed),
        Err(e) => eprintln!("seed {}: no growth estimate ({e})", a.seed),
    }
    Ok(())
}

fn cmd_bounds(a: BoundsArgs) -> Result<(), Failure> {
    if let Some(d) = a.d {
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Failure::Usage(format!("--d must be finite and >= 0, got {d}")));
        }
        print!("{}", output::bounds_at(d));
        return Ok(());
    }
    let axis = sweep::Axis::log(coupstab::ParamVar::DMinus, a.d_min, a.d_max, a.points);
    axis.validate()?;
    print!("{}", output::bounds_table(&axis.values()));
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> Result<(), Failure> {
    let suite: Suite = a.suite.parse()?;
    let report = run_suite(suite);
    for c in &report.checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("{}", report.summary());
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn cmd_dump(a: DumpArgs) -> Result<(), Failure> {
    let pt = &a.point;
    let pair = assemble_with(&pt.scheme, &pt.params()?, pt.n_minus, pt.n_plus, pt.far())?;
    let (am, bm) = (output::matrix_csv(&pair.dense_a()), output::matrix_csv(&pair.dense_b()));
    match &a.out_dir {
        Some(dir) => {
            write_text(&dir.join("A.csv"), &am)?;
            write_text(&dir.join("B.csv"), &bm)?;
            write_text(&dir.join("M.csv"), &output::matrix_csv(&update_matrix(&pair)?))?;
        }
        None => print!("# A\n{am}# B\n{bm}"),
    }
    Ok(())
}
