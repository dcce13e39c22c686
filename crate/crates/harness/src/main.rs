use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gaugephase::dual_solve::{
    solve_coordinate_descent, solve_projected_gradient, solve_reduced_gradient, CoordinateOpts,
    CoordinateScheme, Gauge, GradientOpts, NullBasis, SamplingRegime, StepPolicy, StepScale,
};
use gaugephase::operators::io::{
    format_f64, read_key_values, read_matrix_csv, read_vector_csv, write_vector_csv,
};
use gaugephase::operators::{
    from_diag_sdp, read_instance, write_instance, Instance, InstanceMeta, Observations,
};
use gaugephase::refine::{
    init_gauge_dual, init_wirtinger, recovery_error, refine_descent, scale_initialization,
    RefineConfig,
};
use gaugephase::rng::{stream_rng, Stream};
use gaugephase::spectral::{EigMethod, SpectralOpts};
use gaugephase_harness::align::{align_to_csv, run_alignment_study};
use gaugephase_harness::curve::{curve_to_csv, run_recovery_curve};
use gaugephase_harness::image::ImageGrid;
use gaugephase_harness::method::{BasisChoice, DualSolver, InitMethod, MethodSpec};
use gaugephase_harness::problem::{ProblemSpec, SignalSource};
use gaugephase_harness::run::{run_single, RunOptions};
use gaugephase_harness::{HarnessError, Result};
use nalgebra::DVector;
use rand_distr::{Distribution, StandardNormal};

#[derive(Parser)]
#[command(
    name = "gaugephase",
    version,
    about = "Gauge-dual phase retrieval solvers and experiments"
)]
struct Cli {
    /// key=value file supplying defaults for the subcommand's long options
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance directory
    Gen(GenArgs),
    /// Run a dual solver on an instance
    Solve(SolveArgs),
    /// Initialize and refine on an instance
    Refine(RefineArgs),
    /// Generate, solve and refine in one seeded trial
    Run(RunArgs),
    /// Recovery rate against the number of samples
    Curve(CurveArgs),
    /// Alignment of subsampled top eigenvectors
    Align(AlignArgs),
}

#[derive(Args)]
struct GenArgs {
    /// gaussian | hadamard | image | diagsdp
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// PGM file or `builtin` (kind=image)
    #[arg(long, default_value = "builtin")]
    image: String,
    /// Measurement ensemble for kind=image: gaussian | hadamard
    #[arg(long, default_value = "hadamard")]
    ensemble: String,
    /// Cost matrix CSV (kind=diagsdp)
    #[arg(long)]
    cost: Option<PathBuf>,
    /// Diagonal constraint values CSV (kind=diagsdp; default all ones)
    #[arg(long)]
    b: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// pg | rg | cd
    #[arg(long, default_value = "cd")]
    method: String,
    /// psd | nuclear
    #[arg(long, default_value = "psd")]
    gauge: String,
    /// full | nonneg | weighted[:SIZE] (pg, rg)
    #[arg(long, default_value = "full")]
    regime: String,
    /// dense | sparse (rg)
    #[arg(long, default_value = "sparse")]
    basis: String,
    #[arg(long, default_value_t = 5)]
    rank: usize,
    #[arg(long, default_value_t = 100)]
    block: usize,
    /// weighted | uniform (cd)
    #[arg(long, default_value = "weighted")]
    scheme: String,
    #[arg(long, default_value_t = 300)]
    iters: usize,
    /// fixed:T | decay:T,TAU | backtrack[:T,BETA,C]; default depends on the method
    #[arg(long)]
    step: Option<String>,
    /// normalized | absolute (cd)
    #[arg(long, default_value = "normalized")]
    step_scale: String,
    #[arg(long, default_value_t = 50)]
    refresh_every: usize,
    /// lanczos | power | dense
    #[arg(long, default_value = "lanczos")]
    eig: String,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Record wall-clock times (otherwise NaN, for reproducible output)
    #[arg(long)]
    timings: bool,
}

#[derive(Args, Clone)]
struct RefineOpts {
    /// Initial step (default from the data curvature)
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long, default_value_t = 100.0)]
    tau: f64,
    #[arg(long, default_value_t = 2000)]
    refine_iters: usize,
    #[arg(long, default_value_t = 1e-3)]
    threshold: f64,
}

impl RefineOpts {
    fn config(&self, spectral: SpectralOpts) -> RefineConfig {
        RefineConfig {
            alpha0: self.alpha0,
            tau: self.tau,
            iters: self.refine_iters,
            spectral,
            ..RefineConfig::default()
        }
    }
}

#[derive(Args)]
struct RefineArgs {
    #[arg(long)]
    instance: PathBuf,
    /// wf | dual | random | oracle
    #[arg(long, default_value = "wf")]
    init: String,
    /// Dual iterate CSV (init=dual)
    #[arg(long)]
    y: Option<PathBuf>,
    #[command(flatten)]
    refine: RefineOpts,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// gaussian | hadamard
    #[arg(long, default_value = "hadamard")]
    ensemble: String,
    /// PGM file, `builtin`, or `gaussian` for a random signal of length --n
    #[arg(long, default_value = "builtin")]
    image: String,
    #[arg(long, default_value_t = 121)]
    n: usize,
}

impl FamilyArgs {
    fn problem(&self, m: usize) -> Result<ProblemSpec> {
        let signal = match self.image.as_str() {
            "gaussian" => SignalSource::Gaussian { n: self.n },
            "builtin" => SignalSource::Image(ImageGrid::builtin_note()),
            path => SignalSource::Image(ImageGrid::load(Path::new(path))?),
        };
        Ok(ProblemSpec {
            ensemble: self.ensemble.parse()?,
            m,
            signal,
        })
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 1000)]
    m: usize,
    /// wf | oracle | random | dual (uses the solver options)
    #[arg(long, default_value = "dual")]
    init: String,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    refine: RefineOpts,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also refine from the Wirtinger-flow start for the relative objective
    #[arg(long)]
    compare_wf: bool,
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Comma-separated sample counts
    #[arg(long, default_value = "300,500,700,1000")]
    ms: String,
    /// Comma-separated: wf, oracle, random, dual (solver options apply to dual)
    #[arg(long, default_value = "wf,dual")]
    methods: String,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    refine: RefineOpts,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AlignArgs {
    #[arg(long, default_value_t = 1000)]
    m: usize,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value = "100,250,500,750,1000")]
    sizes: String,
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_list(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("bad integer '{t}' in list")))
        })
        .collect()
}

impl SolverArgs {
    fn solver(&self, m: usize) -> Result<DualSolver> {
        let gauge: Gauge = self.gauge.parse()?;
        let spectral = SpectralOpts::with_method(self.eig.parse::<EigMethod>()?);
        let step = self.step.as_deref().map(StepPolicy::parse).transpose()?;
        let gradient = || -> Result<GradientOpts> {
            Ok(GradientOpts {
                gauge,
                regime: SamplingRegime::parse(&self.regime, m)?,
                step: step.unwrap_or_default(),
                iters: self.iters,
                spectral,
                ..GradientOpts::default()
            })
        };
        Ok(match self.method.as_str() {
            "pg" => DualSolver::Projected(gradient()?),
            "rg" => DualSolver::Reduced(gradient()?, self.basis.parse::<BasisChoice>()?),
            "cd" => DualSolver::Coordinate(CoordinateOpts {
                gauge,
                rank: self.rank,
                block: self.block,
                step: step.unwrap_or(CoordinateOpts::default().step),
                step_scale: self.step_scale.parse::<StepScale>()?,
                scheme: self.scheme.parse::<CoordinateScheme>()?,
                refresh_every: self.refresh_every,
                iters: self.iters,
                spectral,
                ..CoordinateOpts::default()
            }),
            other => return Err(HarnessError::Config(format!("unknown solver '{other}'"))),
        })
    }

    fn spectral(&self) -> Result<SpectralOpts> {
        Ok(SpectralOpts::with_method(self.eig.parse::<EigMethod>()?))
    }
}

fn method_spec(
    init: &str,
    solver: &SolverArgs,
    refine: &RefineOpts,
    m: usize,
) -> Result<MethodSpec> {
    let init = match init {
        "wf" => InitMethod::Wirtinger,
        "oracle" => InitMethod::Oracle,
        "random" => InitMethod::Random,
        "dual" => InitMethod::Dual(solver.solver(m)?),
        other => return Err(HarnessError::Config(format!("unknown init '{other}'"))),
    };
    let spectral = solver.spectral()?;
    Ok(MethodSpec {
        init,
        refine: refine.config(spectral),
        spectral,
        threshold: refine.threshold,
    })
}

fn gen(args: &GenArgs) -> Result<()> {
    let instance = match args.kind.as_str() {
        "gaussian" | "hadamard" => ProblemSpec {
            ensemble: args.kind.parse()?,
            m: args.m,
            signal: SignalSource::Gaussian { n: args.n },
        }
        .build(args.seed)?,
        "image" => FamilyArgs {
            ensemble: args.ensemble.clone(),
            image: args.image.clone(),
            n: args.n,
        }
        .problem(args.m)?
        .build(args.seed)?,
        "diagsdp" => {
            let cost = args
                .cost
                .as_ref()
                .ok_or_else(|| HarnessError::Config("kind=diagsdp needs --cost".into()))?;
            let c = read_matrix_csv(cost)?;
            let b = match &args.b {
                Some(p) => read_vector_csv(p)?,
                None => DVector::from_element(c.nrows(), 1.0),
            };
            let ensemble = from_diag_sdp(&c, &b)?;
            let meta = InstanceMeta {
                generator: "diagsdp".into(),
                seed: None,
                image_dims: None,
            };
            Instance::new(ensemble, Observations::new(b)?, None, meta)?
        }
        other => return Err(HarnessError::Config(format!("unknown kind '{other}'"))),
    };
    write_instance(&args.out, &instance)?;
    Ok(())
}

fn solve(args: &SolveArgs) -> Result<()> {
    let instance = read_instance(&args.instance)?;
    let (ens, b) = (&instance.ensemble, &instance.b);
    let (state, traj) = match args.solver.solver(ens.m())? {
        DualSolver::Projected(o) => solve_projected_gradient(ens, b, &o, args.seed)?,
        DualSolver::Reduced(o, choice) => {
            let basis = match choice {
                BasisChoice::Dense => NullBasis::dense(b.values())?,
                BasisChoice::Sparse => NullBasis::sparse(b.values())?,
            };
            solve_reduced_gradient(ens, b, &basis, &o, args.seed)?
        }
        DualSolver::Coordinate(o) => {
            let (s, _, t) = solve_coordinate_descent(ens, b, &o, args.seed)?;
            (s, t)
        }
    };
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("trajectory.csv"), traj.to_csv(args.timings))?;
    write_vector_csv(&args.out.join("y.csv"), &state.y)?;
    let report = format!(
        "method={}\ngauge={}\niterations={}\nobjective={}\n",
        args.solver.method,
        args.solver.gauge,
        state.iteration,
        format_f64(state.objective)
    );
    std::fs::write(args.out.join("solve.txt"), report)?;
    println!("objective={}", format_f64(state.objective));
    Ok(())
}

fn refine(args: &RefineArgs) -> Result<()> {
    let instance = read_instance(&args.instance)?;
    let (ens, b) = (&instance.ensemble, instance.b.values());
    let x = instance.x.as_ref().map(|g| g.values());
    let spectral = SpectralOpts::default();
    let u0 = match args.init.as_str() {
        "wf" => init_wirtinger(ens, b, &spectral, args.seed)?,
        "dual" => {
            let path = args
                .y
                .as_ref()
                .ok_or_else(|| HarnessError::Config("init=dual needs --y".into()))?;
            init_gauge_dual(ens, b, &read_vector_csv(path)?, &spectral, args.seed)?
        }
        "random" => {
            let mut rng = stream_rng(args.seed, Stream::Init, 0);
            let v = DVector::from_fn(ens.n(), |_, _| StandardNormal.sample(&mut rng));
            scale_initialization(ens, b, &v)?
        }
        "oracle" => x
            .cloned()
            .ok_or_else(|| HarnessError::Config("init=oracle needs an instance with x".into()))?,
        other => return Err(HarnessError::Config(format!("unknown init '{other}'"))),
    };
    let result = refine_descent(ens, b, &u0, &args.refine.config(spectral))?;
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("refine.csv"), result.to_csv())?;
    write_vector_csv(&args.out.join("u.csv"), &result.u)?;
    let error = x.map(|x| recovery_error(&result.u, x)).transpose()?;
    if let Some((h, w)) = instance.meta.image_dims {
        ImageGrid::from_recovered(h, w, &result.u, x)?.save(&args.out.join("recovered.pgm"))?;
    }
    let mut report = format!(
        "init={}\niterations={}\nobjective={}\n",
        args.init,
        result.iterations,
        format_f64(result.objective)
    );
    if let Some(e) = error {
        report.push_str(&format!("recovery_error={}\n", format_f64(e)));
    }
    std::fs::write(args.out.join("report.txt"), &report)?;
    print!("{report}");
    Ok(())
}

fn run(args: &RunArgs) -> Result<()> {
    let problem = args.family.problem(args.m)?;
    let method = method_spec(&args.init, &args.solver, &args.refine, args.m)?;
    let opts = RunOptions {
        out_dir: args.out.clone(),
        compare_wf: args.compare_wf,
        timings: args.timings,
    };
    let outcome = run_single(&problem, &method, args.seed, &opts)?;
    print!("{}", outcome.report.to_key_values(args.timings));
    Ok(())
}

fn curve(args: &CurveArgs) -> Result<()> {
    let ms = parse_list(&args.ms)?;
    let problem = args.family.problem(ms[0])?;
    let max_m = *ms.iter().max().expect("nonempty");
    let methods: Vec<MethodSpec> = args
        .methods
        .split(',')
        .map(|t| method_spec(t.trim(), &args.solver, &args.refine, max_m))
        .collect::<Result<_>>()?;
    let rows = run_recovery_curve(&problem, &ms, &methods, args.trials, args.seed)?;
    let csv = curve_to_csv(&rows, args.timings);
    std::fs::write(&args.out, &csv)?;
    print!("{csv}");
    Ok(())
}

fn align(args: &AlignArgs) -> Result<()> {
    let rows = run_alignment_study(
        args.m,
        args.n,
        &parse_list(&args.sizes)?,
        args.seeds,
        args.seed,
    )?;
    let csv = align_to_csv(&rows);
    std::fs::write(&args.out, &csv)?;
    print!("{csv}");
    Ok(())
}

/// Appends `--key value` for config entries whose flag is absent from `args`.
fn apply_config(mut args: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = args
        .iter()
        .position(|a| a == "--config" || a.starts_with("--config="))
    else {
        return Ok(args);
    };
    let path = if let Some(p) = args[pos].strip_prefix("--config=") {
        let p = p.to_string();
        args.remove(pos);
        p
    } else {
        args.remove(pos);
        if pos >= args.len() {
            return Err(HarnessError::Config("--config needs a path".into()));
        }
        args.remove(pos)
    };
    let present: Vec<String> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    for (key, value) in read_key_values(Path::new(&path))? {
        let key = key.replace('_', "-");
        if present.contains(&key) {
            continue;
        }
        match value.as_str() {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => {
                args.push(format!("--{key}"));
                args.push(value);
            }
        }
    }
    Ok(args)
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Solve(a) => solve(a),
        Command::Refine(a) => refine(a),
        Command::Run(a) => run(a),
        Command::Curve(a) => curve(a),
        Command::Align(a) => align(a),
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match apply_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error kind={} msg={}", e.kind(), one_line(&e.to_string()));
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("error kind=usage msg={}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error kind={} msg={}", e.kind(), one_line(&e.to_string()));
            ExitCode::from(1)
        }
    }
}
