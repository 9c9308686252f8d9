use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sinlab::csbp::{CumulantSolver, KernelValue};
use sinlab::error::Error;
use sinlab::limits::config::{Config, Section};
use sinlab::limits::{
    verify_extinction, verify_local_time, verify_ray_knight, verify_self_consistency,
    verify_size_biased, verify_strong_gwi, ExperimentReport, ExtinctionConfig, LocalTimeConfig,
    RayKnightConfig, SelfConsistencyConfig, SizeBiasedConfig, StrongGwiConfig,
};
use sinlab::mechanisms::{check_conditions, parse_bivariate, parse_immigration, BranchingMechanism};
use sinlab::trees::{
    contour_from_height, height_from_walk, kids_from_walk, parse_any, parse_luk, parse_paren,
    parse_sin, proximity_violations, sample_gw, sample_gwi, spinal_decomposition, to_luk,
    to_paren, to_sin, DispatchingLaw, Encoded, OffspringLaw, OrderedTree, SinTree,
};

#[derive(Parser)]
#[command(name = "sinlab", version, about = "Galton-Watson trees with immigration and their CSBPI limits")]
struct Cli {
    /// Master seed; overrides the seed of a verify config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Size of the worker pool. Never changes the output.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate branching and immigration mechanisms.
    #[command(subcommand)]
    Mech(MechCmd),
    /// CSBP / CSBPI kernels.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Sample, encode and check trees.
    #[command(subcommand)]
    Tree(TreeCmd),
    /// Run a verification experiment.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum MechCmd {
    /// ψ(λ).
    Psi {
        #[arg(long)]
        psi: String,
        #[arg(long)]
        lambda: f64,
    },
    /// Φ(p, q).
    Phi {
        #[arg(long)]
        phi: String,
        /// Needed by `sizebiased`.
        #[arg(long)]
        psi: Option<String>,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
    },
    /// Subcritical, conservative, Grey and continuity conditions.
    Check {
        #[arg(long)]
        psi: String,
        #[arg(long)]
        phi: String,
    },
}

#[derive(Subcommand)]
enum KernelCmd {
    /// u(a, λ).
    U {
        #[arg(long)]
        psi: String,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        lambda: f64,
    },
    /// v(a) = lim u(a, λ) as λ → ∞.
    V {
        #[arg(long)]
        psi: String,
        #[arg(long)]
        a: f64,
    },
    /// E[exp(-λ X_a)] for the CSBP, or the CSBPI when --phi is given.
    Laplace {
        #[arg(long)]
        psi: String,
        #[arg(long)]
        phi: Option<String>,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TreeFormat {
    Luk,
    Paren,
    Height,
    Contour,
}

#[derive(Subcommand)]
enum TreeCmd {
    /// Sample a GW(μ) tree.
    SampleGw {
        #[arg(long)]
        mu: String,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
        #[arg(long, value_enum, default_value_t = TreeFormat::Luk)]
        to: TreeFormat,
    },
    /// Sample a GWI(μ, r) sin-tree truncated at spine depth M.
    SampleGwi {
        #[arg(long)]
        mu: String,
        #[arg(long, default_value = "sizebiased")]
        r: String,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
    },
    /// Re-encode a LUK, PAREN or SIN file (stdin when no input is given).
    Encode {
        #[arg(long, value_enum)]
        to: TreeFormat,
        input: Option<PathBuf>,
    },
    /// Run the exact invariants on a LUK, PAREN or SIN file.
    Check { input: Option<PathBuf> },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    StrongGwi,
    RayKnight,
    SizeBiased,
    SelfConsistency,
    Extinction,
    LocalTime,
}

impl Experiment {
    fn name(self) -> &'static str {
        match self {
            Experiment::StrongGwi => "strong-gwi",
            Experiment::RayKnight => "ray-knight",
            Experiment::SizeBiased => "size-biased",
            Experiment::SelfConsistency => "self-consistency",
            Experiment::Extinction => "extinction",
            Experiment::LocalTime => "local-time",
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    experiment: Experiment,
    /// Config file; the section named after the experiment is used, or the
    /// unnamed top section. Defaults apply without a file.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_)
            | Error::Literal { .. }
            | Error::Parse(_)
            | Error::Config(_)
            | Error::MalformedPath { .. }
            | Error::InvalidTree(_)
            | Error::DegenerateConfig(_)
            | Error::DegenerateEpsilon { .. } => 2,
            _ => 3,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// What a command produced: text to print and whether a check failed.
struct Output {
    text: String,
    failed: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, failed: false }
    }
}

type Run = Result<Output, Failure>;

fn json_line(v: &Value) -> String {
    format!("{}\n", serde_json::to_string(v).expect("json"))
}

fn kernel_output(kv: KernelValue, format: Format) -> Output {
    Output::ok(match format {
        Format::Json => format!("{}\n", serde_json::to_string(&kv).expect("json")),
        Format::Csv => format!(
            "value,method,est_error\n{},{},{}\n",
            kv.value,
            serde_json::to_value(kv.method).expect("json").as_str().unwrap_or(""),
            kv.est_error
        ),
    })
}

fn value_output(value: f64, format: Format) -> Output {
    Output::ok(match format {
        Format::Json => json_line(&json!({ "value": value })),
        Format::Csv => format!("value\n{value}\n"),
    })
}

fn run_mech(cmd: MechCmd, format: Format) -> Run {
    match cmd {
        MechCmd::Psi { psi, lambda } => {
            let m: BranchingMechanism = psi.parse()?;
            Ok(value_output(m.psi(lambda), format))
        }
        MechCmd::Phi { phi, psi, p, q } => {
            let m = psi.map(|s| s.parse::<BranchingMechanism>()).transpose()?;
            let b = parse_bivariate(&phi, m.as_ref())?;
            Ok(value_output(b.phi2(p, q), format))
        }
        MechCmd::Check { psi, phi } => {
            let m: BranchingMechanism = psi.parse()?;
            let b = parse_bivariate(&phi, Some(&m))?;
            let report = check_conditions(&m, &b);
            Ok(Output::ok(match format {
                Format::Json => format!("{}\n", serde_json::to_string(&report).expect("json")),
                Format::Csv => format!(
                    "subcritical,conservative,grey,uv_continuous\n{},{},{},{}\n",
                    report.subcritical, report.conservative, report.grey, report.uv_continuous
                ),
            }))
        }
    }
}

fn run_kernel(cmd: KernelCmd, format: Format) -> Run {
    match cmd {
        KernelCmd::U { psi, a, lambda } => {
            let solver = CumulantSolver::new(psi.parse()?);
            Ok(kernel_output(solver.u_value(a, lambda)?, format))
        }
        KernelCmd::V { psi, a } => {
            let solver = CumulantSolver::new(psi.parse()?);
            Ok(kernel_output(solver.v(a)?, format))
        }
        KernelCmd::Laplace {
            psi,
            phi,
            a,
            lambda,
            x0,
        } => {
            let m: BranchingMechanism = psi.parse()?;
            let solver = CumulantSolver::new(m.clone());
            let kv = match phi {
                None => solver.csbp_laplace(a, lambda, x0)?,
                Some(s) => {
                    let imm = parse_immigration(&s, Some(&m))?;
                    solver.csbpi_laplace(&imm, a, lambda, x0)?
                }
            };
            Ok(kernel_output(kv, format))
        }
    }
}

fn read_input(path: Option<&Path>) -> Result<String, Failure> {
    match path {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", p.display()))),
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Failure::usage(format!("cannot read stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    let parts: Vec<String> = xs.iter().map(T::to_string).collect();
    format!("{}\n", parts.join(" "))
}

fn encode_heights(h: &[u32], to: TreeFormat, closed: bool) -> String {
    match to {
        TreeFormat::Height => join(h),
        _ => {
            let c = contour_from_height(h);
            join(&if closed { c.closed() } else { c }.values)
        }
    }
}

fn encode_tree(t: &OrderedTree, to: TreeFormat) -> String {
    match to {
        TreeFormat::Luk => to_luk(t),
        TreeFormat::Paren => to_paren(t),
        TreeFormat::Height | TreeFormat::Contour => encode_heights(&t.height_process(), to, true),
    }
}

fn encode_sin(st: &SinTree, to: TreeFormat) -> Result<String, Failure> {
    match to {
        TreeFormat::Luk | TreeFormat::Paren => Err(Failure::usage(
            "a SIN input can only be encoded as height or contour",
        )),
        _ => Ok(encode_heights(&st.left_part_heights(), to, false)),
    }
}

fn check(name: &str, passed: bool) -> Value {
    json!({ "name": name, "passed": passed })
}

fn tree_checks(t: &OrderedTree) -> Vec<Value> {
    let walk = t.lukasiewicz();
    let h = t.height_process();
    vec![
        check(
            "height_from_walk",
            height_from_walk(&walk).ok().as_deref() == Some(h.as_slice()),
        ),
        check("walk_inverse", kids_from_walk(&walk).ok().as_deref() == Some(t.kids())),
        check("mirror_involution", t.mirror().mirror() == *t),
        check("luk_round_trip", parse_luk(&to_luk(t)).ok().as_ref() == Some(t)),
        check("paren_round_trip", parse_paren(&to_paren(t)).ok().as_ref() == Some(t)),
        check("contour_proximity", proximity_violations(&h) == 0),
    ]
}

fn sin_checks(st: &SinTree) -> Vec<Value> {
    let y = st.generation_sizes();
    let (l, r) = st.occupation_counts();
    let occupation = (0..st.depth()).all(|n| l[n] + r[n] == y[n] + 2);
    let left = st.left_part_heights();
    let spinal = match spinal_decomposition(st, left.len()) {
        Ok(d) => d.reconstruct() == left && d.sandwich_violations().is_empty(),
        Err(_) => false,
    };
    vec![
        check("occupation_identity", occupation),
        check("spinal_reconstruction", spinal),
        check("mirror_involution", st.mirror().mirror() == *st),
        check("sin_round_trip", parse_sin(&to_sin(st)).ok().as_ref() == Some(st)),
        check("contour_proximity", proximity_violations(&left) == 0),
    ]
}

fn run_tree(cmd: TreeCmd, seed: u64) -> Run {
    match cmd {
        TreeCmd::SampleGw { mu, cap, to } => {
            let law: OffspringLaw = mu.parse()?;
            let t = sample_gw(&law, seed, cap)?;
            Ok(Output::ok(encode_tree(&t, to)))
        }
        TreeCmd::SampleGwi { mu, r, depth, cap } => {
            let law: OffspringLaw = mu.parse()?;
            let r = DispatchingLaw::parse(&r, &law)?;
            let st = sample_gwi(&law, &r, depth, seed, cap)?;
            Ok(Output::ok(to_sin(&st)))
        }
        TreeCmd::Encode { to, input } => {
            let text = read_input(input.as_deref())?;
            Ok(Output::ok(match parse_any(&text)? {
                Encoded::Tree(t) => encode_tree(&t, to),
                Encoded::Sin(st) => encode_sin(&st, to)?,
            }))
        }
        TreeCmd::Check { input } => {
            let text = read_input(input.as_deref())?;
            let (kind, checks) = match parse_any(&text)? {
                Encoded::Tree(t) => ("tree", tree_checks(&t)),
                Encoded::Sin(st) => ("sin", sin_checks(&st)),
            };
            let passed = checks.iter().all(|c| c["passed"] == json!(true));
            Ok(Output {
                text: json_line(&json!({ "input": kind, "checks": checks, "passed": passed })),
                failed: !passed,
            })
        }
    }
}

fn load_section(exp: Experiment, path: Option<&Path>) -> Result<Section, Failure> {
    let Some(path) = path else {
        return Ok(Section::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: Config = text.parse()?;
    cfg.section(exp.name())
        .or_else(|| cfg.section(""))
        .cloned()
        .ok_or_else(|| {
            Failure::usage(format!(
                "{} has no [{}] section",
                path.display(),
                exp.name()
            ))
        })
}

fn run_verify(args: VerifyArgs, seed: Option<u64>, format: Format) -> Run {
    let section = load_section(args.experiment, args.config.as_deref())?;
    let report: ExperimentReport = match args.experiment {
        Experiment::StrongGwi => {
            let mut c = StrongGwiConfig::from_section(&section)?;
            c.seed = seed.unwrap_or(c.seed);
            verify_strong_gwi(&c)?
        }
        Experiment::RayKnight => {
            let mut c = RayKnightConfig::from_section(&section)?;
            c.seed = seed.unwrap_or(c.seed);
            verify_ray_knight(&c)?
        }
        Experiment::SizeBiased => verify_size_biased(&SizeBiasedConfig::from_section(&section)?)?,
        Experiment::SelfConsistency => {
            let mut c = SelfConsistencyConfig::from_section(&section)?;
            c.seed = seed.unwrap_or(c.seed);
            verify_self_consistency(&c)?
        }
        Experiment::Extinction => verify_extinction(&ExtinctionConfig::from_section(&section)?)?,
        Experiment::LocalTime => {
            let mut c = LocalTimeConfig::from_section(&section)?;
            c.seed = seed.unwrap_or(c.seed);
            verify_local_time(&c)?
        }
    };
    eprintln!(
        "{}: {} in {:.2?}",
        report.experiment,
        if report.passed { "pass" } else { "FAIL" },
        report.wall_time
    );
    let text = match format {
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&report).expect("json")
        ),
        Format::Csv => report.to_csv(),
    };
    Ok(Output {
        text,
        failed: !report.passed,
    })
}

fn run(cli: Cli) -> Run {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Failure::usage("--workers must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure {
                code: 3,
                message: e.to_string(),
            })?;
    }
    match cli.command {
        Command::Mech(c) => run_mech(c, cli.format),
        Command::Kernel(c) => run_kernel(c, cli.format),
        Command::Tree(c) => run_tree(c, cli.seed.unwrap_or(0)),
        Command::Verify(a) => run_verify(a, cli.seed, cli.format),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = cli.out.clone();
    match run(cli) {
        Ok(output) => {
            let written = match &out {
                Some(p) => fs::write(p, &output.text),
                None => io::stdout().write_all(output.text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(3);
            }
            ExitCode::from(if output.failed { 1 } else { 0 })
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            if f.code == 2 {
                eprintln!("usage: sinlab [--seed N] [--out PATH] [--format json|csv] [--workers N] <mech|kernel|tree|verify> ...");
            }
            ExitCode::from(f.code)
        }
    }
}
