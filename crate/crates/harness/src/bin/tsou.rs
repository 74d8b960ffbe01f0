use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tsou_core::dgga::{DGGa, DGGaParams};
use tsou_core::ggsm::{sample_gga, GGaParams};
use tsou_core::ibgm::{IBGMMethod, IBGMParams, IBGM};
use tsou_core::iga::{IGa, IGaMethod, IGaParams};
use tsou_core::ou::{simulate_paths_with, DecompositionOptions, OUKind, OUSpec, StartMode, TrajectoryGrid};
use tsou_core::tempered_stable::{TSMethod, TSParams, TSSampler, DEFAULT_TAIL_TOL};
use tsou_core::RandomStream;
use tsou_harness::bench::{bench, ibgm_cases, iga_cases, DEFAULT_REPETITIONS};
use tsou_harness::export::{
    path_header, write_bench, write_matrix_csv, write_paths_csv, write_plot_script, write_validation, Format, Sink,
};
use tsou_harness::validate::{par_draw, validate_moments, Target};
use tsou_harness::{Error, Result};

/// Sampling, simulation, validation and timing for tempered stable OU processes.
#[derive(Parser)]
#[command(name = "tsou", version = tsou_harness::BUILD_ID)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw variates from one law, one per line.
    Sample(SampleArgs),
    /// Process paths.
    Ou {
        #[command(subcommand)]
        command: OuCommand,
    },
    /// Compare empirical moments or cumulants with their exact values.
    Validate(ValidateArgs),
    /// Time the samplers of one law.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum OuCommand {
    /// Simulate paths on a regular grid.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Law {
    Gga,
    Iga,
    Ibgm,
    Dgga,
    Ts,
    Tsou,
    Outs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Tsou,
    Outs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Start {
    Fixed,
    Stationary,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

/// Law parameters; which ones apply depends on the law.
#[derive(Args, Clone)]
struct LawArgs {
    /// Exponent β of IGa/IBGM, or the p-RDTS scale β of TS laws.
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    /// GGa scale.
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// Stability index of TS laws.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// p-RDTS weight `c`.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Shift `b` of TS laws.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    shift: f64,
    /// Mean-reversion rate.
    #[arg(long)]
    lambda: Option<f64>,
    /// Sampling method (law-specific; `auto` where available).
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    law: Law,
    #[command(flatten)]
    params: LawArgs,
    /// Starting value and step for transition laws.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    y0: f64,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[command(flatten)]
    params: LawArgs,
    /// Time step.
    #[arg(long)]
    dt: f64,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    paths: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    y0: f64,
    #[arg(long, value_enum, default_value_t = Start::Fixed)]
    start: Start,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "-")]
    out: String,
    /// Also write a matplotlib script plotting the CSV.
    #[arg(long)]
    plot_script: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum)]
    law: Law,
    #[command(flatten)]
    params: LawArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    y0: f64,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, default_value_t = 50_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reference |err%| per order, comma separated; the tolerance is the larger
    /// of twice these and five standard errors.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    reference_err: Option<Vec<f64>>,
    /// Fixed |err%| limit for every order, overriding the noise-based rule.
    #[arg(long, conflicts_with = "reference_err")]
    max_err: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    law: Law,
    #[command(flatten)]
    params: LawArgs,
    /// Methods to time, comma separated; all by default.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    baseline: Option<String>,
    #[arg(long, value_delimiter = ',', default_values_t = [1_000usize, 10_000, 20_000, 50_000])]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    repetitions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    #[arg(long, default_value = "-")]
    out: String,
}

fn need(v: Option<f64>, flag: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Config(format!("--{flag} is required for this law")))
}

impl LawArgs {
    fn iga(&self) -> Result<(IGaParams, IGaMethod)> {
        let params = IGaParams::new(
            need(self.beta, "beta")?,
            need(self.gamma, "gamma")?,
            need(self.p, "p")?,
            need(self.eta, "eta")?,
        )?;
        let method = self.method.as_deref().unwrap_or("args").parse()?;
        Ok((params, method))
    }

    fn ibgm(&self) -> Result<(IBGMParams, IBGMMethod)> {
        let gamma = need(self.gamma, "gamma")?;
        if gamma.fract() != 0.0 || gamma < 1.0 {
            return Err(Error::Config(format!("IBGM needs a positive integer --gamma, got {gamma}")));
        }
        let params = IBGMParams::new(need(self.beta, "beta")?, gamma as u32, need(self.p, "p")?, need(self.eta, "eta")?)?;
        let method = match self.method.as_deref() {
            None | Some("auto") => IBGMMethod::auto(&params),
            Some(m) => m.parse()?,
        };
        Ok((params, method))
    }

    fn dgga(&self) -> Result<DGGaParams> {
        Ok(DGGaParams::new(need(self.gamma, "gamma")?, need(self.p, "p")?, need(self.eta, "eta")?)?)
    }

    fn ts(&self) -> Result<TSParams> {
        Ok(TSParams::p_rdts(need(self.alpha, "alpha")?, need(self.p, "p")?, self.c, self.beta.unwrap_or(1.0), self.shift)?)
    }

    fn ts_method(&self) -> Result<TSMethod> {
        match self.method.as_deref().unwrap_or("auto") {
            "auto" => Ok(TSMethod::Auto),
            "cp" | "compound-poisson" => Ok(TSMethod::CompoundPoisson),
            "exact" => Ok(TSMethod::ExactTempering),
            "series" => Ok(TSMethod::Series),
            other => Err(Error::Config(format!("unknown TS method '{other}' (expected auto, cp, exact or series)"))),
        }
    }

    fn ou(&self, kind: OUKind) -> Result<OUSpec> {
        Ok(OUSpec::new(need(self.lambda, "lambda")?, kind, self.ts()?)?)
    }
}

fn target(law: Law, a: &LawArgs, y0: f64, t: Option<f64>) -> Result<Target> {
    Ok(match law {
        Law::Gga => return Err(Error::Config("GGa has no validation target; use iga, ibgm, dgga, ts, tsou or outs".into())),
        Law::Iga => {
            let (params, method) = a.iga()?;
            Target::IGa { params, method }
        }
        Law::Ibgm => {
            let (params, method) = a.ibgm()?;
            Target::IBGM { params, method }
        }
        Law::Dgga => Target::DGGa { params: a.dgga()? },
        Law::Ts => Target::TS { params: a.ts()?, method: a.ts_method()? },
        Law::Tsou | Law::Outs => {
            let kind = if matches!(law, Law::Tsou) { OUKind::Tsou } else { OUKind::Outs };
            Target::Transition { spec: a.ou(kind)?, y0, t: need(t, "t")? }
        }
    })
}

fn format(f: OutFormat) -> Format {
    match f {
        OutFormat::Csv => Format::Csv,
        OutFormat::Json => Format::Json,
    }
}

fn run_sample(a: SampleArgs) -> Result<ExitCode> {
    let xs = match a.law {
        Law::Gga => {
            let params = GGaParams::new(need(a.params.gamma, "gamma")?, need(a.params.p, "p")?, a.params.theta)?;
            par_draw(a.n, a.seed, |s| Ok(sample_gga(s, &params)))?
        }
        Law::Iga => {
            let (params, method) = a.params.iga()?;
            let law = IGa::new(params)?;
            par_draw(a.n, a.seed, |s| Ok(law.sample(s, method)?))?
        }
        Law::Ibgm => {
            let (params, method) = a.params.ibgm()?;
            let law = IBGM::new(params)?;
            par_draw(a.n, a.seed, |s| Ok(law.sample(s, method)?))?
        }
        Law::Dgga => {
            let law = DGGa::new(a.params.dgga()?)?;
            par_draw(a.n, a.seed, |s| Ok(law.sample(s)))?
        }
        Law::Ts => {
            let sampler = TSSampler::with_method(a.params.ts()?, a.params.ts_method()?, DEFAULT_TAIL_TOL)?;
            par_draw(a.n, a.seed, |s| Ok(sampler.sample(s)?))?
        }
        Law::Tsou | Law::Outs => target(a.law, &a.params, a.y0, a.t)?.draw(a.n, a.seed)?,
    };
    let rows: Vec<Vec<f64>> = xs.into_iter().map(|x| vec![x]).collect();
    write_matrix_csv(&Sink::parse(&a.out), &["x".to_string()], &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn run_simulate(a: SimulateArgs) -> Result<ExitCode> {
    let kind = match a.kind {
        Kind::Tsou => OUKind::Tsou,
        Kind::Outs => OUKind::Outs,
    };
    let spec = a.params.ou(kind)?;
    let grid = TrajectoryGrid::new(a.dt, a.steps, a.paths, a.y0)?;
    let start = match a.start {
        Start::Fixed => StartMode::Fixed,
        Start::Stationary => StartMode::Stationary,
    };
    let paths = simulate_paths_with(&RandomStream::new(a.seed), &spec, &grid, start, DecompositionOptions::default())?;
    let sink = Sink::parse(&a.out);
    write_paths_csv(&sink, &grid.times(), &paths)?;
    if let Some(script) = a.plot_script {
        let csv_path = match &sink {
            Sink::File(p) => p.clone(),
            Sink::Stdout => return Err(Error::Config("--plot-script needs --out to name a file".into())),
        };
        write_plot_script(&script, &csv_path, &path_header(paths.len()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_validate(a: ValidateArgs) -> Result<ExitCode> {
    let target = target(a.law, &a.params, a.y0, a.t)?;
    let mut report = validate_moments(&target, a.n, a.seed)?;
    if let Some(cells) = &a.reference_err {
        report.judge(Some(cells));
    }
    if let Some(limit) = a.max_err {
        report.judge_fixed(limit);
    }
    write_validation(&Sink::parse(&a.out), &report, format(a.format))?;
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn run_bench(a: BenchArgs) -> Result<ExitCode> {
    let (label, cases, default_baseline) = match a.law {
        Law::Iga => {
            let (params, _) = a.params.iga()?;
            let methods = match &a.methods {
                Some(ms) => ms.iter().map(|m| m.parse()).collect::<tsou_core::Result<Vec<IGaMethod>>>()?,
                None => IGaMethod::ALL.to_vec(),
            };
            (target(a.law, &a.params, 0.0, None)?.to_string(), iga_cases(params, &methods), "args")
        }
        Law::Ibgm => {
            let (params, _) = a.params.ibgm()?;
            let methods = match &a.methods {
                Some(ms) => ms.iter().map(|m| m.parse()).collect::<tsou_core::Result<Vec<IBGMMethod>>>()?,
                None => IBGMMethod::ALL.to_vec(),
            };
            (target(a.law, &a.params, 0.0, None)?.to_string(), ibgm_cases(params, &methods), "inverse")
        }
        _ => return Err(Error::Config("bench supports --law iga and --law ibgm".into())),
    };
    let baseline = a.baseline.as_deref().unwrap_or(default_baseline);
    let report = bench(&label, &cases, &a.sizes, a.repetitions, a.seed, baseline)?;
    write_bench(&Sink::parse(&a.out), &report, format(a.format))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Sample(a) => run_sample(a),
        Command::Ou { command: OuCommand::Simulate(a) } => run_simulate(a),
        Command::Validate(a) => run_validate(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tsou: {e}");
            ExitCode::from(1)
        }
    }
}
