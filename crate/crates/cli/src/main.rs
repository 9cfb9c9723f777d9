use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use symmix::harness::{
    cmd_bvm, cmd_fit, cmd_sdp_demo, cmd_simulate, load_config, parse_methods, write_bvm_rows, BvmConfig,
    ExperimentConfig, FitConfig, SdpDemoConfig,
};
use symmix::models::{load_growth_csv, GrowthModel, ModelKind};
use symmix::{Error, ErrorSpec, NewClusterMode, Result};

#[derive(Parser)]
#[command(name = "symmix", version, about = "Symmetric DP mixture regression: simulations, fits, diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulation grid: MSE and relative efficiency of F1, F2, B1, B2, B3.
    Simulate(SimulateArgs),
    /// Fit a growth-curve submodel M1..M5 to a subject,sex,age,distance CSV.
    Fit(FitArgs),
    /// Compare sampled posteriors with their Gaussian limit.
    Bvm(BvmArgs),
    /// Urn predictive weights and a stick-breaking draw.
    SdpDemo(SdpDemoArgs),
}

#[derive(Args)]
struct ChainArgs {
    /// Total Gibbs iterations.
    #[arg(long)]
    iters: Option<usize>,
    /// Discarded initial iterations.
    #[arg(long)]
    burnin: Option<usize>,
    /// Keep every k-th iteration after burn-in.
    #[arg(long)]
    thin: Option<usize>,
    /// Use the single auxiliary draw for the new-class weight.
    #[arg(long)]
    aux_new_cluster: bool,
}

impl ChainArgs {
    fn apply(&self, chain: &mut symmix::sampler::ChainConfig, mode: &mut NewClusterMode) {
        if let Some(v) = self.iters {
            chain.iterations = v;
        }
        if let Some(v) = self.burnin {
            chain.burn_in = v;
        }
        if let Some(v) = self.thin {
            chain.thin = v;
        }
        if self.aux_new_cluster {
            *mode = NewClusterMode::AuxiliaryDraw;
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Error law: E1..E9 or a JSON object.
    #[arg(long)]
    error: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    groups: Option<usize>,
    #[arg(long)]
    group_size: Option<usize>,
    /// Comma list, e.g. F1,B3.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    chain: ChainArgs,
    /// Per-replication CSV (experiment,method,rep,sqerr).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Aggregate CSV; printed to stdout when omitted.
    #[arg(long)]
    summary_out: Option<PathBuf>,
    /// JSON file overriding defaults; flags override the file.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// M1..M5.
    #[arg(long)]
    model: String,
    /// Growth data CSV.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    chain: ChainArgs,
    /// Summary CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Retained draws, one row per iteration.
    #[arg(long)]
    draws_out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct BvmArgs {
    /// location, fixed-effects or random-intercept.
    #[arg(long)]
    kind: Option<String>,
    /// Normal-mixture truth: E8, E9 or a JSON mixture.
    #[arg(long)]
    error: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SdpDemoArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tau1: Option<f64>,
    /// Sequential urn draws before the predictive is reported.
    #[arg(long)]
    draws: Option<usize>,
    /// Explicit past draws, comma separated; overrides --draws.
    #[arg(long, allow_hyphen_values = true)]
    past: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Predictive CSV (kind,location,weight); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stick-breaking CSV (atom,location,weight).
    #[arg(long)]
    stick_out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn config_or_default<T: Default + serde::de::DeserializeOwned>(path: Option<&PathBuf>) -> Result<T> {
    match path {
        Some(p) => load_config(p),
        None => Ok(T::default()),
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let mut cfg: ExperimentConfig = config_or_default(a.config.as_ref())?;
    if let Some(e) = &a.error {
        cfg.error = ErrorSpec::parse(e)?;
        if !e.trim_start().starts_with('{') {
            cfg.experiment = e.trim().to_ascii_uppercase();
        }
    }
    if let Some(v) = a.reps {
        cfg.reps = v;
    }
    if let Some(v) = a.groups {
        cfg.groups = v;
    }
    if let Some(v) = a.group_size {
        cfg.group_size = v;
    }
    if let Some(m) = &a.methods {
        cfg.methods = parse_methods(m)?;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    a.chain.apply(&mut cfg.chain, &mut cfg.new_cluster_mode);
    let table = cmd_simulate(&cfg)?;
    if let Some(out) = &a.out {
        table.write_records(sink(Some(out))?)?;
    }
    table.write_aggregate(sink(a.summary_out.as_deref())?)?;
    let failed: usize = table.rows.iter().map(|r| r.n_failed).sum();
    if failed > 0 {
        eprintln!("warning: {failed} method runs failed and were excluded from the aggregate");
    }
    Ok(())
}

fn fit(a: FitArgs) -> Result<()> {
    let mut cfg: FitConfig = config_or_default(a.config.as_ref())?;
    let model: GrowthModel = a.model.parse()?;
    if let Some(v) = a.seed {
        cfg.chain.seed = v;
    }
    a.chain.apply(&mut cfg.chain, &mut cfg.new_cluster_mode);
    let data = load_growth_csv::<f64>(&a.data)?;
    let out = cmd_fit(model, &data, &cfg.chain, &cfg.priors, cfg.new_cluster_mode)?;
    out.write_csv(sink(a.out.as_deref())?)?;
    if let Some(p) = &a.draws_out {
        out.summary.write_draw_log(sink(Some(p))?)?;
    }
    Ok(())
}

fn bvm(a: BvmArgs) -> Result<()> {
    let mut cfg: BvmConfig = config_or_default(a.config.as_ref())?;
    if let Some(k) = &a.kind {
        cfg.kind = k.parse::<ModelKind>()?;
    }
    if let Some(e) = &a.error {
        cfg.error = ErrorSpec::parse(e)?;
    }
    if let Some(v) = a.n {
        cfg.n = v;
    }
    if let Some(v) = a.reps {
        cfg.reps = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    a.chain.apply(&mut cfg.chain, &mut cfg.new_cluster_mode);
    let rows = cmd_bvm(&cfg)?;
    write_bvm_rows(&rows, sink(a.out.as_deref())?)
}

fn sdp_demo(a: SdpDemoArgs) -> Result<()> {
    let mut cfg: SdpDemoConfig = config_or_default(a.config.as_ref())?;
    if let Some(v) = a.alpha {
        cfg.concentration = v;
    }
    if let Some(v) = a.tau1 {
        cfg.base_sd = v;
    }
    if let Some(v) = a.draws {
        cfg.draws = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(list) = &a.past {
        let past = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad past draw {s:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        cfg.past = Some(past);
    }
    let demo = cmd_sdp_demo(&cfg)?;
    demo.write_predictive(sink(a.out.as_deref())?)?;
    if let Some(p) = &a.stick_out {
        demo.write_stick(sink(Some(p))?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Bvm(a) => bvm(a),
        Command::SdpDemo(a) => sdp_demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.category());
            ExitCode::FAILURE
        }
    }
}
