use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fcuq::cli::{
    cmd_evaluate, cmd_gate, cmd_ptrue_prompts, cmd_score, CliError, GateRule, MethodSpec, RunConfig, SchemaError,
    TokenFilter,
};
use fcuq::evaluation::{ExclusionPolicy, Recipe};
use fcuq::{CallFormat, ClusterMethod, Method};

#[derive(Parser)]
#[command(name = "fcuq", version, about = "Score and evaluate uncertainty of function-calling outputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Output syntax: pycall or json.
    #[arg(long, default_value = "pycall")]
    format: CallFormat,
    /// Comma-separated methods; SE and DSE follow --clustering, MAX/AVG/GNLL follow --token-filter.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<MethodSpec>,
    #[arg(long, default_value = "EXM")]
    clustering: ClusterMethod,
    #[arg(long, default_value = "full")]
    token_filter: TokenFilter,
    /// Samples per record; larger sample sets are subsampled (needs --seed).
    #[arg(long = "j", short = 'J', default_value_t = 10)]
    j: usize,
    /// Use every sample regardless of --j.
    #[arg(long, conflicts_with = "j")]
    all_samples: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "exclude_decode_errors")]
    policy: ExclusionPolicy,
    #[arg(long, default_value_t = 1000)]
    n_boot: usize,
    /// Task combination, e.g. "All Combined" or simple+parallel; repeatable.
    #[arg(long = "recipe")]
    recipes: Vec<Recipe>,
    /// Weight semantic-entropy samples by length-normalized likelihood.
    #[arg(long)]
    se_length_normalized: bool,
    /// Fail on any malformed input line instead of skipping it.
    #[arg(long)]
    strict: bool,
}

impl ConfigArgs {
    fn run_config(&self) -> RunConfig {
        RunConfig {
            format: self.format,
            methods: self.methods.clone(),
            clustering: self.clustering,
            token_filter: self.token_filter,
            j: (!self.all_samples).then_some(self.j),
            seed: self.seed,
            policy: self.policy,
            n_boot: self.n_boot,
            recipes: self.recipes.clone(),
            se_length_normalized: self.se_length_normalized,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write one score line per record.
    Score {
        #[command(flatten)]
        config: ConfigArgs,
        /// Model outputs, one JSON record per line.
        #[arg(long)]
        outputs: PathBuf,
        /// P(true) sidecar with {"id", "p_true"} lines.
        #[arg(long)]
        ptrue: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Compute AUROC, standard errors, risk-coverage and calibration tables.
    Evaluate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Score file or outputs file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        ptrue: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Decide per record whether to execute the calls or abstain.
    Gate {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "GNLL")]
        method: Method,
        #[arg(long, required_unless_present = "coverage", conflicts_with = "coverage")]
        threshold: Option<f64>,
        /// Target fraction of executed records.
        #[arg(long)]
        coverage: Option<f64>,
        /// Scores to pick the coverage threshold from (defaults to the input).
        #[arg(long, requires = "coverage")]
        calibration: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Write P(true) judge prompts for an external model.
    PtruePrompts {
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long)]
        outputs: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        strict: bool,
    },
}

fn warn(errors: &[SchemaError]) {
    for e in errors {
        eprintln!("skipped {e}");
    }
    if !errors.is_empty() {
        eprintln!("{} line(s) skipped", errors.len());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Score { config, outputs, ptrue, out } => {
            let skipped = cmd_score(&config.run_config(), &outputs, ptrue.as_deref(), &out, config.strict)?;
            warn(&skipped);
        }
        Command::Evaluate { config, input, ptrue, out_dir } => {
            let report = cmd_evaluate(&config.run_config(), &input, ptrue.as_deref(), &out_dir, config.strict)?;
            print!("{}", report.table_csv());
        }
        Command::Gate { config, input, method, threshold, coverage, calibration, out } => {
            let rule = match (threshold, coverage) {
                (Some(t), _) => GateRule::Threshold(t),
                (None, Some(c)) => GateRule::Coverage(c),
                (None, None) => unreachable!("clap requires one of --threshold and --coverage"),
            };
            let summary =
                cmd_gate(&config.run_config(), &input, method, rule, calibration.as_deref(), &out, config.strict)?;
            println!("{}", serde_json::to_string(&summary).expect("summary serializes"));
        }
        Command::PtruePrompts { tasks, outputs, out, strict } => {
            let n = cmd_ptrue_prompts(&tasks, &outputs, &out, strict)?;
            eprintln!("wrote {n} prompts");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Schema { errors, .. } = &e {
                for err in errors.iter().skip(1) {
                    eprintln!("  {err}");
                }
            }
            ExitCode::from(if e.is_schema() { 2 } else { 1 })
        }
    }
}
