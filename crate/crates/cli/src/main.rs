use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pushpull::io::{
    digest_bytes, ingest_relevance_log, instance_digest, parse_instance, read_relevance_log, render_f64,
    write_frontier_csv, write_instance_json, write_report_json, IngestOptions, IngestedUser, Report,
};
use pushpull::metrics::{noise_sweep, refine_compare, Evaluator, SolveOptions};
use pushpull::scenarios::{generate, Dims, Preset, ScenarioKind, ScenarioSpec};
use pushpull::selfcheck::oracle_corpus;
use pushpull::solver::DEFAULT_DP_LIMIT;
use pushpull::{
    aggregate, critical_lambda, posterior, DiscountSpec, Error, Grid, Instance, PosteriorModel, SplitSpec, Strategy,
};

#[derive(Parser)]
#[command(
    name = "pushpull",
    version,
    about = "Rank catalogs for an agent and an advocate and measure who gets served"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Write data here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print a short human-readable summary to stderr.
    #[arg(long)]
    summary: bool,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value = "auto", value_parser = parse_strategy)]
    strategy: Strategy,
    /// Largest block count the subset DP accepts.
    #[arg(long, default_value_t = DEFAULT_DP_LIMIT)]
    dp_limit: usize,
    /// Condition on this signal of the instance's signal model.
    #[arg(long, value_name = "ID")]
    signal: Option<String>,
}

impl SolverArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            strategy: self.strategy,
            dp_limit: self.dp_limit,
        }
    }

    fn posterior(&self, instance: &Instance) -> pushpull::Result<PosteriorModel> {
        match &self.signal {
            None => Ok(PosteriorModel::prior(instance.types())),
            Some(s) => {
                let channel = instance
                    .signal_model()
                    .ok_or_else(|| Error::invalid("--signal given but the instance has no signal_model"))?;
                posterior(instance.types(), channel, s)
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance.
    Gen {
        #[arg(long, default_value = "random", value_parser = parse_kind)]
        kind: ScenarioKind,
        #[arg(long, value_parser = parse_preset)]
        preset: Option<Preset>,
        #[arg(long, default_value_t = 8)]
        objects: usize,
        #[arg(long, default_value_t = 4)]
        blocks: usize,
        #[arg(long, default_value_t = 3)]
        types: usize,
        /// Number of signals; 0 omits the signal model.
        #[arg(long, default_value_t = 0)]
        signals: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// `dcg`, `cutoff:N`, `geometric:BETA` or `custom:W0,W1,...`.
        #[arg(long, value_parser = parse_discount)]
        discount: Option<DiscountSpec>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check an instance file, or run the seeded oracle-equivalence corpus.
    Validate {
        #[arg(required_unless_present = "corpus", conflicts_with = "corpus")]
        input: Option<PathBuf>,
        /// Number of corpus instances.
        #[arg(long)]
        corpus: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Optimal allocation at one weight.
    Solve {
        input: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Pull and push across a grid of weights.
    Frontier {
        input: PathBuf,
        #[arg(long, default_value = "0:1:101", value_parser = parse_grid)]
        grid: Grid,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Pull and push at one weight.
    Metrics {
        input: PathBuf,
        #[arg(long)]
        lambda: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Optimal objective under the instance partition and under a refinement.
    RefineCompare {
        input: PathBuf,
        /// Cuts as `BLOCK:OFFSET,...`; the default splits every block into singletons.
        #[arg(long, value_parser = parse_split)]
        split: Option<SplitSpec>,
        #[arg(long, default_value = "0:1:101", value_parser = parse_grid)]
        grid: Grid,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Signal-averaged best values as the signal model is garbled.
    NoiseSweep {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5,0.75,1")]
        epsilons: Vec<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Per-user pull and push from a relevance log.
    Ingest {
        log: PathBuf,
        #[arg(long, default_value = "dcg", value_parser = parse_discount)]
        discount: DiscountSpec,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long, default_value = "auto", value_parser = parse_strategy)]
        strategy: Strategy,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Population and per-group summary of a relevance log.
    Aggregate {
        log: PathBuf,
        #[arg(long, default_value = "dcg", value_parser = parse_discount)]
        discount: DiscountSpec,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value = "auto", value_parser = parse_strategy)]
        strategy: Strategy,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<ScenarioKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_discount(s: &str) -> Result<DiscountSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_split(s: &str) -> Result<SplitSpec, String> {
    let mut cuts = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (b, o) = part
            .split_once(':')
            .ok_or_else(|| format!("split cut must be BLOCK:OFFSET, got `{part}`"))?;
        let b = b.trim().parse().map_err(|_| format!("bad block index in `{part}`"))?;
        let o = o.trim().parse().map_err(|_| format!("bad offset in `{part}`"))?;
        cuts.push((b, o));
    }
    Ok(SplitSpec::at(cuts))
}

/// Failure of a subcommand, mapped to an exit code.
enum Failure {
    Lib(Error),
    /// A self-check found disagreements.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            let code = match &e {
                Error::Validation(v) => {
                    eprintln!("error: invalid input");
                    for m in v {
                        eprintln!("  - {m}");
                    }
                    2
                }
                Error::ImpossibleSignal(_) | Error::Json(_) | Error::Csv(_) => {
                    eprintln!("error: {e}");
                    2
                }
                Error::Contract(_) => {
                    eprintln!("error: {e}");
                    3
                }
                Error::Io(_) => {
                    eprintln!("error: {e}");
                    1
                }
            };
            ExitCode::from(code)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn read_instance(path: &Path) -> Result<(Instance, String), Failure> {
    let text = fs::read_to_string(path)?;
    let instance = parse_instance(&text)?;
    let digest = instance_digest(&instance);
    Ok((instance, digest))
}

fn emit(output: &OutputArgs, bytes: &[u8]) -> CliResult {
    match &output.out {
        Some(p) => fs::write(p, bytes)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn report_bytes<T: Serialize>(kind: &str, digest: &str, body: T) -> Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    write_report_json(&Report::new(kind, digest, body), &mut buf)?;
    Ok(buf)
}

/// CSV with every float rendered by `render_f64`.
fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(Error::from)?;
    for r in rows {
        w.write_record(&r).map_err(Error::from)?;
    }
    w.into_inner().map_err(|e| Failure::Lib(Error::Io(e.into_error())))
}

#[derive(Serialize)]
struct SolveBody {
    lambda: f64,
    objective: f64,
    agent_value: f64,
    advocate_value: f64,
    strategy_used: Strategy,
    tie_broken: bool,
    block_order: Vec<usize>,
    ranking: Vec<String>,
}

#[derive(Serialize)]
struct ValidationBody {
    objects: usize,
    blocks: usize,
    types: usize,
    signals: usize,
    discount: DiscountSpec,
}

#[derive(Serialize)]
struct FrontierBody {
    #[serde(flatten)]
    frontier: pushpull::Frontier,
    critical_lambda: Option<f64>,
}

#[derive(Serialize)]
struct UserMetrics<'a> {
    user_id: &'a str,
    group_label: &'a str,
    #[serde(flatten)]
    metrics: pushpull::AgencyMetrics,
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Gen {
            kind,
            preset,
            objects,
            blocks,
            types,
            signals,
            seed,
            discount,
            output,
        } => {
            let mut spec = match preset {
                Some(p) => ScenarioSpec::preset(p, seed.unwrap_or(0)),
                None => {
                    let mut s = ScenarioSpec::new(kind, Dims::new(objects, blocks, types, signals), 0);
                    s.seed = seed;
                    s
                }
            };
            if let Some(d) = discount {
                spec = spec.with_discount(d);
            }
            let instance = generate(&spec)?;
            if output.summary {
                eprintln!(
                    "generated {} objects in {} blocks, {} types",
                    instance.size(),
                    instance.partition().block_count(),
                    instance.types().len()
                );
            }
            emit(&output, write_instance_json(&instance)?.as_bytes())
        }
        Command::Validate {
            input: Some(path),
            format,
            output,
            ..
        } => {
            let (instance, digest) = read_instance(&path)?;
            let body = ValidationBody {
                objects: instance.size(),
                blocks: instance.partition().block_count(),
                types: instance.types().len(),
                signals: instance.signal_model().map_or(0, |c| c.signals().len()),
                discount: instance.discount().spec().clone(),
            };
            if output.summary {
                eprintln!("valid: {} objects, {} blocks", body.objects, body.blocks);
            }
            let bytes = match format {
                Format::Json => report_bytes("validation", &digest, body)?,
                Format::Csv => csv_bytes(
                    &["objects", "blocks", "types", "signals", "discount"],
                    [vec![
                        body.objects.to_string(),
                        body.blocks.to_string(),
                        body.types.to_string(),
                        body.signals.to_string(),
                        body.discount.name().to_string(),
                    ]],
                )?,
            };
            emit(&output, &bytes)
        }
        Command::Validate {
            input: None,
            corpus,
            seed,
            format,
            output,
        } => {
            let count = corpus.expect("clap requires corpus without input");
            let checks = oracle_corpus(count, seed)?;
            let failed = checks.iter().filter(|c| !c.passed).count();
            let bytes = match format {
                Format::Json => report_bytes("corpus", &digest_bytes(format!("{count}:{seed}").as_bytes()), &checks)?,
                Format::Csv => csv_bytes(
                    &[
                        "index",
                        "seed",
                        "objects",
                        "blocks",
                        "discount",
                        "lambda",
                        "strategy",
                        "objective",
                        "oracle_objective",
                        "same_allocation",
                        "passed",
                    ],
                    checks.iter().map(|c| {
                        vec![
                            c.index.to_string(),
                            c.seed.to_string(),
                            c.objects.to_string(),
                            c.blocks.to_string(),
                            c.discount.clone(),
                            render_f64(c.lambda),
                            c.strategy.as_str().to_string(),
                            render_f64(c.objective),
                            render_f64(c.oracle_objective),
                            c.same_allocation.to_string(),
                            c.passed.to_string(),
                        ]
                    }),
                )?,
            };
            emit(&output, &bytes)?;
            if output.summary || failed > 0 {
                eprintln!("{} checks over {count} instances, {failed} failed", checks.len());
            }
            if failed > 0 {
                return Err(Failure::Check(format!(
                    "{failed} corpus checks disagree with the oracle"
                )));
            }
            Ok(())
        }
        Command::Solve {
            input,
            lambda,
            solver,
            output,
        } => {
            let (instance, digest) = read_instance(&input)?;
            let post = solver.posterior(&instance)?;
            let r = Evaluator::new(&instance, &post, solver.options())?.solve(lambda)?;
            let body = SolveBody {
                lambda,
                objective: r.objective,
                agent_value: r.agent_value,
                advocate_value: r.advocate_value,
                strategy_used: r.strategy_used,
                tie_broken: r.tie_broken,
                block_order: r.allocation.block_order().to_vec(),
                ranking: r
                    .allocation
                    .ranking()
                    .iter()
                    .map(|&x| instance.catalog().id(x).to_string())
                    .collect(),
            };
            if output.summary {
                eprintln!(
                    "objective {} (agent {}, advocate {}) via {}",
                    render_f64(body.objective),
                    render_f64(body.agent_value),
                    render_f64(body.advocate_value),
                    body.strategy_used.as_str()
                );
            }
            emit(&output, &report_bytes("solve", &digest, body)?)
        }
        Command::Frontier {
            input,
            grid,
            format,
            solver,
            output,
        } => {
            let (instance, digest) = read_instance(&input)?;
            let post = solver.posterior(&instance)?;
            let frontier = Evaluator::new(&instance, &post, solver.options())?.frontier(grid)?;
            let crit = critical_lambda(&frontier, pushpull::metrics::CRITICAL_JUMP_FRACTION);
            if output.summary {
                match crit {
                    Some(l) => eprintln!("{} points, critical lambda {}", frontier.points.len(), render_f64(l)),
                    None => eprintln!("{} points, no critical lambda", frontier.points.len()),
                }
            }
            let bytes = match format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_frontier_csv(&frontier, &mut buf)?;
                    buf
                }
                Format::Json => report_bytes(
                    "frontier",
                    &digest,
                    FrontierBody {
                        frontier,
                        critical_lambda: crit,
                    },
                )?,
            };
            emit(&output, &bytes)
        }
        Command::Metrics {
            input,
            lambda,
            solver,
            output,
        } => {
            let (instance, digest) = read_instance(&input)?;
            let post = solver.posterior(&instance)?;
            let m = Evaluator::new(&instance, &post, solver.options())?.metrics(lambda)?;
            if output.summary {
                eprintln!("pull {} push {}", render_f64(m.pull), render_f64(m.push));
            }
            emit(&output, &report_bytes("metrics", &digest, m)?)
        }
        Command::RefineCompare {
            input,
            split,
            grid,
            format,
            solver,
            output,
        } => {
            let (instance, digest) = read_instance(&input)?;
            let post = solver.posterior(&instance)?;
            let refined = match split {
                Some(s) => instance.partition().refine(&s)?,
                None => instance.partition().singletonize(),
            };
            let cmp = refine_compare(&instance, &refined, &post, grid, solver.options())?;
            if output.summary {
                let worst = cmp.points.iter().map(|p| p.delta).fold(f64::INFINITY, f64::min);
                eprintln!(
                    "{} blocks refined to {}, min delta {}",
                    instance.partition().block_count(),
                    refined.block_count(),
                    render_f64(worst)
                );
            }
            let bytes = match format {
                Format::Json => report_bytes("refine_compare", &digest, &cmp)?,
                Format::Csv => csv_bytes(
                    &["lambda", "coarse_objective", "refined_objective", "delta"],
                    cmp.points.iter().map(|p| {
                        vec![
                            render_f64(p.lambda),
                            render_f64(p.coarse_objective),
                            render_f64(p.refined_objective),
                            render_f64(p.delta),
                        ]
                    }),
                )?,
            };
            emit(&output, &bytes)
        }
        Command::NoiseSweep {
            input,
            epsilons,
            format,
            solver,
            output,
        } => {
            let (instance, digest) = read_instance(&input)?;
            if solver.signal.is_some() {
                return Err(Error::invalid("noise-sweep averages over all signals; --signal is not accepted").into());
            }
            let channel = instance
                .signal_model()
                .ok_or_else(|| Error::invalid("noise-sweep needs an instance with a signal_model"))?;
            let points = noise_sweep(&instance, channel, &epsilons, solver.options())?;
            if output.summary {
                eprintln!("{} noise levels", points.len());
            }
            let bytes = match format {
                Format::Json => report_bytes("noise_sweep", &digest, &points)?,
                Format::Csv => csv_bytes(
                    &["epsilon", "U_1", "V_0"],
                    points
                        .iter()
                        .map(|p| vec![render_f64(p.epsilon), render_f64(p.u_1), render_f64(p.v_0)]),
                )?,
            };
            emit(&output, &bytes)
        }
        Command::Ingest {
            log,
            discount,
            lambda,
            format,
            strategy,
            output,
        } => {
            let (users, digest) = ingest(&log, discount)?;
            let per_user = user_metrics(&users, lambda, strategy)?;
            if output.summary {
                eprintln!("{} users", per_user.len());
            }
            let bytes = match format {
                Format::Json => report_bytes("ingest", &digest, &per_user)?,
                Format::Csv => csv_bytes(
                    &[
                        "user_id",
                        "group_label",
                        "lambda",
                        "U_lambda",
                        "V_lambda",
                        "P_lambda",
                        "U_1",
                        "V_0",
                        "pull",
                        "push",
                        "degenerate_pull",
                        "degenerate_push",
                    ],
                    per_user.iter().map(|u| {
                        let m = &u.metrics;
                        vec![
                            u.user_id.to_string(),
                            u.group_label.to_string(),
                            render_f64(m.lambda),
                            render_f64(m.u_lambda),
                            render_f64(m.v_lambda),
                            render_f64(m.p_lambda),
                            render_f64(m.u_1),
                            render_f64(m.v_0),
                            render_f64(m.pull),
                            render_f64(m.push),
                            m.degenerate_pull.to_string(),
                            m.degenerate_push.to_string(),
                        ]
                    }),
                )?,
            };
            emit(&output, &bytes)
        }
        Command::Aggregate {
            log,
            discount,
            lambda,
            strategy,
            output,
        } => {
            let (users, digest) = ingest(&log, discount)?;
            let per_user = user_metrics(&users, lambda, strategy)?;
            let population: Vec<(String, pushpull::AgencyMetrics)> = per_user
                .into_iter()
                .map(|u| (u.group_label.to_string(), u.metrics))
                .collect();
            let summary = aggregate(&population)?;
            if output.summary {
                eprintln!(
                    "{} users, mean pull {}, mean push {}",
                    summary.overall.pull.count,
                    render_f64(summary.overall.pull.mean),
                    render_f64(summary.overall.push.mean)
                );
            }
            emit(&output, &report_bytes("summary", &digest, &summary)?)
        }
    }
}

fn ingest(path: &Path, discount: DiscountSpec) -> Result<(Vec<IngestedUser>, String), Failure> {
    let bytes = fs::read(path)?;
    let rows = read_relevance_log(bytes.as_slice())?;
    let users = ingest_relevance_log(&rows, &IngestOptions { discount })?;
    Ok((users, digest_bytes(&bytes)))
}

fn user_metrics(users: &[IngestedUser], lambda: f64, strategy: Strategy) -> Result<Vec<UserMetrics<'_>>, Failure> {
    let opts = SolveOptions {
        strategy,
        dp_limit: DEFAULT_DP_LIMIT,
    };
    users
        .iter()
        .map(|u| {
            let metrics = Evaluator::new(&u.instance, &u.posterior, opts)?.metrics(lambda)?;
            Ok(UserMetrics {
                user_id: &u.user_id,
                group_label: &u.group_label,
                metrics,
            })
        })
        .collect()
}
