use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use altdiff::altop::{
    build_operation, catalog, enumerate_canonical, validate_theta, ParallelOperation, ThetaSpec,
    TranslationGroup,
};
use altdiff::ddt::{ddt_circ, ddt_plus, Sbox};
use altdiff::homega::{
    count_parallel, count_s_minus_3, count_single_block, sample_parallel_with, HCount,
};
use altdiff::par::{init_threads, task_rng, Exec};
use altdiff::sboxclass::{
    all_105_operations, campaign_8bit, campaign_random_ops, classify_against, corpus,
    CAMPAIGN_CSV_HEADER,
};
use altdiff::spnlab::{records_to_csv, run_experiment, summarize, Estimator, ExperimentConfig};
use altdiff::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_SIZE: u8 = 4;

/// Desk-scale limits; larger runs need `--preset paper`.
const DESK_MAX_RANDOM_OPS: usize = 10_000;
const DESK_MAX_RUNS: usize = 200;
const DESK_MAX_KEYS: usize = 1 << 10;
const DESK_MAX_ROUNDS: usize = 12;

#[derive(Parser, Debug)]
#[command(
    name = "altdiff",
    version,
    about = "Differential cryptanalysis under alternative parallel operations"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "ALTDIFF_THREADS", default_value_t = 0)]
    threads: usize,
    /// Run on a single thread in a fixed order.
    #[arg(long, global = true)]
    sequential: bool,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Scale preset; `paper` lifts the size guards.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Preset {
    Desk,
    Paper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FlavorArg {
    Plus,
    Circ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    Markov,
    Montecarlo,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a defining matrix gives an operation.
    ThetaValidate { spec: PathBuf },
    /// List the canonical operations for (n, d).
    OpsEnumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Print only the count.
        #[arg(long)]
        count_only: bool,
    },
    /// Fingerprints of every operation on F2^4.
    OpsAll105 {
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Size of the group of linear maps that are also linear for the operation.
    HomegaCount {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        d: usize,
        /// Defining matrix of one block; defaults to b = (0, ..., 0, 1) when d = s - 2.
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Number of parallel blocks.
        #[arg(long, default_value_t = 1)]
        blocks: usize,
        /// Print the factor breakdown.
        #[arg(long, short)]
        verbose: bool,
    },
    /// Uniform samples for a parallel operation, as row-binary matrices.
    HomegaSample {
        #[arg(long)]
        s: usize,
        #[arg(long, default_value_t = 1)]
        blocks: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Defining matrix of one block (d = s - 2).
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Difference distribution table of an s-box.
    Ddt {
        /// Named s-box: gamma, g0..g15, aes, camellia, kuznyechik.
        #[arg(long, conflicts_with = "hex")]
        sbox: Option<String>,
        /// S-box as hex digits, one entry per ceil(s/4) digits.
        #[arg(long, requires = "bits")]
        hex: Option<String>,
        #[arg(long)]
        bits: Option<usize>,
        #[arg(long, value_enum, default_value_t = FlavorArg::Plus)]
        flavor: FlavorArg,
        /// Defining matrix of the operation for `circ`; defaults to b = (0, 1).
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Emit `a,b,count` rows instead of a grid.
        #[arg(long)]
        csv: bool,
    },
    /// Classify the optimal 4-bit classes against a set of operations.
    #[command(name = "classify-4bit")]
    Classify4bit {
        /// Comma-separated class indices; all 16 by default.
        #[arg(long, value_delimiter = ',')]
        classes: Option<Vec<usize>>,
        /// canonical | all105 | random:N:SEED
        #[arg(long, default_value = "all105")]
        ops: String,
        /// Count distinct composite tables instead of representative pairs.
        #[arg(long)]
        dedup: bool,
        /// Report differences from the reference table on stderr.
        #[arg(long)]
        compare: bool,
    },
    /// Uniformity spectrum of an 8-bit s-box over all canonical operations.
    #[command(name = "classify-8bit")]
    Classify8bit {
        /// aes, camellia, kuznyechik or all.
        #[arg(long, default_value = "all")]
        sbox: String,
        #[arg(long, value_delimiter = ',', default_value = "6")]
        d: Vec<usize>,
    },
    /// Uniformity spectrum over randomly drawn canonical operations.
    ClassifyRandom {
        #[arg(long)]
        sbox: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        count: usize,
    },
    /// Toy SPN experiment comparing best circ and xor differentials.
    SpnRun {
        #[arg(long)]
        runs: Option<usize>,
        /// Round range as LO..HI (inclusive).
        #[arg(long)]
        rounds: Option<String>,
        #[arg(long)]
        keys: Option<usize>,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Both)]
        estimator: EstimatorArg,
        /// Print per-run summaries on stderr.
        #[arg(long, short)]
        verbose: bool,
    },
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read_spec(path: &Path) -> CliResult<ThetaSpec> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(ThetaSpec::parse(&text)?)
}

fn named_sbox(name: &str) -> CliResult<Sbox> {
    let lower = name.to_ascii_lowercase();
    if let Some(i) = lower
        .strip_prefix('g')
        .and_then(|r| r.parse::<usize>().ok())
    {
        if i < 16 {
            return Ok(corpus::optimal_class(i));
        }
    }
    corpus::by_name(&lower).ok_or_else(|| Failure::Usage(format!("unknown s-box {name:?}")))
}

fn default_block_spec(s: usize, d: usize) -> CliResult<ThetaSpec> {
    if d + 2 != s {
        return Err(Failure::Usage(format!(
            "--spec is required when d != s - 2 (s = {s}, d = {d})"
        )));
    }
    Ok(ThetaSpec::single_vector(s, 1)?)
}

fn parse_range(text: &str) -> CliResult<(usize, usize)> {
    let bad = || Failure::Usage(format!("expected LO..HI, got {text:?}"));
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let lo = lo.trim().parse().map_err(|_| bad())?;
    let hi = hi
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| bad())?;
    Ok((lo, hi))
}

fn size_guard(
    what: &'static str,
    requested: usize,
    limit: usize,
    preset: Option<Preset>,
) -> CliResult<()> {
    if requested > limit && preset != Some(Preset::Paper) {
        return Err(Failure::Domain(Error::SizeTooLarge {
            what,
            requested: requested as u64,
            limit: limit as u64,
        }));
    }
    Ok(())
}

fn describe_count(c: &HCount) -> String {
    format!(
        "permutations: {}\nA choices: {}\nB choices: {}\nD choices: {}\ntotal: {}\n",
        c.permutations, c.a_choices, c.b_choices, c.d_choices, c.total
    )
}

fn operation_set(ops: &str) -> CliResult<Vec<TranslationGroup>> {
    let parts: Vec<&str> = ops.split(':').collect();
    match parts.as_slice() {
        ["all105"] => Ok(all_105_operations()?),
        ["canonical"] => enumerate_canonical(4, 2)?
            .map(|spec| Ok(TranslationGroup::from_operation(&build_operation(&spec)?)?))
            .collect(),
        ["random", count, seed] => {
            let bad = || Failure::Usage(format!("bad operation set {ops:?}"));
            let count: usize = count.parse().map_err(|_| bad())?;
            let seed: u64 = seed.parse().map_err(|_| bad())?;
            let all = all_105_operations()?;
            let mut rng = task_rng(seed, 0, 0);
            Ok((0..count)
                .map(|_| all[rng.gen_range(0..all.len())].clone())
                .collect())
        }
        _ => Err(Failure::Usage(format!(
            "unknown operation set {ops:?}; use canonical, all105 or random:N:SEED"
        ))),
    }
}

fn run(cli: Cli) -> CliResult<String> {
    let g = &cli.global;
    let exec = if g.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    };
    match &cli.command {
        Command::ThetaValidate { spec } => {
            let spec = read_spec(spec)?;
            let report = validate_theta(&spec)?;
            if report.valid {
                return Ok("valid\n".to_string());
            }
            let cols = report
                .violating_columns
                .unwrap_or_default()
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",");
            Err(Failure::Domain(Error::InvalidSpec(format!(
                "columns {{{cols}}} sum to zero (kernel dimension {})",
                report.kernel_dim
            ))))
        }
        Command::OpsEnumerate { n, d, count_only } => {
            let specs = enumerate_canonical(*n, *d)?;
            if *count_only {
                return Ok(format!("{}\n", specs.count()));
            }
            Ok(specs.map(|s| s.render() + "\n").collect())
        }
        Command::OpsAll105 { n } => {
            if *n != 4 {
                return Err(Failure::Domain(Error::WrongRegime(format!(
                    "operation listing is available for n = 4 only, got {n}"
                ))));
            }
            Ok(all_105_operations()?
                .iter()
                .map(|t| t.fingerprint() + "\n")
                .collect())
        }
        Command::HomegaCount {
            s,
            d,
            spec,
            blocks,
            verbose,
        } => {
            let spec = match spec {
                Some(p) => read_spec(p)?,
                None => default_block_spec(*s, *d)?,
            };
            if spec.n() != *s || spec.d() != *d {
                return Err(Failure::Usage(format!(
                    "spec has n = {}, d = {}, flags say s = {s}, d = {d}",
                    spec.n(),
                    spec.d()
                )));
            }
            let op = build_operation(&spec)?;
            let (count, extra) = if *blocks > 1 {
                if *d + 2 != *s {
                    return Err(Failure::Domain(Error::WrongRegime(
                        "parallel counts need d = s - 2".into(),
                    )));
                }
                (count_parallel(*s, *blocks)?, String::new())
            } else if *d + 2 == *s {
                (count_single_block(&op)?, String::new())
            } else {
                let (c, distinct_d) = count_s_minus_3(&op)?;
                (c, format!("distinct D: {distinct_d}\n"))
            };
            if *verbose {
                Ok(describe_count(&count) + &extra)
            } else {
                Ok(format!("{}\n", count.total))
            }
        }
        Command::HomegaSample {
            s,
            blocks,
            count,
            spec,
        } => {
            let spec = match spec {
                Some(p) => read_spec(p)?,
                None => default_block_spec(*s, s.saturating_sub(2))?,
            };
            let op = ParallelOperation::uniform(&build_operation(&spec)?, *blocks)?;
            size_guard("sample count", *count, 100_000, g.preset)?;
            let mut out = String::new();
            for i in 0..*count {
                let m = sample_parallel_with(&op, &mut task_rng(g.seed, 0, i as u64))?;
                out.push_str(&m.matrix.render());
                out.push('\n');
            }
            Ok(out)
        }
        Command::Ddt {
            sbox,
            hex,
            bits,
            flavor,
            spec,
            csv,
        } => {
            let f = match (sbox, hex) {
                (Some(name), _) => named_sbox(name)?,
                (None, Some(h)) => Sbox::parse_hex(bits.unwrap_or(4), h)?,
                (None, None) => return Err(Failure::Usage("give --sbox or --hex".into())),
            };
            let table = match flavor {
                FlavorArg::Plus => ddt_plus(&f),
                FlavorArg::Circ => {
                    let spec = match spec {
                        Some(p) => read_spec(p)?,
                        None if f.width() == 4 => catalog::b01(),
                        None => default_block_spec(f.width(), f.width() - 2)?,
                    };
                    ddt_circ(&f, &build_operation(&spec)?)?
                }
            };
            if *csv {
                Ok(table.to_csv())
            } else {
                Ok(format!(
                    "{}uniformity: {}\n",
                    table.render_grid(),
                    table.uniformity()
                ))
            }
        }
        Command::Classify4bit {
            classes,
            ops,
            dedup,
            compare,
        } => {
            let classes = classes.clone().unwrap_or_else(|| (0..16).collect());
            if let Some(c) = classes.iter().find(|&&c| c >= 16) {
                return Err(Failure::Usage(format!("class index {c} is outside 0..16")));
            }
            let operations = operation_set(ops)?;
            let report = classify_against(&operations, &classes, *dedup, exec)?;
            if *compare {
                for c in &report.classes {
                    eprintln!(
                        "G{}: row total {} over {} operations, identical across operations: {}",
                        c.class_index,
                        report.row_total(c.class_index),
                        report.operations,
                        c.uniform_across_operations
                    );
                }
                for (class, computed, reference) in report.support_mismatches() {
                    eprintln!("G{class}: support {computed:?}, reference {reference:?}");
                }
                for diff in report.differences() {
                    eprintln!(
                        "G{} at {}: computed {}, reference {}",
                        diff.class_index, diff.uniformity, diff.computed, diff.reference
                    );
                }
            }
            Ok(report.to_csv())
        }
        Command::Classify8bit { sbox, d } => {
            let names: Vec<&str> = if sbox == "all" {
                vec!["aes", "camellia", "kuznyechik"]
            } else {
                sbox.split(',').collect()
            };
            let mut out = format!("{CAMPAIGN_CSV_HEADER}\n");
            for name in names {
                let f = named_sbox(name)?;
                for &dd in d {
                    out.push_str(&campaign_8bit(name, &f, dd, exec)?.csv_rows());
                }
            }
            Ok(out)
        }
        Command::ClassifyRandom { sbox, d, count } => {
            size_guard(
                "random operation count",
                *count,
                DESK_MAX_RANDOM_OPS,
                g.preset,
            )?;
            let f = named_sbox(sbox)?;
            let campaign = campaign_random_ops(sbox, &f, *d, *count, g.seed, exec)?;
            Ok(format!("{CAMPAIGN_CSV_HEADER}\n{}", campaign.csv_rows()))
        }
        Command::SpnRun {
            runs,
            rounds,
            keys,
            estimator,
            verbose,
        } => {
            let mut config = match g.preset {
                Some(Preset::Paper) => ExperimentConfig::paper(g.seed),
                _ => ExperimentConfig::desk(g.seed),
            };
            if let Some(r) = runs {
                config.runs = *r;
            }
            if let Some(k) = keys {
                config.keys = *k;
            }
            if let Some(text) = rounds {
                let (lo, hi) = parse_range(text)?;
                if lo > hi {
                    return Err(Failure::Usage(format!("empty round range {text:?}")));
                }
                config.rounds_lo = lo;
                config.rounds_hi = hi;
            }
            config.estimators = match estimator {
                EstimatorArg::Markov => vec![Estimator::Markov],
                EstimatorArg::Montecarlo => vec![Estimator::MonteCarlo],
                EstimatorArg::Both => vec![Estimator::Markov, Estimator::MonteCarlo],
            };
            size_guard("runs", config.runs, DESK_MAX_RUNS, g.preset)?;
            size_guard("keys", config.keys, DESK_MAX_KEYS, g.preset)?;
            size_guard("rounds", config.rounds_hi, DESK_MAX_ROUNDS, g.preset)?;
            let records = run_experiment(&config, exec)?;
            if *verbose {
                for s in summarize(&records) {
                    eprintln!(
                        "run {} rounds {} {}: -log2 p_circ {:.3}, gap {:.3}",
                        s.run,
                        s.rounds,
                        s.estimator.name(),
                        -s.best_circ.log2(),
                        s.gap()
                    );
                }
            }
            Ok(records_to_csv(&records))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.global.threads > 0 {
        init_threads(cli.global.threads);
    }
    let out_path = cli.global.out.clone();
    match run(cli) {
        Ok(text) => {
            let written = match &out_path {
                Some(p) => fs::write(p, text.as_bytes()),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_USAGE)
                }
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            if e.is_size_guard() {
                ExitCode::from(EXIT_SIZE)
            } else {
                ExitCode::from(EXIT_DOMAIN)
            }
        }
    }
}
