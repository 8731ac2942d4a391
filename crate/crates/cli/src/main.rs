use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use claimscope_core::{corpus_stats, generate_synthetic, load_corpus, write_corpus, Corpus, DatasetStats, SyntheticParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod analyze;
mod config;
mod run;

use config::RunConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Md,
}

#[derive(Parser)]
#[command(name = "claimscope", version, about = "Cross-domain claim identification experiments")]
struct Cli {
    /// Global seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory; overrides the config's `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format of tables printed to stdout.
    #[arg(long, global = true, value_enum, default_value = "md")]
    format: Format,
    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a corpus file, report its statistics and annotation coverage.
    Validate { corpus: PathBuf },
    /// Print dataset statistics for one or more corpora.
    Stats {
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
    },
    /// Run every protocol x system job of a config.
    Run {
        config: PathBuf,
        /// Recompute jobs even when a matching result file exists.
        #[arg(long)]
        fresh: bool,
    },
    /// Similarity matrix, cross-domain regression and significance tests.
    Analyze { results: PathBuf, config: PathBuf },
    /// Write a planted-cue synthetic corpus (and optionally a matching
    /// random embedding table).
    GenSynthetic {
        /// TOML file with any of seed, n_docs, claim_ratio, vocab_size, cue_strength.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        n_docs: Option<usize>,
        #[arg(long)]
        claim_ratio: Option<f64>,
        #[arg(long)]
        vocab_size: Option<usize>,
        #[arg(long)]
        cue_strength: Option<f64>,
        /// Also write `<name>.vectors.txt` with this dimensionality.
        #[arg(long)]
        embedding_dim: Option<usize>,
    },
}

fn stats_header(format: Format) -> String {
    match format {
        Format::Csv => "corpus,documents,tokens,sentences,claims,claim_ratio_pct".into(),
        Format::Md => "| Corpus | #Docs | #Tokens | #Sentences | #Claims | Claim ratio |\n|---|---:|---:|---:|---:|---:|".into(),
    }
}

fn stats_row(name: &str, s: &DatasetStats, format: Format) -> String {
    let pct = s.claim_ratio * 100.0;
    match format {
        Format::Csv => format!("{name},{},{},{},{},{pct:.2}", s.n_docs, s.n_tokens, s.n_sentences, s.n_claims),
        Format::Md => format!(
            "| {name} | {} | {} | {} | {} | {pct:.2}% |",
            thousands(s.n_docs),
            thousands(s.n_tokens),
            thousands(s.n_sentences),
            thousands(s.n_claims)
        ),
    }
}

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn coverage(corpus: &Corpus) -> String {
    let (mut pos, mut prod, mut disc, mut lemma, mut n) = (0, 0, 0, 0, 0);
    for s in corpus.sentences() {
        n += 1;
        pos += usize::from(s.tokens.iter().all(|t| t.pos.is_some()));
        lemma += usize::from(s.tokens.iter().all(|t| t.lemma.is_some()));
        prod += usize::from(s.syntax_productions.is_some());
        disc += usize::from(s.discourse_relations.is_some());
    }
    format!("annotation coverage over {n} sentences: pos {pos}, lemma {lemma}, productions {prod}, discourse {disc}")
}

fn cmd_validate(path: &Path, format: Format) -> Result<ExitCode> {
    match load_corpus(path) {
        Ok(c) => {
            println!("{}", stats_header(format));
            println!("{}", stats_row(&c.name, &corpus_stats(&c), format));
            eprintln!("{}", coverage(&c));
            Ok(ExitCode::SUCCESS)
        }
        Err(e) => {
            eprintln!("invalid corpus {}: {e}", path.display());
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_stats(paths: &[PathBuf], format: Format) -> Result<ExitCode> {
    println!("{}", stats_header(format));
    for p in paths {
        let c = load_corpus(p).with_context(|| format!("loading {}", p.display()))?;
        println!("{}", stats_row(&c.name, &corpus_stats(&c), format));
    }
    Ok(ExitCode::SUCCESS)
}

fn load_config(path: &Path, cli: &Cli) -> Result<RunConfig> {
    let mut config = RunConfig::load(path)?;
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(o) = &cli.out {
        config.out = o.clone();
    }
    Ok(config)
}

fn cmd_run(path: &Path, fresh: bool, cli: &Cli) -> Result<ExitCode> {
    let config = load_config(path, cli)?;
    let summary = run::run(&config, fresh)?;
    eprintln!(
        "{} result rows written to {} ({} jobs reused)",
        summary.rows.len(),
        summary.out.join("results.csv").display(),
        summary.reused
    );
    if cli.format == Format::Md {
        print!("{}", claimscope_core::evaluation::report::markdown_tables(&summary.rows));
    } else {
        let mut buf = Vec::new();
        claimscope_core::evaluation::report::write_results(&summary.rows, &mut buf)?;
        std::io::stdout().write_all(&buf)?;
    }
    if summary.failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for (id, e) in &summary.failed {
            eprintln!("FAILED {id}: {e}");
        }
        Ok(ExitCode::FAILURE)
    }
}

fn cmd_analyze(results: &Path, config_path: &Path, cli: &Cli) -> Result<ExitCode> {
    let config = load_config(config_path, cli)?;
    let rows = analyze::read_results_file(results)?;
    let corpora = run::load_config_corpora(&config)?;
    let analysis = analyze::analyze(&rows, &corpora, &config)?;
    let out = cli.out.clone().unwrap_or_else(|| results.parent().unwrap_or(Path::new(".")).to_path_buf());
    analyze::write_analysis(&analysis, &out)?;
    match cli.format {
        Format::Md => print!("{}", analysis.similarity.to_markdown()),
        Format::Csv => print!("{}", analysis.similarity.to_csv()),
    }
    for (system, fit) in &analysis.regressions {
        let terms: Vec<String> = fit
            .coefficients
            .iter()
            .filter(|c| !c.estimate.is_nan())
            .map(|c| format!("{}={:.3} (p={:.3})", c.name, c.estimate, c.p_value))
            .collect();
        println!("{system}: R^2={:.3} {}", fit.r_squared, terms.join(" "));
    }
    for s in &analysis.significance {
        println!(
            "{} vs {} [{} {} by {}]: p={:.4}{}",
            s.system_a,
            s.system_b,
            s.protocol,
            s.metric,
            s.pairing,
            s.p_value,
            if s.significant { " significant" } else { "" }
        );
    }
    eprintln!("analysis written to {}", out.display());
    Ok(ExitCode::SUCCESS)
}

/// Uniform random vectors for every distinct lowercased token of `corpus`.
fn synthetic_embeddings(corpus: &Corpus, dim: usize, seed: u64) -> String {
    let vocab: std::collections::BTreeSet<String> = corpus.sentences().flat_map(|s| s.tokens.iter().map(|t| t.lower())).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(claimscope_core::seed::derive_str(seed, "embeddings"));
    let mut out = format!("{} {dim}\n", vocab.len());
    for w in vocab {
        out.push_str(&w);
        for _ in 0..dim {
            out.push_str(&format!(" {:.6}", rng.random_range(-1.0..1.0)));
        }
        out.push('\n');
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen_synthetic(
    params_file: Option<&Path>,
    n_docs: Option<usize>,
    claim_ratio: Option<f64>,
    vocab_size: Option<usize>,
    cue_strength: Option<f64>,
    embedding_dim: Option<usize>,
    cli: &Cli,
) -> Result<ExitCode> {
    let mut params = match params_file {
        Some(p) => toml::from_str::<SyntheticParams>(&fs::read_to_string(p)?).with_context(|| format!("in {}", p.display()))?,
        None => SyntheticParams::default(),
    };
    if let Some(s) = cli.seed {
        params.seed = s;
    }
    params.n_docs = n_docs.unwrap_or(params.n_docs);
    params.claim_ratio = claim_ratio.unwrap_or(params.claim_ratio);
    params.vocab_size = vocab_size.unwrap_or(params.vocab_size);
    params.cue_strength = cue_strength.unwrap_or(params.cue_strength);
    let corpus = generate_synthetic(&params)?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out)?;
    let path = out.join(format!("{}.jsonl", corpus.name));
    let mut file = std::io::BufWriter::new(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    write_corpus(&corpus, &mut file)?;
    file.flush()?;
    eprintln!("wrote {}", path.display());
    if let Some(dim) = embedding_dim {
        let epath = out.join(format!("{}.vectors.txt", corpus.name));
        fs::write(&epath, synthetic_embeddings(&corpus, dim, params.seed))?;
        eprintln!("wrote {}", epath.display());
    }
    println!("{}", stats_header(cli.format));
    println!("{}", stats_row(&corpus.name, &corpus_stats(&corpus), cli.format));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: cannot size worker pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::Validate { corpus } => cmd_validate(corpus, cli.format),
        Command::Stats { corpora } => cmd_stats(corpora, cli.format),
        Command::Run { config, fresh } => cmd_run(config, *fresh, &cli),
        Command::Analyze { results, config } => cmd_analyze(results, config, &cli),
        Command::GenSynthetic { params, n_docs, claim_ratio, vocab_size, cue_strength, embedding_dim } => {
            cmd_gen_synthetic(params.as_deref(), *n_docs, *claim_ratio, *vocab_size, *cue_strength, *embedding_dim, &cli)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
