//! `pesto` subcommands. Exit codes: 0 success, 1 fatal or usage error,
//! 2 crawl finished with some repositories failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pesto_core::{Dataset, EvaluationModel};

use crate::compare::{compare, render_csv, render_table, CompareRequest};
use crate::crawler::{self, CrawlReport};
use crate::github::{validate_star_range, ApiCredentials, ClientConfig, GithubClient};
use crate::server::{self, ServerState, DEFAULT_PORT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FATAL: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pesto", version, about = "Evaluate open-source candidates from their GitHub activity")]
pub struct Cli {
    /// Log progress and show full error details
    #[arg(short, long, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Crawl repositories into the CSV dataset
    Crawl(CrawlArgs),
    /// List repositories in a star range (nothing is crawled)
    Discover(DiscoverArgs),
    /// Re-crawl every repository already in a dataset
    Recrawl(RecrawlArgs),
    /// Score a dataset under an evaluation model
    Compare(CompareArgs),
    /// Serve the JSON API and static UI files
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CompareFormat {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    /// GitHub token (defaults to $GITHUB_TOKEN)
    #[arg(long)]
    pub token: Option<String>,
    /// Newest issues sampled per repository
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub max_issues: Option<u64>,
    /// Request budget for the whole session
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub max_requests: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CrawlArgs {
    /// Repository as owner/name; repeatable
    #[arg(long = "repo", value_name = "OWNER/NAME", num_args = 1..)]
    pub repos: Vec<String>,
    /// File with one owner/name per line ('#' starts a comment)
    #[arg(long, value_name = "PATH")]
    pub from_file: Option<PathBuf>,
    #[arg(long, default_value = "data.csv")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: ReportFormat,
    #[command(flatten)]
    pub session: SessionArgs,
}

#[derive(Debug, Args)]
pub struct DiscoverArgs {
    /// Star range MIN..MAX, or MIN.. for no upper bound
    #[arg(long, value_name = "MIN..MAX", value_parser = parse_star_range)]
    pub stars: (u64, Option<u64>),
    #[arg(long, default_value_t = 100)]
    pub limit: usize,
    #[command(flatten)]
    pub session: SessionArgs,
}

#[derive(Debug, Args)]
pub struct RecrawlArgs {
    #[arg(long, default_value = "data.csv")]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    pub format: ReportFormat,
    #[command(flatten)]
    pub session: SessionArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, default_value = "data.csv")]
    pub data: PathBuf,
    /// Evaluation model; the bundled OSSPAL model when omitted
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Only this category
    #[arg(long)]
    pub category: Option<String>,
    /// Comma-separated subset of candidates to compare
    #[arg(long, value_name = "OWNER/NAME,...")]
    pub candidates: Option<String>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: CompareFormat,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "data.csv")]
    pub data: PathBuf,
    /// Created on the first config edit; the bundled OSSPAL model until then
    #[arg(long, default_value = "config.json")]
    pub config: PathBuf,
    #[arg(long, default_value_t = DEFAULT_PORT)]
    pub port: u16,
    /// Directory of static UI files served under /
    #[arg(long = "static", value_name = "DIR")]
    pub static_dir: Option<PathBuf>,
}

pub fn parse_star_range(s: &str) -> Result<(u64, Option<u64>), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected MIN..MAX or MIN.., got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("not a star count: {t:?}"));
    let min = num(lo)?;
    let max = match hi.trim() {
        "" | "*" => None,
        t => Some(num(t)?),
    };
    Ok((min, max))
}

/// A failure that ends the process with exit code 1.
struct Fatal {
    message: String,
    detail: Option<String>,
}

impl<E: std::error::Error> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal {
            message: e.to_string(),
            detail: Some(format!("{e:?}")),
        }
    }
}

fn fatal(message: impl Into<String>) -> Fatal {
    Fatal {
        message: message.into(),
        detail: None,
    }
}

fn runtime() -> tokio::runtime::Runtime {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .expect("tokio runtime")
}

fn client(session: &SessionArgs) -> Result<GithubClient, Fatal> {
    let creds = ApiCredentials::resolve(session.token.clone())?;
    let mut config = ClientConfig::from_env();
    if let Some(n) = session.max_issues {
        config.budget.max_issue_sample = n;
    }
    if let Some(n) = session.max_requests {
        config.budget.max_requests = n;
    }
    Ok(GithubClient::new(creds, config)?)
}

fn read_repo_file(path: &Path) -> Result<Vec<String>, Fatal> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| fatal(format!("cannot read {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

fn print_report(report: &CrawlReport, format: ReportFormat) -> i32 {
    let text = match format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Json => report.to_json(),
    };
    print!("{text}");
    if report.all_ok() {
        EXIT_OK
    } else {
        EXIT_PARTIAL
    }
}


fn cmd_crawl(args: CrawlArgs) -> Result<i32, Fatal> {
    let mut repos = args.repos.clone();
    if let Some(f) = &args.from_file {
        repos.extend(read_repo_file(f)?);
    }
    if repos.is_empty() {
        return Err(fatal("no repositories given: pass --repo OWNER/NAME or --from-file PATH"));
    }
    let client = client(&args.session)?;
    let report = runtime()
        .block_on(crawler::crawl_candidates(&client, &repos, &args.out))
        ?;
    Ok(print_report(&report, args.format))
}

fn cmd_discover(args: DiscoverArgs) -> Result<i32, Fatal> {
    let (min, max) = args.stars;
    validate_star_range(min, max, args.limit)?;
    let client = client(&args.session)?;
    let repos = runtime().block_on(crawler::discover_by_stars(&client, min, max, args.limit))?;
    let mut out = std::io::stdout().lock();
    for r in repos {
        writeln!(out, "{r}").map_err(|e| fatal(e.to_string()))?;
    }
    Ok(EXIT_OK)
}

fn cmd_recrawl(args: RecrawlArgs) -> Result<i32, Fatal> {
    if !args.data.exists() {
        return Err(fatal(format!("dataset {} does not exist", args.data.display())));
    }
    let client = client(&args.session)?;
    let report = runtime()
        .block_on(crawler::recrawl(&client, &args.data))
        ?;
    Ok(print_report(&report, args.format))
}

fn cmd_compare(args: CompareArgs) -> Result<i32, Fatal> {
    let dataset = Dataset::read_csv(&args.data)?;
    let model = match &args.config {
        Some(p) => EvaluationModel::load(p)?,
        None => EvaluationModel::osspal(),
    };
    let req = CompareRequest {
        category: args.category.clone(),
        candidates: args
            .candidates
            .as_deref()
            .and_then(|c| CompareRequest::parse_candidates([c])),
    };
    let result = compare(&model, &dataset, &req)?;
    let text = match args.format {
        CompareFormat::Table => render_table(&result),
        CompareFormat::Json => result.to_json(),
        CompareFormat::Csv => render_csv(&result),
    };
    print!("{text}");
    Ok(EXIT_OK)
}

fn cmd_serve(args: ServeArgs) -> Result<i32, Fatal> {
    if let Some(dir) = &args.static_dir {
        if !dir.is_dir() {
            return Err(fatal(format!("static directory {} does not exist", dir.display())));
        }
    }
    let state = Arc::new(ServerState::load(&args.data, &args.config)?);
    runtime().block_on(async {
        let listener = server::bind(args.port).await?;
        let addr = listener.local_addr()?;
        eprintln!(
            "serving {} rows under model {:?} on http://{addr}",
            state.snapshot().dataset.len(),
            state.snapshot().model.model_name
        );
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        server::serve(listener, state, args.static_dir.as_deref(), shutdown).await?;
        Ok::<_, Fatal>(EXIT_OK)
    })
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_FATAL } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = if cli.verbose { "debug" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();

    let result = match cli.command {
        Command::Crawl(a) => cmd_crawl(a),
        Command::Discover(a) => cmd_discover(a),
        Command::Recrawl(a) => cmd_recrawl(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message.replace('\n', " "));
            if cli.verbose {
                if let Some(d) = f.detail {
                    eprintln!("{d}");
                }
            }
            EXIT_FATAL
        }
    }
}
