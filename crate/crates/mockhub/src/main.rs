use std::path::PathBuf;

use clap::Parser;
use pesto_mockhub::{Fixtures, MockHub, MockState};

/// Serve fixture repositories through a GitHub-shaped API for local testing.
#[derive(Parser)]
#[command(name = "pesto-mockhub", version)]
struct Args {
    /// Fixture JSON file; defaults to the bundled three-repository set.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    #[arg(long, default_value_t = 8040)]
    port: u16,
    /// Reject requests that do not carry this bearer token.
    #[arg(long)]
    token: Option<String>,
}

fn main() {
    let args = Args::parse();
    let fixtures = match &args.fixtures {
        Some(path) => {
            let text = std::fs::read_to_string(path).unwrap_or_else(|e| {
                eprintln!("error: cannot read {}: {e}", path.display());
                std::process::exit(1);
            });
            Fixtures::from_json(&text).unwrap_or_else(|e| {
                eprintln!("error: invalid fixtures {}: {e}", path.display());
                std::process::exit(1);
            })
        }
        None => Fixtures::three_repos(),
    };
    let hub = MockHub::spawn_on(MockState::new(fixtures, args.token), args.port).unwrap_or_else(|e| {
        eprintln!("error: cannot bind port {}: {e}", args.port);
        std::process::exit(1);
    });
    println!("mock GitHub API listening on {}", hub.base_url());
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().expect("runtime");
    rt.block_on(async {
        let _ = tokio::signal::ctrl_c().await;
    });
}
