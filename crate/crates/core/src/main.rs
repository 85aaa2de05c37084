use clap::Parser;
use walklab::cli::{run, Cli};

fn main() {
    if let Some(n) = std::env::var("WALKLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // ignore failure: the pool can only be configured once
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}
