use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cookiezeta_cli::{execute, Command, Paths, RunConfig};

const COLUMNS: &str = "\
CSV columns (values with 17 significant digits; each file starts with
'# config_hash: <sha256>' and other '# key: value' lines):
  dim        depth, delta                 Bowen root of P(-s log|T'|) at depths 1..m
  pressure   depth, pressure, lambda, residual, truncation_error
  tau        q, tau_pressure, tau_partition, duality_sum
             tau_pressure solves P(T phi + q psi) = 0; tau_partition is the
             box-counting limit of log S_eps(q) / log eps
  spectrum   alpha, xi, delta, derivative (unsolved alphas listed in the summary)
  zeta       zeta.csv: sigma, partial, tail, total
             zeta_hits.csv: level, hits
  growth     sigma, offset, zeta, partial, tail   (fit of zeta ~ c (sigma - delta_alpha)^-kappa)
  verify     check, value, bound, passed
             check: 0 csv_config_hash, 1 pressure_shift, 2 pressure_monotone,
             3 bowen_root, 4 gibbs_normalization, 5 variational_inequality,
             6 birkhoff_additivity, 7 depth_truncation, 8 zeta_monotonicity

Every run also writes <command>.summary.json.
Exit codes: 0 success, 2 invalid config or input, 3 numerical failure, 1 I/O error.";

#[derive(Debug, Parser)]
#[command(name = "cookiezeta", version, about = "Thermodynamic formalism and multifractal zeta functions for cookie-cutter maps", after_help = COLUMNS)]
struct Args {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `out`, else ./cookiezeta-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Level cache directory.
    #[arg(long, env = "COOKIEZETA_CACHE")]
    cache: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = RunConfig::load(&args.config).and_then(|config| {
        let paths = Paths::resolve(&config, args.out, args.cache);
        execute(args.command, &config, &paths).map(|out| (out, paths))
    });
    match result {
        Ok((_, paths)) => {
            println!("wrote {}", paths.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
