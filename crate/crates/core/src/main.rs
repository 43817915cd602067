use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use untilt::report::{emit, parse_config_file, run_suite, RunConfig, Suite};
use untilt::{Error, Result};

#[derive(Parser)]
#[command(name = "untilt", version, about = "Exact checks for theta values, untilts and the ring B")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Theta quasi-periodicity, zeros and value ratios.
    ThetaCheck,
    /// Valuation profile of an ansatz point.
    Ansatz {
        /// t, t^{e}, special or canonical.
        #[arg(long)]
        base: Option<String>,
    },
    /// Pilot-sum lower bound and trivial upper bound.
    PilotBound {
        /// Also compute the verdict table for ℓ ∈ {3, 5, 7, 11, 13}.
        #[arg(long)]
        table: bool,
    },
    /// Witt vector ghost-map self test.
    WittSelftest,
    /// Artin-Hasse, formal group and log-link checks.
    LoglinkCheck {
        /// Power series truncation degree D.
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Every suite.
    All,
}

#[derive(Args)]
struct Common {
    #[arg(long, global = true)]
    p: Option<u64>,
    #[arg(long, global = true)]
    ell: Option<u32>,
    /// v(q), a positive rational.
    #[arg(long, global = true)]
    vq: Option<String>,
    /// Theta truncation order T (default 24ℓ).
    #[arg(long, global = true)]
    order: Option<i64>,
    /// Comma-separated exponents r with ρ = p^{-r}.
    #[arg(long = "rho-grid", global = true)]
    rho_grid: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long = "witt-len", global = true)]
    witt_len: Option<usize>,
    #[arg(long = "hahn-cap", global = true)]
    hahn_cap: Option<String>,
    #[arg(long = "field-degree", global = true)]
    field_degree: Option<usize>,
    /// json, text or csv.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Omit run-dependent fields so output is byte-stable.
    #[arg(long, global = true)]
    canonical: bool,
    /// key=value file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

fn flag_settings(cli: &Cli) -> BTreeMap<String, String> {
    let c = &cli.common;
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            m.insert(k.to_string(), v);
        }
    };
    put("p", c.p.map(|x| x.to_string()));
    put("ell", c.ell.map(|x| x.to_string()));
    put("vq", c.vq.clone());
    put("order", c.order.map(|x| x.to_string()));
    put("rho-grid", c.rho_grid.clone());
    put("seed", c.seed.map(|x| x.to_string()));
    put("witt-len", c.witt_len.map(|x| x.to_string()));
    put("hahn-cap", c.hahn_cap.clone());
    put("field-degree", c.field_degree.map(|x| x.to_string()));
    put("format", c.format.clone());
    put("canonical", c.canonical.then(|| "true".into()));
    match &cli.command {
        Command::Ansatz { base } => put("base", base.clone()),
        Command::PilotBound { table } => put("table", table.then(|| "true".into())),
        Command::LoglinkCheck { degree } => put("degree", degree.map(|x| x.to_string())),
        _ => {}
    }
    m
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut settings = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    settings.extend(flag_settings(cli));
    let num = |k: &str| settings.get(k).map(|v| v.parse::<u64>().map_err(|_| Error::Usage(format!("bad value {v:?} for {k}"))));
    let p = num("p").transpose()?.unwrap_or(2);
    let ell = num("ell").transpose()?.unwrap_or(5);
    let ell = u32::try_from(ell).map_err(|_| Error::Usage(format!("ℓ = {ell} is too large")))?;
    let mut cfg = RunConfig::default_for(p, ell);
    cfg.apply(&settings)?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let suite = match cli.command {
        Command::ThetaCheck => Suite::ThetaCheck,
        Command::Ansatz { .. } => Suite::Ansatz,
        Command::PilotBound { .. } => Suite::PilotBound,
        Command::WittSelftest => Suite::WittSelftest,
        Command::LoglinkCheck { .. } => Suite::LoglinkCheck,
        Command::All => Suite::All,
    };
    let result = build_config(&cli).and_then(|cfg| Ok((run_suite(suite, &cfg)?, cfg.format)));
    match result {
        Ok((report, format)) => {
            print!("{}", emit(&report, format));
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e @ Error::Usage(_)) => {
            eprintln!("untilt: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("untilt: {e}");
            ExitCode::from(1)
        }
    }
}
