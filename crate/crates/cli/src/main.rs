use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qcrank_core::scan::{
    self, derive_pairing, derive_paths, derive_summary, read_records, render_summary_markdown, write_csv, ScanConfig,
};
use qcrank_core::{Result, Species};

#[derive(Parser)]
#[command(name = "qcrank", version, about = "Cranked Nilsson + pairing Routhians: VQE, cranked BCS and exact references")]
struct Cli {
    /// TOML configuration; built-in production defaults when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    method: Option<MethodArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Vqe,
    Bcs,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Full (delta, omega) grid for every isotope and species
    Scan,
    /// Single deformation, one or more ascending frequencies (warm started)
    Point {
        #[arg(long)]
        isotope: Option<String>,
        #[arg(long)]
        species: Species,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        /// MeV; comma separated for a warm-started walk
        #[arg(long, value_delimiter = ',', default_value = "0")]
        omega: Vec<f64>,
    },
    /// Fit G to the reference gap with the cranked-BCS solver at omega = 0
    CalibrateG,
    /// VQE against exact diagonalization on random small windows
    OracleCheck {
        #[arg(long, default_value_t = 10)]
        draws: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        m: Vec<usize>,
    },
    /// Fixed (delta, omega) points repeated for several window sizes
    Sensitivity {
        #[arg(long, value_delimiter = ',')]
        m: Option<Vec<usize>>,
    },
    /// Re-render path, pairing and summary tables from records.csv
    Report,
}

fn load_config(cli: &Cli) -> Result<ScanConfig> {
    let mut config = match &cli.config {
        Some(p) => ScanConfig::load(p)?,
        None => ScanConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = Some(out.clone());
    }
    match cli.method {
        Some(MethodArg::Vqe) => (config.methods.vqe, config.methods.bcs) = (true, false),
        Some(MethodArg::Bcs) => (config.methods.vqe, config.methods.bcs) = (false, true),
        Some(MethodArg::Both) => (config.methods.vqe, config.methods.bcs) = (true, true),
        None => {}
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(config: &ScanConfig) -> PathBuf {
    config.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
}

fn report(dir: &Path) -> Result<String> {
    let records = read_records(&dir.join("records.csv"))?;
    let mut names: Vec<String> = Vec::new();
    for r in &records {
        if !names.contains(&r.isotope) {
            names.push(r.isotope.clone());
        }
    }
    write_csv(&dir.join("path.csv"), &derive_paths(&records, &names))?;
    write_csv(&dir.join("pairing.csv"), &derive_pairing(&records, &names))?;
    let summary = derive_summary(&records, &names);
    write_csv(&dir.join("summary.csv"), &summary)?;
    let md = render_summary_markdown(&summary);
    std::fs::write(dir.join("summary.md"), &md)?;
    Ok(md)
}

fn run(cli: &Cli) -> Result<bool> {
    let config = load_config(cli)?;
    let dir = out_dir(&config);
    match &cli.command {
        Command::Scan => {
            let output = scan::run_scan(&config, &|msg| eprintln!("{msg}"))?;
            output.write(&dir)?;
            let mut used = config.clone();
            used.output_dir = None;
            std::fs::write(dir.join("config.toml"), used.to_toml())?;
            print!("{}", render_summary_markdown(&output.summary));
            let failures = output.failures();
            eprintln!("G = {:.4} MeV, {} records, {failures} failed, written to {}", output.g, output.records.len(), dir.display());
            Ok(failures == 0)
        }
        Command::Point { isotope, species, delta, omega } => {
            let iso = match isotope {
                Some(name) => config.isotope(name)?,
                None => &config.isotopes[0],
            };
            let g = scan::resolve_g(&config)?;
            let records = scan::point_records(&config, g, iso, *species, *delta, omega)?;
            for r in &records {
                println!("{}", serde_json::to_string(r).expect("record serializes"));
            }
            Ok(records.iter().all(|r| r.ok()))
        }
        Command::CalibrateG => {
            let g = scan::calibrate(&config)?;
            println!("G = {g:.6} MeV (reference gap {} MeV)", config.pairing.reference_gap);
            Ok(true)
        }
        Command::OracleCheck { draws, m } => {
            let rep = scan::oracle_check(&config, m, *draws, config.seed)?;
            std::fs::create_dir_all(&dir)?;
            write_csv(&dir.join("oracle_check.csv"), &rep.rows)?;
            println!(
                "{} draws: {} below exact, doubles-only agreement {:.1}%, {} below pair minimum: {}",
                rep.rows.len(),
                rep.bound_violations,
                100.0 * rep.pair_agreement,
                rep.pair_below,
                if rep.passed { "pass" } else { "FAIL" }
            );
            Ok(rep.passed)
        }
        Command::Sensitivity { m } => {
            let m_values = m.clone().unwrap_or_else(|| config.sensitivity.m_values.clone());
            let g = scan::resolve_g(&config)?;
            let rows = scan::sensitivity(&config, g, &m_values)?;
            std::fs::create_dir_all(&dir)?;
            write_csv(&dir.join("sensitivity.csv"), &rows)?;
            for r in &rows {
                println!(
                    "m={} {:<7} omega={:.4} Jx={} Dcoh={} {}",
                    r.m,
                    r.species,
                    r.omega,
                    r.jx.map_or("-".into(), |v| format!("{v:.4}")),
                    r.delta_coh.map_or("-".into(), |v| format!("{v:.4}")),
                    r.status
                );
            }
            Ok(rows.iter().all(|r| !r.status.starts_with("failed")))
        }
        Command::Report => {
            print!("{}", report(&dir)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
