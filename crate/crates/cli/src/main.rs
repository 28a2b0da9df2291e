use asss_cli::bench::{run_bench, write_csv, BenchSpec};
use asss_cli::commands::{eig_scatter, export_matrices, mesh_info, MESH_INFO_CSV_HEADER};
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "asss",
    about = "Alternating-splitting solvers and preconditioners for the Q1 time-periodic \
             parabolic control system, with comparison methods and verification outputs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report h, m, theta, mu_min, mu_max and alpha* for one grid, with a
    /// power-iteration cross-check of the closed forms.
    MeshInfo {
        #[arg(long)]
        k: u32,
        /// Emit a CSV header and row instead of the text block.
        #[arg(long)]
        csv: bool,
    },
    /// Run iteration-count sweeps over (method, k, nu, omega) cells and
    /// write one CSV row per cell. Non-convergence is recorded as DNC-ITER
    /// or DNC-TIME; the exit code stays 0.
    Bench {
        /// JSON file with the sweep specification; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated subset of iasss,ibas,p-asss,p-bas,p-presb,p-bd,asss-exact.
        #[arg(long, value_delimiter = ',')]
        method: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        k: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        nu: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        omega: Vec<f64>,
        /// Override every method's shift.
        #[arg(long)]
        alpha: Option<f64>,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Wall-clock cap per cell in seconds (0 disables the cap).
        #[arg(long)]
        time_cap_secs: Option<f64>,
    },
    /// Write the dense spectra of the system operator and its
    /// preconditioned form as `re,im` CSV files (desk scale, k <= 4).
    Eig {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        omega: f64,
        /// Preconditioner shift; defaults to alpha*.
        #[arg(long)]
        alpha: Option<f64>,
        /// Files are written as `<prefix>_b.csv` and `<prefix>_pinvb.csv`.
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Export the assembled matrices and both block real forms in Matrix
    /// Market coordinate format.
    ExportMatrices {
        #[arg(long)]
        k: u32,
        /// Regularization for the block forms.
        #[arg(long, default_value_t = 1e-2)]
        nu: f64,
        /// Frequency for the block forms.
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn run(cli: Cli) -> asss_core::Result<()> {
    match cli.command {
        Command::MeshInfo { k, csv } => {
            let info = mesh_info(k)?;
            if csv {
                println!("{MESH_INFO_CSV_HEADER}");
                println!("{}", info.csv_line());
            } else {
                println!("{}", info.pretty());
            }
        }
        Command::Bench { config, method, k, nu, omega, alpha, out, time_cap_secs } => {
            let mut spec = match config {
                Some(path) => BenchSpec::from_json(&std::fs::read_to_string(path)?)?,
                None => BenchSpec::default(),
            };
            if !method.is_empty() {
                spec.methods = method;
            }
            if !k.is_empty() {
                spec.k = k;
            }
            if !nu.is_empty() {
                spec.nu = nu;
            }
            if !omega.is_empty() {
                spec.omega = omega;
            }
            if alpha.is_some() {
                spec.alpha = alpha;
            }
            match time_cap_secs {
                Some(cap) if cap <= 0.0 => spec.time_cap_secs = None,
                Some(cap) => spec.time_cap_secs = Some(cap),
                None => {}
            }
            if out.is_some() {
                spec.out = out;
            }
            // surface bad method names before running anything
            spec.parsed_methods()?;
            let rows = run_bench(&spec)?;
            match &spec.out {
                Some(path) => {
                    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                        std::fs::create_dir_all(dir)?;
                    }
                    let file = std::fs::File::create(path)?;
                    write_csv(&rows, std::io::BufWriter::new(file))?;
                    eprintln!("wrote {} rows to {}", rows.len(), path.display());
                }
                None => write_csv(&rows, std::io::stdout().lock())?,
            }
        }
        Command::Eig { k, nu, omega, alpha, out_prefix } => {
            let (max_dist, used_alpha) = eig_scatter(k, nu, omega, alpha, &out_prefix)?;
            println!(
                "alpha = {used_alpha:.6e}; preconditioned spectrum max |lambda - 1| = {max_dist:.8}"
            );
        }
        Command::ExportMatrices { k, nu, omega, out_dir } => {
            export_matrices(k, nu, omega, &out_dir)?;
            println!(
                "wrote mass.mtx, stiffness.mtx, block4.mtx, presb_form.mtx to {}",
                out_dir.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
