use std::path::PathBuf;
use std::process::ExitCode;

use bops::benchmark::BenchmarkSpec;
use bops::experiment::write_csv;
use bops::solve::solve_qap_file;
use bops::{run_experiment, run_nll, write_outputs, BopsError, NllRequest, RunRequest};
use bops_core::Algorithm;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bops", version, about = "Bayesian optimization over permutation spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replicated optimization runs; writes raw and aggregate CSVs plus a JSON config echo.
    Run {
        /// synthetic:d=N[,noise=S] | gpdraw:d=N[,l=L][,noise=S] | qaplib:PATH | tsplib:PATH[,subset=K]
        #[arg(long, value_parser = parse_benchmark)]
        benchmark: BenchmarkSpec,
        #[arg(long = "algo", value_parser = parse_algorithm)]
        algorithm: Algorithm,
        #[arg(long)]
        iters: usize,
        #[arg(long, default_value_t = 20)]
        init: usize,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Held-out negative log likelihood of the Kendall and Mallows surrogates.
    Nll {
        #[arg(long, value_parser = parse_benchmark)]
        benchmark: BenchmarkSpec,
        #[arg(long, value_delimiter = ',', default_value = "20,40,60")]
        train_sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 50)]
        test_size: usize,
        #[arg(long, default_value_t = 1)]
        test_reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Minimizes a QAPLIB instance and prints `permutation value`.
    SolveQap {
        file: PathBuf,
        /// Enumerate all assignments (n <= 9).
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_benchmark(s: &str) -> Result<BenchmarkSpec, String> {
    s.parse()
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: bops_core::Error| e.to_string())
}

fn execute(command: Command) -> Result<(), BopsError> {
    match command {
        Command::Run { benchmark, algorithm, iters, init, reps, restarts, seed, jobs, out } => {
            let request = RunRequest {
                benchmark: benchmark.to_string(),
                algorithm: algorithm.name().to_string(),
                init,
                iters,
                reps,
                restarts,
                seed,
                jobs,
            };
            let result = run_experiment(&request)?;
            for path in write_outputs(&out, &result)? {
                println!("{}", path.display());
            }
        }
        Command::Nll { benchmark, train_sizes, reps, test_size, test_reps, seed, jobs, out } => {
            let request =
                NllRequest { benchmark: benchmark.to_string(), train_sizes, reps, test_size, test_reps, seed, jobs };
            let rows = run_nll(&request)?;
            if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|source| BopsError::Io { path: dir.to_path_buf(), source })?;
            }
            let file = std::fs::File::create(&out).map_err(|source| BopsError::Io { path: out.clone(), source })?;
            write_csv(std::io::BufWriter::new(file), rows)?;
            println!("{}", out.display());
        }
        Command::SolveQap { file, exact, restarts, seed } => {
            let (p, value) = solve_qap_file(&file, exact, restarts, seed)?;
            println!("{p} {value}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
