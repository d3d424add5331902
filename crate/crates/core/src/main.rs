use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use soundplot::pipeline::{run_analyze, write_summary, AnalyzeOptions};
use soundplot::synthesis::MelInverse;

#[derive(Debug, Parser)]
#[command(
    name = "soundplot",
    version,
    about = "Birdsong analysis and resynthesis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze a WAV file and write a session folder.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, clap::Args)]
struct AnalyzeArgs {
    input: PathBuf,
    #[arg(long, default_value = "data/sessions")]
    out: PathBuf,
    /// Keep the whole recording instead of the first 300 s.
    #[arg(long)]
    no_trim: bool,
    /// Strip leading and trailing silence.
    #[arg(long)]
    remove_silence: bool,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    gl_iters: u64,
    /// Mel-to-linear estimate used before Griffin-Lim.
    #[arg(long, value_enum, default_value_t = InverseArg::Pinv)]
    mel_inverse: InverseArg,
    #[arg(long, default_value_t = 65.0)]
    fmin: f64,
    #[arg(long, default_value_t = 2093.0)]
    fmax: f64,
    /// Seed for the session id.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InverseArg {
    /// Moore-Penrose pseudo-inverse with negatives clamped.
    Pinv,
    /// Non-negative least squares.
    Nnls,
}

impl From<AnalyzeArgs> for AnalyzeOptions {
    fn from(a: AnalyzeArgs) -> Self {
        let mut opts = AnalyzeOptions::new(a.input, a.out);
        opts.trim = !a.no_trim;
        opts.remove_silence = a.remove_silence;
        opts.gl_iterations = a.gl_iters as usize;
        opts.mel_inverse = match a.mel_inverse {
            InverseArg::Pinv => MelInverse::PseudoInverse,
            InverseArg::Nnls => MelInverse::NonNegative,
        };
        opts.f_min = a.fmin;
        opts.f_max = a.fmax;
        opts.seed = a.seed;
        opts
    }
}

fn main() -> ExitCode {
    let Command::Analyze(args) = Cli::parse().command;
    let options = AnalyzeOptions::from(args);
    match run_analyze(&options) {
        Ok(outcome) => match write_summary(std::io::stdout().lock(), &outcome) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
