use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use feqc::gadgets::{CorrectionPolicy, Detector};
use feqc::report::{self, BackendKind, RunMode, RunOptions};
use feqc::{dsl, FeqcError, Parallelism};

#[derive(Parser)]
#[command(name = "feqc", version, about = "Free-electron circuit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a .feqc circuit file
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = BackendArg::Fock)]
        backend: BackendArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Enumerate)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Include final-state amplitudes (fock backend only)
        #[arg(long)]
        emit_state: bool,
        #[command(flatten)]
        out: OutputArgs,
        /// Disable data parallelism
        #[arg(long)]
        sequential: bool,
    },
    /// Run a prebuilt gadget
    Gadget {
        #[command(subcommand)]
        gadget: GadgetCmd,
    },
}

#[derive(clap::Args, Clone, Copy)]
struct OutputArgs {
    /// Compact JSON (default)
    #[arg(long, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON
    #[arg(long)]
    pretty: bool,
}

#[derive(Subcommand)]
enum GadgetCmd {
    /// Bell-state analyzer on |Psi_k> in arms 1, 2
    Bell {
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=3))]
        input: u8,
        #[arg(long, value_enum, default_value_t = DetectorArg::Parity)]
        detector: DetectorArg,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Parity encoder; qubit as up|down|plus|0|1 or "(re,im),(re,im)"
    Encoder {
        #[arg(long, default_value = "plus")]
        input: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Deterministic CNOT; control/target as basis bits or spinors
    Cnot {
        #[arg(long)]
        control: String,
        #[arg(long)]
        target: String,
        #[arg(long, value_enum, default_value_t = PolicyArg::Full)]
        corrections: PolicyArg,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Teleport a qubit from arm 1 to arm 3
    Teleport {
        #[arg(long, default_value = "plus")]
        input: String,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Hadamard-PBS block: 16 simulated (a, y, p2, z) rows against the closed form
    AppendixTable {
        /// Print an aligned text table instead of JSON
        #[arg(long)]
        text: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(ValueEnum, Clone, Copy)]
enum BackendArg {
    Fock,
    Corr,
}

#[derive(ValueEnum, Clone, Copy)]
enum ModeArg {
    Enumerate,
    Sample,
}

#[derive(ValueEnum, Clone, Copy)]
enum DetectorArg {
    Charge,
    Parity,
}

#[derive(ValueEnum, Clone, Copy)]
enum PolicyArg {
    Full,
    SkipControl,
    SkipTarget,
}

fn emit<T: Serialize>(value: &T, out: OutputArgs) -> Result<(), FeqcError> {
    let text = if out.pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .map_err(|e| FeqcError::Numerical(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn fail(err: FeqcError) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(report::exit_code(&err) as u8)
}

fn run_file(
    file: &PathBuf,
    opts: RunOptions,
    out: OutputArgs,
) -> ExitCode {
    let source = match fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return ExitCode::from(1);
        }
    };
    let circuit = match dsl::parse(&source) {
        Ok(c) => c,
        Err(diags) => {
            for d in diags {
                eprintln!("{}:{d}", file.display());
            }
            return ExitCode::from(2);
        }
    };
    match report::run(&circuit, &opts).and_then(|rep| emit(&rep, out)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}

fn gadget(cmd: GadgetCmd) -> Result<(), FeqcError> {
    match cmd {
        GadgetCmd::Bell { input, detector, out } => {
            let d = match detector {
                DetectorArg::Charge => Detector::Electrometer,
                DetectorArg::Parity => Detector::ParityMeter,
            };
            emit(&report::bell_gadget(input, d)?, out)
        }
        GadgetCmd::Encoder { input, out } => emit(&report::encoder_gadget(report::parse_spinor(&input)?)?, out),
        GadgetCmd::Cnot {
            control,
            target,
            corrections,
            out,
        } => {
            let policy = match corrections {
                PolicyArg::Full => CorrectionPolicy::Full,
                PolicyArg::SkipControl => CorrectionPolicy::SkipControl,
                PolicyArg::SkipTarget => CorrectionPolicy::SkipTarget,
            };
            let rep = report::cnot_gadget(report::parse_spinor(&control)?, report::parse_spinor(&target)?, policy)?;
            emit(&rep, out)
        }
        GadgetCmd::Teleport { input, out } => emit(&report::teleport_gadget(report::parse_spinor(&input)?)?, out),
        GadgetCmd::AppendixTable { text, out } => {
            let rep = report::appendix_gadget()?;
            if text {
                print!("{}", report::appendix_text(rep.table.as_deref().unwrap_or_default()));
                Ok(())
            } else {
                emit(&rep, out)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            file,
            backend,
            mode,
            shots,
            seed,
            emit_state,
            out,
            sequential,
        } => {
            let opts = RunOptions {
                backend: match backend {
                    BackendArg::Fock => BackendKind::Fock,
                    BackendArg::Corr => BackendKind::Corr,
                },
                mode: match mode {
                    ModeArg::Enumerate => RunMode::Enumerate,
                    ModeArg::Sample => RunMode::Sample,
                },
                shots,
                seed,
                emit_state,
                parallelism: if sequential { Parallelism::Sequential } else { Parallelism::Auto },
            };
            run_file(&file, opts, out)
        }
        Command::Gadget { gadget: cmd } => match gadget(cmd) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
    }
}
