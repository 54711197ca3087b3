use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use touchbench::commands::{self, ModeChoice};
use touchbench::{Config, Error};

#[derive(Parser)]
#[command(name = "touchbench", version, about = "Simulated touch prediction and touch-based object recognition")]
struct Cli {
    /// Configuration file overlaid on the built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key, `key=value`. Repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    I2t,
    Prop,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate image/touch pairs over an object set.
    GenData {
        #[arg(long)]
        objects: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the image-to-touch model.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Held-out touch error against the mean predictor.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Score all samples rather than the validation split.
        #[arg(long)]
        all: bool,
    },
    /// Finite-difference check of both networks.
    Gradcheck {
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run recognition episodes and write a JSON-lines report.
    Recognize {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        set: String,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeArg,
        /// Episodes per object.
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        touches: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train and score the stamp-shape classifier.
    Shapeclass {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// k-means over the touch signals of a dataset.
    Cluster {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        pgm_dir: Option<PathBuf>,
    },
    /// Print the resolved configuration.
    Config,
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    for o in &cli.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("override `{o}` is not key=value")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    let stdout = std::io::stdout();
    let out = &mut stdout.lock();
    match cli.command {
        Command::GenData { objects, n, seed, out: dir } => {
            commands::gen_data(&mut cfg, &commands::GenDataArgs { objects, n, seed, out: dir }, out)?;
        }
        Command::Train { data, epochs, seed, out: path } => {
            commands::train_model(&mut cfg, &commands::TrainArgs { data, epochs, seed, out: path }, out)?;
        }
        Command::Eval { data, model, all } => {
            commands::eval(&mut cfg, &commands::EvalArgs { data, model, all }, out)?;
        }
        Command::Gradcheck { seed } => {
            commands::gradcheck(&mut cfg, seed, out)?;
        }
        Command::Recognize { model, set, mode, episodes, touches, seed, out: path } => {
            let mode = match mode {
                ModeArg::I2t => ModeChoice::I2T,
                ModeArg::Prop => ModeChoice::Proprioception,
                ModeArg::Both => ModeChoice::Both,
            };
            let a = commands::RecognizeArgs { model, set, mode, episodes, touches, seed, out: path };
            commands::recognize(&mut cfg, &a, out)?;
        }
        Command::Shapeclass { n, seed, epochs } => {
            commands::shapeclass(&mut cfg, &commands::ShapeclassArgs { n, seed, epochs }, out)?;
        }
        Command::Cluster { data, k, seed, out: path, pgm_dir } => {
            commands::cluster(&mut cfg, &commands::ClusterArgs { data, k, seed, out: path, pgm_dir }, out)?;
        }
        Command::Config => {
            use std::io::Write;
            out.write_all(cfg.render().as_bytes()).map_err(|e| Error::io("<output>".as_ref(), e))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("touchbench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn arguments_are_consistent() {
        use clap::CommandFactory;
        super::Cli::command().debug_assert();
    }
}
