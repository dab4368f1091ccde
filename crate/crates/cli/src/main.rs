use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sigvol::algebra::{shuffle, Letter, TensorPoly, Word};
use sigvol::lyndon::{avoid_letter_decompose_in, lyndon_words, radford_decompose, Convention, LyndonOrder};
use sigvol::signature::{expected_sig_time_bm, path_signature, PathSample};
use sigvol::Error;

mod manifest;

use manifest::{run_experiment, Experiment, Manifest};

#[derive(Parser)]
#[command(name = "sigvol", version, about = "Signature volatility models: algebra, signatures and Monte Carlo experiments")]
struct Cli {
    /// Master seed; overrides the seed in experiment configs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory for experiment results and manifests.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shuffle product of two words.
    Shuffle {
        u: String,
        v: String,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Decomposition of a word into shuffles of Lyndon words.
    Radford {
        word: String,
        /// Use the ordering in which this letter is greatest.
        #[arg(long)]
        avoid_letter: Option<u8>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Lyndon words up to a length, in graded order.
    Lyndon {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        max_len: usize,
        /// Smaller-than-rotations convention instead of greater-than.
        #[arg(long)]
        classical: bool,
    },
    /// Signature of the time-augmented path in a CSV file `t,x1,...,xd`.
    Sig {
        path: PathBuf,
        #[arg(long)]
        level: usize,
    },
    /// Expected signature of (t, B) with B a standard Brownian motion.
    ExpectedSig {
        #[arg(long)]
        bm_dim: usize,
        #[arg(long)]
        horizon: f64,
        #[arg(long)]
        level: usize,
    },
    /// Simulate terminal prices: martingale gap and realized variance.
    Simulate {
        config: PathBuf,
        /// Also write terminal prices as CSV.
        #[arg(long)]
        dump_samples: bool,
    },
    /// Put and call implied volatility smiles.
    Smile { config: PathBuf },
    /// Explosion frequency of the signature-drift SDE.
    Explode { config: PathBuf },
    /// Moment regime and empirical moment.
    Moments { config: PathBuf },
    /// Critical-case functional and classification.
    Critical { config: PathBuf },
    /// Right-wing slope of the total variance smile.
    Wings { config: PathBuf },
    /// Re-run an experiment from its manifest and compare digests.
    Replay { manifest: PathBuf },
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) | Failure::Mismatch(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Io(m) | Failure::Mismatch(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

fn parse_word(s: &str, dim: Option<usize>) -> Result<Word, Failure> {
    Ok(match dim {
        Some(d) => Word::parse_in(s, d)?,
        None => Word::parse(s)?,
    })
}

fn infer_dim(words: &[&Word], dim: Option<usize>) -> usize {
    dim.unwrap_or_else(|| words.iter().map(|w| w.max_letter()).max().unwrap_or(1).max(1))
}

fn read_csv_path(path: &Path) -> Result<PathSample, Failure> {
    let text = read(path)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Result<Vec<f64>, _> = line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        match fields {
            Ok(f) if f.len() >= 2 => {
                times.push(f[0]);
                values.push(f[1..].to_vec());
            }
            Ok(_) => return Err(Failure::Config(format!("line {}: need t and at least one coordinate", i + 1))),
            Err(_) if times.is_empty() => continue, // header
            Err(_) => return Err(Failure::Config(format!("line {}: not numeric", i + 1))),
        }
    }
    Ok(PathSample::time_augmented(times, values)?)
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Shuffle { u, v, dim } => {
            let (a, b) = (parse_word(u, *dim)?, parse_word(v, *dim)?);
            let d = infer_dim(&[&a, &b], *dim);
            let p = shuffle(&TensorPoly::word(d, a), &TensorPoly::word(d, b))?;
            println!("{p}");
        }
        Command::Radford { word, avoid_letter, dim } => {
            let w = parse_word(word, *dim)?;
            let sp = match avoid_letter {
                Some(k) => {
                    let d = infer_dim(&[&w], *dim).max(*k as usize);
                    avoid_letter_decompose_in(&w, Letter(*k), d)?
                }
                None => radford_decompose(&w, &LyndonOrder::greater(infer_dim(&[&w], *dim)))?,
            };
            println!("{sp}");
        }
        Command::Lyndon { dim, max_len, classical } => {
            let convention = if *classical { Convention::Classical } else { Convention::Greater };
            for w in lyndon_words(*dim, *max_len, &LyndonOrder::new(convention, *dim))? {
                println!("{}", w.to_text(*dim));
            }
        }
        Command::Sig { path, level } => {
            let sample = read_csv_path(path)?;
            println!("{}", to_json(&path_signature(&sample, *level)?.to_json()));
        }
        Command::ExpectedSig { bm_dim, horizon, level } => {
            if !(*horizon >= 0.0) {
                return Err(Failure::Config("horizon must be non-negative".into()));
            }
            println!("{}", to_json(&expected_sig_time_bm(*horizon, *bm_dim, *level).to_json()));
        }
        Command::Simulate { config, dump_samples } => {
            experiment(Experiment::Simulate { dump_samples: *dump_samples }, config, &cli)?;
        }
        Command::Smile { config } => experiment(Experiment::Smile, config, &cli)?,
        Command::Explode { config } => experiment(Experiment::Explode, config, &cli)?,
        Command::Moments { config } => experiment(Experiment::Moments, config, &cli)?,
        Command::Critical { config } => experiment(Experiment::Critical, config, &cli)?,
        Command::Wings { config } => experiment(Experiment::Wings, config, &cli)?,
        Command::Replay { manifest } => {
            let text = read(manifest)?;
            let m: Manifest = serde_json::from_str(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", manifest.display())))?;
            let config_text = serde_json::to_string(&m.config).expect("json value");
            let fresh = run_experiment(m.experiment, &config_text, None, cli.workers, &cli.out)?;
            let mut bad = Vec::new();
            for (file, digest) in &m.outputs {
                match fresh.outputs.get(file) {
                    Some(d) if d == digest => println!("{file}: identical"),
                    _ => bad.push(file.clone()),
                }
            }
            if !bad.is_empty() {
                return Err(Failure::Mismatch(format!("outputs differ from manifest: {}", bad.join(", "))));
            }
        }
    }
    Ok(())
}

fn experiment(kind: Experiment, config: &Path, cli: &Cli) -> Result<(), Failure> {
    let text = read(config)?;
    let m = run_experiment(kind, &text, cli.seed, cli.workers, &cli.out)?;
    println!("{}", m.summary);
    for (file, digest) in &m.outputs {
        println!("wrote {} ({})", cli.out.join(file).display(), &digest[..16]);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
