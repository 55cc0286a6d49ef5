use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fans::bench::{self, BenchConfig};
use fans::fam_model::index_text;
use fans::static_codec::count_frequencies;
use fans::{pipeline, selftest, tokenizer, Algorithm, DictFilter, Error, TokenizerMode};

#[derive(Parser)]
#[command(name = "fans", version, about = "Forward-adaptive tANS text compressor")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Fam,
    Ranged,
    Uniform,
    Textorder,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Fam => Algorithm::Fam,
            AlgoArg::Ranged => Algorithm::Ranged,
            AlgoArg::Uniform => Algorithm::Uniform,
            AlgoArg::Textorder => Algorithm::TextOrder,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Lossless,
    Paper,
}

impl From<ModeArg> for TokenizerMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Lossless => TokenizerMode::Lossless,
            ModeArg::Paper => TokenizerMode::Paper,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file into an archive.
    Compress {
        #[arg(short, long, value_enum, default_value = "fam")]
        algo: AlgoArg,
        #[arg(short, long, value_enum, default_value = "lossless")]
        mode: ModeArg,
        #[arg(short, long)]
        output: PathBuf,
        input: PathBuf,
    },
    /// Restore the original file (or the token stream of a paper-mode archive).
    Decompress {
        #[arg(short, long)]
        output: PathBuf,
        input: PathBuf,
    },
    /// Benchmark every file in a directory with each algorithm.
    Bench {
        #[arg(short, long, value_enum, default_value = "paper")]
        mode: ModeArg,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        /// Restrict to these algorithms (comma separated).
        #[arg(short, long, value_enum, value_delimiter = ',')]
        algo: Vec<AlgoArg>,
        /// Also report lexicographically ordered dictionary sizes.
        #[arg(long)]
        lexicographic: bool,
        dir: PathBuf,
    },
    /// Print the token-level Shannon entropy of a file.
    Entropy {
        #[arg(short, long, value_enum, default_value = "paper")]
        mode: ModeArg,
        input: PathBuf,
    },
    /// Decompress an archive and compare it with a reference file.
    Verify { archive: PathBuf, reference: PathBuf },
    /// Run the built-in trace vectors and exhaustive round trips.
    Selftest,
}

fn read(path: &PathBuf) -> Result<Vec<u8>, Error> {
    std::fs::read(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let filter = DictFilter::from_env();
    match cli.command {
        Command::Compress {
            algo,
            mode,
            output,
            input,
        } => {
            let algo = Algorithm::from(algo);
            if algo == Algorithm::TextOrder {
                eprintln!("note: text-order archives are for size measurement and cannot be decompressed");
            }
            let bytes = pipeline::compress(&read(&input)?, algo, mode.into(), filter.as_ref())?;
            std::fs::write(&output, bytes)?;
        }
        Command::Decompress { output, input } => {
            let bytes = pipeline::decompress(&read(&input)?, filter.as_ref())?;
            std::fs::write(&output, bytes)?;
        }
        Command::Bench {
            mode,
            format,
            reps,
            algo,
            lexicographic,
            dir,
        } => {
            let cfg = BenchConfig {
                algos: if algo.is_empty() {
                    Algorithm::ALL.to_vec()
                } else {
                    algo.into_iter().map(Algorithm::from).collect()
                },
                mode: mode.into(),
                reps,
                filter,
                lexicographic,
            };
            let report = bench::bench_dir(&dir, &cfg)?;
            match format {
                Format::Csv => {
                    print!("{}", bench::format_csv(report.records()));
                    for (name, e) in &report.errors {
                        eprintln!("error: {name}: {e}");
                    }
                }
                Format::Markdown => print!("{}", bench::format_markdown(&report)),
            }
            if !report.errors.is_empty() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Entropy { mode, input } => {
            let data = read(&input)?;
            let seq = tokenizer::tokenize(&data, mode.into());
            let indexed = index_text(&seq.tokens);
            let freqs = count_frequencies(&indexed.symbols, indexed.dictionary.len());
            let bits = bench::compute_entropy(&freqs);
            println!("tokens: {}", seq.len());
            println!("distinct: {}", indexed.dictionary.len());
            println!("entropy_bits: {bits:.3}");
            println!("entropy_bytes: {:.1}", bits / 8.0);
        }
        Command::Verify { archive, reference } => {
            match pipeline::verify(&read(&archive)?, &read(&reference)?, filter.as_ref()) {
                Ok(()) => println!("ok"),
                Err(e) => {
                    eprintln!("verify failed: {e}");
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Command::Selftest => {
            let report = selftest::run_selftest();
            for c in &report.checks {
                match &c.failure {
                    None => println!("PASS {}", c.name),
                    Some(why) => println!("FAIL {}: {why}", c.name),
                }
            }
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
