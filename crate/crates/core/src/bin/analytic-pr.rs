use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use analytic_pr::analytic::sample_generic;
use analytic_pr::demo::{render_demo, DemoOptions};
use analytic_pr::dsp::Signal;
use analytic_pr::error::{Error, Result};
use analytic_pr::experiment::{run_experiment, summarize, write_trials_csv, ExperimentSpec};
use analytic_pr::formats::{
    from_json_str, measurements_from_json, measurements_to_json, read_measurements_csv, to_json_string,
    write_measurements_csv, ComplexJson, RecoveryJson, WindowFile,
};
use analytic_pr::recovery::{recover, RecoveryConfig};
use analytic_pr::stft::{measure, measurement_plan, StftParams};
use analytic_pr::windows::{
    make_case1_window, make_case2_windows, make_case3_windows, validate_for_case, Case, WindowSet,
};

#[derive(Parser)]
#[command(name = "analytic-pr", version, about = "Phase retrieval of analytic signals from STFT magnitudes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// RNG seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct StftArgs {
    /// Separation parameter L.
    #[arg(long = "l")]
    separation: Option<usize>,
    /// Modulation triple, e.g. `0,1,2`.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    m: Option<Vec<usize>>,
}

impl StftArgs {
    fn m_triple(&self) -> Option<[usize; 3]> {
        self.m.as_ref().map(|m| [m[0], m[1], m[2]])
    }

    fn params(&self, n: usize) -> Result<StftParams> {
        match (self.separation, self.m_triple()) {
            (None, None) => StftParams::default_for(n),
            (l, m) => StftParams::new(n, l.unwrap_or((n / 3).max(1)), m.unwrap_or([0, 1, 2])),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Construct a valid window (Case 1) or window set (Cases 2 and 3).
    GenWindow {
        #[arg(long, value_parser = parse_case)]
        case: Case,
        #[arg(long)]
        n: usize,
        /// Case-1 bandlimit; defaults to ceil(N/2).
        #[arg(long)]
        bandlimit: Option<usize>,
        /// Start of the zero run of the window spectrum.
        #[arg(long, default_value_t = 0)]
        i: usize,
        #[command(flatten)]
        stft: StftArgs,
    },
    /// Draw a generic analytic signal.
    GenSignal {
        #[arg(long)]
        n: usize,
    },
    /// Take the measurement plan of a window file on a signal file.
    Measure {
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        windows: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[command(flatten)]
        stft: StftArgs,
    },
    /// Recover a signal from a measurement file (JSON, or CSV by extension).
    Recover {
        #[arg(long)]
        windows: PathBuf,
        #[arg(long)]
        measurements: PathBuf,
        #[command(flatten)]
        stft: StftArgs,
    },
    /// Seeded batch of sample, measure, recover, score trials.
    Run {
        #[arg(long, value_parser = parse_case)]
        case: Case,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        bandlimit: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Record per-trial wall time (makes the CSV nondeterministic).
        #[arg(long)]
        timing: bool,
        /// JSON summary path; stderr when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        stft: StftArgs,
    },
    /// Walk through one small recovery.
    Demo {
        #[arg(long, value_parser = parse_case, default_value = "1")]
        case: Case,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long)]
        bandlimit: Option<usize>,
        /// Measure the zero signal.
        #[arg(long)]
        zero: bool,
    },
}

fn parse_case(s: &str) -> std::result::Result<Case, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn io_err(path: &Path, e: io::Error) -> Error {
    Error::InvalidParameter(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, bytes).map_err(|e| io_err(path, e)),
        None => io::stdout().write_all(bytes).map_err(|e| Error::InvalidParameter(e.to_string())),
    }
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut text = to_json_string(value)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn signal_csv(z: &Signal) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::InvalidParameter(e.to_string());
    w.write_record(["index", "re", "im"]).map_err(err)?;
    for (j, c) in z.as_slice().iter().enumerate() {
        w.write_record([j.to_string(), c.re.to_string(), c.im.to_string()]).map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn read_signal(path: &Path) -> Result<Signal> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "csv") {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let (mut re, mut im) = (Vec::new(), Vec::new());
        for row in r.deserialize::<(usize, f64, f64)>() {
            let (_, a, b) = row.map_err(|e| Error::InvalidParameter(e.to_string()))?;
            re.push(a);
            im.push(b);
        }
        return Signal::from_parts(&re, &im);
    }
    from_json_str::<ComplexJson>(&text)?.to_signal()
}

fn read_windows(path: &Path) -> Result<WindowSet> {
    from_json_str::<WindowFile>(&read(path)?)?.to_window_set()
}

fn run(cli: Cli) -> Result<()> {
    let out = cli.output.as_deref();
    match cli.command {
        Command::GenWindow { case, n, bandlimit, i, stft } => {
            let ws = match case {
                Case::Case1 => WindowSet::single(make_case1_window(n, bandlimit.unwrap_or(n.div_ceil(2)), i, cli.seed)?),
                Case::Case2 => make_case2_windows(n, i, cli.seed)?,
                Case::Case3 => make_case3_windows(n, cli.seed)?,
            };
            let diagnostics = validate_for_case(&ws, case, &stft.params(n)?);
            eprint!("{diagnostics}");
            emit(out, &json_bytes(&WindowFile::from(&ws))?)?;
            diagnostics.into_result()
        }
        Command::GenSignal { n } => {
            let z = sample_generic(n, cli.seed)?;
            let bytes = match cli.format {
                Format::Json => json_bytes(&ComplexJson::from(z.signal()))?,
                Format::Csv => signal_csv(z.signal())?,
            };
            emit(out, &bytes)
        }
        Command::Measure { signal, windows, noise, stft } => {
            let z = read_signal(&signal)?;
            let ws = read_windows(&windows)?;
            let params = stft.params(ws.n())?;
            let plan = measurement_plan(ws.case(), ws.n(), ws.bandlimit(), ws.zero_run_start(), &params)?;
            let set = measure(&z, &ws, &plan, &params)?.with_noise(noise, cli.seed)?;
            let bytes = match cli.format {
                Format::Json => json_bytes(&measurements_to_json(&set))?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_measurements_csv(&set, &mut buf)?;
                    buf
                }
            };
            emit(out, &bytes)
        }
        Command::Recover { windows, measurements, stft } => {
            let ws = read_windows(&windows)?;
            let text = read(&measurements)?;
            let set = if measurements.extension().is_some_and(|e| e == "csv") {
                read_measurements_csv(ws.case(), text.as_bytes())?
            } else {
                measurements_from_json(from_json_str(&text)?)?
            };
            let result = recover(&set, &ws, &RecoveryConfig::new(stft.params(ws.n())?))?;
            let bytes = match cli.format {
                Format::Json => json_bytes(&RecoveryJson::from(&result))?,
                Format::Csv => signal_csv(&result.signal)?,
            };
            emit(out, &bytes)
        }
        Command::Run { case, n, trials, bandlimit, noise, timing, summary, stft } => {
            let mut spec = ExperimentSpec::new(case, n, trials, cli.seed);
            spec.bandlimit = bandlimit;
            spec.separation = stft.separation;
            spec.m = stft.m_triple();
            spec.noise_sigma = noise;
            spec.timing = timing;
            let records = run_experiment(&spec)?;
            let mut csv_bytes = Vec::new();
            write_trials_csv(&records, &mut csv_bytes)?;
            emit(out, &csv_bytes)?;
            let summary_bytes = json_bytes(&summarize(&spec, &records))?;
            match summary {
                Some(path) => fs::write(&path, summary_bytes).map_err(|e| io_err(&path, e)),
                None => io::stderr().write_all(&summary_bytes).map_err(|e| Error::InvalidParameter(e.to_string())),
            }
        }
        Command::Demo { case, n, bandlimit, zero } => {
            let opts = DemoOptions { case, n, seed: cli.seed, bandlimit, zero_signal: zero };
            emit(out, render_demo(&opts)?.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
