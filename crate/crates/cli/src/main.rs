use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chronoscale::discrete::ExampleName;
use chronoscale::Rational;
use chronoscale_cli::{render_report, run_sweep, run_verify, Check, CliError, Format, Regime, Report, RunConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "chronoscale", version, about = "Verify Young-type inequalities on time scales")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Output {
    /// Output format; overrides the config's `format`
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Common {
    /// Run configuration (JSON)
    #[arg(long)]
    config: PathBuf,

    /// Relative tolerance of the floating regime
    #[arg(long)]
    tolerance: Option<f64>,

    /// Force exact rational arithmetic
    #[arg(long)]
    exact: bool,

    /// Worker threads
    #[arg(long, env = "CHRONOSCALE_JOBS")]
    jobs: Option<usize>,

    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the checks of a config
    Verify(Common),
    /// Run the checks over the cross product of the config's `grid`
    Sweep(Common),
    /// Evaluate the closed-form integer chains
    Examples {
        /// Chain to run; all of them when omitted
        #[arg(long, value_parser = parse_example)]
        example: Option<ExampleName>,

        /// Order for the factorial, sine and binomial chains
        #[arg(long, default_value_t = 2)]
        k: u32,

        /// Base for the geometric and Legendre chains
        #[arg(long, default_value = "2", value_parser = parse_rational)]
        base: Rational,

        /// Window, e.g. `--range 0 20`; each chain's default when omitted
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        range: Option<Vec<i64>>,

        /// Worker threads
        #[arg(long, env = "CHRONOSCALE_JOBS")]
        jobs: Option<usize>,

        #[command(flatten)]
        output: Output,
    },
    /// Re-render a JSON report
    Report {
        /// Report produced with `--format json`
        input: PathBuf,

        #[command(flatten)]
        output: Output,
    },
}

fn parse_example(s: &str) -> Result<ExampleName, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
        let names: Vec<&str> = ExampleName::ALL.iter().map(|e| e.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse().map_err(|e: chronoscale::Error| e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let bytes = render_report(report, format)?;
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn execute(command: Command) -> Result<i32, CliError> {
    let (report, format, out) = match command {
        Command::Verify(c) => {
            let mut cfg = RunConfig::from_json(&read(&c.config)?)?;
            if c.tolerance.is_some() {
                cfg.tolerance = c.tolerance;
            }
            if c.exact {
                cfg.regime = Regime::Exact;
            }
            let format = c.output.format.or(cfg.format).unwrap_or(Format::Csv);
            (run_verify(&cfg, c.jobs)?, format, c.output.out)
        }
        Command::Sweep(c) => {
            let mut doc: serde_json::Value =
                serde_json::from_str(&read(&c.config)?).map_err(|e| CliError::Config(e.to_string()))?;
            let obj = doc.as_object_mut().ok_or_else(|| CliError::Config("config must be a JSON object".into()))?;
            if let Some(t) = c.tolerance {
                obj.insert("tolerance".into(), t.into());
            }
            if c.exact {
                obj.insert("regime".into(), "exact".into());
            }
            let format = match c.output.format {
                Some(f) => f,
                None => RunConfig::from_json(&doc.to_string())?.format.unwrap_or(Format::Csv),
            };
            (run_sweep(&doc, c.jobs)?, format, c.output.out)
        }
        Command::Examples { example, k, base, range, jobs, output } => {
            let range = range.map(|r| [r[0], r[1]]);
            let names = example.map_or(ExampleName::ALL.to_vec(), |e| vec![e]);
            let checks = names
                .into_iter()
                .map(|e| {
                    let uses_base = matches!(e, ExampleName::GeometricB | ExampleName::LegendreB);
                    Check::Examples {
                        example: e,
                        k: (!uses_base).then_some(k),
                        base: uses_base.then(|| base.clone()),
                        range,
                    }
                })
                .collect();
            let cfg = RunConfig::with_checks(checks);
            (run_verify(&cfg, jobs)?, output.format.unwrap_or(Format::Csv), output.out)
        }
        Command::Report { input, output } => {
            let report = Report::from_json(&read(&input)?)?;
            (report, output.format.unwrap_or(Format::Table), output.out)
        }
    };
    emit(&report, format, out.as_deref())?;
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
