//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or domain errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::corrections::{one_sample_constants, two_sample_constants, FourthMomentInfo, PopulationCase};
use crate::error::{Error, Result};
use crate::fisher_lsd::FisherLsd;
use crate::hypothesis::{
    clrt_one_sample, clrt_two_sample, estimate_beta, lrt_one_sample, lrt_two_sample, Tail, TestResult,
};
use crate::mp_law::MpLaw;
use crate::numerics::Variate;
use crate::sim::{
    reproduce_table, run_simulation_with_workers, write_reports_csv, AlternativeKind, AlternativeSpec,
    Scenario, SimulationConfig, SimulationReport, Table,
};
use crate::spectral::{whiten, ObservationMatrix};

#[derive(Debug, Parser)]
#[command(name = "clrt", version, about = "Corrected likelihood-ratio tests for large covariance matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TailArg {
    TwoSided,
    Upper,
}

impl From<TailArg> for Tail {
    fn from(t: TailArg) -> Self {
        match t {
            TailArg::TwoSided => Tail::TwoSided,
            TailArg::Upper => Tail::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Clrt,
    Lrt,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    OneSample,
    TwoSample,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GeneratorArg {
    Gaussian,
    ScaledT5,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableArg {
    Table1,
    Table2Upper,
    Table2Lower,
    Table3,
}

#[derive(Debug, Args)]
struct DataOptions {
    /// Field delimiter of the input files.
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Skip the first line of every input file.
    #[arg(long)]
    has_header: bool,
    /// Input files hold variables in rows and observations in columns.
    #[arg(long)]
    transpose: bool,
}

#[derive(Debug, Args)]
struct TestOptions {
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = TailArg::TwoSided)]
    tail: TailArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    output: OutputFormat,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test H0: Σ = I (or Σ = Σ0 with --sigma0).
    OneSample {
        data: PathBuf,
        /// Reference covariance Σ0; the data are whitened by Σ0^{-1/2}.
        #[arg(long)]
        sigma0: Option<PathBuf>,
        #[command(flatten)]
        data_opts: DataOptions,
        #[command(flatten)]
        test_opts: TestOptions,
    },
    /// Test H0: Σ1 = Σ2.
    TwoSample {
        data_x: PathBuf,
        data_y: PathBuf,
        /// Excess kurtosis E x⁴ − 3 of the standardized entries.
        #[arg(long, default_value_t = 0.0, conflicts_with = "estimate_beta")]
        beta: f64,
        /// Plug in the pooled sample excess kurtosis instead of --beta.
        #[arg(long)]
        estimate_beta: bool,
        #[command(flatten)]
        data_opts: DataOptions,
        #[command(flatten)]
        test_opts: TestOptions,
    },
    /// Print centering, mean and variance of the corrected statistics.
    Constants {
        #[arg(long)]
        p: usize,
        /// Sample size of the one-sample test.
        #[arg(long, conflicts_with_all = ["n1", "n2"], required_unless_present_all = ["n1", "n2"])]
        n: Option<usize>,
        #[arg(long, requires = "n2")]
        n1: Option<usize>,
        #[arg(long, requires = "n1")]
        n2: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        /// Complex-valued populations.
        #[arg(long)]
        complex: bool,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        output: OutputFormat,
    },
    /// Monte Carlo size or power of both tests for one configuration.
    Simulate {
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        replications: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = GeneratorArg::Gaussian)]
        generator: GeneratorArg,
        /// Leading diagonal entry of the alternative covariance (ratio).
        #[arg(long, requires = "alt_rest")]
        alt_leading: Option<f64>,
        /// Remaining diagonal entries of the alternative covariance (ratio).
        #[arg(long, requires = "alt_leading")]
        alt_rest: Option<f64>,
        /// Kurtosis handed to the two-sample corrected test (default: the generator's).
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TailArg::TwoSided)]
        tail: TailArg,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        output: OutputFormat,
    },
    /// Rerun every row of a reference size/power table.
    ReproduceTable {
        #[arg(value_enum)]
        table: TableArg,
        #[arg(long, default_value_t = 0.2)]
        scale: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        output: OutputFormat,
    },
    /// Marčenko–Pastur density on a grid, as CSV.
    MpPdf {
        #[arg(long)]
        y: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// F-matrix limiting density on a grid, as CSV.
    FisherPdf {
        #[arg(long)]
        y1: f64,
        #[arg(long)]
        y2: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
}

/// Parses `argv` (program name first), runs it against the process streams
/// and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_cli_with_io<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn read_matrix(path: &Path, opts: &DataOptions) -> Result<DMatrix<f64>> {
    if !opts.delimiter.is_ascii() {
        return Err(Error::InvalidData("delimiter must be an ASCII character".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter as u8)
        .has_headers(opts.has_header)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| {
                    Error::InvalidData(format!(
                        "{}: record {}: cannot parse {field:?} as a number",
                        path.display(),
                        line + 1
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidData(format!("{}: no data", path.display())));
    }
    let cols = rows[0].len();
    let m = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    Ok(if opts.transpose { m.transpose() } else { m })
}

fn read_observations(path: &Path, opts: &DataOptions) -> Result<ObservationMatrix> {
    ObservationMatrix::new(read_matrix(path, opts)?)
}

#[derive(Serialize)]
struct ResultCsvRow {
    method: crate::hypothesis::Method,
    p: usize,
    n1: usize,
    n2: Option<usize>,
    raw_statistic: f64,
    standardized: f64,
    p_value: f64,
    alpha: Option<f64>,
    rejected: Option<bool>,
    tail: Option<Tail>,
    beta: Option<f64>,
}

fn write_results(results: &[TestResult], format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, results)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in results {
                w.serialize(ResultCsvRow {
                    method: r.method,
                    p: r.ratios.p,
                    n1: r.ratios.n1,
                    n2: r.ratios.n2,
                    raw_statistic: r.raw_statistic,
                    standardized: r.standardized,
                    p_value: r.p_value,
                    alpha: r.reject_at,
                    rejected: r.rejected,
                    tail: r.tail,
                    beta: r.beta,
                })?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct ConstantsReport {
    p: usize,
    n: Option<usize>,
    n1: Option<usize>,
    n2: Option<usize>,
    y_n: Option<f64>,
    y_n1: Option<f64>,
    y_n2: Option<f64>,
    beta: Option<f64>,
    case: PopulationCase,
    /// Limiting-law functional per dimension.
    functional: f64,
    centering: f64,
    mean: f64,
    variance: f64,
}

fn write_constants(report: &ConstantsReport, format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "quantity,value")?;
            writeln!(out, "p,{}", report.p)?;
            for (name, v) in [("n", report.n), ("n1", report.n1), ("n2", report.n2)] {
                if let Some(v) = v {
                    writeln!(out, "{name},{v}")?;
                }
            }
            for (name, v) in [("y_n", report.y_n), ("y_n1", report.y_n1), ("y_n2", report.y_n2), ("beta", report.beta)] {
                if let Some(v) = v {
                    writeln!(out, "{name},{v:.7}")?;
                }
            }
            writeln!(out, "functional,{:.7}", report.functional)?;
            writeln!(out, "centering,{:.7}", report.centering)?;
            writeln!(out, "mean,{:.7}", report.mean)?;
            writeln!(out, "variance,{:.7}", report.variance)?;
        }
    }
    Ok(())
}

fn write_reports(reports: &[&SimulationReport], format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    match format {
        OutputFormat::Csv => write_reports_csv(reports, out),
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, reports)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

fn density_grid(lo: f64, hi: f64, points: usize, pdf: impl Fn(f64) -> f64, out: &mut dyn Write) -> Result<()> {
    if points < 2 {
        return Err(Error::domain("need at least 2 grid points"));
    }
    writeln!(out, "x,density")?;
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        writeln!(out, "{x},{}", pdf(x))?;
    }
    Ok(())
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::OneSample {
            data,
            sigma0,
            data_opts,
            test_opts,
        } => {
            let mut x = read_observations(&data, &data_opts)?;
            if let Some(path) = sigma0 {
                let reference = read_matrix(
                    &path,
                    &DataOptions {
                        transpose: false,
                        ..data_opts
                    },
                )?;
                x = whiten(&x, &reference)?;
            }
            let tail = test_opts.tail.into();
            let mut results = Vec::new();
            if matches!(test_opts.method, MethodArg::Clrt | MethodArg::Both) {
                results.push(clrt_one_sample(&x, test_opts.alpha, tail)?);
            }
            if matches!(test_opts.method, MethodArg::Lrt | MethodArg::Both) {
                results.push(lrt_one_sample(&x, test_opts.alpha)?);
            }
            write_results(&results, test_opts.output, out)
        }
        Command::TwoSample {
            data_x,
            data_y,
            beta,
            estimate_beta: estimate,
            data_opts,
            test_opts,
        } => {
            let x = read_observations(&data_x, &data_opts)?;
            let y = read_observations(&data_y, &data_opts)?;
            let beta = if estimate { estimate_beta(&[&x, &y])? } else { beta };
            let tail = test_opts.tail.into();
            let mut results = Vec::new();
            if matches!(test_opts.method, MethodArg::Clrt | MethodArg::Both) {
                results.push(clrt_two_sample(&x, &y, test_opts.alpha, beta, tail)?);
            }
            if matches!(test_opts.method, MethodArg::Lrt | MethodArg::Both) {
                results.push(lrt_two_sample(&x, &y, test_opts.alpha)?);
            }
            write_results(&results, test_opts.output, out)
        }
        Command::Constants {
            p,
            n,
            n1,
            n2,
            beta,
            complex,
            output,
        } => {
            let case = if complex {
                PopulationCase::Complex
            } else {
                PopulationCase::Real
            };
            let report = match (n, n1, n2) {
                (Some(n), _, _) => {
                    let c = one_sample_constants(p, n, case)?;
                    ConstantsReport {
                        p,
                        n: Some(n),
                        n1: None,
                        n2: None,
                        y_n: Some(p as f64 / n as f64),
                        y_n1: None,
                        y_n2: None,
                        beta: None,
                        case,
                        functional: c.centering / p as f64,
                        centering: c.centering,
                        mean: c.mean,
                        variance: c.variance,
                    }
                }
                (None, Some(n1), Some(n2)) => {
                    let fm = FourthMomentInfo::new(beta, case)?;
                    let c = two_sample_constants(p, n1, n2, case, fm)?;
                    ConstantsReport {
                        p,
                        n: None,
                        n1: Some(n1),
                        n2: Some(n2),
                        y_n: None,
                        y_n1: Some(p as f64 / n1 as f64),
                        y_n2: Some(p as f64 / n2 as f64),
                        beta: Some(beta),
                        case,
                        functional: c.centering / p as f64,
                        centering: c.centering,
                        mean: c.mean,
                        variance: c.variance,
                    }
                }
                _ => return Err(Error::domain("give --n, or both --n1 and --n2")),
            };
            write_constants(&report, output, out)
        }
        Command::Simulate {
            scenario,
            p,
            n1,
            n2,
            replications,
            alpha,
            generator,
            alt_leading,
            alt_rest,
            beta,
            seed,
            tail,
            workers,
            output,
        } => {
            let scenario = match scenario {
                ScenarioArg::OneSample => Scenario::OneSample,
                ScenarioArg::TwoSample => Scenario::TwoSample,
            };
            let alternative = match (alt_leading, alt_rest) {
                (Some(leading), Some(rest)) => Some(AlternativeSpec {
                    kind: match scenario {
                        Scenario::OneSample => AlternativeKind::OneSampleDiag,
                        Scenario::TwoSample => AlternativeKind::TwoSampleRatioDiag,
                    },
                    leading,
                    rest,
                }),
                _ => None,
            };
            let cfg = SimulationConfig {
                scenario,
                p,
                n1,
                n2,
                replications,
                alpha,
                generator: match generator {
                    GeneratorArg::Gaussian => Variate::Gaussian,
                    GeneratorArg::ScaledT5 => Variate::ScaledT5,
                },
                alternative,
                seed,
                tail: tail.into(),
                beta,
            };
            let report = run_simulation_with_workers(&cfg, workers)?;
            write_reports(&[&report], output, out)
        }
        Command::ReproduceTable {
            table,
            scale,
            seed,
            output,
        } => {
            let table = match table {
                TableArg::Table1 => Table::Table1,
                TableArg::Table2Upper => Table::Table2Upper,
                TableArg::Table2Lower => Table::Table2Lower,
                TableArg::Table3 => Table::Table3,
            };
            let rows = reproduce_table(table, scale, seed)?;
            let reports: Vec<&SimulationReport> = rows
                .iter()
                .flat_map(|r| std::iter::once(&r.size).chain(r.power.as_ref()))
                .collect();
            write_reports(&reports, output, out)
        }
        Command::MpPdf { y, points } => {
            let law = MpLaw::new(y)?;
            density_grid(law.a, law.b, points, |x| law.pdf(x), out)
        }
        Command::FisherPdf { y1, y2, points } => {
            let lsd = FisherLsd::new(y1, y2)?;
            density_grid(lsd.a, lsd.b, points, |x| lsd.pdf(x), out)
        }
    }
}
