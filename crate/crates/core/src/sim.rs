//! Monte Carlo estimation of the size and power of the corrected and
//! classical tests, and the configurations of the reference size/power tables.

use std::hash::{Hash, Hasher};
use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::{
    clrt_one_sample_from_core, clrt_two_sample_from_core, lrt_one_sample_from_core,
    lrt_two_sample_from_core, DimensionRatios, Tail,
};
use crate::numerics::{RandomStream, Variate};
use crate::spectral::{one_sample_lr_core, sample_covariance, two_sample_lr_core, ObservationMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    OneSample,
    TwoSample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlternativeKind {
    /// `Σ = diag(leading, rest, …, rest)` against `H0: Σ = I`.
    OneSampleDiag,
    /// `Σ1 = diag(leading, rest, …, rest)`, `Σ2 = I`.
    TwoSampleRatioDiag,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlternativeSpec {
    pub kind: AlternativeKind,
    pub leading: f64,
    pub rest: f64,
}

impl AlternativeSpec {
    /// `diag(1, 0.05, 0.05, …)`.
    pub fn table1() -> Self {
        AlternativeSpec {
            kind: AlternativeKind::OneSampleDiag,
            leading: 1.0,
            rest: 0.05,
        }
    }

    /// `Σ1Σ2⁻¹ = diag(3, 1, 1, …)`.
    pub fn table2() -> Self {
        AlternativeSpec {
            kind: AlternativeKind::TwoSampleRatioDiag,
            leading: 3.0,
            rest: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub scenario: Scenario,
    pub p: usize,
    pub n1: usize,
    pub n2: Option<usize>,
    pub replications: usize,
    pub alpha: f64,
    pub generator: Variate,
    pub alternative: Option<AlternativeSpec>,
    pub seed: u64,
    pub tail: Tail,
    /// Excess kurtosis handed to the two-sample corrected test; `None` uses
    /// the generator's value.
    pub beta: Option<f64>,
}

impl SimulationConfig {
    pub fn one_sample(p: usize, n: usize, replications: usize, seed: u64) -> Self {
        SimulationConfig {
            scenario: Scenario::OneSample,
            p,
            n1: n,
            n2: None,
            replications,
            alpha: 0.05,
            generator: Variate::Gaussian,
            alternative: None,
            seed,
            tail: Tail::TwoSided,
            beta: None,
        }
    }

    pub fn two_sample(p: usize, n1: usize, n2: usize, replications: usize, seed: u64) -> Self {
        SimulationConfig {
            scenario: Scenario::TwoSample,
            n2: Some(n2),
            ..SimulationConfig::one_sample(p, n1, replications, seed)
        }
    }

    pub fn effective_beta(&self) -> f64 {
        self.beta.unwrap_or_else(|| self.generator.excess_kurtosis())
    }

    pub fn ratios(&self) -> Result<DimensionRatios> {
        match (self.scenario, self.n2) {
            (Scenario::OneSample, None) => DimensionRatios::one_sample(self.p, self.n1),
            (Scenario::TwoSample, Some(n2)) => DimensionRatios::two_sample(self.p, self.n1, n2),
            (Scenario::OneSample, Some(_)) => Err(Error::domain("one-sample scenario takes no n2")),
            (Scenario::TwoSample, None) => Err(Error::domain("two-sample scenario needs n2")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::domain("replications must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        self.ratios()?;
        if let Some(alt) = self.alternative {
            if !(alt.leading > 0.0 && alt.rest > 0.0) || !alt.leading.is_finite() || !alt.rest.is_finite() {
                return Err(Error::domain("alternative scales must be positive"));
            }
            let expected = match self.scenario {
                Scenario::OneSample => AlternativeKind::OneSampleDiag,
                Scenario::TwoSample => AlternativeKind::TwoSampleRatioDiag,
            };
            if alt.kind != expected {
                return Err(Error::domain("alternative kind does not match the scenario"));
            }
        }
        Ok(())
    }
}

/// Draws an `n × p` matrix of standardized variates from `rng` and scales
/// column 0 by `√leading` and the rest by `√rest`.
fn draw_matrix(
    rng: &mut rand_chacha::ChaCha8Rng,
    generator: Variate,
    n: usize,
    p: usize,
    scales: Option<(f64, f64)>,
) -> Result<ObservationMatrix> {
    let mut buf = vec![0.0; n * p];
    generator.fill(rng, &mut buf);
    let mut m = DMatrix::from_vec(n, p, buf);
    if let Some((leading, rest)) = scales {
        for (j, mut col) in m.column_iter_mut().enumerate() {
            col *= if j == 0 { leading.sqrt() } else { rest.sqrt() };
        }
    }
    ObservationMatrix::new(m)
}

/// The data of replicate `index`: both samples come from the stream
/// `(seed, index)`, first sample first.
pub fn replicate_dataset(
    cfg: &SimulationConfig,
    index: u64,
) -> Result<(ObservationMatrix, Option<ObservationMatrix>)> {
    let mut rng = RandomStream::new(cfg.seed, index).rng();
    let scales = cfg.alternative.map(|a| (a.leading, a.rest));
    let x = draw_matrix(&mut rng, cfg.generator, cfg.n1, cfg.p, scales)?;
    let y = match cfg.n2 {
        Some(n2) => Some(draw_matrix(&mut rng, cfg.generator, n2, cfg.p, None)?),
        None => None,
    };
    Ok((x, y))
}

fn digest(x: &ObservationMatrix, y: Option<&ObservationMatrix>) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    for m in std::iter::once(x).chain(y) {
        m.n().hash(&mut h);
        for v in m.values().iter() {
            v.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

/// Both tests applied to the same replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub index: u64,
    pub raw_statistic: f64,
    pub clrt_z: f64,
    pub clrt_rejected: bool,
    pub lrt_statistic: f64,
    pub lrt_rejected: bool,
    /// Hash of the simulated data consumed by both tests.
    pub dataset_digest: u64,
}

fn evaluate_inner(cfg: &SimulationConfig, index: u64) -> Result<ReplicateOutcome> {
    let ratios = cfg.ratios()?;
    let (x, y) = replicate_dataset(cfg, index)?;
    let dataset_digest = digest(&x, y.as_ref());
    let (clrt, lrt) = match &y {
        None => {
            let core = one_sample_lr_core(&sample_covariance(&x))?;
            (
                clrt_one_sample_from_core(core, ratios, cfg.alpha, cfg.tail)?,
                lrt_one_sample_from_core(core, ratios, cfg.alpha)?,
            )
        }
        Some(y) => {
            let core = two_sample_lr_core(&sample_covariance(&x), &sample_covariance(y), x.n(), y.n())?;
            (
                clrt_two_sample_from_core(core, ratios, cfg.alpha, cfg.effective_beta(), cfg.tail)?,
                lrt_two_sample_from_core(core, ratios, cfg.alpha)?,
            )
        }
    };
    Ok(ReplicateOutcome {
        index,
        raw_statistic: clrt.raw_statistic,
        clrt_z: clrt.standardized,
        clrt_rejected: clrt.rejected.unwrap_or(false),
        lrt_statistic: lrt.standardized,
        lrt_rejected: lrt.rejected.unwrap_or(false),
        dataset_digest,
    })
}

pub fn evaluate_replicate(cfg: &SimulationConfig, index: u64) -> Result<ReplicateOutcome> {
    evaluate_inner(cfg, index).map_err(|e| Error::Replicate {
        index,
        source: Box::new(e),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub rejections: usize,
    pub rate: f64,
    pub mc_std_error: f64,
}

impl MethodSummary {
    fn from_count(rejections: usize, replications: usize) -> Self {
        let rate = rejections as f64 / replications as f64;
        MethodSummary {
            rejections,
            rate,
            mc_std_error: (rate * (1.0 - rate) / replications as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    /// Corrected-test rejections; repeated in `clrt`.
    pub rejections: usize,
    pub realized_rate: f64,
    pub mc_std_error: f64,
    pub clrt: MethodSummary,
    pub lrt: MethodSummary,
    /// Per-replicate outcomes in replicate order.
    #[serde(skip)]
    pub outcomes: Vec<ReplicateOutcome>,
}

impl SimulationReport {
    pub fn clrt_z_scores(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.clrt_z).collect()
    }
}

fn summarize(cfg: SimulationConfig, outcomes: Vec<ReplicateOutcome>) -> SimulationReport {
    let r = cfg.replications;
    let clrt = MethodSummary::from_count(outcomes.iter().filter(|o| o.clrt_rejected).count(), r);
    let lrt = MethodSummary::from_count(outcomes.iter().filter(|o| o.lrt_rejected).count(), r);
    SimulationReport {
        config: cfg,
        rejections: clrt.rejections,
        realized_rate: clrt.rate,
        mc_std_error: clrt.mc_std_error,
        clrt,
        lrt,
        outcomes,
    }
}

/// Runs on the global rayon pool.
pub fn run_simulation(cfg: &SimulationConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let outcomes = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|i| evaluate_replicate(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(*cfg, outcomes))
}

/// Runs on a dedicated pool of `workers` threads; `workers = 1` runs
/// sequentially on the calling thread.
pub fn run_simulation_with_workers(cfg: &SimulationConfig, workers: usize) -> Result<SimulationReport> {
    cfg.validate()?;
    if workers <= 1 {
        let outcomes = (0..cfg.replications as u64)
            .map(|i| evaluate_replicate(cfg, i))
            .collect::<Result<Vec<_>>>()?;
        return Ok(summarize(*cfg, outcomes));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::domain(format!("cannot build worker pool: {e}")))?;
    pool.install(|| run_simulation(cfg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Table {
    Table1,
    Table2Upper,
    Table2Lower,
    Table3,
}

impl Table {
    /// `(p, n1, n2)` of every row.
    pub fn rows(self) -> Vec<(usize, usize, Option<usize>)> {
        match self {
            Table::Table1 => [5, 10, 50, 100, 300].iter().map(|&p| (p, 500, None)).collect(),
            Table::Table2Upper => [5, 10, 20, 40, 80, 160, 320]
                .iter()
                .map(|&p| (p, 20 * p, Some(20 * p)))
                .collect(),
            Table::Table2Lower => [5, 10, 20, 40, 80, 160, 320]
                .iter()
                .map(|&p| (p, 20 * p, Some(10 * p)))
                .collect(),
            Table::Table3 => [10, 20, 40, 80, 160, 320]
                .iter()
                .map(|&p| (p, 10 * p, Some(20 * p)))
                .collect(),
        }
    }

    /// Replications at full scale.
    pub fn base_replications(self) -> usize {
        match self {
            Table::Table3 => 1000,
            _ => 10_000,
        }
    }

    fn index(self) -> u64 {
        match self {
            Table::Table1 => 1,
            Table::Table2Upper => 2,
            Table::Table2Lower => 3,
            Table::Table3 => 4,
        }
    }
}

/// The null configuration of one table row and, where the table reports
/// power, its alternative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRowConfig {
    pub size: SimulationConfig,
    pub power: Option<SimulationConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub size: SimulationReport,
    pub power: Option<SimulationReport>,
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale <= 1.0) || scale * 10_000.0 < 500.0 {
        return Err(Error::domain(format!(
            "scale must lie in [0.05, 1], got {scale}"
        )));
    }
    Ok(())
}

/// Configurations for every row of `table` at `scale`. Each row and
/// hypothesis gets its own seed derived from `seed`.
pub fn table_configs(table: Table, scale: f64, seed: u64) -> Result<Vec<TableRowConfig>> {
    check_scale(scale)?;
    let replications = ((scale * table.base_replications() as f64).round() as usize).max(1);
    let row_seed = |row: usize, alt: u64| {
        seed.wrapping_add(table.index() << 32)
            .wrapping_add((row as u64) << 1)
            .wrapping_add(alt)
    };
    Ok(table
        .rows()
        .into_iter()
        .enumerate()
        .map(|(row, (p, n1, n2))| {
            let mut size = match n2 {
                None => SimulationConfig::one_sample(p, n1, replications, row_seed(row, 0)),
                Some(n2) => SimulationConfig::two_sample(p, n1, n2, replications, row_seed(row, 0)),
            };
            let power = match table {
                Table::Table1 => Some(AlternativeSpec::table1()),
                Table::Table2Upper | Table::Table2Lower => Some(AlternativeSpec::table2()),
                Table::Table3 => None,
            }
            .map(|alt| SimulationConfig {
                alternative: Some(alt),
                seed: row_seed(row, 1),
                ..size
            });
            if table == Table::Table3 {
                size.generator = Variate::ScaledT5;
                size.beta = Some(6.0);
            }
            TableRowConfig { size, power }
        })
        .collect())
}

pub fn reproduce_table(table: Table, scale: f64, seed: u64) -> Result<Vec<TableRow>> {
    table_configs(table, scale, seed)?
        .into_iter()
        .map(|rc| {
            Ok(TableRow {
                size: run_simulation(&rc.size)?,
                power: rc.power.as_ref().map(run_simulation).transpose()?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCsvRow {
    pub scenario: Scenario,
    pub p: usize,
    pub n1: usize,
    pub n2: Option<usize>,
    pub generator: Variate,
    pub beta: f64,
    pub alpha: f64,
    pub method: &'static str,
    pub rate: f64,
    pub mc_se: f64,
    pub replications: usize,
    pub seed: u64,
    pub hypothesis: &'static str,
    pub tail: Tail,
}

impl SimulationReport {
    pub fn csv_rows(&self) -> [ReportCsvRow; 2] {
        let c = &self.config;
        let row = |method, s: &MethodSummary| ReportCsvRow {
            scenario: c.scenario,
            p: c.p,
            n1: c.n1,
            n2: c.n2,
            generator: c.generator,
            beta: c.effective_beta(),
            alpha: c.alpha,
            method,
            rate: s.rate,
            mc_se: s.mc_std_error,
            replications: c.replications,
            seed: c.seed,
            hypothesis: if c.alternative.is_some() { "alternative" } else { "null" },
            tail: c.tail,
        };
        [row("clrt", &self.clrt), row("lrt", &self.lrt)]
    }
}

pub fn write_reports_csv<W: Write>(reports: &[&SimulationReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        for row in r.csv_rows() {
            w.serialize(row)?;
        }
    }
    w.flush()?;
    Ok(())
}
