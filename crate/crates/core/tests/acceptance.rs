//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test --test acceptance`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use clrt::corrections::{
    one_sample_mean, two_sample_mean, two_sample_var, FourthMomentInfo, PopulationCase,
};
use clrt::fisher_lsd::{lemma1_cov, lemma1_solve, two_sample_centering, FisherLsd, LogAffineSpec};
use clrt::hypothesis::{clrt_one_sample_from_core, DimensionRatios};
use clrt::mp_law::one_sample_centering;
use clrt::oracles::{
    centering_oracle, mean_oracle_one_sample, mean_oracle_two_sample, CenteringTarget, ContourSpec,
};
use clrt::sim::{
    replicate_dataset, run_simulation, run_simulation_with_workers, table_configs,
    SimulationConfig, SimulationReport, Table,
};
use clrt::spectral::{
    one_sample_lr_core, sample_covariance, two_sample_lr_core, CovarianceMatrix, ObservationMatrix,
};
use common::{five_point_grid, gaussian_matrix, normal_ks, random_orthogonal};
use nalgebra::DMatrix;

const SEED: u64 = 42;
const REAL: PopulationCase = PopulationCase::Real;
/// Upper 5% point of N(0, 1).
const Z_95: f64 = 1.644_853_626_951_472_2;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict { pass, detail }
    }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn find_row(table: Table, scale: f64, p: usize) -> clrt::sim::TableRowConfig {
    table_configs(table, scale, SEED)
        .unwrap()
        .into_iter()
        .find(|r| r.size.p == p)
        .unwrap()
}

fn cached(cell: &'static OnceLock<SimulationReport>, cfg: impl FnOnce() -> SimulationConfig) -> &'static SimulationReport {
    cell.get_or_init(|| run_simulation(&cfg()).unwrap())
}

fn table1_size(p: usize) -> &'static SimulationReport {
    static P50: OnceLock<SimulationReport> = OnceLock::new();
    static P100: OnceLock<SimulationReport> = OnceLock::new();
    static P300: OnceLock<SimulationReport> = OnceLock::new();
    let cell = match p {
        50 => &P50,
        100 => &P100,
        300 => &P300,
        _ => unreachable!(),
    };
    cached(cell, || find_row(Table::Table1, 0.2, p).size)
}

fn table2_lower_size(p: usize) -> &'static SimulationReport {
    static P40: OnceLock<SimulationReport> = OnceLock::new();
    static P80: OnceLock<SimulationReport> = OnceLock::new();
    let cell = if p == 40 { &P40 } else { &P80 };
    cached(cell, || find_row(Table::Table2Lower, 0.2, p).size)
}

fn upper_tail_rate(report: &SimulationReport) -> f64 {
    let z = report.clrt_z_scores();
    z.iter().filter(|&&v| v > Z_95).count() as f64 / z.len() as f64
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut worst = [0.0f64; 4];
    let mut mp_grid = vec![0.02, 0.05];
    mp_grid.extend((1..=9).map(|i| i as f64 / 10.0));
    for &y in &mp_grid {
        let c = one_sample_centering(y).unwrap()
            - centering_oracle(CenteringTarget::MarchenkoPastur(y)).unwrap();
        let m = one_sample_mean(y, REAL).unwrap() - mean_oracle_one_sample(y).unwrap();
        worst[0] = worst[0].max(c.abs());
        worst[2] = worst[2].max(m.abs());
    }
    let spec = ContourSpec::default();
    for &y1 in &five_point_grid() {
        for &y2 in &five_point_grid() {
            let c = two_sample_centering(y1, y2).unwrap()
                - centering_oracle(CenteringTarget::Fisher(y1, y2)).unwrap();
            worst[1] = worst[1].max(c.abs());
            for &beta in &[0.0, 6.0] {
                let fm = FourthMomentInfo::new(beta, REAL).unwrap();
                let m = two_sample_mean(y1, y2, REAL, fm).unwrap()
                    - mean_oracle_two_sample(y1, y2, beta, &spec).unwrap();
                worst[3] = worst[3].max(m.abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst[0] < 1e-8 && worst[1] < 1e-8 && worst[2] < 1e-6 && worst[3] < 1e-6 && secs < 10.0;
    Verdict::new(
        pass,
        format!(
            "max errors: MP centering {:.1e}, Fisher centering {:.1e}, one-sample mean {:.1e}, \
             two-sample mean {:.1e}; {secs:.1}s",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for &y1 in &five_point_grid() {
        for &y2 in &five_point_grid() {
            let lsd = FisherLsd::new(y1, y2).unwrap();
            let w = y2 / (y1 + y2);
            let pf = lemma1_solve(&LogAffineSpec::new(y1, y2).unwrap(), &lsd).unwrap();
            let pg = lemma1_solve(&LogAffineSpec::new(0.0, 1.0).unwrap(), &lsd).unwrap();
            let ff = lemma1_cov(&pf, &pf, y2, &lsd).unwrap();
            let fg = lemma1_cov(&pf, &pg, y2, &lsd).unwrap();
            let gg = lemma1_cov(&pg, &pg, 1.0, &lsd).unwrap();
            let assembled = ff - 2.0 * w * fg + w * w * gg;
            let closed = two_sample_var(y1, y2, REAL, FourthMomentInfo::gaussian()).unwrap();
            worst = worst.max((assembled - closed).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict::new(worst < 1e-10 && secs < 1.0, format!("max error {worst:.1e}; {secs:.3}s"))
}

fn criterion_3() -> Verdict {
    let (c50, c100) = (table1_size(50), table1_size(100));
    let l300 = table1_size(300);
    let pass = within(c50.clrt.rate, 0.0594, 0.02)
        && within(c100.clrt.rate, 0.0537, 0.02)
        && c50.lrt.rate >= 0.18
        && l300.lrt.rate >= 0.99;
    Verdict::new(
        pass,
        format!(
            "CLRT (50,500) {:.4} [upper tail {:.4}], (100,500) {:.4} [upper tail {:.4}]; \
             LRT (50,500) {:.4}, (300,500) {:.4}; R = {}",
            c50.clrt.rate,
            upper_tail_rate(c50),
            c100.clrt.rate,
            upper_tail_rate(c100),
            c50.lrt.rate,
            l300.lrt.rate,
            c50.config.replications
        ),
    )
}

fn criterion_4() -> Verdict {
    let (a, b) = (table2_lower_size(40), table2_lower_size(80));
    let pass = within(a.clrt.rate, 0.0561, 0.02) && within(b.clrt.rate, 0.0521, 0.02) && b.lrt.rate >= 0.44;
    Verdict::new(
        pass,
        format!(
            "CLRT (40,800,400) {:.4} [upper tail {:.4}], (80,1600,800) {:.4} [upper tail {:.4}]; \
             LRT (80,1600,800) {:.4}; R = {}",
            a.clrt.rate,
            upper_tail_rate(a),
            b.clrt.rate,
            upper_tail_rate(b),
            b.lrt.rate,
            a.config.replications
        ),
    )
}

fn criterion_5() -> Verdict {
    let a = run_simulation(&find_row(Table::Table3, 1.0, 40).size).unwrap();
    let b = run_simulation(&find_row(Table::Table3, 1.0, 80).size).unwrap();
    let pass = within(a.clrt.rate, 0.054, 0.025) && within(b.clrt.rate, 0.048, 0.025);
    let (ma, va) = summary(&a.clrt_z_scores());
    let (mb, vb) = summary(&b.clrt_z_scores());
    Verdict::new(
        pass,
        format!(
            "scaled t5, beta 6: CLRT (40,400,800) {:.4} [z mean {ma:.3}, var {va:.3}], \
             (80,800,1600) {:.4} [z mean {mb:.3}, var {vb:.3}]; R = {}",
            a.clrt.rate, b.clrt.rate, a.config.replications
        ),
    )
}

/// z-scores of the same replicates with `S·n/(n−1)` and `y = p/(n−1)`.
fn unbiased_divisor_z(report: &SimulationReport) -> Vec<f64> {
    let cfg = report.config;
    let (p, n) = (cfg.p, cfg.n1);
    let ratios = DimensionRatios::one_sample(p, n - 1).unwrap();
    (0..cfg.replications as u64)
        .map(|i| {
            let (x, _) = replicate_dataset(&cfg, i).unwrap();
            let s = sample_covariance(&x);
            let scaled = CovarianceMatrix::new(s.values() * (n as f64 / (n - 1) as f64), n - 1).unwrap();
            let core = one_sample_lr_core(&scaled).unwrap();
            clrt_one_sample_from_core(core, ratios, cfg.alpha, cfg.tail).unwrap().standardized
        })
        .collect()
}

fn summary(z: &[f64]) -> (f64, f64) {
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn criterion_6() -> Verdict {
    let one = table1_size(100);
    let two = table2_lower_size(80);
    let z1 = one.clrt_z_scores();
    let z2 = two.clrt_z_scores();
    let (d1, p1) = normal_ks(&z1);
    let (d2, p2) = normal_ks(&z2);
    let (m1, v1) = summary(&z1);
    let (m2, v2) = summary(&z2);
    let (du, pu) = normal_ks(&unbiased_divisor_z(one));
    Verdict::new(
        p1 >= 0.01 && p2 >= 0.01,
        format!(
            "one-sample (100,500): D {d1:.4}, p {p1:.4}, z mean {m1:.4}, var {v1:.4}; \
             two-sample (80,1600,800): D {d2:.4}, p {p2:.4}, z mean {m2:.4}, var {v2:.4}; \
             informational, one-sample with divisor n-1: D {du:.4}, p {pu:.4}"
        ),
    )
}

fn criterion_7() -> Verdict {
    let report = run_simulation(&SimulationConfig::one_sample(2, 2000, 5000, SEED)).unwrap();
    Verdict::new(
        within(report.lrt.rate, 0.05, 0.015),
        format!("LRT (2,2000) size {:.4}; R = 5000", report.lrt.rate),
    )
}

fn criterion_8() -> Verdict {
    let (n, p) = (500, 50);
    let x = gaussian_matrix(n, p, SEED, 0);
    let q = random_orthogonal(p, SEED);
    let core = |m: &DMatrix<f64>| one_sample_lr_core(&sample_covariance(&ObservationMatrix::new(m.clone()).unwrap())).unwrap();
    let rotation = (core(&x) - core(&(&x * &q))).abs();

    let (n1, n2) = (400, 800);
    let a = gaussian_matrix(n1, p, SEED, 1);
    let b = gaussian_matrix(n2, p, SEED, 2);
    let t = DMatrix::<f64>::identity(p, p) * 2.0 + gaussian_matrix(p, p, SEED, 3) * 0.1;
    let core2 = |u: &DMatrix<f64>, v: &DMatrix<f64>| {
        let su = sample_covariance(&ObservationMatrix::new(u.clone()).unwrap());
        let sv = sample_covariance(&ObservationMatrix::new(v.clone()).unwrap());
        two_sample_lr_core(&su, &sv, n1, n2).unwrap()
    };
    let transform = (core2(&a, &b) - core2(&(&a * &t), &(&b * &t))).abs();

    let cfg = SimulationConfig::two_sample(20, 200, 100, 200, SEED);
    let runs: Vec<SimulationReport> = [1, 2, 4]
        .iter()
        .map(|&w| run_simulation_with_workers(&cfg, w).unwrap())
        .collect();
    let bits = |r: &SimulationReport| -> Vec<(u64, u64, u64)> {
        r.outcomes
            .iter()
            .map(|o| (o.raw_statistic.to_bits(), o.clrt_z.to_bits(), o.dataset_digest))
            .collect()
    };
    let deterministic = runs.windows(2).all(|w| bits(&w[0]) == bits(&w[1]) && w[0].clrt == w[1].clrt);
    Verdict::new(
        rotation < 1e-9 && transform < 1e-8 && deterministic,
        format!(
            "rotation {rotation:.1e}, common transform {transform:.1e}, \
             bit-exact across 1/2/4 workers: {deterministic}"
        ),
    )
}

fn criterion_9() -> Verdict {
    let one = run_simulation(&find_row(Table::Table1, 0.2, 50).power.unwrap()).unwrap();
    let two = run_simulation(&find_row(Table::Table2Lower, 0.2, 40).power.unwrap()).unwrap();
    Verdict::new(
        one.clrt.rate == 1.0 && two.clrt.rate >= 0.95,
        format!(
            "power: one-sample (50,500) {:.4}, two-sample (40,800,400) {:.4} [upper tail {:.4}]",
            one.clrt.rate,
            two.clrt.rate,
            upper_tail_rate(&two)
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("closed forms vs oracles", criterion_1),
        ("log-affine variance assembly", criterion_2),
        ("Table 1 sizes", criterion_3),
        ("Table 2 sizes", criterion_4),
        ("Table 3 sizes", criterion_5),
        ("normal limit of z-scores", criterion_6),
        ("classical chi-square regime", criterion_7),
        ("invariances and determinism", criterion_8),
        ("power spot checks", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| Verdict::new(false, "panicked".into()));
        if !verdict.pass {
            failed += 1;
        }
        println!(
            "criterion {} ({name}): {} | {} | {:.1}s",
            i + 1,
            if verdict.pass { "PASS" } else { "FAIL" },
            verdict.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
