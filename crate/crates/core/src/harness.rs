//! Monte-Carlo driver: algorithm registry, per-trial records, means, CDFs
//! and CSV/JSON export.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{aufp, solve_p1prime, AufpOptions, OneToOneResult, OneToOneStatus};
use crate::model::{max_snr_association, Network, SolveResult};
use crate::oracle::{brute_force_optimum, BRUTE_FORCE_CAP};
use crate::power::{solve_power_fixed_assoc, FixedPointOptions};
use crate::scenario::{generate_hetnet, ScenarioConfig, UserDist};
use crate::sumpower::ulsum;
use crate::twostage::{dlsum, dlsuma, power_balance_transform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ulsum,
    Ulsuma,
    Dlsum,
    Dlsuma,
    Maxsnr,
    Aufp,
    P1prime,
    Brute,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Ulsum,
        Algorithm::Ulsuma,
        Algorithm::Dlsum,
        Algorithm::Dlsuma,
        Algorithm::Maxsnr,
        Algorithm::Aufp,
        Algorithm::P1prime,
        Algorithm::Brute,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ulsum => "ulsum",
            Algorithm::Ulsuma => "ulsuma",
            Algorithm::Dlsum => "dlsum",
            Algorithm::Dlsuma => "dlsuma",
            Algorithm::Maxsnr => "maxsnr",
            Algorithm::Aufp => "aufp",
            Algorithm::P1prime => "p1prime",
            Algorithm::Brute => "brute",
        }
    }

    fn needs_square(self) -> bool {
        matches!(self, Algorithm::Aufp | Algorithm::P1prime)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NotConverged,
    /// One-to-one solvers only: min-SINR below 1, so the result carries no
    /// optimality certificate.
    Infeasible,
    Skipped,
    Failed,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NotConverged => "not_converged",
            Status::Infeasible => "infeasible",
            Status::Skipped => "skipped",
            Status::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Fixed-point tolerance.
    pub tol: f64,
    /// Final auction precision for AUFP; `None` picks the default.
    pub eps: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: FixedPointOptions::default().tol,
            eps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub algorithm: Algorithm,
    pub status: Status,
    /// Skip or failure reason.
    pub message: Option<String>,
    pub min_sinr: Option<f64>,
    pub upper_bound: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub result: Option<SolveResult>,
}

impl Outcome {
    fn skipped(algorithm: Algorithm, why: &str) -> Self {
        Outcome {
            algorithm,
            status: Status::Skipped,
            message: Some(why.into()),
            min_sinr: None,
            upper_bound: None,
            runtime_ms: None,
            result: None,
        }
    }

    fn failed(algorithm: Algorithm, err: &Error) -> Self {
        Outcome {
            status: Status::Failed,
            message: Some(err.to_string()),
            ..Outcome::skipped(algorithm, "")
        }
    }

    fn solved(algorithm: Algorithm, result: SolveResult, upper_bound: Option<f64>) -> Self {
        Outcome {
            algorithm,
            status: if result.converged { Status::Ok } else { Status::NotConverged },
            message: None,
            min_sinr: Some(result.min_sinr),
            upper_bound,
            runtime_ms: None,
            result: Some(result),
        }
    }

    fn one_to_one(algorithm: Algorithm, r: OneToOneResult) -> Self {
        let mut out = Outcome::solved(algorithm, r.result, None);
        if r.status == OneToOneStatus::Infeasible && out.status == Status::Ok {
            out.status = Status::Infeasible;
        }
        out
    }
}

/// Runs one algorithm. Sum-power bounds report their bound as `min_sinr`;
/// their `result` holds the uplink solution (for ULSumA, on the
/// power-balanced network).
pub fn run_algorithm(net: &Network, alg: Algorithm, settings: &SolverSettings) -> Outcome {
    if alg.needs_square() && net.n_bs() != net.n_users() {
        return Outcome::skipped(alg, "requires K = N");
    }
    let opts = FixedPointOptions::with_tol(settings.tol);
    let run = || -> Result<Outcome> {
        Ok(match alg {
            Algorithm::Ulsum => {
                let r = ulsum(net, net.total_budget(), &opts)?;
                let mut res = r.to_solve_result(net);
                res.min_sinr = r.gamma_sum;
                Outcome::solved(alg, res, Some(r.gamma_sum))
            }
            Algorithm::Ulsuma => {
                let b = power_balance_transform(net)?;
                let scaled = &b.net_scaled;
                let r = ulsum(scaled, scaled.total_budget(), &opts)?;
                let mut res = r.to_solve_result(scaled);
                res.min_sinr = r.gamma_sum;
                Outcome::solved(alg, res, Some(r.gamma_sum))
            }
            Algorithm::Dlsum => {
                let r = dlsum(net, &opts)?;
                Outcome::solved(alg, r.result, Some(r.upper_bound))
            }
            Algorithm::Dlsuma => {
                let r = dlsuma(net, &opts)?;
                Outcome::solved(alg, r.result, Some(r.upper_bound))
            }
            Algorithm::Maxsnr => {
                let r = solve_power_fixed_assoc(net, &max_snr_association(net), &opts)?;
                Outcome::solved(alg, r, None)
            }
            Algorithm::Aufp => {
                let o = AufpOptions {
                    eps: settings.eps,
                    power: opts.clone(),
                    ..Default::default()
                };
                Outcome::one_to_one(alg, aufp(net, &o)?)
            }
            Algorithm::P1prime => Outcome::one_to_one(alg, solve_p1prime(net, &opts)?),
            Algorithm::Brute => {
                let r = brute_force_optimum(net, false, &opts)?;
                let v = r.min_sinr;
                Outcome::solved(alg, r, Some(v))
            }
        })
    };
    run().unwrap_or_else(|e| Outcome::failed(alg, &e))
}

fn d_runs() -> usize {
    500
}
fn d_clip() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Base scenario; its `snr_db` and `seed` are replaced per point and trial.
    pub scenario: ScenarioConfig,
    pub snr_db: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "d_runs")]
    pub n_runs: usize,
    /// Trial `i` uses scenario seed `seed + i`.
    #[serde(default)]
    pub seed: u64,
    /// CDF values above this are clipped to it.
    #[serde(default = "d_clip")]
    pub cdf_clip: f64,
    /// Fill the runtime column (makes output depend on the machine).
    #[serde(default)]
    pub record_timing: bool,
    #[serde(default)]
    pub solver: SolverSettings,
}

impl ExperimentSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidValue(m));
        if self.n_runs == 0 {
            return bad("n_runs must be >= 1".into());
        }
        if self.snr_db.is_empty() || self.algorithms.is_empty() {
            return bad("snr_db and algorithms must be non-empty".into());
        }
        if !(self.cdf_clip > 0.0) {
            return bad("cdf_clip must be positive".into());
        }
        if !(self.solver.tol > 0.0) {
            return bad("solver tol must be positive".into());
        }
        self.scenario.validate()?;
        if self.algorithms.contains(&Algorithm::Brute) {
            let size = (self.scenario.n_bs() as f64).powi(self.scenario.n_users as i32);
            if size > BRUTE_FORCE_CAP {
                return Err(Error::TooLarge {
                    size,
                    cap: BRUTE_FORCE_CAP,
                });
            }
        }
        Ok(())
    }

    fn trial_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub run: usize,
    pub seed: u64,
    pub snr_db: f64,
    pub outcomes: Vec<Outcome>,
}

impl TrialRecord {
    pub fn get(&self, alg: Algorithm) -> Option<&Outcome> {
        self.outcomes.iter().find(|o| o.algorithm == alg)
    }

    pub fn min_sinr(&self, alg: Algorithm) -> Option<f64> {
        self.get(alg).and_then(|o| o.min_sinr)
    }
}

/// Generates the trial network and runs every algorithm of `spec` on it.
pub fn run_trial(spec: &ExperimentSpec, run: usize, snr_db: f64) -> Result<TrialRecord> {
    let seed = spec.trial_seed(run);
    let config = ScenarioConfig {
        snr_db,
        seed,
        ..spec.scenario.clone()
    };
    let net = generate_hetnet(&config)?.network;
    let outcomes = spec
        .algorithms
        .iter()
        .map(|&alg| {
            let start = Instant::now();
            let mut o = run_algorithm(&net, alg, &spec.solver);
            if spec.record_timing {
                o.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            if o.algorithm == Algorithm::Brute {
                // keep records small: the optimum value is what matters
                o.result = None;
            }
            o
        })
        .collect();
    Ok(TrialRecord {
        run,
        seed,
        snr_db,
        outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub snr_db: f64,
    /// Mean of the linear min-SINR over runs that produced a value.
    pub mean_linear: f64,
    pub mean_db: f64,
    pub n_values: usize,
    pub n_skipped: usize,
    pub n_failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub algorithm: Algorithm,
    pub snr_db: f64,
    pub value: f64,
    pub cumulative_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub spec: ExperimentSpec,
    /// Ordered by SNR point, then run index.
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentResults {
    pub fn mean(&self, alg: Algorithm, snr_db: f64) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.algorithm == alg && r.snr_db == snr_db)
            .map(|r| r.mean_linear)
    }

    /// Empirical CDF per (algorithm, SNR) with values clipped at
    /// `spec.cdf_clip`.
    pub fn cdf(&self) -> Vec<CdfRow> {
        let mut out = Vec::new();
        for &snr in &self.spec.snr_db {
            for &alg in &self.spec.algorithms {
                let mut v: Vec<f64> = self
                    .records
                    .iter()
                    .filter(|r| r.snr_db == snr)
                    .filter_map(|r| r.min_sinr(alg))
                    .map(|x| x.min(self.spec.cdf_clip))
                    .collect();
                v.sort_by(f64::total_cmp);
                let n = v.len() as f64;
                out.extend(v.into_iter().enumerate().map(|(i, value)| CdfRow {
                    algorithm: alg,
                    snr_db: snr,
                    value,
                    cumulative_probability: (i + 1) as f64 / n,
                }));
            }
        }
        out
    }
}

fn summarize(spec: &ExperimentSpec, records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for &snr in &spec.snr_db {
        for &alg in &spec.algorithms {
            let (mut sum, mut n, mut skipped, mut failed) = (0.0, 0, 0, 0);
            for o in records.iter().filter(|r| r.snr_db == snr).filter_map(|r| r.get(alg)) {
                match (o.status, o.min_sinr) {
                    (Status::Skipped, _) => skipped += 1,
                    (Status::Failed, _) | (_, None) => failed += 1,
                    (_, Some(v)) => {
                        sum += v;
                        n += 1;
                    }
                }
            }
            let mean = if n > 0 { sum / n as f64 } else { f64::NAN };
            rows.push(SummaryRow {
                algorithm: alg,
                snr_db: snr,
                mean_linear: mean,
                mean_db: 10.0 * mean.log10(),
                n_values: n,
                n_skipped: skipped,
                n_failed: failed,
            });
        }
    }
    rows
}

/// Runs `n_runs` trials at every SNR point in parallel. Results do not
/// depend on the thread count.
pub fn monte_carlo(spec: &ExperimentSpec) -> Result<ExperimentResults> {
    spec.validate()?;
    let jobs: Vec<(f64, usize)> = spec
        .snr_db
        .iter()
        .flat_map(|&s| (0..spec.n_runs).map(move |r| (s, r)))
        .collect();
    let records = jobs
        .into_par_iter()
        .map(|(snr, run)| run_trial(spec, run, snr))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(spec, &records);
    Ok(ExperimentResults {
        spec: spec.clone(),
        records,
        summary,
    })
}

/// One CSV line per (trial, algorithm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub n_macro: usize,
    pub picos_per_macro: usize,
    pub n_users: usize,
    pub user_dist: UserDist,
    pub snr_db: f64,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub min_sinr_linear: Option<f64>,
    pub min_sinr_db: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub converged: Option<bool>,
    pub upper_bound: Option<f64>,
    pub status: String,
}

const CSV_HEADER: [&str; 13] = [
    "n_macro",
    "picos_per_macro",
    "n_users",
    "user_dist",
    "snr_db",
    "seed",
    "algorithm",
    "min_sinr_linear",
    "min_sinr_db",
    "runtime_ms",
    "converged",
    "upper_bound",
    "status",
];

pub fn csv_rows(results: &ExperimentResults) -> Vec<CsvRow> {
    let sc = &results.spec.scenario;
    results
        .records
        .iter()
        .flat_map(|r| {
            r.outcomes.iter().map(move |o| CsvRow {
                n_macro: sc.n_macro,
                picos_per_macro: sc.picos_per_macro,
                n_users: sc.n_users,
                user_dist: sc.user_dist,
                snr_db: r.snr_db,
                seed: r.seed,
                algorithm: o.algorithm,
                min_sinr_linear: o.min_sinr,
                min_sinr_db: o.min_sinr.map(|v| 10.0 * v.log10()),
                runtime_ms: o.runtime_ms,
                converged: o.result.as_ref().map(|s| s.converged),
                upper_bound: o.upper_bound,
                status: match &o.message {
                    Some(m) if o.status == Status::Skipped => format!("skipped: {m}"),
                    _ => o.status.name().to_string(),
                },
            })
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the per-trial CSV.
pub fn export_csv(results: &ExperimentResults, path: &Path) -> Result<()> {
    write_rows(path, &CSV_HEADER, &csv_rows(results))
}

pub fn import_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<CsvRow>, _>>()?)
}

pub fn export_cdf_csv(results: &ExperimentResults, path: &Path) -> Result<()> {
    write_rows(
        path,
        &["algorithm", "snr_db", "value", "cumulative_probability"],
        &results.cdf(),
    )
}

pub fn export_json(results: &ExperimentResults, path: &Path) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(results)?)?;
    Ok(())
}

/// Mean linear min-SINR per (algorithm, SNR) of imported rows.
pub fn means_from_rows(rows: &[CsvRow]) -> BTreeMap<(Algorithm, String), f64> {
    let mut acc: BTreeMap<(Algorithm, String), (f64, usize)> = BTreeMap::new();
    for r in rows {
        if let Some(v) = r.min_sinr_linear {
            let e = acc.entry((r.algorithm, r.snr_db.to_string())).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::UserDist;

    fn spec(algs: Vec<Algorithm>, n_macro: usize, picos: usize, k: usize, runs: usize) -> ExperimentSpec {
        ExperimentSpec {
            scenario: ScenarioConfig::new(n_macro, picos, k, 0.0, UserDist::UniInCell),
            snr_db: vec![10.0],
            algorithms: algs,
            n_runs: runs,
            seed: 100,
            cdf_clip: 3.0,
            record_timing: false,
            solver: SolverSettings::default(),
        }
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
            assert_eq!(serde_json::to_string(&a).unwrap(), format!("\"{}\"", a.name()));
        }
        assert!("dlsumb".parse::<Algorithm>().is_err());
    }

    #[test]
    fn maxsnr_single_user() {
        let s = spec(vec![Algorithm::Maxsnr], 1, 0, 1, 1);
        let rec = run_trial(&s, 0, 10.0).unwrap();
        let net = generate_hetnet(&ScenarioConfig {
            snr_db: 10.0,
            seed: 100,
            ..s.scenario.clone()
        })
        .unwrap()
        .network;
        let want = net.budget()[0] * net.gain(0, 0);
        assert!((rec.min_sinr(Algorithm::Maxsnr).unwrap() - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn dominance_in_records() {
        let s = spec(
            vec![Algorithm::Dlsuma, Algorithm::Ulsuma, Algorithm::Dlsum, Algorithm::Ulsum, Algorithm::Maxsnr],
            4,
            1,
            8,
            6,
        );
        let res = monte_carlo(&s).unwrap();
        for r in &res.records {
            let da = r.min_sinr(Algorithm::Dlsuma).unwrap();
            assert!(da <= r.min_sinr(Algorithm::Ulsuma).unwrap() * (1.0 + 1e-9));
            let d = r.min_sinr(Algorithm::Dlsum).unwrap();
            assert!(d <= r.min_sinr(Algorithm::Ulsum).unwrap() * (1.0 + 1e-9));
            for o in &r.outcomes {
                if let (Some(v), Some(ub)) = (o.min_sinr, o.upper_bound) {
                    assert!(v <= ub * (1.0 + 1e-9));
                }
            }
        }
    }

    #[test]
    fn brute_force_dominates_on_small_trials() {
        let s = spec(
            vec![Algorithm::Brute, Algorithm::Dlsum, Algorithm::Maxsnr, Algorithm::Aufp],
            1,
            2,
            3,
            5,
        );
        let res = monte_carlo(&s).unwrap();
        for r in &res.records {
            let b = r.min_sinr(Algorithm::Brute).unwrap();
            for a in [Algorithm::Dlsum, Algorithm::Maxsnr, Algorithm::Aufp] {
                assert!(b >= r.min_sinr(a).unwrap() * (1.0 - 1e-9));
            }
        }
        let too_big = spec(vec![Algorithm::Brute], 4, 2, 18, 1);
        assert!(monte_carlo(&too_big).is_err());
    }

    #[test]
    fn one_to_one_skipped_when_not_square() {
        let s = spec(vec![Algorithm::Aufp, Algorithm::P1prime], 1, 1, 3, 1);
        let r = run_trial(&s, 0, 10.0).unwrap();
        for o in &r.outcomes {
            assert_eq!(o.status, Status::Skipped);
            assert!(o.message.as_deref().unwrap().contains("K = N"));
        }
        let res = monte_carlo(&s).unwrap();
        assert_eq!(res.summary[0].n_skipped, 1);
        assert_eq!(csv_rows(&res)[0].status, "skipped: requires K = N");
    }

    #[test]
    fn single_run_mean_and_identical_columns() {
        let s = spec(vec![Algorithm::Dlsuma, Algorithm::Dlsuma], 1, 2, 3, 1);
        let res = monte_carlo(&s).unwrap();
        let v = res.records[0].outcomes[0].min_sinr.unwrap();
        assert_eq!(res.summary[0].mean_linear, v);
        assert_eq!(res.records[0].outcomes[0], res.records[0].outcomes[1]);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut s = spec(vec![Algorithm::Dlsum], 1, 1, 2, 1);
        s.n_runs = 1;
        let res = monte_carlo(&s).unwrap();
        export_csv(&res, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        let rows = import_csv(&path).unwrap();
        assert_eq!(rows, csv_rows(&res));

        let empty = ExperimentResults {
            records: vec![],
            summary: vec![],
            ..res.clone()
        };
        export_csv(&empty, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 1);

        let jpath = dir.path().join("r.json");
        export_json(&res, &jpath).unwrap();
        let back: ExperimentResults =
            serde_json::from_str(&std::fs::read_to_string(&jpath).unwrap()).unwrap();
        assert_eq!(back, res);
    }

    #[test]
    fn cdf_is_monotone_and_clipped() {
        let mut s = spec(vec![Algorithm::Ulsuma, Algorithm::Maxsnr], 1, 2, 3, 20);
        s.cdf_clip = 0.5;
        let res = monte_carlo(&s).unwrap();
        let cdf = res.cdf();
        assert_eq!(cdf.len(), 40);
        for alg in [Algorithm::Ulsuma, Algorithm::Maxsnr] {
            let rows: Vec<&CdfRow> = cdf.iter().filter(|r| r.algorithm == alg).collect();
            assert!(rows.windows(2).all(|w| w[0].value <= w[1].value
                && w[0].cumulative_probability < w[1].cumulative_probability));
            assert_eq!(rows.last().unwrap().cumulative_probability, 1.0);
            assert!(rows.iter().all(|r| r.value <= 0.5));
        }
    }

    #[test]
    fn spec_json_defaults_and_validation() {
        let s = ExperimentSpec::from_json(
            r#"{"scenario": {"n_macro": 4, "picos_per_macro": 2, "n_users": 18, "user_dist": "congested"},
                "snr_db": [5, 15], "algorithms": ["dlsuma", "maxsnr"]}"#,
        )
        .unwrap();
        assert_eq!(s.n_runs, 500);
        assert_eq!(s.cdf_clip, 3.0);
        assert!(!s.record_timing);
        assert!(ExperimentSpec::from_json(
            r#"{"scenario": {"n_macro": 4, "picos_per_macro": 2, "n_users": 18, "user_dist": "congested"},
                "snr_db": [5], "algorithms": ["dlsuma"], "n_runs": 0}"#,
        )
        .is_err());
    }
}
