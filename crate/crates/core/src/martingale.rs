//! Nested Monte Carlo for the Doob martingale of a statistic along the
//! exploration filtration: `Δ_k = E(F | ℱ_k) − E(F | ℱ_{k−1})`, its
//! moments, `C_n = sup_k E Δ_k⁴`, and the normalised differences
//! `D_k = Δ_k / √Var F`.
//!
//! Two estimators of `Δ_k` given a prefix of length `k`:
//!
//! * `Independent`: average `F` over `S` completions of the length-`k`
//!   prefix and, separately, over `S` completions of the same prefix cut
//!   to `k − 1`.
//! * `SwitchCoupled`: for each completion `m` of the length-`k` prefix,
//!   draw `b'` uniformly among the step-`k` candidates and switch
//!   `(a,b),(b',c) → (a,b'),(b,c)`. The switched matching is a uniform
//!   completion of the length-`(k−1)` prefix, so `F(m) − F(m')` is unbiased
//!   for `Δ_k` and bounded by the switching constant of `F`.
//!
//! Each estimate is also split into two independent half batches `a`, `b`;
//! `Δ̂_a Δ̂_b` is an unbiased estimate of `Δ_k²` given the prefix.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree::DegreeSequence;
use crate::error::{Error, Result};
use crate::exploration::{ExplorationState, Explorer, Pairing};
use crate::rng::{self, tag};
use crate::statistics::StatisticSpec;
use crate::summary::{self, Moments};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaEstimator {
    #[default]
    Independent,
    SwitchCoupled,
}

impl std::str::FromStr for DeltaEstimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent" => Ok(Self::Independent),
            "switch-coupled" => Ok(Self::SwitchCoupled),
            _ => Err(Error::Parse(format!("unknown estimator `{s}`"))),
        }
    }
}

impl std::fmt::Display for DeltaEstimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Independent => "independent",
            Self::SwitchCoupled => "switch-coupled",
        })
    }
}

/// Monte Carlo budget for Δ estimation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Prefixes per step, `P`.
    pub prefixes: usize,
    /// Completions per conditional mean, `S`.
    pub completions: usize,
    pub estimator: DeltaEstimator,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            prefixes: 200,
            completions: 100,
            estimator: DeltaEstimator::Independent,
        }
    }
}

impl Budget {
    fn check(&self) -> Result<()> {
        if self.prefixes == 0 || self.completions == 0 {
            return Err(Error::Parameter("P and S must be at least 1".into()));
        }
        Ok(())
    }
}

/// One estimate `Δ̂` with its half-batch split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaSample {
    pub delta: f64,
    /// `(Δ̂_a, Δ̂_b)` when `S ≥ 2`.
    pub halves: Option<(f64, f64)>,
}

impl DeltaSample {
    pub fn corrected_sq(&self) -> Option<f64> {
        self.halves.map(|(a, b)| a * b)
    }
}

struct Engine<'a> {
    ex: Explorer,
    spec: &'a StatisticSpec,
}

impl<'a> Engine<'a> {
    fn new(spec: &'a StatisticSpec, ds: &DegreeSequence) -> Result<Self> {
        Ok(Self {
            ex: Explorer::new(ds)?,
            spec,
        })
    }

    fn f_partners(&self, partner: &[u32]) -> Result<f64> {
        self.spec.evaluate(&self.ex.graph_of_partners(partner))
    }

    fn f_state(&self, st: &ExplorationState) -> Result<f64> {
        self.spec.evaluate(&self.ex.graph_of(st))
    }

    fn complete(&self, st: &ExplorationState, seed: u64) -> (ExplorationState, rng::StreamRng) {
        let mut c = st.clone();
        let mut r = rng::stream(seed);
        self.ex.run(&mut c, &mut r);
        (c, r)
    }

    /// Sum of `F` over completions `range` of `st`.
    fn completion_sum(&self, st: &ExplorationState, range: std::ops::Range<usize>, seed: u64) -> Result<f64> {
        if st.is_complete() {
            return Ok(self.f_state(st)? * range.len() as f64);
        }
        let mut s = 0.0;
        for j in range {
            let (c, _) = self.complete(st, rng::derive2(seed, tag::COMPLETION, j as u64));
            s += self.f_state(&c)?;
        }
        Ok(s)
    }

    fn conditional_mean(&self, st: &ExplorationState, completions: usize, seed: u64) -> Result<f64> {
        Ok(self.completion_sum(st, 0..completions, seed)? / completions as f64)
    }

    /// `Δ̂` for the step leading from `prev` to `cur`.
    fn delta(
        &self,
        prev: &ExplorationState,
        cur: &ExplorationState,
        completions: usize,
        estimator: DeltaEstimator,
        seed: u64,
    ) -> Result<DeltaSample> {
        let s = completions;
        let h = s / 2;
        let (sum_a, sum_b) = match estimator {
            DeltaEstimator::Independent => {
                let seed_cur = rng::derive(seed, 1);
                let seed_prev = rng::derive(seed, 2);
                let a = self.completion_sum(cur, 0..h, seed_cur)? - self.completion_sum(prev, 0..h, seed_prev)?;
                let b = self.completion_sum(cur, h..s, seed_cur)? - self.completion_sum(prev, h..s, seed_prev)?;
                (a, b)
            }
            DeltaEstimator::SwitchCoupled => {
                let (first, b) = cur.pair_ids().next_back().expect("cur is one step past prev");
                let cands = self.ex.candidates(prev, first);
                let mut terms = Vec::with_capacity(s);
                for j in 0..s {
                    let (c, mut r) = self.complete(cur, rng::derive2(seed, tag::COMPLETION, j as u64));
                    let mut partner = self.ex.partners(&c);
                    let f = self.f_partners(&partner)?;
                    let b2 = cands[r.random_range(0..cands.len())];
                    if b2 == b {
                        terms.push(0.0);
                        continue;
                    }
                    let c2 = partner[b2 as usize];
                    partner[first as usize] = b2;
                    partner[b2 as usize] = first;
                    partner[b as usize] = c2;
                    partner[c2 as usize] = b;
                    terms.push(f - self.f_partners(&partner)?);
                }
                (terms[..h].iter().sum(), terms[h..].iter().sum())
            }
        };
        let delta = (sum_a + sum_b) / s as f64;
        let halves = (h >= 1).then(|| (sum_a / h as f64, sum_b / (s - h) as f64));
        Ok(DeltaSample { delta, halves })
    }

    /// States after `k − 1` and `k` steps of a fresh exploration.
    fn prefix_pair(&self, k: usize, seed: u64) -> (ExplorationState, ExplorationState) {
        let mut r = rng::stream(seed);
        let mut st = self.ex.initial_state();
        for _ in 1..k {
            self.ex.step(&mut st, &mut r);
        }
        let prev = st.clone();
        self.ex.step(&mut st, &mut r);
        (prev, st)
    }

    fn delta_samples(&self, k: usize, budget: Budget, seed: u64) -> Result<Vec<DeltaSample>> {
        let base = rng::derive2(seed, tag::PREFIX, k as u64);
        (0..budget.prefixes)
            .into_par_iter()
            .map(|p| {
                let sp = rng::derive(base, p as u64);
                let (prev, cur) = self.prefix_pair(k, rng::derive(sp, 0));
                self.delta(&prev, &cur, budget.completions, budget.estimator, rng::derive(sp, 1))
            })
            .collect()
    }

    fn direct_samples(&self, count: usize, seed: u64) -> Result<Vec<f64>> {
        (0..count)
            .into_par_iter()
            .map(|i| self.f_state(&self.ex.sample_state(rng::derive2(seed, tag::VARIANCE, i as u64))))
            .collect()
    }
}

/// Average of `F` over `completions` continuations of `prefix`.
pub fn conditional_mean(
    spec: &StatisticSpec,
    ds: &DegreeSequence,
    prefix: &[Pairing],
    completions: usize,
    seed: u64,
) -> Result<f64> {
    if completions == 0 {
        return Err(Error::Parameter("completions must be at least 1".into()));
    }
    let e = Engine::new(spec, ds)?;
    let st = e.ex.replay(prefix)?;
    e.conditional_mean(&st, completions, seed)
}

fn check_step(k: usize, m: usize) -> Result<()> {
    if k == 0 || k > m {
        return Err(Error::Parameter(format!("step {k} outside 1..={m}")));
    }
    Ok(())
}

/// `P` independent estimates of `Δ_k`, each from its own random prefix.
pub fn delta_samples(
    spec: &StatisticSpec,
    ds: &DegreeSequence,
    k: usize,
    budget: Budget,
    seed: u64,
) -> Result<Vec<DeltaSample>> {
    budget.check()?;
    let e = Engine::new(spec, ds)?;
    check_step(k, e.ex.m())?;
    e.delta_samples(k, budget, seed)
}

/// Second and fourth moments of `Δ_k` with standard errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaMomentEstimate {
    pub k: usize,
    pub mean_sq: f64,
    pub std_err_sq: f64,
    pub mean_4th: f64,
    pub std_err_4th: f64,
    /// Mean of half-batch products; unbiased for `E Δ_k²`.
    pub mean_sq_corrected: Option<f64>,
    pub std_err_sq_corrected: Option<f64>,
    pub prefix_samples: usize,
    pub completions: usize,
}

impl DeltaMomentEstimate {
    pub fn from_samples(k: usize, samples: &[DeltaSample], completions: usize) -> Result<Self> {
        let sq: Vec<f64> = samples.iter().map(|s| s.delta * s.delta).collect();
        let q4: Vec<f64> = sq.iter().map(|x| x * x).collect();
        let (mean_sq, std_err_sq) = mean_se_or_zero(&sq)?;
        let (mean_4th, std_err_4th) = mean_se_or_zero(&q4)?;
        let corr: Option<Vec<f64>> = samples.iter().map(DeltaSample::corrected_sq).collect();
        let (mean_sq_corrected, std_err_sq_corrected) = match corr {
            Some(c) => {
                let (m, s) = mean_se_or_zero(&c)?;
                (Some(m), Some(s))
            }
            None => (None, None),
        };
        Ok(Self {
            k,
            mean_sq,
            std_err_sq,
            mean_4th,
            std_err_4th,
            mean_sq_corrected,
            std_err_sq_corrected,
            prefix_samples: samples.len(),
            completions,
        })
    }

    /// `E Δ⁴ ≥ (E Δ²)²` up to three combined standard errors.
    pub fn jensen_consistent(&self) -> bool {
        let se = (self.std_err_4th.powi(2) + (2.0 * self.mean_sq * self.std_err_sq).powi(2)).sqrt();
        self.mean_4th >= self.mean_sq.powi(2) - 3.0 * se
    }
}

fn mean_se_or_zero(xs: &[f64]) -> Result<(f64, f64)> {
    match xs.len() {
        0 => Err(Error::TooFewSamples { needed: 1, got: 0 }),
        1 => Ok((xs[0], f64::INFINITY)),
        _ => summary::mean_se(xs),
    }
}

pub fn delta_moments(
    spec: &StatisticSpec,
    ds: &DegreeSequence,
    k: usize,
    budget: Budget,
    seed: u64,
) -> Result<DeltaMomentEstimate> {
    let samples = delta_samples(spec, ds, k, budget, seed)?;
    DeltaMomentEstimate::from_samples(k, &samples, budget.completions)
}

/// About 32 evenly spaced steps plus `1` and `m`.
pub fn default_grid(m: usize) -> Vec<usize> {
    grid(m, 32)
}

pub fn grid(m: usize, points: usize) -> Vec<usize> {
    if m == 0 {
        return Vec::new();
    }
    let mut g: Vec<usize> = (0..points.max(1))
        .map(|i| 1 + (i * (m - 1)) / points.max(1))
        .chain([1, m])
        .collect();
    g.sort_unstable();
    g.dedup();
    g
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CnEstimate {
    /// `max_k Ê Δ_k⁴` over the grid.
    pub c_n: f64,
    pub c_n_std_err: f64,
    pub argmax_k: usize,
    pub m: usize,
    /// The grid missed some steps, so `c_n` is a lower bound on the supremum.
    pub grid_only: bool,
    pub note: String,
    pub table: Vec<DeltaMomentEstimate>,
}

pub fn estimate_cn(
    spec: &StatisticSpec,
    ds: &DegreeSequence,
    k_grid: Option<&[usize]>,
    budget: Budget,
    seed: u64,
) -> Result<CnEstimate> {
    budget.check()?;
    let e = Engine::new(spec, ds)?;
    let m = e.ex.m();
    let grid = match k_grid {
        Some(g) if g.is_empty() => return Err(Error::Parameter("empty k grid".into())),
        Some(g) => g.to_vec(),
        None => default_grid(m),
    };
    let mut table = Vec::with_capacity(grid.len());
    for &k in &grid {
        check_step(k, m)?;
        let samples = e.delta_samples(k, budget, seed)?;
        table.push(DeltaMomentEstimate::from_samples(k, &samples, budget.completions)?);
    }
    let best = table
        .iter()
        .max_by(|a, b| a.mean_4th.total_cmp(&b.mean_4th))
        .expect("grid non-empty");
    let mut distinct = grid.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let grid_only = distinct.len() < m;
    Ok(CnEstimate {
        c_n: best.mean_4th,
        c_n_std_err: best.std_err_4th,
        argmax_k: best.k,
        m,
        grid_only,
        note: if grid_only {
            format!("supremum over {} of {m} steps; a lower bound on C_n", distinct.len())
        } else {
            "supremum over every step".into()
        },
        table,
    })
}

/// Per-k table as CSV: `k,mean_sq,se_sq,mean_4th,se_4th,P,S` followed by
/// the bias-corrected second moment and its standard error.
pub fn write_delta_table<W: Write>(table: &[DeltaMomentEstimate], mut w: W) -> Result<()> {
    writeln!(w, "k,mean_sq,se_sq,mean_4th,se_4th,P,S,mean_sq_corrected,se_sq_corrected")?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    for r in table {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.k,
            r.mean_sq,
            r.std_err_sq,
            r.mean_4th,
            r.std_err_4th,
            r.prefix_samples,
            r.completions,
            opt(r.mean_sq_corrected),
            opt(r.std_err_sq_corrected)
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceIdentityReport {
    /// `Σ_k Ê Δ̂_k²` (biased upward by completion noise).
    pub sum_delta_sq_raw: f64,
    /// `Σ_k` of the half-batch products; the compared quantity.
    pub sum_delta_sq: f64,
    pub sum_std_err: f64,
    pub variance: f64,
    pub variance_std_err: f64,
    pub combined_std_err: f64,
    pub passed: bool,
    pub table: Vec<DeltaMomentEstimate>,
}

/// Compare `Σ_{k=1}^{m} Ê Δ_k²` with the sample variance of `F` over `R`
/// direct replications, passing within three combined standard errors.
pub fn variance_identity_check(
    spec: &StatisticSpec,
    ds: &DegreeSequence,
    replications: usize,
    budget: Budget,
    seed: u64,
) -> Result<VarianceIdentityReport> {
    budget.check()?;
    if budget.completions < 2 {
        return Err(Error::Parameter("the corrected sum needs S ≥ 2".into()));
    }
    let e = Engine::new(spec, ds)?;
    let m = e.ex.m();
    let mut table = Vec::with_capacity(m);
    for k in 1..=m {
        let samples = e.delta_samples(k, budget, seed)?;
        table.push(DeltaMomentEstimate::from_samples(k, &samples, budget.completions)?);
    }
    let sum_delta_sq_raw: f64 = table.iter().map(|r| r.mean_sq).sum();
    let sum_delta_sq: f64 = table.iter().filter_map(|r| r.mean_sq_corrected).sum();
    let sum_std_err = table
        .iter()
        .filter_map(|r| r.std_err_sq_corrected)
        .map(|s| s * s)
        .sum::<f64>()
        .sqrt();
    let direct = e.direct_samples(replications, seed)?;
    let variance = Moments::of(&direct)?.variance;
    let variance_std_err = summary::variance_std_err(&direct)?;
    let combined_std_err = (sum_std_err.powi(2) + variance_std_err.powi(2)).sqrt();
    let passed = (sum_delta_sq - variance).abs() <= 3.0 * combined_std_err;
    Ok(VarianceIdentityReport {
        sum_delta_sq_raw,
        sum_delta_sq,
        sum_std_err,
        variance,
        variance_std_err,
        combined_std_err,
        passed,
        table,
    })
}

/// Diagnostics along one realised exploration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceDiagnostics {
    pub seed: u64,
    /// `max_k |D̂_k|`.
    pub max_abs_d: f64,
    /// `Σ_k D̂_k²`.
    pub sum_d_sq: f64,
    /// `Σ_k` of half-batch products over `Var̂ F`.
    pub sum_d_sq_corrected: Option<f64>,
    /// `Σ_k Δ̂_k`, which telescopes to about `F − E F`.
    pub telescoped: f64,
    pub f_value: f64,
    /// `Σ_k D̂_k² 1[E_k]` and the remainder, with `E_k` the event that the
    /// active set emptied within the window before step `k`.
    pub w_sum: Option<f64>,
    pub z_sum: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McLeishDiagnostics {
    pub statistic: String,
    pub n: usize,
    pub m: usize,
    pub est_variance: f64,
    pub est_variance_std_err: f64,
    pub est_mean: f64,
    pub median_max_abs_d: f64,
    pub mean_sum_d_sq: f64,
    pub mean_sum_d_sq_corrected: Option<f64>,
    pub window: Option<usize>,
    pub completions: usize,
    pub estimator: DeltaEstimator,
    pub replications: Vec<TraceDiagnostics>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McLeishConfig {
    pub replications: usize,
    /// Direct samples behind `Var̂ F` and `Ê F`.
    pub variance_samples: usize,
    pub completions: usize,
    pub estimator: DeltaEstimator,
    /// `α_n` for the window `2 d_max α_n` of the W/Z split.
    pub alpha: Option<f64>,
}

impl Default for McLeishConfig {
    fn default() -> Self {
        Self {
            replications: 200,
            variance_samples: 2000,
            completions: 100,
            estimator: DeltaEstimator::SwitchCoupled,
            alpha: None,
        }
    }
}

/// Estimate every `Δ_k` along `R` realised explorations and report
/// `max_k |D̂_k|` and `Σ_k D̂_k²` with `D̂_k = Δ̂_k / √Var̂ F`.
pub fn mcleish_diagnostics(
    spec: &StatisticSpec,
    ds: &DegreeSequence,
    cfg: McLeishConfig,
    seed: u64,
) -> Result<McLeishDiagnostics> {
    if cfg.replications == 0 || cfg.completions == 0 {
        return Err(Error::Parameter("R and S must be at least 1".into()));
    }
    let e = Engine::new(spec, ds)?;
    let direct = e.direct_samples(cfg.variance_samples.max(2), seed)?;
    let mom = Moments::of(&direct)?;
    if !(mom.variance > 0.0) {
        return Err(Error::DegenerateVariance(format!(
            "{}: sample variance {} over {} direct samples",
            spec.name(),
            mom.variance,
            direct.len()
        )));
    }
    let sd = mom.variance.sqrt();
    let window = cfg
        .alpha
        .map(|a| (2.0 * f64::from(ds.d_max()) * a).ceil() as usize);
    let m = e.ex.m();
    let reps: Vec<TraceDiagnostics> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| -> Result<TraceDiagnostics> {
            let s = rng::derive2(seed, tag::REPLICATION, r as u64);
            let mut walk = rng::stream(rng::derive(s, 0));
            let mut st = e.ex.initial_state();
            let (mut max_abs, mut sum_sq, mut tele) = (0.0f64, 0.0, 0.0);
            let mut sum_corr = Some(0.0);
            let (mut w_sum, mut z_sum) = (0.0, 0.0);
            for k in 1..=m {
                let prev = st.clone();
                e.ex.step(&mut st, &mut walk);
                let d = e.delta(&prev, &st, cfg.completions, cfg.estimator, rng::derive2(s, 1, k as u64))?;
                let dk = d.delta / sd;
                max_abs = max_abs.max(dk.abs());
                sum_sq += dk * dk;
                tele += d.delta;
                sum_corr = sum_corr.zip(d.corrected_sq()).map(|(a, b)| a + b / mom.variance);
                if let Some(w) = window {
                    let lo = k.saturating_sub(w);
                    let hit = st.empty_active_steps().iter().any(|&t| t >= lo && t <= k);
                    if hit {
                        w_sum += dk * dk;
                    } else {
                        z_sum += dk * dk;
                    }
                }
            }
            Ok(TraceDiagnostics {
                seed: s,
                max_abs_d: max_abs,
                sum_d_sq: sum_sq,
                sum_d_sq_corrected: sum_corr,
                telescoped: tele,
                f_value: e.f_state(&st)?,
                w_sum: window.map(|_| w_sum),
                z_sum: window.map(|_| z_sum),
            })
        })
        .collect::<Result<_>>()?;
    let mut maxes: Vec<f64> = reps.iter().map(|r| r.max_abs_d).collect();
    let median_max_abs_d = median(&mut maxes);
    let mean_sum_d_sq = reps.iter().map(|r| r.sum_d_sq).sum::<f64>() / reps.len() as f64;
    let corr: Option<Vec<f64>> = reps.iter().map(|r| r.sum_d_sq_corrected).collect();
    Ok(McLeishDiagnostics {
        statistic: spec.name().to_string(),
        n: ds.n(),
        m,
        est_variance: mom.variance,
        est_variance_std_err: summary::variance_std_err(&direct)?,
        est_mean: mom.mean,
        median_max_abs_d,
        mean_sum_d_sq,
        mean_sum_d_sq_corrected: corr.map(|c| c.iter().sum::<f64>() / c.len() as f64),
        window,
        completions: cfg.completions,
        estimator: cfg.estimator,
        replications: reps,
    })
}

pub fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let h = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[h]
    } else {
        0.5 * (xs[h - 1] + xs[h])
    }
}
