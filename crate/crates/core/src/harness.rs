//! Mass replication, normality checks, conditioning on simple graphs and
//! result files.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::degree::{DegreeLaw, DegreeSequence};
use crate::error::{Error, Result};
use crate::exploration::Explorer;
use crate::graph::MultiGraph;
use crate::rng::{self, tag};
use crate::statistics::StatisticSpec;
use crate::summary::{self, Moments};

/// How degree sequences are drawn across replications.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeMode {
    /// A fresh sequence from the law for every replication.
    #[default]
    Annealed,
    /// One sequence drawn from the law (from the master seed) and reused.
    Quenched,
}

/// Where replication graphs come from.
#[derive(Clone, Debug, PartialEq)]
pub enum GraphSource {
    Law {
        law: DegreeLaw,
        n: usize,
        mode: DegreeMode,
    },
    Fixed(DegreeSequence),
}

impl GraphSource {
    pub fn law(law: DegreeLaw, n: usize) -> Self {
        Self::Law {
            law,
            n,
            mode: DegreeMode::Annealed,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Self::Law { n, .. } => *n,
            Self::Fixed(ds) => ds.n(),
        }
    }

    /// Resolve the source for a master seed.
    pub fn sampler(&self, seed: u64) -> Result<Sampler> {
        Ok(match self {
            Self::Law {
                law,
                n,
                mode: DegreeMode::Annealed,
            } => {
                law.check()?;
                if *n == 0 {
                    return Err(Error::Domain("n must be at least 1".into()));
                }
                Sampler::Annealed {
                    law: law.clone(),
                    n: *n,
                }
            }
            Self::Law {
                law,
                n,
                mode: DegreeMode::Quenched,
            } => Sampler::Fixed(Explorer::new(&law.generate(*n, seed)?)?),
            Self::Fixed(ds) => Sampler::Fixed(Explorer::new(ds)?),
        })
    }
}

pub enum Sampler {
    Annealed { law: DegreeLaw, n: usize },
    Fixed(Explorer),
}

impl Sampler {
    /// Graph for a per-replication seed.
    pub fn graph(&self, rep_seed: u64) -> Result<MultiGraph> {
        match self {
            Self::Annealed { law, n } => {
                let ds = law.generate(*n, rng::derive(rep_seed, 0))?;
                Ok(Explorer::new(&ds)?.sample_graph(rng::derive(rep_seed, 1)))
            }
            Self::Fixed(ex) => Ok(ex.sample_graph(rng::derive(rep_seed, 1))),
        }
    }
}

/// Seed of replication `r` under master seed `seed`.
pub fn replication_seed(seed: u64, r: usize) -> u64 {
    rng::derive2(seed, tag::REPLICATION, r as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicationResult {
    pub n: usize,
    pub statistic: String,
    /// Requested replications.
    pub r: usize,
    pub seed: u64,
    #[serde(skip)]
    pub rep_ids: Vec<usize>,
    #[serde(skip)]
    pub seeds: Vec<u64>,
    #[serde(skip)]
    pub values: Vec<f64>,
    pub kept: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// `(F − mean) / sd` with the sample's own moments; empty if degenerate.
    #[serde(skip)]
    pub standardized: Vec<f64>,
    pub ks_distance: Option<f64>,
    pub degenerate: bool,
    pub cap_exceeded_count: usize,
    pub drop_rate: f64,
    pub max_drop_rate: f64,
    pub standardization: &'static str,
}

pub const MAX_DROP_RATE: f64 = 0.01;

impl ReplicationResult {
    fn from_values(
        spec: &StatisticSpec,
        n: usize,
        r: usize,
        seed: u64,
        kept: Vec<(usize, u64, f64)>,
        dropped: usize,
    ) -> Result<Self> {
        if kept.is_empty() {
            return Err(Error::EmptyResult { dropped });
        }
        let values: Vec<f64> = kept.iter().map(|k| k.2).collect();
        let (mean, variance, skewness, excess_kurtosis) = match Moments::of(&values) {
            Ok(m) => (m.mean, m.variance, m.skewness, m.excess_kurtosis),
            Err(Error::TooFewSamples { .. }) => (values[0], 0.0, 0.0, 0.0),
            Err(e) => return Err(e),
        };
        let degenerate = !(variance > 0.0);
        let standardized = if degenerate {
            Vec::new()
        } else {
            summary::standardize(&values)?
        };
        let ks_distance = if standardized.len() >= summary::KS_MIN_SAMPLE {
            Some(summary::ks_normal(&standardized)?)
        } else {
            None
        };
        Ok(Self {
            n,
            statistic: spec.name().to_string(),
            r,
            seed,
            rep_ids: kept.iter().map(|k| k.0).collect(),
            seeds: kept.iter().map(|k| k.1).collect(),
            kept: values.len(),
            values,
            mean,
            variance,
            skewness,
            excess_kurtosis,
            standardized,
            ks_distance,
            degenerate,
            cap_exceeded_count: dropped,
            drop_rate: dropped as f64 / r as f64,
            max_drop_rate: MAX_DROP_RATE,
            standardization: "sample mean and sample variance",
        })
    }

    pub fn drop_rate_ok(&self) -> bool {
        self.drop_rate <= self.max_drop_rate
    }

    /// `rep_id,seed,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "rep_id,seed,value")?;
        for ((id, s), v) in self.rep_ids.iter().zip(&self.seeds).zip(&self.values) {
            writeln!(w, "{id},{s},{v}")?;
        }
        Ok(())
    }

    /// Sorted standardized values against normal quantiles at `(i − ½)/R`.
    pub fn write_plotdata<W: Write>(&self, w: W) -> Result<()> {
        write_plotdata(&self.standardized, w)
    }
}

pub fn write_plotdata<W: Write>(standardized: &[f64], mut w: W) -> Result<()> {
    let mut z = standardized.to_vec();
    z.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let r = z.len() as f64;
    writeln!(w, "rank,standardized,normal_quantile")?;
    for (i, x) in z.iter().enumerate() {
        let q = normal.inverse_cdf((i as f64 + 0.5) / r);
        writeln!(w, "{},{},{}", i + 1, x, q)?;
    }
    Ok(())
}

/// Evaluate `spec` on `r` independent graphs. Replications whose graph has
/// a component beyond the evaluator's cap are dropped and counted.
pub fn replicate(spec: &StatisticSpec, source: &GraphSource, r: usize, seed: u64) -> Result<ReplicationResult> {
    if r < 2 {
        return Err(Error::Parameter(format!("R must be at least 2, got {r}")));
    }
    let sampler = source.sampler(rng::derive(seed, tag::DEGREES))?;
    let outcomes: Vec<Result<Option<(usize, u64, f64)>>> = (0..r)
        .into_par_iter()
        .map(|i| {
            let s = replication_seed(seed, i);
            let g = sampler.graph(s)?;
            match spec.evaluate::<f64>(&g) {
                Ok(v) => Ok(Some((i, s, v))),
                Err(Error::CapExceeded { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut kept = Vec::with_capacity(r);
    let mut dropped = 0;
    for o in outcomes {
        match o? {
            Some(k) => kept.push(k),
            None => dropped += 1,
        }
    }
    ReplicationResult::from_values(spec, source.n(), r, seed, kept, dropped)
}

/// KS distance of a standardized sample from the standard normal.
pub fn ks_normality(standardized: &[f64]) -> Result<f64> {
    summary::ks_normal(standardized)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimpleSample {
    pub graph: MultiGraph,
    pub attempts: usize,
}

/// Rejection-sample explorations until the graph is simple.
pub fn condition_on_simple(ds: &DegreeSequence, seed: u64, max_attempts: usize) -> Result<SimpleSample> {
    if max_attempts == 0 {
        return Err(Error::Parameter("max_attempts must be at least 1".into()));
    }
    let ex = Explorer::new(ds)?;
    simple_from(&ex, seed, max_attempts)
}

fn simple_from(ex: &Explorer, seed: u64, max_attempts: usize) -> Result<SimpleSample> {
    for a in 0..max_attempts {
        let g = ex.sample_graph(rng::derive2(seed, tag::EXPLORE, a as u64));
        if g.is_simple() {
            return Ok(SimpleSample {
                graph: g,
                attempts: a + 1,
            });
        }
    }
    Err(Error::RejectionBudget {
        attempts: max_attempts,
        rate: 0.0,
    })
}

/// `attempts` independent explorations with the simple ones kept.
#[derive(Clone, Debug, PartialEq)]
pub struct RejectionRun {
    pub attempts: usize,
    pub accepted: Vec<MultiGraph>,
}

impl RejectionRun {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted.len() as f64 / self.attempts as f64
    }
}

pub fn rejection_run(ds: &DegreeSequence, attempts: usize, seed: u64) -> Result<RejectionRun> {
    let ex = Explorer::new(ds)?;
    let accepted = (0..attempts)
        .into_par_iter()
        .map(|a| ex.sample_graph(rng::derive2(seed, tag::EXPLORE, a as u64)))
        .filter(MultiGraph::is_simple)
        .collect();
    Ok(RejectionRun { attempts, accepted })
}

/// Statistic on simple-conditioned graphs, standardized both by its own
/// moments and by those of the unconditioned model.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimpleReplication {
    pub conditioned: ReplicationResult,
    pub unconditioned: ReplicationResult,
    pub acceptance_rate: f64,
    #[serde(skip)]
    pub standardized_unconditioned: Vec<f64>,
    pub ks_unconditioned: Option<f64>,
}

pub fn replicate_simple(
    spec: &StatisticSpec,
    source: &GraphSource,
    r: usize,
    max_attempts: usize,
    seed: u64,
) -> Result<SimpleReplication> {
    if r < 2 || max_attempts == 0 {
        return Err(Error::Parameter("R ≥ 2 and max_attempts ≥ 1 required".into()));
    }
    let unconditioned = replicate(spec, source, r, rng::derive(seed, 1))?;
    let sampler = source.sampler(rng::derive(seed, tag::DEGREES))?;
    let outcomes: Vec<Result<(usize, u64, Option<f64>, usize)>> = (0..r)
        .into_par_iter()
        .map(|i| {
            let s = replication_seed(seed, i);
            let ex = match &sampler {
                Sampler::Fixed(ex) => ex.clone(),
                Sampler::Annealed { law, n } => Explorer::new(&law.generate(*n, rng::derive(s, 0))?)?,
            };
            let sample = simple_from(&ex, s, max_attempts)?;
            match spec.evaluate::<f64>(&sample.graph) {
                Ok(v) => Ok((i, s, Some(v), sample.attempts)),
                Err(Error::CapExceeded { .. }) => Ok((i, s, None, sample.attempts)),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut kept = Vec::new();
    let (mut dropped, mut attempts) = (0, 0);
    for o in outcomes {
        let (i, s, v, a) = o?;
        attempts += a;
        match v {
            Some(v) => kept.push((i, s, v)),
            None => dropped += 1,
        }
    }
    let conditioned = ReplicationResult::from_values(spec, source.n(), r, seed, kept, dropped)?;
    let standardized_unconditioned = if unconditioned.degenerate {
        Vec::new()
    } else {
        let sd = unconditioned.variance.sqrt();
        conditioned
            .values
            .iter()
            .map(|v| (v - unconditioned.mean) / sd)
            .collect()
    };
    let ks_unconditioned = if standardized_unconditioned.len() >= summary::KS_MIN_SAMPLE {
        Some(summary::ks_normal(&standardized_unconditioned)?)
    } else {
        None
    };
    Ok(SimpleReplication {
        acceptance_rate: r as f64 / attempts as f64,
        conditioned,
        unconditioned,
        standardized_unconditioned,
        ks_unconditioned,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltThresholds {
    pub ks_final: f64,
    pub skew_final: f64,
    pub mode: DegreeMode,
}

impl Default for CltThresholds {
    fn default() -> Self {
        Self {
            ks_final: 0.06,
            skew_final: 0.2,
            mode: DegreeMode::Annealed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltPoint {
    pub n: usize,
    pub ks: f64,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub cap_exceeded_count: usize,
    pub drop_rate_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CltTrendReport {
    pub statistic: String,
    pub r: usize,
    pub points: Vec<CltPoint>,
    /// `2 × 1.36 / √R`.
    pub inversion_tolerance: f64,
    pub inversions: usize,
    pub ks_trend_ok: bool,
    pub final_ks_ok: bool,
    pub final_skew_ok: bool,
    pub drop_rate_ok: bool,
    pub thresholds: CltThresholds,
    pub passed: bool,
    #[serde(skip)]
    pub results: Vec<ReplicationResult>,
}

/// KS must not increase along the ladder except for at most one step up by
/// no more than `tolerance`.
pub fn ks_trend_ok(ks: &[f64], tolerance: f64) -> (usize, bool) {
    let ups: Vec<f64> = ks.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect();
    (ups.len(), ups.len() <= 1 && ups.iter().all(|d| *d <= tolerance))
}

/// Replicate at each `n` of the ladder and judge the KS trend.
pub fn clt_trend(
    spec: &StatisticSpec,
    law: &DegreeLaw,
    ladder: &[usize],
    r: usize,
    seed: u64,
    thresholds: CltThresholds,
) -> Result<CltTrendReport> {
    if ladder.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: ladder.len(),
        });
    }
    let mut results = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let source = GraphSource::Law {
            law: law.clone(),
            n,
            mode: thresholds.mode,
        };
        let res = replicate(spec, &source, r, rng::derive2(seed, tag::LADDER, n as u64))?;
        if res.degenerate {
            return Err(Error::DegenerateVariance(format!(
                "{} at n={n}: sample variance {}",
                spec.name(),
                res.variance
            )));
        }
        results.push(res);
    }
    let points: Vec<CltPoint> = results
        .iter()
        .map(|res| CltPoint {
            n: res.n,
            ks: res.ks_distance.unwrap_or(f64::NAN),
            mean: res.mean,
            variance: res.variance,
            skewness: res.skewness,
            excess_kurtosis: res.excess_kurtosis,
            cap_exceeded_count: res.cap_exceeded_count,
            drop_rate_ok: res.drop_rate_ok(),
        })
        .collect();
    let tol = 2.0 * 1.36 / (r as f64).sqrt();
    let ks: Vec<f64> = points.iter().map(|p| p.ks).collect();
    let (inversions, ks_trend_ok) = ks_trend_ok(&ks, tol);
    let last = points.last().expect("ladder non-empty");
    let final_ks_ok = last.ks < thresholds.ks_final;
    let final_skew_ok = last.skewness.abs() < thresholds.skew_final;
    let drop_rate_ok = points.iter().all(|p| p.drop_rate_ok);
    Ok(CltTrendReport {
        statistic: spec.name().to_string(),
        r,
        inversion_tolerance: tol,
        inversions,
        ks_trend_ok,
        final_ks_ok,
        final_skew_ok,
        drop_rate_ok,
        passed: ks_trend_ok && final_ks_ok && final_skew_ok && drop_rate_ok,
        thresholds,
        points,
        results,
    })
}
