//! Finite-n reports on the growth conditions behind the CLT: the tail of
//! the largest component, the two (G1) ratios, the (F1) variance slope, the
//! variance sandwich and the parameter checks for size moments.
//!
//! Asymptotic `o(·)` and `Ω(·)` statements become log-log regression slopes
//! over an n-ladder compared with fixed thresholds. The thresholds are
//! engineering choices and are recorded in every report.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree::DegreeLaw;
use crate::error::{Error, Result};
use crate::harness::{self, DegreeMode, GraphSource};
use crate::martingale::{self, Budget};
use crate::rng::{self, tag};
use crate::statistics::StatisticSpec;
use crate::summary;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailEstimate {
    pub alpha: f64,
    pub exceed: usize,
    pub r: usize,
    pub prob: f64,
    /// Wilson 95% interval.
    pub ci95: (f64, f64),
}

/// `|C_max|` of `r` graphs from the law.
pub fn max_component_sizes(law: &DegreeLaw, n: usize, r: usize, seed: u64) -> Result<Vec<usize>> {
    let sampler = GraphSource::law(law.clone(), n).sampler(seed)?;
    (0..r)
        .into_par_iter()
        .map(|i| Ok(sampler.graph(harness::replication_seed(seed, i))?.max_component_size()))
        .collect()
}

fn tail_from_sizes(sizes: &[usize], alpha: f64) -> TailEstimate {
    let exceed = sizes.iter().filter(|&&s| s as f64 > alpha).count();
    TailEstimate {
        alpha,
        exceed,
        r: sizes.len(),
        prob: exceed as f64 / sizes.len() as f64,
        ci95: summary::wilson_interval(exceed, sizes.len(), 1.959_963_984_540_054),
    }
}

/// Fraction of `r` graphs with `|C_max| > alpha`.
pub fn tail_probability(law: &DegreeLaw, n: usize, alpha: f64, r: usize, seed: u64) -> Result<TailEstimate> {
    Ok(tail_probabilities(law, n, &[alpha], r, seed)?.remove(0))
}

/// Tail estimates for several thresholds from the same `r` graphs, hence
/// non-increasing in `alpha`.
pub fn tail_probabilities(
    law: &DegreeLaw,
    n: usize,
    alphas: &[f64],
    r: usize,
    seed: u64,
) -> Result<Vec<TailEstimate>> {
    if r == 0 {
        return Err(Error::Parameter("R must be at least 1".into()));
    }
    let sizes = max_component_sizes(law, n, r, seed)?;
    Ok(alphas.iter().map(|&a| tail_from_sizes(&sizes, a)).collect())
}

/// `α_n` for each n of the ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum AlphaRule {
    Explicit { values: Vec<f64> },
    /// `A · n^exponent`; `exponent = 1/(γ−1)` for a power-law tail.
    Power { a: f64, exponent: f64 },
}

impl AlphaRule {
    pub fn from_gamma(a: f64, gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::Parameter(format!("gamma must exceed 1, got {gamma}")));
        }
        Ok(Self::Power {
            a,
            exponent: 1.0 / (gamma - 1.0),
        })
    }

    pub fn values(&self, ladder: &[usize]) -> Result<Vec<f64>> {
        let v: Vec<f64> = match self {
            Self::Explicit { values } => {
                if values.len() != ladder.len() {
                    return Err(Error::Parameter("explicit α list length differs from the ladder".into()));
                }
                values.clone()
            }
            Self::Power { a, exponent } => ladder.iter().map(|&n| a * (n as f64).powf(*exponent)).collect(),
        };
        if v.iter().any(|&x| !(x >= 1.0)) {
            return Err(Error::Parameter("α_n must be at least 1".into()));
        }
        Ok(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `o(·)` verdicts need a log-log slope below this.
    pub o_slope: f64,
    /// `Ω(n^e)` verdicts need a slope of at least `e − omega_slack`.
    pub omega_slack: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            o_slope: -0.1,
            omega_slack: 0.15,
        }
    }
}

/// Inputs for one rung of the ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderInput {
    pub n: usize,
    /// Edge count of the degree sequence behind `cn_est`.
    pub m_n: usize,
    pub cn_est: f64,
    pub d_max: u32,
    pub alpha_n: f64,
    pub tail_prob_est: f64,
    pub var_est: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderRow {
    #[serde(flatten)]
    pub input: LadderInput,
    pub ratio_g1a: f64,
    pub ratio_g1b: f64,
    /// `None` when the variance estimate is zero.
    pub var_ratio: Option<f64>,
}

impl LadderRow {
    pub fn new(input: LadderInput, kappa: f64) -> Self {
        let (a, b, v) = ratios(&input, kappa);
        Self {
            input,
            ratio_g1a: a,
            ratio_g1b: b,
            var_ratio: v,
        }
    }

    /// The ratio fields equal a fresh computation from the inputs, bit for bit.
    pub fn recomputes(&self, kappa: f64) -> bool {
        let (a, b, v) = ratios(&self.input, kappa);
        a.to_bits() == self.ratio_g1a.to_bits()
            && b.to_bits() == self.ratio_g1b.to_bits()
            && v.map(f64::to_bits) == self.var_ratio.map(f64::to_bits)
    }
}

fn ratios(i: &LadderInput, kappa: f64) -> (f64, f64, Option<f64>) {
    let n = i.n as f64;
    let d2 = f64::from(i.d_max).powi(2);
    let a = i.cn_est * d2 * i.alpha_n / n.powf(2.0 * kappa);
    let b = i.cn_est * d2 * i.tail_prob_est / n.powf(2.0 * kappa - 1.0);
    let v = (i.var_est > 0.0).then(|| i.var_est / n.powf(0.5 + kappa));
    (a, b, v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Decreasing,
    Flat,
    Increasing,
    /// Identically zero along the ladder.
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendVerdict {
    pub trend: Trend,
    /// Log-log slope when every value is positive.
    pub slope: Option<f64>,
    pub passed: bool,
}

/// Verdict for an `o(·)` requirement on a positive sequence.
pub fn o_trend(ns: &[usize], values: &[f64], threshold: f64) -> Result<TrendVerdict> {
    if values.iter().all(|&v| v == 0.0) {
        return Ok(TrendVerdict {
            trend: Trend::Zero,
            slope: None,
            passed: true,
        });
    }
    if values.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::Domain("ratios must be non-negative".into()));
    }
    if values.iter().any(|&v| v == 0.0) {
        // Some rungs hit zero: judge by monotonicity alone.
        let down = values.windows(2).all(|w| w[1] <= w[0]);
        return Ok(TrendVerdict {
            trend: if down { Trend::Decreasing } else { Trend::Increasing },
            slope: None,
            passed: down,
        });
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let slope = summary::ols(&xs, &ys)?.slope;
    let trend = if slope < threshold {
        Trend::Decreasing
    } else if slope > -threshold {
        Trend::Increasing
    } else {
        Trend::Flat
    };
    Ok(TrendVerdict {
        trend,
        slope: Some(slope),
        passed: trend == Trend::Decreasing,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub budget: Option<Budget>,
    pub k_grid_points: Option<usize>,
    pub thresholds: Thresholds,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub statistic: String,
    pub kappa: f64,
    pub n_ladder: Vec<usize>,
    pub rows: Vec<LadderRow>,
    pub g1a: TrendVerdict,
    pub g1b: TrendVerdict,
    pub provenance: Provenance,
}

impl ConditionReport {
    pub fn passed(&self) -> bool {
        self.g1a.passed && self.g1b.passed
    }
}

/// Both (G1) ratio sequences and their trend verdicts.
pub fn check_g1(
    statistic: &str,
    inputs: Vec<LadderInput>,
    kappa: f64,
    thresholds: Thresholds,
    provenance: Option<Provenance>,
) -> Result<ConditionReport> {
    if !(kappa >= 0.0) {
        return Err(Error::Parameter(format!("kappa must be non-negative, got {kappa}")));
    }
    if inputs.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: inputs.len(),
        });
    }
    if let Some(bad) = inputs.iter().find(|i| i.var_est < 0.0 || i.var_est.is_nan()) {
        return Err(Error::DegenerateVariance(format!(
            "variance estimate {} at n={}",
            bad.var_est, bad.n
        )));
    }
    let ns: Vec<usize> = inputs.iter().map(|i| i.n).collect();
    let rows: Vec<LadderRow> = inputs.into_iter().map(|i| LadderRow::new(i, kappa)).collect();
    let a: Vec<f64> = rows.iter().map(|r| r.ratio_g1a).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.ratio_g1b).collect();
    Ok(ConditionReport {
        statistic: statistic.to_string(),
        kappa,
        g1a: o_trend(&ns, &a, thresholds.o_slope)?,
        g1b: o_trend(&ns, &b, thresholds.o_slope)?,
        n_ladder: ns,
        rows,
        provenance: provenance.unwrap_or(Provenance {
            seed: None,
            replications: None,
            budget: None,
            k_grid_points: None,
            thresholds,
            note: String::new(),
        }),
    })
}

/// Monte Carlo budget for [`g1_ladder`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct G1Budget {
    /// Graphs for the tail probability and the variance.
    pub replications: usize,
    pub cn: Budget,
    pub grid_points: usize,
}

/// Estimate every (G1) input on the ladder and build the report. `C_n` comes
/// from a degree sequence drawn once per rung; tails and variances from
/// annealed replications.
pub fn g1_ladder(
    spec: &StatisticSpec,
    law: &DegreeLaw,
    ladder: &[usize],
    kappa: f64,
    alpha: &AlphaRule,
    budget: G1Budget,
    thresholds: Thresholds,
    seed: u64,
) -> Result<ConditionReport> {
    let alphas = alpha.values(ladder)?;
    let mut inputs = Vec::with_capacity(ladder.len());
    for (&n, &alpha_n) in ladder.iter().zip(&alphas) {
        let s = rng::derive2(seed, tag::LADDER, n as u64);
        let ds = law.generate(n, rng::derive(s, 0))?;
        let m = ds.m();
        let grid = martingale::grid(m, budget.grid_points);
        let cn = martingale::estimate_cn(spec, &ds, Some(&grid), budget.cn, rng::derive(s, 1))?;
        let tail = tail_probability(law, n, alpha_n, budget.replications, rng::derive(s, 2))?;
        let var = harness::replicate(spec, &GraphSource::law(law.clone(), n), budget.replications, rng::derive(s, 3))?;
        inputs.push(LadderInput {
            n,
            m_n: m,
            cn_est: cn.c_n,
            d_max: law.max_degree(n),
            alpha_n,
            tail_prob_est: tail.prob,
            var_est: var.variance,
        });
    }
    check_g1(
        spec.name(),
        inputs,
        kappa,
        thresholds,
        Some(Provenance {
            seed: Some(seed),
            replications: Some(budget.replications),
            budget: Some(budget.cn),
            k_grid_points: Some(budget.grid_points),
            thresholds,
            note: "C_n is a maximum over a k-grid, hence a lower bound; verdict thresholds are engineering choices".into(),
        }),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct F1Report {
    pub n_ladder: Vec<usize>,
    pub variances: Vec<f64>,
    pub kappa: f64,
    pub slope: f64,
    pub slope_ci95: (f64, f64),
    pub required_slope: f64,
    pub passed: bool,
}

/// Log-log slope of the variance ladder against `1/2 + κ − slack`.
pub fn check_f1(ns: &[usize], variances: &[f64], kappa: f64, thresholds: Thresholds) -> Result<F1Report> {
    if ns.len() != variances.len() {
        return Err(Error::Parameter("ladder and variances differ in length".into()));
    }
    if ns.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: ns.len(),
        });
    }
    if let Some(v) = variances.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::DegenerateVariance(format!("variance estimate {v}")));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = variances.iter().map(|v| v.ln()).collect();
    let reg = summary::ols(&xs, &ys)?;
    let required_slope = 0.5 + kappa - thresholds.omega_slack;
    Ok(F1Report {
        n_ladder: ns.to_vec(),
        variances: variances.to_vec(),
        kappa,
        slope: reg.slope,
        slope_ci95: reg.ci95,
        required_slope,
        passed: reg.slope >= required_slope,
    })
}

/// Variance of `F` under the law at each rung.
pub fn variance_ladder(
    spec: &StatisticSpec,
    law: &DegreeLaw,
    ladder: &[usize],
    r: usize,
    mode: DegreeMode,
    seed: u64,
) -> Result<Vec<f64>> {
    ladder
        .iter()
        .map(|&n| {
            let source = GraphSource::Law {
                law: law.clone(),
                n,
                mode,
            };
            Ok(harness::replicate(spec, &source, r, rng::derive2(seed, tag::LADDER, n as u64))?.variance)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichInputs {
    pub n: usize,
    pub m_n: usize,
    pub c_n: f64,
    pub alpha_n: f64,
    pub d_max: u32,
    pub variance: f64,
    pub kappa: f64,
    pub epsilon: f64,
    /// Constant with `Var F ≥ n^{1/2+κ} / M`.
    pub m_const: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichLink {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub inputs: SandwichInputs,
    pub links: Vec<SandwichLink>,
    /// `Var F ≤ m_n √C_n`, from Cauchy–Schwarz on the martingale differences.
    pub variance_upper_bound: SandwichLink,
    /// `α_n / n`; the chain forces `α_n = o(n)`.
    pub alpha_over_n: f64,
    pub all_hold: bool,
}

/// Evaluate each link of
/// `√(n C_n α_n) d_max ≤ ε n^{1/2+κ} ≤ ε M Var F ≤ ε M m_n √C_n ≤ n d_max √C_n`.
pub fn sandwich_check(i: SandwichInputs) -> SandwichReport {
    let n = i.n as f64;
    let d = f64::from(i.d_max);
    let root_c = i.c_n.sqrt();
    let chain = [
        (n * i.c_n * i.alpha_n).sqrt() * d,
        i.epsilon * n.powf(0.5 + i.kappa),
        i.epsilon * i.m_const * i.variance,
        i.epsilon * i.m_const * i.m_n as f64 * root_c,
        n * d * root_c,
    ];
    let names = [
        "sqrt(n Cn alpha) dmax <= eps n^(1/2+kappa)",
        "eps n^(1/2+kappa) <= eps M Var",
        "eps M Var <= eps M m_n sqrt(Cn)",
        "eps M m_n sqrt(Cn) <= n dmax sqrt(Cn)",
    ];
    let links: Vec<SandwichLink> = names
        .iter()
        .enumerate()
        .map(|(j, &name)| SandwichLink {
            name,
            lhs: chain[j],
            rhs: chain[j + 1],
            holds: chain[j] <= chain[j + 1] * (1.0 + 1e-12),
        })
        .collect();
    let bound = i.m_n as f64 * root_c;
    SandwichReport {
        inputs: i,
        all_hold: links.iter().all(|l| l.holds),
        links,
        variance_upper_bound: SandwichLink {
            name: "Var <= m_n sqrt(Cn)",
            lhs: i.variance,
            rhs: bound,
            holds: i.variance <= bound * (1.0 + 1e-12),
        },
        alpha_over_n: i.alpha_n / n,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SusceptibilityVerdict {
    pub gamma: f64,
    pub a: f64,
    pub p: u32,
    pub kappa: f64,
    /// `γ > 4p + 4`.
    pub condition_i: bool,
    /// `a > (4p − 1)(γ − 1) + 3`.
    pub condition_ii: bool,
    pub a_threshold: f64,
    /// Exponents of the two terms bounding `C_n d_max² α_n`; both below 1.
    pub g1a_exponents: (f64, f64),
    /// Exponents of the two terms bounding `C_n d_max² P(|C_max| > α_n)`;
    /// both below 0.
    pub g1b_exponents: (f64, f64),
    pub passed: bool,
}

pub fn check_susceptibility_conditions(gamma: f64, a: f64, p: u32, kappa: f64) -> Result<SusceptibilityVerdict> {
    if p < 2 {
        return Err(Error::Parameter(format!("p must be at least 2, got {p}")));
    }
    if !(gamma > 1.0) {
        return Err(Error::Parameter(format!("gamma must exceed 1, got {gamma}")));
    }
    let pf = f64::from(p);
    let g1 = gamma - 1.0;
    let a_threshold = (4.0 * pf - 1.0) * g1 + 3.0;
    let condition_i = gamma > 4.0 * pf + 4.0;
    let condition_ii = a > a_threshold;
    Ok(SusceptibilityVerdict {
        gamma,
        a,
        p,
        kappa,
        condition_i,
        condition_ii,
        a_threshold,
        g1a_exponents: ((4.0 * pf + 3.0) / g1, (4.0 * pf * g1 + 3.0 - a) / g1),
        g1b_exponents: ((4.0 * pf + 2.0 - a) / g1, (4.0 * pf * g1 + 2.0 - 2.0 * a) / g1),
        passed: condition_i && condition_ii,
    })
}

/// `[3/(2(γ−1)), 1/2 + 1/(γ−1)]`.
pub fn kappa_bounds(gamma: f64) -> Result<(f64, f64)> {
    if !(gamma > 2.0) {
        return Err(Error::Domain(format!("κ interval is empty for γ = {gamma} ≤ 2")));
    }
    Ok((1.5 / (gamma - 1.0), 0.5 + 1.0 / (gamma - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_edge_cases() {
        let law: DegreeLaw = "iid:1=0.5,2=0.5".parse().unwrap();
        assert_eq!(tail_probability(&law, 50, 50.0, 30, 1).unwrap().prob, 0.0);
        assert_eq!(tail_probability(&law, 50, 0.0, 30, 1).unwrap().prob, 1.0);
        let reg = DegreeLaw::regular(1);
        assert_eq!(tail_probability(&reg, 40, 2.0, 20, 1).unwrap().prob, 0.0);
        let t = tail_probabilities(&law, 200, &[1.0, 3.0, 5.0, 10.0, 20.0], 100, 4).unwrap();
        assert!(t.windows(2).all(|w| w[1].prob <= w[0].prob));
    }

    fn input(n: usize, cn: f64, var: f64) -> LadderInput {
        LadderInput {
            n,
            m_n: n,
            cn_est: cn,
            d_max: 2,
            alpha_n: 5.0 * (n as f64).cbrt(),
            tail_prob_est: 0.0,
            var_est: var,
        }
    }

    #[test]
    fn g1_verdicts() {
        let ns = [500, 2000, 8000];
        let zero = check_g1("zero", ns.iter().map(|&n| input(n, 0.0, 0.0)).collect(), 0.5, Thresholds::default(), None)
            .unwrap();
        assert_eq!(zero.g1a.trend, Trend::Zero);
        assert!(zero.passed());
        assert!(zero.rows.iter().all(|r| r.var_ratio.is_none() && r.recomputes(0.5)));

        let bounded = check_g1("beta0", ns.iter().map(|&n| input(n, 1.0, n as f64)).collect(), 0.5, Thresholds::default(), None)
            .unwrap();
        assert!((bounded.g1a.slope.unwrap() - (1.0 / 3.0 - 1.0)).abs() < 1e-9);
        assert!(bounded.g1a.passed);

        // κ = 0 and α_n = n: ratio grows like n.
        let grow: Vec<LadderInput> = ns
            .iter()
            .map(|&n| LadderInput {
                alpha_n: n as f64,
                ..input(n, 1.0, 1.0)
            })
            .collect();
        let r = check_g1("x", grow, 0.0, Thresholds::default(), None).unwrap();
        assert_eq!(r.g1a.trend, Trend::Increasing);
        assert!(!r.passed());
        assert!(check_g1("x", vec![input(10, 1.0, -1.0), input(20, 1.0, 1.0)], 0.5, Thresholds::default(), None).is_err());
    }

    #[test]
    fn f1_examples() {
        let ns = [500, 2000, 8000];
        let lin: Vec<f64> = ns.iter().map(|&n| 3.0 * n as f64).collect();
        let r = check_f1(&ns, &lin, 0.5, Thresholds::default()).unwrap();
        assert!((r.slope - 1.0).abs() < 1e-12 && r.passed);
        let root: Vec<f64> = ns.iter().map(|&n| (n as f64).sqrt()).collect();
        assert!(!check_f1(&ns, &root, 0.5, Thresholds::default()).unwrap().passed);
        assert!(check_f1(&ns[..2], &lin[..2], 0.5, Thresholds::default()).is_err());
    }

    #[test]
    fn sandwich_on_211() {
        let c_n = 2.0 / 27.0;
        let r = sandwich_check(SandwichInputs {
            n: 3,
            m_n: 2,
            c_n,
            alpha_n: 3.0,
            d_max: 2,
            variance: 2.0 / 9.0,
            kappa: 0.5,
            epsilon: 0.1,
            m_const: 20.0,
        });
        assert!(r.variance_upper_bound.holds);
        assert!((r.variance_upper_bound.rhs - 2.0 * c_n.sqrt()).abs() < 1e-15);
        assert_eq!(r.links.len(), 4);

        let zero = sandwich_check(SandwichInputs {
            c_n: 0.0,
            variance: 0.0,
            ..r.inputs
        });
        assert_eq!(zero.links[0].lhs, 0.0);
        assert!(zero.links[0].holds);

        let bad = sandwich_check(SandwichInputs {
            c_n: 1e6,
            ..r.inputs
        });
        assert!(!bad.links[0].holds && !bad.all_hold);
    }

    #[test]
    fn susceptibility_arithmetic() {
        let ok = check_susceptibility_conditions(13.0, 100.0, 2, 0.5).unwrap();
        assert!(ok.condition_i && ok.condition_ii && ok.passed);
        assert_eq!(ok.a_threshold, 87.0);
        assert!(ok.g1a_exponents.0 < 1.0 && ok.g1a_exponents.1 < 1.0);
        assert!(ok.g1b_exponents.0 < 0.0 && ok.g1b_exponents.1 < 0.0);
        assert!(!check_susceptibility_conditions(12.0, 100.0, 2, 0.5).unwrap().condition_i);
        let p3 = check_susceptibility_conditions(17.0, 130.0, 3, 0.5).unwrap();
        assert_eq!(p3.a_threshold, 179.0);
        assert!(!p3.condition_ii);
    }

    #[test]
    fn kappa_interval() {
        let (lo, hi) = kappa_bounds(4.0).unwrap();
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 5.0 / 6.0).abs() < 1e-15);
        let (lo, hi) = kappa_bounds(2.5).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 7.0 / 6.0).abs() < 1e-15);
        assert!(kappa_bounds(2.0).is_err());
    }

    #[test]
    fn alpha_rules() {
        let r = AlphaRule::Power { a: 5.0, exponent: 1.0 / 3.0 };
        let v = r.values(&[1000]).unwrap();
        assert!((v[0] - 50.0).abs() < 1e-9);
        assert!(AlphaRule::Explicit { values: vec![0.5] }.values(&[10]).is_err());
        assert!(AlphaRule::from_gamma(5.0, 4.0).unwrap() == r);
    }
}
