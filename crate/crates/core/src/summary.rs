//! Sample summaries, goodness-of-fit tests and log-log regression.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Sample moments. `variance` is the unbiased estimator; skewness and excess
/// kurtosis are the plain moment ratios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments<T: Real> {
    pub count: usize,
    pub mean: T,
    pub variance: T,
    pub skewness: T,
    pub excess_kurtosis: T,
}

impl<T: Real> Moments<T> {
    pub fn of(xs: &[T]) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::TooFewSamples {
                needed: 2,
                got: xs.len(),
            });
        }
        let n = T::from_count(xs.len() as u64);
        let mean = xs.iter().copied().sum::<T>() / n;
        let (mut m2, mut m3, mut m4) = (T::zero(), T::zero(), T::zero());
        for &x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 = m2 + d2;
            m3 = m3 + d2 * d;
            m4 = m4 + d2 * d2;
        }
        let (c2, c3, c4) = (m2 / n, m3 / n, m4 / n);
        let variance = m2 / (n - T::one());
        let (skewness, excess_kurtosis) = if c2 > T::zero() {
            (c3 / c2.powf(T::of(1.5)), c4 / (c2 * c2) - T::of(3.0))
        } else {
            (T::zero(), T::zero())
        };
        Ok(Self {
            count: xs.len(),
            mean,
            variance,
            skewness,
            excess_kurtosis,
        })
    }

    pub fn std_err_mean(&self) -> T {
        (self.variance / T::from_count(self.count as u64)).sqrt()
    }
}

/// Mean and standard error of the mean.
pub fn mean_se<T: Real>(xs: &[T]) -> Result<(T, T)> {
    let m = Moments::of(xs)?;
    Ok((m.mean, m.std_err_mean()))
}

/// Standard error of the unbiased sample variance, from the fourth central
/// moment.
pub fn variance_std_err<T: Real>(xs: &[T]) -> Result<T> {
    let m = Moments::of(xs)?;
    let n = T::from_count(xs.len() as u64);
    let c4 = xs
        .iter()
        .map(|&x| (x - m.mean).powi(4))
        .sum::<T>()
        / n;
    let s2 = m.variance;
    let v = (c4 - (n - T::of(3.0)) / (n - T::one()) * s2 * s2) / n;
    Ok(v.max(T::zero()).sqrt())
}

/// `(x − mean) / sd` with the sample's own moments.
pub fn standardize<T: Real>(xs: &[T]) -> Result<Vec<T>> {
    let m = Moments::of(xs)?;
    if !(m.variance > T::zero()) {
        return Err(Error::DegenerateVariance(format!(
            "sample variance {:?}",
            m.variance
        )));
    }
    let sd = m.variance.sqrt();
    Ok(xs.iter().map(|&x| (x - m.mean) / sd).collect())
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub const KS_MIN_SAMPLE: usize = 20;

/// Kolmogorov–Smirnov distance between the empirical CDF and `Φ`. Ties are
/// handled by comparing `Φ(x)` with the ECDF just before and at each
/// distinct point.
pub fn ks_normal<T: Real>(xs: &[T]) -> Result<f64> {
    if xs.len() < KS_MIN_SAMPLE {
        return Err(Error::TooFewSamples {
            needed: KS_MIN_SAMPLE,
            got: xs.len(),
        });
    }
    let mut v: Vec<f64> = xs.iter().map(|x| x.to_real()).collect();
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN in sample".into()));
    }
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        let f = normal_cdf(v[i]);
        d = d.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
        i = j;
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive dof");
    (1.0 - dist.cdf(statistic)).clamp(0.0, 1.0)
}

/// Pearson goodness of fit of `observed` counts to cell probabilities.
/// Observations in zero-probability cells give `p = 0`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquareTest> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::Parameter("observed and expected cells differ".into()));
    }
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        if p <= 0.0 {
            if o > 0 {
                return Ok(ChiSquareTest {
                    statistic: f64::INFINITY,
                    dof: observed.len().saturating_sub(1),
                    p_value: 0.0,
                });
            }
            continue;
        }
        let e = p * total as f64;
        stat += (o as f64 - e).powi(2) / e;
        cells += 1;
    }
    let dof = cells.saturating_sub(1);
    Ok(ChiSquareTest {
        statistic: stat,
        dof,
        p_value: chi_square_p(stat, dof),
    })
}

/// Pearson test of independence on a contingency table; empty rows and
/// columns are dropped.
pub fn chi_square_independence(table: &[Vec<u64>]) -> Result<ChiSquareTest> {
    let cols = table.first().map_or(0, Vec::len);
    if table.iter().any(|r| r.len() != cols) {
        return Err(Error::Parameter("ragged contingency table".into()));
    }
    let rows: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let colsum: Vec<u64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let total: u64 = rows.iter().sum();
    if total == 0 {
        return Err(Error::Parameter("empty contingency table".into()));
    }
    let mut stat = 0.0;
    for (i, r) in table.iter().enumerate() {
        for (j, &o) in r.iter().enumerate() {
            if rows[i] == 0 || colsum[j] == 0 {
                continue;
            }
            let e = rows[i] as f64 * colsum[j] as f64 / total as f64;
            stat += (o as f64 - e).powi(2) / e;
        }
    }
    let nr = rows.iter().filter(|&&x| x > 0).count();
    let nc = colsum.iter().filter(|&&x| x > 0).count();
    let dof = nr.saturating_sub(1) * nc.saturating_sub(1);
    Ok(ChiSquareTest {
        statistic: stat,
        dof,
        p_value: chi_square_p(stat, dof),
    })
}

/// Least-squares line with a 95% t-interval on the slope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub ci95: (f64, f64),
}

pub fn ols(xs: &[f64], ys: &[f64]) -> Result<Regression> {
    if xs.len() != ys.len() {
        return Err(Error::Parameter("regression inputs differ in length".into()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("regression abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (slope_se, ci95) = if n > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        let se = (rss / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0)
            .expect("positive dof")
            .inverse_cdf(0.975);
        (se, (slope - t * se, slope + t * se))
    } else {
        (f64::NAN, (f64::NEG_INFINITY, f64::INFINITY))
    };
    Ok(Regression {
        slope,
        intercept,
        slope_se,
        ci95,
    })
}

/// Wilson score interval for a binomial proportion at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}
