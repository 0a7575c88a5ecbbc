//! Degree sequences and the laws that generate them.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Scalar;

/// Per-vertex degrees `d_1..d_n`. Vertices are indexed from 0 internally.
///
/// An odd total is representable (so that [`validate`] can flag it) but is
/// rejected by everything that pairs half-edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeSequence {
    degrees: Vec<u32>,
    two_m: u64,
    d_max: u32,
    parity_repaired: bool,
}

impl DegreeSequence {
    pub fn new(degrees: Vec<u32>) -> Self {
        let two_m = degrees.iter().map(|&d| u64::from(d)).sum();
        let d_max = degrees.iter().copied().max().unwrap_or(0);
        Self {
            degrees,
            two_m,
            d_max,
            parity_repaired: false,
        }
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    /// Total number of half-edges, `2 m_n`.
    pub fn two_m(&self) -> u64 {
        self.two_m
    }

    /// Number of pairings `m_n`; only meaningful when the total is even.
    pub fn m(&self) -> usize {
        (self.two_m / 2) as usize
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn is_even(&self) -> bool {
        self.two_m % 2 == 0
    }

    pub fn parity_repaired(&self) -> bool {
        self.parity_repaired
    }

    pub fn zero_count(&self) -> usize {
        self.degrees.iter().filter(|&&d| d == 0).count()
    }

    pub fn require_even(&self) -> Result<()> {
        if self.is_even() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "degree sum {} is odd; half-edges cannot be paired",
                self.two_m
            )))
        }
    }

    /// Parse a comma separated list such as `2,1,1`.
    pub fn parse_list(s: &str) -> Result<Self> {
        let degrees = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad degree `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if degrees.is_empty() {
            return Err(Error::Parse("empty degree list".into()));
        }
        Ok(Self::new(degrees))
    }

    /// Read the text format: one integer per line, optional `# n=<n>` header.
    pub fn read_text<R: BufRead>(reader: R) -> Result<Self> {
        let mut declared = None;
        let mut degrees = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("n=") {
                    let n = v
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad header `{line}`")))?;
                    declared = Some(n);
                }
                continue;
            }
            degrees.push(
                line.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad degree line `{line}`")))?,
            );
        }
        if let Some(n) = declared {
            if n != degrees.len() {
                return Err(Error::Parse(format!(
                    "header declares n={n} but file has {} degrees",
                    degrees.len()
                )));
            }
        }
        Ok(Self::new(degrees))
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# n={}", self.n())?;
        for d in &self.degrees {
            writeln!(w, "{d}")?;
        }
        Ok(())
    }

    /// `Σ d_i(d_i − 1) / Σ d_i`; values below 1 mark the sequence subcritical.
    pub fn subcriticality_ratio<T: Scalar>(&self) -> Result<T> {
        if self.two_m == 0 {
            return Err(Error::Domain(
                "all degrees are zero; subcriticality ratio undefined".into(),
            ));
        }
        let num: u64 = self
            .degrees
            .iter()
            .map(|&d| u64::from(d) * u64::from(d.saturating_sub(1)))
            .sum();
        Ok(T::from_count(num) / T::from_count(self.two_m))
    }
}

/// Report-only check of a sequence; never mutates its input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    pub two_m: u64,
    pub parity_ok: bool,
    pub parity_repaired: bool,
    pub d_max: u32,
    /// `None` when every degree is zero.
    pub ratio: Option<f64>,
    pub subcritical: Option<bool>,
    pub zero_degree_vertices: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.parity_ok && self.ratio.is_some()
    }
}

pub fn validate(ds: &DegreeSequence) -> ValidationReport {
    let ratio = ds.subcriticality_ratio::<f64>().ok();
    ValidationReport {
        n: ds.n(),
        two_m: ds.two_m(),
        parity_ok: ds.is_even(),
        parity_repaired: ds.parity_repaired(),
        d_max: ds.d_max(),
        ratio,
        subcritical: ratio.map(|r| r < 1.0),
        zero_degree_vertices: ds.zero_count(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LawKind {
    /// Independent degrees from a finite pmf given as `(degree, probability)`.
    IidBoundedPmf { pmf: Vec<(u32, f64)> },
    /// `P(D = k) ∝ k^{−γ}` on `1..=cutoff`; the cutoff defaults to
    /// `round(n^{1/(γ−1)})`.
    PowerLaw { gamma: f64, cutoff: Option<u32> },
    Regular { d: u32 },
    /// A fixed list, tiled when `n` is a multiple of its length.
    ExplicitList { degrees: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeLaw {
    pub kind: LawKind,
    pub subcritical_target: Option<f64>,
}

impl From<LawKind> for DegreeLaw {
    fn from(kind: LawKind) -> Self {
        Self {
            kind,
            subcritical_target: None,
        }
    }
}

impl DegreeLaw {
    pub fn iid(pmf: Vec<(u32, f64)>) -> Self {
        LawKind::IidBoundedPmf { pmf }.into()
    }

    pub fn power_law(gamma: f64, cutoff: Option<u32>) -> Self {
        LawKind::PowerLaw { gamma, cutoff }.into()
    }

    pub fn regular(d: u32) -> Self {
        LawKind::Regular { d }.into()
    }

    pub fn explicit(degrees: Vec<u32>) -> Self {
        LawKind::ExplicitList { degrees }.into()
    }

    pub fn check(&self) -> Result<()> {
        if let Some(t) = self.subcritical_target {
            if !(0.0..1.0).contains(&t) {
                return Err(Error::Parameter(format!(
                    "subcritical target {t} outside [0,1)"
                )));
            }
        }
        match &self.kind {
            LawKind::IidBoundedPmf { pmf } => {
                if pmf.is_empty() {
                    return Err(Error::Parameter("empty pmf".into()));
                }
                if pmf.iter().any(|&(_, p)| !(p >= 0.0) || !p.is_finite()) {
                    return Err(Error::Parameter("pmf has a negative probability".into()));
                }
                let total: f64 = pmf.iter().map(|&(_, p)| p).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Parameter(format!("pmf sums to {total}, not 1")));
                }
            }
            LawKind::PowerLaw { gamma, cutoff } => {
                if !(*gamma > 1.0) || !gamma.is_finite() {
                    return Err(Error::Parameter(format!("power-law exponent {gamma} must exceed 1")));
                }
                if *cutoff == Some(0) {
                    return Err(Error::Parameter("power-law cutoff must be at least 1".into()));
                }
            }
            LawKind::Regular { .. } => {}
            LawKind::ExplicitList { degrees } => {
                if degrees.is_empty() {
                    return Err(Error::Parameter("empty explicit degree list".into()));
                }
            }
        }
        Ok(())
    }

    /// Cutoff actually used for `n` vertices.
    pub fn power_law_cutoff(gamma: f64, cutoff: Option<u32>, n: usize) -> u32 {
        cutoff.unwrap_or_else(|| ((n as f64).powf(1.0 / (gamma - 1.0)).round() as u32).max(1))
    }

    /// Draw `n` degrees; an odd total is repaired by incrementing the last
    /// vertex.
    pub fn generate(&self, n: usize, seed: u64) -> Result<DegreeSequence> {
        if n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        self.check()?;
        let mut rng = rng::stream(rng::derive(seed, rng::tag::DEGREES));
        let mut degrees: Vec<u32> = match &self.kind {
            LawKind::IidBoundedPmf { pmf } => {
                let table = InverseCdf::new(pmf.iter().map(|&(d, p)| (d, p)));
                (0..n).map(|_| table.sample(&mut rng)).collect()
            }
            LawKind::PowerLaw { gamma, cutoff } => {
                let cut = Self::power_law_cutoff(*gamma, *cutoff, n);
                let table = InverseCdf::new((1..=cut).map(|k| (k, f64::from(k).powf(-gamma))));
                (0..n).map(|_| table.sample(&mut rng)).collect()
            }
            LawKind::Regular { d } => vec![*d; n],
            LawKind::ExplicitList { degrees } => {
                if n % degrees.len() != 0 {
                    return Err(Error::Parameter(format!(
                        "n={n} is not a multiple of the explicit list length {}",
                        degrees.len()
                    )));
                }
                degrees.iter().copied().cycle().take(n).collect()
            }
        };
        let sum: u64 = degrees.iter().map(|&d| u64::from(d)).sum();
        let repaired = sum % 2 == 1;
        if repaired {
            *degrees.last_mut().expect("n >= 1") += 1;
        }
        let mut ds = DegreeSequence::new(degrees);
        ds.parity_repaired = repaired;
        Ok(ds)
    }

    /// `E[D(D−1)]/E[D]` of the law itself, where it has one.
    pub fn expected_ratio(&self, n: usize) -> Option<f64> {
        let moments = |it: &mut dyn Iterator<Item = (u32, f64)>| {
            let (mut m1, mut m2, mut z) = (0.0, 0.0, 0.0);
            for (d, w) in it {
                let d = f64::from(d);
                m1 += w * d;
                m2 += w * d * (d - 1.0);
                z += w;
            }
            (m1 > 0.0).then(|| (m2 / z) / (m1 / z))
        };
        match &self.kind {
            LawKind::IidBoundedPmf { pmf } => moments(&mut pmf.iter().copied()),
            LawKind::PowerLaw { gamma, cutoff } => {
                let cut = Self::power_law_cutoff(*gamma, *cutoff, n);
                moments(&mut (1..=cut).map(|k| (k, f64::from(k).powf(-gamma))))
            }
            LawKind::Regular { d } => (*d > 0).then(|| f64::from(*d) - 1.0),
            LawKind::ExplicitList { degrees } => DegreeSequence::new(degrees.clone())
                .subcriticality_ratio::<f64>()
                .ok(),
        }
    }

    /// Largest degree the law can produce at size `n` (before parity repair).
    pub fn max_degree(&self, n: usize) -> u32 {
        match &self.kind {
            LawKind::IidBoundedPmf { pmf } => pmf
                .iter()
                .filter(|&&(_, p)| p > 0.0)
                .map(|&(d, _)| d)
                .max()
                .unwrap_or(0),
            LawKind::PowerLaw { gamma, cutoff } => Self::power_law_cutoff(*gamma, *cutoff, n),
            LawKind::Regular { d } => *d,
            LawKind::ExplicitList { degrees } => degrees.iter().copied().max().unwrap_or(0),
        }
    }
}

impl FromStr for DegreeLaw {
    type Err = Error;

    /// `iid:1=0.5,2=0.5`, `powerlaw:gamma=3.5[,cutoff=20]`, `regular:2`,
    /// `list:2,1,1`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("degree law `{s}` lacks `kind:`")))?;
        let kv = |rest: &str| -> Result<Vec<(String, String)>> {
            rest.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.split_once('=')
                        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                        .ok_or_else(|| Error::Parse(format!("expected key=value, got `{t}`")))
                })
                .collect()
        };
        let num = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number `{v}`")))
        };
        let int = |v: &str| -> Result<u32> {
            v.parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad integer `{v}`")))
        };
        let law = match head.trim() {
            "iid" => {
                let pmf = kv(rest)?
                    .into_iter()
                    .map(|(k, v)| Ok((int(&k)?, num(&v)?)))
                    .collect::<Result<Vec<_>>>()?;
                DegreeLaw::iid(pmf)
            }
            "powerlaw" | "power-law" => {
                let mut gamma = None;
                let mut cutoff = None;
                for (k, v) in kv(rest)? {
                    match k.as_str() {
                        "gamma" => gamma = Some(num(&v)?),
                        "cutoff" => cutoff = Some(int(&v)?),
                        _ => return Err(Error::Parse(format!("unknown power-law key `{k}`"))),
                    }
                }
                DegreeLaw::power_law(
                    gamma.ok_or_else(|| Error::Parse("power law needs gamma".into()))?,
                    cutoff,
                )
            }
            "regular" => {
                let v = rest.trim().strip_prefix("d=").unwrap_or(rest.trim());
                DegreeLaw::regular(int(v)?)
            }
            "list" | "explicit" => DegreeLaw::explicit(DegreeSequence::parse_list(rest)?.degrees),
            other => return Err(Error::Parse(format!("unknown degree law `{other}`"))),
        };
        law.check()?;
        Ok(law)
    }
}

impl fmt::Display for DegreeLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        match &self.kind {
            LawKind::IidBoundedPmf { pmf } => {
                let parts: Vec<String> = pmf.iter().map(|(d, p)| format!("{d}={p}")).collect();
                write!(f, "iid:{}", parts.join(","))
            }
            LawKind::PowerLaw { gamma, cutoff: None } => write!(f, "powerlaw:gamma={gamma}"),
            LawKind::PowerLaw {
                gamma,
                cutoff: Some(c),
            } => write!(f, "powerlaw:gamma={gamma},cutoff={c}"),
            LawKind::Regular { d } => write!(f, "regular:{d}"),
            LawKind::ExplicitList { degrees } => write!(f, "list:{}", join(degrees)),
        }
    }
}

/// Inverse-CDF sampler over a finite support with unnormalised weights.
struct InverseCdf {
    values: Vec<u32>,
    cdf: Vec<f64>,
}

impl InverseCdf {
    fn new(weights: impl Iterator<Item = (u32, f64)>) -> Self {
        let mut values = Vec::new();
        let mut cdf = Vec::new();
        let mut acc = 0.0;
        for (v, w) in weights {
            acc += w;
            values.push(v);
            cdf.push(acc);
        }
        for c in &mut cdf {
            *c /= acc;
        }
        Self { values, cdf }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c <= u);
        self.values[i.min(self.values.len() - 1)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn regular_laws_are_deterministic() {
        let ds = DegreeLaw::regular(1).generate(4, 7).unwrap();
        assert_eq!(ds.degrees(), &[1, 1, 1, 1]);
        assert_eq!(ds.two_m(), 4);
        let ds = DegreeLaw::regular(2).generate(3, 0).unwrap();
        assert_eq!(ds.degrees(), &[2, 2, 2]);
        assert_eq!(ds.two_m(), 6);
    }

    #[test]
    fn iid_mean_degree_matches_pmf() {
        let ds = DegreeLaw::iid(vec![(1, 0.5), (2, 0.5)])
            .generate(10_000, 1)
            .unwrap();
        let mean = ds.two_m() as f64 / ds.n() as f64;
        assert!((mean - 1.5).abs() < 0.05, "mean degree {mean}");
        assert!(ds.is_even());
    }

    #[test]
    fn ratio_examples() {
        let r = |v: Vec<u32>| DegreeSequence::new(v).subcriticality_ratio::<Rational>().unwrap();
        assert_eq!(r(vec![1, 1, 1, 1]), Rational::new(0, 1));
        assert_eq!(r(vec![2, 2, 2]), Rational::new(1, 1));
        assert_eq!(r(vec![2, 1, 1]), Rational::new(1, 2));
        assert!(DegreeSequence::new(vec![0, 0])
            .subcriticality_ratio::<f64>()
            .is_err());
        for d in 1..6 {
            let ds = DegreeLaw::regular(d).generate(10, 0).unwrap();
            assert_eq!(
                ds.subcriticality_ratio::<Rational>().unwrap(),
                Rational::from_integer(i64::from(d) - 1)
            );
        }
    }

    #[test]
    fn validation_reports() {
        let rep = validate(&DegreeSequence::new(vec![1, 1, 1]));
        assert!(!rep.parity_ok);
        assert!(!rep.is_valid());

        let rep = validate(&DegreeSequence::new(vec![0, 0]));
        assert!(rep.ratio.is_none());
        assert_eq!(rep.zero_degree_vertices, 2);

        let rep = validate(&DegreeSequence::new(vec![3, 1, 1, 1]));
        assert!(rep.parity_ok);
        assert_eq!(rep.ratio, Some(1.0));
        assert_eq!(rep.subcritical, Some(false));
    }

    #[test]
    fn parity_repair_bumps_last_vertex() {
        let ds = DegreeLaw::explicit(vec![1, 1, 1]).generate(3, 0).unwrap();
        assert_eq!(ds.degrees(), &[1, 1, 2]);
        assert!(ds.parity_repaired());
        assert!(validate(&ds).parity_repaired);
    }

    #[test]
    fn invalid_laws() {
        assert!(DegreeLaw::iid(vec![(1, 0.5), (2, 0.4)]).generate(5, 0).is_err());
        assert!(DegreeLaw::iid(vec![(1, -0.5), (2, 1.5)]).generate(5, 0).is_err());
        assert!(DegreeLaw::power_law(1.0, None).generate(5, 0).is_err());
        assert!(DegreeLaw::power_law(3.0, Some(0)).generate(5, 0).is_err());
        assert!(matches!(
            DegreeLaw::regular(1).generate(0, 0),
            Err(Error::Domain(_))
        ));
        assert!(DegreeLaw::explicit(vec![2, 1, 1]).generate(4, 0).is_err());
    }

    #[test]
    fn law_strings_round_trip() {
        for s in ["iid:1=0.5,2=0.5", "powerlaw:gamma=3.5,cutoff=20", "regular:2", "list:2,1,1"] {
            let law: DegreeLaw = s.parse().unwrap();
            assert_eq!(law.to_string(), s);
        }
        assert!("bogus:1".parse::<DegreeLaw>().is_err());
        assert!("iid:1=0.7".parse::<DegreeLaw>().is_err());
    }

    #[test]
    fn text_format() {
        let ds = DegreeSequence::new(vec![2, 1, 1]);
        let mut buf = Vec::new();
        ds.write_text(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "# n=3\n2\n1\n1\n");
        assert_eq!(DegreeSequence::read_text(&buf[..]).unwrap(), ds);
        assert_eq!(DegreeSequence::read_text(&b"3\n1\n"[..]).unwrap().degrees(), &[3, 1]);
        assert!(DegreeSequence::read_text(&b"# n=4\n1\n1\n"[..]).is_err());
    }

    #[test]
    fn power_law_tail_slope() {
        let gamma = 3.5;
        let law = DegreeLaw::power_law(gamma, None);
        let n = 100_000;
        let ds = law.generate(n, 3).unwrap();
        let cutoff = DegreeLaw::power_law_cutoff(gamma, None, n);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 2..=cutoff {
            let tail = ds.degrees().iter().filter(|&&d| d >= k).count();
            if tail >= 10 {
                xs.push(f64::from(k).ln());
                ys.push((tail as f64 / n as f64).ln());
            }
        }
        let fit = crate::summary::ols(&xs, &ys).unwrap();
        assert!(fit.slope <= 1.0 - gamma + 0.3, "tail slope {}", fit.slope);
    }

    #[test]
    fn generation_is_reproducible() {
        let law: DegreeLaw = "iid:1=0.3,2=0.3,3=0.4".parse().unwrap();
        assert_eq!(law.generate(500, 11).unwrap(), law.generate(500, 11).unwrap());
        assert_ne!(law.generate(500, 11).unwrap(), law.generate(500, 12).unwrap());
        assert!(law.generate(501, 4).unwrap().is_even());
    }
}
