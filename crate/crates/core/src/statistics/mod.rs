//! Additive, isomorphism-invariant graph statistics.
//!
//! Every statistic is a per-component evaluator; the value on a graph is the
//! sum over its connected components. Registry names:
//!
//! | name                    | statistic                                   |
//! |-------------------------|---------------------------------------------|
//! | `beta0`                 | number of components                        |
//! | `zero`                  | identically zero                            |
//! | `Spk:p=2,K=10`          | `Σ |Γ|^p 1[|Γ| ≤ K]` (`K=inf` allowed)      |
//! | `susceptibility:p=2`    | `Σ |Γ|^p`                                   |
//! | `treecount:path3`       | components isomorphic to a tree pattern     |
//! | `maxcut`                | maximum cut size                            |
//! | `ising:beta=0.5`        | Ising log-partition function                |
//! | `potts:q=3,beta=0.5`    | Potts log-partition function                |
//!
//! Component size is measured in vertices.

mod maxcut;
mod partition;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{Component, MultiGraph};
use crate::scalar::Scalar;

pub use maxcut::max_cut_value;
pub use partition::{log_partition_value, SpinModel};
pub use tree::TreePattern;

pub const DEFAULT_MAXCUT_CAP: usize = 24;
/// Vertex cap for two-state models; larger alphabets scale it down so the
/// enumeration stays at `2^16` configurations.
pub const DEFAULT_SPIN_CAP_STATES2: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub enum StatisticKind {
    ComponentCount,
    Zero,
    TruncatedSizeMoment { p: u32, k: Option<u64> },
    Susceptibility { p: u32 },
    TreeCount(TreePattern),
    MaxCut,
    LogPartition(SpinModel),
}

/// A named additive statistic with its declared Lipschitz constants.
#[derive(Clone, Debug, PartialEq)]
pub struct StatisticSpec {
    name: String,
    kind: StatisticKind,
    lipschitz_edge_addition: Option<f64>,
    lipschitz_switching: Option<f64>,
    component_size_cap: Option<usize>,
}

impl StatisticSpec {
    pub fn new(name: impl Into<String>, kind: StatisticKind) -> Self {
        let edge = match &kind {
            StatisticKind::ComponentCount | StatisticKind::MaxCut => Some(1.0),
            StatisticKind::Zero => Some(0.0),
            StatisticKind::TruncatedSizeMoment { p, k: Some(k) } => {
                Some((2.0 * *k as f64).powi(*p as i32))
            }
            StatisticKind::TruncatedSizeMoment { k: None, .. } => None,
            StatisticKind::Susceptibility { .. } => None,
            // Adding an edge changes at most two components' membership.
            StatisticKind::TreeCount(_) => Some(2.0),
            StatisticKind::LogPartition(model) => Some(model.edge_lipschitz()),
        };
        let cap = match &kind {
            StatisticKind::MaxCut => Some(DEFAULT_MAXCUT_CAP),
            StatisticKind::LogPartition(model) => Some(model.default_cap()),
            _ => None,
        };
        Self {
            name: name.into(),
            kind,
            lipschitz_edge_addition: edge,
            lipschitz_switching: edge.map(|c| 4.0 * c),
            component_size_cap: cap,
        }
    }

    pub fn component_count() -> Self {
        Self::new("beta0", StatisticKind::ComponentCount)
    }

    pub fn zero() -> Self {
        Self::new("zero", StatisticKind::Zero)
    }

    pub fn truncated_size_moment(p: u32, k: Option<u64>) -> Self {
        let kk = k.map_or("inf".to_string(), |k| k.to_string());
        Self::new(format!("Spk:p={p},K={kk}"), StatisticKind::TruncatedSizeMoment { p, k })
    }

    pub fn susceptibility(p: u32) -> Self {
        Self::new(format!("susceptibility:p={p}"), StatisticKind::Susceptibility { p })
    }

    pub fn tree_count(pattern: TreePattern) -> Self {
        Self::new(format!("treecount:{}", pattern.name()), StatisticKind::TreeCount(pattern))
    }

    pub fn max_cut() -> Self {
        Self::new("maxcut", StatisticKind::MaxCut)
    }

    pub fn ising(beta: f64) -> Result<Self> {
        Ok(Self::new(
            format!("ising:beta={beta}"),
            StatisticKind::LogPartition(SpinModel::ising(beta, 0.0)?),
        ))
    }

    pub fn potts(q: usize, beta: f64) -> Result<Self> {
        Ok(Self::new(
            format!("potts:q={q},beta={beta}"),
            StatisticKind::LogPartition(SpinModel::potts(q, beta)?),
        ))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &StatisticKind {
        &self.kind
    }

    /// `c` with `|F(G) − F(G + e)| ≤ c` for every graph and non-loop edge.
    pub fn lipschitz_edge_addition(&self) -> Option<f64> {
        self.lipschitz_edge_addition
    }

    /// `M` with `|F(m) − F(m')| ≤ M` for matchings differing by a switching.
    pub fn lipschitz_switching(&self) -> Option<f64> {
        self.lipschitz_switching
    }

    pub fn component_size_cap(&self) -> Option<usize> {
        self.component_size_cap
    }

    pub fn with_cap(mut self, cap: Option<usize>) -> Self {
        self.component_size_cap = cap;
        self
    }

    /// Override the declared constants. A declared edge-addition constant
    /// `c` requires a switching constant of at most `4c`.
    pub fn with_lipschitz(mut self, edge: Option<f64>, switching: Option<f64>) -> Result<Self> {
        if let (Some(c), Some(m)) = (edge, switching) {
            if m > 4.0 * c {
                return Err(Error::Parameter(format!(
                    "switching constant {m} exceeds 4 × edge-addition constant {c}"
                )));
            }
        }
        if edge.is_some() && switching.is_none() {
            return Err(Error::Parameter(
                "an edge-addition constant needs a switching constant".into(),
            ));
        }
        self.lipschitz_edge_addition = edge;
        self.lipschitz_switching = switching;
        Ok(self)
    }

    /// Value on one connected component.
    pub fn component_value<T: Scalar>(&self, c: &Component) -> Result<T> {
        if let Some(cap) = self.component_size_cap {
            if c.size() > cap {
                return Err(Error::CapExceeded {
                    statistic: self.name.clone(),
                    size: c.size(),
                    cap,
                });
            }
        }
        Ok(match &self.kind {
            StatisticKind::ComponentCount => component_count(c),
            StatisticKind::Zero => T::zero(),
            StatisticKind::TruncatedSizeMoment { p, k } => truncated_size_moment(c, *p, *k),
            StatisticKind::Susceptibility { p } => susceptibility(c, *p),
            StatisticKind::TreeCount(t) => tree_component_count(c, t),
            StatisticKind::MaxCut => T::from_count(max_cut_value(c)),
            StatisticKind::LogPartition(model) => T::from_real(log_partition_value(c, model))
                .ok_or_else(|| Error::InexactScalar(self.name.clone()))?,
        })
    }

    /// `Σ` of [`component_value`](Self::component_value) over components.
    pub fn evaluate<T: Scalar>(&self, g: &MultiGraph) -> Result<T> {
        let mut total = T::zero();
        for c in &g.components().components {
            total = total + self.component_value::<T>(c)?;
        }
        Ok(total)
    }
}

impl FromStr for StatisticSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let params = parse_params(rest)?;
        let get = |key: &str| params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let known = |keys: &[&str]| -> Result<()> {
            match params.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
                Some((k, _)) => Err(Error::Parse(format!("statistic `{head}` has no parameter `{k}`"))),
                None => Ok(()),
            }
        };
        let int = |key: &str| -> Result<Option<u64>> {
            get(key)
                .map(|v| v.parse::<u64>().map_err(|_| Error::Parse(format!("bad integer {key}={v}"))))
                .transpose()
        };
        let real = |key: &str| -> Result<Option<f64>> {
            get(key)
                .map(|v| v.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {key}={v}"))))
                .transpose()
        };
        let exponent = |default: Option<u32>| -> Result<u32> {
            int("p")?
                .map(|p| u32::try_from(p).map_err(|_| Error::Parse("p too large".into())))
                .transpose()?
                .or(default)
                .ok_or_else(|| Error::Parse(format!("`{head}` needs p")))
        };
        let spec = match head.trim() {
            "beta0" => {
                known(&[])?;
                Self::component_count()
            }
            "zero" => {
                known(&[])?;
                Self::zero()
            }
            "Spk" | "spk" => {
                known(&["p", "K"])?;
                let k = match get("K") {
                    None | Some("inf") => None,
                    Some(_) => int("K")?,
                };
                if k == Some(0) {
                    return Err(Error::Parse("K must be at least 1".into()));
                }
                Self::truncated_size_moment(exponent(None)?, k)
            }
            "susceptibility" => {
                known(&["p"])?;
                Self::susceptibility(exponent(Some(2))?)
            }
            "treecount" => Self::tree_count(rest.parse::<TreePattern>()?),
            "maxcut" => {
                known(&["cap"])?;
                let cap = int("cap")?.map(|c| c as usize).unwrap_or(DEFAULT_MAXCUT_CAP);
                Self::max_cut().with_cap(Some(cap))
            }
            "ising" => {
                known(&["beta", "field", "cap"])?;
                let beta = real("beta")?.unwrap_or(0.0);
                let field = real("field")?.unwrap_or(0.0);
                let mut spec = Self::new(
                    s.trim().to_string(),
                    StatisticKind::LogPartition(SpinModel::ising(beta, field)?),
                );
                if let Some(cap) = int("cap")? {
                    spec = spec.with_cap(Some(cap as usize));
                }
                spec
            }
            "potts" => {
                known(&["q", "beta", "cap"])?;
                let q = int("q")?.ok_or_else(|| Error::Parse("potts needs q".into()))? as usize;
                let beta = real("beta")?.unwrap_or(0.0);
                let mut spec = Self::potts(q, beta)?;
                spec.name = s.trim().to_string();
                if let Some(cap) = int("cap")? {
                    spec = spec.with_cap(Some(cap as usize));
                }
                spec
            }
            other => return Err(Error::Parse(format!("unknown statistic `{other}`"))),
        };
        Ok(spec)
    }
}

impl fmt::Display for StatisticSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl Serialize for StatisticSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name)
    }
}

fn parse_params(rest: &str) -> Result<Vec<(String, String)>> {
    rest.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .filter_map(|t| {
            // Tree patterns carry bare words; only key=value pairs are params.
            t.split_once('=')
                .map(|(k, v)| Ok((k.trim().to_string(), v.trim().to_string())))
        })
        .collect()
}

/// Always 1: the total is the number of components.
pub fn component_count<T: Scalar>(_: &Component) -> T {
    T::one()
}

fn pow_count<T: Scalar>(base: usize, p: u32) -> T {
    (0..p).fold(T::one(), |acc, _| acc * T::from_count(base as u64))
}

/// `|Γ|^p` if `|Γ| ≤ K`, else 0; `k = None` means `K = ∞`.
pub fn truncated_size_moment<T: Scalar>(c: &Component, p: u32, k: Option<u64>) -> T {
    match k {
        Some(k) if c.size() as u64 > k => T::zero(),
        _ => pow_count(c.size(), p),
    }
}

/// `|Γ|^p`.
pub fn susceptibility<T: Scalar>(c: &Component, p: u32) -> T {
    pow_count(c.size(), p)
}

/// 1 if the component is a tree isomorphic to `pattern`. Self-loops and
/// multi-edges disqualify.
pub fn tree_component_count<T: Scalar>(c: &Component, pattern: &TreePattern) -> T {
    if pattern.matches(c) {
        T::one()
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn g(n: usize, e: &[(u32, u32)]) -> MultiGraph {
        MultiGraph::from_edges(n, e.iter().copied()).unwrap()
    }

    fn eval(s: &str, graph: &MultiGraph) -> f64 {
        s.parse::<StatisticSpec>().unwrap().evaluate::<f64>(graph).unwrap()
    }

    #[test]
    fn component_counts() {
        assert_eq!(eval("beta0", &MultiGraph::empty(5)), 5.0);
        assert_eq!(eval("beta0", &MultiGraph::empty(3)), 3.0);
        // ds=[2,1,1]: path 2–1–3 vs self-loop at 1 + edge 2–3.
        assert_eq!(eval("beta0", &g(3, &[(0, 1), (0, 2)])), 1.0);
        assert_eq!(eval("beta0", &g(3, &[(0, 0), (1, 2)])), 2.0);
    }

    #[test]
    fn size_moments() {
        // Components of sizes {2,3}.
        let graph = g(5, &[(0, 1), (2, 3), (3, 4)]);
        assert_eq!(eval("susceptibility:p=2", &graph), 13.0);
        assert_eq!(eval("Spk:p=2,K=inf", &graph), 13.0);
        assert_eq!(eval("Spk:p=2,K=2", &graph), 4.0);
        assert_eq!(eval("Spk:p=0,K=5", &graph), 2.0);
        assert_eq!(eval("susceptibility:p=3", &g(3, &[(1, 2)])), 9.0);

        let tri = g(3, &[(0, 1), (1, 2), (0, 2)]);
        let c = &tri.components().components[0];
        assert_eq!(truncated_size_moment::<f64>(c, 2, Some(2)), 0.0);
        let pair = g(2, &[(0, 1)]);
        assert_eq!(truncated_size_moment::<f64>(&pair.components().components[0], 0, Some(5)), 1.0);
    }

    #[test]
    fn susceptibility_identities() {
        let graph = g(7, &[(0, 1), (1, 2), (4, 5), (6, 6)]);
        assert_eq!(eval("susceptibility:p=0", &graph), eval("beta0", &graph));
        assert_eq!(eval("susceptibility:p=1", &graph), 7.0);
    }

    #[test]
    fn max_cut_examples() {
        assert_eq!(eval("maxcut", &g(2, &[(0, 1)])), 1.0);
        assert_eq!(eval("maxcut", &g(3, &[(0, 1), (1, 2), (0, 2)])), 2.0);
        let k4 = g(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(eval("maxcut", &k4), 4.0);
    }

    #[test]
    fn tree_counts() {
        let edge = g(2, &[(0, 1)]);
        assert_eq!(eval("treecount:edge", &edge), 1.0);
        let tri = g(3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(eval("treecount:path3", &tri), 0.0);
        // Star on three vertices centred at 0 is the path 1–0–2.
        let star = g(3, &[(0, 1), (0, 2)]);
        assert_eq!(eval("treecount:path3", &star), 1.0);
        assert_eq!(eval("treecount:star3", &star), 1.0);
        let double = g(2, &[(0, 1), (0, 1)]);
        assert_eq!(eval("treecount:edge", &double), 0.0);
    }

    #[test]
    fn log_partition_examples() {
        let three = MultiGraph::empty(3);
        assert!((eval("ising:beta=0", &three) - 8f64.ln()).abs() < 1e-12);
        assert!((eval("potts:q=3,beta=0", &MultiGraph::empty(2)) - 9f64.ln()).abs() < 1e-12);
        let e = 1f64.exp();
        let want = (2.0 / e + 2.0 * e).ln();
        assert!((eval("ising:beta=1", &g(2, &[(0, 1)])) - want).abs() < 1e-12);
    }

    #[test]
    fn exact_scalars() {
        let graph = g(5, &[(0, 1), (2, 3), (3, 4)]);
        let s2: Rational = StatisticSpec::susceptibility(2).evaluate(&graph).unwrap();
        assert_eq!(s2, Rational::from_integer(13));
        let ising = StatisticSpec::ising(0.5).unwrap();
        assert!(matches!(
            ising.evaluate::<Rational>(&graph),
            Err(Error::InexactScalar(_))
        ));
    }

    #[test]
    fn caps_are_enforced() {
        let spec = StatisticSpec::max_cut().with_cap(Some(2));
        let err = spec.evaluate::<f64>(&g(3, &[(0, 1), (1, 2)])).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { size: 3, cap: 2, .. }));
        assert_eq!(StatisticSpec::potts(3, 0.5).unwrap().component_size_cap(), Some(10));
        assert_eq!(StatisticSpec::ising(0.5).unwrap().component_size_cap(), Some(16));
    }

    #[test]
    fn declared_constants() {
        let c = |s: &str| s.parse::<StatisticSpec>().unwrap().lipschitz_edge_addition();
        assert_eq!(c("beta0"), Some(1.0));
        assert_eq!(c("maxcut"), Some(1.0));
        assert_eq!(c("Spk:p=2,K=5"), Some(100.0));
        assert_eq!(c("Spk:p=2,K=inf"), None);
        assert_eq!(c("susceptibility:p=2"), None);
        assert!((c("ising:beta=0.5").unwrap() - 0.5f64.exp()).abs() < 1e-15);
        let s: StatisticSpec = "Spk:p=2,K=5".parse().unwrap();
        assert_eq!(s.lipschitz_switching(), Some(400.0));
        assert!(StatisticSpec::zero().with_lipschitz(Some(1.0), Some(5.0)).is_err());
        assert!(StatisticSpec::zero().with_lipschitz(Some(1.0), None).is_err());
    }

    #[test]
    fn registry_errors() {
        for bad in ["nope", "beta0:x=1", "Spk:K=3", "Spk:p=2,K=0", "potts:beta=1", "treecount:blob"] {
            assert!(bad.parse::<StatisticSpec>().is_err(), "{bad}");
        }
    }
}
