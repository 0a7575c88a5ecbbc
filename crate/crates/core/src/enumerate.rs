//! Exhaustive enumeration of all `(2m−1)!!` half-edge matchings. Serves as
//! the exact oracle for small degree sequences: outcome laws, conditional
//! expectations given an exploration prefix and martingale-difference
//! moments.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::degree::DegreeSequence;
use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::scalar::Scalar;
use crate::statistics::StatisticSpec;

/// Refuse enumerations beyond this many half-edges (`13!! = 135135`).
pub const MAX_ENUMERATED_HALF_EDGES: u64 = 14;

/// Number of perfect matchings on `2m` points.
pub fn matching_count(two_m: u64) -> u64 {
    (1..two_m).step_by(2).product()
}

/// Calls `f` with the partner array of every perfect matching on
/// `0..half_edges`.
pub fn for_each_matching(half_edges: usize, mut f: impl FnMut(&[u32])) {
    fn rec(partner: &mut [u32], f: &mut impl FnMut(&[u32])) {
        let Some(a) = partner.iter().position(|&p| p == u32::MAX) else {
            f(partner);
            return;
        };
        for b in a + 1..partner.len() {
            if partner[b] == u32::MAX {
                partner[a] = b as u32;
                partner[b] = a as u32;
                rec(partner, f);
                partner[a] = u32::MAX;
                partner[b] = u32::MAX;
            }
        }
    }
    if half_edges % 2 == 1 {
        return;
    }
    let mut partner = vec![u32::MAX; half_edges];
    rec(&mut partner, &mut f);
}

/// Half-edge ids in `(vertex, slot)` order and their owners.
fn owners(ds: &DegreeSequence) -> Vec<u32> {
    ds.degrees()
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v as u32, d as usize))
        .collect()
}

/// The order in which the exploration reveals the pairs of a fixed
/// matching: at each step the smallest unpaired half-edge of an already
/// discovered vertex, or of the smallest undiscovered vertex when none is
/// left.
pub fn exploration_order(ds: &DegreeSequence, partner: &[u32]) -> Vec<(u32, u32)> {
    let owner = owners(ds);
    let mut discovered = vec![false; ds.n()];
    let mut paired = vec![false; partner.len()];
    let mut order = Vec::with_capacity(partner.len() / 2);
    while order.len() < partner.len() / 2 {
        let first = (0..partner.len())
            .find(|&h| !paired[h] && discovered[owner[h] as usize])
            .or_else(|| (0..partner.len()).find(|&h| !paired[h]))
            .expect("unpaired half-edge remains");
        discovered[owner[first] as usize] = true;
        let second = partner[first] as usize;
        discovered[owner[second] as usize] = true;
        paired[first] = true;
        paired[second] = true;
        order.push((first as u32, second as u32));
    }
    order
}

fn graph_of(ds: &DegreeSequence, owner: &[u32], partner: &[u32]) -> MultiGraph {
    let edges = (0..partner.len())
        .filter(|&h| (h as u32) < partner[h])
        .map(|h| (owner[h], owner[partner[h] as usize]));
    MultiGraph::from_edges(ds.n(), edges).expect("owners are in range")
}

fn check_size(ds: &DegreeSequence) -> Result<()> {
    ds.require_even()?;
    if ds.two_m() > MAX_ENUMERATED_HALF_EDGES {
        return Err(Error::Parameter(format!(
            "enumeration limited to {MAX_ENUMERATED_HALF_EDGES} half-edges, got {}",
            ds.two_m()
        )));
    }
    Ok(())
}

/// Exact law of the labelled multigraph, keyed by its sorted edge list.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactLaw {
    pub matchings: u64,
    pub counts: BTreeMap<Vec<(u32, u32)>, u64>,
}

impl ExactLaw {
    pub fn of(ds: &DegreeSequence) -> Result<Self> {
        check_size(ds)?;
        let owner = owners(ds);
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for_each_matching(owner.len(), |p| {
            *counts.entry(graph_of(ds, &owner, p).sorted_edges()).or_insert(0) += 1;
            total += 1;
        });
        Ok(Self {
            matchings: total,
            counts,
        })
    }

    pub fn probability(&self, key: &[(u32, u32)]) -> f64 {
        self.counts.get(key).copied().unwrap_or(0) as f64 / self.matchings as f64
    }

    /// Law conditioned on having neither self-loops nor multi-edges.
    pub fn simple_only(&self) -> ExactLaw {
        let counts: BTreeMap<_, _> = self
            .counts
            .iter()
            .filter(|(k, _)| k.iter().all(|(u, v)| u != v) && k.windows(2).all(|w| w[0] != w[1]))
            .map(|(k, &c)| (k.clone(), c))
            .collect();
        ExactLaw {
            matchings: counts.values().sum(),
            counts,
        }
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (&Vec<(u32, u32)>, f64)> {
        self.counts
            .iter()
            .map(move |(k, &c)| (k, c as f64 / self.matchings as f64))
    }
}

/// Exact mean, variance and martingale-difference moments of a statistic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactMoments<T> {
    pub mean: T,
    pub variance: T,
    /// `E Δ_k²` for `k = 1..=m`.
    pub delta_sq: Vec<T>,
    /// `E Δ_k⁴` for `k = 1..=m`.
    pub delta_4th: Vec<T>,
}

impl<T: Scalar> ExactMoments<T> {
    /// `sup_k E Δ_k⁴`.
    pub fn c_n(&self) -> T {
        self.delta_4th
            .iter()
            .cloned()
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }
}

/// Conditional expectations `E(F | first k exploration pairs)`, one map per
/// `k = 0..=m` keyed by the prefix.
pub struct ExactConditional<T> {
    pub levels: Vec<HashMap<Vec<(u32, u32)>, T>>,
    pub matchings: Vec<(Vec<(u32, u32)>, T)>,
}

impl<T: Scalar> ExactConditional<T> {
    pub fn of(spec: &StatisticSpec, ds: &DegreeSequence) -> Result<Self> {
        check_size(ds)?;
        let owner = owners(ds);
        let mut matchings = Vec::new();
        let mut err = None;
        for_each_matching(owner.len(), |p| {
            if err.is_some() {
                return;
            }
            match spec.evaluate::<T>(&graph_of(ds, &owner, p)) {
                Ok(f) => matchings.push((exploration_order(ds, p), f)),
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let m = ds.m();
        let mut levels = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let mut acc: HashMap<Vec<(u32, u32)>, (T, u64)> = HashMap::new();
            for (order, f) in &matchings {
                let e = acc.entry(order[..k].to_vec()).or_insert((T::zero(), 0));
                e.0 = e.0.clone() + f.clone();
                e.1 += 1;
            }
            levels.push(
                acc.into_iter()
                    .map(|(key, (s, c))| (key, s / T::from_count(c)))
                    .collect(),
            );
        }
        Ok(Self { levels, matchings })
    }

    pub fn conditional_mean(&self, prefix: &[(u32, u32)]) -> Option<&T> {
        self.levels.get(prefix.len())?.get(prefix)
    }

    pub fn moments(&self) -> ExactMoments<T> {
        let count = T::from_count(self.matchings.len() as u64);
        let mean = self.levels[0][&Vec::new()].clone();
        let variance = self
            .matchings
            .iter()
            .map(|(_, f)| (f.clone() - mean.clone()) * (f.clone() - mean.clone()))
            .fold(T::zero(), |a, b| a + b)
            / count.clone();
        let m = self.levels.len() - 1;
        let mut delta_sq = Vec::with_capacity(m);
        let mut delta_4th = Vec::with_capacity(m);
        for k in 1..=m {
            let (mut s2, mut s4) = (T::zero(), T::zero());
            for (order, _) in &self.matchings {
                let d = self.levels[k][&order[..k]].clone() - self.levels[k - 1][&order[..k - 1]].clone();
                let d2 = d.clone() * d;
                s2 = s2 + d2.clone();
                s4 = s4 + d2.clone() * d2;
            }
            delta_sq.push(s2 / count.clone());
            delta_4th.push(s4 / count.clone());
        }
        ExactMoments {
            mean,
            variance,
            delta_sq,
            delta_4th,
        }
    }
}

pub fn exact_moments<T: Scalar>(spec: &StatisticSpec, ds: &DegreeSequence) -> Result<ExactMoments<T>> {
    Ok(ExactConditional::<T>::of(spec, ds)?.moments())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Rational, WideRational};

    fn ds(d: &[u32]) -> DegreeSequence {
        DegreeSequence::new(d.to_vec())
    }

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn counts_matchings() {
        for two_m in [0usize, 2, 4, 6, 8] {
            let mut c = 0;
            for_each_matching(two_m, |_| c += 1);
            assert_eq!(c, matching_count(two_m as u64));
        }
        assert_eq!(matching_count(8), 105);
    }

    #[test]
    fn law_of_211() {
        let law = ExactLaw::of(&ds(&[2, 1, 1])).unwrap();
        assert_eq!(law.matchings, 3);
        assert_eq!(law.counts[&vec![(0, 0), (1, 2)]], 1);
        assert_eq!(law.counts[&vec![(0, 1), (0, 2)]], 2);
        let simple = law.simple_only();
        assert_eq!(simple.matchings, 2);
        assert_eq!(simple.counts.len(), 1);
    }

    #[test]
    fn beta0_oracle_211() {
        let m = exact_moments::<Rational>(&StatisticSpec::component_count(), &ds(&[2, 1, 1])).unwrap();
        assert_eq!(m.mean, r(4, 3));
        assert_eq!(m.variance, r(2, 9));
        assert_eq!(m.delta_sq, vec![r(2, 9), r(0, 1)]);
        assert_eq!(m.delta_4th, vec![r(2, 27), r(0, 1)]);
        assert_eq!(m.c_n(), r(2, 27));
    }

    #[test]
    fn variance_identity_is_exact() {
        for d in [&[3, 3, 1, 1, 2, 2][..], &[2, 2, 2, 2], &[1, 1, 1, 1, 2, 2], &[4, 2, 1, 1]] {
            for spec in [
                StatisticSpec::component_count(),
                StatisticSpec::susceptibility(2),
                StatisticSpec::max_cut(),
            ] {
                // Fourth powers of twelve-half-edge conditional means overflow i64.
                let m = exact_moments::<WideRational>(&spec, &ds(d)).unwrap();
                let sum = m.delta_sq.iter().fold(WideRational::from_integer(0), |a, b| a + b);
                assert_eq!(sum, m.variance, "{d:?} {}", spec.name());
            }
        }
    }

    #[test]
    fn constant_statistic_has_no_fluctuation() {
        let m = exact_moments::<Rational>(&StatisticSpec::component_count(), &ds(&[1, 1, 1, 1])).unwrap();
        assert_eq!(m.mean, r(2, 1));
        assert!(m.delta_sq.iter().all(|x| *x == r(0, 1)));
    }

    #[test]
    fn order_visits_components_in_vertex_order() {
        // ds=[1,1,1,1], matching {0-3, 1-2}: the component of vertex 1 is
        // explored first, then vertex 2 re-seeds.
        let order = exploration_order(&ds(&[1, 1, 1, 1]), &[3, 2, 1, 0]);
        assert_eq!(order, vec![(0, 3), (1, 2)]);
    }

    #[test]
    fn refuses_large_sequences() {
        assert!(ExactLaw::of(&ds(&[2; 8])).is_err());
        assert!(ExactLaw::of(&ds(&[1, 1, 1])).is_err());
    }
}
