//! Matchings of half-edges and the two-pair switchings between them.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::degree::DegreeSequence;
use crate::error::{Error, Result};
use crate::exploration::{Explorer, HalfEdge};
use crate::graph::MultiGraph;
use crate::rng::{self, tag};
use crate::statistics::StatisticSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SwitchMode {
    /// `(a,b),(c,d) → (a,c),(b,d)`
    Cross1,
    /// `(a,b),(c,d) → (a,d),(b,c)`
    Cross2,
}

/// A perfect matching of the half-edges of a degree sequence.
#[derive(Clone, Debug)]
pub struct Matching {
    explorer: Explorer,
    partner: Vec<u32>,
}

impl Matching {
    pub fn from_partners(ds: &DegreeSequence, partner: Vec<u32>) -> Result<Self> {
        let explorer = Explorer::new(ds)?;
        if partner.len() != explorer.half_edge_count() {
            return Err(Error::Domain("partner array does not cover the half-edges".into()));
        }
        for (h, &p) in partner.iter().enumerate() {
            if p as usize >= partner.len() || p as usize == h || partner[p as usize] as usize != h {
                return Err(Error::Domain(format!("half-edge {h} is not properly paired")));
            }
        }
        Ok(Self { explorer, partner })
    }

    pub fn from_pairs(ds: &DegreeSequence, pairs: &[(HalfEdge, HalfEdge)]) -> Result<Self> {
        let explorer = Explorer::new(ds)?;
        let mut partner = vec![u32::MAX; explorer.half_edge_count()];
        for &(a, b) in pairs {
            let (a, b) = (Self::id_in(&explorer, a)?, Self::id_in(&explorer, b)?);
            for (x, y) in [(a, b), (b, a)] {
                if partner[x as usize] != u32::MAX {
                    return Err(Error::Domain("half-edge paired twice".into()));
                }
                partner[x as usize] = y;
            }
        }
        Self::from_partners(ds, partner)
    }

    /// A uniformly random matching, drawn by exploration.
    pub fn sample(ds: &DegreeSequence, seed: u64) -> Result<Self> {
        let explorer = Explorer::new(ds)?;
        let st = explorer.sample_state(seed);
        let partner = explorer.partners(&st);
        Ok(Self { explorer, partner })
    }

    fn id_in(ex: &Explorer, h: HalfEdge) -> Result<u32> {
        ex.id(h)
            .ok_or_else(|| Error::Domain(format!("half-edge {h:?} does not exist")))
    }

    pub fn partner_ids(&self) -> &[u32] {
        &self.partner
    }

    /// Pairs with the smaller half-edge first, in half-edge order.
    pub fn pairs(&self) -> Vec<(HalfEdge, HalfEdge)> {
        self.id_pairs()
            .map(|(a, b)| (self.explorer.half_edge(a), self.explorer.half_edge(b)))
            .collect()
    }

    fn id_pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.partner
            .iter()
            .enumerate()
            .filter(|&(h, &p)| (h as u32) < p)
            .map(|(h, &p)| (h as u32, p))
    }

    pub fn contains(&self, a: HalfEdge, b: HalfEdge) -> bool {
        match (self.explorer.id(a), self.explorer.id(b)) {
            (Some(x), Some(y)) => self.partner[x as usize] == y,
            _ => false,
        }
    }

    pub fn graph(&self) -> MultiGraph {
        self.explorer.graph_of_partners(&self.partner)
    }

    /// Replace `pair_a = (a,b)` and `pair_b = (c,d)` by the rewiring chosen
    /// with `mode`.
    pub fn apply_switching(
        &self,
        pair_a: (HalfEdge, HalfEdge),
        pair_b: (HalfEdge, HalfEdge),
        mode: SwitchMode,
    ) -> Result<Matching> {
        let ids = |p: (HalfEdge, HalfEdge)| -> Result<(u32, u32)> {
            let (x, y) = (Self::id_in(&self.explorer, p.0)?, Self::id_in(&self.explorer, p.1)?);
            if self.partner[x as usize] != y {
                return Err(Error::Domain(format!("pair {:?}–{:?} is not in the matching", p.0, p.1)));
            }
            Ok((x, y))
        };
        let (a, b) = ids(pair_a)?;
        let (c, d) = ids(pair_b)?;
        if a == c || a == d {
            return Err(Error::Domain("a switching needs two distinct pairs".into()));
        }
        let mut partner = self.partner.clone();
        switch_ids(&mut partner, (a, b), (c, d), mode);
        Ok(Matching {
            explorer: self.explorer.clone(),
            partner,
        })
    }
}

fn switch_ids(partner: &mut [u32], (a, b): (u32, u32), (c, d): (u32, u32), mode: SwitchMode) {
    let new = match mode {
        SwitchMode::Cross1 => [(a, c), (b, d)],
        SwitchMode::Cross2 => [(a, d), (b, c)],
    };
    for (x, y) in new {
        partner[x as usize] = y;
        partner[y as usize] = x;
    }
}

/// `|F(g) − F(g + {u,v})|`.
pub fn edge_addition_increment(spec: &StatisticSpec, g: &MultiGraph, u: u32, v: u32) -> Result<f64> {
    if u == v {
        return Err(Error::Parameter("edge addition needs two distinct vertices".into()));
    }
    let before: f64 = spec.evaluate(g)?;
    let after: f64 = spec.evaluate(&g.with_edge(u, v)?)?;
    Ok((before - after).abs())
}

/// One switching with the statistic before and after.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwitchingWitness {
    /// Edges of `G(m)`, 1-based.
    pub matching_edges: Vec<(u32, u32)>,
    /// The two replaced pairs as `[vertex, slot]`, 1-based.
    pub switched_pairs: [[[u32; 2]; 2]; 2],
    pub mode: SwitchMode,
    pub f_before: f64,
    pub f_after: f64,
}

impl SwitchingWitness {
    pub fn increment(&self) -> f64 {
        (self.f_before - self.f_after).abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwitchingReport {
    pub statistic: String,
    pub bound: f64,
    pub trials: usize,
    /// Trials skipped because a component exceeded the evaluator's cap.
    pub cap_exceeded: usize,
    pub max_increment: f64,
    pub violation_count: usize,
    /// The first few violations, in trial order.
    pub violations: Vec<SwitchingWitness>,
    pub seed: u64,
}

impl SwitchingReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

const MAX_WITNESSES: usize = 20;

fn one_based(h: HalfEdge) -> [u32; 2] {
    [h.vertex + 1, h.slot + 1]
}

fn witness(
    ex: &Explorer,
    g: &MultiGraph,
    (a, b): (u32, u32),
    (c, d): (u32, u32),
    mode: SwitchMode,
    f_before: f64,
    f_after: f64,
) -> SwitchingWitness {
    SwitchingWitness {
        matching_edges: g.edges().iter().map(|&(u, v)| (u + 1, v + 1)).collect(),
        switched_pairs: [
            [one_based(ex.half_edge(a)), one_based(ex.half_edge(b))],
            [one_based(ex.half_edge(c)), one_based(ex.half_edge(d))],
        ],
        mode,
        f_before,
        f_after,
    }
}

/// Sample `trials` uniform matchings, apply a uniformly random switching to
/// each (two distinct pairs, mode by coin flip) and check
/// `|F(m) − F(m')| ≤ bound`.
pub fn test_switching_lipschitz(
    spec: &StatisticSpec,
    ds: &DegreeSequence,
    bound: f64,
    trials: usize,
    seed: u64,
) -> Result<SwitchingReport> {
    if !(bound >= 0.0) {
        return Err(Error::Parameter(format!("bound must be non-negative, got {bound}")));
    }
    let ex = Explorer::new(ds)?;
    if ex.m() < 2 {
        return Err(Error::Domain("a switching needs at least two edges".into()));
    }
    let outcomes: Vec<Result<Option<(f64, f64, SwitchingWitness)>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = rng::derive2(seed, tag::SWITCH, t as u64);
            let st = ex.sample_state(rng::derive(s, 0));
            let mut partner = ex.partners(&st);
            let pairs: Vec<(u32, u32)> = st.pair_ids().collect();
            let mut r = rng::stream(rng::derive(s, 1));
            let pick = index::sample(&mut r, pairs.len(), 2);
            let (p, q) = (pairs[pick.index(0)], pairs[pick.index(1)]);
            let mode = if r.random::<bool>() {
                SwitchMode::Cross1
            } else {
                SwitchMode::Cross2
            };
            let g = ex.graph_of_partners(&partner);
            switch_ids(&mut partner, p, q, mode);
            let g2 = ex.graph_of_partners(&partner);
            let before = spec.evaluate::<f64>(&g);
            let after = spec.evaluate::<f64>(&g2);
            match (before, after) {
                (Ok(f0), Ok(f1)) => Ok(Some((f0, f1, witness(&ex, &g, p, q, mode, f0, f1)))),
                (Err(Error::CapExceeded { .. }), _) | (_, Err(Error::CapExceeded { .. })) => Ok(None),
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        })
        .collect();
    let mut report = SwitchingReport {
        statistic: spec.name().to_string(),
        bound,
        trials,
        cap_exceeded: 0,
        max_increment: 0.0,
        violation_count: 0,
        violations: Vec::new(),
        seed,
    };
    for o in outcomes {
        match o? {
            None => report.cap_exceeded += 1,
            Some((f0, f1, w)) => {
                let inc = (f0 - f1).abs();
                report.max_increment = report.max_increment.max(inc);
                if inc > bound {
                    report.violation_count += 1;
                    if report.violations.len() < MAX_WITNESSES {
                        report.violations.push(w);
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Two disjoint paths on `l` vertices each, as a degree sequence and the
/// matching realising them.
pub fn two_paths(l: usize) -> Result<Matching> {
    if l < 2 {
        return Err(Error::Parameter("paths need at least two vertices".into()));
    }
    let mut degrees = Vec::with_capacity(2 * l);
    for _ in 0..2 {
        degrees.push(1);
        degrees.extend(std::iter::repeat_n(2, l - 2));
        degrees.push(1);
    }
    let ds = DegreeSequence::new(degrees);
    let mut pairs = Vec::new();
    for base in [0, l as u32] {
        for i in 0..l as u32 - 1 {
            let (u, v) = (base + i, base + i + 1);
            let slot_u = if i == 0 { 0 } else { 1 };
            pairs.push((HalfEdge::new(u, slot_u), HalfEdge::new(v, 0)));
        }
    }
    Matching::from_pairs(&ds, &pairs)
}

/// Switch the first edges of two paths of length `l`,
/// `(a₁,y₁),(a₂,y₂) → (a₁,a₂),(y₁,y₂)`: the paths merge into one component
/// of `2l − 2` vertices plus an isolated edge.
pub fn two_paths_switching(spec: &StatisticSpec, l: usize) -> Result<SwitchingWitness> {
    let m = two_paths(l)?;
    let a = (HalfEdge::new(0, 0), HalfEdge::new(1, 0));
    let b = (HalfEdge::new(l as u32, 0), HalfEdge::new(l as u32 + 1, 0));
    let switched = m.apply_switching(a, b, SwitchMode::Cross1)?;
    let (g, g2) = (m.graph(), switched.graph());
    let (f0, f1) = (spec.evaluate::<f64>(&g)?, spec.evaluate::<f64>(&g2)?);
    let ex = &m.explorer;
    let id = |h| ex.id(h).expect("exists");
    Ok(witness(ex, &g, (id(a.0), id(a.1)), (id(b.0), id(b.1)), SwitchMode::Cross1, f0, f1))
}

/// Search path lengths `2..=max_len` for a switching whose increment
/// exceeds `bound`.
pub fn constructed_violation(spec: &StatisticSpec, bound: f64, max_len: usize) -> Result<Option<SwitchingWitness>> {
    for l in 3..=max_len {
        let w = two_paths_switching(spec, l)?;
        if w.increment() > bound {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Joining two disjoint paths of `l` vertices by an edge between their
/// endpoints; returns the increment.
pub fn path_join_increment(spec: &StatisticSpec, l: usize) -> Result<f64> {
    let g = two_paths(l)?.graph();
    edge_addition_increment(spec, &g, l as u32 - 1, l as u32)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeAdditionReport {
    pub statistic: String,
    pub bound: f64,
    pub trials: usize,
    pub cap_exceeded: usize,
    pub max_increment: f64,
    pub violation_count: usize,
}

/// Add a uniformly random non-loop edge `{u,v}` absent from a uniformly
/// sampled graph and check `|F(G) − F(G + e)| ≤ bound`.
pub fn test_edge_addition_lipschitz(
    spec: &StatisticSpec,
    ds: &DegreeSequence,
    bound: f64,
    trials: usize,
    seed: u64,
) -> Result<EdgeAdditionReport> {
    let ex = Explorer::new(ds)?;
    if ex.n() < 2 {
        return Err(Error::Domain("need two vertices".into()));
    }
    let outcomes: Vec<Result<Option<f64>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = rng::derive2(seed, tag::SWITCH ^ 0xadd, t as u64);
            let g = ex.sample_graph(rng::derive(s, 0));
            let mut r = rng::stream(rng::derive(s, 1));
            let present: std::collections::HashSet<(u32, u32)> = g.edges().iter().copied().collect();
            let (u, v) = loop {
                let u = r.random_range(0..ex.n() as u32);
                let v = r.random_range(0..ex.n() as u32);
                let e = (u.min(v), u.max(v));
                if u != v && !present.contains(&e) {
                    break e;
                }
            };
            match edge_addition_increment(spec, &g, u, v) {
                Ok(x) => Ok(Some(x)),
                Err(Error::CapExceeded { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut report = EdgeAdditionReport {
        statistic: spec.name().to_string(),
        bound,
        trials,
        cap_exceeded: 0,
        max_increment: 0.0,
        violation_count: 0,
    };
    for o in outcomes {
        match o? {
            None => report.cap_exceeded += 1,
            Some(x) => {
                report.max_increment = report.max_increment.max(x);
                if x > bound {
                    report.violation_count += 1;
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(v: u32, s: u32) -> HalfEdge {
        HalfEdge::new(v, s)
    }

    #[test]
    fn cross_modes() {
        let ds = DegreeSequence::new(vec![1, 1, 1, 1]);
        let m = Matching::from_pairs(&ds, &[(h(0, 0), h(1, 0)), (h(2, 0), h(3, 0))]).unwrap();
        let a = (h(0, 0), h(1, 0));
        let b = (h(2, 0), h(3, 0));
        let m1 = m.apply_switching(a, b, SwitchMode::Cross1).unwrap();
        assert!(m1.contains(h(0, 0), h(2, 0)) && m1.contains(h(1, 0), h(3, 0)));
        assert_eq!(m1.graph().sorted_edges(), vec![(0, 2), (1, 3)]);
        let m2 = m.apply_switching(a, b, SwitchMode::Cross2).unwrap();
        assert!(m2.contains(h(0, 0), h(3, 0)) && m2.contains(h(1, 0), h(2, 0)));
        let beta0 = StatisticSpec::component_count();
        assert_eq!(beta0.evaluate::<f64>(&m1.graph()).unwrap(), 2.0);
        // Switching back restores the graph.
        let back = m1.apply_switching((h(0, 0), h(2, 0)), (h(1, 0), h(3, 0)), SwitchMode::Cross1).unwrap();
        assert_eq!(back.graph().sorted_edges(), m.graph().sorted_edges());
    }

    #[test]
    fn switching_errors() {
        let ds = DegreeSequence::new(vec![1, 1, 1, 1]);
        let m = Matching::from_pairs(&ds, &[(h(0, 0), h(1, 0)), (h(2, 0), h(3, 0))]).unwrap();
        let bad = (h(0, 0), h(2, 0));
        assert!(m.apply_switching(bad, (h(2, 0), h(3, 0)), SwitchMode::Cross1).is_err());
        let a = (h(0, 0), h(1, 0));
        assert!(m.apply_switching(a, a, SwitchMode::Cross1).is_err());
        assert!(Matching::from_partners(&ds, vec![1, 0, 2, 3]).is_err());
    }

    #[test]
    fn edge_addition_examples() {
        let beta0 = StatisticSpec::component_count();
        assert_eq!(edge_addition_increment(&beta0, &MultiGraph::empty(2), 0, 1).unwrap(), 1.0);
        let g = MultiGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(edge_addition_increment(&beta0, &g, 0, 2).unwrap(), 0.0);
        assert!(edge_addition_increment(&beta0, &g, 1, 1).is_err());
    }

    #[test]
    fn two_paths_susceptibility_jump() {
        let s2 = StatisticSpec::susceptibility(2);
        let w = two_paths_switching(&s2, 12).unwrap();
        assert_eq!(w.f_before, 288.0);
        assert_eq!(w.f_after, 4.0 + 22.0 * 22.0);
        assert_eq!(w.increment(), 200.0);
        let l = 10usize;
        assert_eq!(path_join_increment(&s2, l).unwrap(), ((2 * l).pow(2) - 2 * l * l) as f64);
        let found = constructed_violation(&s2, 100.0, 64).unwrap().unwrap();
        assert!(found.increment() > 100.0);
    }

    #[test]
    fn random_switching_trials_are_reproducible() {
        let ds = DegreeSequence::new(vec![2, 2, 1, 1, 3, 1, 2, 2]);
        let spec = StatisticSpec::component_count();
        let a = test_switching_lipschitz(&spec, &ds, 4.0, 200, 5).unwrap();
        let b = test_switching_lipschitz(&spec, &ds, 4.0, 200, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.passed());
        assert!(a.max_increment <= 2.0);
    }
}
