//! Edge-exploration construction of the configuration model.
//!
//! Half-edges are partitioned into active (A), connected (C) and unexplored
//! (U) sets. Each step takes the lexicographically smallest active
//! half-edge and pairs it with a uniformly chosen half-edge of `A ∪ U`
//! (itself excluded). Pairing into U activates the rest of the partner's
//! vertex. When A runs dry while U is not empty, the smallest-index vertex
//! whose half-edges are all unexplored seeds the next component, and the
//! step is recorded as an empty-active step.
//!
//! Half-edges get global ids in lexicographic `(vertex, slot)` order, so
//! "smallest" is a plain integer minimum.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::degree::DegreeSequence;
use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::rng;

/// Slot `slot` of vertex `vertex`, both 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfEdge {
    pub vertex: u32,
    pub slot: u32,
}

impl HalfEdge {
    pub fn new(vertex: u32, slot: u32) -> Self {
        Self { vertex, slot }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    /// 1-based step index `t`.
    pub step: usize,
    /// The smallest active half-edge at step `t`.
    pub first: HalfEdge,
    pub second: HalfEdge,
    /// The active set was empty at the start of this step and was re-seeded.
    pub active_was_empty: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationTrace {
    pub pairings: Vec<Pairing>,
    /// Steps `t ≥ 2` that started with an empty active set, ascending.
    pub empty_active_steps: Vec<usize>,
    pub seed: u64,
}

impl ExplorationTrace {
    pub fn len(&self) -> usize {
        self.pairings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairings.is_empty()
    }

    /// CSV with columns `step,v1,slot1,v2,slot2,active_empty_flag`; vertices
    /// and slots are 1-based.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "step,v1,slot1,v2,slot2,active_empty_flag")?;
        for p in &self.pairings {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                p.step,
                p.first.vertex + 1,
                p.first.slot + 1,
                p.second.vertex + 1,
                p.second.slot + 1,
                u8::from(p.active_was_empty)
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Unexplored,
    Active,
    Connected,
}

const NOT_IN_POOL: u32 = u32::MAX;

/// Mutable A/C/U state of one exploration. Cheap to clone, which is how
/// completions of a common prefix are drawn.
#[derive(Clone, Debug)]
pub struct ExplorationState {
    status: Vec<Status>,
    /// `A ∪ U` as a swap-removal array.
    pool: Vec<u32>,
    pos: Vec<u32>,
    /// Min-heap over active ids; stale entries are skipped lazily.
    active: BinaryHeap<Reverse<u32>>,
    active_count: usize,
    /// Next vertex to consider when re-seeding.
    cursor: u32,
    pairs: Vec<(u32, u32, bool)>,
    empty_steps: Vec<usize>,
    /// The pending step re-seeded an empty active set.
    reseeded: bool,
}

impl ExplorationState {
    /// Pairings made so far, `k`.
    pub fn steps_done(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_complete(&self) -> bool {
        self.pool.is_empty()
    }

    pub fn active_is_empty(&self) -> bool {
        self.active_count == 0
    }

    /// Half-edge ids paired so far, in step order.
    pub fn pair_ids(&self) -> impl DoubleEndedIterator<Item = (u32, u32)> + ExactSizeIterator + '_ {
        self.pairs.iter().map(|&(a, b, _)| (a, b))
    }

    pub fn empty_active_steps(&self) -> &[usize] {
        &self.empty_steps
    }
}

/// Immutable half-edge layout of a degree sequence.
#[derive(Clone, Debug)]
pub struct Explorer {
    degrees: Vec<u32>,
    offsets: Vec<u32>,
    owner: Vec<u32>,
}

impl Explorer {
    pub fn new(ds: &DegreeSequence) -> Result<Self> {
        ds.require_even()?;
        if ds.two_m() >= u64::from(u32::MAX) {
            return Err(Error::Domain("too many half-edges".into()));
        }
        let degrees = ds.degrees().to_vec();
        let mut offsets = Vec::with_capacity(degrees.len() + 1);
        let mut owner = Vec::with_capacity(ds.two_m() as usize);
        let mut acc = 0u32;
        for (v, &d) in degrees.iter().enumerate() {
            offsets.push(acc);
            acc += d;
            owner.extend(std::iter::repeat_n(v as u32, d as usize));
        }
        offsets.push(acc);
        Ok(Self {
            degrees,
            offsets,
            owner,
        })
    }

    pub fn n(&self) -> usize {
        self.degrees.len()
    }

    pub fn half_edge_count(&self) -> usize {
        self.owner.len()
    }

    pub fn m(&self) -> usize {
        self.owner.len() / 2
    }

    pub fn id(&self, h: HalfEdge) -> Option<u32> {
        let v = h.vertex as usize;
        (v < self.degrees.len() && h.slot < self.degrees[v]).then(|| self.offsets[v] + h.slot)
    }

    pub fn half_edge(&self, id: u32) -> HalfEdge {
        let v = self.owner[id as usize];
        HalfEdge::new(v, id - self.offsets[v as usize])
    }

    pub fn owner(&self, id: u32) -> u32 {
        self.owner[id as usize]
    }

    fn half_edges_of(&self, v: u32) -> std::ops::Range<u32> {
        self.offsets[v as usize]..self.offsets[v as usize + 1]
    }

    /// `A_1 = ∅` before the first seeding, `U_1 = ℋ_n`.
    pub fn initial_state(&self) -> ExplorationState {
        let h = self.half_edge_count();
        ExplorationState {
            status: vec![Status::Unexplored; h],
            pool: (0..h as u32).collect(),
            pos: (0..h as u32).collect(),
            active: BinaryHeap::new(),
            active_count: 0,
            cursor: 0,
            pairs: Vec::with_capacity(self.m()),
            empty_steps: Vec::new(),
            reseeded: false,
        }
    }

    fn remove_from_pool(st: &mut ExplorationState, id: u32) {
        let p = st.pos[id as usize];
        debug_assert_ne!(p, NOT_IN_POOL);
        let last = *st.pool.last().expect("pool non-empty");
        st.pool.swap_remove(p as usize);
        if last != id {
            st.pos[last as usize] = p;
        }
        st.pos[id as usize] = NOT_IN_POOL;
    }

    fn activate_vertex(&self, st: &mut ExplorationState, v: u32, except: Option<u32>) {
        for h in self.half_edges_of(v) {
            // No vertex has half-edges in both A and U.
            debug_assert_eq!(st.status[h as usize], Status::Unexplored);
            if Some(h) != except {
                st.status[h as usize] = Status::Active;
                st.active.push(Reverse(h));
                st.active_count += 1;
            }
        }
    }

    /// The half-edge paired at the next step, re-seeding A if it is empty.
    /// Returns `None` once every half-edge is paired.
    pub fn next_first(&self, st: &mut ExplorationState) -> Option<u32> {
        if st.pool.is_empty() {
            return None;
        }
        if st.active_count == 0 {
            while self.degrees[st.cursor as usize] == 0
                || st.status[self.offsets[st.cursor as usize] as usize] != Status::Unexplored
            {
                st.cursor += 1;
            }
            let v = st.cursor;
            self.activate_vertex(st, v, None);
            if !st.pairs.is_empty() {
                st.empty_steps.push(st.pairs.len() + 1);
                st.reseeded = true;
            }
        }
        while let Some(&Reverse(h)) = st.active.peek() {
            if st.status[h as usize] == Status::Active {
                return Some(h);
            }
            st.active.pop();
        }
        unreachable!("active count positive but heap exhausted")
    }

    /// Candidates for the partner of `first`: `(A ∪ U) ∖ {first}`.
    pub fn candidates(&self, st: &ExplorationState, first: u32) -> Vec<u32> {
        st.pool.iter().copied().filter(|&h| h != first).collect()
    }

    /// Pair `first` (which must be the current smallest active half-edge)
    /// with `partner`.
    pub fn pair(&self, st: &mut ExplorationState, first: u32, partner: u32) -> Result<()> {
        let expected = self.next_first(st);
        if expected != Some(first) {
            return Err(Error::Consistency(format!(
                "step {}: expected smallest active half-edge {:?}, got {:?}",
                st.pairs.len() + 1,
                expected.map(|h| self.half_edge(h)),
                self.half_edge(first)
            )));
        }
        if partner == first
            || partner as usize >= self.half_edge_count()
            || st.pos[partner as usize] == NOT_IN_POOL
        {
            return Err(Error::Consistency(format!(
                "step {}: partner id {partner} is not an available half-edge",
                st.pairs.len() + 1
            )));
        }
        self.commit(st, first, partner);
        Ok(())
    }

    fn commit(&self, st: &mut ExplorationState, first: u32, partner: u32) {
        let reseeded = std::mem::take(&mut st.reseeded);
        Self::remove_from_pool(st, first);
        st.status[first as usize] = Status::Connected;
        st.active_count -= 1;
        Self::remove_from_pool(st, partner);
        match st.status[partner as usize] {
            Status::Active => {
                st.status[partner as usize] = Status::Connected;
                st.active_count -= 1;
            }
            Status::Unexplored => {
                let v = self.owner(partner);
                self.activate_vertex(st, v, Some(partner));
                st.status[partner as usize] = Status::Connected;
            }
            Status::Connected => unreachable!("connected half-edges are not in the pool"),
        }
        st.pairs.push((first, partner, reseeded));
    }

    /// One exploration step; `None` when finished.
    pub fn step<R: Rng + ?Sized>(&self, st: &mut ExplorationState, rng: &mut R) -> Option<(u32, u32)> {
        let first = self.next_first(st)?;
        // `first` sits somewhere in the pool; draw among the other len-1 slots.
        let len = st.pool.len();
        let fp = st.pos[first as usize] as usize;
        let mut i = rng.random_range(0..len - 1);
        if i >= fp {
            i += 1;
        }
        let partner = st.pool[i];
        self.commit(st, first, partner);
        Some((first, partner))
    }

    pub fn run<R: Rng + ?Sized>(&self, st: &mut ExplorationState, rng: &mut R) {
        while self.step(st, rng).is_some() {}
    }

    /// Rebuild the state reached after `pairings`, validating every step.
    pub fn replay(&self, pairings: &[Pairing]) -> Result<ExplorationState> {
        let mut st = self.initial_state();
        for (i, p) in pairings.iter().enumerate() {
            if p.step != i + 1 {
                return Err(Error::Consistency(format!(
                    "pairing {} carries step {}",
                    i + 1,
                    p.step
                )));
            }
            let first = self
                .id(p.first)
                .ok_or_else(|| Error::Consistency(format!("unknown half-edge {:?}", p.first)))?;
            let second = self
                .id(p.second)
                .ok_or_else(|| Error::Consistency(format!("unknown half-edge {:?}", p.second)))?;
            self.pair(&mut st, first, second)?;
        }
        Ok(st)
    }

    pub fn trace(&self, st: &ExplorationState, seed: u64) -> ExplorationTrace {
        ExplorationTrace {
            pairings: st
                .pairs
                .iter()
                .enumerate()
                .map(|(i, &(a, b, e))| Pairing {
                    step: i + 1,
                    first: self.half_edge(a),
                    second: self.half_edge(b),
                    active_was_empty: e,
                })
                .collect(),
            empty_active_steps: st.empty_steps.clone(),
            seed,
        }
    }

    /// Multigraph of the pairings made so far.
    pub fn graph_of(&self, st: &ExplorationState) -> MultiGraph {
        let mut g = MultiGraph::empty(self.n());
        for &(a, b, _) in &st.pairs {
            g.push_edge_unchecked(self.owner(a), self.owner(b));
        }
        g
    }

    /// Multigraph of a perfect matching given as a partner array.
    pub fn graph_of_partners(&self, partner: &[u32]) -> MultiGraph {
        let mut g = MultiGraph::empty(self.n());
        for (h, &p) in partner.iter().enumerate() {
            if (h as u32) < p {
                g.push_edge_unchecked(self.owner(h as u32), self.owner(p));
            }
        }
        g
    }

    /// Partner array of a complete state.
    pub fn partners(&self, st: &ExplorationState) -> Vec<u32> {
        let mut partner = vec![u32::MAX; self.half_edge_count()];
        for &(a, b, _) in &st.pairs {
            partner[a as usize] = b;
            partner[b as usize] = a;
        }
        partner
    }

    /// Explore from scratch and return the final state.
    pub fn sample_state(&self, seed: u64) -> ExplorationState {
        let mut st = self.initial_state();
        self.run(&mut st, &mut rng::stream(seed));
        st
    }

    pub fn sample_graph(&self, seed: u64) -> MultiGraph {
        self.graph_of(&self.sample_state(seed))
    }
}

/// Run the full exploration of `ds` with the stream for `seed`.
pub fn explore(ds: &DegreeSequence, seed: u64) -> Result<ExplorationTrace> {
    let ex = Explorer::new(ds)?;
    let st = ex.sample_state(seed);
    Ok(ex.trace(&st, seed))
}

/// Continue a valid prefix with fresh randomness from `seed`.
pub fn resume(ds: &DegreeSequence, prefix: &[Pairing], seed: u64) -> Result<ExplorationTrace> {
    let ex = Explorer::new(ds)?;
    if prefix.len() > ex.m() {
        return Err(Error::Consistency("prefix longer than m_n".into()));
    }
    let mut st = ex.replay(prefix)?;
    ex.run(&mut st, &mut rng::stream(seed));
    Ok(ex.trace(&st, seed))
}

/// One multigraph edge per pairing; fails unless the trace is a perfect
/// matching of the half-edges of `ds`.
pub fn build_graph(trace: &ExplorationTrace, ds: &DegreeSequence) -> Result<MultiGraph> {
    let ex = Explorer::new(ds)?;
    if trace.pairings.len() != ex.m() {
        return Err(Error::Consistency(format!(
            "trace has {} pairings, expected {}",
            trace.pairings.len(),
            ex.m()
        )));
    }
    let mut seen = vec![false; ex.half_edge_count()];
    let mut g = MultiGraph::empty(ds.n());
    for (i, p) in trace.pairings.iter().enumerate() {
        if p.step != i + 1 {
            return Err(Error::Consistency(format!("gap in steps at pairing {}", i + 1)));
        }
        for h in [p.first, p.second] {
            let id = ex
                .id(h)
                .ok_or_else(|| Error::Consistency(format!("unknown half-edge {h:?}")))?;
            if std::mem::replace(&mut seen[id as usize], true) {
                return Err(Error::Consistency(format!("half-edge {h:?} paired twice")));
            }
        }
        g.push_edge_unchecked(p.first.vertex, p.second.vertex);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(v: &[u32]) -> DegreeSequence {
        DegreeSequence::new(v.to_vec())
    }

    #[test]
    fn single_edge() {
        let t = explore(&ds(&[1, 1]), 7).unwrap();
        assert_eq!(t.pairings.len(), 1);
        assert_eq!(t.pairings[0].first, HalfEdge::new(0, 0));
        assert_eq!(t.pairings[0].second, HalfEdge::new(1, 0));
        let g = build_graph(&t, &ds(&[1, 1])).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn odd_sum_rejected() {
        assert!(matches!(explore(&ds(&[1, 1, 1]), 0), Err(Error::Domain(_))));
    }

    #[test]
    fn self_loop_and_double_edge_conventions() {
        let d = ds(&[2, 1, 1]);
        let t = ExplorationTrace {
            pairings: vec![
                Pairing {
                    step: 1,
                    first: HalfEdge::new(0, 0),
                    second: HalfEdge::new(0, 1),
                    active_was_empty: false,
                },
                Pairing {
                    step: 2,
                    first: HalfEdge::new(1, 0),
                    second: HalfEdge::new(2, 0),
                    active_was_empty: true,
                },
            ],
            empty_active_steps: vec![2],
            seed: 0,
        };
        let g = build_graph(&t, &d).unwrap();
        assert_eq!(g.degrees(), vec![2, 1, 1]);
        assert_eq!(g.self_loop_count(), 1);

        let d = ds(&[2, 2]);
        let t = resume(
            &d,
            &[Pairing {
                step: 1,
                first: HalfEdge::new(0, 0),
                second: HalfEdge::new(1, 0),
                active_was_empty: false,
            }],
            3,
        )
        .unwrap();
        let g = build_graph(&t, &d).unwrap();
        // (1,2)-(2,1) then (1,2)-(2,2) or the self-loop pair; replay the
        // double-edge variant explicitly.
        assert_eq!(g.degrees(), vec![2, 2]);
        let double = ExplorationTrace {
            pairings: vec![
                Pairing { step: 1, first: HalfEdge::new(0, 0), second: HalfEdge::new(1, 0), active_was_empty: false },
                Pairing { step: 2, first: HalfEdge::new(0, 1), second: HalfEdge::new(1, 1), active_was_empty: false },
            ],
            empty_active_steps: vec![],
            seed: 0,
        };
        let g = build_graph(&double, &d).unwrap();
        assert_eq!(g.sorted_edges(), vec![(0, 1), (0, 1)]);
    }

    #[test]
    fn incomplete_trace_is_inconsistent() {
        let d = ds(&[2, 1, 1]);
        let mut t = explore(&d, 1).unwrap();
        t.pairings.pop();
        assert!(matches!(build_graph(&t, &d), Err(Error::Consistency(_))));
    }

    #[test]
    fn resume_full_prefix_is_identity() {
        let d = ds(&[3, 1, 2, 2, 1, 1]);
        let t = explore(&d, 5).unwrap();
        let r = resume(&d, &t.pairings, 99).unwrap();
        assert_eq!(r.pairings, t.pairings);
        assert_eq!(r.empty_active_steps, t.empty_active_steps);
    }

    #[test]
    fn resume_forced_completion() {
        let d = ds(&[2, 1, 1]);
        let prefix = [Pairing {
            step: 1,
            first: HalfEdge::new(0, 0),
            second: HalfEdge::new(0, 1),
            active_was_empty: false,
        }];
        for seed in 0..10 {
            let t = resume(&d, &prefix, seed).unwrap();
            let g = build_graph(&t, &d).unwrap();
            assert_eq!(g.sorted_edges(), vec![(0, 0), (1, 2)]);
            assert_eq!(t.empty_active_steps, vec![2]);
            assert!(t.pairings[1].active_was_empty);
        }
    }

    #[test]
    fn invalid_prefix_rejected() {
        let d = ds(&[2, 1, 1]);
        // Step 1 must start from (1,1).
        let bad = [Pairing {
            step: 1,
            first: HalfEdge::new(1, 0),
            second: HalfEdge::new(2, 0),
            active_was_empty: false,
        }];
        assert!(matches!(resume(&d, &bad, 0), Err(Error::Consistency(_))));
        let bad = [Pairing {
            step: 1,
            first: HalfEdge::new(0, 0),
            second: HalfEdge::new(0, 0),
            active_was_empty: false,
        }];
        assert!(resume(&d, &bad, 0).is_err());
    }

    #[test]
    fn zero_degree_vertices_are_skipped() {
        let d = ds(&[0, 1, 0, 1, 0]);
        let t = explore(&d, 0).unwrap();
        assert_eq!(t.pairings[0].first, HalfEdge::new(1, 0));
        assert!(t.empty_active_steps.is_empty());
        let g = build_graph(&t, &d).unwrap();
        assert_eq!(g.components().len(), 4);
    }

    #[test]
    fn trace_csv() {
        let t = explore(&ds(&[1, 1]), 7).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,v1,slot1,v2,slot2,active_empty_flag\n1,1,1,2,1,0\n"
        );
    }
}
