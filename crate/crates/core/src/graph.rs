//! Realised multigraphs and their connected components.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected multigraph on vertices `0..n`. Self-loops are stored as
/// `(v, v)` and count 2 towards the degree of `v`; parallel edges are kept.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiGraph {
    n: usize,
    edges: Vec<(u32, u32)>,
}

impl MultiGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn add_edge(&mut self, u: u32, v: u32) -> Result<()> {
        if u as usize >= self.n || v as usize >= self.n {
            return Err(Error::Domain(format!(
                "edge ({u},{v}) outside vertex range 0..{}",
                self.n
            )));
        }
        self.edges.push((u.min(v), u.max(v)));
        Ok(())
    }

    pub(crate) fn push_edge_unchecked(&mut self, u: u32, v: u32) {
        self.edges.push((u.min(v), u.max(v)));
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n];
        for &(u, v) in &self.edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        deg
    }

    pub fn self_loop_count(&self) -> usize {
        self.edges.iter().filter(|(u, v)| u == v).count()
    }

    /// Number of edges that duplicate an earlier edge.
    pub fn multi_edge_count(&self) -> usize {
        let sorted = self.sorted_edges();
        sorted.windows(2).filter(|w| w[0] == w[1]).count()
    }

    pub fn is_simple(&self) -> bool {
        self.self_loop_count() == 0 && self.multi_edge_count() == 0
    }

    /// Edge multiset in canonical order; two labelled multigraphs on the same
    /// vertex set are equal iff their keys are.
    pub fn sorted_edges(&self) -> Vec<(u32, u32)> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e
    }

    /// `self ⊔ other`, with `other`'s vertices shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &MultiGraph) -> MultiGraph {
        let shift = self.n as u32;
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(u, v)| (u + shift, v + shift)));
        MultiGraph {
            n: self.n + other.n,
            edges,
        }
    }

    /// Relabel vertex `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[u32]) -> Result<MultiGraph> {
        if perm.len() != self.n {
            return Err(Error::Parameter("permutation length differs from n".into()));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            let p = p as usize;
            if p >= self.n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::Parameter("not a permutation".into()));
            }
        }
        Ok(MultiGraph {
            n: self.n,
            edges: self
                .edges
                .iter()
                .map(|&(u, v)| {
                    let (a, b) = (perm[u as usize], perm[v as usize]);
                    (a.min(b), a.max(b))
                })
                .collect(),
        })
    }

    pub fn with_edge(&self, u: u32, v: u32) -> Result<MultiGraph> {
        let mut g = self.clone();
        g.add_edge(u, v)?;
        Ok(g)
    }

    pub fn components(&self) -> ComponentDecomposition {
        ComponentDecomposition::of(self)
    }

    /// Size of the largest component without materialising the components.
    pub fn max_component_size(&self) -> usize {
        if self.n == 0 {
            return 0;
        }
        let mut dsu = Dsu::new(self.n);
        for &(u, v) in &self.edges {
            dsu.union(u as usize, v as usize);
        }
        (0..self.n).map(|v| dsu.size_of(v)).max().unwrap_or(0)
    }

    /// Edge-list text: one `u v` pair per line, 1-based, self-loop as `v v`.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        for &(u, v) in &self.edges {
            writeln!(w, "{} {}", u + 1, v + 1)?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(reader: R, n: usize) -> Result<MultiGraph> {
        let mut g = MultiGraph::empty(n);
        for line in reader.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace().map(|t| t.parse::<u32>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) if u >= 1 && v >= 1 => g.add_edge(u - 1, v - 1)?,
                _ => return Err(Error::Parse(format!("bad edge line `{line}`"))),
            }
        }
        Ok(g)
    }
}

/// One connected component with vertices relabelled `0..size`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    /// Original vertex ids, ascending.
    pub vertices: Vec<u32>,
    /// Induced edge multiset in local indices.
    pub edges: Vec<(u32, u32)>,
}

impl Component {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    pub fn local_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.size()];
        for &(u, v) in &self.edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        deg
    }

    pub fn has_self_loop(&self) -> bool {
        self.edges.iter().any(|(u, v)| u == v)
    }

    pub fn has_multi_edge(&self) -> bool {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e.windows(2).any(|w| w[0] == w[1])
    }

    pub fn as_graph(&self) -> MultiGraph {
        MultiGraph {
            n: self.size(),
            edges: self.edges.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentDecomposition {
    /// Ordered by smallest original vertex.
    pub components: Vec<Component>,
    pub sizes: Vec<usize>,
    pub max_size: usize,
}

impl ComponentDecomposition {
    pub fn of(g: &MultiGraph) -> Self {
        let n = g.n();
        let mut dsu = Dsu::new(n);
        for &(u, v) in g.edges() {
            dsu.union(u as usize, v as usize);
        }
        let mut comp_of_root = vec![u32::MAX; n];
        let mut local = vec![0u32; n];
        let mut components: Vec<Component> = Vec::new();
        for v in 0..n {
            let r = dsu.find(v);
            if comp_of_root[r] == u32::MAX {
                comp_of_root[r] = components.len() as u32;
                components.push(Component {
                    vertices: Vec::with_capacity(dsu.size_of(r)),
                    edges: Vec::new(),
                });
            }
            let c = &mut components[comp_of_root[r] as usize];
            local[v] = c.vertices.len() as u32;
            c.vertices.push(v as u32);
        }
        for &(u, v) in g.edges() {
            let c = comp_of_root[dsu.find(u as usize)] as usize;
            components[c]
                .edges
                .push((local[u as usize], local[v as usize]));
        }
        let sizes: Vec<usize> = components.iter().map(Component::size).collect();
        let max_size = sizes.iter().copied().max().unwrap_or(0);
        Self {
            components,
            sizes,
            max_size,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Union by size with path halving.
pub(crate) struct Dsu {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    pub(crate) fn size_of(&mut self, x: usize) -> usize {
        let r = self.find(x);
        self.size[r]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_is_all_singletons() {
        let d = MultiGraph::empty(5).components();
        assert_eq!(d.len(), 5);
        assert_eq!(d.max_size, 1);
    }

    #[test]
    fn edge_plus_isolated_vertex() {
        let g = MultiGraph::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(g.components().sizes, vec![2, 1]);
        assert_eq!(g.max_component_size(), 2);
    }

    #[test]
    fn path_is_one_component() {
        // 2–1–3 in 1-based labels.
        let g = MultiGraph::from_edges(3, [(1, 0), (0, 2)]).unwrap();
        let d = g.components();
        assert_eq!(d.sizes, vec![3]);
        assert_eq!(d.components[0].edges.len(), 2);
    }

    #[test]
    fn self_loops_and_multi_edges() {
        let g = MultiGraph::from_edges(2, [(0, 0), (0, 1), (1, 0)]).unwrap();
        assert_eq!(g.degrees(), vec![4, 2]);
        assert_eq!(g.self_loop_count(), 1);
        assert_eq!(g.multi_edge_count(), 1);
        assert!(!g.is_simple());
        let c = &g.components().components[0];
        assert!(c.has_self_loop() && c.has_multi_edge());
    }

    #[test]
    fn edge_list_io() {
        let g = MultiGraph::from_edges(3, [(0, 1), (2, 2)]).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "1 2\n3 3\n");
        assert_eq!(MultiGraph::read_edge_list(&buf[..], 3).unwrap(), g);
        assert!(MultiGraph::read_edge_list(&b"0 1\n"[..], 3).is_err());
        assert!(MultiGraph::read_edge_list(&b"1 4\n"[..], 3).is_err());
    }

    #[test]
    fn relabel_and_union() {
        let g = MultiGraph::from_edges(3, [(0, 1)]).unwrap();
        let h = g.relabel(&[2, 0, 1]).unwrap();
        assert_eq!(h.edges(), &[(0, 2)]);
        assert!(g.relabel(&[0, 0, 1]).is_err());
        let u = g.disjoint_union(&h);
        assert_eq!(u.n(), 6);
        assert_eq!(u.components().sizes, vec![2, 1, 2, 1]);
    }
}
