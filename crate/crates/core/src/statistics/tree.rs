use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Component;

/// A tree on at least two vertices, matched against components up to
/// isomorphism.
///
/// String forms: `edge`, `pathN`, `starN` (N vertices) and
/// `tree:1-2,2-3,...` with 1-based endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePattern {
    name: String,
    n: usize,
    edges: Vec<(u32, u32)>,
    degrees: Vec<u32>,
    canonical: String,
}

impl TreePattern {
    pub fn new(n: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        let name = format!(
            "tree:{}",
            edges
                .iter()
                .map(|(u, v)| format!("{}-{}", u + 1, v + 1))
                .collect::<Vec<_>>()
                .join(",")
        );
        Self::named(name, n, edges)
    }

    fn named(name: String, n: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter("tree pattern needs at least two vertices".into()));
        }
        if edges.len() != n - 1 {
            return Err(Error::Parameter(format!(
                "a tree on {n} vertices has {} edges, got {}",
                n - 1,
                edges.len()
            )));
        }
        let mut dsu = crate::graph::Dsu::new(n);
        for &(u, v) in &edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::Parameter(format!("edge ({},{}) out of range", u + 1, v + 1)));
            }
            if !dsu.union(u as usize, v as usize) {
                return Err(Error::Parameter("tree pattern contains a cycle".into()));
            }
        }
        let adj = adjacency(n, &edges);
        let mut degrees: Vec<u32> = adj.iter().map(|a| a.len() as u32).collect();
        degrees.sort_unstable();
        let canonical = canonical_form(&adj);
        Ok(Self {
            name,
            n,
            edges,
            degrees,
            canonical,
        })
    }

    pub fn edge() -> Self {
        Self::named("edge".into(), 2, vec![(0, 1)]).expect("valid")
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::named(format!("path{n}"), n, (1..n as u32).map(|i| (i - 1, i)).collect())
    }

    pub fn star(n: usize) -> Result<Self> {
        Self::named(format!("star{n}"), n, (1..n as u32).map(|i| (0, i)).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Sorted degree multiset.
    pub fn degree_multiset(&self) -> &[u32] {
        &self.degrees
    }

    pub fn matches(&self, c: &Component) -> bool {
        if c.size() != self.n || c.edges.len() != self.n - 1 {
            return false;
        }
        if c.has_self_loop() || c.has_multi_edge() {
            return false;
        }
        let mut deg = c.local_degrees();
        deg.sort_unstable();
        if deg != self.degrees {
            return false;
        }
        canonical_form(&adjacency(c.size(), &c.edges)) == self.canonical
    }
}

impl FromStr for TreePattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let count = |rest: &str| {
            rest.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad tree pattern `{s}`")))
        };
        if s == "edge" {
            Ok(Self::edge())
        } else if let Some(rest) = s.strip_prefix("path") {
            Self::path(count(rest)?)
        } else if let Some(rest) = s.strip_prefix("star") {
            Self::star(count(rest)?)
        } else if let Some(rest) = s.strip_prefix("tree:") {
            let mut edges = Vec::new();
            let mut n = 0u32;
            for tok in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let (a, b) = tok
                    .split_once('-')
                    .ok_or_else(|| Error::Parse(format!("bad tree edge `{tok}`")))?;
                let a: u32 = a.trim().parse().map_err(|_| Error::Parse(format!("bad vertex `{a}`")))?;
                let b: u32 = b.trim().parse().map_err(|_| Error::Parse(format!("bad vertex `{b}`")))?;
                if a == 0 || b == 0 {
                    return Err(Error::Parse("tree vertices are 1-based".into()));
                }
                n = n.max(a).max(b);
                edges.push((a - 1, b - 1));
            }
            Self::named(s.to_string(), n as usize, edges)
        } else {
            Err(Error::Parse(format!("unknown tree pattern `{s}`")))
        }
    }
}

impl fmt::Display for TreePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn adjacency(n: usize, edges: &[(u32, u32)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u as usize].push(v as usize);
        adj[v as usize].push(u as usize);
    }
    adj
}

/// Centre-rooted AHU encoding; equal iff the trees are isomorphic.
fn canonical_form(adj: &[Vec<usize>]) -> String {
    centres(adj)
        .into_iter()
        .map(|c| encode(adj, c, usize::MAX))
        .min()
        .unwrap_or_default()
}

fn centres(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    let mut left = n;
    while left > 2 {
        left -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in &adj[v] {
                deg[w] -= 1;
                if deg[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    layer
}

fn encode(adj: &[Vec<usize>], v: usize, parent: usize) -> String {
    let mut kids: Vec<String> = adj[v]
        .iter()
        .filter(|&&w| w != parent)
        .map(|&w| encode(adj, w, v))
        .collect();
    kids.sort_unstable();
    format!("({})", kids.concat())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MultiGraph;

    fn comp(n: usize, e: &[(u32, u32)]) -> Component {
        MultiGraph::from_edges(n, e.iter().copied())
            .unwrap()
            .components()
            .components
            .remove(0)
    }

    #[test]
    fn parsing() {
        assert_eq!("edge".parse::<TreePattern>().unwrap().vertex_count(), 2);
        let p: TreePattern = "path4".parse().unwrap();
        assert_eq!(p.degree_multiset(), &[1, 1, 2, 2]);
        let t: TreePattern = "tree:1-2,2-3,2-4".parse().unwrap();
        assert!(t.matches(&comp(4, &[(3, 0), (3, 1), (3, 2)])));
        assert_eq!(t.name(), "tree:1-2,2-3,2-4");
        assert!("path1".parse::<TreePattern>().is_err());
        assert!("tree:1-2,2-3,3-1".parse::<TreePattern>().is_err());
        assert!("tree:1-2,3-4".parse::<TreePattern>().is_err());
    }

    #[test]
    fn same_degrees_different_trees() {
        // Spider with legs 1,1,3 vs 1,2,2 share degree multisets.
        let a = TreePattern::new(6, vec![(0, 1), (0, 2), (0, 3), (3, 4), (4, 5)]).unwrap();
        let b = comp(6, &[(0, 1), (0, 2), (2, 3), (0, 4), (4, 5)]);
        assert_eq!(a.degree_multiset(), {
            let mut d = b.local_degrees();
            d.sort_unstable();
            d
        });
        assert!(!a.matches(&b));
        let relabelled = comp(6, &[(5, 4), (5, 3), (5, 2), (2, 1), (1, 0)]);
        assert!(a.matches(&relabelled));
    }

    #[test]
    fn path_is_star_on_three() {
        let path = TreePattern::path(3).unwrap();
        assert!(path.matches(&comp(3, &[(0, 1), (0, 2)])));
        assert!(!path.matches(&comp(3, &[(0, 1), (1, 2), (0, 2)])));
    }

}
