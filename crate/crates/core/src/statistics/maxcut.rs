use crate::graph::Component;

/// Maximum number of edges crossing a bipartition, by Gray-code
/// enumeration over `2^(size-1)` cuts. Parallel edges count separately;
/// self-loops never cross.
pub fn max_cut_value(c: &Component) -> u64 {
    let k = c.size();
    if k < 2 {
        return 0;
    }
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &(u, v) in &c.edges {
        if u != v {
            nbrs[u as usize].push(v as usize);
            nbrs[v as usize].push(u as usize);
        }
    }
    // Vertex 0 stays on side 0; the Gray code flips vertices 1..k.
    let mut side = vec![false; k];
    let mut cut: i64 = 0;
    let mut best: i64 = 0;
    for i in 1u64..(1u64 << (k - 1)) {
        let v = i.trailing_zeros() as usize + 1;
        let gain: i64 = nbrs[v]
            .iter()
            .map(|&w| if side[w] == side[v] { 1 } else { -1 })
            .sum();
        side[v] = !side[v];
        cut += gain;
        best = best.max(cut);
    }
    best as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MultiGraph;

    fn brute(g: &MultiGraph) -> u64 {
        let n = g.n();
        (0u32..1 << n)
            .map(|mask| {
                g.edges()
                    .iter()
                    .filter(|&&(u, v)| (mask >> u) & 1 != (mask >> v) & 1)
                    .count() as u64
            })
            .max()
            .unwrap()
    }

    #[test]
    fn agrees_with_subset_enumeration() {
        let graphs = [
            vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)],
            vec![(0, 1), (0, 1), (1, 2), (2, 2)],
            vec![(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (3, 4), (2, 3)],
        ];
        for e in graphs {
            let g = MultiGraph::from_edges(5, e).unwrap();
            let comps = g.components();
            let total: u64 = comps.components.iter().map(max_cut_value).sum();
            assert_eq!(total, brute(&g));
        }
    }

    #[test]
    fn loops_never_cut() {
        let g = MultiGraph::from_edges(1, [(0, 0)]).unwrap();
        assert_eq!(max_cut_value(&g.components().components[0]), 0);
        let g = MultiGraph::from_edges(2, [(0, 1), (0, 1), (1, 1)]).unwrap();
        assert_eq!(max_cut_value(&g.components().components[0]), 2);
    }
}
