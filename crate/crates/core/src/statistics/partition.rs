use crate::error::{Error, Result};
use crate::graph::Component;

/// Spin model with positive single-site weights `h` and a symmetric positive
/// pair interaction `J`, both stored as logarithms.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinModel {
    q: usize,
    log_h: Vec<f64>,
    log_j: Vec<f64>,
}

impl SpinModel {
    pub fn new(log_h: Vec<f64>, log_j: Vec<Vec<f64>>) -> Result<Self> {
        let q = log_h.len();
        if q < 2 {
            return Err(Error::Parameter("spin model needs at least two states".into()));
        }
        if log_j.len() != q || log_j.iter().any(|row| row.len() != q) {
            return Err(Error::Parameter("interaction must be q × q".into()));
        }
        for s in 0..q {
            for t in 0..q {
                if log_j[s][t] != log_j[t][s] {
                    return Err(Error::Parameter("interaction must be symmetric".into()));
                }
            }
        }
        let flat: Vec<f64> = log_j.into_iter().flatten().collect();
        if flat.iter().chain(&log_h).any(|x| !x.is_finite()) {
            return Err(Error::Parameter("weights must be positive and finite".into()));
        }
        Ok(Self { q, log_h, log_j: flat })
    }

    /// States ±1, `J(s,t) = exp(−β s t)`, `h(s) = exp(B s)`.
    pub fn ising(beta: f64, field: f64) -> Result<Self> {
        if !(beta >= 0.0) || !field.is_finite() {
            return Err(Error::Parameter(format!("ising needs beta ≥ 0, got {beta}")));
        }
        let spins = [1.0, -1.0];
        Self::new(
            spins.iter().map(|s| field * s).collect(),
            spins
                .iter()
                .map(|s| spins.iter().map(|t| -beta * s * t).collect())
                .collect(),
        )
    }

    /// `J(s,t) = 1[s ≠ t] + exp(−β) 1[s = t]`, `h ≡ 1`.
    pub fn potts(q: usize, beta: f64) -> Result<Self> {
        if !(beta >= 0.0) {
            return Err(Error::Parameter(format!("potts needs beta ≥ 0, got {beta}")));
        }
        Self::new(
            vec![0.0; q],
            (0..q)
                .map(|s| (0..q).map(|t| if s == t { -beta } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn states(&self) -> usize {
        self.q
    }

    fn j(&self, s: usize, t: usize) -> f64 {
        self.log_j[s * self.q + t]
    }

    pub fn max_interaction(&self) -> f64 {
        self.log_j.iter().copied().fold(f64::NEG_INFINITY, f64::max).exp()
    }

    /// Adding an edge shifts `log Z` by `log E[J(σ_u, σ_v)]`, which lies
    /// between `log min J` and `log max J`.
    pub fn edge_lipschitz(&self) -> f64 {
        let max_log = self.log_j.iter().map(|x| x.abs()).fold(0.0, f64::max);
        self.max_interaction().max(max_log)
    }

    /// Largest component enumerated by default: about `2^16` configurations.
    pub fn default_cap(&self) -> usize {
        ((super::DEFAULT_SPIN_CAP_STATES2 as f64) * 2f64.ln() / (self.q as f64).ln()).floor() as usize
    }
}

/// `log Σ_σ Π_v h(σ_v) Π_e J(σ_u, σ_w)` by enumeration of `q^size`
/// configurations with a running log-sum-exp.
pub fn log_partition_value(c: &Component, model: &SpinModel) -> f64 {
    let k = c.size();
    let q = model.q;
    let mut sigma = vec![0usize; k];
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0f64;
    loop {
        let mut w: f64 = sigma.iter().map(|&s| model.log_h[s]).sum();
        for &(u, v) in &c.edges {
            w += model.j(sigma[u as usize], sigma[v as usize]);
        }
        if w > max {
            sum = sum * (max - w).exp() + 1.0;
            max = w;
        } else {
            sum += (w - max).exp();
        }
        let mut i = 0;
        loop {
            if i == k {
                return max + sum.ln();
            }
            sigma[i] += 1;
            if sigma[i] < q {
                break;
            }
            sigma[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MultiGraph;

    fn single(n: usize, e: &[(u32, u32)]) -> Component {
        MultiGraph::from_edges(n, e.iter().copied())
            .unwrap()
            .components()
            .components
            .remove(0)
    }

    #[test]
    fn triangle_potts_closed_form() {
        // Proper colourings weigh 1, two-equal colourings e^{-β}, monochrome e^{-3β}.
        let (q, beta) = (3usize, 0.7f64);
        let tri = single(3, &[(0, 1), (1, 2), (0, 2)]);
        let want = (6.0 + 18.0 * (-beta).exp() + 3.0 * (-3.0 * beta).exp()).ln();
        let got = log_partition_value(&tri, &SpinModel::potts(q, beta).unwrap());
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn large_beta_does_not_overflow() {
        let path = single(4, &[(0, 1), (1, 2), (2, 3)]);
        let z = log_partition_value(&path, &SpinModel::ising(800.0, 0.0).unwrap());
        assert!(z.is_finite());
        assert!((z - (2f64.ln() + 2400.0)).abs() < 1e-9);
    }

    #[test]
    fn field_and_self_loop() {
        let v = single(1, &[(0, 0)]);
        let m = SpinModel::ising(0.5, 0.3).unwrap();
        // Loop contributes J(s,s) = e^{-β}.
        let want = ((0.3f64 - 0.5).exp() + (-0.3f64 - 0.5).exp()).ln();
        assert!((log_partition_value(&v, &m) - want).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_constants() {
        let ising = SpinModel::ising(0.5, 0.0).unwrap();
        assert!((ising.edge_lipschitz() - 0.5f64.exp()).abs() < 1e-15);
        let potts = SpinModel::potts(3, 2.0).unwrap();
        assert_eq!(potts.max_interaction(), 1.0);
        assert_eq!(potts.edge_lipschitz(), 2.0);
        assert!(SpinModel::potts(1, 0.5).is_err());
        assert!(SpinModel::ising(-1.0, 0.0).is_err());
    }
}
