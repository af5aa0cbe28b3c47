//! Neighborhood structure of the pattern-coupled prior.
//!
//! Coefficients live on a 1-D chain or a column-major `Q × L` lattice; the
//! linear index of grid point `(q, l)` (both zero-based here) is `l * Q + q`.
//! Boundary points simply have fewer neighbors; there is no wraparound.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, check_nonneg, check_positive, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "snake_case")]
pub enum Topology {
    Chain { n: usize },
    /// `rows` is Q (fast index), `cols` is L.
    Lattice { rows: usize, cols: usize },
}

#[derive(Clone, Debug)]
pub struct NeighborGraph {
    topology: Topology,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
}

/// Zero-based linear index of grid point `(q, l)` in a lattice with `rows` rows.
pub fn linear_index(rows: usize, q: usize, l: usize) -> usize {
    l * rows + q
}

/// Inverse of [`linear_index`].
pub fn grid_position(rows: usize, n: usize) -> (usize, usize) {
    (n % rows, n / rows)
}

/// One-based grid position of one-based linear index `n`, with a zero
/// remainder mapping to the last row.
pub fn grid_position_one_based(rows: usize, n: usize) -> (usize, usize) {
    let l = n.div_ceil(rows);
    let q = match n % rows {
        0 => rows,
        r => r,
    };
    (q, l)
}

impl NeighborGraph {
    pub fn lattice(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "lattice dimensions must be >= 1");
        let n = rows * cols;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(4 * n);
        offsets.push(0);
        for idx in 0..n {
            let (q, l) = grid_position(rows, idx);
            if l > 0 {
                neighbors.push(linear_index(rows, q, l - 1));
            }
            if l + 1 < cols {
                neighbors.push(linear_index(rows, q, l + 1));
            }
            if q > 0 {
                neighbors.push(idx - 1);
            }
            if q + 1 < rows {
                neighbors.push(idx + 1);
            }
            offsets.push(neighbors.len());
        }
        NeighborGraph {
            topology: Topology::Lattice { rows, cols },
            offsets,
            neighbors,
        }
    }

    pub fn chain(n: usize) -> Self {
        let NeighborGraph {
            offsets, neighbors, ..
        } = Self::lattice(n, 1);
        NeighborGraph {
            topology: Topology::Chain { n },
            offsets,
            neighbors,
        }
    }

    pub fn from_topology(topology: Topology) -> Self {
        match topology {
            Topology::Chain { n } => Self::chain(n),
            Topology::Lattice { rows, cols } => Self::lattice(rows, cols),
        }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// `(I + β·adjacency) v`.
    fn couple(&self, v: &[f64], beta: f64) -> Vec<f64> {
        (0..self.len())
            .map(|i| v[i] + beta * self.neighbors(i).iter().map(|&j| v[j]).sum::<f64>())
            .collect()
    }

    /// Per-coefficient prior precision `η_n = α_n + β Σ_{i∈N(n)} α_i`.
    pub fn eta_from_alpha(&self, alpha: &[f64], beta: f64) -> Result<Vec<f64>> {
        check_len("alpha", self.len(), alpha.len())?;
        check_positive("alpha", alpha)?;
        Ok(self.couple(alpha, beta))
    }

    /// Coupled second-moment aggregate `ω_n = ⟨x_n²⟩ + β Σ_{i∈N(n)} ⟨x_i²⟩`.
    pub fn omega_from_moments(&self, m2: &[f64], beta: f64) -> Result<Vec<f64>> {
        check_len("second moments", self.len(), m2.len())?;
        check_nonneg("second moments", m2)?;
        Ok(self.couple(m2, beta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sorted(mut v: Vec<usize>) -> Vec<usize> {
        v.sort_unstable();
        v
    }

    // One-based neighbor set per the lattice definition.
    fn nb1(g: &NeighborGraph, n: usize) -> Vec<usize> {
        sorted(g.neighbors(n - 1).iter().map(|i| i + 1).collect())
    }

    #[test]
    fn two_by_two_lattice() {
        let g = NeighborGraph::lattice(2, 2);
        assert_eq!(nb1(&g, 1), vec![2, 3]);
        assert_eq!(nb1(&g, 4), vec![2, 3]);
    }

    #[test]
    fn single_node_has_no_neighbors() {
        assert!(NeighborGraph::lattice(1, 1).neighbors(0).is_empty());
        assert!(NeighborGraph::chain(1).neighbors(0).is_empty());
    }

    #[test]
    fn three_by_three_center() {
        let g = NeighborGraph::lattice(3, 3);
        assert_eq!(nb1(&g, 5), vec![2, 4, 6, 8]);
    }

    #[test]
    fn chain_neighbors() {
        let g = NeighborGraph::chain(3);
        assert_eq!(nb1(&g, 2), vec![1, 3]);
        assert_eq!(nb1(&g, 1), vec![2]);
    }

    #[test]
    fn chain_equals_single_column_lattice() {
        for n in 1..20 {
            let c = NeighborGraph::chain(n);
            let l = NeighborGraph::lattice(n, 1);
            for i in 0..n {
                assert_eq!(sorted(c.neighbors(i).to_vec()), sorted(l.neighbors(i).to_vec()));
            }
        }
    }

    #[test]
    fn degree_counts() {
        let g = NeighborGraph::lattice(5, 4);
        for idx in 0..20 {
            let (q, l) = grid_position(5, idx);
            let boundary = [q == 0, q == 4, l == 0, l == 3].iter().filter(|b| **b).count();
            assert_eq!(g.neighbors(idx).len(), 4 - boundary);
        }
        let c = NeighborGraph::chain(6);
        assert_eq!(c.neighbors(0).len(), 1);
        assert_eq!(c.neighbors(3).len(), 2);
        assert_eq!(c.neighbors(5).len(), 1);
    }

    #[test]
    fn one_based_index_map_is_bijective() {
        let (rows, cols) = (4, 3);
        let mut seen = vec![false; rows * cols];
        for n in 1..=rows * cols {
            let (q, l) = grid_position_one_based(rows, n);
            assert!((1..=rows).contains(&q) && (1..=cols).contains(&l));
            assert_eq!((l - 1) * rows + q, n);
            assert!(!seen[n - 1]);
            seen[n - 1] = true;
        }
        assert_eq!(grid_position_one_based(4, 8), (4, 2));
    }

    #[test]
    fn eta_examples() {
        let c = NeighborGraph::chain(3);
        assert_eq!(c.eta_from_alpha(&[1.0, 1.0, 1.0], 1.0).unwrap(), vec![2.0, 3.0, 2.0]);
        let g = NeighborGraph::lattice(2, 2);
        assert_eq!(
            g.eta_from_alpha(&[1.0, 2.0, 3.0, 4.0], 0.5).unwrap(),
            vec![3.5, 4.5, 5.5, 6.5]
        );
        let alpha = [0.3, 2.0, 7.0, 1.5];
        assert_eq!(g.eta_from_alpha(&alpha, 0.0).unwrap(), alpha.to_vec());
        assert!(g.eta_from_alpha(&[1.0, 0.0, 1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn omega_examples() {
        let c = NeighborGraph::chain(3);
        assert_eq!(c.omega_from_moments(&[1.0, 4.0, 9.0], 1.0).unwrap(), vec![5.0, 14.0, 13.0]);
        assert_eq!(c.omega_from_moments(&[1.0, 4.0, 9.0], 0.0).unwrap(), vec![1.0, 4.0, 9.0]);
        assert_eq!(c.omega_from_moments(&[0.0; 3], 1.0).unwrap(), vec![0.0; 3]);
        assert!(c.omega_from_moments(&[0.0, -1.0, 0.0], 1.0).is_err());
    }

    fn materialized(g: &NeighborGraph, beta: f64) -> Vec<f64> {
        let n = g.len();
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
            for &j in g.neighbors(i) {
                m[i * n + j] += beta;
            }
        }
        m
    }

    proptest! {
        #[test]
        fn coupling_matches_dense_map(
            rows in 1usize..8, cols in 1usize..8, beta in 0.0f64..=1.0,
            seed in any::<u64>(),
        ) {
            let g = NeighborGraph::lattice(rows, cols);
            let n = g.len();
            let v: Vec<f64> = (0..n).map(|i| 0.1 + ((seed >> (i % 60)) & 0xff) as f64 / 32.0).collect();
            let m = materialized(&g, beta);
            let dense: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| m[i * n + j] * v[j]).sum())
                .collect();
            let eta = g.eta_from_alpha(&v, beta).unwrap();
            let omega = g.omega_from_moments(&v, beta).unwrap();
            for i in 0..n {
                prop_assert!((eta[i] - dense[i]).abs() <= 1e-12);
                prop_assert!((omega[i] - dense[i]).abs() <= 1e-12);
            }
        }

        #[test]
        fn neighbor_relation_is_symmetric(rows in 1usize..10, cols in 1usize..10) {
            let g = NeighborGraph::lattice(rows, cols);
            for i in 0..g.len() {
                for &j in g.neighbors(i) {
                    prop_assert!(g.neighbors(j).contains(&i));
                }
            }
        }

        #[test]
        fn eta_is_monotone_in_alpha(
            n in 2usize..20, idx in 0usize..20, bump in 0.0f64..5.0, beta in 0.0f64..=1.0,
        ) {
            let g = NeighborGraph::chain(n);
            let alpha: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 * 0.1).collect();
            let mut bumped = alpha.clone();
            bumped[idx % n] += bump;
            let a = g.eta_from_alpha(&alpha, beta).unwrap();
            let b = g.eta_from_alpha(&bumped, beta).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(y >= x);
            }
        }
    }
}
