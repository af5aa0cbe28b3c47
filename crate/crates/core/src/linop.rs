//! Matrix-free sensing operators.
//!
//! Every operator exposes the four products the message-passing engine needs:
//! `A x`, `Aᵀ v`, `(A∘A) φ` and `(A∘A)ᵀ τ`, where `A∘A` is the entrywise square.
//! Three families are supported:
//!
//! * dense row-major matrices (including seeded i.i.d. Gaussian ensembles),
//! * block-diagonal replication `I_L ⊗ B`, which maps `vec(X)` to `vec(B X)`,
//! * subsampled, sign-randomized Walsh-Hadamard operators `A = Φ Ψ S` applied in
//!   `O(n log n)`.
//!
//! Operators are immutable once built and can be shared between threads.

use std::io::Write;
use std::sync::OnceLock;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, check_nonneg, Error, Result};

/// Replayable description of an operator, serialized as JSON in experiment files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorDescriptor {
    Identity {
        n: usize,
    },
    Dense {
        m: usize,
        n: usize,
        /// Row-major entries, `m * n` values.
        entries: Vec<f64>,
    },
    Gaussian {
        m: usize,
        n: usize,
        seed: u64,
        normalize_columns: bool,
    },
    Kronecker {
        /// Rows of the inner block `B`.
        rows: usize,
        /// Columns of the inner block `B`.
        cols: usize,
        /// Row-major entries of `B`.
        block: Vec<f64>,
        replicas: usize,
    },
    Hadamard {
        m: usize,
        n: usize,
        seed: u64,
    },
}

impl OperatorDescriptor {
    pub fn build(&self) -> Result<SensingOperator> {
        match self {
            OperatorDescriptor::Identity { n } => Ok(SensingOperator::identity(*n)),
            OperatorDescriptor::Dense { m, n, entries } => {
                SensingOperator::from_dense(*m, *n, entries.clone())
            }
            OperatorDescriptor::Gaussian {
                m,
                n,
                seed,
                normalize_columns,
            } => Ok(make_gaussian_dense(*m, *n, *seed, *normalize_columns)),
            OperatorDescriptor::Kronecker {
                rows,
                cols,
                block,
                replicas,
            } => SensingOperator::kronecker(*rows, *cols, block.clone(), *replicas),
            OperatorDescriptor::Hadamard { m, n, seed } => make_hadamard_sensing(*m, *n, *seed),
        }
    }
}

#[derive(Debug)]
struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    squared: OnceLock<Vec<f64>>,
}

impl DenseMatrix {
    fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        DenseMatrix {
            rows,
            cols,
            data,
            squared: OnceLock::new(),
        }
    }

    fn squared(&self) -> &[f64] {
        self.squared
            .get_or_init(|| self.data.iter().map(|a| a * a).collect())
    }

    fn mul(data: &[f64], cols: usize, x: &[f64], out: &mut [f64]) {
        for (row, o) in data.chunks_exact(cols).zip(out.iter_mut()) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// `out = A x` and `out_sq = (A∘A) phi` in a single pass over `A`.
    fn mul_with_sq(
        data: &[f64],
        cols: usize,
        x: &[f64],
        phi: &[f64],
        out: &mut [f64],
        out_sq: &mut [f64],
    ) {
        for ((row, o), o_sq) in data.chunks_exact(cols).zip(out.iter_mut()).zip(out_sq.iter_mut()) {
            let (mut acc, mut acc_sq) = ([0.0; 4], [0.0; 4]);
            let (head, tail) = row.split_at(cols - cols % 4);
            for ((a, xs), ps) in head.chunks_exact(4).zip(x.chunks_exact(4)).zip(phi.chunks_exact(4)) {
                for i in 0..4 {
                    acc[i] += a[i] * xs[i];
                    acc_sq[i] += a[i] * a[i] * ps[i];
                }
            }
            let off = head.len();
            let (mut t, mut t_sq) = (0.0, 0.0);
            for (i, a) in tail.iter().enumerate() {
                t += a * x[off + i];
                t_sq += a * a * phi[off + i];
            }
            *o = acc.iter().sum::<f64>() + t;
            *o_sq = acc_sq.iter().sum::<f64>() + t_sq;
        }
    }

    /// `out = Aᵀ v` and `out_sq = (A∘A)ᵀ tau` in a single pass over `A`.
    fn mul_t_with_sq(
        data: &[f64],
        cols: usize,
        v: &[f64],
        tau: &[f64],
        out: &mut [f64],
        out_sq: &mut [f64],
    ) {
        out.iter_mut().for_each(|o| *o = 0.0);
        out_sq.iter_mut().for_each(|o| *o = 0.0);
        for ((row, &vi), &ti) in data.chunks_exact(cols).zip(v).zip(tau) {
            for ((o, o_sq), a) in out.iter_mut().zip(out_sq.iter_mut()).zip(row) {
                *o += a * vi;
                *o_sq += a * a * ti;
            }
        }
    }

    fn mul_t(data: &[f64], cols: usize, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (row, &vi) in data.chunks_exact(cols).zip(v) {
            if vi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
    }
}

#[derive(Debug)]
enum Kind {
    Dense(DenseMatrix),
    Kronecker { block: DenseMatrix, replicas: usize },
    Hadamard { rows: Vec<usize>, signs: Vec<f64> },
}

/// A real linear map `A: R^n -> R^m`.
#[derive(Debug)]
pub struct SensingOperator {
    m: usize,
    n: usize,
    kind: Kind,
    descriptor: OperatorDescriptor,
}

impl SensingOperator {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        SensingOperator {
            m: n,
            n,
            kind: Kind::Dense(DenseMatrix::new(n, n, data)),
            descriptor: OperatorDescriptor::Identity { n },
        }
    }

    /// Wraps a row-major `m × n` matrix.
    pub fn from_dense(m: usize, n: usize, entries: Vec<f64>) -> Result<Self> {
        check_len("dense entries", m * n, entries.len())?;
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument("operator dimensions must be >= 1".into()));
        }
        let descriptor = OperatorDescriptor::Dense {
            m,
            n,
            entries: entries.clone(),
        };
        Ok(SensingOperator {
            m,
            n,
            kind: Kind::Dense(DenseMatrix::new(m, n, entries)),
            descriptor,
        })
    }

    /// `I_replicas ⊗ B` with `B` a row-major `rows × cols` block. Applied to
    /// `vec(X)` for a `cols × replicas` matrix `X` it returns `vec(B X)`.
    pub fn kronecker(rows: usize, cols: usize, block: Vec<f64>, replicas: usize) -> Result<Self> {
        check_len("kronecker block", rows * cols, block.len())?;
        if rows == 0 || cols == 0 || replicas == 0 {
            return Err(Error::InvalidArgument("kronecker dimensions must be >= 1".into()));
        }
        let descriptor = OperatorDescriptor::Kronecker {
            rows,
            cols,
            block: block.clone(),
            replicas,
        };
        Ok(SensingOperator {
            m: rows * replicas,
            n: cols * replicas,
            kind: Kind::Kronecker {
                block: DenseMatrix::new(rows, cols, block),
                replicas,
            },
            descriptor,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn descriptor(&self) -> &OperatorDescriptor {
        &self.descriptor
    }

    /// Returns `A x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("apply input", self.n, x.len())?;
        let mut out = vec![0.0; self.m];
        match &self.kind {
            Kind::Dense(d) => DenseMatrix::mul(&d.data, d.cols, x, &mut out),
            Kind::Kronecker { block, replicas } => {
                for l in 0..*replicas {
                    DenseMatrix::mul(
                        &block.data,
                        block.cols,
                        &x[l * block.cols..(l + 1) * block.cols],
                        &mut out[l * block.rows..(l + 1) * block.rows],
                    );
                }
            }
            Kind::Hadamard { rows, signs } => {
                let mut buf: Vec<f64> = x.iter().zip(signs).map(|(a, s)| a * s).collect();
                fwht(&mut buf);
                let scale = 1.0 / (self.n as f64).sqrt();
                for (o, &r) in out.iter_mut().zip(rows) {
                    *o = buf[r] * scale;
                }
            }
        }
        Ok(out)
    }

    /// Returns `Aᵀ v`.
    pub fn apply_adjoint(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("apply_adjoint input", self.m, v.len())?;
        let mut out = vec![0.0; self.n];
        match &self.kind {
            Kind::Dense(d) => DenseMatrix::mul_t(&d.data, d.cols, v, &mut out),
            Kind::Kronecker { block, replicas } => {
                for l in 0..*replicas {
                    DenseMatrix::mul_t(
                        &block.data,
                        block.cols,
                        &v[l * block.rows..(l + 1) * block.rows],
                        &mut out[l * block.cols..(l + 1) * block.cols],
                    );
                }
            }
            Kind::Hadamard { rows, signs } => {
                for (&r, &vi) in rows.iter().zip(v) {
                    out[r] = vi;
                }
                fwht(&mut out);
                let scale = 1.0 / (self.n as f64).sqrt();
                for (o, s) in out.iter_mut().zip(signs) {
                    *o *= scale * s;
                }
            }
        }
        Ok(out)
    }

    /// Returns `Σ_n a_mn² φ_n` for every row `m`.
    pub fn apply_sq(&self, phi: &[f64]) -> Result<Vec<f64>> {
        check_len("apply_sq input", self.n, phi.len())?;
        check_nonneg("apply_sq input", phi)?;
        let mut out = vec![0.0; self.m];
        match &self.kind {
            Kind::Dense(d) => DenseMatrix::mul(d.squared(), d.cols, phi, &mut out),
            Kind::Kronecker { block, replicas } => {
                let sq = block.squared();
                for l in 0..*replicas {
                    DenseMatrix::mul(
                        sq,
                        block.cols,
                        &phi[l * block.cols..(l + 1) * block.cols],
                        &mut out[l * block.rows..(l + 1) * block.rows],
                    );
                }
            }
            Kind::Hadamard { .. } => {
                // Every entry has magnitude 1/sqrt(n).
                let v = phi.iter().sum::<f64>() / self.n as f64;
                out.iter_mut().for_each(|o| *o = v);
            }
        }
        Ok(out)
    }

    /// Returns `Σ_m a_mn² τ_m` for every column `n`.
    pub fn apply_sq_adjoint(&self, tau: &[f64]) -> Result<Vec<f64>> {
        check_len("apply_sq_adjoint input", self.m, tau.len())?;
        check_nonneg("apply_sq_adjoint input", tau)?;
        let mut out = vec![0.0; self.n];
        match &self.kind {
            Kind::Dense(d) => DenseMatrix::mul_t(d.squared(), d.cols, tau, &mut out),
            Kind::Kronecker { block, replicas } => {
                let sq = block.squared();
                for l in 0..*replicas {
                    DenseMatrix::mul_t(
                        sq,
                        block.cols,
                        &tau[l * block.rows..(l + 1) * block.rows],
                        &mut out[l * block.cols..(l + 1) * block.cols],
                    );
                }
            }
            Kind::Hadamard { .. } => {
                let v = tau.iter().sum::<f64>() / self.n as f64;
                out.iter_mut().for_each(|o| *o = v);
            }
        }
        Ok(out)
    }

    /// Returns `(A x, apply_sq(phi))`, sharing one pass over dense storage.
    pub fn apply_with_sq(&self, x: &[f64], phi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len("apply input", self.n, x.len())?;
        check_len("apply_sq input", self.n, phi.len())?;
        check_nonneg("apply_sq input", phi)?;
        let (mut out, mut out_sq) = (vec![0.0; self.m], vec![0.0; self.m]);
        match &self.kind {
            Kind::Dense(d) => DenseMatrix::mul_with_sq(&d.data, d.cols, x, phi, &mut out, &mut out_sq),
            Kind::Kronecker { block, replicas } => {
                let (r, c) = (block.rows, block.cols);
                for l in 0..*replicas {
                    DenseMatrix::mul_with_sq(
                        &block.data,
                        c,
                        &x[l * c..(l + 1) * c],
                        &phi[l * c..(l + 1) * c],
                        &mut out[l * r..(l + 1) * r],
                        &mut out_sq[l * r..(l + 1) * r],
                    );
                }
            }
            Kind::Hadamard { .. } => return Ok((self.apply(x)?, self.apply_sq(phi)?)),
        }
        Ok((out, out_sq))
    }

    /// Returns `(Aᵀ v, apply_sq_adjoint(tau))`, sharing one pass over dense
    /// storage.
    pub fn apply_adjoint_with_sq(&self, v: &[f64], tau: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len("apply_adjoint input", self.m, v.len())?;
        check_len("apply_sq_adjoint input", self.m, tau.len())?;
        check_nonneg("apply_sq_adjoint input", tau)?;
        let (mut out, mut out_sq) = (vec![0.0; self.n], vec![0.0; self.n]);
        match &self.kind {
            Kind::Dense(d) => {
                DenseMatrix::mul_t_with_sq(&d.data, d.cols, v, tau, &mut out, &mut out_sq)
            }
            Kind::Kronecker { block, replicas } => {
                let (r, c) = (block.rows, block.cols);
                for l in 0..*replicas {
                    DenseMatrix::mul_t_with_sq(
                        &block.data,
                        c,
                        &v[l * r..(l + 1) * r],
                        &tau[l * r..(l + 1) * r],
                        &mut out[l * c..(l + 1) * c],
                        &mut out_sq[l * c..(l + 1) * c],
                    );
                }
            }
            Kind::Hadamard { .. } => {
                return Ok((self.apply_adjoint(v)?, self.apply_sq_adjoint(tau)?))
            }
        }
        Ok((out, out_sq))
    }

    /// Materializes the operator as a row-major `m × n` matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Dense(d) => d.data.clone(),
            _ => {
                let mut data = vec![0.0; self.m * self.n];
                let mut e = vec![0.0; self.n];
                for j in 0..self.n {
                    e[j] = 1.0;
                    let col = self.apply(&e).expect("unit vector has length n");
                    e[j] = 0.0;
                    for (i, c) in col.into_iter().enumerate() {
                        data[i * self.n + j] = c;
                    }
                }
                data
            }
        }
    }

    /// Writes the materialized matrix as CSV, one matrix row per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let data = self.to_dense();
        for row in data.chunks_exact(self.n) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Seeded i.i.d. standard-normal matrix, optionally with unit-norm columns.
pub fn make_gaussian_dense(m: usize, n: usize, seed: u64, normalize_columns: bool) -> SensingOperator {
    assert!(m >= 1 && n >= 1, "operator dimensions must be >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data: Vec<f64> = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
    if normalize_columns {
        for j in 0..n {
            let norm = (0..m).map(|i| data[i * n + j].powi(2)).sum::<f64>().sqrt();
            if norm > 0.0 {
                for i in 0..m {
                    data[i * n + j] /= norm;
                }
            }
        }
    }
    SensingOperator {
        m,
        n,
        kind: Kind::Dense(DenseMatrix::new(m, n, data)),
        descriptor: OperatorDescriptor::Gaussian {
            m,
            n,
            seed,
            normalize_columns,
        },
    }
}

/// `A = Φ Ψ S`: `m` distinct rows of the orthonormal `n`-point Hadamard
/// transform applied after a random ±1 sign flip.
pub fn make_hadamard_sensing(m: usize, n: usize, seed: u64) -> Result<SensingOperator> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "hadamard sensing requires 1 <= m <= n, got m = {m}, n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = index::sample(&mut rng, n, m).into_vec();
    rows.sort_unstable();
    let signs = (0..n)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    Ok(SensingOperator {
        m,
        n,
        kind: Kind::Hadamard { rows, signs },
        descriptor: OperatorDescriptor::Hadamard { m, n, seed },
    })
}

/// In-place unnormalized Walsh-Hadamard transform (natural/Sylvester ordering).
pub fn fwht(data: &mut [f64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*a, *b);
                *a = u + v;
                *b = u - v;
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    // Sylvester construction: H[i][j] = (-1)^{popcount(i & j)}.
    fn explicit_hadamard(n: usize) -> Vec<f64> {
        let mut h = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let sign = if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                h[i * n + j] = sign / (n as f64).sqrt();
            }
        }
        h
    }

    #[test]
    fn identity_products() {
        let op = SensingOperator::identity(3);
        assert_eq!(op.apply(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(op.apply_adjoint(&[4.0, 5.0, 6.0]).unwrap(), vec![4.0, 5.0, 6.0]);
        assert_eq!(op.apply_sq(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(op.apply_sq_adjoint(&[1.0, 1.0, 1.0]).unwrap(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn two_point_hadamard_dense() {
        let s = 1.0 / 2f64.sqrt();
        let op = SensingOperator::from_dense(2, 2, vec![s, s, s, -s]).unwrap();
        let y = op.apply(&[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(y[0], 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(y[1], 0.0, epsilon = 1e-15);
        let sq = op.apply_sq(&[2.0, 2.0]).unwrap();
        assert_abs_diff_eq!(sq[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sq[1], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn row_selection_transpose() {
        let op = SensingOperator::from_dense(2, 3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(op.apply_adjoint(&[2.0, 3.0]).unwrap(), vec![2.0, 3.0, 0.0]);
    }

    #[test]
    fn zero_column_gives_zero_sq_adjoint() {
        let op = SensingOperator::from_dense(2, 3, vec![1.0, 0.0, 2.0, 3.0, 0.0, 4.0]).unwrap();
        let out = op.apply_sq_adjoint(&[1.0, 1.0]).unwrap();
        assert_eq!(out, vec![10.0, 0.0, 20.0]);
    }

    #[test]
    fn dense_adjoint_identity_random() {
        let op = make_gaussian_dense(5, 8, 11, false);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..8).map(|_| rng.sample(StandardNormal)).collect();
        let v: Vec<f64> = (0..5).map(|_| rng.sample(StandardNormal)).collect();
        let lhs = dot(&op.apply(&x).unwrap(), &v);
        let rhs = dot(&x, &op.apply_adjoint(&v).unwrap());
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn sq_adjoint_matches_brute_force_loop() {
        let op = make_gaussian_dense(6, 10, 5, false);
        let a = op.to_dense();
        let tau: Vec<f64> = (0..6).map(|i| 0.5 + i as f64).collect();
        let out = op.apply_sq_adjoint(&tau).unwrap();
        for n in 0..10 {
            let mut acc = 0.0;
            for m in 0..6 {
                acc += a[m * 10 + n] * a[m * 10 + n] * tau[m];
            }
            assert_abs_diff_eq!(out[n], acc, epsilon = 1e-12);
        }
    }

    #[test]
    fn gaussian_columns_normalized_and_deterministic() {
        let op = make_gaussian_dense(80, 200, 42, true);
        let a = op.to_dense();
        for j in 0..200 {
            let norm: f64 = (0..80).map(|i| a[i * 200 + j].powi(2)).sum::<f64>().sqrt();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        }
        let again = make_gaussian_dense(80, 200, 42, true).to_dense();
        assert!(a.iter().zip(&again).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn hadamard_full_rows_is_orthonormal() {
        let op = make_hadamard_sensing(8, 8, 9).unwrap();
        let x: Vec<f64> = (0..8).map(|i| (i as f64 * 0.7).sin()).collect();
        let back = op.apply_adjoint(&op.apply(&x).unwrap()).unwrap();
        for (a, b) in x.iter().zip(&back) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn hadamard_matches_explicit_matrix() {
        let n = 8;
        let op = make_hadamard_sensing(8, n, 1).unwrap();
        let Kind::Hadamard { signs, .. } = &op.kind else { unreachable!() };
        let h = explicit_hadamard(n);
        let a = op.to_dense();
        for i in 0..n {
            for j in 0..n {
                assert_abs_diff_eq!(a[i * n + j], h[i * n + j] * signs[j], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn hadamard_entry_magnitudes() {
        let op = make_hadamard_sensing(3, 8, 4).unwrap();
        for a in op.to_dense() {
            assert_abs_diff_eq!(a.abs(), 1.0 / 8f64.sqrt(), epsilon = 1e-15);
        }
    }

    #[test]
    fn hadamard_sq_is_constant_row_sum() {
        let op = make_hadamard_sensing(4, 8, 2).unwrap();
        let phi: Vec<f64> = (0..8).map(|i| i as f64 + 0.25).collect();
        let out = op.apply_sq(&phi).unwrap();
        let a = op.to_dense();
        for (m, o) in out.iter().enumerate() {
            let brute: f64 = (0..8).map(|n| a[m * 8 + n].powi(2) * phi[n]).sum();
            assert_abs_diff_eq!(*o, brute, epsilon = 1e-12);
            assert_abs_diff_eq!(*o, phi.iter().sum::<f64>() / 8.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn hadamard_rejects_non_power_of_two() {
        assert!(matches!(make_hadamard_sensing(3, 12, 0), Err(Error::NotPowerOfTwo(12))));
    }

    #[test]
    fn hadamard_is_seed_deterministic() {
        let a = make_hadamard_sensing(5, 16, 77).unwrap().to_dense();
        let b = make_hadamard_sensing(5, 16, 77).unwrap().to_dense();
        assert_eq!(a, b);
    }

    #[test]
    fn kronecker_matches_block_product() {
        // B is 2x3, X is 3x2.
        let block = vec![1.0, 2.0, 0.0, -1.0, 0.5, 3.0];
        let op = SensingOperator::kronecker(2, 3, block.clone(), 2).unwrap();
        let x = vec![1.0, 2.0, 3.0, -1.0, 0.0, 4.0];
        let y = op.apply(&x).unwrap();
        let expected = [5.0, 9.0, -1.0, 13.0];
        for (a, b) in y.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn dimension_and_sign_errors() {
        let op = SensingOperator::identity(3);
        assert!(matches!(op.apply(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(op.apply_adjoint(&[1.0; 4]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(
            op.apply_sq(&[1.0, -1.0, 0.0]),
            Err(Error::NegativeEntry { index: 1, .. })
        ));
        assert!(matches!(
            op.apply_sq_adjoint(&[0.0, 0.0, -2.0]),
            Err(Error::NegativeEntry { index: 2, .. })
        ));
    }

    #[test]
    fn descriptor_rebuilds_same_operator() {
        let op = make_hadamard_sensing(6, 16, 3).unwrap();
        let json = serde_json::to_string(op.descriptor()).unwrap();
        let back: OperatorDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build().unwrap().to_dense(), op.to_dense());
    }

    #[test]
    fn csv_export_has_m_rows() {
        let op = make_gaussian_dense(3, 4, 1, true);
        let mut buf = Vec::new();
        op.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 3);
        let parsed: Vec<f64> = rows
            .iter()
            .flat_map(|r| r.split(',').map(|v| v.parse::<f64>().unwrap()))
            .collect();
        assert_eq!(parsed, op.to_dense());
    }
}
