//! Frequency-lattice algebra for the lifted torus problem.
//!
//! A quasiperiodic function f(x) = F(Pᵀx) couples a periodic parent F on
//! the n-torus to the physical space ℝᵈ through a d×n projection matrix P.
//! Integer torus frequencies k ∈ ℤⁿ map to physical Fourier exponents
//! λ = Pk. Discretization truncates ℤⁿ to the symmetric box
//!
//!   K_N = { k : -⌊N/2⌋ ≤ k_j ≤ N-1-⌊N/2⌋ },
//!
//! which for even N is the half-open range [-N/2, N/2). Every tensor of
//! values over K_N is flattened with a fixed row-major rule (k₁ slowest):
//!
//!   linear(k) = Σ_j (k_j + ⌊N/2⌋) · N^(n-j),
//!
//! so dense matrices and FFT-based operators index identically.

use crate::error::{QeoError, Result};

/// Rank tolerance for the real-rank check of a projection matrix.
const RANK_TOL: f64 = 1e-10;

/// An integer frequency multi-index k ∈ ℤⁿ.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn new(components: Vec<i64>) -> Self {
        Self(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    /// Componentwise negation, -k.
    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        Self(v)
    }
}

impl std::ops::Index<usize> for MultiIndex {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

/// The d×n real matrix P mapping torus frequencies to physical exponents
/// λ = Pk.
///
/// Columns are assumed ℚ-linearly independent; that property cannot be
/// certified in floating point and is carried only as a declared flag.
/// The real rank condition rank_ℝ(P) = d is checked at construction.
#[derive(Debug, Clone)]
pub struct ProjectionMatrix {
    d: usize,
    n: usize,
    entries: Vec<f64>, // row-major d×n
    q_independent_columns: bool,
}

impl ProjectionMatrix {
    /// Builds a projection matrix from row-major entries, verifying that
    /// n ≥ d ≥ 1 and that the real rank equals d (tolerance 1e-10).
    pub fn new(d: usize, n: usize, entries: Vec<f64>) -> Result<Self> {
        if d == 0 || n < d {
            return Err(QeoError::InvalidDimension(format!(
                "projection matrix requires n >= d >= 1, got d={d}, n={n}"
            )));
        }
        if entries.len() != d * n {
            return Err(QeoError::InvalidDimension(format!(
                "projection matrix needs {}x{}={} entries, got {}",
                d,
                n,
                d * n,
                entries.len()
            )));
        }
        let rank = real_rank(&entries, d, n, RANK_TOL);
        if rank != d {
            return Err(QeoError::RankDeficient { rank, d });
        }
        Ok(Self {
            d,
            n,
            entries,
            q_independent_columns: true,
        })
    }

    /// Convenience constructor for a 1×n row.
    pub fn row_vector(entries: Vec<f64>) -> Result<Self> {
        let n = entries.len();
        Self::new(1, n, entries)
    }

    pub fn physical_dim(&self) -> usize {
        self.d
    }

    pub fn torus_dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    /// Declared (never numerically verified) ℚ-independence of columns.
    pub fn q_independent_columns(&self) -> bool {
        self.q_independent_columns
    }

    /// λ = Pk. Panics on dimension mismatch; that is a caller bug.
    pub fn frequency(&self, k: &MultiIndex) -> Vec<f64> {
        assert_eq!(
            k.dim(),
            self.n,
            "multi-index dimension {} does not match torus dimension {}",
            k.dim(),
            self.n
        );
        let mut out = vec![0.0; self.d];
        self.frequency_into(k.components(), &mut out);
        out
    }

    /// λ = Pk written into a caller-provided slice of length d.
    pub fn frequency_into(&self, k: &[i64], out: &mut [f64]) {
        debug_assert_eq!(k.len(), self.n);
        debug_assert_eq!(out.len(), self.d);
        for (row, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (col, &kc) in k.iter().enumerate() {
                acc += self.entries[row * self.n + col] * kc as f64;
            }
            *slot = acc;
        }
    }

    /// Table of λ = Pk for every k in `set`, flattened as `[i*d + row]`.
    pub fn frequency_table(&self, set: &FrequencyIndexSet) -> Vec<f64> {
        assert_eq!(set.torus_dim(), self.n);
        let mut table = vec![0.0; set.len() * self.d];
        let mut k = vec![0i64; self.n];
        for i in 0..set.len() {
            set.delinearize_into(i, &mut k);
            let (chunk, _) = table[i * self.d..].split_at_mut(self.d);
            self.frequency_into(&k, chunk);
        }
        table
    }
}

/// The truncated frequency box K_N ⊂ ℤⁿ with its fixed linearization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyIndexSet {
    grid_size: usize, // N
    dim: usize,       // n
    shift: i64,       // ⌊N/2⌋
    len: usize,       // N^n
}

impl FrequencyIndexSet {
    /// Builds K_N in ℤⁿ. Rejects N = 0 or n = 0.
    pub fn new(grid_size: usize, dim: usize) -> Result<Self> {
        if grid_size == 0 || dim == 0 {
            return Err(QeoError::InvalidDimension(format!(
                "index set requires N >= 1 and n >= 1, got N={grid_size}, n={dim}"
            )));
        }
        let len = grid_size
            .checked_pow(dim as u32)
            .ok_or_else(|| QeoError::InvalidDimension(format!("N^n overflows: N={grid_size}, n={dim}")))?;
        Ok(Self {
            grid_size,
            dim,
            shift: (grid_size / 2) as i64,
            len,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn torus_dim(&self) -> usize {
        self.dim
    }

    /// Number of multi-indices, N^n.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Smallest coordinate value, -⌊N/2⌋.
    pub fn coord_min(&self) -> i64 {
        -self.shift
    }

    /// Largest coordinate value, N-1-⌊N/2⌋.
    pub fn coord_max(&self) -> i64 {
        self.grid_size as i64 - 1 - self.shift
    }

    pub fn contains(&self, k: &MultiIndex) -> bool {
        k.dim() == self.dim
            && k.components()
                .iter()
                .all(|&c| c >= self.coord_min() && c <= self.coord_max())
    }

    /// linear(k) = Σ_j (k_j + ⌊N/2⌋)·N^(n-j). Panics when k ∉ K_N.
    pub fn linearize(&self, k: &MultiIndex) -> usize {
        assert!(
            self.contains(k),
            "multi-index {:?} outside K_{}^{}",
            k,
            self.grid_size,
            self.dim
        );
        let mut idx = 0usize;
        for &c in k.components() {
            idx = idx * self.grid_size + (c + self.shift) as usize;
        }
        idx
    }

    /// Inverse of [`linearize`](Self::linearize). Panics when i ≥ N^n.
    pub fn delinearize(&self, i: usize) -> MultiIndex {
        let mut k = vec![0i64; self.dim];
        self.delinearize_into(i, &mut k);
        MultiIndex(k)
    }

    /// Allocation-free delinearize; `out` must have length n.
    pub fn delinearize_into(&self, i: usize, out: &mut [i64]) {
        assert!(i < self.len, "linear index {} out of range {}", i, self.len);
        debug_assert_eq!(out.len(), self.dim);
        let mut rem = i;
        for slot in out.iter_mut().rev() {
            *slot = (rem % self.grid_size) as i64 - self.shift;
            rem /= self.grid_size;
        }
    }

    /// Componentwise (k_V - k_U) mod N reduced into the canonical range
    /// of K_N.
    pub fn wrap_mod(&self, kv: &MultiIndex, ku: &MultiIndex) -> MultiIndex {
        assert!(self.contains(kv) && self.contains(ku));
        let n = self.grid_size as i64;
        let comps = kv
            .components()
            .iter()
            .zip(ku.components())
            .map(|(&a, &b)| (a - b + self.shift).rem_euclid(n) - self.shift)
            .collect();
        MultiIndex(comps)
    }

    /// Linearized wrap of (k_i - k_j) mod N computed straight from linear
    /// indices. This is the hot kernel of dense assembly.
    #[inline]
    pub fn wrap_diff_linear(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.len && j < self.len);
        let n = self.grid_size;
        let shift = self.shift as usize;
        let mut ri = i;
        let mut rj = j;
        let mut idx = 0usize;
        let mut scale = 1usize;
        // Build digits from the fastest axis and re-accumulate.
        for _ in 0..self.dim {
            let di = ri % n;
            let dj = rj % n;
            ri /= n;
            rj /= n;
            let wrapped = (di + n + shift - dj) % n;
            idx += wrapped * scale;
            scale *= n;
        }
        idx
    }

    /// Iterates all multi-indices in linearization order.
    pub fn iter(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.len).map(|i| self.delinearize(i))
    }
}

/// Real rank of a row-major `rows`×`cols` matrix via Gaussian elimination
/// with partial pivoting, counting pivots above `tol` relative to the
/// largest entry.
fn real_rank(entries: &[f64], rows: usize, cols: usize, tol: f64) -> usize {
    let mut a: Vec<f64> = entries.to_vec();
    let scale = a.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    let threshold = scale * tol;
    let mut rank = 0;
    let mut pivot_row = 0;
    for col in 0..cols {
        if pivot_row >= rows {
            break;
        }
        let (best_row, best_val) = (pivot_row..rows)
            .map(|r| (r, a[r * cols + col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if best_val <= threshold {
            continue;
        }
        if best_row != pivot_row {
            for c in 0..cols {
                a.swap(pivot_row * cols + c, best_row * cols + c);
            }
        }
        let pivot = a[pivot_row * cols + col];
        for r in (pivot_row + 1)..rows {
            let factor = a[r * cols + col] / pivot;
            for c in col..cols {
                a[r * cols + c] -= factor * a[pivot_row * cols + c];
            }
        }
        rank += 1;
        pivot_row += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn golden() -> f64 {
        (5.0f64.sqrt() - 1.0) / 2.0
    }

    #[test]
    fn index_set_even_n1() {
        let set = FrequencyIndexSet::new(4, 1).unwrap();
        let got: Vec<i64> = set.iter().map(|k| k[0]).collect();
        assert_eq!(got, vec![-2, -1, 0, 1]);
    }

    #[test]
    fn index_set_n2_ordering() {
        let set = FrequencyIndexSet::new(2, 2).unwrap();
        let got: Vec<Vec<i64>> = set.iter().map(|k| k.0.clone()).collect();
        assert_eq!(got, vec![vec![-1, -1], vec![-1, 0], vec![0, -1], vec![0, 0]]);
    }

    #[test]
    fn index_set_odd_symmetric() {
        let set = FrequencyIndexSet::new(3, 1).unwrap();
        let got: Vec<i64> = set.iter().map(|k| k[0]).collect();
        assert_eq!(got, vec![-1, 0, 1]);
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(FrequencyIndexSet::new(0, 1).is_err());
        assert!(FrequencyIndexSet::new(4, 0).is_err());
    }

    #[test]
    fn linearize_examples() {
        let set = FrequencyIndexSet::new(2, 2).unwrap();
        assert_eq!(set.linearize(&MultiIndex::new(vec![0, 0])), 3);
        let set = FrequencyIndexSet::new(4, 1).unwrap();
        assert_eq!(set.linearize(&MultiIndex::new(vec![-2])), 0);
    }

    #[test]
    fn linearize_roundtrip_k8_3() {
        let set = FrequencyIndexSet::new(8, 3).unwrap();
        for i in 0..set.len() {
            let k = set.delinearize(i);
            assert_eq!(set.linearize(&k), i);
        }
    }

    #[test]
    #[should_panic]
    fn linearize_out_of_range_panics() {
        let set = FrequencyIndexSet::new(4, 1).unwrap();
        set.linearize(&MultiIndex::new(vec![2]));
    }

    #[test]
    fn enumeration_strictly_increasing() {
        let set = FrequencyIndexSet::new(5, 2).unwrap();
        let mut previous = None;
        for k in set.iter() {
            let idx = set.linearize(&k);
            if let Some(p) = previous {
                assert!(idx > p);
            }
            previous = Some(idx);
        }
    }

    #[test]
    fn frequency_golden_row() {
        let p = ProjectionMatrix::row_vector(vec![2.0 * PI, 2.0 * PI * golden()]).unwrap();
        assert_eq!(p.frequency(&MultiIndex::new(vec![0, 0])), vec![0.0]);
        let f = p.frequency(&MultiIndex::new(vec![1, 0]));
        assert!((f[0] - 2.0 * PI).abs() < 1e-14);
        // Direct arithmetic oracle: 2π(1 + (√5-1)/2).
        let expect = 2.0 * PI * (1.0 + golden());
        let f = p.frequency(&MultiIndex::new(vec![1, 1]));
        assert!((f[0] - expect).abs() < 1e-12);
        assert!((expect - 10.166407).abs() < 1e-6);
    }

    #[test]
    fn frequency_is_linear() {
        let p = ProjectionMatrix::new(2, 3, vec![1.0, 0.5, -0.25, 0.0, 2.0, 1.5]).unwrap();
        let a = MultiIndex::new(vec![1, -2, 3]);
        let b = MultiIndex::new(vec![-4, 5, 7]);
        let sum = MultiIndex::new(vec![-3, 3, 10]);
        let fa = p.frequency(&a);
        let fb = p.frequency(&b);
        let fs = p.frequency(&sum);
        for i in 0..2 {
            assert!((fa[i] + fb[i] - fs[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn wrap_mod_examples() {
        let set = FrequencyIndexSet::new(4, 1).unwrap();
        let w = set.wrap_mod(&MultiIndex::new(vec![1]), &MultiIndex::new(vec![-2]));
        assert_eq!(w.components(), &[-1]);
        let w = set.wrap_mod(&MultiIndex::new(vec![0]), &MultiIndex::new(vec![0]));
        assert_eq!(w.components(), &[0]);

        // Componentwise modular arithmetic oracle for N=8, n=2:
        // (3 - (-4)) mod 8 = 7 -> -1,  (-4 - 3) mod 8 = -7 -> 1.
        let set = FrequencyIndexSet::new(8, 2).unwrap();
        let w = set.wrap_mod(&MultiIndex::new(vec![3, -4]), &MultiIndex::new(vec![-4, 3]));
        assert_eq!(w.components(), &[-1, 1]);
    }

    #[test]
    fn wrap_mod_identity_and_congruence() {
        let set = FrequencyIndexSet::new(6, 2).unwrap();
        let zero = MultiIndex::new(vec![0, 0]);
        for k in set.iter() {
            assert_eq!(set.wrap_mod(&k, &zero), k);
        }
        let n = set.grid_size() as i64;
        for kv in set.iter().step_by(7) {
            for ku in set.iter().step_by(5) {
                let w = set.wrap_mod(&kv, &ku);
                for j in 0..2 {
                    assert_eq!((w[j] + ku[j] - kv[j]).rem_euclid(n), 0);
                }
            }
        }
    }

    #[test]
    fn wrap_diff_linear_matches_wrap_mod() {
        for (n_grid, dim) in [(4usize, 2usize), (5, 2), (8, 1), (3, 3)] {
            let set = FrequencyIndexSet::new(n_grid, dim).unwrap();
            for i in 0..set.len() {
                for j in 0..set.len() {
                    let ki = set.delinearize(i);
                    let kj = set.delinearize(j);
                    let expect = set.linearize(&set.wrap_mod(&ki, &kj));
                    assert_eq!(set.wrap_diff_linear(i, j), expect);
                }
            }
        }
    }

    #[test]
    fn projection_matrix_rank_check() {
        // Rank-deficient 2x3: second row is a multiple of the first.
        let err = ProjectionMatrix::new(2, 3, vec![1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(err, Err(QeoError::RankDeficient { rank: 1, d: 2 })));
        assert!(ProjectionMatrix::new(2, 1, vec![1.0, 0.0]).is_err());
        assert!(ProjectionMatrix::new(0, 1, vec![]).is_err());
        // Full-rank example 4.2 style matrix.
        let beta = 0.5 * PI;
        let theta = 0.2 * PI;
        let p = ProjectionMatrix::new(
            2,
            3,
            vec![beta, 0.0, beta * theta.cos(), 0.0, beta, beta * theta.sin()],
        )
        .unwrap();
        assert_eq!(p.physical_dim(), 2);
    }

    #[test]
    fn frequency_table_layout() {
        let p = ProjectionMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let set = FrequencyIndexSet::new(2, 2).unwrap();
        let table = p.frequency_table(&set);
        // Index 0 is k = (-1,-1).
        assert_eq!(&table[0..2], &[-1.0, -1.0]);
        // Index 3 is k = (0,0).
        assert_eq!(&table[6..8], &[0.0, 0.0]);
    }
}
