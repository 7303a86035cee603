//! Discretization of the lifted form a_p(U,V) = (𝒜 P∇U, P∇V)_N + (U,V)_N.
//!
//! In coefficient space the scheme reads
//!
//!   Σ_{k_U} 𝒜̃_{(k_V-k_U) mod N} (Pk_V)ᵀ(Pk_U) Ũ_{k_U} + Ũ_{k_V} = γ Ũ_{k_V},
//!
//! i.e. Q = A∘W + I with A_ij = 𝒜̃ at the wrapped difference index and
//! W_ij = (Pk_i)ᵀ(Pk_j). The +I realizes the +Ũ term of the discrete
//! scheme, so reported eigenvalues are those of L+I; γ-1 recovers the
//! unshifted operator.
//!
//! Two interchangeable realizations:
//!
//! * dense assembly of Q (guarded by a mode-count limit), and
//! * a matrix-free application that evaluates the k-space convolution by
//!   going to the grid: per physical direction l, transform (Pk)_l Ũ_k,
//!   multiply by the exact samples of 𝒜, transform back, and weight by
//!   (Pk)_l again — 2d transforms of size Nⁿ per apply.
//!
//! 𝒜̃ always comes from sampling + DFT (the collocation route), so
//! aliasing enters exactly as in the scheme.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{QeoError, Result};
use crate::fft::FftEngine;
use crate::lattice::{FrequencyIndexSet, ProjectionMatrix};
use crate::qpfield::{CoefficientField, TrigField};

/// Default ceiling on Nⁿ for dense assembly.
pub const DEFAULT_DENSE_GUARD: usize = 1 << 14;

enum Kind {
    Dense { matrix: Vec<Complex64> },
    MatrixFree { coeff_grid: Vec<Complex64>, fft: FftEngine },
}

/// The discretized operator Q = A∘W + I over a fixed index set.
pub struct SpectralOperator {
    coeff: TrigField,
    projection: ProjectionMatrix,
    index_set: FrequencyIndexSet,
    coeff_spectrum: CoefficientField,
    freq_table: Vec<f64>,   // [i*d + l] = (Pk_i)_l
    freq_norm_sq: Vec<f64>, // |Pk_i|²
    kind: Kind,
}

impl SpectralOperator {
    /// Dense assembly with the default guard.
    pub fn assemble_dense(
        coeff: &TrigField,
        projection: &ProjectionMatrix,
        grid_size: usize,
    ) -> Result<Self> {
        Self::assemble_dense_with_guard(coeff, projection, grid_size, DEFAULT_DENSE_GUARD)
    }

    /// Dense assembly of Q. Refuses sizes beyond `guard` and directs the
    /// caller to the matrix-free mode.
    pub fn assemble_dense_with_guard(
        coeff: &TrigField,
        projection: &ProjectionMatrix,
        grid_size: usize,
        guard: usize,
    ) -> Result<Self> {
        let base = Self::prepare(coeff, projection, grid_size)?;
        let size = base.index_set.len();
        if size > guard {
            return Err(QeoError::DenseGuardExceeded { modes: size, guard });
        }
        let spectrum = base.coeff_spectrum.coeffs();
        let d = base.projection.physical_dim();
        let mut matrix = vec![Complex64::default(); size * size];
        for i in 0..size {
            let fi = &base.freq_table[i * d..(i + 1) * d];
            let row = &mut matrix[i * size..(i + 1) * size];
            for (j, slot) in row.iter_mut().enumerate() {
                let fj = &base.freq_table[j * d..(j + 1) * d];
                let w: f64 = fi.iter().zip(fj).map(|(a, b)| a * b).sum();
                let a = spectrum[base.index_set.wrap_diff_linear(i, j)];
                *slot = a * w;
            }
            row[i] += 1.0;
        }
        Ok(Self {
            kind: Kind::Dense { matrix },
            ..base
        })
    }

    /// Matrix-free operator applying Q through FFTs.
    pub fn matrix_free(
        coeff: &TrigField,
        projection: &ProjectionMatrix,
        grid_size: usize,
    ) -> Result<Self> {
        let base = Self::prepare(coeff, projection, grid_size)?;
        let fft = FftEngine::new(grid_size, base.index_set.torus_dim());
        let coeff_grid = coeff.sample_on_grid(grid_size).values().to_vec();
        Ok(Self {
            kind: Kind::MatrixFree { coeff_grid, fft },
            ..base
        })
    }

    fn prepare(
        coeff: &TrigField,
        projection: &ProjectionMatrix,
        grid_size: usize,
    ) -> Result<Self> {
        if coeff.dim() != projection.torus_dim() {
            return Err(QeoError::InvalidDimension(format!(
                "coefficient lives on T^{} but projection has n={}",
                coeff.dim(),
                projection.torus_dim()
            )));
        }
        let index_set = FrequencyIndexSet::new(grid_size, coeff.dim())?;
        let coeff_spectrum = coeff.interpolate(grid_size);
        let freq_table = projection.frequency_table(&index_set);
        let d = projection.physical_dim();
        let freq_norm_sq = (0..index_set.len())
            .map(|i| freq_table[i * d..(i + 1) * d].iter().map(|f| f * f).sum())
            .collect();
        Ok(Self {
            coeff: coeff.clone(),
            projection: projection.clone(),
            index_set,
            coeff_spectrum,
            freq_table,
            freq_norm_sq,
            kind: Kind::MatrixFree {
                coeff_grid: Vec::new(),
                fft: FftEngine::new(1, 1),
            },
        })
    }

    pub fn size(&self) -> usize {
        self.index_set.len()
    }

    pub fn index_set(&self) -> &FrequencyIndexSet {
        &self.index_set
    }

    pub fn projection(&self) -> &ProjectionMatrix {
        &self.projection
    }

    pub fn coeff(&self) -> &TrigField {
        &self.coeff
    }

    /// The collocation coefficients 𝒜̃ on K_N.
    pub fn coeff_spectrum(&self) -> &CoefficientField {
        &self.coeff_spectrum
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.kind, Kind::Dense { .. })
    }

    /// Row-major dense matrix, when assembled densely.
    pub fn dense_matrix(&self) -> Option<&[Complex64]> {
        match &self.kind {
            Kind::Dense { matrix } => Some(matrix),
            Kind::MatrixFree { .. } => None,
        }
    }

    /// |Pk_i|² per linearized index.
    pub fn freq_norm_sq(&self) -> &[f64] {
        &self.freq_norm_sq
    }

    /// (Pk_i)_l table, laid out `[i*d + l]`.
    pub fn freq_table(&self) -> &[f64] {
        &self.freq_table
    }

    /// Applies Q to a coefficient field.
    pub fn apply(&self, u: &CoefficientField) -> Result<CoefficientField> {
        if u.index_set() != &self.index_set {
            return Err(QeoError::IndexSetMismatch(format!(
                "operator over K_{}^{} applied to field over K_{}^{}",
                self.index_set.grid_size(),
                self.index_set.torus_dim(),
                u.index_set().grid_size(),
                u.index_set().torus_dim()
            )));
        }
        let mut out = vec![Complex64::default(); self.size()];
        self.apply_slice(u.coeffs(), &mut out);
        CoefficientField::new(self.index_set.clone(), out)
    }

    /// Allocation-light kernel behind [`apply`](Self::apply); `u` and
    /// `out` must have length Nⁿ. Reentrant: every call owns its scratch.
    pub fn apply_slice(&self, u: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(u.len(), self.size());
        assert_eq!(out.len(), self.size());
        match &self.kind {
            Kind::Dense { matrix } => {
                let size = self.size();
                for (i, slot) in out.iter_mut().enumerate() {
                    let row = &matrix[i * size..(i + 1) * size];
                    let mut acc = Complex64::default();
                    for (q, &uc) in row.iter().zip(u) {
                        acc += q * uc;
                    }
                    *slot = acc;
                }
            }
            Kind::MatrixFree { coeff_grid, fft } => {
                let size = self.size();
                let d = self.projection.physical_dim();
                let scale = 1.0 / size as f64;
                out.copy_from_slice(u);
                let mut g = vec![Complex64::default(); size];
                let mut work = vec![Complex64::default(); size];
                for l in 0..d {
                    for (i, slot) in g.iter_mut().enumerate() {
                        *slot = u[i] * self.freq_table[i * d + l];
                    }
                    fft.permute_into(&g, &mut work, true);
                    fft.inverse(&mut work);
                    for (w, &a) in work.iter_mut().zip(coeff_grid) {
                        *w *= a;
                    }
                    fft.forward(&mut work);
                    for w in work.iter_mut() {
                        *w *= scale;
                    }
                    fft.permute_into(&work, &mut g, false);
                    for (i, slot) in out.iter_mut().enumerate() {
                        *slot += g[i] * self.freq_table[i * d + l];
                    }
                }
            }
        }
    }

    /// Diagonal of Q: Re(𝒜̃₀)·|Pk_i|² + 1.
    pub fn diagonal(&self) -> Vec<f64> {
        let zero = self.index_set.linearize(&crate::lattice::MultiIndex::new(vec![
            0;
            self.index_set
                .torus_dim()
        ]));
        let a0 = self.coeff_spectrum.coeffs()[zero].re;
        self.freq_norm_sq.iter().map(|&w| a0 * w + 1.0).collect()
    }

    /// Squared Euclidean norms of the rows of Q.
    ///
    /// Dense mode sums directly. Matrix-free mode expands |Q_ij|² into
    /// d(d+1)/2 circular convolutions of |𝒜̃|² against the weight arrays
    /// (Pk)_l(Pk)_m, evaluated by FFT, plus the identity contribution
    /// 2·diag - 1 per entry.
    pub fn row_norms_squared(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Dense { matrix } => {
                let size = self.size();
                (0..size)
                    .map(|i| {
                        matrix[i * size..(i + 1) * size]
                            .iter()
                            .map(|q| q.norm_sqr())
                            .sum()
                    })
                    .collect()
            }
            Kind::MatrixFree { fft, .. } => {
                let size = self.size();
                let d = self.projection.physical_dim();
                let scale = 1.0 / size as f64;

                // Grid image of |𝒜̃|².
                let mut asq_grid = vec![Complex64::default(); size];
                {
                    let asq: Vec<Complex64> = self
                        .coeff_spectrum
                        .coeffs()
                        .iter()
                        .map(|c| Complex64::new(c.norm_sqr(), 0.0))
                        .collect();
                    let mut work = vec![Complex64::default(); size];
                    fft.permute_into(&asq, &mut work, true);
                    fft.inverse(&mut work);
                    asq_grid.copy_from_slice(&work);
                }

                let diag = self.diagonal();
                let mut norms: Vec<f64> = diag.iter().map(|&q| 2.0 * q - 1.0).collect();
                let mut v = vec![Complex64::default(); size];
                let mut work = vec![Complex64::default(); size];
                for l in 0..d {
                    for m in l..d {
                        for (i, slot) in v.iter_mut().enumerate() {
                            *slot = Complex64::new(
                                self.freq_table[i * d + l] * self.freq_table[i * d + m],
                                0.0,
                            );
                        }
                        fft.permute_into(&v, &mut work, true);
                        fft.inverse(&mut work);
                        for (w, &a) in work.iter_mut().zip(&asq_grid) {
                            *w *= a;
                        }
                        fft.forward(&mut work);
                        for w in work.iter_mut() {
                            *w *= scale;
                        }
                        fft.permute_into(&work, &mut v, false);
                        let mult = if l == m { 1.0 } else { 2.0 };
                        for (i, norm) in norms.iter_mut().enumerate() {
                            *norm += mult
                                * self.freq_table[i * d + l]
                                * self.freq_table[i * d + m]
                                * v[i].re;
                        }
                    }
                }
                norms
            }
        }
    }

    /// Relative Frobenius asymmetry ‖Q-Qᴴ‖_F/‖Q‖_F; dense mode only.
    pub fn hermitian_asymmetry(&self) -> Result<f64> {
        let matrix = self.dense_matrix().ok_or(QeoError::DenseRequired)?;
        let size = self.size();
        let mut asym = 0.0f64;
        let mut total = 0.0f64;
        for i in 0..size {
            for j in 0..size {
                let q = matrix[i * size + j];
                total += q.norm_sqr();
                asym += (q - matrix[j * size + i].conj()).norm_sqr();
            }
        }
        if total == 0.0 {
            return Ok(0.0);
        }
        Ok((asym / total).sqrt())
    }

    /// Writes the dense matrix in Matrix Market coordinate format
    /// (complex, general), 1-based indices, nonzero entries only.
    pub fn export_matrix_market(&self, mut writer: impl Write) -> Result<()> {
        let matrix = self.dense_matrix().ok_or(QeoError::DenseRequired)?;
        let size = self.size();
        let nnz = matrix.iter().filter(|c| c.norm_sqr() != 0.0).count();
        writeln!(writer, "%%MatrixMarket matrix coordinate complex general")?;
        writeln!(writer, "{size} {size} {nnz}")?;
        for i in 0..size {
            for j in 0..size {
                let q = matrix[i * size + j];
                if q.norm_sqr() != 0.0 {
                    writeln!(writer, "{} {} {:.16e} {:.16e}", i + 1, j + 1, q.re, q.im)?;
                }
            }
        }
        Ok(())
    }
}
