//! Periodic parent fields and their quasiperiodic traces.
//!
//! A parent field F(y) = Σ_k F̂_k e^(i k·y) on the n-torus is stored as a
//! finite coefficient map (all paper examples are trig polynomials, so the
//! map is exact). Its quasiperiodic trace is f(x) = F(Pᵀx), and by the
//! mean-value identity the Fourier–Bohr coefficients of f equal the F̂_k.
//!
//! Discrete machinery lives on the tensor grid y_j = 2πj/N:
//!
//! * [`TrigField::sample_on_grid`] evaluates the series exactly,
//! * [`GridSamples::forward_dft`] applies the collocation transform with
//!   the 1/Nⁿ normalization (frequencies fold modulo N — aliasing),
//! * [`CoefficientField::inverse_dft`] is its unnormalized inverse,
//! * [`TrigField::truncate`] keeps modes inside K_N, while
//!   [`TrigField::interpolate`] goes through the grid and therefore picks
//!   up aliasing exactly as the collocation scheme does.
//!
//! Coefficient-space Sobolev norms carry the directional weight
//! (1+|Pk|²)^s, matching the lifted H¹_P inner product.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{QeoError, Result};
use crate::fft::FftEngine;
use crate::lattice::{FrequencyIndexSet, MultiIndex, ProjectionMatrix};

/// A finite trigonometric polynomial on the n-torus, kept in canonical
/// form: no stored zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigField {
    dim: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl TrigField {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, value: Complex64) -> Self {
        let mut field = Self::new(dim);
        field.add_term(MultiIndex::new(vec![0; dim]), value);
        field
    }

    /// Adds `coeff` to the term at `k`, dropping the entry when it cancels
    /// to zero.
    pub fn add_term(&mut self, k: MultiIndex, coeff: Complex64) {
        assert_eq!(k.dim(), self.dim, "term dimension mismatch");
        let entry = self.terms.entry(k.clone()).or_insert(Complex64::default());
        *entry += coeff;
        if entry.norm() == 0.0 {
            self.terms.remove(&k);
        }
    }

    /// Adds amplitude·cos(k·y) as the conjugate pair (amp/2)e^(±ik·y).
    pub fn add_cosine(&mut self, k: MultiIndex, amplitude: f64) {
        let half = Complex64::new(amplitude / 2.0, 0.0);
        self.add_term(k.neg(), half);
        self.add_term(k, half);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// F̂_0, which equals the Besicovitch mean of the quasiperiodic trace.
    pub fn mean_value(&self) -> Complex64 {
        self.terms
            .get(&MultiIndex::new(vec![0; self.dim]))
            .copied()
            .unwrap_or_default()
    }

    /// True when F̂_{-k} = conj(F̂_k) for every stored term, i.e. the field
    /// is real-valued.
    pub fn is_real_valued(&self) -> bool {
        self.terms.iter().all(|(k, &c)| {
            self.terms
                .get(&k.neg())
                .map(|&cm| (cm - c.conj()).norm() == 0.0)
                .unwrap_or(false)
        })
    }

    /// Largest |k_j| over all stored terms.
    pub fn max_mode(&self) -> i64 {
        self.terms
            .keys()
            .flat_map(|k| k.components().iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Evaluates the series at a torus point y.
    pub fn evaluate_torus(&self, y: &[f64]) -> Complex64 {
        assert_eq!(y.len(), self.dim);
        let mut acc = Complex64::default();
        for (k, &c) in &self.terms {
            let phase: f64 = k
                .components()
                .iter()
                .zip(y)
                .map(|(&kc, &yc)| kc as f64 * yc)
                .sum();
            acc += c * Complex64::from_polar(1.0, phase);
        }
        acc
    }

    /// Evaluates the quasiperiodic trace f(x) = Σ_k F̂_k e^(i (Pk)·x).
    pub fn qp_evaluate(&self, p: &ProjectionMatrix, x: &[f64]) -> Complex64 {
        assert_eq!(p.torus_dim(), self.dim, "projection dimension mismatch");
        assert_eq!(x.len(), p.physical_dim(), "point dimension mismatch");
        let mut freq = vec![0.0; p.physical_dim()];
        let mut acc = Complex64::default();
        for (k, &c) in &self.terms {
            p.frequency_into(k.components(), &mut freq);
            let phase: f64 = freq.iter().zip(x).map(|(&f, &xc)| f * xc).sum();
            acc += c * Complex64::from_polar(1.0, phase);
        }
        acc
    }

    /// Exact samples on the tensor grid y_j = 2πj/N.
    pub fn sample_on_grid(&self, grid_size: usize) -> GridSamples {
        let n = grid_size;
        let dim = self.dim;
        let total = n.pow(dim as u32);
        let mut values = vec![Complex64::default(); total];
        // Per-term, per-axis phase tables e^(i k_l 2π j / N).
        for (k, &c) in &self.terms {
            let tables: Vec<Vec<Complex64>> = k
                .components()
                .iter()
                .map(|&kc| {
                    (0..n)
                        .map(|j| Complex64::from_polar(1.0, kc as f64 * TAU * j as f64 / n as f64))
                        .collect()
                })
                .collect();
            for (i, slot) in values.iter_mut().enumerate() {
                let mut rem = i;
                let mut factor = c;
                for table in tables.iter().rev() {
                    factor *= table[rem % n];
                    rem /= n;
                }
                *slot += factor;
            }
        }
        GridSamples {
            grid_size: n,
            dim,
            values,
        }
    }

    /// Keeps exactly the modes inside K_N (the truncated projection).
    pub fn truncate(&self, grid_size: usize) -> CoefficientField {
        let set = FrequencyIndexSet::new(grid_size, self.dim).expect("valid index set");
        let mut coeffs = vec![Complex64::default(); set.len()];
        for (k, &c) in &self.terms {
            if set.contains(k) {
                coeffs[set.linearize(k)] = c;
            }
        }
        CoefficientField {
            index_set: set,
            coeffs,
        }
    }

    /// Pseudospectral coefficients: sample on the grid, then apply the
    /// forward transform. Coincides with [`truncate`](Self::truncate) when
    /// every mode fits in K_N; otherwise differs by aliasing.
    pub fn interpolate(&self, grid_size: usize) -> CoefficientField {
        self.sample_on_grid(grid_size).forward_dft()
    }

    /// ‖F‖ with weight (1+|Pk|²)^s over the stored terms.
    pub fn sobolev_norm(&self, p: &ProjectionMatrix, s: f64) -> f64 {
        weighted_norm(
            self.terms.iter().map(|(k, &c)| (k.components(), c)),
            p,
            s,
            false,
        )
    }

    /// Seminorm variant with weight |Pk|^(2s).
    pub fn sobolev_seminorm(&self, p: &ProjectionMatrix, s: f64) -> f64 {
        weighted_norm(
            self.terms.iter().map(|(k, &c)| (k.components(), c)),
            p,
            s,
            true,
        )
    }

    /// Trapezoidal box average of the trace over [-T, T]^d with
    /// `samples` nodes per dimension; converges to the mean value as
    /// T → ∞ by ergodicity.
    pub fn line_mean_estimate(
        &self,
        p: &ProjectionMatrix,
        half_width: f64,
        samples: usize,
    ) -> Complex64 {
        assert!(half_width > 0.0, "T must be positive");
        assert!(samples >= 2, "need at least two samples per dimension");
        let d = p.physical_dim();
        let h = 2.0 * half_width / (samples - 1) as f64;
        let volume = (2.0 * half_width).powi(d as i32);
        let total = samples.pow(d as u32);
        let mut acc = Complex64::default();
        let mut x = vec![0.0; d];
        for i in 0..total {
            let mut rem = i;
            let mut weight = 1.0;
            for slot in x.iter_mut().rev() {
                let j = rem % samples;
                rem /= samples;
                *slot = -half_width + j as f64 * h;
                weight *= if j == 0 || j == samples - 1 { 0.5 * h } else { h };
            }
            acc += self.qp_evaluate(p, &x) * weight;
        }
        acc / volume
    }
}

/// Complex samples over the tensor grid, stored with the sample
/// multi-index j flattened row-major (j₁ slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    grid_size: usize,
    dim: usize,
    values: Vec<Complex64>,
}

impl GridSamples {
    pub fn new(grid_size: usize, dim: usize, values: Vec<Complex64>) -> Result<Self> {
        let expect = grid_size.pow(dim as u32);
        if values.len() != expect {
            return Err(QeoError::InvalidDimension(format!(
                "grid samples need {expect} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            grid_size,
            dim,
            values,
        })
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Grid point y_j for a linearized sample index.
    pub fn grid_point(&self, mut linear: usize) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for slot in y.iter_mut().rev() {
            *slot = TAU * (linear % self.grid_size) as f64 / self.grid_size as f64;
            linear /= self.grid_size;
        }
        y
    }

    /// Collocation transform Ũ_k = (1/Nⁿ) Σ_j u(y_j) e^(-i k·y_j).
    pub fn forward_dft(&self) -> CoefficientField {
        let engine = FftEngine::new(self.grid_size, self.dim);
        let mut data = self.values.clone();
        engine.forward(&mut data);
        let scale = 1.0 / self.values.len() as f64;
        for value in data.iter_mut() {
            *value *= scale;
        }
        let coeffs = engine.permute(&data, false);
        CoefficientField {
            index_set: FrequencyIndexSet::new(self.grid_size, self.dim).expect("valid index set"),
            coeffs,
        }
    }
}

/// Coefficients Ũ_k over K_N in linearization order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    index_set: FrequencyIndexSet,
    coeffs: Vec<Complex64>,
}

impl CoefficientField {
    pub fn new(index_set: FrequencyIndexSet, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != index_set.len() {
            return Err(QeoError::InvalidDimension(format!(
                "coefficient field needs {} entries, got {}",
                index_set.len(),
                coeffs.len()
            )));
        }
        Ok(Self { index_set, coeffs })
    }

    pub fn zeros(index_set: FrequencyIndexSet) -> Self {
        let coeffs = vec![Complex64::default(); index_set.len()];
        Self { index_set, coeffs }
    }

    pub fn index_set(&self) -> &FrequencyIndexSet {
        &self.index_set
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at k, zero outside K_N.
    pub fn at(&self, k: &MultiIndex) -> Complex64 {
        if self.index_set.contains(k) {
            self.coeffs[self.index_set.linearize(k)]
        } else {
            Complex64::default()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, Complex64)> + '_ {
        (0..self.coeffs.len()).map(|i| (self.index_set.delinearize(i), self.coeffs[i]))
    }

    /// Unnormalized inverse transform back to grid samples.
    pub fn inverse_dft(&self) -> GridSamples {
        let engine = FftEngine::new(self.index_set.grid_size(), self.index_set.torus_dim());
        let mut data = engine.permute(&self.coeffs, true);
        engine.inverse(&mut data);
        GridSamples {
            grid_size: self.index_set.grid_size(),
            dim: self.index_set.torus_dim(),
            values: data,
        }
    }

    /// Parseval norm (Σ|Ũ_k|²)^½.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Coefficient inner product Σ_k u_k conj(v_k).
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.index_set, other.index_set, "index set mismatch");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn sobolev_norm(&self, p: &ProjectionMatrix, s: f64) -> f64 {
        let mut k = vec![0i64; self.index_set.torus_dim()];
        let mut acc = 0.0;
        let mut freq = vec![0.0; p.physical_dim()];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            self.index_set.delinearize_into(i, &mut k);
            p.frequency_into(&k, &mut freq);
            let w = 1.0 + freq.iter().map(|f| f * f).sum::<f64>();
            acc += w.powf(s) * c.norm_sqr();
        }
        acc.sqrt()
    }

    pub fn sobolev_seminorm(&self, p: &ProjectionMatrix, s: f64) -> f64 {
        let mut k = vec![0i64; self.index_set.torus_dim()];
        let mut acc = 0.0;
        let mut freq = vec![0.0; p.physical_dim()];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            self.index_set.delinearize_into(i, &mut k);
            p.frequency_into(&k, &mut freq);
            let w = freq.iter().map(|f| f * f).sum::<f64>();
            acc += w.powf(s) * c.norm_sqr();
        }
        acc.sqrt()
    }

    /// Keeps the modes that fall inside K_M for a (usually smaller) M.
    pub fn truncate(&self, grid_size: usize) -> CoefficientField {
        let target =
            FrequencyIndexSet::new(grid_size, self.index_set.torus_dim()).expect("valid index set");
        let mut out = CoefficientField::zeros(target);
        let mut k = vec![0i64; self.index_set.torus_dim()];
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            self.index_set.delinearize_into(i, &mut k);
            let idx = MultiIndex::new(k.clone());
            if out.index_set.contains(&idx) {
                let j = out.index_set.linearize(&idx);
                out.coeffs[j] = c;
            }
        }
        out
    }

    /// Evaluates the trace Σ_k Ũ_k e^(i(Pk)·x) at a physical point.
    pub fn qp_evaluate(&self, p: &ProjectionMatrix, x: &[f64]) -> Complex64 {
        assert_eq!(p.torus_dim(), self.index_set.torus_dim());
        let mut k = vec![0i64; self.index_set.torus_dim()];
        let mut freq = vec![0.0; p.physical_dim()];
        let mut acc = Complex64::default();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            self.index_set.delinearize_into(i, &mut k);
            p.frequency_into(&k, &mut freq);
            let phase: f64 = freq.iter().zip(x).map(|(&f, &xc)| f * xc).sum();
            acc += c * Complex64::from_polar(1.0, phase);
        }
        acc
    }
}

fn weighted_norm<'a>(
    terms: impl Iterator<Item = (&'a [i64], Complex64)>,
    p: &ProjectionMatrix,
    s: f64,
    seminorm: bool,
) -> f64 {
    let mut freq = vec![0.0; p.physical_dim()];
    let mut acc = 0.0;
    for (k, c) in terms {
        p.frequency_into(k, &mut freq);
        let fsq: f64 = freq.iter().map(|f| f * f).sum();
        let w = if seminorm { fsq } else { 1.0 + fsq };
        acc += w.powf(s) * c.norm_sqr();
    }
    acc.sqrt()
}
