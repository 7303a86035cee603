//! n-dimensional FFT on the tensor grid, axis by axis.
//!
//! Data is stored in the same row-major layout as the lattice
//! linearization (first axis slowest). The forward transform computes the
//! unnormalized DFT sums Σ_j x_j e^(-2πi m·j/N); the inverse computes
//! Σ_m X_m e^(+2πi m·j/N). Normalization and the shift between FFT bin
//! order (0..N) and lattice order (-⌊N/2⌋..) are handled by the callers.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct FftEngine {
    grid_size: usize,
    dim: usize,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftEngine {
    pub fn new(grid_size: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid_size);
        let inverse = planner.plan_fft_inverse(grid_size);
        let len = grid_size.pow(dim as u32);
        Self {
            grid_size,
            dim,
            len,
            forward,
            inverse,
        }
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len);
        let n = self.grid_size;
        let mut line = vec![Complex64::default(); n];
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut stride = 1usize;
        for _axis in (0..self.dim).rev() {
            let span = stride * n;
            for base in (0..self.len).step_by(span) {
                for offset in 0..stride {
                    let start = base + offset;
                    if stride == 1 {
                        fft.process_with_scratch(&mut data[start..start + n], &mut scratch);
                    } else {
                        for (t, slot) in line.iter_mut().enumerate() {
                            *slot = data[start + t * stride];
                        }
                        fft.process_with_scratch(&mut line, &mut scratch);
                        for (t, &value) in line.iter().enumerate() {
                            data[start + t * stride] = value;
                        }
                    }
                }
            }
            stride *= n;
        }
    }

    /// Permutes an array from lattice order (digits k+⌊N/2⌋) to FFT bin
    /// order (digits k mod N), or back.
    pub fn permute(&self, data: &[Complex64], lattice_to_fft: bool) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.len];
        self.permute_into(data, &mut out, lattice_to_fft);
        out
    }

    pub fn permute_into(&self, data: &[Complex64], out: &mut [Complex64], lattice_to_fft: bool) {
        assert_eq!(data.len(), self.len);
        assert_eq!(out.len(), self.len);
        let n = self.grid_size;
        let shift = n / 2;
        // Per-digit map from lattice digit s (so k = s - shift) to FFT bin
        // (s - shift) mod N.
        let mut digit_map = vec![0usize; n];
        for s in 0..n {
            digit_map[s] = (s + n - shift) % n;
        }
        for (i, &value) in data.iter().enumerate() {
            let mut rem = i;
            let mut target = 0usize;
            let mut scale = 1usize;
            for _ in 0..self.dim {
                let digit = rem % n;
                rem /= n;
                target += digit_map[digit] * scale;
                scale *= n;
            }
            if lattice_to_fft {
                out[target] = value;
            } else {
                out[i] = data[target];
            }
        }
    }
}
