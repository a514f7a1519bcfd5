//! Zero-padded n-dimensional FFTs on a `(2N)ⁿ` periodic grid.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

/// Transforms on the `(2N)ⁿ` grid that holds a field at indices `0..N` per axis.
#[derive(Clone)]
pub struct PaddedFft {
    n: usize,
    points: usize,
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PaddedFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PaddedFft")
            .field("n", &self.n)
            .field("size", &self.size)
            .finish()
    }
}

impl PaddedFft {
    pub fn new(grid: &Grid) -> Self {
        let size = 2 * grid.points();
        let mut planner = FftPlanner::new();
        Self {
            n: grid.n(),
            points: grid.points(),
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    /// Points per axis of the padded grid.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn len(&self) -> usize {
        self.size.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed frequency index of padded position `k`, in `[-size/2, size/2)`.
    pub fn freq_index(&self, k: usize) -> isize {
        let k = k as isize;
        let m = self.size as isize;
        if k < m / 2 {
            k
        } else {
            k - m
        }
    }

    /// Per-axis padded indices of flat position `pos`.
    pub fn multi_index(&self, pos: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rem = pos;
        for d in (0..self.n).rev() {
            idx[d] = rem % self.size;
            rem /= self.size;
        }
        idx
    }

    /// Embed component `comp` of a node-major array with `comps` components.
    pub fn pad(&self, values: &[f64], comps: usize, comp: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        let nodes = self.points.pow(self.n as u32);
        for node in 0..nodes {
            out[self.padded_pos(node)] = Complex64::new(values[node * comps + comp], 0.0);
        }
        out
    }

    /// Real parts at the original nodes.
    pub fn crop(&self, data: &[Complex64]) -> Vec<f64> {
        let nodes = self.points.pow(self.n as u32);
        (0..nodes).map(|node| data[self.padded_pos(node)].re).collect()
    }

    fn padded_pos(&self, node: usize) -> usize {
        let mut rem = node;
        let mut pos = 0;
        let mut stride = 1;
        for _ in 0..self.n {
            pos += (rem % self.points) * stride;
            rem /= self.points;
            stride *= self.size;
        }
        pos
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform including the `1/sizeⁿ` normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        data.par_iter_mut().for_each(|z| *z *= scale);
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.size;
        let total = self.len();
        assert_eq!(data.len(), total);
        for axis in 0..self.n {
            // Stride of this axis; the last axis is contiguous.
            let stride = m.pow((self.n - 1 - axis) as u32);
            let lines: Vec<usize> = (0..total / m)
                .map(|l| (l / stride) * stride * m + l % stride)
                .collect();
            let results: Vec<Vec<Complex64>> = lines
                .par_iter()
                .map(|&start| {
                    let mut buf: Vec<Complex64> = (0..m).map(|k| data[start + k * stride]).collect();
                    plan.process(&mut buf);
                    buf
                })
                .collect();
            for (&start, buf) in lines.iter().zip(results) {
                for (k, z) in buf.into_iter().enumerate() {
                    data[start + k * stride] = z;
                }
            }
        }
    }
}
