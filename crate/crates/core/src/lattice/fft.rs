use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::TorusGrid;

/// Spectral coefficients in storage order, unitary normalisation.
pub type Spectrum = Vec<Complex64>;

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Unitary 3D DFT on a [`TorusGrid`]: both directions carry `N^{-3/2}`.
///
/// Holds its own scratch buffers, so clone one per worker thread.
#[derive(Clone)]
pub struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    tmp: Vec<Complex64>,
    work: Vec<Complex64>,
    scratch: Vec<Complex64>,
    neg: Arc<Vec<u32>>,
    scale: f64,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl Fft3 {
    pub fn new(grid: &TorusGrid) -> Self {
        let n = grid.n();
        let (fwd, inv) = plans(n);
        let len = grid.len();
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        let neg = (0..len)
            .map(|idx| {
                let [i, j, k] = grid.unflat(idx);
                grid.flat((n - i) % n, (n - j) % n, (n - k) % n) as u32
            })
            .collect();
        Fft3 {
            n,
            fwd,
            inv,
            tmp: vec![Complex64::default(); len],
            work: vec![Complex64::default(); len],
            scratch: vec![Complex64::default(); scratch_len],
            neg: Arc::new(neg),
            scale: (len as f64).powf(-0.5),
        }
    }

    /// Storage index of the frequency `-k` for the frequency at `idx`.
    #[inline]
    pub fn neg_index(&self, idx: usize) -> usize {
        self.neg[idx] as usize
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        let f = self.fwd.clone();
        self.transform(data, &*f);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        let f = self.inv.clone();
        self.transform(data, &*f);
    }

    fn transform(&mut self, data: &mut [Complex64], f: &dyn Fft<f64>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "buffer does not match grid");
        // last axis is contiguous
        f.process_with_scratch(data, &mut self.scratch);
        // middle axis
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    self.tmp[(i * n + k) * n + j] = data[(i * n + j) * n + k];
                }
            }
        }
        f.process_with_scratch(&mut self.tmp, &mut self.scratch);
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    data[(i * n + j) * n + k] = self.tmp[(i * n + k) * n + j];
                }
            }
        }
        // first axis
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    self.tmp[(j * n + k) * n + i] = data[(i * n + j) * n + k];
                }
            }
        }
        f.process_with_scratch(&mut self.tmp, &mut self.scratch);
        let s = self.scale;
        for j in 0..n {
            for k in 0..n {
                for i in 0..n {
                    data[(i * n + j) * n + k] = self.tmp[(j * n + k) * n + i] * s;
                }
            }
        }
    }

    pub fn forward_real(&mut self, x: &[f64]) -> Spectrum {
        let mut buf: Spectrum = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    pub fn inverse_real(&mut self, spec: &[Complex64]) -> Vec<f64> {
        let mut buf = spec.to_vec();
        self.inverse(&mut buf);
        buf.iter().map(|c| c.re).collect()
    }

    /// Forward transform of a real field into a preallocated spectrum.
    pub fn forward_real_into(&mut self, x: &[f64], out: &mut [Complex64]) {
        for (o, &v) in out.iter_mut().zip(x) {
            *o = Complex64::new(v, 0.0);
        }
        self.forward(out);
    }

    /// Real part of the inverse transform, into a preallocated buffer.
    pub fn inverse_real_into(&mut self, spec: &[Complex64], out: &mut [f64]) {
        let mut z = std::mem::take(&mut self.work);
        z.copy_from_slice(spec);
        self.inverse(&mut z);
        for (o, c) in out.iter_mut().zip(&z) {
            *o = c.re;
        }
        self.work = z;
    }

    /// Transforms two real fields with one complex transform.
    pub fn forward_pair(&mut self, a: &[f64], b: &[f64], out_a: &mut [Complex64], out_b: &mut [Complex64]) {
        let mut z = std::mem::take(&mut self.work);
        for ((o, &x), &y) in z.iter_mut().zip(a).zip(b) {
            *o = Complex64::new(x, y);
        }
        self.forward(&mut z);
        for idx in 0..z.len() {
            let zk = z[idx];
            let zm = z[self.neg[idx] as usize].conj();
            out_a[idx] = (zk + zm) * 0.5;
            // (zk - zm) / 2i
            let d = zk - zm;
            out_b[idx] = Complex64::new(d.im * 0.5, -d.re * 0.5);
        }
        self.work = z;
    }

    /// Inverse of two Hermitian spectra with one complex transform.
    pub fn inverse_pair(&mut self, a: &[Complex64], b: &[Complex64], out_a: &mut [f64], out_b: &mut [f64]) {
        let mut z = std::mem::take(&mut self.work);
        for ((o, &x), &y) in z.iter_mut().zip(a).zip(b) {
            *o = x + Complex64::new(-y.im, y.re);
        }
        self.inverse(&mut z);
        for (idx, c) in z.iter().enumerate() {
            out_a[idx] = c.re;
            out_b[idx] = c.im;
        }
        self.work = z;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(2.0, n).unwrap()
    }

    fn pseudo(len: usize, seed: u64) -> Vec<f64> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        (0..len)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect()
    }

    #[test]
    fn delta_has_flat_spectrum() {
        let g = grid(8);
        let mut fft = Fft3::new(&g);
        let mut x = vec![0.0; g.len()];
        x[0] = 1.0;
        let s = fft.forward_real(&x);
        let mag = (g.len() as f64).powf(-0.5);
        for c in &s {
            assert!((c.re - mag).abs() < 1e-14 && c.im.abs() < 1e-14);
        }
    }

    #[test]
    fn single_mode_single_coefficient_pair() {
        let g = grid(8);
        let mut fft = Fft3::new(&g);
        let x: Vec<f64> = (0..g.len())
            .map(|i| {
                let p = g.point(i);
                (g.dxi() * 2.0 * p[1]).cos()
            })
            .collect();
        let s = fft.forward_real(&x);
        let plus = g.flat(0, 2, 0);
        let minus = g.flat(0, 6, 0);
        let amp = (g.len() as f64).sqrt() / 2.0;
        for (idx, c) in s.iter().enumerate() {
            let expect = if idx == plus || idx == minus { amp } else { 0.0 };
            assert!((c.re - expect).abs() < 1e-10 && c.im.abs() < 1e-10, "idx {idx}: {c}");
        }
    }

    #[test]
    fn roundtrip_random() {
        let g = grid(16);
        let mut fft = Fft3::new(&g);
        let x = pseudo(g.len(), 3);
        let s = fft.forward_real(&x);
        let back = fft.inverse_real(&s);
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let err: f64 = x.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err / norm < 1e-12);
    }

    #[test]
    fn pair_packing_matches_separate_transforms() {
        let g = grid(8);
        let mut fft = Fft3::new(&g);
        let a = pseudo(g.len(), 1);
        let b = pseudo(g.len(), 2);
        let sa = fft.forward_real(&a);
        let sb = fft.forward_real(&b);
        let mut pa = vec![Complex64::default(); g.len()];
        let mut pb = pa.clone();
        fft.forward_pair(&a, &b, &mut pa, &mut pb);
        for i in 0..g.len() {
            assert!((pa[i] - sa[i]).norm() < 1e-12);
            assert!((pb[i] - sb[i]).norm() < 1e-12);
        }
        let mut ra = vec![0.0; g.len()];
        let mut rb = ra.clone();
        fft.inverse_pair(&sa, &sb, &mut ra, &mut rb);
        for i in 0..g.len() {
            assert!((ra[i] - a[i]).abs() < 1e-12 && (rb[i] - b[i]).abs() < 1e-12);
        }
    }
}
