//! Discrete Fourier transforms of arbitrary length.
//!
//! Power-of-two lengths use an iterative radix-2 Cooley-Tukey transform.
//! Other lengths go through Bluestein's chirp-z algorithm, which rewrites the
//! DFT as a circular convolution of power-of-two length.
//!
//! All transforms are forward (`exp(-2πi jk/n)`) and unnormalized.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

pub use num_complex::Complex64;

/// Precomputed plan for a forward DFT of fixed length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    kind: PlanKind,
}

#[derive(Debug, Clone)]
enum PlanKind {
    Trivial,
    Radix2 {
        twiddles: Vec<Complex64>,
    },
    Bluestein {
        inner: Radix2Plan,
        chirp: Vec<Complex64>,
        kernel_spectrum: Vec<Complex64>,
    },
}

#[derive(Debug, Clone)]
struct Radix2Plan {
    len: usize,
    twiddles: Vec<Complex64>,
}

fn expi(angle: f64) -> Complex64 {
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

fn radix2_twiddles(len: usize) -> Vec<Complex64> {
    (0..len / 2)
        .map(|k| expi(-2.0 * PI * k as f64 / len as f64))
        .collect()
}

fn radix2_in_place(buf: &mut [Complex64], twiddles: &[Complex64], inverse: bool) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut size = 2;
    while size <= n {
        let half = size / 2;
        let stride = n / size;
        for start in (0..n).step_by(size) {
            for k in 0..half {
                let mut tw = twiddles[k * stride];
                if inverse {
                    tw = tw.conj();
                }
                let a = buf[start + k];
                let b = buf[start + k + half] * tw;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        size *= 2;
    }
}

impl Radix2Plan {
    fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two());
        Radix2Plan {
            len,
            twiddles: radix2_twiddles(len),
        }
    }
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let kind = if len == 1 {
            PlanKind::Trivial
        } else if len.is_power_of_two() {
            PlanKind::Radix2 {
                twiddles: radix2_twiddles(len),
            }
        } else {
            let m = (2 * len - 1).next_power_of_two();
            let inner = Radix2Plan::new(m);
            // chirp w_k = exp(-iπ k²/n); k² reduced mod 2n keeps the angle small
            let chirp: Vec<Complex64> = (0..len)
                .map(|k| {
                    let k2 = (k as u128 * k as u128) % (2 * len as u128);
                    expi(-PI * k2 as f64 / len as f64)
                })
                .collect();
            let mut kernel = vec![Complex64::new(0.0, 0.0); m];
            kernel[0] = chirp[0].conj();
            for k in 1..len {
                kernel[k] = chirp[k].conj();
                kernel[m - k] = chirp[k].conj();
            }
            radix2_in_place(&mut kernel, &inner.twiddles, false);
            PlanKind::Bluestein {
                inner,
                chirp,
                kernel_spectrum: kernel,
            }
        };
        FftPlan { len, kind }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Forward transform of `buf` in place. `buf.len()` must equal the plan length.
    pub fn process(&self, buf: &mut [Complex64]) {
        assert_eq!(buf.len(), self.len, "buffer length does not match plan");
        match &self.kind {
            PlanKind::Trivial => {}
            PlanKind::Radix2 { twiddles } => radix2_in_place(buf, twiddles, false),
            PlanKind::Bluestein {
                inner,
                chirp,
                kernel_spectrum,
            } => {
                let m = inner.len;
                let mut work = vec![Complex64::new(0.0, 0.0); m];
                for (k, (w, x)) in work.iter_mut().zip(buf.iter()).enumerate() {
                    *w = *x * chirp[k];
                }
                radix2_in_place(&mut work, &inner.twiddles, false);
                for (w, h) in work.iter_mut().zip(kernel_spectrum) {
                    *w *= *h;
                }
                radix2_in_place(&mut work, &inner.twiddles, true);
                let scale = 1.0 / m as f64;
                for (k, out) in buf.iter_mut().enumerate() {
                    *out = work[k] * scale * chirp[k];
                }
            }
        }
    }
}

/// Forward 2D DFT of a row-major `height × width` buffer, in place.
///
/// Output stays row-major: entry `(u, v)` at `u * width + v` holds vertical
/// frequency `u` and horizontal frequency `v`.
pub fn fft_2d(width: usize, height: usize, buf: &mut [Complex64]) {
    assert_eq!(buf.len(), width * height);
    let row_plan = FftPlan::new(width);
    for row in buf.chunks_exact_mut(width) {
        row_plan.process(row);
    }
    let col_plan = FftPlan::new(height);
    let mut column = vec![Complex64::new(0.0, 0.0); height];
    for c in 0..width {
        for r in 0..height {
            column[r] = buf[r * width + c];
        }
        col_plan.process(&mut column);
        for r in 0..height {
            buf[r * width + c] = column[r];
        }
    }
}
