//! Minimal iterative radix-2 FFT. Welch segments are powers of two by
//! construction, so nothing more general is needed.

use alloc::vec::Vec;

use crate::linalg::C64;
use crate::math;

pub(crate) struct Fft {
    n: usize,
    twiddles: Vec<C64>,
}

impl Fft {
    /// `n` must be a power of two.
    pub fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2)
            .map(|k| {
                let angle = -2.0 * core::f64::consts::PI * k as f64 / n as f64;
                C64::new(math::cos(angle), math::sin(angle))
            })
            .collect();
        Fft { n, twiddles }
    }

    /// In-place forward transform, no normalization.
    pub fn process(&self, buf: &mut [C64]) {
        let n = self.n;
        debug_assert_eq!(buf.len(), n);
        // Bit-reversal permutation.
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let stride = n / len;
            let half = len / 2;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let lo = buf[start + k];
                    let hi = buf[start + k + half] * w;
                    buf[start + k] = lo + hi;
                    buf[start + k + half] = lo - hi;
                }
            }
            len <<= 1;
        }
    }
}
