//! Discrete Fourier transforms of arbitrary length.
//!
//! Powers of two use an iterative radix-2 transform. Every other length
//! (in particular prime moduli) goes through Bluestein's chirp-z reduction
//! to a power-of-two cyclic convolution.
//!
//! Sign convention: `forward` computes `X[k] = Σ_n x[n] e^{-2πi nk/N}`
//! without normalisation; `inverse` uses the opposite sign, also unnormalised.

use std::f64::consts::PI;

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Trivial,
    Radix2(Radix2),
    Bluestein {
        inner: Radix2,
        /// `e^{-πi n²/N}` for `0 <= n < N`.
        chirp: Vec<Complex64>,
        /// Transform of the conjugate chirp laid out for cyclic convolution.
        kernel: Vec<Complex64>,
    },
}

#[derive(Debug, Clone)]
struct Radix2 {
    len: usize,
    /// `e^{-2πi j/len}` for `0 <= j < len/2`.
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    fn new(len: usize) -> Self {
        debug_assert!(len.is_power_of_two());
        let twiddles = (0..len / 2)
            .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / len as f64))
            .collect();
        Radix2 { len, twiddles }
    }

    fn process(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.len;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for j in 0..half {
                    let mut tw = self.twiddles[j * stride];
                    if inverse {
                        tw = tw.conj();
                    }
                    let u = data[start + j];
                    let v = data[start + j + half] * tw;
                    data[start + j] = u + v;
                    data[start + j + half] = u - v;
                }
            }
            half *= 2;
        }
    }
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        let kind = if len <= 1 {
            Kind::Trivial
        } else if len.is_power_of_two() {
            Kind::Radix2(Radix2::new(len))
        } else {
            let m = (2 * len - 1).next_power_of_two();
            let inner = Radix2::new(m);
            let two_n = 2 * len as u128;
            let chirp: Vec<Complex64> = (0..len)
                .map(|n| {
                    // reduce n² mod 2N first so the angle stays small
                    let q = (n as u128 * n as u128) % two_n;
                    Complex64::from_polar(1.0, -PI * q as f64 / len as f64)
                })
                .collect();
            let mut kernel = vec![Complex64::new(0.0, 0.0); m];
            kernel[0] = chirp[0].conj();
            for n in 1..len {
                kernel[n] = chirp[n].conj();
                kernel[m - n] = chirp[n].conj();
            }
            inner.process(&mut kernel, false);
            Kind::Bluestein {
                inner,
                chirp,
                kernel,
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

    pub fn forward(&self, data: &mut [Complex64]) {
        self.process(data, false);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.process(data, true);
    }

    fn process(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len, "buffer length does not match plan");
        match &self.kind {
            Kind::Trivial => {}
            Kind::Radix2(r) => r.process(data, inverse),
            Kind::Bluestein {
                inner,
                chirp,
                kernel,
            } => {
                let m = inner.len;
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                for n in 0..self.len {
                    let w = if inverse { chirp[n].conj() } else { chirp[n] };
                    buf[n] = data[n] * w;
                }
                inner.process(&mut buf, false);
                for (b, k) in buf.iter_mut().zip(kernel) {
                    // The kernel is symmetric under n -> m - n, so the transform of
                    // the conjugate chirp is the conjugate of its transform.
                    *b *= if inverse { k.conj() } else { *k };
                }
                inner.process(&mut buf, true);
                let scale = 1.0 / m as f64;
                for k in 0..self.len {
                    let w = if inverse { chirp[k].conj() } else { chirp[k] };
                    data[k] = buf[k] * w * scale;
                }
            }
        }
    }
}

/// Normalised transform `f̂(ξ) = (1/N) Σ_n f(n) e(−nξ/N)`.
pub fn normalized_dft(plan: &FftPlan, values: &[Complex64]) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    plan.forward(&mut buf);
    let scale = 1.0 / values.len() as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|j| {
                        let q = (j * k) % n;
                        x[j] * Complex64::from_polar(1.0, sign * 2.0 * PI * q as f64 / n as f64)
                    })
                    .sum()
            })
            .collect()
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 3, 5, 7, 8, 12, 17, 31, 64, 97, 100, 127, 256, 257] {
            let x = random_vec(&mut rng, n);
            let plan = FftPlan::new(n);
            let mut fwd = x.clone();
            plan.forward(&mut fwd);
            let mut inv = x.clone();
            plan.inverse(&mut inv);
            let ef = naive_dft(&x, -1.0);
            let ei = naive_dft(&x, 1.0);
            for k in 0..n {
                assert!((fwd[k] - ef[k]).norm() < 1e-11 * n as f64, "n={n} k={k}");
                assert!((inv[k] - ei[k]).norm() < 1e-11 * n as f64, "n={n} k={k} inverse");
            }
        }
    }

    #[test]
    fn round_trip_prime_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1009usize, 4093, 4099] {
            let x = random_vec(&mut rng, n);
            let plan = FftPlan::new(n);
            let mut y = x.clone();
            plan.forward(&mut y);
            plan.inverse(&mut y);
            let err = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b / n as f64).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "n={n} err={err}");
        }
    }

    #[test]
    fn delta_transforms_to_constant() {
        let plan = FftPlan::new(13);
        let mut x = vec![Complex64::new(0.0, 0.0); 13];
        x[0] = Complex64::new(1.0, 0.0);
        plan.forward(&mut x);
        assert!(x.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-14));
    }
}
