//! FFT utilities for decaying functions sampled on uniform real grids.
//!
//! Samples are zero-padded to at least twice their length before being
//! treated as periodic, so that wrap-around coupling is negligible for data
//! that decay to numerical zero at both ends.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Smallest power of two that is at least `2n`.
pub fn padded_len(n: usize) -> usize {
    (2 * n).next_power_of_two()
}

/// Angular wavenumbers of a length-`len` DFT on spacing `h`; the Nyquist mode
/// (even `len`) is assigned wavenumber zero so that odd-order derivatives stay
/// real.
fn wavenumbers(len: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (len as f64 * h);
    (0..len)
        .map(|j| {
            if 2 * j < len {
                j as f64 * dk
            } else if 2 * j == len {
                0.0
            } else {
                (j as f64 - len as f64) * dk
            }
        })
        .collect()
}

fn forward(data: &mut [C64]) {
    FftPlanner::new().plan_fft_forward(data.len()).process(data);
}

fn inverse(data: &mut [C64]) {
    let n = data.len() as f64;
    FftPlanner::new().plan_fft_inverse(data.len()).process(data);
    for v in data.iter_mut() {
        *v /= n;
    }
}

/// Applies the Fourier multiplier `symbol(ξ)` to real samples on spacing `h`.
pub fn apply_multiplier(samples: &[f64], h: f64, symbol: impl Fn(f64) -> C64) -> Vec<f64> {
    let len = padded_len(samples.len());
    let mut buf: Vec<C64> = samples.iter().map(|&v| C64::new(v, 0.0)).collect();
    buf.resize(len, C64::new(0.0, 0.0));
    forward(&mut buf);
    for (b, xi) in buf.iter_mut().zip(wavenumbers(len, h)) {
        *b *= symbol(xi);
    }
    inverse(&mut buf);
    buf.truncate(samples.len());
    buf.into_iter().map(|v| v.re).collect()
}

/// Spectral first derivative of real samples on spacing `h`.
pub fn derivative(samples: &[f64], h: f64) -> Vec<f64> {
    apply_multiplier(samples, h, |xi| C64::new(0.0, xi))
}

/// Solves `u − u_xx = m` on the line for decaying `m`: returns `(u, u_x)`.
///
/// This is convolution with the Green kernel `e^{−|x|}/2`, evaluated as the
/// multiplier `1/(1+ξ²)` on the zero-padded grid. The periodisation error of
/// the kernel is of order `e^{−L}` for padded period `L`.
pub fn helmholtz(m: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let u = apply_multiplier(m, h, |xi| C64::new(1.0 / (1.0 + xi * xi), 0.0));
    let ux = apply_multiplier(m, h, |xi| C64::new(0.0, xi / (1.0 + xi * xi)));
    (u, ux)
}

/// Band-limited interpolation of decaying samples onto a grid `factor` times
/// finer covering the same span. Returns values and first derivatives at the
/// `(n − 1)·factor + 1` fine nodes.
pub fn refine(samples: &[f64], h: f64, factor: usize) -> (Vec<f64>, Vec<f64>) {
    let n = samples.len();
    let len = padded_len(n);
    let fine_len = len * factor;
    let mut buf: Vec<C64> = samples.iter().map(|&v| C64::new(v, 0.0)).collect();
    buf.resize(len, C64::new(0.0, 0.0));
    forward(&mut buf);
    // Spread the coarse spectrum into the fine one; the Nyquist coefficient is
    // split evenly between ±ξ_N to keep the interpolant real.
    let mut fine = vec![C64::new(0.0, 0.0); fine_len];
    let half = len / 2;
    fine[..half].copy_from_slice(&buf[..half]);
    for j in half + 1..len {
        fine[fine_len - (len - j)] = buf[j];
    }
    if factor > 1 {
        fine[half] = buf[half] * 0.5;
        fine[fine_len - half] = buf[half] * 0.5;
    } else {
        fine[half] = buf[half];
    }
    let scale = factor as f64;
    let xi = wavenumbers(fine_len, h / scale);
    let mut dfine: Vec<C64> = fine.iter().zip(&xi).map(|(c, &k)| c * C64::new(0.0, k)).collect();
    // Inverse transforms of length fine_len divide by fine_len; the coarse
    // coefficients carry the normalisation of length len.
    inverse(&mut fine);
    inverse(&mut dfine);
    let count = (n - 1) * factor + 1;
    let vals = fine[..count].iter().map(|v| v.re * scale).collect();
    let ders = dfine[..count].iter().map(|v| v.re * scale).collect();
    (vals, ders)
}
