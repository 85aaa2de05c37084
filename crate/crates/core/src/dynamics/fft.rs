//! Unitary N-dimensional DFT on L_N^d (first coordinate slowest).

use num_complex::Complex64 as C64;
use rustfft::{FftDirection, FftPlanner};

/// In-place ψ̂(r) = N^{−d/2} Σ_k e^{∓2πi k·r/N} ψ(k); `inverse` selects the + sign.
pub fn dft_nd(data: &mut [C64], n: usize, d: usize, inverse: bool) {
    assert_eq!(data.len(), n.pow(d as u32));
    let dir = if inverse {
        FftDirection::Inverse
    } else {
        FftDirection::Forward
    };
    let fft = FftPlanner::new().plan_fft(n, dir);
    let mut line = vec![C64::new(0.0, 0.0); n];
    let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for start in 0..data.len() / n {
            // start enumerates (outer, inner) with inner < stride
            let outer = start / stride;
            let inner = start % stride;
            let base = outer * block + inner;
            for (t, x) in line.iter_mut().enumerate() {
                *x = data[base + t * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (t, x) in line.iter().enumerate() {
                data[base + t * stride] = *x;
            }
        }
    }
    let scale = (n as f64).powf(-(d as f64) / 2.0);
    data.iter_mut().for_each(|x| *x *= scale);
}
