//! 2-D FFT helpers over `ndarray` grids, built on rustfft.
//!
//! Convention: forward transform is the plain unnormalized DFT sum,
//! the inverse carries the `1/(H·W)` factor.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform_rows(a: &mut Array2<Complex64>, inverse: bool) {
    let w = a.dim().1;
    PLANNER.with(|p| {
        let fft = if inverse {
            p.borrow_mut().plan_fft_inverse(w)
        } else {
            p.borrow_mut().plan_fft_forward(w)
        };
        for mut row in a.rows_mut() {
            let slice = row.as_slice_mut().expect("rows of a standard-layout array");
            fft.process(slice);
        }
    });
}

fn fft2_impl(input: &Array2<Complex64>, inverse: bool) -> Array2<Complex64> {
    let mut a = input.clone();
    transform_rows(&mut a, inverse);
    // Columns via transpose so each pass runs on contiguous rows.
    let mut t = a.t().to_owned();
    transform_rows(&mut t, inverse);
    let mut out = t.t().to_owned();
    if inverse {
        let scale = 1.0 / (input.len() as f64);
        out.mapv_inplace(|v| v * scale);
    }
    out
}

pub fn fft2(input: &Array2<Complex64>) -> Array2<Complex64> {
    fft2_impl(input, false)
}

pub fn ifft2(input: &Array2<Complex64>) -> Array2<Complex64> {
    fft2_impl(input, true)
}

pub fn fft2_real(input: &ndarray::ArrayView2<'_, f64>) -> Array2<Complex64> {
    let c = input.mapv(|v| Complex64::new(v, 0.0));
    fft2_impl(&c, false)
}
