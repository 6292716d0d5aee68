#pragma once

#include <complex>

namespace fplab::detail {

// In-place complex DFT on a power-of-two grid, dim in {1,2} with n points
// per axis.  Plans are cached per (dim, n) and shared; execution uses the
// new-array interface and is safe to call from several threads.  Backward
// is unnormalized, matching FFTW.
void dft_forward(int dim, int n, std::complex<double>* data);
void dft_backward(int dim, int n, std::complex<double>* data);

// FFT index -> signed mode number in [-n/2, n/2).
inline int fold_mode(int i, int n) { return i < n / 2 ? i : i - n; }

}  // namespace fplab::detail
