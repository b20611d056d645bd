#ifndef TORUSKAM_FFT_HPP
#define TORUSKAM_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

#include "toruskam/grid.hpp"
#include "toruskam/parallel.hpp"

namespace toruskam::fft {

using cplx = std::complex<double>;

// In-place complex FFT of arbitrary length (radix-2, Bluestein fallback).
// forward: sum_j x_j e^{-2 pi i jk/N}, no scaling. inverse: e^{+...}, no
// scaling; callers apply 1/N where a unitary-like convention is wanted.
void transform(cplx* data, std::size_t n, bool inverse);

// Serial O(N^2) reference transform, same convention. Kept for tests and
// the kernel benchmark.
void dft_naive(const cplx* in, cplx* out, std::size_t n, bool inverse);

// Multidimensional transform over a GridSpec, axis by axis, parallel over
// transverse lines. values -> coefficients applies 1/(prod N) scaling;
// coefficients -> values applies none.
void forward_nd(const GridSpec& grid, std::vector<cplx>& data,
                par::Mode mode = par::Mode::openmp);
void inverse_nd(const GridSpec& grid, std::vector<cplx>& data,
                par::Mode mode = par::Mode::openmp);

}  // namespace toruskam::fft

#endif
