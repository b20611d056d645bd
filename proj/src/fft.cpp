#include "toruskam/fft.hpp"

#include <cmath>

namespace toruskam::fft {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pow2(std::size_t n) { return n && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Iterative radix-2 Cooley-Tukey, power-of-two lengths only.
void fft_pow2(cplx* a, std::size_t n, bool inverse) {
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = kTwoPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        cplx wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Bluestein chirp-z: arbitrary N via one power-of-two convolution.
void fft_bluestein(cplx* a, std::size_t n, bool inverse) {
    const double sgn = inverse ? 1.0 : -1.0;
    std::vector<cplx> w(n);  // w_j = e^{sgn * pi i j^2 / n}
    for (std::size_t j = 0; j < n; ++j) {
        // j^2 mod 2n keeps the chirp argument bounded
        std::size_t j2 = (j * j) % (2 * n);
        double ang = sgn * kTwoPi / 2.0 * static_cast<double>(j2) /
                     static_cast<double>(n);
        w[j] = cplx(std::cos(ang), std::sin(ang));
    }
    std::size_t m = next_pow2(2 * n - 1);
    std::vector<cplx> fa(m, cplx(0, 0)), fb(m, cplx(0, 0));
    for (std::size_t j = 0; j < n; ++j) fa[j] = a[j] * w[j];
    fb[0] = std::conj(w[0]);
    for (std::size_t j = 1; j < n; ++j)
        fb[j] = fb[m - j] = std::conj(w[j]);
    fft_pow2(fa.data(), m, false);
    fft_pow2(fb.data(), m, false);
    for (std::size_t j = 0; j < m; ++j) fa[j] *= fb[j];
    fft_pow2(fa.data(), m, true);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t j = 0; j < n; ++j) a[j] = fa[j] * w[j] * scale;
}

}  // namespace

void transform(cplx* data, std::size_t n, bool inverse) {
    if (n <= 1) return;
    if (is_pow2(n))
        fft_pow2(data, n, inverse);
    else
        fft_bluestein(data, n, inverse);
}

void dft_naive(const cplx* in, cplx* out, std::size_t n, bool inverse) {
    const double sgn = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc(0, 0);
        for (std::size_t j = 0; j < n; ++j) {
            double ang = sgn * kTwoPi * static_cast<double>(j * k % n) /
                         static_cast<double>(n);
            acc += in[j] * cplx(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
}

namespace {

// Apply the 1-D transform along `axis` of the row-major nd array.
void transform_axis(const GridSpec& grid, std::vector<cplx>& data, int axis,
                    bool inverse, par::Mode mode) {
    const int n = grid.size(axis);
    std::size_t stride = 1;
    for (int a = grid.axes() - 1; a > axis; --a) stride *= grid.size(a);
    const std::size_t lines = grid.node_count() / static_cast<std::size_t>(n);
    const std::size_t block = stride * static_cast<std::size_t>(n);

    par::for_each(
        lines,
        [&](std::size_t line) {
            std::size_t outer = line / stride;
            std::size_t inner = line % stride;
            std::size_t base = outer * block + inner;
            std::vector<cplx> buf(n);
            for (int j = 0; j < n; ++j)
                buf[j] = data[base + static_cast<std::size_t>(j) * stride];
            transform(buf.data(), static_cast<std::size_t>(n), inverse);
            for (int j = 0; j < n; ++j)
                data[base + static_cast<std::size_t>(j) * stride] = buf[j];
        },
        mode);
}

}  // namespace

void forward_nd(const GridSpec& grid, std::vector<cplx>& data, par::Mode mode) {
    for (int a = 0; a < grid.axes(); ++a) transform_axis(grid, data, a, false, mode);
    const double scale = 1.0 / static_cast<double>(grid.node_count());
    for (cplx& c : data) c *= scale;
}

void inverse_nd(const GridSpec& grid, std::vector<cplx>& data, par::Mode mode) {
    for (int a = 0; a < grid.axes(); ++a) transform_axis(grid, data, a, true, mode);
}

}  // namespace toruskam::fft
