#include "toruskam/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "toruskam/errors.hpp"

namespace toruskam {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

Series Series::from_values(const GridSpec& grid, std::vector<cplx> values,
                           par::Mode mode) {
    if (values.size() != grid.node_count())
        throw ShapeError("value array does not match grid");
    Series s(grid);
    fft::forward_nd(grid, values, mode);
    s.coef_ = std::move(values);
    s.hermitize();
    return s;
}

Series Series::from_real_values(const GridSpec& grid,
                                const std::vector<double>& values,
                                par::Mode mode) {
    std::vector<cplx> v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) v[i] = cplx(values[i], 0);
    return from_values(grid, std::move(v), mode);
}

Series Series::constant(const GridSpec& grid, double c) {
    Series s(grid);
    s.coef_[0] = cplx(c, 0);
    return s;
}

std::vector<cplx> Series::to_values(par::Mode mode) const {
    std::vector<cplx> v(coef_);
    fft::inverse_nd(grid_, v, mode);
    return v;
}

std::vector<double> Series::to_real_values(par::Mode mode) const {
    std::vector<cplx> v = to_values(mode);
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i].real();
    return r;
}

cplx Series::at_freq(const std::vector<int>& m) const {
    std::vector<int> bins(grid_.axes());
    for (int a = 0; a < grid_.axes(); ++a) {
        int b = grid_.bin_of_freq(a, m[a]);
        if (b < 0) return cplx(0, 0);
        bins[a] = b;
    }
    return coef_[grid_.flat_index(bins)];
}

void Series::set_freq(const std::vector<int>& m, cplx v) {
    std::vector<int> bins(grid_.axes());
    for (int a = 0; a < grid_.axes(); ++a) {
        int b = grid_.bin_of_freq(a, m[a]);
        if (b < 0) throw ShapeError("frequency outside grid band");
        bins[a] = b;
    }
    coef_[grid_.flat_index(bins)] = v;
}

void Series::hermitize() {
    const int axes = grid_.axes();
    std::vector<int> bins(axes), nbins(axes);
    const std::size_t n = coef_.size();
    for (std::size_t i = 0; i < n; ++i) {
        grid_.unflatten(i, bins);
        for (int a = 0; a < axes; ++a)
            nbins[a] = bins[a] == 0 ? 0 : grid_.size(a) - bins[a];
        std::size_t j = grid_.flat_index(nbins);
        if (j == i) {
            coef_[i] = cplx(coef_[i].real(), 0.0);
        } else if (j > i) {
            cplx avg = 0.5 * (coef_[i] + std::conj(coef_[j]));
            coef_[i] = avg;
            coef_[j] = std::conj(avg);
        }
    }
}

void Series::zero_band_edge(int width) {
    std::vector<int> bins(grid_.axes());
    for (std::size_t i = 0; i < coef_.size(); ++i) {
        if (coef_[i] == cplx(0, 0)) continue;
        grid_.unflatten(i, bins);
        for (int a = 0; a < grid_.axes(); ++a) {
            if (std::abs(grid_.freq(a, bins[a])) > grid_.size(a) / 2 - width) {
                coef_[i] = cplx(0, 0);
                break;
            }
        }
    }
}

Series Series::rotated(const std::vector<double>& omega,
                       const std::vector<double>& alpha) const {
    if (static_cast<int>(omega.size()) != grid_.dims_internal() ||
        static_cast<int>(alpha.size()) != grid_.dims_external())
        throw ShapeError("rotation vector does not match grid dimensions");
    Series out(grid_);
    std::vector<int> bins(grid_.axes());
    for (std::size_t i = 0; i < coef_.size(); ++i) {
        grid_.unflatten(i, bins);
        double phase = 0;
        for (int a = 0; a < grid_.dims_internal(); ++a)
            phase += grid_.freq(a, bins[a]) * omega[a];
        for (int a = 0; a < grid_.dims_external(); ++a)
            phase += grid_.freq(grid_.dims_internal() + a,
                                bins[grid_.dims_internal() + a]) * alpha[a];
        out.coef_[i] = coef_[i] * cplx(std::cos(kTwoPi * phase),
                                       std::sin(kTwoPi * phase));
    }
    // exact in coefficient space: each mode picks up a unit phase, so this
    // is an isometry of every weighted-l1 norm
    out.tail_ = tail_;
    return out;
}

Series Series::differentiated(int axis) const {
    if (axis < 0 || axis >= grid_.axes()) throw ShapeError("axis out of range");
    Series out(grid_);
    std::vector<int> bins(grid_.axes());
    for (std::size_t i = 0; i < coef_.size(); ++i) {
        grid_.unflatten(i, bins);
        double m = grid_.freq(axis, bins[axis]);
        out.coef_[i] = coef_[i] * cplx(0.0, kTwoPi * m);
    }
    out.hermitize();
    return out;
}

double Series::strip_norm(double rho) const {
    double s = 0;
    std::vector<int> bins(grid_.axes());
    for (std::size_t i = 0; i < coef_.size(); ++i) {
        double c = std::abs(coef_[i]);
        if (c == 0.0) continue;
        if (rho > 0) {
            grid_.unflatten(i, bins);
            double l1 = 0;
            for (int a = 0; a < grid_.axes(); ++a)
                l1 += std::abs(grid_.freq(a, bins[a]));
            c *= std::exp(kTwoPi * rho * l1);
        }
        s += c;
    }
    return s;
}

Series Series::padded_to(const GridSpec& fine) const {
    // Nyquist coefficients split into +-N/2 halves on the finer grid, so
    // the padded series is the real trigonometric interpolant and
    // truncated_to inverts the padding exactly.
    Series out(fine);
    const int axes = grid_.axes();
    std::vector<int> bins(axes);
    for (std::size_t i = 0; i < coef_.size(); ++i) {
        if (coef_[i] == cplx(0, 0)) continue;
        grid_.unflatten(i, bins);
        std::vector<std::vector<int>> choices(axes);
        double weight = 1.0;
        bool ok = true;
        for (int a = 0; a < axes; ++a) {
            int m = grid_.freq(a, bins[a]);
            bool nyquist = (m == -grid_.size(a) / 2) &&
                           (fine.size(a) > grid_.size(a));
            if (nyquist) {
                choices[a] = {m, -m};
                weight *= 0.5;
            } else {
                if (fine.bin_of_freq(a, m) < 0) { ok = false; break; }
                choices[a] = {m};
            }
        }
        if (!ok) continue;
        std::vector<int> pick(axes, 0), fbins(axes);
        std::size_t combos = 1;
        for (int a = 0; a < axes; ++a) combos *= choices[a].size();
        for (std::size_t c = 0; c < combos; ++c) {
            std::size_t rem = c;
            for (int a = 0; a < axes; ++a) {
                pick[a] = choices[a][rem % choices[a].size()];
                rem /= choices[a].size();
            }
            for (int a = 0; a < axes; ++a)
                fbins[a] = fine.bin_of_freq(a, pick[a]);
            out.coef_[fine.flat_index(fbins)] += coef_[i] * weight;
        }
    }
    out.tail_ = tail_;
    return out;
}

Series Series::truncated_to(const GridSpec& coarse) const {
    // Frequencies +N/2 fold onto the coarse Nyquist bin -N/2 (they alias on
    // the coarse grid); everything beyond the band is dropped and recorded.
    Series out(coarse);
    double discarded = 0;
    std::vector<int> bins(grid_.axes()), cbins(grid_.axes());
    for (std::size_t i = 0; i < coef_.size(); ++i) {
        if (coef_[i] == cplx(0, 0)) continue;
        grid_.unflatten(i, bins);
        bool ok = true;
        for (int a = 0; a < grid_.axes(); ++a) {
            int m = grid_.freq(a, bins[a]);
            if (m == coarse.size(a) / 2) m = -m;
            int b = coarse.bin_of_freq(a, m);
            if (b < 0) { ok = false; break; }
            cbins[a] = b;
        }
        if (ok)
            out.coef_[coarse.flat_index(cbins)] += coef_[i];
        else
            discarded += std::abs(coef_[i]);
    }
    out.tail_ = tail_ + discarded;
    return out;
}

Series& Series::operator+=(const Series& o) {
    if (grid_ != o.grid_) throw ShapeError("grid mismatch in add");
    for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] += o.coef_[i];
    tail_ = std::max(tail_, o.tail_);
    return *this;
}

Series& Series::operator-=(const Series& o) {
    if (grid_ != o.grid_) throw ShapeError("grid mismatch in sub");
    for (std::size_t i = 0; i < coef_.size(); ++i) coef_[i] -= o.coef_[i];
    tail_ = std::max(tail_, o.tail_);
    return *this;
}

Series& Series::operator*=(double s) {
    for (cplx& c : coef_) c *= s;
    tail_ *= std::abs(s);
    return *this;
}

cplx Series::eval_at(const std::vector<cplx>& x) const {
    cplx acc(0, 0);
    std::vector<int> bins(grid_.axes());
    for (std::size_t i = 0; i < coef_.size(); ++i) {
        if (coef_[i] == cplx(0, 0)) continue;
        grid_.unflatten(i, bins);
        cplx phase(0, 0);
        for (int a = 0; a < grid_.axes(); ++a)
            phase += static_cast<double>(grid_.freq(a, bins[a])) * x[a];
        acc += coef_[i] * std::exp(cplx(0, kTwoPi) * phase);
    }
    return acc;
}

Series mul(const Series& a, const Series& b, int pad_factor) {
    if (a.grid() != b.grid()) throw ShapeError("grid mismatch in mul");
    GridSpec fine = a.grid().padded(pad_factor);
    std::vector<cplx> va = a.padded_to(fine).to_values();
    std::vector<cplx> vb = b.padded_to(fine).to_values();
    for (std::size_t i = 0; i < va.size(); ++i) va[i] *= vb[i];
    Series prod = Series::from_values(fine, std::move(va));
    return prod.truncated_to(a.grid());
}

Series mul_reference(const Series& a, const Series& b) {
    if (a.grid() != b.grid()) throw ShapeError("grid mismatch in mul_reference");
    const GridSpec& g = a.grid();
    GridSpec fine = g.padded(2);
    Series out(fine);
    const int axes = g.axes();
    std::vector<int> bi(axes), bj(axes), m(axes);
    const std::size_t n = g.node_count();
    for (std::size_t i = 0; i < n; ++i) {
        if (a.coef()[i] == cplx(0, 0)) continue;
        g.unflatten(i, bi);
        for (std::size_t j = 0; j < n; ++j) {
            if (b.coef()[j] == cplx(0, 0)) continue;
            g.unflatten(j, bj);
            bool ok = true;
            std::vector<int> fb(axes);
            for (int ax = 0; ax < axes; ++ax) {
                m[ax] = g.freq(ax, bi[ax]) + g.freq(ax, bj[ax]);
                int bb = fine.bin_of_freq(ax, m[ax]);
                if (bb < 0) { ok = false; break; }
                fb[ax] = bb;
            }
            if (ok)
                out.coef()[fine.flat_index(fb)] += a.coef()[i] * b.coef()[j];
        }
    }
    out.hermitize();
    return out.truncated_to(g);
}

MatSeries::MatSeries(GridSpec grid, int rows, int cols)
    : grid_(std::move(grid)), rows_(rows), cols_(cols),
      e_(static_cast<std::size_t>(rows) * cols, Series(grid_)) {}

MatSeries MatSeries::rotated(const std::vector<double>& omega,
                             const std::vector<double>& alpha) const {
    MatSeries out(grid_, rows_, cols_);
    for (std::size_t i = 0; i < e_.size(); ++i) out.e_[i] = e_[i].rotated(omega, alpha);
    return out;
}

MatSeries MatSeries::differentiated(int axis) const {
    MatSeries out(grid_, rows_, cols_);
    for (std::size_t i = 0; i < e_.size(); ++i) out.e_[i] = e_[i].differentiated(axis);
    return out;
}

MatSeries MatSeries::transposed() const {
    MatSeries out(grid_, cols_, rows_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) out.at(c, r) = at(r, c);
    return out;
}

MatSeries MatSeries::scaled(double s) const {
    MatSeries out = *this;
    for (auto& e : out.e_) e *= s;
    return out;
}

double MatSeries::strip_norm(double rho) const {
    double best = 0;
    for (int r = 0; r < rows_; ++r) {
        double row = 0;
        for (int c = 0; c < cols_; ++c) row += at(r, c).strip_norm(rho);
        best = std::max(best, row);
    }
    return best;
}

std::vector<double> MatSeries::average() const {
    std::vector<double> m(static_cast<std::size_t>(rows_) * cols_);
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c)
            m[static_cast<std::size_t>(r) * cols_ + c] = at(r, c).average().real();
    return m;
}

MatSeries& MatSeries::operator+=(const MatSeries& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw ShapeError("matseries add");
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] += o.e_[i];
    return *this;
}

MatSeries& MatSeries::operator-=(const MatSeries& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw ShapeError("matseries sub");
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] -= o.e_[i];
    return *this;
}

MatSeries MatSeries::hcat(const MatSeries& a, const MatSeries& b) {
    if (a.cols_ == 0) return b;
    if (b.cols_ == 0) return a;
    if (a.rows_ != b.rows_ || a.grid_ != b.grid_)
        throw ShapeError("hcat shape mismatch");
    MatSeries out(a.grid_, a.rows_, a.cols_ + b.cols_);
    for (int r = 0; r < a.rows_; ++r) {
        for (int c = 0; c < a.cols_; ++c) out.at(r, c) = a.at(r, c);
        for (int c = 0; c < b.cols_; ++c) out.at(r, a.cols_ + c) = b.at(r, c);
    }
    return out;
}

MatSeries MatSeries::block(int r0, int c0, int rs, int cs) const {
    MatSeries out(grid_, rs, cs);
    for (int r = 0; r < rs; ++r)
        for (int c = 0; c < cs; ++c) out.at(r, c) = at(r0 + r, c0 + c);
    return out;
}

void MatSeries::zero_band_edge(int width) {
    for (auto& e : e_) e.zero_band_edge(width);
}

double MatSeries::truncation_tail() const {
    double t = 0;
    for (const auto& e : e_) t = std::max(t, e.truncation_tail());
    return t;
}

MatSeries matmul(const MatSeries& a, const MatSeries& b, int pad_factor) {
    if (a.cols() != b.rows()) throw ShapeError("matmul inner dimensions");
    if (a.grid() != b.grid()) throw ShapeError("matmul grid mismatch");
    const GridSpec& g = a.grid();
    GridSpec fine = g.padded(pad_factor);
    // transform every entry once
    std::vector<std::vector<cplx>> va(static_cast<std::size_t>(a.rows()) * a.cols());
    std::vector<std::vector<cplx>> vb(static_cast<std::size_t>(b.rows()) * b.cols());
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c)
            va[static_cast<std::size_t>(r) * a.cols() + c] =
                a.at(r, c).padded_to(fine).to_values();
    for (int r = 0; r < b.rows(); ++r)
        for (int c = 0; c < b.cols(); ++c)
            vb[static_cast<std::size_t>(r) * b.cols() + c] =
                b.at(r, c).padded_to(fine).to_values();
    MatSeries out(g, a.rows(), b.cols());
    const std::size_t nn = fine.node_count();
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < b.cols(); ++c) {
            std::vector<cplx> acc(nn, cplx(0, 0));
            for (int k = 0; k < a.cols(); ++k) {
                const auto& x = va[static_cast<std::size_t>(r) * a.cols() + k];
                const auto& y = vb[static_cast<std::size_t>(k) * b.cols() + c];
                for (std::size_t i = 0; i < nn; ++i) acc[i] += x[i] * y[i];
            }
            out.at(r, c) = Series::from_values(fine, std::move(acc)).truncated_to(g);
        }
    }
    return out;
}

MatSeries GridField::to_series(par::Mode mode) const {
    MatSeries out(grid, rows, cols);
    const std::size_t nn = nodes();
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            std::vector<double> vals(nn);
            for (std::size_t i = 0; i < nn; ++i)
                vals[i] = node(i)[static_cast<std::size_t>(r) * cols + c];
            out.at(r, c) = Series::from_real_values(grid, vals, mode);
        }
    }
    return out;
}

double GridField::max_abs() const {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

GridField to_grid_field(const MatSeries& m, par::Mode mode) {
    GridField out(m.grid(), m.rows(), m.cols());
    const std::size_t nn = out.nodes();
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            std::vector<double> vals = m.at(r, c).to_real_values(mode);
            for (std::size_t i = 0; i < nn; ++i)
                out.node(i)[static_cast<std::size_t>(r) * m.cols() + c] = vals[i];
        }
    }
    return out;
}

GridField gf_matmul(const GridField& a, const GridField& b) {
    if (a.cols != b.rows || a.grid != b.grid) throw ShapeError("gf_matmul");
    GridField out(a.grid, a.rows, b.cols);
    const std::size_t nn = out.nodes();
    par::for_each(nn, [&](std::size_t i) {
        const double* pa = a.node(i);
        const double* pb = b.node(i);
        double* po = out.node(i);
        for (int r = 0; r < a.rows; ++r)
            for (int c = 0; c < b.cols; ++c) {
                double acc = 0;
                for (int k = 0; k < a.cols; ++k)
                    acc += pa[r * a.cols + k] * pb[k * b.cols + c];
                po[r * b.cols + c] = acc;
            }
    });
    return out;
}

GridField gf_transpose(const GridField& a) {
    GridField out(a.grid, a.cols, a.rows);
    const std::size_t nn = out.nodes();
    for (std::size_t i = 0; i < nn; ++i) {
        const double* pa = a.node(i);
        double* po = out.node(i);
        for (int r = 0; r < a.rows; ++r)
            for (int c = 0; c < a.cols; ++c) po[c * a.rows + r] = pa[r * a.cols + c];
    }
    return out;
}

GridField gf_add(const GridField& a, const GridField& b) {
    if (a.rows != b.rows || a.cols != b.cols || a.grid != b.grid)
        throw ShapeError("gf_add");
    GridField out = a;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += b.v[i];
    return out;
}

GridField gf_sub(const GridField& a, const GridField& b) {
    if (a.rows != b.rows || a.cols != b.cols || a.grid != b.grid)
        throw ShapeError("gf_sub");
    GridField out = a;
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] -= b.v[i];
    return out;
}

GridField gf_scale(const GridField& a, double s) {
    GridField out = a;
    for (double& x : out.v) x *= s;
    return out;
}

GridField gf_hcat(const GridField& a, const GridField& b) {
    if (a.cols == 0) return b;
    if (b.cols == 0) return a;
    if (a.rows != b.rows || a.grid != b.grid) throw ShapeError("gf_hcat");
    GridField out(a.grid, a.rows, a.cols + b.cols);
    const std::size_t nn = out.nodes();
    for (std::size_t i = 0; i < nn; ++i) {
        const double* pa = a.node(i);
        const double* pb = b.node(i);
        double* po = out.node(i);
        for (int r = 0; r < a.rows; ++r) {
            for (int c = 0; c < a.cols; ++c) po[r * out.cols + c] = pa[r * a.cols + c];
            for (int c = 0; c < b.cols; ++c)
                po[r * out.cols + a.cols + c] = pb[r * b.cols + c];
        }
    }
    return out;
}

GridField gf_block(const GridField& a, int r0, int c0, int rs, int cs) {
    GridField out(a.grid, rs, cs);
    const std::size_t nn = out.nodes();
    for (std::size_t i = 0; i < nn; ++i) {
        const double* pa = a.node(i);
        double* po = out.node(i);
        for (int r = 0; r < rs; ++r)
            for (int c = 0; c < cs; ++c)
                po[r * cs + c] = pa[(r0 + r) * a.cols + (c0 + c)];
    }
    return out;
}

namespace {

void write_header(std::ostream& os, const MatSeries& m) {
    const GridSpec& g = m.grid();
    os << "fourier v1 " << g.dims_internal() << " " << g.dims_external() << " "
       << m.rows() << " " << m.cols();
    for (int n : g.sizes()) os << " " << n;
    os << "\n";
}

struct Header {
    int d, l, rows, cols;
    std::vector<int> sizes;
};

Header read_header(std::istream& is, const char* expect_tag) {
    std::string line;
    if (!std::getline(is, line)) throw Error("dump: empty stream");
    std::istringstream ls(line);
    std::string word, ver;
    ls >> word >> ver;
    if (word != "fourier" || ver != expect_tag)
        throw Error("dump: bad header '" + line + "'");
    Header h;
    if (!(ls >> h.d >> h.l >> h.rows >> h.cols))
        throw Error("dump: bad header dims");
    int n;
    while (ls >> n) h.sizes.push_back(n);
    if (static_cast<int>(h.sizes.size()) != h.d + h.l)
        throw Error("dump: header size list does not match d+l");
    return h;
}

}  // namespace

void dump_text(std::ostream& os, const MatSeries& m) {
    write_header(os, m);
    os.precision(17);
    const GridSpec& g = m.grid();
    std::vector<int> bins(g.axes());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) {
            const auto& coef = m.at(r, c).coef();
            for (std::size_t i = 0; i < coef.size(); ++i) {
                g.unflatten(i, bins);
                for (int a = 0; a < g.axes(); ++a) os << g.freq(a, bins[a]) << " ";
                os << r << " " << c << " " << coef[i].real() << " "
                   << coef[i].imag() << "\n";
            }
        }
}

void dump_binary(std::ostream& os, const MatSeries& m) {
    write_header(os, m);
    const GridSpec& g = m.grid();
    std::vector<int> bins(g.axes());
    auto put = [&os](double x) {
        // assumes little-endian host, as documented
        os.write(reinterpret_cast<const char*>(&x), sizeof(double));
    };
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) {
            const auto& coef = m.at(r, c).coef();
            for (std::size_t i = 0; i < coef.size(); ++i) {
                g.unflatten(i, bins);
                for (int a = 0; a < g.axes(); ++a)
                    put(static_cast<double>(g.freq(a, bins[a])));
                put(static_cast<double>(r));
                put(static_cast<double>(c));
                put(coef[i].real());
                put(coef[i].imag());
            }
        }
}

MatSeries load_dump(std::istream& is) {
    // Peek the header, then decide text/binary by probing the payload:
    // text records start with digits/sign/space; we just try text first and
    // fall back by format flag in the header? Keep it simple: the loader
    // reads text when the next byte is printable ASCII and binary otherwise.
    Header h = read_header(is, "v1");
    GridSpec g(h.d, h.l, h.sizes);
    MatSeries m(g, h.rows, h.cols);
    const std::size_t nrec =
        g.node_count() * static_cast<std::size_t>(h.rows) * h.cols;
    int probe = is.peek();
    bool binary = !(probe == '-' || probe == '+' || probe == ' ' ||
                    (probe >= '0' && probe <= '9'));
    std::vector<int> freq(g.axes()), bins(g.axes());
    for (std::size_t rec = 0; rec < nrec; ++rec) {
        int r, c;
        double re, im;
        if (binary) {
            double buf;
            auto get = [&is, &buf]() {
                is.read(reinterpret_cast<char*>(&buf), sizeof(double));
                return buf;
            };
            for (int a = 0; a < g.axes(); ++a) freq[a] = static_cast<int>(get());
            r = static_cast<int>(get());
            c = static_cast<int>(get());
            re = get();
            im = get();
        } else {
            for (int a = 0; a < g.axes(); ++a)
                if (!(is >> freq[a])) throw Error("dump: truncated record");
            if (!(is >> r >> c >> re >> im)) throw Error("dump: truncated record");
        }
        if (!is) throw Error("dump: truncated record");
        for (int a = 0; a < g.axes(); ++a) {
            int b = g.bin_of_freq(a, freq[a]);
            if (b < 0) throw Error("dump: frequency outside band");
            bins[a] = b;
        }
        if (r < 0 || r >= h.rows || c < 0 || c >= h.cols)
            throw Error("dump: entry index outside shape");
        m.at(r, c).coef()[g.flat_index(bins)] = cplx(re, im);
    }
    return m;
}

}  // namespace toruskam
