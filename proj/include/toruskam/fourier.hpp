#ifndef TORUSKAM_FOURIER_HPP
#define TORUSKAM_FOURIER_HPP

#include <complex>
#include <iosfwd>
#include <vector>

#include "toruskam/fft.hpp"
#include "toruskam/grid.hpp"

namespace toruskam {

using cplx = std::complex<double>;

// Certified upper bound of sup |f| over the strip of half-width rho,
// computed as the exponentially weighted l1 sum of coefficients.
struct StripNormBound {
    double rho = 0.0;
    double value = 0.0;
};

// Truncated Fourier series of one real-analytic scalar on T^{d+l}.
// Coefficients are stored over the full symmetric band of the grid in DFT
// bin order; Hermitian symmetry (real values on the real torus) is
// restored after every construction.
class Series {
  public:
    Series() = default;
    explicit Series(GridSpec grid)
        : grid_(std::move(grid)), coef_(grid_.node_count(), cplx(0, 0)) {}

    static Series from_values(const GridSpec& grid, std::vector<cplx> values,
                              par::Mode mode = par::Mode::openmp);
    static Series from_real_values(const GridSpec& grid,
                                   const std::vector<double>& values,
                                   par::Mode mode = par::Mode::openmp);
    static Series constant(const GridSpec& grid, double c);

    std::vector<cplx> to_values(par::Mode mode = par::Mode::openmp) const;
    std::vector<double> to_real_values(par::Mode mode = par::Mode::openmp) const;

    const GridSpec& grid() const { return grid_; }
    const std::vector<cplx>& coef() const { return coef_; }
    std::vector<cplx>& coef() { return coef_; }

    // Coefficient at a signed frequency multi-index; zero outside the band.
    cplx at_freq(const std::vector<int>& m) const;
    void set_freq(const std::vector<int>& m, cplx v);

    double truncation_tail() const { return tail_; }
    void set_truncation_tail(double t) { tail_ = t; }

    // c_{-m} = conj(c_m); self-paired bins are forced real.
    void hermitize();

    // Zero every bin with some |m_a| > N_a/2 - width. The Newton
    // corrections keep a band-edge margin: the frame conjugation shifts
    // internal modes, so content at the outermost bins cannot be
    // transported consistently and would stall the iteration there.
    void zero_band_edge(int width = 1);

    Series rotated(const std::vector<double>& omega,
                   const std::vector<double>& alpha) const;
    Series differentiated(int axis) const;
    cplx average() const { return coef_.empty() ? cplx(0, 0) : coef_[0]; }
    double strip_norm(double rho) const;

    Series padded_to(const GridSpec& fine) const;
    Series truncated_to(const GridSpec& coarse) const;

    Series& operator+=(const Series& o);
    Series& operator-=(const Series& o);
    Series& operator*=(double s);
    friend Series operator+(Series a, const Series& b) { return a += b; }
    friend Series operator-(Series a, const Series& b) { return a -= b; }
    friend Series operator*(Series a, double s) { return a *= s; }
    friend Series operator*(double s, Series a) { return a *= s; }

    // Evaluation at one (possibly complex) point of the strip; direct
    // coefficient sum, meant for diagnostics and test oracles.
    cplx eval_at(const std::vector<cplx>& x) const;

  private:
    GridSpec grid_;
    std::vector<cplx> coef_;
    double tail_ = 0.0;
};

// Pointwise product on a common grid padded by `pad_factor`, truncated back
// to the finer of the input bands. The discarded weighted-l1 mass is
// recorded as the truncation tail of the result.
Series mul(const Series& a, const Series& b, int pad_factor = 2);

// Serial reference product via full coefficient convolution. Test oracle.
Series mul_reference(const Series& a, const Series& b);

// Matrix-valued series: shape (rows, cols) of scalar series on one grid.
// Scalars are 1x1; column vectors are rows x 1.
class MatSeries {
  public:
    MatSeries() = default;
    MatSeries(GridSpec grid, int rows, int cols);

    const GridSpec& grid() const { return grid_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Series& at(int r, int c) { return e_[idx(r, c)]; }
    const Series& at(int r, int c) const { return e_[idx(r, c)]; }

    MatSeries rotated(const std::vector<double>& omega,
                      const std::vector<double>& alpha) const;
    MatSeries differentiated(int axis) const;
    MatSeries transposed() const;
    MatSeries scaled(double s) const;
    void zero_band_edge(int width = 1);

    // Max-row-sum over entries of per-entry strip norms (the |M| convention).
    double strip_norm(double rho) const;
    std::vector<double> average() const;  // row-major rows x cols

    MatSeries& operator+=(const MatSeries& o);
    MatSeries& operator-=(const MatSeries& o);
    friend MatSeries operator+(MatSeries a, const MatSeries& b) { return a += b; }
    friend MatSeries operator-(MatSeries a, const MatSeries& b) { return a -= b; }

    static MatSeries hcat(const MatSeries& a, const MatSeries& b);
    MatSeries block(int r0, int c0, int rs, int cs) const;

    double truncation_tail() const;

  private:
    int idx(int r, int c) const { return r * cols_ + c; }
    GridSpec grid_;
    int rows_ = 0, cols_ = 0;
    std::vector<Series> e_;
};

MatSeries matmul(const MatSeries& a, const MatSeries& b, int pad_factor = 2);

// Real values of every entry on the grid, node-major: v[(node*rows+r)*cols+c].
// This is the carrier for pointwise frame algebra, where identities must
// hold to round-off at the nodes.
struct GridField {
    GridSpec grid;
    int rows = 0, cols = 0;
    std::vector<double> v;

    GridField() = default;
    GridField(GridSpec g, int r, int c)
        : grid(std::move(g)), rows(r), cols(c),
          v(grid.node_count() * static_cast<std::size_t>(r) * c, 0.0) {}

    double* node(std::size_t i) {
        return v.data() + i * static_cast<std::size_t>(rows) * cols;
    }
    const double* node(std::size_t i) const {
        return v.data() + i * static_cast<std::size_t>(rows) * cols;
    }
    std::size_t nodes() const { return grid.node_count(); }

    MatSeries to_series(par::Mode mode = par::Mode::openmp) const;
    double max_abs() const;
};

GridField to_grid_field(const MatSeries& m, par::Mode mode = par::Mode::openmp);

// Nodewise products/sums of grid fields (exact at nodes, no padding).
GridField gf_matmul(const GridField& a, const GridField& b);
GridField gf_transpose(const GridField& a);
GridField gf_add(const GridField& a, const GridField& b);
GridField gf_sub(const GridField& a, const GridField& b);
GridField gf_scale(const GridField& a, double s);
GridField gf_hcat(const GridField& a, const GridField& b);
GridField gf_block(const GridField& a, int r0, int c0, int rs, int cs);

// Coefficient dump formats. Text: header `fourier v1 d l rows cols N_1..`
// then one record `j.. k.. row col re im` per stored coefficient. Binary:
// the same header line, then the records as little-endian float64.
void dump_text(std::ostream& os, const MatSeries& m);
void dump_binary(std::ostream& os, const MatSeries& m);
MatSeries load_dump(std::istream& is);

}  // namespace toruskam

#endif
