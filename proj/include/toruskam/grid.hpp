#ifndef TORUSKAM_GRID_HPP
#define TORUSKAM_GRID_HPP

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "toruskam/errors.hpp"

namespace toruskam {

// Uniform grid on T^{d+l}: d internal angles theta, l external angles phi.
// Axis i carries sizes[i] equispaced points; frequencies live in the
// symmetric band [-N/2, N/2) in standard DFT bin order.
class GridSpec {
  public:
    GridSpec() = default;
    GridSpec(int dims_internal, int dims_external, std::vector<int> sizes)
        : d_(dims_internal), l_(dims_external), sizes_(std::move(sizes)) {
        if (d_ < 0) throw ConfigError("dims_internal must be >= 0");
        if (l_ < 1) throw ConfigError("dims_external must be >= 1");
        if (static_cast<int>(sizes_.size()) != d_ + l_)
            throw ConfigError("points_per_axis length must equal d+l");
        std::size_t total = 1;
        for (int n : sizes_) {
            if (n < 4 || n % 2 != 0)
                throw ConfigError("points_per_axis entries must be even and >= 4");
            total *= static_cast<std::size_t>(n);
            if (total > (std::size_t(1) << 40))
                throw ConfigError("grid too large for addressable range");
        }
    }

    int dims_internal() const { return d_; }
    int dims_external() const { return l_; }
    int axes() const { return d_ + l_; }
    const std::vector<int>& sizes() const { return sizes_; }
    int size(int axis) const { return sizes_[axis]; }

    std::size_t node_count() const {
        std::size_t total = 1;
        for (int n : sizes_) total *= static_cast<std::size_t>(n);
        return total;
    }

    // Signed frequency of a DFT bin along one axis.
    int freq(int axis, int bin) const {
        int n = sizes_[axis];
        return bin < n / 2 ? bin : bin - n;
    }

    // Bin holding signed frequency k along one axis, or -1 if out of band.
    int bin_of_freq(int axis, int k) const {
        int n = sizes_[axis];
        if (k < -n / 2 || k >= n / 2) return -1;
        return k >= 0 ? k : k + n;
    }

    std::size_t flat_index(const std::vector<int>& bins) const {
        std::size_t idx = 0;
        for (int a = 0; a < axes(); ++a) idx = idx * sizes_[a] + bins[a];
        return idx;
    }

    void unflatten(std::size_t idx, std::vector<int>& bins) const {
        bins.resize(axes());
        for (int a = axes() - 1; a >= 0; --a) {
            bins[a] = static_cast<int>(idx % sizes_[a]);
            idx /= sizes_[a];
        }
    }

    // Coordinates of a node in [0,1)^{d+l}.
    void node_point(std::size_t idx, std::vector<double>& x) const {
        std::vector<int> bins;
        unflatten(idx, bins);
        x.resize(axes());
        for (int a = 0; a < axes(); ++a)
            x[a] = static_cast<double>(bins[a]) / sizes_[a];
    }

    // |m|_1 of the signed frequency multi-index at a flat bin index.
    double freq_l1(std::size_t idx) const {
        std::vector<int> bins;
        unflatten(idx, bins);
        double s = 0;
        for (int a = 0; a < axes(); ++a) s += std::abs(freq(a, bins[a]));
        return s;
    }

    GridSpec padded(int factor = 2) const {
        std::vector<int> s(sizes_);
        for (int& n : s) n *= factor;
        return GridSpec(d_, l_, s);
    }

    bool operator==(const GridSpec& o) const {
        return d_ == o.d_ && l_ == o.l_ && sizes_ == o.sizes_;
    }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }

  private:
    int d_ = 0;
    int l_ = 1;
    std::vector<int> sizes_{4};
};

}  // namespace toruskam

#endif
