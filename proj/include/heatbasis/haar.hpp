#ifndef HEATBASIS_HAAR_HPP
#define HEATBASIS_HAAR_HPP

#include <cstddef>
#include <vector>

#include "heatbasis/grid.hpp"

namespace heatbasis {

/// Index n >= 1 of the Haar system with its unique decomposition
/// n = 2^k + j (1 <= j <= 2^k); n = 1 is the constant element.
struct HaarIndex {
    std::size_t n = 1;
    int k = -1;        // -1 for n = 1
    std::size_t j = 0; // 1-based within the level

    explicit HaarIndex(std::size_t index) : n(index) {
        if (index == 0) throw IndexError("Haar index starts at 1");
        if (index == 1) return;
        k = 0;
        while ((std::size_t(1) << (k + 1)) < index) ++k; // 2^k < n <= 2^(k+1)
        j = index - (std::size_t(1) << k);
    }

    std::size_t compose() const { return k < 0 ? 1 : (std::size_t(1) << k) + j; }
};

/// Haar element with values +-1 (the unnormalized system): e_1 == 1 and
/// e_{2^k+j} is +1 on the left half and -1 on the right half of its dyadic
/// support block, the endpooint ties resolved by the half-open cells.
inline GridFunction haar(std::size_t n, const std::shared_ptr<const DyadicGrid>& grid) {
    const std::size_t dim = grid->cells();
    if (n < 1 || n > dim) throw IndexError("Haar index exceeds grid dimension");
    GridFunction e(grid, Side::UnitInterval);
    if (n == 1) {
        for (auto& v : e.values) v = 1.0;
        return e;
    }
    HaarIndex h(n);
    const std::size_t block = dim >> h.k; // cells per support block
    const std::size_t start = (h.j - 1) * block;
    for (std::size_t i = 0; i < block / 2; ++i) e[start + i] = 1.0;
    for (std::size_t i = block / 2; i < block; ++i) e[start + i] = -1.0;
    return e;
}

/// Coordinates (c_n) with f = sum c_n e_n, computed by the fast unnormalized
/// Haar transform. Exact for dyadic data: only additions and halvings.
inline std::vector<double> haar_analyze(const std::vector<double>& cells) {
    std::size_t dim = cells.size();
    std::vector<double> means = cells, coords(dim, 0.0);
    std::size_t len = dim;
    while (len > 1) {
        std::size_t half = len / 2;
        // means[0..len) holds block means at the current level; the detail
        // coefficient of e_{half + b + 1} is (mean_left - mean_right)/2.
        for (std::size_t b = 0; b < half; ++b) {
            double l = means[2 * b], r = means[2 * b + 1];
            means[b] = 0.5 * (l + r);
            coords[half + b] = 0.5 * (l - r);
        }
        len = half;
    }
    coords[0] = means[0];
    return coords;
}

inline std::vector<double> haar_synthesize(const std::vector<double>& coords) {
    std::size_t dim = coords.size();
    std::vector<double> vals(dim, 0.0);
    vals[0] = coords[0];
    std::size_t len = 1;
    while (len < dim) {
        for (std::size_t b = len; b-- > 0;) {
            double m = vals[b], d = coords[len + b];
            vals[2 * b] = m + d;
            vals[2 * b + 1] = m - d;
        }
        len *= 2;
    }
    return vals;
}

/// Expansion of the indicator of A_m in the Haar system, where the blocks are
/// numbered A_1 = [0,1], A_{2^k+j-1} = [(j-1)2^-k, j 2^-k]. The combination is
/// exact cellwise; only finitely many coefficients are nonzero.
inline std::vector<double> indicator_in_haar(std::size_t m, const std::shared_ptr<const DyadicGrid>& grid) {
    const std::size_t dim = grid->cells();
    if (m < 1 || m > dim) throw IndexError("indicator index exceeds grid dimension");
    std::vector<double> cells(dim, 0.0);
    if (m == 1) {
        cells.assign(dim, 1.0);
    } else {
        HaarIndex h(m + 1); // A_{2^k+j-1}: block (k, j) with m+1 = 2^k + j
        const std::size_t block = dim >> h.k;
        const std::size_t start = (h.j - 1) * block;
        for (std::size_t i = 0; i < block; ++i) cells[start + i] = 1.0;
    }
    return haar_analyze(cells);
}

} // namespace heatbasis

#endif
