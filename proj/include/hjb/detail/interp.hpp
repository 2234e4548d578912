#pragma once

#include <cmath>
#include <cstddef>

#include "hjb/grid.hpp"

namespace hjb::detail {

// Hot-path cell lookup shared by the sweep kernels. Returns false outside the box.
inline bool locate(const RegularGrid& grid, const double* point, std::size_t& base_flat,
                   double* local) {
    base_flat = 0;
    const int d = grid.dim();
    for (int i = 0; i < d; ++i) {
        const double p = point[i];
        if (!(p >= grid.lower(i) && p <= grid.upper(i))) return false;
        const double s = (p - grid.lower(i)) / grid.spacing(i);
        int k = static_cast<int>(s);
        const int last_cell = grid.nodes(i) - 2;
        if (k > last_cell) k = last_cell;
        double t = s - k;
        if (t < 0.0) t = 0.0;
        if (t > 1.0) t = 1.0;
        local[i] = t;
        base_flat += static_cast<std::size_t>(k) * grid.stride(i);
    }
    return true;
}

// Multilinear blend given a located cell; corners visited in bit order.
inline double blend(const RegularGrid& grid, const double* values, std::size_t base_flat,
                    const double* local) {
    const int d = grid.dim();
    const int corners = 1 << d;
    double sum = 0.0;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t idx = base_flat;
        for (int i = 0; i < d; ++i) {
            if ((c >> i) & 1) {
                w *= local[i];
                idx += grid.stride(i);
            } else {
                w *= 1.0 - local[i];
            }
        }
        sum += w * values[idx];
    }
    return sum;
}

inline double interpolate_raw(const RegularGrid& grid, const double* values, const double* point,
                              double exterior_value) {
    std::size_t base = 0;
    double local[kMaxDim];
    if (!locate(grid, point, base, local)) return exterior_value;
    return blend(grid, values, base, local);
}

}  // namespace hjb::detail
