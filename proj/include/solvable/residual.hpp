#pragma once

// Finite-difference residual of u'' = V u.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "solvable/potential.hpp"

namespace solvable {

/// Per-point relative residuals |u'' - V u| / (1 + |V u|) with the 5-point stencil.
struct ResidualResult {
    double max = 0.0;
    double worst_at = 0.0;
    std::vector<double> r;
    std::vector<double> value;
    /// Radii where the stencil could not be placed inside (0, inf).
    std::vector<double> skipped;
};

/// Verification radii on [lo, hi]: 40 per decade below 1, then steps of 0.05.
inline std::vector<double> verification_grid(double lo, double hi) {
    std::vector<double> r;
    if (lo < 1.0) {
        const double top = std::min(1.0, hi);
        const auto n = std::max(1, static_cast<int>(std::ceil(40.0 * std::log10(top / lo))));
        for (int i = 0; i < n; ++i) r.push_back(lo * std::pow(top / lo, static_cast<double>(i) / n));
    }
    const double start = std::max(lo, 1.0);
    if (hi > start) {
        const auto n = static_cast<int>(std::ceil((hi - start) / 0.05));
        for (int i = 0; i <= n; ++i) r.push_back(start + (hi - start) * static_cast<double>(i) / n);
    } else {
        r.push_back(hi);
    }
    return r;
}

/// 5-point second difference at r with step h.
inline double second_difference(const std::function<double(double)>& u, double r, double h) {
    return (-u(r + 2 * h) + 16.0 * u(r + h) - 30.0 * u(r) + 16.0 * u(r - h) - u(r - 2 * h)) / (12.0 * h * h);
}

/// Step h = h0 max(1, r), capped at near_origin * r. The stencil values at h and
/// h/2 are combined by one Richardson step, (16 D(h/2) - D(h))/15, which removes the
/// h^4 term and allows a step large enough to keep rounding near 1e-11.
/// Points with r < 1e-6 are skipped.
inline ResidualResult residual(const std::function<double(double)>& u, const std::function<double(double)>& v,
                               std::span<const double> grid, double h0 = 1e-2,
                               double near_origin = 0.25) {
    ResidualResult out;
    for (double r : grid) {
        if (r < 1e-6) {
            out.skipped.push_back(r);
            continue;
        }
        const double h = std::min(h0 * std::max(1.0, r), near_origin * r);
        const double d2 = (16.0 * second_difference(u, r, 0.5 * h) - second_difference(u, r, h)) / 15.0;
        const double f0 = u(r);
        const double vu = v(r) * f0;
        const double rel = std::abs(d2 - vu) / (1.0 + std::abs(vu));
        out.r.push_back(r);
        out.value.push_back(std::isfinite(rel) ? rel : INFINITY);
        if (!(out.value.back() <= out.max)) {
            out.max = out.value.back();
            out.worst_at = r;
        }
    }
    return out;
}

/// Residual against a classified potential; singular origins get the tighter step cap.
inline ResidualResult residual(const std::function<double(double)>& u, const RadialPotential& v,
                               std::span<const double> grid) {
    return residual(u, v.eval, grid, 1e-2, v.origin.singular() ? 0.05 : 0.25);
}

}  // namespace solvable
