#pragma once

// Radial meshes and tabulated functions with quintic Hermite interpolation.

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "solvable/errors.hpp"

namespace solvable {

/// Composite radial mesh: log-spaced near the origin, linear over the working
/// range [linear_start, r_max], geometric out to r_far.
struct GridSpec {
    double r_min = 1e-6;
    int per_decade = 100;
    double linear_start = 1.0;
    double r_max = 40.0;
    double linear_step = 0.01;
    double r_far = 2e4;
    double far_ratio = 1.005;

    /// Default mesh for potentials with an exponential tail.
    static GridSpec exponential_tail() { return {}; }

    /// Default mesh for potentials with a power-law tail.
    static GridSpec power_tail() {
        GridSpec spec;
        spec.r_max = 200.0;
        spec.linear_step = 0.02;
        return spec;
    }
};

using Mesh = std::shared_ptr<const std::vector<double>>;

/// Builds the mesh, optionally starting above `spec.r_min`.
inline Mesh make_mesh(const GridSpec& spec, double start = 0.0) {
    const double lo = std::max(spec.r_min, start);
    if (!(lo > 0.0) || !(spec.r_max > spec.linear_start) || !(spec.r_far >= spec.r_max)) {
        throw InvalidParameter("grid requires 0 < r_min < linear_start < r_max <= r_far");
    }
    std::vector<double> r;
    const double log_end = std::max(lo, spec.linear_start);
    if (log_end > lo) {
        const auto n = static_cast<int>(std::ceil(std::log10(log_end / lo) * spec.per_decade));
        for (int i = 0; i < n; ++i) r.push_back(lo * std::pow(log_end / lo, static_cast<double>(i) / n));
    }
    const auto n_lin = static_cast<int>(std::ceil((spec.r_max - log_end) / spec.linear_step));
    for (int i = 0; i < n_lin; ++i) {
        r.push_back(log_end + (spec.r_max - log_end) * static_cast<double>(i) / n_lin);
    }
    if (spec.r_far > spec.r_max) {
        const auto n_far = static_cast<int>(std::ceil(std::log(spec.r_far / spec.r_max) / std::log(spec.far_ratio)));
        for (int i = 0; i < n_far; ++i) {
            r.push_back(spec.r_max * std::pow(spec.r_far / spec.r_max, static_cast<double>(i) / n_far));
        }
    }
    r.push_back(spec.r_far);
    r.erase(std::unique(r.begin(), r.end()), r.end());
    return std::make_shared<const std::vector<double>>(std::move(r));
}

/// Value and first two derivatives at a point.
struct Jet {
    double value = 0.0;
    double first = 0.0;
    double second = 0.0;
};

/// A function known on a mesh with its first and second derivatives.
///
/// Interior points use the quintic Hermite interpolant, which is C^2 across
/// mesh nodes. Above the mesh the function continues linearly (C^1); below it
/// continues by its second-order Taylor polynomial or, for positive functions
/// with an essential singularity at the origin, as exp(linear) in the log.
class Tabulated {
public:
    enum class Below { taylor, exponential };

    Tabulated() = default;

    Tabulated(Mesh mesh, std::vector<double> value, std::vector<double> first, std::vector<double> second,
              Below below = Below::taylor)
        : data_(std::make_shared<Data>(Data{std::move(mesh), std::move(value), std::move(first),
                                             std::move(second), below})) {
        const auto n = data_->mesh->size();
        if (n < 2 || data_->value.size() != n || data_->first.size() != n || data_->second.size() != n) {
            throw InvalidParameter("tabulated function needs matching arrays on a mesh of >= 2 points");
        }
    }

    bool empty() const noexcept { return !data_; }
    const std::vector<double>& mesh() const { return *data_->mesh; }
    const Mesh& mesh_ptr() const { return data_->mesh; }
    std::span<const double> values() const { return data_->value; }
    std::span<const double> firsts() const { return data_->first; }
    std::span<const double> seconds() const { return data_->second; }
    double front() const { return data_->mesh->front(); }
    double back() const { return data_->mesh->back(); }

    double operator()(double r) const { return jet(r).value; }
    double derivative(double r) const { return jet(r).first; }

    Jet jet(double r) const {
        const auto& m = *data_->mesh;
        const auto& f = data_->value;
        const auto& d = data_->first;
        const auto& s = data_->second;
        if (r >= m.back()) {
            const double dr = r - m.back();
            return {f.back() + d.back() * dr, d.back(), 0.0};
        }
        if (r <= m.front()) {
            const double dr = r - m.front();
            if (data_->below == Below::exponential && f.front() > 0.0) {
                const double rate = d.front() / f.front();
                const double v = f.front() * std::exp(rate * dr);
                return {v, rate * v, rate * rate * v};
            }
            return {f.front() + d.front() * dr + 0.5 * s.front() * dr * dr, d.front() + s.front() * dr,
                    s.front()};
        }
        const auto it = std::upper_bound(m.begin(), m.end(), r);
        const auto i = static_cast<std::size_t>(it - m.begin()) - 1;
        const double h = m[i + 1] - m[i];
        const double t = (r - m[i]) / h;
        const double t2 = t * t;
        const double t3 = t2 * t;
        const double t4 = t3 * t;
        const double t5 = t4 * t;

        const double h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        const double h0p = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        const double h0pp = -60.0 * t + 180.0 * t2 - 120.0 * t3;
        const double g0 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        const double g0p = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        const double g0pp = -36.0 * t + 96.0 * t2 - 60.0 * t3;
        const double g1 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        const double g1p = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        const double g1pp = -24.0 * t + 84.0 * t2 - 60.0 * t3;
        const double k0 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        const double k0p = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
        const double k0pp = 0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3);
        const double k1 = 0.5 * (t3 - 2.0 * t4 + t5);
        const double k1p = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
        const double k1pp = 0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3);

        const double df = f[i] - f[i + 1];
        Jet out;
        out.value = f[i + 1] + df * h0 + h * (d[i] * g0 + d[i + 1] * g1) + h * h * (s[i] * k0 + s[i + 1] * k1);
        out.first = df * h0p / h + d[i] * g0p + d[i + 1] * g1p + h * (s[i] * k0p + s[i + 1] * k1p);
        out.second = df * h0pp / (h * h) + (d[i] * g0pp + d[i + 1] * g1pp) / h + s[i] * k0pp + s[i + 1] * k1pp;
        return out;
    }

private:
    struct Data {
        Mesh mesh;
        std::vector<double> value;
        std::vector<double> first;
        std::vector<double> second;
        Below below;
    };
    std::shared_ptr<const Data> data_;
};

}  // namespace solvable
