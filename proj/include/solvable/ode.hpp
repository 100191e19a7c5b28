#pragma once

// Zero-energy radial solutions: the regular solution, its companion built from
// the tail integral of 1/phi^2, asymptotic constants, node counting and the
// bound-state bound.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "solvable/errors.hpp"
#include "solvable/potential.hpp"
#include "solvable/quadrature.hpp"
#include "solvable/tabulated.hpp"

namespace solvable {

namespace ode {

using State = std::array<double, 2>;

/// Dormand-Prince 5(4) integration of u'' = V(r) u from (r0, y0) to r1.
///
/// `scale` carries the running magnitude of each component and sets the
/// absolute part of the error control. Throws IntegrationError on step underflow.
class DormandPrince {
public:
    DormandPrince(const std::function<double(double)>& potential, double rtol)
        : potential_(potential), rtol_(rtol) {}

    State advance(double r0, double r1, State y) {
        const double dir = r1 > r0 ? 1.0 : -1.0;
        double r = r0;
        double h = step_ > 0.0 ? std::min(step_, std::abs(r1 - r0)) : std::abs(r1 - r0);
        update_scale(y);
        while (dir * (r1 - r) > 0.0) {
            const double remaining = std::abs(r1 - r);
            bool last = false;
            if (h >= remaining) {
                h = remaining;
                last = true;
            }
            State y_new{};
            const double err = attempt(r, dir * h, y, y_new);
            if (err <= 1.0) {
                r = last ? r1 : r + dir * h;
                y = y_new;
                update_scale(y);
                if (!std::isfinite(y[0]) || !std::isfinite(y[1])) {
                    throw IntegrationError("solution overflowed", r);
                }
                const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
                if (!last) step_ = h * grow;
                else step_ = std::max(step_, h);
                h = h * grow;
            } else {
                h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
                if (h < 1e-15 * std::max(std::abs(r), 1e-300)) {
                    throw IntegrationError("step size underflow at r = " + std::to_string(r), r);
                }
            }
        }
        return y;
    }

private:
    State rhs(double r, const State& y) const { return {y[1], potential_(r) * y[0]}; }

    void update_scale(const State& y) {
        scale_[0] = std::max(scale_[0], std::abs(y[0]));
        scale_[1] = std::max(scale_[1], std::abs(y[1]));
    }

    double attempt(double r, double h, const State& y, State& out) const {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                                a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
        auto axpy = [&](std::initializer_list<std::pair<double, const State*>> terms) {
            State s = y;
            for (const auto& [w, k] : terms) {
                s[0] += h * w * (*k)[0];
                s[1] += h * w * (*k)[1];
            }
            return s;
        };
        const State k1 = rhs(r, y);
        const State k2 = rhs(r + c2 * h, axpy({{a21, &k1}}));
        const State k3 = rhs(r + c3 * h, axpy({{a31, &k1}, {a32, &k2}}));
        const State k4 = rhs(r + c4 * h, axpy({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const State k5 = rhs(r + c5 * h, axpy({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const State k6 = rhs(r + h, axpy({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        out = axpy({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const State k7 = rhs(r + h, out);
        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double tol = rtol_ * (std::max(std::abs(y[i]), std::abs(out[i])) + 1e-3 * scale_[i]) +
                               std::numeric_limits<double>::min();
            err = std::max(err, std::abs(e) / tol);
        }
        return err;
    }

    const std::function<double(double)>& potential_;
    double rtol_;
    double step_ = 0.0;
    State scale_{0.0, 0.0};
};

/// Integrates across consecutive mesh nodes starting at `from` (inclusive) towards `to`.
inline void sweep(const std::function<double(double)>& potential, const std::vector<double>& mesh,
                  std::size_t from, std::size_t to, State seed, double rtol, std::vector<double>& u,
                  std::vector<double>& du) {
    DormandPrince stepper(potential, rtol);
    u[from] = seed[0];
    du[from] = seed[1];
    State y = seed;
    if (to > from) {
        for (std::size_t i = from; i < to; ++i) {
            y = stepper.advance(mesh[i], mesh[i + 1], y);
            u[i + 1] = y[0];
            du[i + 1] = y[1];
        }
    } else {
        for (std::size_t i = from; i > to; --i) {
            y = stepper.advance(mesh[i], mesh[i - 1], y);
            u[i - 1] = y[0];
            du[i - 1] = y[1];
        }
    }
}

}  // namespace ode

/// WKB seeding radius for V ~ g/r^n: where the seed amplitude is about e^-320.
inline double singular_seed_radius(const OriginClass& origin) {
    const double n = origin.n;
    return std::pow(2.0 * std::sqrt(origin.g) / ((n - 2.0) * 320.0), 2.0 / (n - 2.0));
}

/// Regular zero-energy solution (phi(0) = 0, phi'(0) = 1) on the mesh described by `spec`.
///
/// Regular potentials are seeded at r_min with the Taylor data r + V r^3/6;
/// centrifugal ones with r^{l+1}; singular repulsive V ~ g/r^n with the WKB form
/// r^{n/4} exp(-2 sqrt(g) r^{1-n/2}/(n-2)), exact for n = 4.
inline Tabulated solve_regular(const RadialPotential& v, const GridSpec& spec, double rtol = 1e-12) {
    double start = spec.r_min;
    if (v.origin.singular()) start = std::max(start, singular_seed_radius(v.origin));
    const Mesh mesh = make_mesh(spec, start);
    const auto& r = *mesh;
    const double r0 = r.front();

    ode::State seed{};
    switch (v.origin.kind) {
        case OriginClass::Kind::regular: {
            const double pot = v(r0);
            seed = {r0 + pot * r0 * r0 * r0 / 6.0, 1.0 + 0.5 * pot * r0 * r0};
            break;
        }
        case OriginClass::Kind::centrifugal: {
            const int ell = v.origin.ell;
            seed = {std::pow(r0, ell + 1), (ell + 1) * std::pow(r0, ell)};
            break;
        }
        case OriginClass::Kind::singular_repulsive: {
            const double n = v.origin.n;
            const double sg = std::sqrt(v.origin.g);
            const double phase = 2.0 * sg / (n - 2.0) * std::pow(r0, 1.0 - 0.5 * n);
            const double amp = std::pow(r0, 0.25 * n) * std::exp(-phase);
            seed = {amp, amp * (0.25 * n / r0 + sg * std::pow(r0, -0.5 * n))};
            break;
        }
    }

    std::vector<double> u(r.size());
    std::vector<double> du(r.size());
    ode::sweep(v.eval, r, 0, r.size() - 1, seed, rtol, u, du);
    std::vector<double> d2(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) d2[i] = v(r[i]) * u[i];
    return {mesh, std::move(u), std::move(du), std::move(d2),
            v.origin.singular() ? Tabulated::Below::exponential : Tabulated::Below::taylor};
}

/// Tabulates a closed-form solution (value and derivative) on the mesh, using u'' = V u.
inline Tabulated tabulate_solution(const RadialPotential& v, const std::function<double(double)>& phi,
                                   const std::function<double(double)>& dphi, const Mesh& mesh) {
    const auto& r = *mesh;
    std::vector<double> u(r.size()), du(r.size()), d2(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        u[i] = phi(r[i]);
        du[i] = dphi(r[i]);
        d2[i] = v(r[i]) * u[i];
    }
    return {mesh, std::move(u), std::move(du), std::move(d2),
            v.origin.singular() ? Tabulated::Below::exponential : Tabulated::Below::taylor};
}

/// Constants of the linear asymptote phi(r) = A r + B + o(1).
struct AsymptoticFit {
    double slope = 0.0;       // A
    double offset = 0.0;      // B
    double slope_half = 0.0;  // A from the window ending at half the radius
    double offset_half = 0.0;
    double radius = 0.0;
};

/// Extracts A and B from the solution at the end of its mesh, with tail corrections
/// A = phi'(R) + int_R^inf V phi and B = phi(R) - A R - int_R^inf (t-R) V phi, where
/// phi beyond R is replaced by its tangent line. Only short-range and exponential tails.
inline AsymptoticFit asymptotic_constants(const Tabulated& phi, const RadialPotential& v, double tol = 1e-12) {
    if (v.infinity.kind == InfinityClass::Kind::long_range_coulomb) {
        throw ConvergenceError("asymptotic constants are defined only for short-range tails");
    }
    const Decay d = v.decay();
    auto reduced = [&](double extra) {
        return d.kind == Decay::Kind::exponential ? Decay::exponential(0.5 * d.rate) : Decay::power(d.rate - extra);
    };
    auto fit_at = [&](double radius) {
        const double value = phi(radius);
        const double deriv = phi.derivative(radius);
        auto line = [&](double t) { return value + deriv * (t - radius); };
        const double slope_tail = tail_integral([&](double t) { return v(t) * line(t); }, radius, reduced(1.0), tol);
        const double slope = deriv + slope_tail;
        const double offset_tail = tail_integral([&](double t) { return (t - radius) * v(t) * line(t); }, radius,
                                                 reduced(2.0), tol);
        return std::pair{slope, value - slope * radius - offset_tail};
    };
    AsymptoticFit fit;
    fit.radius = phi.back();
    std::tie(fit.slope, fit.offset) = fit_at(fit.radius);
    std::tie(fit.slope_half, fit.offset_half) = fit_at(0.5 * fit.radius);
    if (!std::isfinite(fit.slope) || std::abs(fit.slope - fit.slope_half) > 1e-6 * std::max(1.0, std::abs(fit.slope))) {
        throw ConvergenceError("asymptotic slope is not stable under doubling of the fit window");
    }
    return fit;
}

/// Regular solution phi0 and second solution chi0 of a potential without bound states.
///
/// chi0 is seeded near r = 1 from chi0 = phi0 * int_r^inf dt/phi0^2 and then
/// integrated as a solution of the same equation in both directions; the
/// tail-integral values are kept only for the cross-check `formula_deviation`.
struct SolutionPair {
    RadialPotential potential;
    Tabulated regular;
    Tabulated second;
    double slope = 0.0;   // A
    double offset = 0.0;  // B
    double wronskian_drift = 0.0;
    double formula_deviation = 0.0;

    const Mesh& mesh() const { return regular.mesh_ptr(); }
    double start() const { return regular.front(); }

    /// max over the mesh of |phi0' chi0 - chi0' phi0 - 1|.
    double wronskian_drift_on(double lo, double hi) const {
        double worst = 0.0;
        const auto& r = regular.mesh();
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (r[i] < lo || r[i] > hi) continue;
            const double w = regular.firsts()[i] * second.values()[i] - second.firsts()[i] * regular.values()[i];
            worst = std::max(worst, std::abs(w - 1.0));
        }
        return worst;
    }
};

/// Builds chi0 from phi0. Throws ContractViolation if phi0 changes sign (bound states)
/// or grows with a nonpositive slope.
inline SolutionPair chi_from_phi(const RadialPotential& v, const Tabulated& phi, double rtol = 1e-12) {
    const auto& r = phi.mesh();
    const auto n = r.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(phi.values()[i] > 0.0)) {
            throw ContractViolation("regular solution is not positive at r = " + std::to_string(r[i]) +
                                    "; the potential has bound states");
        }
    }
    const AsymptoticFit fit = asymptotic_constants(phi, v);
    if (!(fit.slope > 0.0)) {
        throw ContractViolation("asymptotic slope A must be positive");
    }

    // I(r) = int_r^inf dt / phi^2, closed beyond the mesh by the linear asymptote.
    std::vector<double> tail(n);
    tail[n - 1] = 1.0 / (fit.slope * (fit.slope * r[n - 1] + fit.offset));
    auto inv_sq = [&](double t) {
        const double p = phi(t);
        return 1.0 / (p * p);
    };
    for (std::size_t i = n - 1; i-- > 0;) {
        tail[i] = tail[i + 1] + integrate(inv_sq, r[i], r[i + 1], 1e-13);
    }

    std::size_t match = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(std::log(r[i])) < std::abs(std::log(r[match]))) match = i;
    }
    const double pm = phi.values()[match];
    const ode::State seed{pm * tail[match], phi.firsts()[match] * tail[match] - 1.0 / pm};

    std::vector<double> chi(n), dchi(n), d2(n);
    ode::sweep(v.eval, r, match, n - 1, seed, rtol, chi, dchi);
    ode::sweep(v.eval, r, match, 0, seed, rtol, chi, dchi);

    SolutionPair pair;
    pair.potential = v;
    pair.regular = phi;
    pair.slope = fit.slope;
    pair.offset = fit.offset;
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = v(r[i]) * chi[i];
        const double formula = phi.values()[i] * tail[i];
        pair.formula_deviation = std::max(pair.formula_deviation, std::abs(chi[i] - formula) / std::abs(formula));
        if (!(chi[i] > 0.0)) {
            throw ContractViolation("second solution is not positive at r = " + std::to_string(r[i]));
        }
    }
    pair.second = Tabulated(phi.mesh_ptr(), std::move(chi), std::move(dchi), std::move(d2),
                            v.origin.singular() ? Tabulated::Below::exponential : Tabulated::Below::taylor);
    pair.wronskian_drift = pair.wronskian_drift_on(0.0, std::numeric_limits<double>::infinity());
    return pair;
}

/// Numerical pair for a potential: solve_regular followed by chi_from_phi.
inline SolutionPair solve_pair(const RadialPotential& v, const GridSpec& spec, double rtol = 1e-12) {
    return chi_from_phi(v, solve_regular(v, spec, rtol), rtol);
}

/// Result of a sign-change scan.
struct NodeCount {
    int count = 0;
    bool ambiguous = false;
    std::vector<double> locations;
    /// Sample interval holding each sign change.
    std::vector<std::pair<double, double>> brackets;
    std::vector<double> ambiguous_at;
};

/// Counts strict sign changes of sampled values for r > 0.
///
/// Samples with |psi| below noise * max|psi| are treated as unresolved; a run of
/// such samples with the same sign on both sides is reported as an ambiguous
/// (grazing) zero instead of being counted.
inline NodeCount count_nodes(std::span<const double> r, std::span<const double> psi, double noise = 1e-12) {
    NodeCount out;
    double scale = 0.0;
    for (double p : psi) scale = std::max(scale, std::abs(p));
    if (scale == 0.0) {
        out.ambiguous = true;
        return out;
    }
    const double floor = noise * scale;
    int last_sign = 0;
    double last_r = 0.0;
    bool pending_small = false;
    double small_at = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        if (std::abs(psi[i]) <= floor) {
            if (last_sign != 0 && !pending_small) {
                pending_small = true;
                small_at = r[i];
            }
            continue;
        }
        const int sign = psi[i] > 0.0 ? 1 : -1;
        if (last_sign != 0 && sign != last_sign) {
            ++out.count;
            out.locations.push_back(pending_small ? small_at : 0.5 * (last_r + r[i]));
            out.brackets.emplace_back(last_r, r[i]);
        } else if (last_sign != 0 && pending_small) {
            out.ambiguous = true;
            out.ambiguous_at.push_back(small_at);
        }
        pending_small = false;
        last_sign = sign;
        last_r = r[i];
    }
    return out;
}

/// Samples psi on (lo, hi] and refines the sampling until the count is stable.
inline NodeCount count_nodes(const std::function<double(double)>& psi, double lo, double hi, int samples = 2000,
                             double noise = 1e-12) {
    auto scan = [&](int m) {
        std::vector<double> r;
        std::vector<double> v;
        // Union of a log grid over the whole range and a linear grid above r = 1.
        const double split = std::clamp(1.0, lo, hi);
        for (int i = 0; i <= m; ++i) r.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / m));
        if (hi > split) {
            for (int i = 0; i <= m; ++i) r.push_back(split + (hi - split) * static_cast<double>(i) / m);
        }
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        v.reserve(r.size());
        for (double x : r) v.push_back(psi(x));
        return count_nodes(r, v, noise);
    };
    auto refine = [&](NodeCount nc) {
        for (std::size_t k = 0; k < nc.brackets.size(); ++k) {
            auto [a, b] = nc.brackets[k];
            double fa = psi(a);
            if (!(fa * psi(b) < 0.0)) continue;
            for (int it = 0; it < 100 && b - a > 1e-14 * std::max(1.0, b); ++it) {
                const double m = 0.5 * (a + b);
                const double fm = psi(m);
                if ((fm < 0.0) == (fa < 0.0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            nc.locations[k] = 0.5 * (a + b);
        }
        return nc;
    };
    NodeCount previous = scan(samples);
    for (int level = 1; level <= 4; ++level) {
        NodeCount next = scan(samples << level);
        if (next.count == previous.count && next.ambiguous == previous.ambiguous) return refine(std::move(next));
        previous = std::move(next);
    }
    return refine(std::move(previous));
}

/// Bargmann upper bound on the number of bound states, the integral of r|V| over (0, inf).
inline double bargmann_bound(const RadialPotential& v, double tol = 1e-8) {
    const auto report = integrability_report(v, tol);
    if (!report.full_finite) {
        throw IntegrabilityError("integral of r|V| diverges for potential " + v.name);
    }
    return report.full;
}

}  // namespace solvable
