#pragma once

// Closed-form solvable potentials and their zero-energy regular solutions.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "solvable/errors.hpp"
#include "solvable/ode.hpp"
#include "solvable/potential.hpp"
#include "solvable/special_functions.hpp"
#include "solvable/tabulated.hpp"

namespace solvable {

/// A solved radial problem psi'' = V psi with psi(0) = 0: the inner slot of a composition.
struct ExplicitSolution {
    std::string label;
    RadialPotential potential;
    /// Value and first derivative; `second` is filled with V psi.
    std::function<Jet(double)> psi;

    double operator()(double x) const { return psi(x).value; }
};

namespace detail {

/// sinh(sqrt(c) z)/sqrt(c), continued analytically through c = 0 (sin branch for c < 0).
inline double sinhc(double c, double z) {
    const double w = c * z * z;
    if (std::abs(w) < 1e-3) {
        double term = z;
        double sum = z;
        for (int k = 1; k < 8; ++k) {
            term *= w / ((2.0 * k) * (2.0 * k + 1.0));
            sum += term;
        }
        return sum;
    }
    if (c > 0.0) return std::sinh(std::sqrt(c) * z) / std::sqrt(c);
    return std::sin(std::sqrt(-c) * z) / std::sqrt(-c);
}

/// z-derivative of sinhc: cosh(sqrt(c) z), or cos for c < 0.
inline double coshc(double c, double z) {
    const double w = c * z * z;
    if (std::abs(w) < 1e-3) {
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 8; ++k) {
            term *= w / ((2.0 * k - 1.0) * (2.0 * k));
            sum += term;
        }
        return sum;
    }
    if (c > 0.0) return std::cosh(std::sqrt(c) * z);
    return std::cos(std::sqrt(-c) * z);
}

}  // namespace detail

enum class CatalogName { zero, rational_quartic, inverse_square_shape, exponential, singular_quartic, coulomb };

/// Descriptive row of the catalog listing.
struct CatalogInfo {
    CatalogName name;
    std::string key;   // recipe name
    std::string code;  // short code
    std::string form;  // the potential
    std::string solution;
    std::vector<std::string> tags;
    std::map<std::string, double> defaults;
    std::string validity;
    std::string coupling;  // parameter multiplied by the inner scale
};

inline const std::vector<CatalogInfo>& catalog_list() {
    static const std::vector<CatalogInfo> list = {
        {CatalogName::zero, "zero", "zero", "0", "r", {"trivial", "regular", "short-range"}, {}, "none", ""},
        {CatalogName::rational_quartic,
         "rational_quartic",
         "O",
         "lambda a^2 / (1 + a r)^4",
         "((1 + a r)/(a sqrt(lambda))) sinh(sqrt(lambda) a r / (1 + a r))",
         {"regular", "rational", "short-range"},
         {{"lambda", 4.0}, {"a", 1.0}},
         "a > 0; lambda real (sin branch for lambda < 0)",
         "lambda"},
        {CatalogName::inverse_square_shape,
         "inverse_square_shape",
         "P",
         "lambda b^2 / (b^2 + r^2)^2",
         "((b^2 + r^2)^(1/2)/sqrt(lambda - 1)) sinh(sqrt(lambda - 1) atan(r/b))",
         {"regular", "rational", "short-range"},
         {{"lambda", 2.0}, {"b", 1.0}},
         "b > 0; lambda real (sin branch for lambda < 1, limit at lambda = 1)",
         "lambda"},
        {CatalogName::exponential,
         "exponential",
         "Q",
         "lambda exp(-mu r)",
         "alpha I0(2 sqrt(lambda)/mu e^{-mu r/2}) + beta K0(...); J0/Y0 for lambda < 0",
         {"regular", "exponential", "bessel"},
         {{"lambda", 1.0}, {"mu", 1.0}},
         "mu > 0; lambda real",
         "lambda"},
        {CatalogName::singular_quartic,
         "singular_quartic",
         "RS",
         "g / r^n",
         "phi0 = r exp(-sqrt(g)/r), chi0 = (r/sqrt(g)) sinh(sqrt(g)/r)",
         {"singular", "power", "short-range"},
         {{"g", 1.0}, {"n", 4.0}},
         "g > 0; n = 4",
         "g"},
        {CatalogName::coulomb,
         "coulomb",
         "TU",
         "alpha / r",
         "sqrt(r/alpha) I1(2 sqrt(alpha r)); J1 for alpha < 0",
         {"long-range", "bessel", "coulomb"},
         {{"alpha", 1.0}},
         "alpha real",
         "alpha"},
    };
    return list;
}

/// Looks up a catalog row by recipe key or short code.
inline const CatalogInfo& catalog_info(const std::string& name) {
    for (const auto& info : catalog_list()) {
        if (info.key == name || info.code == name) return info;
    }
    throw InvalidParameter("unknown catalog entry '" + name + "'");
}

inline const CatalogInfo& catalog_info(CatalogName name) {
    for (const auto& info : catalog_list()) {
        if (info.name == name) return info;
    }
    throw InvalidParameter("unknown catalog entry");
}

/// A catalog potential with its closed-form regular solution.
struct CatalogEntry {
    CatalogName name = CatalogName::zero;
    std::map<std::string, double> params;
    RadialPotential potential;
    /// phi with phi(0) = 0 (phi'(0) = 1 for the regular entries).
    std::function<Jet(double)> phi;
    /// Second solution, when known in closed form.
    std::function<Jet(double)> chi;
    /// Asymptotic constants of phi = A r + B + o(1), when the tail is short range.
    std::optional<double> slope;
    std::optional<double> offset;

    const CatalogInfo& info() const { return catalog_info(name); }

    ExplicitSolution solution() const { return {info().code, potential, phi}; }

    /// Radius where the closed forms become representable (singular entries only).
    double start() const {
        return potential.origin.singular() ? singular_seed_radius(potential.origin) : 0.0;
    }

    /// phi0/chi0 pair on the standard mesh, from the closed forms where available.
    SolutionPair pair(std::optional<GridSpec> spec = std::nullopt) const {
        const GridSpec grid = spec.value_or(potential.grid());
        const Mesh mesh = make_mesh(grid, start());
        auto value = [&](double r) { return phi(r).value; };
        auto first = [&](double r) { return phi(r).first; };
        const Tabulated regular = tabulate_solution(potential, value, first, mesh);
        if (!chi) return chi_from_phi(potential, regular);
        SolutionPair out;
        out.potential = potential;
        out.regular = regular;
        out.second = tabulate_solution(
            potential, [&](double r) { return chi(r).value; }, [&](double r) { return chi(r).first; }, mesh);
        out.slope = slope.value_or(0.0);
        out.offset = offset.value_or(0.0);
        out.wronskian_drift = out.wronskian_drift_on(0.0, std::numeric_limits<double>::infinity());
        return out;
    }
};

namespace detail {

inline double param(const std::map<std::string, double>& params, const CatalogInfo& info, const std::string& key) {
    if (auto it = params.find(key); it != params.end()) return it->second;
    return info.defaults.at(key);
}

inline CatalogEntry rational_quartic(double lambda, double a) {
    if (!(a > 0.0)) throw InvalidParameter("rational_quartic requires a > 0");
    CatalogEntry e;
    e.potential.name = "rational_quartic";
    e.potential.eval = [=](double r) { return lambda * a * a / std::pow(1.0 + a * r, 4); };
    e.potential.slope_fn = [=](double r) { return -4.0 * lambda * a * a * a / std::pow(1.0 + a * r, 5); };
    e.potential.origin = OriginClass::regular();
    e.potential.infinity = InfinityClass::short_range(4.0);
    e.phi = [=](double r) {
        const double s = 1.0 + a * r;
        const double u = a * r / s;
        const double value = s / a * sinhc(lambda, u);
        return Jet{value, sinhc(lambda, u) + coshc(lambda, u) / s, lambda * a * a / std::pow(s, 4) * value};
    };
    e.slope = sinhc(lambda, 1.0);
    e.offset = (sinhc(lambda, 1.0) - coshc(lambda, 1.0)) / a;
    return e;
}

inline CatalogEntry inverse_square_shape(double lambda, double b) {
    if (!(b > 0.0)) throw InvalidParameter("inverse_square_shape requires b > 0");
    CatalogEntry e;
    const double c = lambda - 1.0;
    e.potential.name = "inverse_square_shape";
    e.potential.eval = [=](double r) {
        const double q = b * b + r * r;
        return lambda * b * b / (q * q);
    };
    e.potential.slope_fn = [=](double r) {
        const double q = b * b + r * r;
        return -4.0 * lambda * b * b * r / (q * q * q);
    };
    e.potential.origin = OriginClass::regular();
    e.potential.infinity = InfinityClass::short_range(4.0);
    e.phi = [=](double r) {
        const double rho = std::hypot(b, r);
        const double theta = std::atan2(r, b);
        const double s = sinhc(c, theta);
        const double value = rho * s;
        return Jet{value, (r * s + b * coshc(c, theta)) / rho, lambda * b * b / std::pow(rho, 4) * value};
    };
    const double half_pi = 0.5 * std::numbers::pi;
    e.slope = sinhc(c, half_pi);
    e.offset = -b * coshc(c, half_pi);
    return e;
}

inline CatalogEntry exponential_entry(double lambda, double mu) {
    if (!(mu > 0.0)) throw InvalidParameter("exponential requires mu > 0");
    CatalogEntry e;
    e.potential = exponential_potential(lambda, mu);
    const double kappa = 2.0 * std::sqrt(std::abs(lambda)) / mu;
    if (lambda == 0.0) {
        e.phi = [](double r) { return Jet{r, 1.0, 0.0}; };
        e.slope = 1.0;
        e.offset = 0.0;
        return e;
    }
    // Small r: cancellation in the Bessel combination, use the power series of the
    // regular solution. (k+2)(k+1) c_{k+2} = lambda sum_j (-mu)^j/j! c_{k-j}.
    std::vector<double> c(48, 0.0);
    c[1] = 1.0;
    for (std::size_t k = 0; k + 2 < c.size(); ++k) {
        double acc = 0.0, w = 1.0;
        for (std::size_t j = 0; j <= k; ++j) {
            acc += w * c[k - j];
            w *= -mu / static_cast<double>(j + 1);
        }
        c[k + 2] = lambda * acc / static_cast<double>((k + 2) * (k + 1));
    }
    const double series_limit = 0.5 * std::min({1.0, 1.0 / mu, 1.0 / std::sqrt(std::abs(lambda))});
    auto taylor = [=](double r) {
        double value = 0.0, d1 = 0.0;
        for (std::size_t k = c.size(); k-- > 1;) {
            value = value * r + c[k];
            d1 = d1 * r + static_cast<double>(k) * c[k];
        }
        value *= r;
        return Jet{value, d1, lambda * std::exp(-mu * r) * value};
    };
    const double log_half_kappa = std::log(0.5 * kappa);
    using namespace bessel;
    if (lambda > 0.0) {
        const double i0k = I0(kappa), k0k = K0(kappa);
        e.slope = i0k;
        e.offset = -2.0 / mu * (i0k * (log_half_kappa + kEulerGamma) + k0k);
        const double a = *e.slope, b = *e.offset;
        e.phi = [=](double r) {
            if (r < series_limit) return taylor(r);
            const double z = kappa * std::exp(-0.5 * mu * r);
            const double pot = lambda * std::exp(-mu * r);
            if (z < 1e-9) {
                const double value = a * r + b;
                return Jet{value, a, pot * value};
            }
            const double value = 2.0 / mu * (i0k * K0(z) - k0k * I0(z));
            return Jet{value, z * (i0k * K1(z) + k0k * I1(z)), pot * value};
        };
    } else {
        const double j0k = J0(kappa), y0k = Y0(kappa);
        e.slope = j0k;
        e.offset = std::numbers::pi / mu * y0k - 2.0 / mu * j0k * (log_half_kappa + kEulerGamma);
        const double a = *e.slope, b = *e.offset;
        e.phi = [=](double r) {
            if (r < series_limit) return taylor(r);
            const double y = kappa * std::exp(-0.5 * mu * r);
            const double pot = lambda * std::exp(-mu * r);
            if (y < 1e-9) {
                const double value = a * r + b;
                return Jet{value, a, pot * value};
            }
            const double value = std::numbers::pi / mu * (y0k * J0(y) - j0k * Y0(y));
            return Jet{value, 0.5 * std::numbers::pi * y * (y0k * J1(y) - j0k * Y1(y)), pot * value};
        };
    }
    return e;
}

inline CatalogEntry singular_quartic(double g, double n) {
    if (n != 4.0) throw InvalidParameter("singular_quartic is solvable in closed form only for n = 4");
    if (!(g > 0.0)) throw InvalidParameter("singular_quartic requires g > 0");
    CatalogEntry e;
    const double sg = std::sqrt(g);
    e.potential.name = "singular_quartic";
    e.potential.origin = OriginClass::singular_repulsive(4.0, g);
    e.potential.eval = [=](double r) { return g / (r * r * r * r); };
    e.potential.slope_fn = [=](double r) { return -4.0 * g / (r * r * r * r * r); };
    e.potential.infinity = InfinityClass::short_range(4.0);
    e.phi = [=](double r) {
        if (!(r > 0.0)) return Jet{0.0, 0.0, 0.0};
        const double damp = std::exp(-sg / r);
        const double value = r * damp;
        return Jet{value, damp * (1.0 + sg / r), g / (r * r * r * r) * value};
    };
    e.chi = [=](double r) {
        const double s = sg / r;
        const double value = std::sinh(s) / s;
        return Jet{value, std::sinh(s) / sg - std::cosh(s) / r, g / (r * r * r * r) * value};
    };
    e.slope = 1.0;
    e.offset = -sg;
    return e;
}

inline CatalogEntry coulomb(double alpha) {
    CatalogEntry e;
    e.potential.name = "coulomb";
    e.potential.eval = [=](double x) { return alpha / x; };
    e.potential.slope_fn = [=](double x) { return -alpha / (x * x); };
    e.potential.origin = OriginClass::regular();
    e.potential.infinity = InfinityClass::coulomb(alpha);
    const double k = std::abs(alpha);
    e.phi = [=](double x) {
        if (alpha == 0.0) return Jet{x, 1.0, 0.0};
        const double z = 2.0 * std::sqrt(k * x);
        if (z < 1e-6) {
            const double value = x + 0.5 * alpha * x * x;
            return Jet{value, 1.0 + alpha * x, alpha * (1.0 + 0.5 * alpha * x)};
        }
        using namespace bessel;
        const double value = alpha > 0.0 ? z / (2.0 * k) * I1(z) : z / (2.0 * k) * J1(z);
        return Jet{value, alpha > 0.0 ? I0(z) : J0(z), alpha / x * value};
    };
    return e;
}

}  // namespace detail

/// Builds a catalog entry; unknown parameter keys and violated constraints are rejected.
inline CatalogEntry make_entry(CatalogName name, const std::map<std::string, double>& params = {}) {
    const CatalogInfo& info = catalog_info(name);
    for (const auto& [key, value] : params) {
        if (!info.defaults.contains(key)) {
            throw InvalidParameter("entry '" + info.key + "' has no parameter '" + key + "'");
        }
        if (!std::isfinite(value)) throw InvalidParameter("parameter '" + key + "' must be finite");
    }
    auto p = [&](const char* key) { return detail::param(params, info, key); };
    CatalogEntry e;
    switch (name) {
        case CatalogName::zero:
            e.potential = zero_potential();
            e.phi = [](double r) { return Jet{r, 1.0, 0.0}; };
            e.chi = [](double) { return Jet{1.0, 0.0, 0.0}; };
            e.slope = 1.0;
            e.offset = 0.0;
            break;
        case CatalogName::rational_quartic: e = detail::rational_quartic(p("lambda"), p("a")); break;
        case CatalogName::inverse_square_shape: e = detail::inverse_square_shape(p("lambda"), p("b")); break;
        case CatalogName::exponential: e = detail::exponential_entry(p("lambda"), p("mu")); break;
        case CatalogName::singular_quartic: e = detail::singular_quartic(p("g"), p("n")); break;
        case CatalogName::coulomb: e = detail::coulomb(p("alpha")); break;
    }
    e.name = name;
    e.params = info.defaults;
    for (const auto& [key, value] : params) e.params[key] = value;
    e.potential.name = info.key;
    e.potential.params = e.params;
    return e;
}

inline CatalogEntry make_entry(const std::string& name, const std::map<std::string, double>& params = {}) {
    return make_entry(catalog_info(name).name, params);
}

/// The same entry with its coupling constant multiplied by `scale`.
inline CatalogEntry scaled(const CatalogEntry& entry, double scale) {
    if (scale == 1.0) return entry;
    const CatalogInfo& info = entry.info();
    if (info.coupling.empty()) return entry;
    auto params = entry.params;
    params[info.coupling] *= scale;
    return make_entry(entry.name, params);
}

/// Catalog rows carrying `tag`, in listing order.
inline std::vector<CatalogInfo> catalog_filter(const std::string& tag) {
    std::vector<CatalogInfo> out;
    for (const auto& info : catalog_list()) {
        if (tag.empty() || std::find(info.tags.begin(), info.tags.end(), tag) != info.tags.end()) {
            out.push_back(info);
        }
    }
    return out;
}

}  // namespace solvable
