#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "solvable/errors.hpp"
#include "solvable/quadrature.hpp"
#include "solvable/tabulated.hpp"

namespace solvable {

/// Behaviour of a potential at the origin.
struct OriginClass {
    enum class Kind { regular, centrifugal, singular_repulsive };
    Kind kind = Kind::regular;
    int ell = 0;       // centrifugal
    double n = 0.0;    // singular_repulsive: V ~ g / r^n
    double g = 0.0;

    static OriginClass regular() { return {}; }
    static OriginClass centrifugal(int ell) {
        if (ell < 0) throw InvalidParameter("angular momentum must be nonnegative");
        return {Kind::centrifugal, ell, 0.0, 0.0};
    }
    static OriginClass singular_repulsive(double n, double g) {
        if (!(n > 2.0)) throw InvalidParameter("singular potential requires n > 2");
        if (!(g > 0.0)) throw InvalidParameter("singular potential must be repulsive (g > 0)");
        return {Kind::singular_repulsive, 0, n, g};
    }
    bool singular() const { return kind == Kind::singular_repulsive; }
};

/// Behaviour of a potential at infinity.
struct InfinityClass {
    enum class Kind { short_range, long_range_coulomb, exponential };
    Kind kind = Kind::exponential;
    double power = 0.0;   // short_range: |V| <= C r^-power
    double alpha = 0.0;   // long_range_coulomb: V ~ alpha / r
    double rate = 1.0;    // exponential: |V| <= C e^{-rate r}

    static InfinityClass short_range(double p) {
        if (!(p > 2.0)) throw InvalidParameter("short-range class needs decay faster than r^-2");
        return {Kind::short_range, p, 0.0, 0.0};
    }
    static InfinityClass coulomb(double alpha) { return {Kind::long_range_coulomb, 1.0, alpha, 0.0}; }
    static InfinityClass exponential(double rate) {
        if (!(rate > 0.0)) throw InvalidParameter("exponential class needs a positive rate");
        return {Kind::exponential, 0.0, 0.0, rate};
    }

    /// Decay of |V| for tail integrals.
    Decay decay() const {
        switch (kind) {
            case Kind::exponential: return Decay::exponential(rate);
            case Kind::short_range: return Decay::power(power);
            case Kind::long_range_coulomb: return Decay::power(1.0 + 1e-9);
        }
        return Decay::power(power);
    }

    /// Mesh suited to this tail.
    GridSpec grid() const {
        return kind == Kind::exponential ? GridSpec::exponential_tail() : GridSpec::power_tail();
    }
};

/// The slower-decaying of two tail classes.
inline InfinityClass weaker_tail(const InfinityClass& a, const InfinityClass& b) {
    using K = InfinityClass::Kind;
    if (a.kind == K::long_range_coulomb) return a;
    if (b.kind == K::long_range_coulomb) return b;
    if (a.kind == K::short_range && b.kind == K::short_range) return a.power <= b.power ? a : b;
    if (a.kind == K::short_range) return a;
    if (b.kind == K::short_range) return b;
    return a.rate <= b.rate ? a : b;
}

/// An evaluable potential on (0, infinity) with its regularity classification.
struct RadialPotential {
    std::string name;
    std::function<double(double)> eval;
    /// Optional dV/dr; central differences are used when absent.
    std::function<double(double)> slope_fn;
    OriginClass origin;
    InfinityClass infinity;
    std::map<std::string, double> params;

    double operator()(double r) const { return eval(r); }

    double slope(double r) const {
        if (slope_fn) return slope_fn(r);
        const double h = 1e-5 * std::max(r, 1e-3);
        const double lo = std::max(r - h, 0.5 * r);
        const double hi = lo + 2.0 * h;
        return (eval(hi) - eval(lo)) / (hi - lo);
    }

    /// Decay class of |V| at infinity.
    Decay decay() const { return infinity.decay(); }

    /// Default mesh; singular origins get ten times the log density.
    GridSpec grid() const {
        GridSpec spec = infinity.grid();
        if (origin.singular()) spec.per_decade = 1000;
        return spec;
    }
};

inline RadialPotential zero_potential() {
    RadialPotential v;
    v.name = "zero";
    v.eval = [](double) { return 0.0; };
    v.slope_fn = [](double) { return 0.0; };
    v.origin = OriginClass::regular();
    v.infinity = InfinityClass::exponential(1.0);
    return v;
}

/// lambda * e^{-mu r}; also the auxiliary potential of most examples.
inline RadialPotential exponential_potential(double lambda, double mu) {
    if (!(mu > 0.0)) throw InvalidParameter("exponential potential requires mu > 0");
    RadialPotential v;
    v.name = "exponential";
    v.eval = [=](double r) { return lambda * std::exp(-mu * r); };
    v.slope_fn = [=](double r) { return -mu * lambda * std::exp(-mu * r); };
    v.origin = OriginClass::regular();
    v.infinity = InfinityClass::exponential(mu);
    v.params = {{"lambda", lambda}, {"mu", mu}};
    return v;
}

inline IntegrabilityReport integrability_report(const RadialPotential& v, double tol = 1e-8) {
    return integrability_report(v.eval, v.decay(), tol);
}

}  // namespace solvable
