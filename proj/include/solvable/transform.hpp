#pragma once

// Composition engines. Every engine writes the composed solution as
//     phi(r) = c(r) psi(x(r)),   dx/dr = 1/c(r)^2,
// where the carrier c solves c'' = V_aux c. The composed potential is
// V_aux + c^{-4} V(x). Engines differ only in how c is built:
//   theorem1    c = chi0                        V_aux = V0
//   grosse      c = exp(-U0)                    V_aux = V0 + W0^2
//   theorem2    c = chi0 exp(-U1)               V_aux = V0 + V1 + chi0^{-4} W1^2
//   higher_ell  c = r^{-l} exp(-U_l)            V_aux = V0 + r^{4l} W_l^2 + l(l+1)/r^2

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "solvable/catalog.hpp"
#include "solvable/errors.hpp"
#include "solvable/ode.hpp"
#include "solvable/potential.hpp"
#include "solvable/quadrature.hpp"
#include "solvable/residual.hpp"
#include "solvable/tabulated.hpp"

namespace solvable {

enum class Engine { theorem1, grosse, theorem2, higher_ell };

inline std::string engine_name(Engine e) {
    switch (e) {
        case Engine::theorem1: return "theorem1";
        case Engine::grosse: return "grosse";
        case Engine::theorem2: return "theorem2";
        case Engine::higher_ell: return "higher_ell";
    }
    return "unknown";
}

inline Engine parse_engine(const std::string& name) {
    for (Engine e : {Engine::theorem1, Engine::grosse, Engine::theorem2, Engine::higher_ell}) {
        if (engine_name(e) == name) return e;
    }
    throw InvalidParameter("unknown engine '" + name + "'");
}

/// Strictly increasing change of variable r -> x with derivative and inverse.
class MonotoneMap {
public:
    MonotoneMap() = default;

    explicit MonotoneMap(Tabulated forward) : forward_(std::move(forward)) {
        const auto x = forward_.values();
        const auto dx = forward_.firsts();
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!(dx[i] > 0.0) || (i > 0 && !(x[i] > x[i - 1]))) {
                throw ContractViolation("map is not strictly increasing at r = " +
                                        std::to_string(forward_.mesh()[i]));
            }
        }
    }

    double operator()(double r) const { return forward_(r); }
    Jet jet(double r) const { return forward_.jet(r); }
    double derivative(double r) const { return forward_.derivative(r); }
    const Tabulated& forward() const { return forward_; }

    /// r(x): bracketed Newton iteration on the tabulated forward map.
    double inverse(double x) const {
        const auto& m = forward_.mesh();
        const auto v = forward_.values();
        if (x >= v.back()) return m.back() + (x - v.back()) / forward_.firsts().back();
        double lo = 0.0;
        double hi = m.front();
        if (x > v.front()) {
            const auto it = std::upper_bound(v.begin(), v.end(), x);
            const auto i = static_cast<std::size_t>(it - v.begin());
            lo = m[i - 1];
            hi = m[i];
        } else if (x <= 0.0) {
            return 0.0;
        }
        double r = lo + (hi - lo) * 0.5;
        for (int iter = 0; iter < 100; ++iter) {
            const Jet j = forward_.jet(r);
            const double f = j.value - x;
            if (f > 0.0) hi = r;
            else lo = r;
            double next = j.first > 0.0 ? r - f / j.first : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::abs(next - r) <= 1e-15 * (1.0 + r) || hi - lo <= 1e-15 * (1.0 + r)) return next;
            r = next;
        }
        return r;
    }

    /// max |r(x(r)) - r| / (1 + r) over the given radii.
    double roundtrip_error(std::span<const double> radii) const {
        double worst = 0.0;
        for (double r : radii) worst = std::max(worst, std::abs(inverse(forward_(r)) - r) / (1.0 + r));
        return worst;
    }

private:
    Tabulated forward_;
};

/// x = phi0/chi0 with dx/dr = 1/chi0^2 and d2x/dr2 = -2 chi0'/chi0^3.
inline MonotoneMap map_from_solutions(const SolutionPair& pair) {
    const auto& r = pair.regular.mesh();
    std::vector<double> x(r.size()), dx(r.size()), d2x(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double chi = pair.second.values()[i];
        if (!(chi > 0.0)) {
            throw ContractViolation("second solution vanishes at r = " + std::to_string(r[i]) +
                                    "; the potential has bound states");
        }
        x[i] = pair.regular.values()[i] / chi;
        dx[i] = 1.0 / (chi * chi);
        d2x[i] = -2.0 * pair.second.firsts()[i] / (chi * chi * chi);
    }
    return MonotoneMap(Tabulated(pair.regular.mesh_ptr(), std::move(x), std::move(dx), std::move(d2x),
                                 pair.potential.origin.singular() ? Tabulated::Below::exponential
                                                                  : Tabulated::Below::taylor));
}

/// x = int_0^r dt / c(t)^2 for a positive carrier c.
inline MonotoneMap map_from_carrier(const Tabulated& c, double tol = 1e-13) {
    const auto& r = c.mesh();
    const auto n = r.size();
    std::vector<double> x(n), dx(n), d2x(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ci = c.values()[i];
        if (!(ci > 0.0)) throw ContractViolation("carrier vanishes at r = " + std::to_string(r[i]));
        dx[i] = 1.0 / (ci * ci);
        d2x[i] = -2.0 * c.firsts()[i] / (ci * ci * ci);
    }
    // Near the origin 1/c^2 ~ r^k (or faster); integrate the local power law.
    const double k = -2.0 * r[0] * c.firsts()[0] / c.values()[0];
    x[0] = r[0] * dx[0] / std::max(k + 1.0, 0.5);
    auto inv_sq = [&](double t) {
        const double v = c(t);
        return 1.0 / (v * v);
    };
    for (std::size_t i = 1; i < n; ++i) x[i] = x[i - 1] + integrate(inv_sq, r[i - 1], r[i], tol);
    return MonotoneMap(Tabulated(c.mesh_ptr(), std::move(x), std::move(dx), std::move(d2x),
                                 Tabulated::Below::exponential));
}

enum class KernelVariant { grosse, general, higher_ell, higher_ell_outer };

inline std::string variant_name(KernelVariant v) {
    switch (v) {
        case KernelVariant::grosse: return "grosse";
        case KernelVariant::general: return "general";
        case KernelVariant::higher_ell: return "t^(2l) W_l(t) inside the U integral";
        case KernelVariant::higher_ell_outer: return "r^(2l) outside the U integral";
    }
    return "unknown";
}

/// W = -int_r^inf V a, U = int_r^inf W b, tabulated with exact node derivatives.
struct TransformKernels {
    Tabulated W;
    Tabulated U;
    int ell = 0;
    KernelVariant variant = KernelVariant::grosse;
};

/// Weights of the kernel integrals; the powers describe growth t^p at infinity.
struct KernelWeights {
    std::function<double(double)> a = [](double) { return 1.0; };
    std::function<double(double)> da = [](double) { return 0.0; };
    std::function<double(double)> b = [](double) { return 1.0; };
    std::function<double(double)> db = [](double) { return 0.0; };
    double a_power = 0.0;
    double b_power = 0.0;

    static KernelWeights unit() { return {}; }

    static KernelWeights powers(int ell) {
        KernelWeights w;
        const double e = 2.0 * ell;
        w.a = [=](double t) { return std::pow(t, -e); };
        w.da = [=](double t) { return -e * std::pow(t, -e - 1.0); };
        w.b = [=](double t) { return std::pow(t, e); };
        w.db = [=](double t) { return e == 0.0 ? 0.0 : e * std::pow(t, e - 1.0); };
        w.a_power = -e;
        w.b_power = e;
        return w;
    }
};

namespace detail {

inline Decay weighted(Decay d, double power) {
    if (d.kind == Decay::Kind::exponential) return power > 0.0 ? Decay::exponential(0.5 * d.rate) : d;
    return Decay::power(d.rate - power);
}

}  // namespace detail

/// Cumulative tail integrals on the mesh. Beyond the mesh the tails are computed
/// directly; inside each cell U uses a nested Gauss-Kronrod panel for W.
inline TransformKernels build_kernels(const RadialPotential& v, const KernelWeights& w, const Mesh& mesh, int ell,
                                      KernelVariant variant, double tol = 1e-13) {
    const auto& r = *mesh;
    const auto n = r.size();
    auto va = [&](double t) {
        const double p = v(t);
        return p == 0.0 ? 0.0 : p * w.a(t);
    };
    const Decay d_va = detail::weighted(v.decay(), w.a_power);
    const Decay d_w = detail::weighted(d_va, 1.0);
    const Decay d_wb = detail::weighted(d_w, w.b_power);
    if (d_va.kind == Decay::Kind::power && d_va.rate <= 1.0) {
        throw IntegrabilityError("kernel W diverges: weighted potential decays like t^-" + std::to_string(d_va.rate));
    }
    if (d_wb.kind == Decay::Kind::power && d_wb.rate <= 1.0) {
        throw IntegrabilityError("kernel U diverges: weighted W decays like t^-" + std::to_string(d_wb.rate));
    }

    std::vector<double> W(n), dW(n), d2W(n), U(n), dU(n), d2U(n);
    auto w_far = [&](double t) { return -tail_integral(va, t, d_va, 1e-3 * tol); };
    W[n - 1] = w_far(r[n - 1]);
    U[n - 1] = tail_integral([&](double t) { return w_far(t) * w.b(t); }, r[n - 1], d_wb, tol);
    for (std::size_t i = n - 1; i-- > 0;) {
        const double hi = r[i + 1];
        const double w_hi = W[i + 1];
        W[i] = w_hi - integrate(va, r[i], hi, tol);
        auto inner = [&](double t) { return (w_hi - quadrature::gk15(va, t, hi).value) * w.b(t); };
        U[i] = U[i + 1] + integrate(inner, r[i], hi, tol);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double t = r[i];
        dW[i] = va(t);
        d2W[i] = v.slope(t) * w.a(t) + v(t) * w.da(t);
        dU[i] = -W[i] * w.b(t);
        d2U[i] = -dW[i] * w.b(t) - W[i] * w.db(t);
    }
    TransformKernels k;
    k.W = Tabulated(mesh, std::move(W), std::move(dW), std::move(d2W));
    k.U = Tabulated(mesh, std::move(U), std::move(dU), std::move(d2U));
    k.ell = ell;
    k.variant = variant;
    return k;
}

/// Mesh start for kernels of a singular V0 ~ g/r^n, where |U| stays below 300.
inline double singular_kernel_start(const OriginClass& origin) {
    const double n = origin.n;
    return std::pow(origin.g / ((n - 1.0) * (n - 2.0) * 300.0), 1.0 / (n - 2.0));
}

inline Mesh kernel_mesh(const RadialPotential& v0, const InfinityClass& tail) {
    GridSpec spec = tail.grid();
    double start = 0.0;
    if (v0.origin.singular()) {
        start = singular_kernel_start(v0.origin);
        spec.per_decade = v0.grid().per_decade;
    }
    return make_mesh(spec, start);
}

/// W0 = -int_r^inf V0, U0 = int_r^inf W0.
inline TransformKernels grosse_kernels(const RadialPotential& v0, std::optional<Mesh> mesh = std::nullopt) {
    if (!v0.origin.singular()) {
        const auto report = integrability_report(v0);
        if (!report.full_finite) throw IntegrabilityError("r V0 is not integrable on (0, inf)");
    }
    return build_kernels(v0, KernelWeights::unit(), mesh.value_or(kernel_mesh(v0, v0.infinity)), 0,
                         KernelVariant::grosse);
}

/// The full record of a composed potential and its explicit solution.
struct CompositionRecord {
    Engine engine = Engine::theorem1;
    int depth = 1;
    int ell = 0;
    double scale = 1.0;

    RadialPotential v0;
    std::optional<RadialPotential> v1;
    ExplicitSolution inner;
    std::optional<SolutionPair> pair;
    std::optional<TransformKernels> kernels;

    Tabulated carrier;
    MonotoneMap map;
    RadialPotential auxiliary;
    RadialPotential composed;

    /// Engine formula evaluated directly from the constituents.
    std::function<double(double)> formula;
    /// Normalization of the auxiliary chi0 (grosse and higher_ell).
    std::string normalization;
    double chi_normalization = 1.0;
    /// Variant selected by the consistency check (higher_ell only).
    std::optional<KernelVariant> selected_variant;
    std::vector<std::string> notes;

    /// Window used for residual and node checks.
    double verify_lo = 1e-3;
    double verify_hi = 20.0;

    /// phi = c psi(x), phi' = c' psi + c psi' x', phi'' = V phi.
    Jet solution(double r) const {
        const Jet c = carrier.jet(r);
        const Jet x = map.jet(r);
        const Jet psi = inner.psi(x.value);
        const double value = c.value * psi.value;
        return {value, c.first * psi.value + c.value * psi.first * x.first, composed(r) * value};
    }

    double operator()(double r) const { return solution(r).value; }

    /// Normalized auxiliary second solution (grosse/higher_ell: chi0 = c / K).
    double aux_chi(double r) const { return carrier(r) / chi_normalization; }

    /// Auxiliary regular solution chi0 int_0^r dt/chi0^2 = K c x.
    double aux_phi(double r) const { return chi_normalization * carrier(r) * map(r); }

    /// The record as the inner slot of another composition.
    ExplicitSolution as_inner() const {
        ExplicitSolution out;
        out.label = engine_name(engine) + "[depth " + std::to_string(depth) + "]";
        out.potential = composed;
        const auto self = std::make_shared<const CompositionRecord>(*this);
        out.psi = [self](double x) { return self->solution(x); };
        return out;
    }
};

namespace detail {

inline OriginClass composed_origin(const RadialPotential& v0, int ell) {
    if (v0.origin.singular()) return v0.origin;
    if (ell > 0) return OriginClass::centrifugal(ell);
    return OriginClass::regular();
}

/// Tail class of the composed potential; an exponential inner tail slows to at most
/// the rate of the map slope, so the declared rate is kept conservative.
inline InfinityClass composed_tail(const InfinityClass& aux, const InfinityClass& inner, double slope) {
    InfinityClass t = inner;
    if (t.kind == InfinityClass::Kind::exponential) t.rate *= 0.5 * std::min(1.0, slope);
    return weaker_tail(aux, t);
}

/// Assigns the composed potential and checks the inner integrability condition near 0.
inline void finish(CompositionRecord& rec) {
    const Tabulated carrier = rec.carrier;
    const MonotoneMap map = rec.map;
    const auto aux = rec.auxiliary.eval;
    const auto inner_v = rec.inner.potential.eval;
    rec.composed.name = engine_name(rec.engine) + "(" + rec.v0.name + (rec.v1 ? ", " + rec.v1->name : "") + ", " +
                        rec.inner.label + ")";
    rec.composed.eval = [=](double r) {
        const double c = carrier(r);
        const double c2 = c * c;
        const double weight = 1.0 / (c2 * c2);
        if (weight == 0.0) return aux(r);
        return aux(r) + weight * inner_v(map(r));
    };
    rec.composed.slope_fn = nullptr;
    rec.composed.origin = composed_origin(rec.v0, rec.ell);
    const double slope = map.forward().firsts().back();
    rec.composed.infinity = composed_tail(rec.auxiliary.infinity, rec.inner.potential.infinity, slope);
    if (rec.v0.origin.singular()) rec.verify_lo = 0.05;
    rec.composed.params = rec.inner.potential.params;
    if (rec.inner.potential.infinity.kind == InfinityClass::Kind::long_range_coulomb) {
        rec.notes.push_back("inner potential is long range; the tail condition on r^2 |V| does not hold");
    }
}

inline void require_inner(const ExplicitSolution& inner) {
    if (!inner.psi || !inner.potential.eval) throw InvalidParameter("inner solution or potential is missing");
}

}  // namespace detail

/// Composition x = phi0/chi0, V = V0 + chi0^{-4} V(x), phi = chi0 psi(x).
inline CompositionRecord theorem1_compose(const RadialPotential& v0, const SolutionPair& pair,
                                          const ExplicitSolution& inner) {
    detail::require_inner(inner);
    CompositionRecord rec;
    rec.engine = Engine::theorem1;
    rec.v0 = v0;
    rec.inner = inner;
    rec.pair = pair;
    rec.carrier = pair.second;
    rec.map = map_from_solutions(pair);
    rec.auxiliary = v0;
    const Tabulated phi0 = pair.regular;
    const Tabulated chi0 = pair.second;
    const auto psi = inner.psi;
    rec.formula = [=](double r) { return chi0(r) * psi(phi0(r) / chi0(r)).value; };
    rec.normalization = v0.origin.singular() ? "chi0(inf) = 1/A, chi0(0) = inf" : "chi0(0) = 1";
    detail::finish(rec);
    return rec;
}

/// Composition with x = int_0^r exp(2 U0), V = V0 + W0^2 + exp(4 U0) V1(x), phi = exp(-U0) psi(x).
inline CompositionRecord grosse_compose(const RadialPotential& v0, const ExplicitSolution& inner,
                                        std::optional<TransformKernels> precomputed = std::nullopt) {
    detail::require_inner(inner);
    CompositionRecord rec;
    rec.engine = Engine::grosse;
    rec.v0 = v0;
    rec.inner = inner;
    rec.kernels = precomputed ? *precomputed : grosse_kernels(v0);
    const Tabulated W = rec.kernels->W;
    const Tabulated U = rec.kernels->U;
    const auto& r = W.mesh();
    std::vector<double> c(r.size()), dc(r.size()), d2c(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double w = W.values()[i];
        c[i] = std::exp(-U.values()[i]);
        dc[i] = w * c[i];
        d2c[i] = (v0(r[i]) + w * w) * c[i];
    }
    rec.carrier = Tabulated(W.mesh_ptr(), std::move(c), std::move(dc), std::move(d2c), Tabulated::Below::exponential);
    rec.map = map_from_carrier(rec.carrier);
    rec.auxiliary.name = v0.name + " + W0^2";
    const auto v0_eval = v0.eval;
    rec.auxiliary.eval = [=](double t) {
        const double w = W(t);
        return v0_eval(t) + w * w;
    };
    rec.auxiliary.origin = v0.origin;
    rec.auxiliary.infinity = v0.infinity;
    if (v0.origin.singular()) {
        rec.normalization = "chi0(inf) = 1";
        rec.chi_normalization = 1.0;
    } else {
        rec.normalization = "chi0(0) = 1";
        rec.chi_normalization = std::exp(-U.values().front());
    }
    const auto psi = inner.psi;
    const MonotoneMap map = rec.map;
    rec.formula = [=](double t) { return std::exp(-U(t)) * psi(map(t)).value; };
    detail::finish(rec);
    return rec;
}

/// Composition with the chi0-weighted kernels W1 = -int V1 chi0^2, U1 = int W1/chi0^2.
inline CompositionRecord theorem2_compose(const RadialPotential& v0, const SolutionPair& pair,
                                          const RadialPotential& v1, const ExplicitSolution& inner) {
    detail::require_inner(inner);
    if (!v1.origin.singular() && v1.origin.kind == OriginClass::Kind::regular) {
        const auto report = integrability_report(v1);
        if (!report.full_finite) throw IntegrabilityError("r V1 is not integrable on (0, inf)");
    }
    CompositionRecord rec;
    rec.engine = Engine::theorem2;
    rec.v0 = v0;
    rec.v1 = v1;
    rec.inner = inner;
    rec.pair = pair;
    const Tabulated chi0 = pair.second;
    KernelWeights w;
    w.a = [=](double t) {
        const double c = chi0(t);
        return c * c;
    };
    w.da = [=](double t) { return 2.0 * chi0(t) * chi0.derivative(t); };
    w.b = [=](double t) {
        const double c = chi0(t);
        return 1.0 / (c * c);
    };
    w.db = [=](double t) {
        const double c = chi0(t);
        return -2.0 * chi0.derivative(t) / (c * c * c);
    };
    rec.kernels = build_kernels(v1, w, pair.regular.mesh_ptr(), 0, KernelVariant::general);
    const Tabulated W = rec.kernels->W;
    const Tabulated U = rec.kernels->U;
    const auto& r = W.mesh();
    std::vector<double> c(r.size()), dc(r.size()), d2c(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double ch = chi0.values()[i];
        const double wi = W.values()[i];
        const double e = std::exp(-U.values()[i]);
        c[i] = ch * e;
        dc[i] = e * (chi0.firsts()[i] + wi / ch);
        d2c[i] = (v0(r[i]) + v1(r[i]) + wi * wi / (ch * ch * ch * ch)) * c[i];
    }
    rec.carrier = Tabulated(W.mesh_ptr(), std::move(c), std::move(dc), std::move(d2c),
                            v0.origin.singular() ? Tabulated::Below::exponential : Tabulated::Below::taylor);
    rec.map = map_from_carrier(rec.carrier);
    rec.auxiliary.name = v0.name + " + " + v1.name + " + chi0^-4 W1^2";
    const auto v0_eval = v0.eval;
    const auto v1_eval = v1.eval;
    rec.auxiliary.eval = [=](double t) {
        const double ch = chi0(t);
        const double wi = W(t);
        return v0_eval(t) + v1_eval(t) + wi * wi / (ch * ch * ch * ch);
    };
    rec.auxiliary.origin = v0.origin;
    rec.auxiliary.infinity = weaker_tail(v0.infinity, v1.infinity);
    rec.normalization = v0.origin.singular() ? "chi0(inf) = 1/A, chi0(0) = inf" : "chi0(0) = 1";
    const auto psi = inner.psi;
    const MonotoneMap map = rec.map;
    rec.formula = [=](double t) { return chi0(t) * std::exp(-U(t)) * psi(map(t)).value; };
    detail::finish(rec);
    return rec;
}

/// Kernels of the higher-l construction for one integrand variant.
inline TransformKernels higher_ell_kernels(const RadialPotential& v0, int ell, KernelVariant variant,
                                           std::optional<Mesh> mesh = std::nullopt) {
    const Mesh m = mesh.value_or(kernel_mesh(v0, v0.infinity));
    if (variant == KernelVariant::higher_ell) {
        return build_kernels(v0, KernelWeights::powers(ell), m, ell, variant);
    }
    // U = r^{2l} int_r^inf W: tabulate Q = int W with unit outer weight, then scale.
    KernelWeights w = KernelWeights::powers(ell);
    w.b = [](double) { return 1.0; };
    w.db = [](double) { return 0.0; };
    w.b_power = 0.0;
    TransformKernels k = build_kernels(v0, w, m, ell, variant);
    const auto& r = k.U.mesh();
    const double e = 2.0 * ell;
    std::vector<double> u(r.size()), du(r.size()), d2u(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double t = r[i];
        const double q = k.U.values()[i];
        const double wi = k.W.values()[i];
        const double dwi = k.W.firsts()[i];
        u[i] = std::pow(t, e) * q;
        du[i] = e * std::pow(t, e - 1.0) * q - std::pow(t, e) * wi;
        d2u[i] = e * (e - 1.0) * std::pow(t, e - 2.0) * q - 2.0 * e * std::pow(t, e - 1.0) * wi - std::pow(t, e) * dwi;
    }
    k.U = Tabulated(k.U.mesh_ptr(), std::move(u), std::move(du), std::move(d2u));
    return k;
}

/// chi_l = r^{-l} exp(-U_l) with derivatives taken from the tabulated U_l.
inline Tabulated higher_ell_carrier(const TransformKernels& k) {
    const auto& r = k.U.mesh();
    const double l = k.ell;
    std::vector<double> c(r.size()), dc(r.size()), d2c(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double t = r[i];
        const double p = -l / t - k.U.firsts()[i];
        c[i] = std::pow(t, -l) * std::exp(-k.U.values()[i]);
        dc[i] = p * c[i];
        d2c[i] = (l / (t * t) - k.U.seconds()[i] + p * p) * c[i];
    }
    return Tabulated(k.U.mesh_ptr(), std::move(c), std::move(dc), std::move(d2c), Tabulated::Below::taylor);
}

/// Residual of chi_l'' = [l(l+1)/r^2 + V0 + r^{4l} W_l^2] chi_l for a kernel variant.
inline double higher_ell_consistency(const RadialPotential& v0, const TransformKernels& k, double lo, double hi) {
    const Tabulated W = k.W;
    const Tabulated U = k.U;
    const double l = k.ell;
    auto chi = [&](double t) { return std::pow(t, -l) * std::exp(-U(t)); };
    auto pot = [&](double t) {
        const double w = W(t);
        return l * (l + 1.0) / (t * t) + v0(t) + std::pow(t, 4.0 * l) * w * w;
    };
    const auto grid = verification_grid(lo, hi);
    return residual(chi, pot, grid, 1e-2, 0.05).max;
}

/// Higher-l composition: both readings of the U_l integrand are built and the one
/// satisfying the chi_l consistency equation is used; the choice is recorded.
inline CompositionRecord higher_ell_compose(const RadialPotential& v0, const ExplicitSolution& inner, int ell) {
    if (ell < 0) throw InvalidParameter("ell must be nonnegative");
    detail::require_inner(inner);
    if (ell == 0) {
        CompositionRecord rec = grosse_compose(v0, inner);
        rec.engine = Engine::higher_ell;
        rec.composed.name = "higher_ell" + rec.composed.name.substr(rec.composed.name.find('('));
        rec.notes.push_back("l = 0: identical to the grosse construction");
        return rec;
    }
    const Mesh mesh = kernel_mesh(v0, v0.infinity);
    const double lo = v0.origin.singular() ? 0.05 : 1e-3;
    const TransformKernels inside = higher_ell_kernels(v0, ell, KernelVariant::higher_ell, mesh);
    const TransformKernels outside = higher_ell_kernels(v0, ell, KernelVariant::higher_ell_outer, mesh);
    const double res_inside = higher_ell_consistency(v0, inside, lo, 20.0);
    const double res_outside = higher_ell_consistency(v0, outside, lo, 20.0);

    CompositionRecord rec;
    rec.engine = Engine::higher_ell;
    rec.ell = ell;
    rec.v0 = v0;
    rec.inner = inner;
    rec.kernels = res_outside < res_inside ? outside : inside;
    rec.selected_variant = rec.kernels->variant;
    char buf[200];
    std::snprintf(buf, sizeof buf, "chi_l consistency residual: inside %.3e, outside %.3e; selected %s", res_inside,
                  res_outside, variant_name(*rec.selected_variant).c_str());
    rec.notes.emplace_back(buf);

    rec.carrier = higher_ell_carrier(*rec.kernels);
    rec.map = map_from_carrier(rec.carrier);
    const Tabulated W = rec.kernels->W;
    const Tabulated U = rec.kernels->U;
    const auto v0_eval = v0.eval;
    const double l = ell;
    rec.auxiliary.name = v0.name + " + r^(4l) W_l^2 + l(l+1)/r^2";
    rec.auxiliary.eval = [=](double t) {
        const double w = W(t);
        return v0_eval(t) + std::pow(t, 4.0 * l) * w * w + l * (l + 1.0) / (t * t);
    };
    rec.auxiliary.origin = OriginClass::centrifugal(ell);
    rec.auxiliary.infinity = InfinityClass::short_range(2.0 + 1e-9);
    rec.normalization = "chi_l = r^(-l) exp(-U_l)";
    const auto psi = inner.psi;
    const MonotoneMap map = rec.map;
    rec.formula = [=](double t) { return std::pow(t, -l) * std::exp(-U(t)) * psi(map(t)).value; };
    detail::finish(rec);
    return rec;
}

/// Same constituents and carrier, new inner solution.
inline CompositionRecord recompose(const CompositionRecord& base, const ExplicitSolution& inner) {
    detail::require_inner(inner);
    CompositionRecord rec = base;
    rec.inner = inner;
    rec.notes.clear();
    const Tabulated carrier = rec.carrier;
    const MonotoneMap map = rec.map;
    const auto psi = inner.psi;
    switch (rec.engine) {
        case Engine::theorem1: {
            const Tabulated phi0 = rec.pair->regular;
            const Tabulated chi0 = rec.pair->second;
            rec.formula = [=](double r) { return chi0(r) * psi(phi0(r) / chi0(r)).value; };
            break;
        }
        case Engine::theorem2: {
            const Tabulated chi0 = rec.pair->second;
            const Tabulated U = rec.kernels->U;
            rec.formula = [=](double r) { return chi0(r) * std::exp(-U(r)) * psi(map(r)).value; };
            break;
        }
        case Engine::grosse:
        case Engine::higher_ell: {
            const Tabulated U = rec.kernels->U;
            const double l = rec.ell;
            rec.formula = [=](double r) { return std::pow(r, -l) * std::exp(-U(r)) * psi(map(r)).value; };
            break;
        }
    }
    detail::finish(rec);
    return rec;
}

/// Reuses the composed potential and solution as the next inner slot, `depth - 1` times.
/// `accept(record)` is called for every level and aborts with IterationError when false.
inline CompositionRecord iterate(const CompositionRecord& record, int depth,
                                 const std::function<bool(const CompositionRecord&, std::string&)>& accept) {
    if (depth < 1) throw InvalidParameter("iteration depth must be positive");
    CompositionRecord current = record;
    std::string why;
    if (accept && !accept(current, why)) {
        throw IterationError("verification failed at level 1: " + why, 1);
    }
    for (int level = 2; level <= depth; ++level) {
        CompositionRecord next = recompose(record, current.as_inner());
        next.depth = level;
        if (accept && !accept(next, why)) {
            throw IterationError("verification failed at level " + std::to_string(level) + ": " + why, level);
        }
        current = std::move(next);
    }
    return current;
}

/// V~(x) = -W0(r(x))^2 exp(-4 U0(r(x))), the potential seen by psi = exp(U0) phi.
inline RadialPotential grosse_tilde(const TransformKernels& kernels, const MonotoneMap& map) {
    RadialPotential out;
    out.name = "grosse_tilde";
    const Tabulated W = kernels.W;
    const Tabulated U = kernels.U;
    out.eval = [=](double x) {
        const double r = map.inverse(x);
        const double w = W(r);
        return -w * w * std::exp(-4.0 * U(r));
    };
    out.origin = OriginClass::regular();
    out.infinity = InfinityClass::exponential(1.0);
    return out;
}

inline RadialPotential grosse_tilde(const CompositionRecord& grosse) {
    if (!grosse.kernels) throw InvalidParameter("record has no kernels");
    RadialPotential out = grosse_tilde(*grosse.kernels, grosse.map);
    const Decay d = grosse.v0.decay();
    out.infinity = d.kind == Decay::Kind::exponential ? InfinityClass::exponential(d.rate)
                                                      : InfinityClass::short_range(2.0 * (d.rate - 1.0));
    return out;
}

/// The auxiliary pair of the grosse construction for V0 = g/r^4.
///
/// chi0 = exp(g/(6 r^2)) in closed form; phi0 = chi0 int_0^r dt/chi0^2 by quadrature,
/// compared with its two asymptotic regimes. The offset at infinity is
/// -sqrt(pi g/3) (from the Gaussian integral). The naive offset -sqrt(g) of
/// r exp(-sqrt(g)/r) is kept for comparison.
struct GrosseSingularPair {
    double g = 1.0;
    std::function<double(double)> chi0;
    std::function<double(double)> phi0;
    /// phi0 / ((3/(2g)) r^3 exp(-g/(6 r^2))) at small r; tends to 1.
    double near_origin_ratio = 0.0;
    double near_origin_radius = 0.0;
    /// phi0(R) - R at large R against the Gaussian and naive offsets.
    double far_offset = 0.0;
    double far_radius = 0.0;
    double derived_offset = 0.0;
    double naive_offset = 0.0;
};

inline GrosseSingularPair grosse_singular_pair(double g) {
    if (!(g > 0.0)) throw InvalidParameter("grosse_singular_pair requires g > 0");
    GrosseSingularPair out;
    out.g = g;
    out.chi0 = [g](double r) { return std::exp(g / (6.0 * r * r)); };
    // The integrand is scaled by its value at t = r so the quadrature works at unit size.
    out.phi0 = [g](double r) {
        const double top = g / (3.0 * r * r);
        auto inv = [=](double t) { return t > 0.0 ? std::exp(top - g / (3.0 * t * t)) : 0.0; };
        return std::exp(-g / (6.0 * r * r)) * integrate(inv, 0.0, r, 1e-14, 20000);
    };
    out.near_origin_radius = 0.05 * std::sqrt(g);
    const double r0 = out.near_origin_radius;
    out.near_origin_ratio = out.phi0(r0) / (1.5 / g * r0 * r0 * r0 * std::exp(-g / (6.0 * r0 * r0)));
    out.far_radius = 1e3 * std::sqrt(g);
    out.far_offset = out.phi0(out.far_radius) - out.far_radius;
    out.derived_offset = -std::sqrt(std::numbers::pi * g / 3.0);
    out.naive_offset = -std::sqrt(g);
    return out;
}

/// Record constructors from catalog entries (inner scale multiplies the coupling).
inline CompositionRecord theorem1_compose(const CatalogEntry& v0, const CatalogEntry& v, double scale = 1.0) {
    CompositionRecord rec = theorem1_compose(v0.potential, v0.pair(), scaled(v, scale).solution());
    rec.scale = scale;
    return rec;
}

}  // namespace solvable
