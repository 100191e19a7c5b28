#pragma once

// Executable checks of a composition record, aggregated into a report.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "solvable/ode.hpp"
#include "solvable/quadrature.hpp"
#include "solvable/residual.hpp"
#include "solvable/transform.hpp"

namespace solvable {

struct Tolerances {
    double residual = 1e-6;
    double wronskian = 1e-8;
    double roundtrip = 1e-9;
    double slope = 1e-3;
    double formula = 1e-10;
    /// Residual relaxation factor per iteration level.
    double level_relaxation = 10.0;

    Tolerances at_level(int level) const {
        Tolerances t = *this;
        t.residual *= std::pow(level_relaxation, level - 1);
        return t;
    }
};

struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct VerificationReport {
    std::string engine;
    int depth = 1;
    double window_lo = 0.0;
    double window_hi = 0.0;

    double residual_max = 0.0;
    double residual_worst_at = 0.0;
    std::vector<double> residual_r;
    std::vector<double> residual_values;
    std::vector<double> residual_skipped;

    std::optional<double> wronskian_drift;
    int node_count_inner = 0;
    int node_count_composed = 0;
    std::optional<double> bargmann_inner;
    std::optional<double> bargmann_composed;
    double map_roundtrip_max = 0.0;
    std::optional<double> map_slope_vs_A2;
    std::optional<double> map_offset_drift;
    double formula_deviation = 0.0;
    /// sup_r |r W0(r)| (grosse kernels).
    std::optional<double> kernel_bound;
    std::optional<int> auxiliary_nodes;
    std::map<std::string, IntegrabilityReport> integrability;

    std::vector<Check> checks;
    std::vector<std::string> notes;

    bool passed() const {
        for (const auto& c : checks) {
            if (!c.passed) return false;
        }
        return true;
    }

    const Check* find(const std::string& name) const {
        for (const auto& c : checks) {
            if (c.name == name) return &c;
        }
        return nullptr;
    }
};

namespace detail {

inline void add_check(VerificationReport& rep, std::string name, bool passed, double value, double threshold,
                      std::string detail = {}) {
    rep.checks.push_back({std::move(name), passed, value, threshold, std::move(detail)});
}

/// Integrability report of a potential, or nullopt with a note when it cannot be evaluated.
inline std::optional<IntegrabilityReport> try_integrability(const RadialPotential& v, const std::string& slot,
                                                            VerificationReport& rep) {
    try {
        return integrability_report(v);
    } catch (const Error& e) {
        rep.notes.push_back("integrability of " + slot + " not evaluated: " + e.what());
        return std::nullopt;
    }
}

}  // namespace detail

/// Largest radius of the working (linear) mesh region for the record's constituents.
inline double working_radius(const CompositionRecord& rec) {
    InfinityClass tail = rec.v0.infinity;
    if (rec.v1) tail = weaker_tail(tail, rec.v1->infinity);
    if (tail.kind == InfinityClass::Kind::long_range_coulomb) tail = InfinityClass::short_range(4.0);
    return tail.grid().r_max;
}

/// Runs every check that applies to the record's engine.
inline VerificationReport check_composition(const CompositionRecord& rec, const Tolerances& tol = {}) {
    VerificationReport rep;
    rep.engine = engine_name(rec.engine);
    rep.depth = rec.depth;
    rep.window_lo = rec.verify_lo;
    rep.window_hi = rec.verify_hi;
    rep.notes = rec.notes;
    if (rec.v0.origin.singular()) {
        rep.notes.push_back("singular origin: checks start at r = " + std::to_string(rec.verify_lo));
    }
    const auto grid = verification_grid(rec.verify_lo, rec.verify_hi);
    const double r_max = working_radius(rec);

    // Composed solution satisfies the composed equation.
    const double near_origin = rec.composed.origin.singular() || rec.v0.origin.singular() ? 0.05 : 0.25;
    const auto res = residual([&](double r) { return rec(r); }, rec.composed.eval, grid, 1e-2, near_origin);
    rep.residual_max = res.max;
    rep.residual_worst_at = res.worst_at;
    rep.residual_r = res.r;
    rep.residual_values = res.value;
    rep.residual_skipped = res.skipped;
    if (!res.skipped.empty()) {
        rep.notes.push_back(std::to_string(res.skipped.size()) + " residual points skipped near the origin");
    }
    detail::add_check(rep, "residual", res.max <= tol.residual, res.max, tol.residual);

    // Stored solution against the engine formula evaluated from the constituents.
    double dev = 0.0;
    for (double r : grid) {
        const double stored = rec(r);
        dev = std::max(dev, std::abs(stored - rec.formula(r)) / std::max(1.0, std::abs(stored)));
    }
    rep.formula_deviation = dev;
    detail::add_check(rep, "solution_formula", dev <= tol.formula, dev, tol.formula);

    if (rec.pair) {
        rep.wronskian_drift = rec.pair->wronskian_drift;
        detail::add_check(rep, "wronskian", *rep.wronskian_drift <= tol.wronskian, *rep.wronskian_drift,
                          tol.wronskian);
    }

    // Map properties.
    double min_slope = std::numeric_limits<double>::infinity();
    for (double d : rec.map.forward().firsts()) min_slope = std::min(min_slope, d);
    detail::add_check(rep, "map_monotone", min_slope > 0.0, min_slope, 0.0, "minimum dx/dr on the mesh");
    rep.map_roundtrip_max = rec.map.roundtrip_error(grid);
    detail::add_check(rep, "map_roundtrip", rep.map_roundtrip_max <= tol.roundtrip, rep.map_roundtrip_max,
                      tol.roundtrip);
    if (rec.engine == Engine::theorem1 || rec.engine == Engine::theorem2) {
        const double a2 = rec.pair->slope * rec.pair->slope;
        const double e = std::max(std::abs(rec.map.derivative(0.5 * r_max) / a2 - 1.0),
                                  std::abs(rec.map.derivative(r_max) / a2 - 1.0));
        rep.map_slope_vs_A2 = e;
        detail::add_check(rep, "map_slope_A2", e <= tol.slope, e, tol.slope);
    } else if (rec.engine == Engine::grosse && rec.ell == 0) {
        const double drift = std::abs((rec.map(r_max) - r_max) - (rec.map(0.5 * r_max) - 0.5 * r_max));
        rep.map_offset_drift = drift;
        if (rec.v0.infinity.kind == InfinityClass::Kind::exponential) {
            detail::add_check(rep, "map_offset_bounded", drift <= tol.slope, drift, tol.slope);
        } else {
            rep.notes.push_back("x(r) - r drift over [r_max/2, r_max] is " + std::to_string(drift));
        }
    }

    // Node preservation over the working range.
    const double x_lo = rec.map(rec.verify_lo);
    const double x_hi = rec.map(r_max);
    const auto inner_nodes = count_nodes([&](double x) { return rec.inner(x); }, x_lo, x_hi);
    const auto composed_nodes = count_nodes([&](double r) { return rec(r); }, rec.verify_lo, r_max);
    rep.node_count_inner = inner_nodes.count;
    rep.node_count_composed = composed_nodes.count;
    const bool ambiguous = inner_nodes.ambiguous || composed_nodes.ambiguous;
    if (ambiguous) rep.notes.push_back("node count ambiguous: grazing zero within the noise floor");
    detail::add_check(rep, "node_preservation", !ambiguous && inner_nodes.count == composed_nodes.count,
                      composed_nodes.count, inner_nodes.count);

    // Integrability conditions and Bargmann bounds.
    auto record_integrability = [&](const RadialPotential& v, const std::string& slot, bool need_b, bool need_l1) {
        if (v.origin.singular()) {
            rep.notes.push_back(slot + " is singular at the origin; integrability conditions replaced by repulsion");
            return std::optional<IntegrabilityReport>{};
        }
        auto report = detail::try_integrability(v, slot, rep);
        if (!report) return report;
        rep.integrability[slot] = *report;
        if (need_b) {
            detail::add_check(rep, "integrability_" + slot + "_B", report->regular_class(),
                              report->near_origin + report->tail, 0.0,
                              "r|V| on (0,1) and r^2|V| on (1,inf) finite");
        }
        if (need_l1) {
            detail::add_check(rep, "integrability_" + slot + "_rV", report->full_finite, report->full, 0.0,
                              "r|V| on (0,inf) finite");
        }
        return report;
    };
    const bool inner_is_catalog = rec.depth == 1;
    switch (rec.engine) {
        case Engine::theorem1:
            record_integrability(rec.v0, "V0", true, false);
            break;
        case Engine::grosse:
        case Engine::higher_ell:
            record_integrability(rec.v0, "V0", false, rec.engine == Engine::grosse);
            break;
        case Engine::theorem2:
            record_integrability(rec.v0, "V0", true, false);
            record_integrability(*rec.v1, "V1", false, true);
            break;
    }
    if (inner_is_catalog) {
        const bool t1 = rec.engine == Engine::theorem1;
        if (auto report = record_integrability(rec.inner.potential, "V", t1, !t1)) {
            if (report->full_finite) rep.bargmann_inner = report->full;
        }
    } else {
        if (auto report = detail::try_integrability(rec.inner.potential, "V", rep); report && report->full_finite) {
            rep.bargmann_inner = report->full;
        }
    }
    if (rep.bargmann_inner) {
        detail::add_check(rep, "bargmann_inner", rep.node_count_inner <= *rep.bargmann_inner, rep.node_count_inner,
                          *rep.bargmann_inner);
    }
    if (!rec.composed.origin.singular()) {
        if (auto report = detail::try_integrability(rec.composed, "composed", rep)) {
            rep.integrability["composed"] = *report;
            if (report->full_finite) {
                rep.bargmann_composed = report->full;
                detail::add_check(rep, "bargmann_composed", rep.node_count_composed <= report->full,
                                  rep.node_count_composed, report->full);
            } else {
                rep.notes.push_back("composed potential: integral of r|V| diverges; Bargmann bound not applicable");
            }
        }
    }

    // Kernel bounds and the auxiliary problem of the tail-integral engines.
    if (rec.engine == Engine::grosse && rec.ell == 0 && rec.kernels) {
        const auto& k = *rec.kernels;
        const auto& r = k.W.mesh();
        double c_bound = 0.0;
        double u_max = 0.0;
        double tilde_max = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < r.size(); ++i) {
            c_bound = std::max(c_bound, std::abs(r[i] * k.W.values()[i]));
            u_max = std::max(u_max, std::abs(k.U.values()[i]));
            const double w = k.W.values()[i];
            tilde_max = std::max(tilde_max, -w * w * std::exp(-4.0 * k.U.values()[i]));
        }
        rep.kernel_bound = c_bound;
        detail::add_check(rep, "tilde_nonpositive", tilde_max <= 0.0, tilde_max, 0.0);
        if (auto it = rep.integrability.find("V0"); it != rep.integrability.end() && it->second.full_finite) {
            const double bound = it->second.full;
            detail::add_check(rep, "kernel_U_bound", u_max <= bound * (1.0 + 1e-9), u_max, bound,
                              "sup |U0| against the integral of r|V0|");
            detail::add_check(rep, "kernel_rW_bound", c_bound <= bound * (1.0 + 1e-9), c_bound, bound,
                              "sup |r W0| against the integral of r|V0|");
        }
        const auto aux_nodes = count_nodes([&](double t) { return rec.aux_phi(t); }, rec.verify_lo, r_max);
        int nodes = aux_nodes.count;
        if (!rec.v0.origin.singular()) {
            try {
                const Tabulated phi = solve_regular(rec.auxiliary, rec.auxiliary.grid());
                nodes = std::max(nodes, count_nodes(phi.mesh(), phi.values()).count);
            } catch (const Error& e) {
                rep.notes.push_back(std::string("auxiliary regular solution not integrated: ") + e.what());
            }
        }
        rep.auxiliary_nodes = nodes;
        detail::add_check(rep, "auxiliary_nodeless", nodes == 0, nodes, 0.0,
                          "regular solution of V0 + W0^2 has no sign change");
    }
    if (rec.engine == Engine::higher_ell && rec.selected_variant) {
        const double consistency = higher_ell_consistency(rec.v0, *rec.kernels, rec.verify_lo, rec.verify_hi);
        detail::add_check(rep, "chi_l_consistency", consistency <= tol.residual, consistency, tol.residual,
                          "selected variant: " + variant_name(*rec.selected_variant));
    }
    return rep;
}

/// Iterates the record to `depth`, verifying each level with the residual tolerance
/// relaxed by `tol.level_relaxation` per level. Throws IterationError on failure.
inline CompositionRecord iterate_verified(const CompositionRecord& record, int depth, const Tolerances& tol,
                                          std::vector<VerificationReport>* reports = nullptr) {
    auto accept = [&](const CompositionRecord& rec, std::string& why) {
        VerificationReport rep = check_composition(rec, tol.at_level(rec.depth));
        const bool ok = rep.passed();
        if (!ok) {
            why.clear();
            for (const auto& c : rep.checks) {
                if (!c.passed) why += (why.empty() ? "" : ", ") + c.name;
            }
        }
        if (reports) reports->push_back(std::move(rep));
        return ok;
    };
    return iterate(record, depth, accept);
}

}  // namespace solvable
