// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "solvable/solvable.hpp"

using namespace solvable;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what) {
    std::printf("%s %2d %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double max_residual(const CompositionRecord& rec) {
    const auto grid = verification_grid(rec.verify_lo, rec.verify_hi);
    return residual([&](double r) { return rec(r); }, rec.composed, grid).max;
}

/// max |a - b| / max(1, |b|) over the grid.
double sup_rel(const std::function<double(double)>& a, const std::function<double(double)>& b,
               const std::vector<double>& grid) {
    double worst = 0.0;
    for (double r : grid) worst = std::max(worst, std::abs(a(r) - b(r)) / std::max(1.0, std::abs(b(r))));
    return worst;
}

/// Runs a criterion body; an exception counts as a failure.
void criterion(int id, const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [ok, detail] = body();
        report(id, ok, name + ": " + detail);
    } catch (const std::exception& e) {
        report(id, false, name + ": exception: " + e.what());
    }
}

int nodes(const CompositionRecord& rec) {
    return count_nodes([&](double r) { return rec(r); }, rec.verify_lo, 40.0).count;
}

}  // namespace

int main() {
    criterion(1, "catalog closed forms solve their equations", [] {
        struct Case {
            const char* name;
            std::map<std::string, double> params;
        };
        const std::vector<Case> cases = {
            {"O", {{"lambda", 1.0}}},  {"O", {{"lambda", 4.0}}},    {"P", {{"lambda", 2.0}}},
            {"P", {{"lambda", -35.0}}}, {"Q", {{"lambda", 1.0}}},   {"Q", {{"lambda", -10.0}}},
            {"RS", {{"g", 1.0}}},      {"TU", {{"alpha", 1.0}}},
        };
        double worst = 0.0;
        std::string where;
        for (const auto& c : cases) {
            const auto e = make_entry(c.name, c.params);
            const double lo = e.potential.origin.singular() ? 0.05 : 1e-3;
            const auto grid = verification_grid(lo, 20.0);
            const double res = residual([&](double r) { return e.phi(r).value; }, e.potential, grid).max;
            if (res >= worst) {
                worst = res;
                where = c.name;
            }
        }
        return std::pair{worst <= 1e-6, fmt("max residual %.2e", worst) + " (" + where + "), threshold 1e-6"};
    });

    criterion(2, "theorem1 composition O + P", [] {
        const auto rec = theorem1_compose(make_entry("O", {{"lambda", 4.0}, {"a", 1.0}}), make_entry("P"));
        const auto rep = check_composition(rec);
        const double res = rep.residual_max;
        const double drift = rep.wronskian_drift.value_or(INFINITY);
        const double slope = rep.map_slope_vs_A2.value_or(INFINITY);
        const double a = std::sinh(2.0) / 2.0;
        const double a_err = std::abs(rec.pair->slope - a) / a;
        const bool ok = res <= 1e-6 && drift <= 1e-8 && slope <= 1e-3 && a_err <= 1e-8;
        return std::pair{ok, fmt("residual %.2e, Wronskian drift %.2e, slope vs A^2 %.2e", res, drift, slope) +
                                 fmt(", A vs sinh(2)/2 %.1e", a_err)};
    });

    criterion(3, "tail-integral transform of e^{-r}", [] {
        const auto rec = grosse_compose(exponential_potential(1.0, 1.0), make_entry("P").solution());
        const auto grid = verification_grid(1e-3, 40.0);
        double kernel = 0.0;
        for (double r : grid) {
            kernel = std::max({kernel, std::abs(rec.kernels->W(r) + std::exp(-r)),
                               std::abs(rec.kernels->U(r) + std::exp(-r))});
        }
        const auto tilde = grosse_tilde(rec);
        double tilde_max = -INFINITY;
        for (double r : grid) tilde_max = std::max(tilde_max, tilde(rec.map(r)));
        for (double x : rec.map.forward().values()) tilde_max = std::max(tilde_max, tilde(x));
        const double rt = rec.map.roundtrip_error(grid);
        const bool ok = kernel <= 1e-10 && tilde_max <= 0.0 && rt <= 1e-9;
        return std::pair{ok, fmt("kernel error %.2e, max V~ %.2e, roundtrip %.2e", kernel, tilde_max, rt)};
    });

    criterion(4, "singular quartic g = 1", [] {
        const auto rs = make_entry("RS", {{"g", 1.0}});
        const Tabulated phi = solve_regular(rs.potential, rs.potential.grid());
        const double phi_err = sup_rel([&](double r) { return phi(r); }, [](double r) { return r * std::exp(-1.0 / r); },
                                       verification_grid(0.05, 20.0));
        const auto rec = grosse_compose(rs.potential, make_entry("P").solution());
        double chi_err = 0.0;
        for (double r : verification_grid(0.2, 20.0)) {
            const double chi = std::exp(1.0 / (6.0 * r * r));
            chi_err = std::max(chi_err, std::abs(rec.aux_chi(r) - chi) / chi);
        }
        const bool ok = phi_err <= 1e-8 && chi_err <= 1e-8;
        return std::pair{ok, fmt("phi0 vs r e^{-1/r} %.2e on [0.05, 20], chi0 vs exp(1/(6r^2)) %.2e on [0.2, 20]",
                                 phi_err, chi_err)};
    });

    criterion(5, "reduction identities", [] {
        const auto e = exponential_potential(1.0, 1.0);
        const auto o = make_entry("O");
        const auto p = make_entry("P");
        const auto grid = verification_grid(1e-2, 20.0);
        auto both = [&](const CompositionRecord& a, const CompositionRecord& b) {
            return std::max(sup_rel([&](double r) { return a(r); }, [&](double r) { return b(r); }, grid),
                            sup_rel(a.composed.eval, b.composed.eval, grid));
        };
        const auto gr = grosse_compose(e, p.solution());
        const double d1 = both(theorem2_compose(zero_potential(), make_entry("zero").pair(), e, p.solution()), gr);
        const double d2 = both(theorem2_compose(o.potential, o.pair(), zero_potential(), p.solution()), theorem1_compose(o, p));
        const double d3 = both(higher_ell_compose(e, p.solution(), 0), gr);
        const bool ok = d1 <= 1e-9 && d2 <= 1e-9 && d3 <= 1e-9;
        return std::pair{ok, fmt("theorem2(V0=0) vs grosse %.1e, theorem2(V1=0) vs theorem1 %.1e", d1, d2) +
                                 fmt(", higher_ell(l=0) vs grosse %.1e", d3)};
    });

    criterion(6, "two-node inner solution through every engine", [] {
        const auto inner = make_entry("P", {{"lambda", -35.0}, {"b", 1.0}});
        const double bargmann = integrability_report(inner.potential).full;
        const auto e = exponential_potential(1.0, 1.0);
        const auto o = make_entry("O");
        const int n_inner = count_nodes([&](double x) { return inner.phi(x).value; }, 1e-3, 200.0).count;
        const int n1 = nodes(theorem1_compose(o, inner));
        const int n2 = nodes(grosse_compose(e, inner.solution()));
        const int n3 = nodes(theorem2_compose(o.potential, o.pair(), e, inner.solution()));
        const int n4 = nodes(higher_ell_compose(e, inner.solution(), 1));
        const bool ok = n_inner == 2 && n1 == 2 && n2 == 2 && n3 == 2 && n4 == 2 &&
                        std::abs(bargmann - 17.5) <= 1e-6 && n_inner <= bargmann;
        return std::pair{ok, "nodes inner " + std::to_string(n_inner) + ", theorem1 " + std::to_string(n1) +
                                 ", grosse " + std::to_string(n2) + ", theorem2 " + std::to_string(n3) +
                                 ", higher_ell " + std::to_string(n4) + fmt(", Bargmann integral %.6f", bargmann)};
    });

    criterion(7, "auxiliary solution has no nodes", [] {
        std::string detail;
        bool ok = true;
        for (double lambda : {-0.5, 1.0}) {
            const auto rec = grosse_compose(exponential_potential(lambda, 1.0), make_entry("P").solution());
            const int a = count_nodes([&](double r) { return rec.aux_phi(r); }, 1e-3, 40.0).count;
            const Tabulated phi = solve_regular(rec.auxiliary, rec.auxiliary.grid());
            const int b = count_nodes(phi.mesh(), phi.values()).count;
            ok = ok && a == 0 && b == 0;
            detail += fmt("%+g e^{-r}: ", lambda) + std::to_string(std::max(a, b)) + " nodes; ";
        }
        return std::pair{ok, detail.substr(0, detail.size() - 2)};
    });

    criterion(8, "depth-3 iteration", [] {
        const auto inner = make_entry("P", {{"lambda", -35.0}}).solution();
        const auto o = make_entry("O");
        const std::vector<CompositionRecord> bases = {
            theorem1_compose(o.potential, o.pair(), inner),
            grosse_compose(exponential_potential(1.0, 1.0), inner),
        };
        double worst = 0.0;
        bool ok = true;
        for (const auto& base : bases) {
            std::vector<VerificationReport> reps;
            iterate_verified(base, 3, Tolerances{}, &reps);
            ok = ok && reps.size() == 3 && reps.back().passed();
            worst = std::max(worst, reps.back().residual_max);
        }
        ok = ok && worst <= 1e-4;
        return std::pair{ok, fmt("deepest residual %.2e, threshold 1e-4", worst)};
    });

    criterion(9, "negative control", [] {
        auto rec = grosse_compose(exponential_potential(1.0, 1.0), make_entry("P").solution());
        const auto clean = rec.composed.eval;
        rec.composed.eval = [clean](double r) { return clean(r) + 1e-2 * std::exp(-r); };
        const auto rep = check_composition(rec);
        const bool ok = !rep.passed() && rep.residual_max > 1e-4;
        return std::pair{ok, fmt("corrupted residual %.2e, verification ", rep.residual_max) +
                                 (rep.passed() ? "passed" : "failed")};
    });

    criterion(10, "higher angular momentum", [] {
        const auto free = higher_ell_compose(zero_potential(), make_entry("P").solution(), 1);
        const double res_free = max_residual(free);
        double map_err = 0.0;
        for (double r : verification_grid(1e-2, 5.0)) {
            const double x = r * r * r / 3.0;
            map_err = std::max(map_err, std::abs(free.map(r) - x) / std::max(1.0, x));
        }
        const auto rec = higher_ell_compose(exponential_potential(1.0, 1.0), make_entry("P").solution(), 1);
        const auto rep = check_composition(rec);
        const Check* c = rep.find("chi_l_consistency");
        const double consistency = c ? c->value : INFINITY;
        const bool ok = res_free <= 1e-6 && map_err <= 1e-9 && rec.selected_variant && consistency <= 1e-6 &&
                        rep.residual_max <= 1e-6;
        const std::string variant = rec.selected_variant ? variant_name(*rec.selected_variant) : "none";
        return std::pair{ok, fmt("free l=1 residual %.2e, x vs r^3/3 %.1e; ", res_free, map_err) + "variant " +
                                 variant + fmt(" consistency %.2e, residual %.2e", consistency, rep.residual_max)};
    });

    std::printf("%s: %d failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
