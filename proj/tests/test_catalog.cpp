#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "solvable/catalog.hpp"
#include "solvable/ode.hpp"
#include "solvable/residual.hpp"
#include "solvable/transform.hpp"

using namespace solvable;

namespace {

double window_lo(const CatalogEntry& e) { return e.potential.origin.singular() ? 0.05 : 1e-3; }

double closed_form_residual(const CatalogEntry& e) {
    const auto grid = verification_grid(window_lo(e), 20.0);
    return residual([&](double r) { return e.phi(r).value; }, e.potential, grid).max;
}

int nodes(const CatalogEntry& e, double hi = 200.0) {
    return count_nodes([&](double r) { return e.phi(r).value; }, window_lo(e), hi).count;
}

// alpha I0(z) + beta K0(z), z = kappa e^{-mu r/2}, with phi(0) = 0 and phi'(0) = 1 solved
// from the 2x2 system using the standard library Bessel functions.
struct BesselOracle {
    double lambda, mu, kappa, alpha, beta;
    BesselOracle(double l, double m) : lambda(l), mu(m), kappa(2.0 * std::sqrt(std::abs(l)) / m) {
        // f(z) = alpha F0(z) + beta G0(z); f(kappa) = 0; -mu kappa/2 * df/dz(kappa) = 1.
        double F0, G0, dF, dG;
        if (l > 0) {
            F0 = std::cyl_bessel_i(0.0, kappa);
            G0 = std::cyl_bessel_k(0.0, kappa);
            dF = std::cyl_bessel_i(1.0, kappa);
            dG = -std::cyl_bessel_k(1.0, kappa);
        } else {
            F0 = std::cyl_bessel_j(0.0, kappa);
            G0 = std::cyl_neumann(0.0, kappa);
            dF = -std::cyl_bessel_j(1.0, kappa);
            dG = -std::cyl_neumann(1.0, kappa);
        }
        const double rhs = -2.0 / (mu * kappa);
        const double det = F0 * dG - G0 * dF;
        alpha = -G0 * rhs / det;
        beta = F0 * rhs / det;
    }
    double operator()(double r) const {
        const double z = kappa * std::exp(-0.5 * mu * r);
        return lambda > 0 ? alpha * std::cyl_bessel_i(0.0, z) + beta * std::cyl_bessel_k(0.0, z)
                          : alpha * std::cyl_bessel_j(0.0, z) + beta * std::cyl_neumann(0.0, z);
    }
};

}  // namespace

TEST(CatalogList, SixEntriesInOrder) {
    const auto& list = catalog_list();
    ASSERT_EQ(list.size(), 6u);
    const std::vector<std::string> codes{"zero", "O", "P", "Q", "RS", "TU"};
    for (std::size_t i = 0; i < codes.size(); ++i) EXPECT_EQ(list[i].code, codes[i]);
}

TEST(CatalogList, FilterByTag) {
    const auto singular = catalog_filter("singular");
    ASSERT_EQ(singular.size(), 1u);
    EXPECT_EQ(singular[0].code, "RS");
    EXPECT_EQ(catalog_filter("").size(), 6u);
    EXPECT_TRUE(catalog_filter("no-such-tag").empty());
}

TEST(CatalogList, LookupByKeyOrCode) {
    EXPECT_EQ(catalog_info("O").key, "rational_quartic");
    EXPECT_EQ(catalog_info("coulomb").code, "TU");
    EXPECT_THROW(catalog_info("harmonic"), InvalidParameter);
}

TEST(MakeEntry, ZeroEntry) {
    const auto e = make_entry("zero");
    for (double r : {0.0, 0.3, 7.0}) {
        EXPECT_EQ(e.potential(r == 0.0 ? 1.0 : r), 0.0);
        EXPECT_EQ(e.phi(r).value, r);
    }
}

TEST(MakeEntry, RationalQuarticValue) {
    const auto e = make_entry("O", {{"lambda", 4}, {"a", 1}});
    EXPECT_NEAR(e.phi(2.0).value, 1.5 * std::sinh(4.0 / 3.0), 1e-14);
    EXPECT_NEAR(e.phi(2.0).value, 2.647553067, 1e-9);
    EXPECT_NEAR(*e.slope, std::sinh(2.0) / 2.0, 1e-14);
}

TEST(MakeEntry, InverseSquareShape) {
    const auto e = make_entry("P", {{"lambda", 2}, {"b", 1}});
    for (double r : {0.1, 1.0, 5.0}) {
        EXPECT_NEAR(e.phi(r).value, std::sqrt(1 + r * r) * std::sinh(std::atan(r)), 1e-14 * (1 + r));
    }
    EXPECT_EQ(e.phi(0.0).value, 0.0);
    EXPECT_NEAR(e.phi(0.0).first, 1.0, 1e-15);
}

TEST(MakeEntry, CoulombAgainstStandardLibrary) {
    const auto e = make_entry("TU", {{"alpha", 1}});
    for (double x : {1e-4, 0.2, 1.0, 9.0}) {
        const double exact = std::sqrt(x) * std::cyl_bessel_i(1.0, 2.0 * std::sqrt(x));
        EXPECT_NEAR(e.phi(x).value, exact, 1e-13 * exact);
    }
    EXPECT_EQ(e.phi(0.0).value, 0.0);
    EXPECT_NEAR(e.phi(0.0).first, 1.0, 1e-15);
    EXPECT_NEAR(e.phi(1e-9).first, 1.0, 1e-8);
}

TEST(MakeEntry, ExponentialCoefficientsFromLinearSystem) {
    for (double lambda : {1.0, 3.0, -1.0, -10.0}) {
        const auto e = make_entry("Q", {{"lambda", lambda}, {"mu", 1}});
        const BesselOracle oracle(lambda, 1.0);
        for (double r : {0.5, 1.0, 3.0, 10.0, 30.0}) {
            const double want = oracle(r);
            EXPECT_NEAR(e.phi(r).value, want, 1e-9 * std::max(1.0, std::abs(want))) << lambda << " at " << r;
        }
        EXPECT_EQ(e.phi(0.0).value, 0.0);
        EXPECT_NEAR(e.phi(0.0).first, 1.0, 1e-15);
    }
}

TEST(MakeEntry, ExponentialMatchesOdeSolution) {
    for (double lambda : {1.0, -1.0, -10.0}) {
        const auto e = make_entry("Q", {{"lambda", lambda}});
        const Tabulated ode_phi = solve_regular(e.potential, e.potential.grid());
        double worst = 0.0;
        for (int i = 0; i <= 200; ++i) {
            const double r = 0.1 * i;
            worst = std::max(worst, std::abs(ode_phi(r) - e.phi(r).value) / std::max(1.0, std::abs(e.phi(r).value)));
        }
        EXPECT_LT(worst, 1e-8) << lambda;
    }
}

TEST(MakeEntry, InvalidParameters) {
    EXPECT_THROW(make_entry("O", {{"a", 0.0}}), InvalidParameter);
    EXPECT_THROW(make_entry("P", {{"b", -1.0}}), InvalidParameter);
    EXPECT_THROW(make_entry("Q", {{"mu", 0.0}}), InvalidParameter);
    EXPECT_THROW(make_entry("RS", {{"g", -1.0}}), InvalidParameter);
    EXPECT_THROW(make_entry("RS", {{"n", 3.0}}), InvalidParameter);
    EXPECT_THROW(make_entry("O", {{"mu", 1.0}}), InvalidParameter);
    EXPECT_THROW(make_entry("O", {{"lambda", NAN}}), InvalidParameter);
}

TEST(CatalogResiduals, ClosedFormsSatisfyTheirEquations) {
    const std::vector<std::pair<std::string, std::map<std::string, double>>> cases = {
        {"zero", {}},
        {"O", {{"lambda", 1}}},
        {"O", {{"lambda", 4}}},
        {"O", {{"lambda", -20}}},
        {"P", {{"lambda", 2}}},
        {"P", {{"lambda", -35}}},
        {"P", {{"lambda", 0.5}}},
        {"P", {{"lambda", 1}}},
        {"Q", {{"lambda", 1}}},
        {"Q", {{"lambda", -10}}},
        {"RS", {{"g", 1}}},
        {"RS", {{"g", 2.5}}},
        {"TU", {{"alpha", 1}}},
        {"TU", {{"alpha", -1}}},
    };
    for (const auto& [name, params] : cases) {
        const auto e = make_entry(name, params);
        EXPECT_LE(closed_form_residual(e), 1e-6) << name;
    }
}

TEST(CatalogBranches, ContinuousAcrossCouplingZero) {
    for (const char* name : {"O", "Q"}) {
        const auto plus = make_entry(name, {{"lambda", 1e-6}});
        const auto minus = make_entry(name, {{"lambda", -1e-6}});
        const auto zero = make_entry(name, {{"lambda", 0.0}});
        for (double r : {0.1, 1.0, 5.0}) {
            EXPECT_NEAR(plus.phi(r).value, minus.phi(r).value, 1e-5 * (1 + r * r)) << name;
            EXPECT_NEAR(zero.phi(r).value, r, 1e-14 * (1 + r)) << name;
        }
    }
    // P switches branch at lambda = 1.
    const auto above = make_entry("P", {{"lambda", 1.0 + 1e-6}});
    const auto below = make_entry("P", {{"lambda", 1.0 - 1e-6}});
    const auto at = make_entry("P", {{"lambda", 1.0}});
    for (double r : {0.1, 1.0, 5.0}) {
        EXPECT_NEAR(above.phi(r).value, below.phi(r).value, 1e-5 * (1 + r));
        EXPECT_NEAR(at.phi(r).value, std::sqrt(1 + r * r) * std::atan(r), 1e-14 * (1 + r));
    }
}

TEST(CatalogNodes, InverseSquareShapeFollowsZeroCondition) {
    // Zeros where sqrt(1 - lambda) atan(r/b) = k pi, k >= 1, strictly below pi/2.
    for (double lambda : {-3.0, -8.0, -15.0, -35.0, -48.0, -80.0}) {
        const double w = std::sqrt(1.0 - lambda);
        int expected = 0;
        for (int k = 1; k * std::numbers::pi < w * 0.5 * std::numbers::pi; ++k) {
            if (std::abs(k - 0.5 * w) > 1e-12) ++expected;
        }
        EXPECT_EQ(nodes(make_entry("P", {{"lambda", lambda}}), 1e5), expected) << lambda;
    }
    for (double lambda : {1.5, 2.0, 10.0}) EXPECT_EQ(nodes(make_entry("P", {{"lambda", lambda}})), 0);
}

TEST(CatalogNodes, ExponentialGrowsWithCoupling) {
    int previous = -1;
    for (double lambda : {-1.0, -10.0, -50.0}) {
        const int n = nodes(make_entry("Q", {{"lambda", lambda}}), 40.0);
        EXPECT_GE(n, previous);
        previous = n;
    }
    EXPECT_GT(previous, 0);
    EXPECT_EQ(nodes(make_entry("Q", {{"lambda", 1.0}})), 0);
}

TEST(CatalogNodes, BargmannBoundHolds) {
    for (double lambda : {-3.0, -35.0, -60.0}) {
        const auto e = make_entry("P", {{"lambda", lambda}});
        EXPECT_LE(nodes(e, 1e5), bargmann_bound(e.potential));
    }
    for (double lambda : {-10.0, -50.0}) {
        const auto e = make_entry("Q", {{"lambda", lambda}});
        EXPECT_LE(nodes(e, 40.0), bargmann_bound(e.potential));
    }
}

TEST(CatalogPairs, AsymptoticConstantsMatchFits) {
    for (const char* name : {"O", "P", "Q"}) {
        const auto e = make_entry(name);
        const auto pair = e.pair();
        const auto fit = asymptotic_constants(pair.regular, e.potential);
        EXPECT_NEAR(fit.slope, *e.slope, 1e-9) << name;
        EXPECT_NEAR(fit.offset, *e.offset, 1e-8) << name;
        EXPECT_LT(pair.wronskian_drift, 1e-8) << name;
    }
}

TEST(SingularPair, ClosedFormChi) {
    const auto g1 = grosse_singular_pair(1.0);
    EXPECT_NEAR(g1.chi0(1e4), 1.0, 1e-8);
    EXPECT_NEAR(g1.chi0(10.0), std::exp(1.0 / 600.0), 1e-15);
    EXPECT_NEAR(g1.chi0(10.0), 1.001668, 1e-6);
    EXPECT_NEAR(grosse_singular_pair(6.0).chi0(1.0), std::numbers::e, 1e-15);
}

TEST(SingularPair, AsymptoticRegimes) {
    for (double g : {1.0, 4.0}) {
        const auto p = grosse_singular_pair(g);
        // Leading-order small-r behaviour (3/(2g)) r^3 exp(-g/(6r^2)); next order is O(r^2/g).
        EXPECT_NEAR(p.near_origin_ratio, 1.0, 0.03);
        // Large-r offset -sqrt(pi g/3) from the Gaussian integral, O(1/R) correction included.
        EXPECT_NEAR(p.far_offset, p.derived_offset, 2.0 / p.far_radius * std::sqrt(g));
        EXPECT_NEAR(p.derived_offset, -std::sqrt(std::numbers::pi * g / 3.0), 1e-15);
        EXPECT_GT(std::abs(p.far_offset - p.naive_offset), 1e-2);
    }
    EXPECT_THROW(grosse_singular_pair(0.0), InvalidParameter);
}

TEST(SingularPair, PhiSolvesAuxiliaryEquation) {
    // chi0'' = (V0 + W0^2) chi0 with V0 = 1/r^4, W0 = -1/(3 r^3); phi0 = chi0 int dt/chi0^2 solves the same.
    const auto p = grosse_singular_pair(1.0);
    auto v = [](double r) { return 1.0 / std::pow(r, 4) + 1.0 / (9.0 * std::pow(r, 6)); };
    const auto grid = verification_grid(0.3, 20.0);
    EXPECT_LT(residual(p.phi0, v, grid).max, 1e-6);
    EXPECT_LT(residual(p.chi0, v, grid, 1e-2, 0.05).max, 1e-6);
}
