#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "solvable/catalog.hpp"
#include "solvable/ode.hpp"
#include "solvable/residual.hpp"

using namespace solvable;

namespace {

// Closed forms used as oracles, written out independently of the catalog.
double phi_O4(double r) { return 0.5 * (1.0 + r) * std::sinh(2.0 * r / (1.0 + r)); }

RadialPotential rational_quartic_potential(double lambda) {
    RadialPotential v;
    v.name = "test_O";
    v.eval = [lambda](double r) { return lambda / std::pow(1.0 + r, 4); };
    v.origin = OriginClass::regular();
    v.infinity = InfinityClass::short_range(4.0);
    return v;
}

RadialPotential inverse_quartic_potential(double g) {
    RadialPotential v;
    v.name = "test_R";
    v.eval = [g](double r) { return g / (r * r * r * r); };
    v.origin = OriginClass::singular_repulsive(4.0, g);
    v.infinity = InfinityClass::short_range(4.0);
    return v;
}

}  // namespace

TEST(SolveRegular, FreeEquation) {
    const Tabulated phi = solve_regular(zero_potential(), GridSpec{});
    for (double r : {1e-4, 0.5, 3.0, 17.0, 39.0}) EXPECT_NEAR(phi(r), r, 1e-10 * (1.0 + r));
}

TEST(SolveRegular, RationalQuarticAgainstClosedForm) {
    const Tabulated phi = solve_regular(rational_quartic_potential(4.0), GridSpec::power_tail());
    double worst = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double r = 20.0 * i / 400;
        worst = std::max(worst, std::abs(phi(r) - phi_O4(r)));
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(SolveRegular, SingularQuarticAgainstClosedForm) {
    const auto v = inverse_quartic_potential(1.0);
    const Tabulated phi = solve_regular(v, v.grid());
    double worst = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double r = 0.05 + (20.0 - 0.05) * i / 400;
        worst = std::max(worst, std::abs(phi(r) - r * std::exp(-1.0 / r)));
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(SolveRegular, CentrifugalSeed) {
    // V = 2/r^2 has the regular solution r^2 (normalized with unit coefficient).
    RadialPotential v;
    v.eval = [](double r) { return 2.0 / (r * r); };
    v.origin = OriginClass::centrifugal(1);
    v.infinity = InfinityClass::short_range(2.0 + 1e-9);
    const Tabulated phi = solve_regular(v, GridSpec{});
    const double c = phi(1.0);
    for (double r : {0.01, 0.3, 2.0, 10.0}) EXPECT_NEAR(phi(r) / (c * r * r), 1.0, 1e-8);
}

TEST(ChiFromPhi, FreeEquationGivesUnitChi) {
    const SolutionPair pair = solve_pair(zero_potential(), GridSpec{});
    for (double r : {1e-5, 0.1, 1.0, 10.0, 39.0}) EXPECT_NEAR(pair.second(r), 1.0, 1e-10);
    EXPECT_NEAR(pair.slope, 1.0, 1e-12);
    EXPECT_NEAR(pair.offset, 0.0, 1e-10);
}

TEST(ChiFromPhi, RationalQuarticLimits) {
    const SolutionPair pair = solve_pair(rational_quartic_potential(4.0), GridSpec::power_tail());
    const double A = std::sinh(2.0) / 2.0;
    EXPECT_NEAR(pair.slope, A, 1e-8);
    // chi0(0) = 1, extrapolated linearly from the first mesh point.
    const double r0 = pair.regular.front();
    EXPECT_NEAR(pair.second(r0) - r0 * pair.second.derivative(r0), 1.0, 1e-10);
    // With phi0 = A r + B + O(1/r), chi0 = 1/A + O(1/r^2).
    EXPECT_NEAR(pair.second(2e4), 1.0 / A, 1e-8);
    EXPECT_NEAR(pair.second(100.0), 1.0 / A, 1e-4);
    EXPECT_LT(pair.wronskian_drift, 1e-8);
}

TEST(ChiFromPhi, SingularQuarticMatchesClosedForm) {
    const auto v = inverse_quartic_potential(1.0);
    const SolutionPair pair = solve_pair(v, v.grid());
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double r = 0.05 + (20.0 - 0.05) * i / 200;
        const double exact = r * std::sinh(1.0 / r);
        worst = std::max(worst, std::abs(pair.second(r) - exact) / std::max(1.0, exact));
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(ChiFromPhi, BoundStateIsAContractViolation) {
    // (P) shape with lambda = -35 binds two states; phi0 changes sign.
    RadialPotential v;
    v.eval = [](double r) { return -35.0 / std::pow(1.0 + r * r, 2); };
    v.origin = OriginClass::regular();
    v.infinity = InfinityClass::short_range(4.0);
    EXPECT_THROW(solve_pair(v, v.grid()), ContractViolation);
}

TEST(AsymptoticConstants, FreeAndQuartic) {
    const auto free_fit = asymptotic_constants(solve_regular(zero_potential(), GridSpec{}), zero_potential());
    EXPECT_NEAR(free_fit.slope, 1.0, 1e-12);
    EXPECT_NEAR(free_fit.offset, 0.0, 1e-10);

    // Large-r expansion of ((1+r)/2) sinh(2 - 2/(1+r)) = A r + (A - cosh 2) + O(1/r).
    const auto v = rational_quartic_potential(4.0);
    const auto fit = asymptotic_constants(solve_regular(v, v.grid()), v);
    const double A = std::sinh(2.0) / 2.0;
    EXPECT_NEAR(fit.slope, A, 1e-6);
    EXPECT_NEAR(fit.offset, A - std::cosh(2.0), 1e-6);
    EXPECT_NEAR(fit.slope_half, fit.slope, 1e-6);
}

TEST(AsymptoticConstants, InverseSquareShape) {
    // phi = sqrt(1+r^2) sinh(atan r) -> A = sinh(pi/2), B = -cosh(pi/2).
    RadialPotential v;
    v.eval = [](double r) { return 2.0 / std::pow(1.0 + r * r, 2); };
    v.origin = OriginClass::regular();
    v.infinity = InfinityClass::short_range(4.0);
    const auto fit = asymptotic_constants(solve_regular(v, v.grid()), v);
    EXPECT_NEAR(fit.slope, std::sinh(std::numbers::pi / 2), 1e-6);
    EXPECT_NEAR(fit.offset, -std::cosh(std::numbers::pi / 2), 1e-6);
}

TEST(AsymptoticConstants, LongRangeIsRejected) {
    RadialPotential v;
    v.eval = [](double r) { return 1.0 / r; };
    v.origin = OriginClass::regular();
    v.infinity = InfinityClass::coulomb(1.0);
    EXPECT_THROW(asymptotic_constants(solve_regular(v, v.grid()), v), ConvergenceError);
}

TEST(Nodes, FreeSolutionHasNone) {
    const auto n = count_nodes([](double r) { return r; }, 1e-3, 40.0);
    EXPECT_EQ(n.count, 0);
    EXPECT_FALSE(n.ambiguous);
}

TEST(Nodes, SineBranchTwoNodes) {
    // sqrt(1+r^2) sin(6 atan r): zeros where atan r = k pi/6, k = 1, 2.
    auto psi = [](double r) { return std::sqrt(1.0 + r * r) * std::sin(6.0 * std::atan(r)); };
    const auto n = count_nodes(psi, 1e-3, 200.0);
    ASSERT_EQ(n.count, 2);
    EXPECT_NEAR(n.locations[0], std::tan(std::numbers::pi / 6), 1e-6);
    EXPECT_NEAR(n.locations[1], std::tan(std::numbers::pi / 3), 1e-6);
}

TEST(Nodes, BoundaryCaseHasNone) {
    // sin(2 atan r) vanishes only as r -> infinity.
    auto psi = [](double r) { return std::sqrt(1.0 + r * r) * std::sin(2.0 * std::atan(r)); };
    EXPECT_EQ(count_nodes(psi, 1e-3, 1e4).count, 0);
}

TEST(Nodes, GrazingZeroIsAmbiguous) {
    std::vector<double> r, psi;
    for (int i = 1; i <= 200; ++i) {
        r.push_back(0.01 * i);
        const double d = r.back() - 1.0;
        psi.push_back(d * d);
    }
    const auto n = count_nodes(r, psi);
    EXPECT_EQ(n.count, 0);
    EXPECT_TRUE(n.ambiguous);
}

TEST(Bargmann, ClosedFormValues) {
    EXPECT_NEAR(bargmann_bound(zero_potential()), 0.0, 1e-12);
    EXPECT_NEAR(bargmann_bound(rational_quartic_potential(4.0)), 2.0 / 3.0, 1e-8);
    for (double lambda : {-35.0, 2.0, 7.5}) {
        RadialPotential v;
        v.eval = [lambda](double r) { return lambda / std::pow(1.0 + r * r, 2); };
        v.origin = OriginClass::regular();
        v.infinity = InfinityClass::short_range(4.0);
        EXPECT_NEAR(bargmann_bound(v), std::abs(lambda) / 2.0, 1e-8);
    }
}

TEST(Bargmann, DivergentIntegralIsReported) {
    EXPECT_THROW(bargmann_bound(inverse_quartic_potential(1.0)), IntegrabilityError);
}

TEST(Residual, ExactForLinearFunctions) {
    const auto grid = verification_grid(1e-3, 20.0);
    const auto res = residual([](double r) { return r; }, [](double) { return 0.0; }, grid);
    // Zero up to rounding of the abscissae r +- h.
    EXPECT_LT(res.max, 1e-10);
}

TEST(Residual, NegativeControlFails) {
    const auto grid = verification_grid(0.01, 20.0);
    const auto v = rational_quartic_potential(4.0);
    const auto good = residual(phi_O4, v, grid);
    EXPECT_LE(good.max, 1e-6);
    const auto bad = residual([](double r) { return phi_O4(r) + 1e-3 * r * r; }, v, grid);
    EXPECT_GT(bad.max, 1e-4);
}

TEST(Residual, SkipsPointsAtTheOrigin) {
    const std::vector<double> grid{0.0, 1e-8, 0.5};
    const auto res = residual([](double r) { return r; }, [](double) { return 0.0; }, grid);
    EXPECT_EQ(res.skipped.size(), 2u);
    EXPECT_EQ(res.r.size(), 1u);
}
