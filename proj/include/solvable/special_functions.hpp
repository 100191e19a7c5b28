#pragma once

// Ordinary and modified Bessel functions of order 0 and 1 for real arguments.
//
// I and J use their power series below `kSeriesCrossover` and the large-argument
// asymptotic expansions above it. The J/Y series are accumulated in long double
// because of the cancellation between alternating terms near x = 15. K uses its
// logarithmic series for x <= 2 and Steed's continued fraction beyond.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "solvable/errors.hpp"

namespace solvable {

enum class BesselKind { I, K, J, Y };

/// A Bessel family restricted to the orders 0 and 1.
class BesselFamily {
public:
    constexpr BesselFamily(BesselKind kind, int order) : kind_(kind), order_(order) {
        if (order != 0 && order != 1) {
            throw DomainError("Bessel order must be 0 or 1");
        }
    }
    constexpr BesselKind kind() const noexcept { return kind_; }
    constexpr int order() const noexcept { return order_; }

private:
    BesselKind kind_;
    int order_;
};

namespace bessel {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;
inline constexpr double kSeriesCrossover = 15.0;
inline constexpr double kKSeriesLimit = 2.0;

namespace detail {

/// I_n(x) = sum (x/2)^{2k+n} / (k! (k+n)!); every term is positive.
inline double i_series(int n, double x) {
    const double q = 0.25 * x * x;
    double term = n == 0 ? 1.0 : 0.5 * x;
    double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k + n));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

/// Sum of the large-argument series for I_n, without the e^x / sqrt(2 pi x) prefactor.
inline double i_asymptotic_sum(int n, double x) {
    const double mu = 4.0 * n * n;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = -term * (mu - odd * odd) / (8.0 * k * x);
        if (std::abs(next) >= std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

inline double i_asymptotic(int n, double x) {
    const double log_prefactor = x - 0.5 * std::log(2.0 * std::numbers::pi * x);
    const double sum = i_asymptotic_sum(n, x);
    if (log_prefactor + std::log(sum) >= std::log(std::numeric_limits<double>::max())) {
        throw OverflowError("modified Bessel I overflows for x = " + std::to_string(x));
    }
    return std::exp(log_prefactor) * sum;
}

inline long double j_series(int n, long double x) {
    const long double q = -0.25L * x * x;
    long double term = n == 0 ? 1.0L : 0.5L * x;
    long double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<long double>(k) * static_cast<long double>(k + n));
        sum += term;
        if (std::abs(term) < 1e-22L * (1.0L + std::abs(sum)) && k > 2) break;
    }
    return sum;
}

inline long double y_series(int n, long double x) {
    constexpr long double pi = std::numbers::pi_v<long double>;
    constexpr long double gamma = 0.577215664901532860606512090082402431L;
    const long double log_half = std::log(0.5L * x);
    const long double q = -0.25L * x * x;
    if (n == 0) {
        // Y0 = (2/pi)(ln(x/2) + gamma) J0 - (2/pi) sum_{k>=1} H_k (-x^2/4)^k / (k!)^2
        long double term = 1.0L;
        long double harmonic = 0.0L;
        long double sum = 0.0L;
        for (int k = 1; k < 500; ++k) {
            term *= q / (static_cast<long double>(k) * k);
            harmonic += 1.0L / k;
            const long double add = harmonic * term;
            sum += add;
            if (std::abs(add) < 1e-22L * (1.0L + std::abs(sum)) && k > 2) break;
        }
        return 2.0L / pi * ((log_half + gamma) * j_series(0, x) - sum);
    }
    // Y1 = -2/(pi x) + (2/pi) ln(x/2) J1
    //      - (1/pi)(x/2) sum_{k>=0} [psi(k+1) + psi(k+2)] (-x^2/4)^k / (k!(k+1)!)
    long double term = 1.0L;
    long double psi_k1 = -gamma;        // psi(1)
    long double psi_k2 = 1.0L - gamma;  // psi(2)
    long double sum = (psi_k1 + psi_k2) * term;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<long double>(k) * (k + 1));
        psi_k1 += 1.0L / k;
        psi_k2 += 1.0L / (k + 1);
        const long double add = (psi_k1 + psi_k2) * term;
        sum += add;
        if (std::abs(add) < 1e-22L * (1.0L + std::abs(sum)) && k > 2) break;
    }
    return -2.0L / (pi * x) + 2.0L / pi * log_half * j_series(1, x) - 0.5L * x * sum / pi;
}

/// Hankel expansions: returns {J_n, Y_n}.
struct JY {
    double j;
    double y;
};

inline JY jy_asymptotic(int n, double x) {
    const double mu = 4.0 * n * n;
    double p = 1.0;
    double q = 0.0;
    double a = 1.0;  // a_k = prod_{j<=k} (mu - (2j-1)^2) / (k! (8x)^k)
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        a *= (mu - odd * odd) / (8.0 * k * x);
        if (std::abs(a) >= prev) break;
        prev = std::abs(a);
        // P collects even k with sign (-1)^{k/2}, Q odd k with sign (-1)^{(k-1)/2}.
        switch (k % 4) {
            case 0: p += a; break;
            case 1: q += a; break;
            case 2: p -= a; break;
            case 3: q -= a; break;
        }
        if (std::abs(a) < 1e-17) break;
    }
    const double omega = x - (2.0 * n + 1.0) * 0.25 * std::numbers::pi;
    const double scale = std::sqrt(2.0 / (std::numbers::pi * x));
    const double c = std::cos(omega);
    const double s = std::sin(omega);
    return {scale * (p * c - q * s), scale * (p * s + q * c)};
}

struct KPair {
    double k0;
    double k1;
};

inline KPair k_series(double x) {
    const long double lx = x;
    const long double log_half = std::log(0.5L * lx);
    constexpr long double gamma = 0.577215664901532860606512090082402431L;
    const long double q = 0.25L * lx * lx;
    // K0 = -(ln(x/2) + gamma) I0 + sum_{k>=1} H_k (x^2/4)^k / (k!)^2
    long double t0 = 1.0L;
    long double i0 = 1.0L;
    long double harmonic = 0.0L;
    long double s0 = 0.0L;
    for (int k = 1; k < 200; ++k) {
        t0 *= q / (static_cast<long double>(k) * k);
        harmonic += 1.0L / k;
        i0 += t0;
        s0 += harmonic * t0;
        if (t0 < 1e-22L) break;
    }
    // K1 = 1/x + ln(x/2) I1 - (x/4) sum_{k>=0} [psi(k+1)+psi(k+2)] (x^2/4)^k / (k!(k+1)!)
    long double t1 = 1.0L;
    long double i1 = 1.0L;
    long double psi_k1 = -gamma;
    long double psi_k2 = 1.0L - gamma;
    long double s1 = psi_k1 + psi_k2;
    for (int k = 1; k < 200; ++k) {
        t1 *= q / (static_cast<long double>(k) * (k + 1));
        psi_k1 += 1.0L / k;
        psi_k2 += 1.0L / (k + 1);
        i1 += t1;
        s1 += (psi_k1 + psi_k2) * t1;
        if (t1 < 1e-22L) break;
    }
    i1 *= 0.5L * lx;
    const long double k0 = -(log_half + gamma) * i0 + s0;
    const long double k1 = 1.0L / lx + log_half * i1 - 0.25L * lx * s1;
    return {static_cast<double>(k0), static_cast<double>(k1)};
}

/// Steed's continued fraction for K_0 and K_1 (Temme's formulation), accurate for x >= 2.
inline KPair k_continued_fraction(double x) {
    const long double lx = x;
    long double b = 2.0L * (1.0L + lx);
    long double d = 1.0L / b;
    long double h = d;
    long double delh = d;
    long double q1 = 0.0L;
    long double q2 = 1.0L;
    const long double a1 = 0.25L;  // 1/4 - nu^2 with nu = 0
    long double q = a1;
    long double c = a1;
    long double a = -a1;
    long double s = 1.0L + q * delh;
    for (int i = 1; i < 100000; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0L);
        const long double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0L;
        d = 1.0L / (b + a * d);
        delh = (b * d - 1.0L) * delh;
        h += delh;
        const long double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < 1e-21L) break;
    }
    h = a1 * h;
    const long double k0 = std::sqrt(std::numbers::pi_v<long double> / (2.0L * lx)) * std::exp(-lx) / s;
    const long double k1 = k0 * (lx + 0.5L - h) / lx;
    return {static_cast<double>(k0), static_cast<double>(k1)};
}

inline void require_finite(double x) {
    if (std::isnan(x)) throw DomainError("Bessel argument is NaN");
}

}  // namespace detail

inline double I0(double x) {
    detail::require_finite(x);
    if (x < 0) throw DomainError("I0 requires x >= 0");
    return x <= kSeriesCrossover ? detail::i_series(0, x) : detail::i_asymptotic(0, x);
}

inline double I1(double x) {
    detail::require_finite(x);
    if (x < 0) throw DomainError("I1 requires x >= 0");
    return x <= kSeriesCrossover ? detail::i_series(1, x) : detail::i_asymptotic(1, x);
}

inline double K0(double x) {
    detail::require_finite(x);
    if (x <= 0) throw DomainError("K0 requires x > 0");
    return x <= kKSeriesLimit ? detail::k_series(x).k0 : detail::k_continued_fraction(x).k0;
}

inline double K1(double x) {
    detail::require_finite(x);
    if (x <= 0) throw DomainError("K1 requires x > 0");
    return x <= kKSeriesLimit ? detail::k_series(x).k1 : detail::k_continued_fraction(x).k1;
}

inline double J0(double x) {
    detail::require_finite(x);
    if (x < 0) throw DomainError("J0 requires x >= 0");
    return x <= kSeriesCrossover ? static_cast<double>(detail::j_series(0, x))
                                 : detail::jy_asymptotic(0, x).j;
}

inline double J1(double x) {
    detail::require_finite(x);
    if (x < 0) throw DomainError("J1 requires x >= 0");
    return x <= kSeriesCrossover ? static_cast<double>(detail::j_series(1, x))
                                 : detail::jy_asymptotic(1, x).j;
}

/// Neumann function Y0 (written N0 in some references).
inline double Y0(double x) {
    detail::require_finite(x);
    if (x <= 0) throw DomainError("Y0 requires x > 0");
    return x <= kSeriesCrossover ? static_cast<double>(detail::y_series(0, x))
                                 : detail::jy_asymptotic(0, x).y;
}

inline double Y1(double x) {
    detail::require_finite(x);
    if (x <= 0) throw DomainError("Y1 requires x > 0");
    return x <= kSeriesCrossover ? static_cast<double>(detail::y_series(1, x))
                                 : detail::jy_asymptotic(1, x).y;
}

}  // namespace bessel

/// Dispatches to the order-0/1 Bessel routines.
inline double bessel_eval(BesselFamily family, double x) {
    const bool first = family.order() == 1;
    switch (family.kind()) {
        case BesselKind::I: return first ? bessel::I1(x) : bessel::I0(x);
        case BesselKind::K: return first ? bessel::K1(x) : bessel::K0(x);
        case BesselKind::J: return first ? bessel::J1(x) : bessel::J0(x);
        case BesselKind::Y: return first ? bessel::Y1(x) : bessel::Y0(x);
    }
    throw DomainError("unknown Bessel family");
}

}  // namespace solvable
