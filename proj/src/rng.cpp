#include "rawnight/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace rawnight::rng {

namespace {

// Stirling series correction log(k!) - [(k+1/2)log(k+1) - (k+1) + log(sqrt(2pi))].
double stirling_tail(std::int64_t k) {
    static constexpr double kTable[10] = {
        0.08106146679532726, 0.04134069595540929, 0.02767792568499834,
        0.02079067210376509, 0.01664469118982119, 0.01387612882307075,
        0.01189670994589177, 0.01041126526197209, 0.009255462182712733,
        0.008330563433362871};
    if (k <= 9) {
        return kTable[k];
    }
    const double inv = 1.0 / (static_cast<double>(k) + 1.0);
    const double inv2 = inv * inv;
    return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / 1260.0 * inv2) * inv2) * inv;
}

std::int64_t binomial_inversion(Stream& s, std::int64_t n, double p) {
    const double q = 1.0 - p;
    const double ratio = p / q;
    const double a = static_cast<double>(n + 1) * ratio;
    double r = std::pow(q, static_cast<double>(n));
    double u = s.uniform();
    std::int64_t x = 0;
    while (u > r) {
        u -= r;
        ++x;
        if (x > n) {
            // Accumulated rounding left a sliver of mass; restart.
            x = 0;
            r = std::pow(q, static_cast<double>(n));
            u = s.uniform();
            continue;
        }
        r *= a / static_cast<double>(x) - ratio;
    }
    return x;
}

// Hormann's transformed rejection with decomposition; requires p <= 0.5, n*p >= 10.
std::int64_t binomial_btrd(Stream& s, std::int64_t n, double p) {
    const double nd = static_cast<double>(n);
    const double q = 1.0 - p;
    const double m = std::floor((nd + 1.0) * p);
    const double r = p / q;
    const double nr = (nd + 1.0) * r;
    const double npq = nd * p * q;
    const double spq = std::sqrt(npq);
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = nd * p + 0.5;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double vr = 0.92 - 4.2 / b;
    const double urvr = 0.86 * vr;

    while (true) {
        double v = s.uniform();
        double u;
        if (v <= urvr) {
            u = v / vr - 0.43;
            return static_cast<std::int64_t>(
                std::floor((2.0 * a / (0.5 - std::abs(u)) + b) * u + c));
        }
        if (v >= vr) {
            u = s.uniform() - 0.5;
        } else {
            u = v / vr - 0.93;
            u = std::copysign(0.5, u) - u;
            v = s.uniform() * vr;
        }

        const double us = 0.5 - std::abs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + c);
        if (kd < 0.0 || kd > nd) {
            continue;
        }
        const auto k = static_cast<std::int64_t>(kd);
        v = v * alpha / (a / (us * us) + b);
        const double km = std::abs(kd - m);

        if (km <= 15.0) {
            double f = 1.0;
            const auto mi = static_cast<std::int64_t>(m);
            if (mi < k) {
                for (std::int64_t i = mi + 1; i <= k; ++i) {
                    f *= nr / static_cast<double>(i) - r;
                }
            } else if (mi > k) {
                for (std::int64_t i = k + 1; i <= mi; ++i) {
                    v *= nr / static_cast<double>(i) - r;
                }
            }
            if (v <= f) {
                return k;
            }
            continue;
        }

        v = std::log(v);
        const double rho =
            (km / npq) * (((km / 3.0 + 0.625) * km + 1.0 / 6.0) / npq + 0.5);
        const double t = -km * km / (2.0 * npq);
        if (v < t - rho) {
            return k;
        }
        if (v > t + rho) {
            continue;
        }

        const double nm = nd - m + 1.0;
        const double h = (m + 0.5) * std::log((m + 1.0) / (r * nm)) +
                         stirling_tail(static_cast<std::int64_t>(m)) +
                         stirling_tail(n - static_cast<std::int64_t>(m));
        const double nk = nd - kd + 1.0;
        if (v <= h + (nd + 1.0) * std::log(nm / nk) +
                     (kd + 0.5) * std::log(nk * r / (kd + 1.0)) -
                     stirling_tail(k) - stirling_tail(n - k)) {
            return k;
        }
    }
}

}  // namespace

std::uint64_t hash_double(double value) noexcept {
    if (value == 0.0) {
        value = 0.0;  // fold -0 onto +0
    }
    return mix64(std::bit_cast<std::uint64_t>(value));
}

double Stream::normal() noexcept {
    const double u1 = uniform_open0();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t Stream::binomial(std::int64_t n, double p) noexcept {
    if (n <= 0 || p <= 0.0) {
        return 0;
    }
    if (p >= 1.0) {
        return n;
    }
    const bool flipped = p > 0.5;
    const double pp = flipped ? 1.0 - p : p;
    const std::int64_t x = static_cast<double>(n) * pp < 10.0
                               ? binomial_inversion(*this, n, pp)
                               : binomial_btrd(*this, n, pp);
    return flipped ? n - x : x;
}

std::int64_t Stream::poisson(double lambda) noexcept {
    if (!(lambda > 0.0)) {
        return 0;
    }
    if (lambda < 10.0) {
        const double limit = std::exp(-lambda);
        std::int64_t k = 0;
        double prod = uniform_open0();
        while (prod > limit) {
            ++k;
            prod *= uniform_open0();
        }
        return k;
    }

    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);

    while (true) {
        const double u = uniform() - 0.5;
        const double v = uniform_open0();
        const double us = 0.5 - std::abs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) {
            return static_cast<std::int64_t>(kd);
        }
        if (kd < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
            -lambda + kd * loglam - std::lgamma(kd + 1.0)) {
            return static_cast<std::int64_t>(kd);
        }
    }
}

}  // namespace rawnight::rng
