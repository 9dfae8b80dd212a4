// Two-group one-way ANOVA. The p-value comes from the F-distribution
// survival function, evaluated through the regularized incomplete beta
// function (continued fraction, modified Lentz).
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hrtfgroup/error.hpp"

namespace hrtfgroup {

// I_x(a, b), regularized incomplete beta.
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete beta: a, b > 0");
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("incomplete beta: x in [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;

    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
        b * std::log1p(-x);

    auto cont_frac = [](double a, double b, double x) {
        const double tiny = 1e-300;
        const double eps = 1e-15;
        double c = 1.0;
        double d = 1.0 - (a + b) * x / (a + 1.0);
        if (std::abs(d) < tiny) d = tiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= 500; ++m) {
            const double dm = static_cast<double>(m);
            double num = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            h *= d * c;
            num = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            const double delta = d * c;
            h *= delta;
            if (std::abs(delta - 1.0) < eps) break;
        }
        return h;
    };

    // use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) where the fraction converges fast
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(ln_front) * cont_frac(a, b, x) / a;
    }
    const double ln_front_sym =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + b * std::log1p(-x) +
        a * std::log(x);
    return 1.0 - std::exp(ln_front_sym) * cont_frac(b, a, 1.0 - x) / b;
}

// P(F(d1, d2) >= f)
inline double f_distribution_sf(double f, double d1, double d2) {
    if (f <= 0.0) return 1.0;
    const double x = d2 / (d2 + d1 * f);
    return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, x);
}

struct AnovaResult {
    double f_stat = 0.0;
    int df_between = 1;
    int df_within = 0;
    double p_value = 1.0;
    bool infinite_f = false;  // zero within-group variance with unequal means
};

inline AnovaResult one_way_anova(const std::vector<double>& group_a,
                                 const std::vector<double>& group_b) {
    const std::size_t na = group_a.size(), nb = group_b.size();
    if (na < 2 || nb < 2) throw std::invalid_argument("one_way_anova: each group needs >= 2");

    double ma = 0.0, mb = 0.0;
    for (double v : group_a) ma += v;
    for (double v : group_b) mb += v;
    ma /= static_cast<double>(na);
    mb /= static_cast<double>(nb);
    const double grand = (ma * static_cast<double>(na) + mb * static_cast<double>(nb)) /
                         static_cast<double>(na + nb);

    double ss_within = 0.0;
    for (double v : group_a) ss_within += (v - ma) * (v - ma);
    for (double v : group_b) ss_within += (v - mb) * (v - mb);
    const double ss_between = static_cast<double>(na) * (ma - grand) * (ma - grand) +
                              static_cast<double>(nb) * (mb - grand) * (mb - grand);

    AnovaResult result;
    result.df_between = 1;
    result.df_within = static_cast<int>(na + nb) - 2;
    const double ms_within = ss_within / static_cast<double>(result.df_within);

    if (ms_within == 0.0) {
        if (ss_between == 0.0) {
            result.f_stat = 0.0;
            result.p_value = 1.0;
        } else {
            result.f_stat = std::numeric_limits<double>::infinity();
            result.p_value = 0.0;
            result.infinite_f = true;
        }
        return result;
    }
    result.f_stat = ss_between / ms_within;
    result.p_value = f_distribution_sf(result.f_stat, 1.0, static_cast<double>(result.df_within));
    return result;
}

}  // namespace hrtfgroup
