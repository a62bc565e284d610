#ifndef POLYURN_TESTS_STAT_TESTS_HPP
#define POLYURN_TESTS_STAT_TESTS_HPP

// Classical goodness-of-fit machinery for the stochastic tests: Kolmogorov-
// Smirnov (one and two sample) and chi-square p-values. Asymptotic forms with
// the usual small-sample correction; fine at the sample sizes used here.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace stattest {

// Survival function of the Kolmogorov distribution.
inline double kolmogorov_q(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) *
                            std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::min(1.0, std::max(0.0, sum));
}

inline double ks_p_from_d(double d, double n_eff) {
    const double s = std::sqrt(n_eff);
    return kolmogorov_q((s + 0.12 + 0.11 / s) * d);
}

// One-sample KS against a given CDF.
inline double ks_test(std::vector<double> sample, const std::function<double(double)>& cdf,
                      double* d_out = nullptr) {
    std::sort(sample.begin(), sample.end());
    const std::size_t n = sample.size();
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = cdf(sample[i]);
        d = std::max(d, std::abs(c - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - c));
    }
    if (d_out) *d_out = d;
    return ks_p_from_d(d, static_cast<double>(n));
}

// Two-sample KS.
inline double ks_test_two(std::vector<double> a, std::vector<double> b,
                          double* d_out = nullptr) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t na = a.size(), nb = b.size();
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < na && j < nb) {
        const double v = std::min(a[i], b[j]);
        while (i < na && a[i] <= v) ++i;
        while (j < nb && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    if (d_out) *d_out = d;
    const double n_eff = static_cast<double>(na) * nb / static_cast<double>(na + nb);
    return ks_p_from_d(d, n_eff);
}

// Regularized incomplete gamma Q(a,x) by series / continued fraction.
inline double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q domain");
    if (x == 0.0) return 1.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        // series for P(a,x)
        double ap = a, del = 1.0 / a, sum = del;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
    }
    // Lentz continued fraction for Q(a,x)
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

// Chi-square goodness of fit: counts vs expected probabilities.
inline double chi_square_test(const std::vector<std::size_t>& counts,
                              const std::vector<double>& probs) {
    if (counts.size() != probs.size()) throw std::invalid_argument("chi_square sizes");
    double n = 0.0;
    for (std::size_t c : counts) n += static_cast<double>(c);
    double stat = 0.0;
    std::size_t dof = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double e = n * probs[i];
        if (e < 1e-12) continue;
        const double diff = static_cast<double>(counts[i]) - e;
        stat += diff * diff / e;
        ++dof;
    }
    if (dof < 2) throw std::invalid_argument("chi_square dof");
    return gamma_q(0.5 * static_cast<double>(dof - 1), 0.5 * stat);
}

// Least-squares slope of y on x.
inline double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

} // namespace stattest

#endif
