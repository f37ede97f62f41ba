#include "xtree/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace xtree {

double precision_at_k(std::span<const std::uint32_t> true_labels,
                      std::span<const std::uint32_t> ranked_predictions, std::uint32_t k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (ranked_predictions.size() < k)
        throw std::invalid_argument("fewer than k predictions given");
    std::uint32_t hits = 0;
    for (std::uint32_t i = 0; i < k; ++i)
        if (std::find(true_labels.begin(), true_labels.end(), ranked_predictions[i]) !=
            true_labels.end())
            ++hits;
    return static_cast<double>(hits) / static_cast<double>(k);
}

double mean_precision_at_k(const Dataset& dataset,
                           const std::vector<std::vector<std::uint32_t>>& predictions,
                           std::uint32_t k) {
    if (dataset.examples.empty()) throw std::invalid_argument("mean over an empty dataset");
    if (predictions.size() != dataset.examples.size())
        throw std::invalid_argument("predictions are not aligned with the dataset");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        sum += precision_at_k(dataset.examples[i].labels, predictions[i], k);
    return sum / static_cast<double>(predictions.size());
}

namespace {

// modified Lentz continued fraction for the incomplete beta
double beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log(1.0 - x);
    // the continued fraction converges fast only below the mean; reflect
    if (x < (a + 1.0) / (a + b + 2.0))
        return std::exp(log_front) * beta_cf(a, b, x) / a;
    return 1.0 - std::exp(log_front) * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
    if (dof <= 0.0) throw std::invalid_argument("degrees of freedom must be positive");
    double x = dof / (dof + t * t);
    return regularized_incomplete_beta(dof / 2.0, 0.5, x);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace {

// Exact two-sided binomial sign test with p = 1/2; zero diffs were dropped
// by the caller.
double sign_test_p(std::uint64_t wins, std::uint64_t n) {
    if (n == 0) return 1.0;  // no informative pairs
    std::uint64_t k = std::min(wins, n - wins);
    // tail = P(X <= k), X ~ Bin(n, 1/2), summed in log space
    double tail = 0.0;
    for (std::uint64_t i = 0; i <= k; ++i) {
        double log_term = std::lgamma(static_cast<double>(n) + 1.0) -
                          std::lgamma(static_cast<double>(i) + 1.0) -
                          std::lgamma(static_cast<double>(n - i) + 1.0) -
                          static_cast<double>(n) * std::log(2.0);
        tail += std::exp(log_term);
    }
    double p = 2.0 * tail;
    if (2 * k == n) p -= std::exp(std::lgamma(static_cast<double>(n) + 1.0) -
                                  2.0 * std::lgamma(static_cast<double>(n) / 2.0 + 1.0) -
                                  static_cast<double>(n) * std::log(2.0));
    return std::min(1.0, p);
}

}  // namespace

PairedTestResult paired_tests(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired series must align");
    if (a.size() < 2) throw std::invalid_argument("need at least 2 pairs");
    const std::size_t n = a.size();

    PairedTestResult r;

    // paired t
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = (a[i] - b[i]) - mean;
        var += d * d;
    }
    var /= static_cast<double>(n - 1);
    if (var == 0.0) {
        r.t_test_p = mean == 0.0 ? 1.0 : 0.0;
    } else {
        double t = mean / std::sqrt(var / static_cast<double>(n));
        r.t_test_p = student_t_two_sided_p(t, static_cast<double>(n - 1));
    }

    // sign test
    std::uint64_t wins = 0, informative = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        if (d == 0.0) continue;
        ++informative;
        if (d > 0.0) ++wins;
    }
    r.sign_p = sign_test_p(wins, informative);

    // Wilcoxon signed-rank, zeros dropped, mid-ranks for tied magnitudes
    std::vector<double> diffs;
    diffs.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] != b[i]) diffs.push_back(a[i] - b[i]);
    if (diffs.size() < 1) {
        r.wilcoxon_p = 1.0;
        return r;
    }
    std::vector<std::size_t> order(diffs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(diffs[x]) < std::abs(diffs[y]);
    });
    std::vector<double> rank(diffs.size());
    double tie_correction = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        double mid = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
        for (std::size_t t = i; t < j; ++t) rank[order[t]] = mid;
        double ties = static_cast<double>(j - i);
        tie_correction += ties * ties * ties - ties;
        i = j;
    }
    double w_plus = 0.0;
    for (std::size_t i = 0; i < diffs.size(); ++i)
        if (diffs[i] > 0.0) w_plus += rank[i];
    double nn = static_cast<double>(diffs.size());
    double mu = nn * (nn + 1.0) / 4.0;
    double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_correction / 48.0;
    if (variance <= 0.0) {
        r.wilcoxon_p = 1.0;
    } else {
        double z = (w_plus - mu) / std::sqrt(variance);
        r.wilcoxon_p = 2.0 * normal_sf(std::abs(z));
    }
    return r;
}

}  // namespace xtree
