#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cellmob/quadrature.hpp"

namespace testutil {

// Two-sided Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - f));
        d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    }
    return d;
}

// CDF of a density known only pointwise: cumulative Gauss-Kronrod panels
// between consecutive sorted sample points.
inline std::function<double(double)> cdf_from_pdf(const std::function<double(double)>& pdf,
                                                  double lo,
                                                  const std::vector<double>& sorted_points) {
    auto cum = std::make_shared<std::vector<std::pair<double, double>>>();
    double acc = 0.0, prev = lo;
    for (double x : sorted_points) {
        if (x > prev) acc += cellmob::integrate(pdf, prev, x, 1e-12, 1e-10, 60).value;
        cum->push_back({x, acc});
        prev = std::max(prev, x);
    }
    auto it = std::make_shared<std::size_t>(0);
    return [cum, it](double x) {
        // sorted_points are queried in order by ks_statistic
        while (*it + 1 < cum->size() && (*cum)[*it].first < x) ++(*it);
        // exact match expected; fall back to search
        if ((*cum)[*it].first != x) {
            auto pos = std::lower_bound(cum->begin(), cum->end(), x,
                                        [](const auto& a, double b) { return a.first < b; });
            if (pos != cum->end()) return pos->second;
            return cum->back().second;
        }
        return (*cum)[*it].second;
    };
}

// KS against a pdf: integrates the pdf once along the sorted sample.
inline double ks_statistic_pdf(std::vector<double> samples,
                               const std::function<double(double)>& pdf, double lo) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0, acc = 0.0, prev = lo;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double x = samples[i];
        if (x > prev) {
            acc += cellmob::integrate(pdf, prev, x, 1e-13, 1e-11, 60).value;
            prev = x;
        }
        d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - acc));
        d = std::max(d, std::abs(static_cast<double>(i) / n - acc));
    }
    return d;
}

// Pearson chi-square statistic for observed counts vs expected probabilities.
inline double chi_square(const std::vector<double>& observed,
                         const std::vector<double>& expected_prob, double total) {
    double chi = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double e = expected_prob[i] * total;
        if (e > 0.0) chi += (observed[i] - e) * (observed[i] - e) / e;
    }
    return chi;
}

// Hill estimator of a power tail exponent from the k largest samples.
inline double hill_tail_exponent(std::vector<double> samples, std::size_t k) {
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();
    double sum = 0.0;
    const double x_k = samples[n - k - 1];
    for (std::size_t i = n - k; i < n; ++i) sum += std::log(samples[i] / x_k);
    return static_cast<double>(k) / sum;
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace testutil
