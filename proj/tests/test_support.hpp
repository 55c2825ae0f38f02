#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace canepi::test {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

inline Moments moments(const std::vector<double>& xs) {
    Moments m;
    for (double x : xs) {
        m.mean += x;
    }
    m.mean /= static_cast<double>(xs.size());
    for (double x : xs) {
        m.variance += (x - m.mean) * (x - m.mean);
    }
    m.variance /= static_cast<double>(xs.size() - 1);
    return m;
}

struct ChiSquare {
    double statistic = 0.0;
    int df = 0;
    double critical = 0.0;

    bool passes() const { return statistic <= critical; }
};

/// Pearson goodness of fit. Adjacent categories are pooled (in key order)
/// until each expected count is at least 5.
inline ChiSquare chi_square(const std::map<std::int64_t, std::int64_t>& observed,
                            const std::map<std::int64_t, double>& probability, std::int64_t draws,
                            double alpha = 0.01) {
    std::vector<std::pair<double, double>> bins;
    double obs = 0.0;
    double expct = 0.0;
    for (const auto& [k, p] : probability) {
        const auto it = observed.find(k);
        obs += it == observed.end() ? 0.0 : static_cast<double>(it->second);
        expct += p * static_cast<double>(draws);
        if (expct >= 5.0) {
            bins.emplace_back(obs, expct);
            obs = 0.0;
            expct = 0.0;
        }
    }
    if (expct > 0.0 || obs > 0.0) {
        if (bins.empty()) {
            bins.emplace_back(obs, expct);
        } else {
            bins.back().first += obs;
            bins.back().second += expct;
        }
    }
    ChiSquare out;
    for (const auto& [o, e] : bins) {
        out.statistic += (o - e) * (o - e) / e;
    }
    out.df = static_cast<int>(bins.size()) - 1;
    out.critical = boost::math::quantile(boost::math::chi_squared(out.df), 1.0 - alpha);
    return out;
}

} // namespace canepi::test
