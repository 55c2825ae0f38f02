#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "canepi/errors.hpp"
#include "canepi/rng.hpp"

namespace canepi {

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok) {
        throw ParameterError(what);
    }
}

inline bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// Sequential-search inversion for Poisson with moderate mean.
inline std::int64_t poisson_inversion(double lambda, RngStream& rng) {
    double u = rng.uniform01();
    double pk = std::exp(-lambda);
    double cdf = pk;
    std::int64_t k = 0;
    while (u >= cdf) {
        ++k;
        pk *= lambda / static_cast<double>(k);
        const double next = cdf + pk;
        if (next == cdf) {
            break; // tail exhausted in double precision
        }
        cdf = next;
    }
    return k;
}

} // namespace detail

/// Uniform integer on [lo, hi].
inline std::int64_t sample_discrete_uniform(std::int64_t lo, std::int64_t hi, RngStream& rng) {
    detail::require(lo <= hi, "discrete uniform requires lo <= hi");
    const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == std::numeric_limits<std::uint64_t>::max()) {
        return static_cast<std::int64_t>(rng.next_u64());
    }
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + rng.uniform_below(span + 1));
}

/// Exact binomial draw. Inversion on the smaller of p and 1-p; Bernoulli
/// summation when the zero-mass underflows.
inline std::int64_t sample_binomial(std::int64_t n, double p, RngStream& rng) {
    detail::require(n >= 0, "binomial requires n >= 0");
    detail::require(detail::is_probability(p), "binomial requires p in [0, 1]");
    if (n == 0 || p == 0.0) {
        return 0;
    }
    if (p == 1.0) {
        return n;
    }
    const bool flip = p > 0.5;
    const double q = flip ? 1.0 - p : p;
    const double p0 = std::exp(static_cast<double>(n) * std::log1p(-q));
    std::int64_t k = 0;
    if (p0 > 1e-280) {
        const double ratio = q / (1.0 - q);
        double u = rng.uniform01();
        double pk = p0;
        double cdf = pk;
        while (u >= cdf && k < n) {
            pk *= ratio * static_cast<double>(n - k) / static_cast<double>(k + 1);
            ++k;
            cdf += pk;
        }
    } else {
        for (std::int64_t i = 0; i < n; ++i) {
            k += rng.uniform01() < q ? 1 : 0;
        }
    }
    return flip ? n - k : k;
}

/// Exact Poisson draw; large means are split into independent chunks.
inline std::int64_t sample_poisson(double lambda, RngStream& rng) {
    detail::require(lambda >= 0.0 && std::isfinite(lambda), "poisson requires finite lambda >= 0");
    constexpr double chunk = 200.0;
    std::int64_t total = 0;
    while (lambda > chunk) {
        total += detail::poisson_inversion(chunk, rng);
        lambda -= chunk;
    }
    if (lambda > 0.0) {
        total += detail::poisson_inversion(lambda, rng);
    }
    return total;
}

/// Uniform real on [a, b); returns a when a == b.
inline double sample_continuous_uniform(double a, double b, RngStream& rng) {
    detail::require(a <= b, "continuous uniform requires a <= b");
    if (a == b) {
        return a;
    }
    const double r = a + (b - a) * rng.uniform01();
    return r < b ? r : std::nextafter(b, a);
}

/// Discrete power law on {0} ∪ [1, k_max]: 0 with probability p_zero,
/// otherwise k with mass proportional to k^-gamma. The CDF over [1, k_max]
/// is built once and inverted by binary search.
class PowerLawDegreeTable {
public:
    PowerLawDegreeTable(double gamma, std::int64_t k_max, double p_zero)
        : gamma_(gamma), k_max_(k_max), p_zero_(p_zero) {
        detail::require(gamma > 0.0 && std::isfinite(gamma), "power law requires gamma > 0");
        detail::require(k_max >= 1, "power law requires k_max >= 1");
        detail::require(detail::is_probability(p_zero), "power law requires p_zero in [0, 1]");
        pmf_.resize(static_cast<std::size_t>(k_max));
        double norm = 0.0;
        for (std::int64_t k = 1; k <= k_max; ++k) {
            pmf_[static_cast<std::size_t>(k - 1)] = std::pow(static_cast<double>(k), -gamma);
        }
        // Sum smallest terms first.
        for (auto it = pmf_.rbegin(); it != pmf_.rend(); ++it) {
            norm += *it;
        }
        cdf_.resize(pmf_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < pmf_.size(); ++i) {
            pmf_[i] /= norm;
            acc += pmf_[i];
            cdf_[i] = acc;
        }
        cdf_.back() = 1.0;
    }

    double gamma() const noexcept { return gamma_; }
    std::int64_t k_max() const noexcept { return k_max_; }
    double p_zero() const noexcept { return p_zero_; }

    /// Probability of drawing exactly k (including the zero branch).
    double probability(std::int64_t k) const noexcept {
        if (k == 0) {
            return p_zero_;
        }
        if (k < 1 || k > k_max_) {
            return 0.0;
        }
        return (1.0 - p_zero_) * pmf_[static_cast<std::size_t>(k - 1)];
    }

    std::int64_t operator()(RngStream& rng) const {
        if (p_zero_ > 0.0 && rng.uniform01() < p_zero_) {
            return 0;
        }
        if (p_zero_ == 1.0) {
            return 0;
        }
        const double u = rng.uniform01();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<std::int64_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), k_max_ - 1)) + 1;
    }

private:
    double gamma_;
    std::int64_t k_max_;
    double p_zero_;
    std::vector<double> pmf_;
    std::vector<double> cdf_;
};

/// One-shot draw; build a PowerLawDegreeTable when sampling repeatedly.
inline std::int64_t sample_power_law_degree(double gamma, std::int64_t k_max, double p_zero, RngStream& rng) {
    return PowerLawDegreeTable(gamma, k_max, p_zero)(rng);
}

struct DiscreteUniform {
    std::int64_t lo;
    std::int64_t hi;
    friend bool operator==(const DiscreteUniform&, const DiscreteUniform&) = default;
};
struct Binomial {
    std::int64_t n;
    double p;
    friend bool operator==(const Binomial&, const Binomial&) = default;
};
struct Poisson {
    double lambda;
    friend bool operator==(const Poisson&, const Poisson&) = default;
};
struct ContinuousUniform {
    double a;
    double b;
    friend bool operator==(const ContinuousUniform&, const ContinuousUniform&) = default;
};
struct PowerLawDegree {
    double gamma;
    std::int64_t k_max;
    double p_zero;
};

/// Parameterised distribution as it appears in configuration.
using DistributionSpec = std::variant<DiscreteUniform, Binomial, Poisson, ContinuousUniform, PowerLawDegree>;

inline void validate(const DistributionSpec& spec) {
    std::visit(
        [](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DiscreteUniform>) {
                detail::require(d.lo <= d.hi, "discrete uniform requires lo <= hi");
            } else if constexpr (std::is_same_v<T, Binomial>) {
                detail::require(d.n >= 0 && detail::is_probability(d.p), "binomial requires n >= 0 and p in [0, 1]");
            } else if constexpr (std::is_same_v<T, Poisson>) {
                detail::require(d.lambda >= 0.0, "poisson requires lambda >= 0");
            } else if constexpr (std::is_same_v<T, ContinuousUniform>) {
                detail::require(d.a <= d.b, "continuous uniform requires a <= b");
            } else {
                detail::require(d.gamma > 0.0 && d.k_max >= 1 && detail::is_probability(d.p_zero),
                                "power law requires gamma > 0, k_max >= 1, p_zero in [0, 1]");
            }
        },
        spec);
}

/// Draws from `spec` and returns the value as a double.
inline double sample(const DistributionSpec& spec, RngStream& rng) {
    return std::visit(
        [&rng](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DiscreteUniform>) {
                return static_cast<double>(sample_discrete_uniform(d.lo, d.hi, rng));
            } else if constexpr (std::is_same_v<T, Binomial>) {
                return static_cast<double>(sample_binomial(d.n, d.p, rng));
            } else if constexpr (std::is_same_v<T, Poisson>) {
                return static_cast<double>(sample_poisson(d.lambda, rng));
            } else if constexpr (std::is_same_v<T, ContinuousUniform>) {
                return sample_continuous_uniform(d.a, d.b, rng);
            } else {
                return static_cast<double>(sample_power_law_degree(d.gamma, d.k_max, d.p_zero, rng));
            }
        },
        spec);
}

/// Analytic mean of `spec`.
inline double mean(const DistributionSpec& spec) {
    return std::visit(
        [](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DiscreteUniform>) {
                return 0.5 * static_cast<double>(d.lo + d.hi);
            } else if constexpr (std::is_same_v<T, Binomial>) {
                return static_cast<double>(d.n) * d.p;
            } else if constexpr (std::is_same_v<T, Poisson>) {
                return d.lambda;
            } else if constexpr (std::is_same_v<T, ContinuousUniform>) {
                return 0.5 * (d.a + d.b);
            } else {
                PowerLawDegreeTable table(d.gamma, d.k_max, d.p_zero);
                double m = 0.0;
                for (std::int64_t k = 1; k <= d.k_max; ++k) {
                    m += static_cast<double>(k) * table.probability(k);
                }
                return m;
            }
        },
        spec);
}

} // namespace canepi
