#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace ps::stats {

// Quantile of the standard normal (Acklam's rational approximation refined
// with one Halley step on erfc, giving ~1e-15 accuracy).
double normal_quantile(double p);

// Two-sided z value for a central confidence interval at `confidence`.
inline double z_for_confidence(double confidence) {
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("confidence must lie in (0, 1)");
    return normal_quantile(0.5 * (1.0 + confidence));
}

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

// Upper tail of the chi-square distribution with `df` degrees of freedom.
inline double chi_square_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    return 1.0 - gamma_p(0.5 * df, 0.5 * x);
}

struct MeanVar {
    double mean = 0.0;
    double variance = 0.0;  // unbiased (n-1)
};

MeanVar mean_variance(std::span<const double> xs);

// log(sum(exp(xs))) with max-shift; -inf for empty or all -inf input.
double log_sum_exp(std::span<const double> xs);

}  // namespace ps::stats
