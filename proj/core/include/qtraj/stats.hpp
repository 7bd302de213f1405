#ifndef QTRAJ_STATS_HPP
#define QTRAJ_STATS_HPP

#include <span>
#include <vector>

namespace qtraj {

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
};

MeanSE mean_se(std::span<const double> xs);

double sample_variance(std::span<const double> xs);

/// Least-squares slope of log|values| against times, returned as a positive
/// decay rate. Points with |value| below `floor` are skipped.
double fit_exponential_decay_rate(std::span<const double> times,
                                  std::span<const double> values,
                                  double floor = 1e-12);

/// Pearson chi-square statistic for observed counts against expected
/// probabilities (counts sum to the number of draws).
double chi_square_statistic(std::span<const long> observed,
                            std::span<const double> expected_probs);

/// Upper quantile of the chi-square distribution with `dof` degrees of
/// freedom: returns x with P(X <= x) = p.
double chi_square_quantile(double p, int dof);

/// Empirical autocorrelation of xs at the given lag.
double autocorrelation(std::span<const double> xs, long lag);

} // namespace qtraj

#endif
