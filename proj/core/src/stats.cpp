#include "qtraj/stats.hpp"

#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "qtraj/errors.hpp"

namespace qtraj {

MeanSE mean_se(std::span<const double> xs) {
    if (xs.empty()) throw ModelError("mean_se: empty sample");
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / double(xs.size());
    if (xs.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / double(xs.size() - 1);
    return {mean, std::sqrt(var / double(xs.size()))};
}

double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) throw ModelError("sample_variance: need >= 2 samples");
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / double(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / double(xs.size() - 1);
}

double fit_exponential_decay_rate(std::span<const double> times,
                                  std::span<const double> values,
                                  double floor) {
    if (times.size() != values.size())
        throw ModelError("fit_exponential_decay_rate: size mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long n = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double v = std::abs(values[i]);
        if (v < floor) continue;
        const double y = std::log(v);
        sx += times[i];
        sy += y;
        sxx += times[i] * times[i];
        sxy += times[i] * y;
        ++n;
    }
    if (n < 2)
        throw ModelError("fit_exponential_decay_rate: fewer than 2 usable "
                         "points");
    const double denom = double(n) * sxx - sx * sx;
    if (denom == 0.0)
        throw ModelError("fit_exponential_decay_rate: degenerate times");
    const double slope = (double(n) * sxy - sx * sy) / denom;
    return -slope;
}

double chi_square_statistic(std::span<const long> observed,
                            std::span<const double> expected_probs) {
    if (observed.size() != expected_probs.size())
        throw ModelError("chi_square_statistic: size mismatch");
    long total = 0;
    for (long o : observed) total += o;
    if (total <= 0) throw ModelError("chi_square_statistic: no observations");
    double chi2 = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double expected = expected_probs[i] * double(total);
        if (expected <= 0.0) {
            if (observed[i] != 0)
                throw ModelError("chi_square_statistic: observation in a "
                                 "zero-probability bin");
            continue;
        }
        const double d = double(observed[i]) - expected;
        chi2 += d * d / expected;
    }
    return chi2;
}

double chi_square_quantile(double p, int dof) {
    boost::math::chi_squared dist(dof);
    return boost::math::quantile(dist, p);
}

double autocorrelation(std::span<const double> xs, long lag) {
    if (lag < 0 || std::size_t(lag) >= xs.size())
        throw ModelError("autocorrelation: lag out of range");
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= double(xs.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        den += (xs[i] - mean) * (xs[i] - mean);
        if (i + lag < xs.size())
            num += (xs[i] - mean) * (xs[i + lag] - mean);
    }
    if (den == 0.0) return 0.0;
    return num / den;
}

} // namespace qtraj
