#pragma once

#include <functional>
#include <vector>

namespace lnoise {

double median(std::vector<double> x);
double mean(const std::vector<double>& x);

/// sup_x |F_n(x) - F(x)| for the empirical distribution of the samples.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

/// CDF of T * chi^2 with k degrees of freedom.
double scaled_chi2_cdf(double x, double k, double T);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lnoise
