#pragma once

namespace mvsim::stdnormal {

double pdf(double z);
double cdf(double z);
/// Quantile; returns -inf at 0 and +inf at 1.
double quantile(double u);

}  // namespace mvsim::stdnormal
