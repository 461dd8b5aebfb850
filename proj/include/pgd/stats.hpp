#ifndef PGD_STATS_HPP
#define PGD_STATS_HPP

#include <functional>

namespace pgd {
namespace stats {

// Standard normal density, CDF, and quantile. The quantile is Wichura's
// algorithm AS 241 (PPND16), accurate to full double precision; it backs both
// the counter RNG and the empirical-quantile Wasserstein integrals.
double norm_pdf(double x);
double norm_cdf(double x);
double norm_ppf(double p);

// Recursive adaptive Simpson quadrature with absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth = 40);

} // namespace stats
} // namespace pgd

#endif
