#include "mclt/normal.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "mclt/parallel.hpp"

namespace mclt {

unsigned default_threads() {
  if (const char* env = std::getenv("MCLT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace normal {

double pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double ccdf(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

double quantile(double p) {
  if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
  if (!(p < 1.0)) return std::numeric_limits<double>::infinity();
  // erfc_inv keeps full relative accuracy in both tails.
  return -M_SQRT2 * boost::math::erfc_inv(2.0 * p);
}

double cdf_integral_below(double x) {
  if (x > 0.0) return x + ccdf_integral_above(x);
  return x * cdf(x) + pdf(x);
}

double ccdf_integral_above(double x) {
  if (x < 0.0) return -x + cdf_integral_below(x);
  return pdf(x) - x * ccdf(x);
}

}  // namespace normal
}  // namespace mclt
