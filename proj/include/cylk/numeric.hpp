#pragma once

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cylk {

// Thrown when an iterative numerical procedure fails to converge or a
// computation degenerates (NaN posterior, optimizer breakdown, ...).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double normal_cdf(double x);

// Modified Bessel function of the first kind, order 0; log version stays
// finite for large arguments.
double bessel_i0(double x);
double log_bessel_i0(double x);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
double gamma_cdf(double x, double shape, double rate);
double chi_square_cdf(double x, double dof);

// Gauss-Legendre nodes/weights on [-1, 1]; cached per n.
struct QuadRule {
  std::vector<double> nodes, weights;
};
const QuadRule& gauss_legendre(int n);

// integral of f over [a, b] with an n-point Gauss-Legendre rule
double integrate(const std::function<double(double)>& f, double a, double b, int n);

// One-sample Kolmogorov-Smirnov test against a continuous cdf.
struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
KsResult ks_test(std::vector<double> values, const std::function<double(double)>& cdf);

// chi-square goodness of fit from observed counts and expected counts
double chi_square_gof_pvalue(const std::vector<double>& observed,
                             const std::vector<double>& expected);

// Derivative-free Nelder-Mead simplex minimization.
struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  bool converged = false;
  int evaluations = 0;
};
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          std::vector<double> x0, double step,
                          double rel_tol = 1e-8, int max_iter = 2000);

struct RunningStats {
  long long n = 0;
  double mean = 0.0, m2 = 0.0;
  void add(double x) {
    ++n;
    const double d1 = x - mean;
    mean += d1 / static_cast<double>(n);
    m2 += d1 * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double std_error() const;
};

}  // namespace cylk
