#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace softskills::stats {

double mean(std::span<const double> xs);
/// Unbiased sample variance (n - 1 denominator); requires n >= 2.
double sample_variance(std::span<const double> xs);

/// I_x(a, b), continued-fraction evaluation (modified Lentz).
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `df` degrees of freedom (df may be
/// fractional).
double student_t_two_tailed(double t, double df);
/// P(T >= t).
double student_t_upper(double t, double df);

struct TTestResult {
  double t = 0;
  double df = 0;
  double p = 1;
  /// Both samples have zero variance. t is 0 (equal means) or +/-inf and p is
  /// set from the sign alone.
  bool degenerate_variance = false;
};

/// Unequal-variance two-sample t-test, Welch-Satterthwaite df, two-tailed p.
/// Throws ValidationError if either sample has fewer than 2 values.
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Pooled-variance Student t-test with df = n_a + n_b - 2. With `one_tailed`
/// the alternative is mean(a) > mean(b), i.e. p = P(T >= t).
TTestResult equal_var_t_test(std::span<const double> a, std::span<const double> b, bool one_tailed);

/// Linear-interpolation quantile (R type 7) of sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

struct BootstrapInterval {
  double estimate = 0;
  double low = 0;
  double high = 0;
};

/// Percentile bootstrap CI for the mean, resampling with replacement.
/// Deterministic given `seed`; replicate r draws from substream r.
BootstrapInterval bootstrap_mean_ci(std::span<const double> xs, std::size_t replicates, std::uint64_t seed,
                                    double level = 0.95);

}  // namespace softskills::stats
