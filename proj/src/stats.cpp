#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "errors.hpp"
#include "rng.hpp"

namespace softskills::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw ValidationError("mean of empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw ValidationError("variance needs at least 2 values");
  const double m = mean(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

namespace {

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1, qam = a - 1;
  double c = 1, d = 1 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw ValidationError("incomplete beta needs a, b > 0");
  if (x <= 0) return 0;
  if (x >= 1) return 1;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1) / (a + b + 2)) return front * beta_continued_fraction(a, b, x) / a;
  return 1 - front * beta_continued_fraction(b, a, 1 - x) / b;
}

double student_t_two_tailed(double t, double df) {
  if (std::isinf(t)) return 0;
  if (t == 0) return 1;
  return regularized_incomplete_beta(df / 2, 0.5, df / (df + t * t));
}

double student_t_upper(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 0 : 1;
  const double half = student_t_two_tailed(t, df) / 2;
  return t >= 0 ? half : 1 - half;
}

namespace {

void require_size(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) {
    throw ValidationError("t-test needs at least 2 values per sample (got " + std::to_string(a.size()) + " and " +
                          std::to_string(b.size()) + ")");
  }
}

double signed_infinity(double diff) {
  return diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

}  // namespace

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  require_size(a, b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double diff = mean(a) - mean(b);
  const double qa = sample_variance(a) / na, qb = sample_variance(b) / nb;
  const double se2 = qa + qb;
  TTestResult r;
  if (se2 == 0) {
    r.degenerate_variance = true;
    r.df = na + nb - 2;
    r.t = diff == 0 ? 0 : signed_infinity(diff);
    r.p = diff == 0 ? 1 : 0;
    return r;
  }
  r.t = diff / std::sqrt(se2);
  r.df = se2 * se2 / (qa * qa / (na - 1) + qb * qb / (nb - 1));
  r.p = student_t_two_tailed(r.t, r.df);
  return r;
}

TTestResult equal_var_t_test(std::span<const double> a, std::span<const double> b, bool one_tailed) {
  require_size(a, b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double diff = mean(a) - mean(b);
  const double pooled = ((na - 1) * sample_variance(a) + (nb - 1) * sample_variance(b)) / (na + nb - 2);
  TTestResult r;
  r.df = na + nb - 2;
  if (pooled == 0) {
    r.degenerate_variance = true;
    r.t = diff == 0 ? 0 : signed_infinity(diff);
  } else {
    r.t = diff / std::sqrt(pooled * (1 / na + 1 / nb));
  }
  r.p = one_tailed ? student_t_upper(r.t, r.df) : student_t_two_tailed(r.t, r.df);
  return r;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

BootstrapInterval bootstrap_mean_ci(std::span<const double> xs, std::size_t replicates, std::uint64_t seed,
                                    double level) {
  if (xs.empty()) throw ValidationError("bootstrap of empty sample");
  if (replicates == 0) throw ValidationError("bootstrap needs at least one replicate");
  BootstrapInterval out;
  out.estimate = mean(xs);
  std::vector<double> means(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    Rng rng(substream_seed(seed, r));
    double sum = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) sum += xs[rng.below(xs.size())];
    means[r] = sum / static_cast<double>(xs.size());
  }
  std::sort(means.begin(), means.end());
  const double tail = (1 - level) / 2;
  out.low = quantile_sorted(means, tail);
  out.high = quantile_sorted(means, 1 - tail);
  return out;
}

}  // namespace softskills::stats
