#include "psgdlab/stats.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <stdexcept>

namespace psgdlab {

double pairwise_sum(std::span<const double> values) noexcept {
  if (values.size() <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Estimate summarize(std::span<const double> values, std::uint64_t seed) {
  const std::size_t n = values.size();
  if (n < 2) throw std::invalid_argument("summarize: need at least two trials");
  const double mean = pairwise_sum(values) / static_cast<double>(n);
  std::vector<double> squares(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = values[i] - mean;
    squares[i] = dev * dev;
  }
  const double variance = pairwise_sum(squares) / static_cast<double>(n - 1);
  return Estimate{mean, std::sqrt(variance / static_cast<double>(n)), n, seed};
}

double combined_std_error(const Estimate& a, const Estimate& b) noexcept {
  return std::hypot(a.std_error, b.std_error);
}

BinomialInterval clopper_pearson(std::size_t successes, std::size_t trials, double confidence) {
  if (trials == 0 || successes > trials) {
    throw std::invalid_argument("clopper_pearson: need 0 <= successes <= trials, trials > 0");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("clopper_pearson: confidence must lie in (0, 1)");
  }
  const double tail = 0.5 * (1.0 - confidence);
  const auto k = static_cast<double>(successes);
  const auto n = static_cast<double>(trials);
  BinomialInterval out;
  out.lower = successes == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, tail);
  out.upper = successes == trials ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - tail);
  return out;
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("least_squares: need two or more paired points");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares: degenerate x values");
  const double slope = sxy / sxx;
  return LineFit{slope, my - slope * mx};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw std::invalid_argument("loglog_slope: non-positive x");
    lx[i] = std::log(x[i]);
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw std::invalid_argument("loglog_slope: non-positive y");
    ly[i] = std::log(y[i]);
  }
  return least_squares(lx, ly).slope;
}

}  // namespace psgdlab
