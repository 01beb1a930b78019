#include "leotrack/metrics.hpp"

#include <cmath>
#include <limits>

#include "leotrack/errors.hpp"

namespace leotrack {

double rmse(const std::vector<std::vector<double>>& errors) {
  if (errors.empty()) throw ContractViolation("rmse: no blocks");
  double acc = 0.0;
  for (const auto& block : errors) {
    if (block.empty()) throw ContractViolation("rmse: block without trials");
    double sq = 0.0;
    for (double e : block) sq += e * e;
    acc += std::sqrt(sq / double(block.size()));
  }
  return acc / double(errors.size());
}

double rmse(const std::vector<std::vector<double>>& truth,
            const std::vector<std::vector<double>>& estimate) {
  if (truth.size() != estimate.size()) throw ContractViolation("rmse: block count mismatch");
  std::vector<std::vector<double>> err(truth.size());
  for (std::size_t n = 0; n < truth.size(); ++n) {
    if (truth[n].size() != estimate[n].size()) throw ContractViolation("rmse: trial count mismatch");
    err[n].resize(truth[n].size());
    for (std::size_t t = 0; t < truth[n].size(); ++t) err[n][t] = estimate[n][t] - truth[n][t];
  }
  return rmse(err);
}

double normalized_error(const Eigen::VectorXcd& truth, const Eigen::VectorXcd& estimate) {
  if (truth.size() != estimate.size()) throw ContractViolation("nmse: dimension mismatch");
  const double n2 = truth.squaredNorm();
  if (n2 == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (truth - estimate).squaredNorm() / n2;
}

double nmse(const std::vector<Eigen::VectorXcd>& truth, const std::vector<Eigen::VectorXcd>& estimate) {
  if (truth.empty() || truth.size() != estimate.size()) {
    throw ContractViolation("nmse: need matching nonempty inputs");
  }
  double acc = 0.0;
  long n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = normalized_error(truth[i], estimate[i]);
    if (std::isnan(e)) continue;
    acc += e;
    ++n;
  }
  return n ? acc / double(n) : std::numeric_limits<double>::quiet_NaN();
}

void BlockMeanSquare::add_square(int block, double sq) {
  if (block < 0 || block >= blocks()) throw ContractViolation("BlockMeanSquare: block out of range");
  sum_[block] += sq;
  ++count_[block];
}

double BlockMeanSquare::block_averaged_root() const {
  double acc = 0.0;
  int used = 0;
  for (std::size_t n = 0; n < sum_.size(); ++n) {
    if (count_[n] == 0) continue;
    acc += std::sqrt(sum_[n] / double(count_[n]));
    ++used;
  }
  return used ? acc / used : std::numeric_limits<double>::quiet_NaN();
}

double BlockMeanSquare::mean() const {
  double s = 0.0;
  long c = 0;
  for (std::size_t n = 0; n < sum_.size(); ++n) {
    s += sum_[n];
    c += count_[n];
  }
  return c ? s / double(c) : std::numeric_limits<double>::quiet_NaN();
}

long BlockMeanSquare::total() const {
  long c = 0;
  for (long k : count_) c += k;
  return c;
}

void BlockMeanSquare::merge(const BlockMeanSquare& other) {
  if (other.blocks() != blocks()) throw ContractViolation("BlockMeanSquare: block count mismatch");
  for (std::size_t n = 0; n < sum_.size(); ++n) {
    sum_[n] += other.sum_[n];
    count_[n] += other.count_[n];
  }
}

SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 3) throw ContractViolation("fit_slope: need >= 3 paired samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ContractViolation("fit_slope: x has no spread");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    rss += r * r;
  }
  const double se = std::sqrt(rss / double(n - 2) / sxx);
  // Normal quantile; the fits here always have hundreds of samples.
  fit.half_width = 1.959963984540054 * se;
  return fit;
}

}  // namespace leotrack
