#pragma once

// Error metrics. RMSE follows the block-averaged-root convention: the root is
// taken per block over trials, then averaged over blocks.

#include <Eigen/Dense>
#include <vector>

namespace leotrack {

/// errors[n][t] is the error of trial t in block n.
double rmse(const std::vector<std::vector<double>>& errors);

/// Same, from truth and estimate tables of equal shape.
double rmse(const std::vector<std::vector<double>>& truth,
            const std::vector<std::vector<double>>& estimate);

/// Mean of ||h - h_hat||^2 / ||h||^2 over all entries. Pairs with a zero-norm
/// truth channel are skipped; returns NaN when nothing is left.
double nmse(const std::vector<Eigen::VectorXcd>& truth, const std::vector<Eigen::VectorXcd>& estimate);

/// Per-pair normalized squared error; NaN for a zero-norm truth.
double normalized_error(const Eigen::VectorXcd& truth, const Eigen::VectorXcd& estimate);

/// Streaming per-block mean of squares.
class BlockMeanSquare {
 public:
  explicit BlockMeanSquare(int blocks = 0) : sum_(blocks, 0.0), count_(blocks, 0) {}

  void add_square(int block, double sq);
  void add_error(int block, double e) { add_square(block, e * e); }

  /// (1/N_B) sum_n sqrt(mean_t sq); blocks without samples are left out.
  double block_averaged_root() const;
  /// Plain mean over every sample.
  double mean() const;
  long total() const;
  void merge(const BlockMeanSquare& other);
  int blocks() const { return static_cast<int>(sum_.size()); }

 private:
  std::vector<double> sum_;
  std::vector<long> count_;
};

/// Ordinary least squares y = a + b x with the 95% confidence half-width on b.
struct SlopeFit {
  double intercept = 0.0;
  double slope = 0.0;
  double half_width = 0.0;

  bool contains_zero() const { return slope - half_width <= 0.0 && 0.0 <= slope + half_width; }
};

SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace leotrack
