#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace morphpipe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Seeded generator with platform-independent draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// A named trainable tensor with its gradient accumulator.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param() = default;
  Param(std::string param_name, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(param_name)),
        value(Matrix::Zero(rows, cols)),
        grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
  void init_uniform(Rng& rng, double scale);
  // Glorot-style uniform bound from fan-in and fan-out.
  void init_glorot(Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out);
};

using ParamList = std::vector<Param*>;

void zero_grads(const ParamList& params);
double grad_norm(const ParamList& params);
// Rounds every value to the nearest float32 so that float32 storage is exact.
void round_to_float(const ParamList& params);
bool all_finite(const ParamList& params);

struct TrainConfig {
  double learning_rate = 0.001;
  std::size_t batch_size = 8;
  std::size_t epochs = 20;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 10.0;
  double dropout = 0.1;
  std::uint64_t seed = 0;
  // Consecutive sentences grouped into one training sequence, so that the
  // sentence-start head sees boundaries inside its input.
  std::size_t sentences_per_example = 3;
};

// Adam with global L2 gradient clipping. Moments live alongside the
// parameter list given at construction.
class Adam {
 public:
  Adam(ParamList params, const TrainConfig& config);

  // Applies one update from the accumulated gradients, then zeroes them.
  // Returns the gradient norm before clipping.
  double step();

 private:
  ParamList params_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  TrainConfig config_;
  std::uint64_t steps_ = 0;
};

// Maxout over `pieces` consecutive rows: row j*pieces + p is piece p of unit
// j. Writes the winning piece index per output cell.
void maxout_forward(const Matrix& pre, int pieces, Matrix& out,
                    Eigen::MatrixXi& argmax);
// Scatters dout into the winning pieces.
void maxout_backward(const Matrix& dout, const Eigen::MatrixXi& argmax,
                     int pieces, Matrix& dpre);

// Mean softmax cross-entropy over the columns of `logits`. When `mask` is
// given, entries with mask 0 are excluded from the softmax. `dlogits`
// receives scale * d(mean loss)/d(logits).
double softmax_cross_entropy(const Matrix& logits, std::span<const int> gold,
                             const Eigen::MatrixXi* mask, double scale,
                             Matrix* dlogits);

// Index of the largest logit with mask != 0 (all allowed when mask is null);
// -1 if nothing is allowed.
int masked_argmax(const Eigen::Ref<const Vector>& logits, const int* mask);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::string worst_param;
};

// Compares analytic gradients with central differences of step `h` on up to
// `max_samples` randomly chosen scalar parameters. `loss` must recompute the
// loss from the current parameter values; when its argument is true it must
// also accumulate gradients into Param::grad (after they were zeroed).
// Relative error is |a - n| / max(|a|, |n|, 1e-6).
GradientCheckResult gradient_check(const std::function<double(bool)>& loss,
                                   const ParamList& params,
                                   std::size_t max_samples, Rng& rng,
                                   double h = 1e-5);

}  // namespace morphpipe
