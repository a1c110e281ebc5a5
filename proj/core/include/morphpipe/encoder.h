#pragma once

#include <string>
#include <vector>

#include "morphpipe/nn.h"

namespace morphpipe {

struct EncoderDims {
  std::size_t input_dim = 556;
  std::size_t width = 128;
  std::size_t pieces = 3;
  std::size_t depth = 4;
};

// Linear projection followed by `depth` residual blocks. Each block maps the
// window [h(i-1); h(i); h(i+1)] (zero padded at the edges) to pieces*width
// values, takes the maxout, and adds the block input. Receptive field is
// +-depth tokens. Tokens are columns.
class ConvEncoder {
 public:
  struct Cache {
    Matrix input;       // after input dropout
    Matrix input_mask;  // empty when dropout was off
    std::vector<Matrix> windows;
    std::vector<Eigen::MatrixXi> argmax;
    Matrix output_mask;
  };

  ConvEncoder(const EncoderDims& dims, const std::string& name_prefix);

  void init(Rng& rng);

  // Throws ContractViolation when the input height is not input_dim.
  // Dropout is applied to the input and the output when `rng` is given and
  // `dropout` > 0.
  Matrix forward(const Matrix& input, Cache* cache, Rng* rng = nullptr,
                 double dropout = 0.0) const;

  // Accumulates parameter gradients and returns d(loss)/d(input).
  Matrix backward(const Cache& cache, const Matrix& dout);

  const EncoderDims& dims() const { return dims_; }
  ParamList params();

 private:
  static void build_window(const Matrix& h, Matrix& window);

  EncoderDims dims_;
  Param proj_w_;
  Param proj_b_;
  std::vector<Param> conv_w_;
  std::vector<Param> conv_b_;
};

// Linear map followed by a softmax over a frozen label inventory.
class SoftmaxHead {
 public:
  SoftmaxHead() = default;
  SoftmaxHead(std::size_t input_dim, std::size_t classes,
              const std::string& name);

  // Output layers start at zero, so the initial distribution is uniform.
  Matrix forward(const Matrix& input) const;
  // Accumulates gradients, returns d(loss)/d(input).
  Matrix backward(const Matrix& input, const Matrix& dlogits);

  std::size_t classes() const {
    return static_cast<std::size_t>(weight_.value.rows());
  }
  Param& weight() { return weight_; }
  Param& bias() { return bias_; }
  const Param& weight() const { return weight_; }
  const Param& bias() const { return bias_; }
  ParamList params() { return {&weight_, &bias_}; }

 private:
  Param weight_;
  Param bias_;
};

// Inverted dropout mask: entries are 0 with probability `rate`, otherwise
// 1/(1-rate).
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);

}  // namespace morphpipe
