#include "morphpipe/encoder.h"

#include "morphpipe/errors.h"

namespace morphpipe {

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                    Rng& rng) {
  Matrix mask(rows, cols);
  const double keep = 1.0 / (1.0 - rate);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      mask(r, c) = rng.uniform() < rate ? 0.0 : keep;
    }
  }
  return mask;
}

ConvEncoder::ConvEncoder(const EncoderDims& dims,
                         const std::string& name_prefix)
    : dims_(dims) {
  const auto w = static_cast<Eigen::Index>(dims.width);
  const auto pw = static_cast<Eigen::Index>(dims.width * dims.pieces);
  proj_w_ = Param(name_prefix + "proj.w", w,
                  static_cast<Eigen::Index>(dims.input_dim));
  proj_b_ = Param(name_prefix + "proj.b", w, 1);
  for (std::size_t l = 0; l < dims.depth; ++l) {
    const std::string layer = name_prefix + "conv" + std::to_string(l);
    conv_w_.emplace_back(layer + ".w", pw, 3 * w);
    conv_b_.emplace_back(layer + ".b", pw, 1);
  }
}

void ConvEncoder::init(Rng& rng) {
  proj_w_.init_glorot(rng, proj_w_.value.cols(), proj_w_.value.rows());
  for (Param& w : conv_w_) {
    w.init_glorot(rng, w.value.cols(),
                  w.value.rows() / static_cast<Eigen::Index>(dims_.pieces));
  }
}

void ConvEncoder::build_window(const Matrix& h, Matrix& window) {
  const Eigen::Index w = h.rows();
  const Eigen::Index n = h.cols();
  window.setZero(3 * w, n);
  if (n == 0) return;
  window.block(0, 1, w, n - 1) = h.leftCols(n - 1);
  window.block(w, 0, w, n) = h;
  window.block(2 * w, 0, w, n - 1) = h.rightCols(n - 1);
}

Matrix ConvEncoder::forward(const Matrix& input, Cache* cache, Rng* rng,
                            double dropout) const {
  if (input.rows() != static_cast<Eigen::Index>(dims_.input_dim)) {
    throw ContractViolation("encoder input has " +
                            std::to_string(input.rows()) + " rows, expected " +
                            std::to_string(dims_.input_dim));
  }
  const bool drop = rng != nullptr && dropout > 0.0;
  Matrix x = input;
  Matrix in_mask;
  if (drop) {
    in_mask = dropout_mask(x.rows(), x.cols(), dropout, *rng);
    x.array() *= in_mask.array();
  }
  Matrix h = proj_w_.value * x;
  h.colwise() += proj_b_.value.col(0);

  const int pieces = static_cast<int>(dims_.pieces);
  Matrix window;
  Matrix pre;
  Matrix pooled;
  Eigen::MatrixXi argmax;
  if (cache) {
    cache->windows.clear();
    cache->argmax.clear();
  }
  for (std::size_t l = 0; l < conv_w_.size(); ++l) {
    build_window(h, window);
    pre.noalias() = conv_w_[l].value * window;
    pre.colwise() += conv_b_[l].value.col(0);
    maxout_forward(pre, pieces, pooled, argmax);
    h += pooled;
    if (cache) {
      cache->windows.push_back(window);
      cache->argmax.push_back(argmax);
    }
  }
  Matrix out_mask;
  if (drop) {
    out_mask = dropout_mask(h.rows(), h.cols(), dropout, *rng);
    h.array() *= out_mask.array();
  }
  if (cache) {
    cache->input = std::move(x);
    cache->input_mask = std::move(in_mask);
    cache->output_mask = std::move(out_mask);
  }
  return h;
}

Matrix ConvEncoder::backward(const Cache& cache, const Matrix& dout) {
  const auto w = static_cast<Eigen::Index>(dims_.width);
  const int pieces = static_cast<int>(dims_.pieces);
  Matrix dh = dout;
  if (cache.output_mask.size() > 0) dh.array() *= cache.output_mask.array();
  const Eigen::Index n = dh.cols();

  Matrix dpre;
  Matrix dwindow;
  for (std::size_t l = conv_w_.size(); l-- > 0;) {
    maxout_backward(dh, cache.argmax[l], pieces, dpre);
    conv_w_[l].grad.noalias() += dpre * cache.windows[l].transpose();
    conv_b_[l].grad.col(0) += dpre.rowwise().sum();
    dwindow.noalias() = conv_w_[l].value.transpose() * dpre;
    // Residual path keeps dh; add the three window slots.
    dh += dwindow.block(w, 0, w, n);
    if (n > 1) {
      dh.leftCols(n - 1) += dwindow.block(0, 1, w, n - 1);
      dh.rightCols(n - 1) += dwindow.block(2 * w, 0, w, n - 1);
    }
  }
  proj_w_.grad.noalias() += dh * cache.input.transpose();
  proj_b_.grad.col(0) += dh.rowwise().sum();
  Matrix dinput = proj_w_.value.transpose() * dh;
  if (cache.input_mask.size() > 0) dinput.array() *= cache.input_mask.array();
  return dinput;
}

ParamList ConvEncoder::params() {
  ParamList out = {&proj_w_, &proj_b_};
  for (std::size_t l = 0; l < conv_w_.size(); ++l) {
    out.push_back(&conv_w_[l]);
    out.push_back(&conv_b_[l]);
  }
  return out;
}

SoftmaxHead::SoftmaxHead(std::size_t input_dim, std::size_t classes,
                         const std::string& name)
    : weight_(name + ".w", static_cast<Eigen::Index>(classes),
              static_cast<Eigen::Index>(input_dim)),
      bias_(name + ".b", static_cast<Eigen::Index>(classes), 1) {}

Matrix SoftmaxHead::forward(const Matrix& input) const {
  Matrix logits = weight_.value * input;
  logits.colwise() += bias_.value.col(0);
  return logits;
}

Matrix SoftmaxHead::backward(const Matrix& input, const Matrix& dlogits) {
  weight_.grad.noalias() += dlogits * input.transpose();
  bias_.grad.col(0) += dlogits.rowwise().sum();
  return weight_.value.transpose() * dlogits;
}

}  // namespace morphpipe
