#include "morphpipe/nn.h"

#include <cmath>
#include <limits>

#include "morphpipe/errors.h"

namespace morphpipe {

double Rng::normal() {
  // Box-Muller; avoids std::normal_distribution, whose output is not
  // specified across standard libraries.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

void Param::init_uniform(Rng& rng, double scale) {
  for (Eigen::Index c = 0; c < value.cols(); ++c) {
    for (Eigen::Index r = 0; r < value.rows(); ++r) {
      value(r, c) = rng.uniform(-scale, scale);
    }
  }
}

void Param::init_glorot(Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out) {
  init_uniform(rng, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)));
}

void zero_grads(const ParamList& params) {
  for (Param* p : params) p->zero_grad();
}

double grad_norm(const ParamList& params) {
  double sum = 0.0;
  for (const Param* p : params) sum += p->grad.squaredNorm();
  return std::sqrt(sum);
}

void round_to_float(const ParamList& params) {
  for (Param* p : params) {
    p->value = p->value.cast<float>().cast<double>();
  }
}

bool all_finite(const ParamList& params) {
  for (const Param* p : params) {
    if (!p->value.allFinite()) return false;
  }
  return true;
}

Adam::Adam(ParamList params, const TrainConfig& config)
    : params_(std::move(params)), config_(config) {
  for (const Param* p : params_) {
    first_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    second_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

double Adam::step() {
  const double norm = grad_norm(params_);
  const double clip =
      norm > config_.clip_norm && norm > 0.0 ? config_.clip_norm / norm : 1.0;
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  const double lr = config_.learning_rate * std::sqrt(correction2) / correction1;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Param& p = *params_[i];
    p.grad *= clip;
    first_[i] = b1 * first_[i] + (1.0 - b1) * p.grad;
    second_[i] = b2 * second_[i] + (1.0 - b2) * p.grad.cwiseAbs2();
    p.value.array() -=
        lr * first_[i].array() / (second_[i].array().sqrt() + config_.adam_eps);
    p.zero_grad();
  }
  return norm;
}

void maxout_forward(const Matrix& pre, int pieces, Matrix& out,
                    Eigen::MatrixXi& argmax) {
  const Eigen::Index units = pre.rows() / pieces;
  out.resize(units, pre.cols());
  argmax.resize(units, pre.cols());
  for (Eigen::Index c = 0; c < pre.cols(); ++c) {
    for (Eigen::Index u = 0; u < units; ++u) {
      int best = 0;
      double best_value = pre(u * pieces, c);
      for (int p = 1; p < pieces; ++p) {
        const double v = pre(u * pieces + p, c);
        if (v > best_value) {
          best_value = v;
          best = p;
        }
      }
      out(u, c) = best_value;
      argmax(u, c) = best;
    }
  }
}

void maxout_backward(const Matrix& dout, const Eigen::MatrixXi& argmax,
                     int pieces, Matrix& dpre) {
  dpre.setZero(dout.rows() * pieces, dout.cols());
  for (Eigen::Index c = 0; c < dout.cols(); ++c) {
    for (Eigen::Index u = 0; u < dout.rows(); ++u) {
      dpre(u * pieces + argmax(u, c), c) = dout(u, c);
    }
  }
}

double softmax_cross_entropy(const Matrix& logits, std::span<const int> gold,
                             const Eigen::MatrixXi* mask, double scale,
                             Matrix* dlogits) {
  const Eigen::Index cols = logits.cols();
  if (static_cast<std::size_t>(cols) != gold.size()) {
    throw ContractViolation("gold label count differs from logit columns");
  }
  if (dlogits) dlogits->setZero(logits.rows(), cols);
  if (cols == 0) return 0.0;
  double total = 0.0;
  const double inv = 1.0 / static_cast<double>(cols);
  Vector probs(logits.rows());
  for (Eigen::Index c = 0; c < cols; ++c) {
    double max_logit = -std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < logits.rows(); ++k) {
      if (mask && (*mask)(k, c) == 0) continue;
      max_logit = std::max(max_logit, logits(k, c));
    }
    double sum = 0.0;
    for (Eigen::Index k = 0; k < logits.rows(); ++k) {
      if (mask && (*mask)(k, c) == 0) {
        probs[k] = 0.0;
        continue;
      }
      probs[k] = std::exp(logits(k, c) - max_logit);
      sum += probs[k];
    }
    probs /= sum;
    const int g = gold[static_cast<std::size_t>(c)];
    if (g < 0 || g >= logits.rows() || (mask && (*mask)(g, c) == 0)) {
      throw ContractViolation("gold label outside the allowed classes");
    }
    total -= std::log(probs[g]);
    if (dlogits) {
      dlogits->col(c) = probs * (scale * inv);
      (*dlogits)(g, c) -= scale * inv;
    }
  }
  return total * inv;
}

int masked_argmax(const Eigen::Ref<const Vector>& logits, const int* mask) {
  int best = -1;
  double best_value = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < logits.size(); ++k) {
    if (mask && mask[k] == 0) continue;
    if (best < 0 || logits[k] > best_value) {
      best = static_cast<int>(k);
      best_value = logits[k];
    }
  }
  return best;
}

GradientCheckResult gradient_check(const std::function<double(bool)>& loss,
                                   const ParamList& params,
                                   std::size_t max_samples, Rng& rng,
                                   double h) {
  zero_grads(params);
  loss(true);
  std::vector<Matrix> analytic;
  std::size_t total = 0;
  for (const Param* p : params) {
    analytic.push_back(p->grad);
    total += static_cast<std::size_t>(p->value.size());
  }
  GradientCheckResult result;
  if (total == 0) return result;

  std::vector<std::pair<std::size_t, Eigen::Index>> picks;
  if (total <= max_samples) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      for (Eigen::Index j = 0; j < params[i]->value.size(); ++j) {
        picks.emplace_back(i, j);
      }
    }
  } else {
    // Spread the budget so that every tensor is sampled.
    const std::size_t per_param =
        std::max<std::size_t>(1, max_samples / params.size());
    for (std::size_t i = 0; i < params.size() && picks.size() < max_samples;
         ++i) {
      const auto size = static_cast<std::size_t>(params[i]->value.size());
      // Half of the budget goes to entries with a non-zero analytic
      // gradient (sparse embedding tables would otherwise be mostly zero).
      std::vector<Eigen::Index> active;
      for (Eigen::Index j = 0; j < params[i]->value.size(); ++j) {
        if (analytic[i].data()[j] != 0.0) active.push_back(j);
      }
      const std::size_t budget = std::min(per_param, size);
      for (std::size_t k = 0; k < budget; ++k) {
        if (k % 2 == 0 && !active.empty()) {
          picks.emplace_back(i, active[rng.below(active.size())]);
        } else {
          picks.emplace_back(i, static_cast<Eigen::Index>(rng.below(size)));
        }
      }
    }
  }

  for (const auto& [i, j] : picks) {
    double& x = params[i]->value.data()[j];
    const double saved = x;
    x = saved + h;
    const double plus = loss(false);
    x = saved - h;
    const double minus = loss(false);
    x = saved;
    const double numeric = (plus - minus) / (2.0 * h);
    const double a = analytic[i].data()[j];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
    const double rel = std::abs(a - numeric) / denom;
    if (rel > result.max_relative_error) {
      result.max_relative_error = rel;
      result.worst_param = params[i]->name;
    }
    ++result.checked;
  }
  zero_grads(params);
  return result;
}

}  // namespace morphpipe
