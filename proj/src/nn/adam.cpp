#include "daylight/nn/adam.hpp"

#include <cmath>
#include <fmt/format.h>

#include "daylight/errors.hpp"

namespace illum::nn {

template <typename T>
Adam<T>::Adam(AdamOptions options) : options_(options) {
  if (!(options_.lr > 0.0)) throw ParameterError("adam: learning rate must be positive");
  if (!(options_.beta1 >= 0.0 && options_.beta1 < 1.0) || !(options_.beta2 >= 0.0 && options_.beta2 < 1.0)) {
    throw ParameterError("adam: betas must lie in [0, 1)");
  }
}

template <typename T>
void Adam<T>::step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>* const> grads) {
  if (params.size() != grads.size()) {
    throw DimensionError(fmt::format("adam: {} parameters but {} gradients", params.size(), grads.size()));
  }
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.emplace_back(p->shape());
      v_.emplace_back(p->shape());
    }
  }
  if (m_.size() != params.size()) throw DimensionError("adam: parameter count changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i]->shape() || params[i]->shape() != m_[i].shape()) {
      throw DimensionError(fmt::format("adam: shape mismatch for parameter {}", i));
    }
  }

  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const T step_size = static_cast<T>(options_.lr / correction1);
  const T inv_sqrt_c2 = static_cast<T>(1.0 / std::sqrt(correction2));
  const T eps = static_cast<T>(options_.epsilon);
  const T tb1 = static_cast<T>(b1), tb2 = static_cast<T>(b2);

  for (std::size_t i = 0; i < params.size(); ++i) {
    T* p = params[i]->data();
    const T* g = grads[i]->data();
    T* m = m_[i].data();
    T* v = v_[i].data();
    const std::size_t n = params[i]->numel();
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = tb1 * m[j] + (T{1} - tb1) * g[j];
      v[j] = tb2 * v[j] + (T{1} - tb2) * g[j] * g[j];
      // p -= lr * m_hat / (sqrt(v_hat) + eps)
      p[j] -= step_size * m[j] / (std::sqrt(v[j]) * inv_sqrt_c2 + eps);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace illum::nn
