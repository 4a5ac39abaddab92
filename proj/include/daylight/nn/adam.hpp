#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "daylight/nn/tensor.hpp"

namespace illum::nn {

struct AdamOptions {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias-corrected moments. Moments start at zero and are sized on
// the first step; every later step must present the same parameter shapes.
template <typename T>
class Adam {
 public:
  explicit Adam(AdamOptions options = {});

  void step(std::span<Tensor<T>* const> params, std::span<const Tensor<T>* const> grads);

  std::uint64_t steps() const { return t_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<Tensor<T>>& first_moments() const { return m_; }
  const std::vector<Tensor<T>>& second_moments() const { return v_; }

 private:
  AdamOptions options_;
  std::uint64_t t_ = 0;
  std::vector<Tensor<T>> m_;
  std::vector<Tensor<T>> v_;
};

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace illum::nn
