#include "patk/linear_operator.hpp"

#include <algorithm>

#include "patk/error.hpp"
#include "patk/simd.hpp"

namespace patk {

DenseOperator::DenseOperator(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) throw InvalidArgument("dense operator size mismatch");
}

void DenseOperator::apply(std::span<const float> x, std::span<float> y) const {
  for (std::size_t r = 0; r < rows_; ++r) {
    y[r] = simd::dot({values_.data() + r * cols_, cols_}, x);
  }
}

void DenseOperator::apply_adjoint(std::span<const float> y, std::span<float> x) const {
  std::fill(x.begin(), x.end(), 0.0f);
  for (std::size_t r = 0; r < rows_; ++r) {
    simd::axpy(y[r], {values_.data() + r * cols_, cols_}, x);
  }
}

void DiagonalOperator::apply(std::span<const float> x, std::span<float> y) const {
  for (std::size_t i = 0; i < diag_.size(); ++i) y[i] = diag_[i] * x[i];
}

void DiagonalOperator::apply_adjoint(std::span<const float> y, std::span<float> x) const {
  apply(y, x);
}

void IdentityOperator::apply(std::span<const float> x, std::span<float> y) const {
  std::copy(x.begin(), x.begin() + static_cast<long>(n_), y.begin());
}

void IdentityOperator::apply_adjoint(std::span<const float> y, std::span<float> x) const {
  apply(y, x);
}

}  // namespace patk
