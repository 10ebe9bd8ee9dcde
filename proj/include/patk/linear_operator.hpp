#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace patk {

/// Matrix-free linear map A : R^domain -> R^range with its adjoint.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual std::size_t domain_size() const = 0;
  virtual std::size_t range_size() const = 0;

  /// y = A x. `y` is overwritten.
  virtual void apply(std::span<const float> x, std::span<float> y) const = 0;
  /// x = A^T y. `x` is overwritten.
  virtual void apply_adjoint(std::span<const float> y, std::span<float> x) const = 0;
};

/// Row-major dense matrix. Small problems and test oracles.
class DenseOperator final : public LinearOperator {
 public:
  DenseOperator(std::size_t rows, std::size_t cols, std::vector<float> values);

  std::size_t domain_size() const override { return cols_; }
  std::size_t range_size() const override { return rows_; }
  void apply(std::span<const float> x, std::span<float> y) const override;
  void apply_adjoint(std::span<const float> y, std::span<float> x) const override;

  float at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<float> values_;
};

class DiagonalOperator final : public LinearOperator {
 public:
  explicit DiagonalOperator(std::vector<float> diagonal) : diag_(std::move(diagonal)) {}

  std::size_t domain_size() const override { return diag_.size(); }
  std::size_t range_size() const override { return diag_.size(); }
  void apply(std::span<const float> x, std::span<float> y) const override;
  void apply_adjoint(std::span<const float> y, std::span<float> x) const override;

 private:
  std::vector<float> diag_;
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(std::size_t n) : n_(n) {}

  std::size_t domain_size() const override { return n_; }
  std::size_t range_size() const override { return n_; }
  void apply(std::span<const float> x, std::span<float> y) const override;
  void apply_adjoint(std::span<const float> y, std::span<float> x) const override;

 private:
  std::size_t n_;
};

}  // namespace patk
