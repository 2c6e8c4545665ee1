// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/common.hpp"

#include <functional>
#include <span>

namespace hdiv {

/// Square linear operator y = A x on flat vectors.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual int size() const = 0;
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;

  Vec operator*(std::span<const double> x) const {
    Vec y(size());
    apply(x, y);
    return y;
  }
};

/// Marker base for operators that are symmetric positive-definite by
/// construction; MINRES and CG only accept preconditioners of this type.
class SpdOperator : public LinearOperator {};

/// Wraps a callable as a LinearOperator.
class FunctionOperator : public LinearOperator {
 public:
  using Fn = std::function<void(std::span<const double>, std::span<double>)>;
  FunctionOperator(int n, Fn fn) : n_(n), fn_(std::move(fn)) {}
  int size() const override { return n_; }
  void apply(std::span<const double> x, std::span<double> y) const override { fn_(x, y); }

 private:
  int n_;
  Fn fn_;
};

/// A callable asserted SPD by the caller (e.g. an exact dense inverse).
class SpdFunctionOperator : public SpdOperator {
 public:
  using Fn = FunctionOperator::Fn;
  SpdFunctionOperator(int n, Fn fn) : n_(n), fn_(std::move(fn)) {}
  int size() const override { return n_; }
  void apply(std::span<const double> x, std::span<double> y) const override { fn_(x, y); }

 private:
  int n_;
  Fn fn_;
};

class IdentityOperator : public SpdOperator {
 public:
  explicit IdentityOperator(int n) : n_(n) {}
  int size() const override { return n_; }
  void apply(std::span<const double> x, std::span<double> y) const override {
    std::copy(x.begin(), x.end(), y.begin());
  }

 private:
  int n_;
};

/// Diagonal matrix; stores the entries, `apply_inverse` scales by their
/// reciprocals.
class DiagonalMatrix : public SpdOperator {
 public:
  DiagonalMatrix() = default;
  explicit DiagonalMatrix(Vec d) : d_(std::move(d)) {}
  int size() const override { return static_cast<int>(d_.size()); }
  void apply(std::span<const double> x, std::span<double> y) const override {
    for (std::size_t i = 0; i < d_.size(); ++i) y[i] = d_[i] * x[i];
  }
  void apply_inverse(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < d_.size(); ++i) y[i] = x[i] / d_[i];
  }
  const Vec& entries() const { return d_; }
  double operator[](std::size_t i) const { return d_[i]; }
  DiagonalMatrix inverse() const {
    Vec r(d_.size());
    for (std::size_t i = 0; i < d_.size(); ++i) r[i] = 1.0 / d_[i];
    return DiagonalMatrix(std::move(r));
  }

 private:
  Vec d_;
};

/// Restricts an operator on a full vector to a subset of entries: the
/// complement is held at zero on input and discarded on output.
class RestrictedOperator : public LinearOperator {
 public:
  RestrictedOperator(const LinearOperator& full, std::vector<int> keep);
  int size() const override { return static_cast<int>(keep_.size()); }
  void apply(std::span<const double> x, std::span<double> y) const override;

 private:
  const LinearOperator& full_;
  std::vector<int> keep_;
  mutable Vec xf_, yf_;
};

}  // namespace hdiv
