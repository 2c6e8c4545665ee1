// Copyright (c) 2026 The hdivsaddle Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hdiv/common.hpp"

#include <span>

namespace hdiv {

// One-dimensional building blocks on the reference interval [0,1].

enum class NodeFamily { GaussLobatto, GaussLegendre };

struct NodeSet1D {
  NodeFamily kind;
  Vec nodes;
  Vec weights;
  int size() const { return static_cast<int>(nodes.size()); }
};

/// Gauss-Lobatto-Legendre points and weights (n >= 2), exact to degree 2n-3.
NodeSet1D gauss_lobatto(int n);
/// Gauss-Legendre points and weights (n >= 1), exact to degree 2n-1.
NodeSet1D gauss_legendre(int n);

/// Entry (i,j) is the j-th Lagrange polynomial on `nodes` evaluated at
/// `points[i]`.
Matrix interp_matrix(std::span<const double> nodes, std::span<const double> points);
/// Derivatives of the Lagrange polynomials, same layout as interp_matrix.
Matrix interp_derivative_matrix(std::span<const double> nodes, std::span<const double> points);

/// p x p coefficients of the histopolation basis {h_j} (degree p-1) in the
/// Gauss-Legendre nodal basis on p points: h_j = sum_k C(k,j) g_k, with
/// the defining property that h_j integrates to delta_ij over the i-th
/// Gauss-Lobatto subinterval.
Matrix histopolation_matrix(int p);

enum class Basis1D { GllNodal, GlNodal, Histopolation };

const char* to_string(Basis1D b);

/// Values of an `n`-function 1D basis at `points` (rows = points).
/// GllNodal/GlNodal are Lagrange bases on n GLL/GL points; Histopolation
/// has n functions of degree n-1 living on the n+1 GLL points.
Matrix eval_basis(Basis1D kind, int n, std::span<const double> points);
Matrix eval_basis_derivative(Basis1D kind, int n, std::span<const double> points);

struct BasisChange1D {
  Basis1D from;
  Basis1D to;
  Matrix matrix;  // coefficients_to = matrix * coefficients_from
};

/// Coefficient transform between two n-dimensional polynomial bases.
BasisChange1D basis_change(int n, Basis1D from, Basis1D to);

}  // namespace hdiv
