#ifndef VID_TENSOR_HPP
#define VID_TENSOR_HPP

#include <Eigen/Dense>

#include "vid/errors.hpp"

namespace vid {

/// Number of independent symmetric-matrix components in spatial dimension n:
/// d = n(n+1)/2, so d = 1, 3, 6 for n = 1, 2, 3.
int voigt_size(int dim);

/// Rank-4 elasticity/relaxation tensor with major symmetry, stored as a
/// symmetric d x d matrix in orthonormal (Kelvin) Voigt components. With this
/// normalization the matrix quadratic form on the component vector of a
/// symmetric n x n matrix w equals the tensor contraction (Cw):w, so the
/// matrix eigenvalues are exactly the sharp bounds of the quadratic form.
struct VoigtTensor {
  int dim = 1;            ///< spatial dimension n in {1,2,3}
  Eigen::MatrixXd entries;  ///< d x d, symmetric by construction

  /// Builds from any d x d matrix; the strict lower triangle is overwritten
  /// by the upper one so symmetry holds exactly. Throws DomainError on a
  /// dimension mismatch or non-finite entries.
  static VoigtTensor from_matrix(int dim, const Eigen::MatrixXd& m);

  /// 1D (n=1) tensor holding a single modulus.
  static VoigtTensor scalar(double modulus);

  /// Identity tensor in dimension n.
  static VoigtTensor identity(int dim);

  int size() const { return static_cast<int>(entries.rows()); }
  double value() const { return entries(0, 0); }  ///< 1D convenience
};

VoigtTensor operator+(const VoigtTensor& a, const VoigtTensor& b);
VoigtTensor operator-(const VoigtTensor& a, const VoigtTensor& b);
VoigtTensor operator*(double s, const VoigtTensor& t);

/// Maps a symmetric n x n matrix to its Kelvin component vector
/// (off-diagonal entries scaled by sqrt(2)).
Eigen::VectorXd kelvin_vector(const Eigen::MatrixXd& w);

/// Tensor contraction (Tw):w for a symmetric n x n matrix w.
double quadratic_form(const VoigtTensor& t, const Eigen::MatrixXd& w);

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, sorted
/// ascending. Off-diagonal Frobenius threshold 1e-14 * ||A||_F, at most 100
/// sweeps. Intended for the small (d <= 6) matrices of this library.
Eigen::VectorXd jacobi_eigenvalues(Eigen::MatrixXd a);

/// Extremal eigenvalues of a tensor's Voigt matrix, i.e. the sharp constants
/// alpha0, beta0 with alpha0 |w|^2 <= (Tw):w <= beta0 |w|^2 on symmetric w.
struct ConvexityReport {
  double alpha0 = 0;        ///< smallest eigenvalue
  double beta0 = 0;         ///< largest eigenvalue
  bool strongly_convex = false;  ///< alpha0 > 1e-10 * max(1, beta0)
};

ConvexityReport convexity_bounds(const Eigen::MatrixXd& sym);
ConvexityReport convexity_bounds(const VoigtTensor& t);

}  // namespace vid

#endif
