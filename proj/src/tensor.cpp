#include "vid/tensor.hpp"

#include <cmath>

namespace vid {

int voigt_size(int dim) {
  if (dim < 1 || dim > 3) throw DomainError("spatial dimension must be 1, 2 or 3");
  return dim * (dim + 1) / 2;
}

VoigtTensor VoigtTensor::from_matrix(int dim, const Eigen::MatrixXd& m) {
  const int d = voigt_size(dim);
  if (m.rows() != d || m.cols() != d)
    throw DomainError("Voigt matrix must be " + std::to_string(d) + "x" +
                      std::to_string(d) + " in dimension " + std::to_string(dim));
  if (!m.allFinite()) throw DomainError("Voigt matrix has non-finite entries");
  VoigtTensor t;
  t.dim = dim;
  t.entries = m.selfadjointView<Eigen::Upper>();
  return t;
}

VoigtTensor VoigtTensor::scalar(double modulus) {
  return from_matrix(1, Eigen::MatrixXd::Constant(1, 1, modulus));
}

VoigtTensor VoigtTensor::identity(int dim) {
  const int d = voigt_size(dim);
  return from_matrix(dim, Eigen::MatrixXd::Identity(d, d));
}

VoigtTensor operator+(const VoigtTensor& a, const VoigtTensor& b) {
  if (a.dim != b.dim) throw DomainError("tensor dimension mismatch");
  return VoigtTensor::from_matrix(a.dim, a.entries + b.entries);
}

VoigtTensor operator-(const VoigtTensor& a, const VoigtTensor& b) {
  if (a.dim != b.dim) throw DomainError("tensor dimension mismatch");
  return VoigtTensor::from_matrix(a.dim, a.entries - b.entries);
}

VoigtTensor operator*(double s, const VoigtTensor& t) {
  return VoigtTensor::from_matrix(t.dim, s * t.entries);
}

Eigen::VectorXd kelvin_vector(const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(w.rows());
  const double rt2 = std::sqrt(2.0);
  Eigen::VectorXd v(voigt_size(n));
  for (int i = 0; i < n; ++i) v[i] = w(i, i);
  if (n == 2) v[2] = rt2 * w(0, 1);
  if (n == 3) {
    v[3] = rt2 * w(1, 2);
    v[4] = rt2 * w(0, 2);
    v[5] = rt2 * w(0, 1);
  }
  return v;
}

double quadratic_form(const VoigtTensor& t, const Eigen::MatrixXd& w) {
  const Eigen::VectorXd v = kelvin_vector(w);
  return v.dot(t.entries * v);
}

Eigen::VectorXd jacobi_eigenvalues(Eigen::MatrixXd a) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) throw DomainError("eigensolver expects a square matrix");
  if (!a.allFinite()) throw DomainError("eigensolver input has non-finite entries");
  if (n == 1) return a.col(0);

  const double norm = a.norm();
  const double threshold = 1e-14 * std::max(norm, 1e-300);

  auto off_diagonal = [&]() {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 100 && off_diagonal() > threshold; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= threshold / (n * n)) continue;
        const double apq = a(p, q);
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }

  Eigen::VectorXd eig = a.diagonal();
  std::sort(eig.data(), eig.data() + n);
  return eig;
}

ConvexityReport convexity_bounds(const Eigen::MatrixXd& sym) {
  const Eigen::VectorXd eig = jacobi_eigenvalues(sym);
  ConvexityReport r;
  r.alpha0 = eig[0];
  r.beta0 = eig[eig.size() - 1];
  r.strongly_convex = r.alpha0 > 1e-10 * std::max(1.0, r.beta0);
  return r;
}

ConvexityReport convexity_bounds(const VoigtTensor& t) {
  return convexity_bounds(t.entries);
}

}  // namespace vid
