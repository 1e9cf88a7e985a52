#include "vid/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vid {

namespace {

const PronyKernel* as_prony(const KernelSpec& k) {
  return std::get_if<PronyKernel>(&k);
}
const PolynomialKernel* as_poly(const KernelSpec& k) {
  return std::get_if<PolynomialKernel>(&k);
}

}  // namespace

void check_valid(const PronyKernel& k) {
  for (const auto& term : k.terms) {
    if (!(term.rate > 0)) throw DomainError("Prony rate must be positive");
    const ConvexityReport c = convexity_bounds(term.amplitude);
    if (c.alpha0 < -1e-12 * std::max(1.0, std::abs(c.beta0)))
      throw DomainError("Prony amplitude must be positive semidefinite");
  }
}

void check_valid(const PolynomialKernel& k) {
  if (!(k.scale > 0)) throw DomainError("polynomial kernel scale must be positive");
  if (!(k.a > 0)) throw DomainError("polynomial kernel parameter a must be positive");
  if (!(k.p > 1)) throw DomainError("polynomial kernel exponent p must exceed 1");
  if (!convexity_bounds(k.amplitude).strongly_convex)
    throw DomainError("polynomial kernel amplitude must be positive definite");
}

void check_valid(const KernelSpec& k) {
  std::visit([](const auto& kk) { check_valid(kk); }, k);
}

void check_integrable(const KernelSpec& k) {
  if (const PronyKernel* pk = std::get_if<PronyKernel>(&k)) {
    for (const auto& term : pk->terms)
      if (!(term.rate > 0)) throw DomainError("Prony rate must be positive");
    return;
  }
  const PolynomialKernel& q = std::get<PolynomialKernel>(k);
  if (!(q.scale > 0) || !(q.a > 0) || !(q.p > 1))
    throw DomainError("polynomial kernel needs scale > 0, a > 0, p > 1");
}

bool is_empty(const KernelSpec& k) {
  const PronyKernel* p = as_prony(k);
  return p != nullptr && p->terms.empty();
}

int kernel_dim(const KernelSpec& k) {
  if (const PronyKernel* p = as_prony(k))
    return p->terms.empty() ? 1 : p->terms.front().amplitude.dim;
  return as_poly(k)->amplitude.dim;
}

VoigtTensor kernel_value(const KernelSpec& k, double t, int order) {
  if (t < 0) throw DomainError("kernel evaluation requires t >= 0");
  if (order < 0 || order > 2) throw DomainError("kernel derivative order must be 0, 1 or 2");
  const int d = voigt_size(kernel_dim(k));
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  if (const PronyKernel* pk = as_prony(k)) {
    for (const auto& term : pk->terms) {
      double f = std::exp(-term.rate * t);
      for (int i = 0; i < order; ++i) f *= -term.rate;
      acc += f * term.amplitude.entries;
    }
  } else {
    const PolynomialKernel& q = *as_poly(k);
    double f = q.scale * std::pow(1.0 + q.a * t, -q.p - order);
    for (int i = 0; i < order; ++i) f *= -(q.p + i) * q.a;
    acc = f * q.amplitude.entries;
  }
  return VoigtTensor::from_matrix(kernel_dim(k), acc);
}

VoigtTensor kernel_integral(const KernelSpec& k, double t) {
  if (t < 0) throw DomainError("kernel integral requires t >= 0");
  const int d = voigt_size(kernel_dim(k));
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  if (const PronyKernel* pk = as_prony(k)) {
    for (const auto& term : pk->terms) {
      if (!(term.rate > 0)) throw DomainError("Prony rate must be positive");
      acc += (1.0 - std::exp(-term.rate * t)) / term.rate * term.amplitude.entries;
    }
  } else {
    const PolynomialKernel& q = *as_poly(k);
    if (q.p == 1.0) throw DomainError("polynomial kernel integral undefined at p = 1");
    acc = q.scale * (1.0 - std::pow(1.0 + q.a * t, 1.0 - q.p)) /
          (q.a * (q.p - 1.0)) * q.amplitude.entries;
  }
  return VoigtTensor::from_matrix(kernel_dim(k), acc);
}

VoigtTensor kernel_total_integral(const KernelSpec& k) {
  const int d = voigt_size(kernel_dim(k));
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
  if (const PronyKernel* pk = as_prony(k)) {
    for (const auto& term : pk->terms) {
      if (!(term.rate > 0))
        throw DomainError("kernel not integrable: Prony rate must be positive");
      acc += term.amplitude.entries / term.rate;
    }
  } else {
    const PolynomialKernel& q = *as_poly(k);
    if (!(q.p > 1) || !(q.a > 0))
      throw DomainError("kernel not integrable: polynomial family needs p > 1, a > 0");
    acc = q.scale / (q.a * (q.p - 1.0)) * q.amplitude.entries;
  }
  return VoigtTensor::from_matrix(kernel_dim(k), acc);
}

double scalar_kernel_value(const KernelSpec& k, double t, int order) {
  if (kernel_dim(k) != 1) throw DomainError("scalar kernel access requires a 1D kernel");
  return kernel_value(k, t, order).value();
}

double scalar_kernel_integral(const KernelSpec& k, double t) {
  if (kernel_dim(k) != 1) throw DomainError("scalar kernel access requires a 1D kernel");
  return kernel_integral(k, t).value();
}

VoigtTensor equilibrium_tensor(const VoigtTensor& c, const KernelSpec& k) {
  if (is_empty(k)) return c;
  if (kernel_dim(k) != c.dim) throw DomainError("kernel/tensor dimension mismatch");
  return c - kernel_total_integral(k);
}

ConvexityReport certify_equilibrium(const VoigtTensor& c, const KernelSpec& k) {
  return convexity_bounds(equilibrium_tensor(c, k));
}

// ---------------------------------------------------------------------------
// Spring-dashpot constructions
// ---------------------------------------------------------------------------

DerivedModel derive_maxwell(double spring, double viscosity) {
  if (!(spring > 0) || !(viscosity > 0))
    throw DomainError("Maxwell constants must be positive");
  DerivedModel m;
  m.instantaneous = VoigtTensor::scalar(spring);
  m.kernel.terms.push_back(
      {VoigtTensor::scalar(spring * spring / viscosity), spring / viscosity});
  return m;
}

DerivedModel derive_sls(double spring_parallel, double spring_series,
                        double viscosity) {
  if (!(spring_parallel > 0) || !(spring_series >= 0) || !(viscosity > 0))
    throw DomainError("SLS constants must be positive");
  DerivedModel m;
  m.instantaneous = VoigtTensor::scalar(spring_parallel + spring_series);
  if (spring_series > 0)
    m.kernel.terms.push_back(
        {VoigtTensor::scalar(spring_series * spring_series / viscosity),
         spring_series / viscosity});
  return m;
}

BurgersConstants burgers_constants(double spring1, double spring2,
                                   double viscosity2, double viscosity3) {
  if (!(spring1 > 0) || !(spring2 > 0) || !(viscosity2 > 0) || !(viscosity3 > 0))
    throw DomainError("Burgers constants must be positive");
  BurgersConstants bc;
  bc.B1 = viscosity3 / spring2 + viscosity3 / spring1 + viscosity2 / spring2;
  bc.B2 = (viscosity3 / spring1) * (viscosity2 / spring2);
  bc.D = bc.B1 * bc.B1 - 4.0 * bc.B2;
  if (!(bc.D > 0))
    throw DomainError("Burgers relaxation spectrum is not real (B1^2 - 4 B2 <= 0)");
  const double sqrt_d = std::sqrt(bc.D);
  bc.r1 = (bc.B1 + sqrt_d) / (2.0 * bc.B2);
  bc.r2 = (bc.B1 - sqrt_d) / (2.0 * bc.B2);
  const double tau = viscosity2 / spring2;
  // tau * r2 <= 1 <= tau * r1 holds for every positive parameter set; the
  // weights below are nonnegative exactly when it does.
  bc.b1 = viscosity3 * (tau * bc.r1 - 1.0) / (bc.r1 - bc.r2);
  bc.b2 = viscosity3 * (1.0 - tau * bc.r2) / (bc.r1 - bc.r2);
  if (bc.b1 < -1e-12 * viscosity3 || bc.b2 < -1e-12 * viscosity3)
    throw DomainError("Burgers mode weights are negative");
  return bc;
}

DerivedModel derive_burgers(double spring1, double spring2, double viscosity2,
                            double viscosity3) {
  const BurgersConstants bc =
      burgers_constants(spring1, spring2, viscosity2, viscosity3);
  DerivedModel m;
  m.instantaneous = VoigtTensor::scalar(bc.b1 + bc.b2);
  // Relaxation function b1 e^{-r1 t} + b2 e^{-r2 t}; the memory kernel of the
  // integrodifferential form is minus its time derivative.
  m.kernel.terms.push_back({VoigtTensor::scalar(bc.b1 * bc.r1), bc.r1});
  m.kernel.terms.push_back({VoigtTensor::scalar(bc.b2 * bc.r2), bc.r2});
  return m;
}

DerivedModel derive_unit(const UnitSpec& u) {
  return std::visit(
      [](const auto& s) -> DerivedModel {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, MaxwellSpec>)
          return derive_maxwell(s.spring, s.viscosity);
        else if constexpr (std::is_same_v<T, SlsSpec>)
          return derive_sls(s.spring_parallel, s.spring_series, s.viscosity);
        else
          return derive_burgers(s.spring1, s.spring2, s.viscosity2,
                                s.viscosity3);
      },
      u);
}

DerivedModel extend(const ExtendedSpec& spec) {
  if (spec.equilibrium_spring < 0)
    throw DomainError("equilibrium spring must be nonnegative");
  DerivedModel out;
  out.instantaneous = VoigtTensor::scalar(spec.equilibrium_spring);
  for (const UnitSpec& u : spec.units) {
    DerivedModel part = derive_unit(u);
    out.instantaneous = out.instantaneous + part.instantaneous;
    for (auto& term : part.kernel.terms) out.kernel.terms.push_back(term);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assumption certification
// ---------------------------------------------------------------------------

namespace {

double spectral_norm(const VoigtTensor& t) {
  const Eigen::VectorXd eig = jacobi_eigenvalues(t.entries);
  return std::max(std::abs(eig[0]), std::abs(eig[eig.size() - 1]));
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> g;
  g.reserve(n + 1);
  g.push_back(0.0);
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    g.push_back(std::exp(llo + (lhi - llo) * i / (n - 1.0)));
  return g;
}

/// True when every amplitude is a scalar multiple of the first nonzero one,
/// in which case the Loewner inequalities reduce to scalar ratios.
bool commuting_family(const PronyKernel& k, std::vector<double>* factors) {
  const Eigen::MatrixXd* base = nullptr;
  double base_norm = 0;
  for (const auto& term : k.terms) {
    const double n = term.amplitude.entries.norm();
    if (n > 0 && base == nullptr) {
      base = &term.amplitude.entries;
      base_norm = n;
    }
  }
  if (base == nullptr) {
    factors->assign(k.terms.size(), 0.0);
    return true;
  }
  factors->clear();
  for (const auto& term : k.terms) {
    const double lambda =
        (term.amplitude.entries.cwiseProduct(*base)).sum() / (base_norm * base_norm);
    if ((term.amplitude.entries - lambda * *base).norm() > 1e-12 * base_norm)
      return false;
    factors->push_back(lambda);
  }
  return true;
}

}  // namespace

AssumptionReport validate_exponential(const VoigtTensor& c,
                                      const PronyKernel& k, double t_max,
                                      int n_samples) {
  check_valid(k);
  AssumptionReport rep;
  rep.equilibrium = certify_equilibrium(c, KernelSpec{k});
  rep.kappa5 = -std::log(std::max(rep.equilibrium.alpha0, 1e-300));
  rep.kappa6 = -std::log(std::max(rep.equilibrium.beta0, 1e-300));

  if (k.terms.empty()) {
    rep.empty_kernel = true;
    rep.satisfied = rep.equilibrium.strongly_convex;
    return rep;
  }

  double r_min = std::numeric_limits<double>::infinity();
  double r_max = 0;
  for (const auto& term : k.terms) {
    r_min = std::min(r_min, term.rate);
    r_max = std::max(r_max, term.rate);
  }
  // Per-mode envelope constants: each mode satisfies
  // -r_max G_j <= Gdot_j = -r_j G_j <= -r_min G_j exactly, so the psd sum
  // does too. Attained by the extreme modes as t -> 0 and t -> infinity.
  rep.kappa1 = r_max;
  rep.kappa2 = r_min;
  rep.kappa3 = r_max * r_max;
  rep.kappa4_tilde = r_min;

  std::vector<double> factors;
  rep.envelope_only = !commuting_family(k, &factors);

  if (n_samples <= 0) n_samples = 512;
  if (t_max <= 0) t_max = 20.0 / r_min;
  const std::vector<double> grid =
      log_grid(1e-6 / r_min, std::max(t_max, 20.0 / r_min), n_samples);

  bool violated = false;
  double kappa4 = 0;
  for (double t : grid) {
    const VoigtTensor g = kernel_value(KernelSpec{k}, t, 0);
    const VoigtTensor gd = kernel_value(KernelSpec{k}, t, 1);
    kappa4 = std::max(kappa4, (spectral_norm(g) + spectral_norm(gd)) *
                                  std::exp(rep.kappa4_tilde * t));
    if (!rep.envelope_only) {
      // Scalar factor of the commuting family.
      double gs = 0, gds = 0, gdds = 0;
      for (size_t j = 0; j < k.terms.size(); ++j) {
        const double e = factors[j] * std::exp(-k.terms[j].rate * t);
        gs += e;
        gds += -k.terms[j].rate * e;
        gdds += k.terms[j].rate * k.terms[j].rate * e;
      }
      const double tol = 1e-10 * std::max(1.0, gs);
      const bool bad = gds > -rep.kappa2 * gs + tol ||
                       gds < -rep.kappa1 * gs - tol ||
                       gdds > rep.kappa3 * gs + tol;
      if (bad && !violated) {
        violated = true;
        rep.witness_t = t;
      }
    }
  }
  rep.kappa4 = kappa4;

  rep.satisfied = !violated && rep.kappa1 > 0 && rep.kappa2 > 0 &&
                  rep.kappa3 > 0 && rep.kappa4 > 0 &&
                  std::isfinite(rep.kappa4) &&
                  rep.equilibrium.strongly_convex;
  return rep;
}

AssumptionReport validate_polynomial(const VoigtTensor& c,
                                     const PolynomialKernel& k) {
  check_valid(k);
  if (!(k.p > 2)) throw DomainError("polynomial certification requires p > 2");

  AssumptionReport rep;
  rep.p = k.p;
  rep.equilibrium = certify_equilibrium(c, KernelSpec{k});
  rep.kappa5 = -std::log(std::max(rep.equilibrium.alpha0, 1e-300));
  rep.kappa6 = -std::log(std::max(rep.equilibrium.beta0, 1e-300));

  const ConvexityReport amp = convexity_bounds(k.amplitude);
  const double a = k.a;
  const double p = k.p;
  // Closed forms for the scalar factor g(t) = scale (1+at)^{-p}:
  //   -gdot/g           = a p / (1+at)            <= a p            (t = 0)
  //   -gdot/g^{1+1/p}   = a p scale^{-1/p}            (constant in t)
  //    gddot/g^{1+1/p}  = a^2 p (p+1) scale^{-1/p} / (1+at)
  // extended to the tensor by spectral calculus on the amplitude.
  rep.kappa1 = a * p;
  rep.kappa2 = a * p * std::pow(k.scale * amp.beta0, -1.0 / p);
  rep.kappa3 = a * a * p * (p + 1.0) * std::pow(k.scale * amp.alpha0, -1.0 / p);
  // |G| + |Gdot| <= scale |amp| (1 + a p) (1+at)^{-p} and
  // (1+at)^{-p} <= max(1, a^{-p}) (1+t)^{-p}.
  rep.kappa4 = k.scale * amp.beta0 * (1.0 + a * p) * std::max(1.0, std::pow(a, -p));

  // Pointwise confirmation of the first-order bounds on a log grid.
  const std::vector<double> grid = log_grid(1e-6 / a, 1e3 / a, 1000);
  bool violated = false;
  for (double t : grid) {
    const double base = std::pow(1.0 + a * t, -p);
    for (double lam : {amp.alpha0, amp.beta0}) {
      const double g = k.scale * lam * base;
      const double gd = -a * p * k.scale * lam * base / (1.0 + a * t);
      const double gdd =
          a * a * p * (p + 1.0) * k.scale * lam * base / ((1.0 + a * t) * (1.0 + a * t));
      const double gpow = std::pow(g, 1.0 + 1.0 / p);
      const double tol = 1e-10 * std::max(1.0, g);
      const bool bad = gd > -rep.kappa2 * gpow + tol ||
                       gd < -rep.kappa1 * g - tol ||
                       gdd > rep.kappa3 * gpow + tol ||
                       std::abs(gd) + g > rep.kappa4 * std::pow(1.0 + t, -p) + tol;
      if (bad && !violated) {
        violated = true;
        rep.witness_t = t;
      }
    }
  }

  rep.satisfied = !violated && rep.equilibrium.strongly_convex;
  return rep;
}

}  // namespace vid
