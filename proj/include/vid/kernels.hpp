#ifndef VID_KERNELS_HPP
#define VID_KERNELS_HPP

#include <variant>
#include <vector>

#include "vid/tensor.hpp"

namespace vid {

/// One decaying-exponential mode of a Prony (separable) kernel:
/// amplitude * exp(-rate * t).
struct PronyTerm {
  VoigtTensor amplitude;  ///< positive semidefinite
  double rate = 0;        ///< 1/time, > 0
};

/// G(t) = sum_j amplitude_j exp(-rate_j t). An empty term list is the
/// elastic (memoryless) limit.
struct PronyKernel {
  std::vector<PronyTerm> terms;
};

/// G(t) = scale * (1 + a t)^(-p) * amplitude.
struct PolynomialKernel {
  VoigtTensor amplitude;  ///< positive definite
  double scale = 1;       ///< dimensionless, > 0
  double a = 1;           ///< 1/time, > 0
  double p = 3;           ///< decay exponent; > 1 integrable, > 2 certifiable
};

using KernelSpec = std::variant<PronyKernel, PolynomialKernel>;

/// Throws DomainError if rates/scales are non-positive, amplitudes are not
/// positive semidefinite, or the polynomial exponent is not integrable.
void check_valid(const PronyKernel& k);
void check_valid(const PolynomialKernel& k);
void check_valid(const KernelSpec& k);

/// Integrability only (rates > 0, p > 1, a > 0). The solver accepts any
/// integrable kernel; definiteness is the certifiers' concern.
void check_integrable(const KernelSpec& k);

bool is_empty(const KernelSpec& k);
int kernel_dim(const KernelSpec& k);

/// G(t), dG/dt(t) or d2G/dt2(t) in closed form; order is 0, 1 or 2.
VoigtTensor kernel_value(const KernelSpec& k, double t, int order = 0);

/// Integral of G over [0, t].
VoigtTensor kernel_integral(const KernelSpec& k, double t);

/// Integral of G over [0, inf). Throws DomainError if not integrable.
VoigtTensor kernel_total_integral(const KernelSpec& k);

/// Scalar factor of a 1D (n=1) kernel: value/derivatives of
/// sum_j A_j exp(-r_j t) or scale*A*(1+a t)^(-p) with the 1x1 amplitude
/// folded in. Used by the solver's per-cell arithmetic.
double scalar_kernel_value(const KernelSpec& k, double t, int order = 0);
double scalar_kernel_integral(const KernelSpec& k, double t);

/// Equilibrium tensor C - integral_0^inf G dt. Its positive definiteness is
/// what separates viscoelastic solids from fluids. Throws DomainError when
/// the kernel is not integrable.
VoigtTensor equilibrium_tensor(const VoigtTensor& c, const KernelSpec& k);

/// convexity_bounds(equilibrium_tensor(c, k)); alpha0/beta0 read as the
/// equilibrium constants mu0, nu0.
ConvexityReport certify_equilibrium(const VoigtTensor& c, const KernelSpec& k);

// ---------------------------------------------------------------------------
// Spring-dashpot constructions (1D)
// ---------------------------------------------------------------------------

struct MaxwellSpec {
  double spring = 1;     ///< Cs, modulus
  double viscosity = 1;  ///< eta, modulus*time
};

/// Spring C1 in parallel with a Maxwell arm (C2, eta2).
struct SlsSpec {
  double spring_parallel = 1;  ///< C1
  double spring_series = 1;    ///< C2
  double viscosity = 1;        ///< eta2
};

/// Maxwell arm (c1, eta3) in series with a Kelvin-Voigt arm (c2, eta2).
struct BurgersSpec {
  double spring1 = 1;     ///< c1
  double spring2 = 1;     ///< c2
  double viscosity2 = 1;  ///< eta2
  double viscosity3 = 1;  ///< eta3
};

using UnitSpec = std::variant<MaxwellSpec, SlsSpec, BurgersSpec>;

/// Parallel composition of units plus an optional equilibrium spring.
struct ExtendedSpec {
  double equilibrium_spring = 0;  ///< C0 >= 0
  std::vector<UnitSpec> units;
};

/// Instantaneous modulus and memory kernel of a derived constitutive law:
/// sigma(t) = C_inst e(t) - int_0^t G(t-tau) e(tau) dtau.
struct DerivedModel {
  VoigtTensor instantaneous;  ///< C_inst (1x1 for these 1D models)
  PronyKernel kernel;
};

/// Auxiliary constants of the Burgers derivation (relaxation-spectrum roots
/// and mode weights of the two-exponential relaxation function).
struct BurgersConstants {
  double B1 = 0, B2 = 0, D = 0;
  double r1 = 0, r2 = 0;  ///< r1 > r2 > 0
  double b1 = 0, b2 = 0;  ///< relaxation weights, both >= 0
};

DerivedModel derive_maxwell(double spring, double viscosity);
DerivedModel derive_sls(double spring_parallel, double spring_series,
                        double viscosity);
DerivedModel derive_burgers(double spring1, double spring2, double viscosity2,
                            double viscosity3);
BurgersConstants burgers_constants(double spring1, double spring2,
                                   double viscosity2, double viscosity3);
DerivedModel derive_unit(const UnitSpec& u);
DerivedModel extend(const ExtendedSpec& spec);

// ---------------------------------------------------------------------------
// Kernel certification against the decay assumptions
// ---------------------------------------------------------------------------

/// Estimated assumption constants for a kernel paired with an elasticity
/// tensor C. For Prony kernels kappa1/kappa2/kappa3 are the per-mode envelope
/// constants max r_j, min r_j, max r_j^2 (valid bounds for any psd mixture;
/// sharp for a single mode). kappa4/kappa4_tilde bound |G|+|Gdot| by
/// kappa4 exp(-kappa4_tilde t). For polynomial kernels the constants are the
/// closed forms of the scalar factor and the bound is kappa4 (1+t)^(-p).
struct AssumptionReport {
  bool satisfied = false;
  double kappa1 = 0;
  double kappa2 = 0;
  double kappa3 = 0;
  double kappa4 = 0;
  double kappa4_tilde = 0;  ///< exponential case only
  double kappa5 = 0;        ///< informational: -log(mu0)
  double kappa6 = 0;        ///< informational: -log(nu0)
  double p = 0;             ///< polynomial case only
  double witness_t = -1;    ///< time of worst sampled violation, if any
  bool envelope_only = false;  ///< non-commuting mixture, sufficient check
  bool empty_kernel = false;   ///< trivially satisfied, kappas undefined
  ConvexityReport equilibrium;
};

/// Certifies a Prony kernel on a log-spaced time grid. t_max <= 0 and
/// n_samples <= 0 select the defaults (20/r_min and 512).
AssumptionReport validate_exponential(const VoigtTensor& c,
                                      const PronyKernel& k, double t_max = 0,
                                      int n_samples = 0);

/// Certifies a polynomial kernel; requires p > 2.
AssumptionReport validate_polynomial(const VoigtTensor& c,
                                     const PolynomialKernel& k);

}  // namespace vid

#endif
