#ifndef VID_DECAY_HPP
#define VID_DECAY_HPP

#include <span>
#include <string>
#include <vector>

#include "vid/errors.hpp"

namespace vid {

/// Parameters of the Gronwall-type comparison problem
///   y' <= -M2 y^(1+1/q) + M3 (1+t)^(-q-1),  y(0) = y0 >= 0.
struct PolyBoundParams {
  double y0 = 0;
  double m2 = 1;
  double m3 = 1;
  double q = 3;

  void check_valid() const;  ///< y0 >= 0, m2 > 0, m3 >= 0, q >= 1
};

/// Closed-form envelope
///   q^q [ (y0 + 2 M2^q M3)^(-1/q) + (2 M2)^(-1) M3^(-1/q) t ]^(-q).
/// Accepts q >= 1 (q in (1,2] triggers a logged warning since the source
/// statement assumes q > 2 while it is applied with q = p_m which can be 1).
double poly_bound(const PolyBoundParams& p, double t);

/// RK4 trace of the equality ODE y' = -M2 y^(1+1/q) + M3 (1+t)^(-q-1),
/// clamped at 0 when a step undershoots. Requires dt <= 1e-3 max(1, 1/M2);
/// throws NumericalError after three failed step halvings.
struct OdeTrace {
  std::vector<double> t;
  std::vector<double> y;
};
OdeTrace ode_oracle(const PolyBoundParams& p, double t_end, double dt);

/// Integrates the equality ODE and compares it pointwise against poly_bound
/// with the given relative slack. For m3 == 0 the envelope degenerates
/// (its slope constant is M3^(-1/q)); that case is checked against the
/// forcing-free closed form q^q (y0^(-1/q) + M2 t / q)^(-q) instead.
struct LemmaReport {
  bool pass = false;
  double worst_margin = 0;  ///< min over t of (bound - y)/max(bound, tiny)
  double worst_t = 0;
  bool degenerate_forcing = false;
};
LemmaReport verify_lemma_bound(const PolyBoundParams& p, double t_end,
                               double dt, double rel_slack = 1e-6);

/// Largest positive integer m with 2^m - 1 < p - 1; returns (m, p_m).
struct PmResult {
  int m = 0;
  double p_m = 0;
};
PmResult pm_for(double p);

/// Exponential comparison envelope L0 * a3 * exp(-b3 t).
double exp_bound(double l0, double a3, double b3, double t);

/// Fits the decay rate b2 of a trace on a window and checks that the trace
/// is dominated pointwise (with the given relative slack) by the
/// variation-of-constants solution of z' = exp(-kappa4_tilde t) - b2 z,
/// z(0) = trace(0).
struct ExpVerifyReport {
  bool pass = false;
  double b2 = 0;         ///< fitted decay rate
  double a3 = 0;         ///< envelope amplitude of the fit, relative to L(0)
  double b3 = 0;         ///< same as b2 (envelope rate)
  double max_ratio = 0;  ///< max over samples of trace/z
  double r_squared = 0;
};
ExpVerifyReport verify_exp(std::span<const double> t,
                           std::span<const double> value, double kappa4_tilde,
                           double rel_slack = 0.05, double window_lo = -1,
                           double window_hi = -1);

/// Exact solution of z' = exp(-kappa t) - b z, z(0) = z0.
double linear_comparison_ode(double z0, double kappa, double b, double t);

// ---------------------------------------------------------------------------
// Decay-rate fitting
// ---------------------------------------------------------------------------

enum class DecayModel { power, exponential };

/// Least-squares fit of log y against log(1+t) (power) or t (exponential)
/// on a window of the trace. Non-positive samples are trimmed and counted.
struct DecayFit {
  DecayModel model = DecayModel::power;
  double exponent = 0;   ///< power model: slope (negative for decay)
  double rate = 0;       ///< exponential model: -slope
  double intercept = 0;  ///< log-scale intercept
  double r_squared = 0;
  double t_lo = 0, t_hi = 0;
  int n_used = 0;
  int n_trimmed = 0;
};

/// window_lo/window_hi < 0 select the default window [T/2, T].
DecayFit fit_decay(std::span<const double> t, std::span<const double> y,
                   DecayModel model, double window_lo = -1,
                   double window_hi = -1);

}  // namespace vid

#endif
