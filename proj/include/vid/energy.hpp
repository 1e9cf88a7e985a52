#ifndef VID_ENERGY_HPP
#define VID_ENERGY_HPP

#include <functional>
#include <string>
#include <vector>

#include "vid/solver.hpp"

namespace vid {

enum class MonitorMode { polynomial, exponential };

/// Weights of the composite monitor functional
///   L = N1 [B + 2 c_delta w(t) E(0,u)] + K + (gamma-theta) I + omega (udot,u)
/// with w(t) = (1+t)^(-p) or exp(-kappa4_tilde t). gamma/theta/omega/delta
/// default to theta = alpha0/(4 beta0), gamma = 2 theta, omega =
/// alpha0/(4 c5) with the fixed-free Poincare constant c5 = (2L/pi)^2, and
/// c_delta = c5 kappa4^2/(4 delta), delta = alpha0/8. N1 and N3 are doubled
/// from 16 until the sandwich inequalities hold at the probe times.
struct MonitorParams {
  MonitorMode mode = MonitorMode::exponential;
  double gamma = 0;
  double theta = 0;
  double omega = 0;
  double n1 = 16;
  double n3 = 16;
  double delta = 0;
  double c_delta = 0;
  double p = 0;             ///< polynomial weight exponent
  double kappa4_tilde = 0;  ///< exponential weight rate
  bool auto_tune = true;    ///< pick n1/n3 from the sampled trace

  double weight(double t) const;
};

/// Defaults derived from the certified material and its kernel report.
MonitorParams default_monitor_params(const Mesh1D& mesh,
                                     const MaterialField1D& mat,
                                     MonitorMode mode);

/// One sampled set of functionals. Fields named after the trace columns;
/// the trailing members are auxiliary integrals kept for identity checks.
struct EnergySample {
  double t = 0;
  double E = 0;
  double E_dot = 0;       ///< E(t, udot)
  double boxG_u = 0;      ///< int_Omega G box du
  double boxG_udot = 0;
  double K = 0;
  double I = 0;
  double B = 0;           ///< filled by finalize_trace (needs N3)
  double L = 0;           ///< filled by finalize_trace (needs N1, N3)
  double R = 0;           ///< |uddot|^2 + |grad u|^2 + |grad udot|^2
  double kinetic = 0;     ///< 1/2 int rho |udot|^2
  double elastic = 0;     ///< 1/2 int (C - int_0^t G) grad u : grad u
  double u_L = 0;
  double v_L = 0;
  std::vector<double> probes;

  double a_L = 0;
  double boxGdot_u = 0;
  double boxGdot_udot = 0;
  double G_gradu2 = 0;        ///< int G(t) grad u : grad u
  double G_gradv2 = 0;        ///< int G(t) grad udot : grad udot
  double cross_G_u0_v = 0;    ///< int G(t) grad u(0) : grad udot
  double cross_G_u0_a = 0;    ///< int G(t) grad u(0) : grad uddot
  double mixed_G_gradu = 0;   ///< int (int G(t-tau)(grad u(t)-grad u(tau)))  : grad u
  double udot_u = 0;          ///< int udot u
  double K_gamma = 0;         ///< gamma-coefficient part of K
};

struct EnergyTrace {
  std::vector<EnergySample> samples;
  double dt = 0;
  int stride = 1;
  double sample_dt = 0;
  double boundary_damping = 0;
  MonitorParams params;
  bool monitor_valid = true;  ///< rho == 1 everywhere
  std::string kernel_id;
  std::string config_hash;

  double initial_E() const { return samples.empty() ? 0 : samples.front().E; }
  std::vector<double> column(const std::string& name) const;
  static std::vector<std::string> column_names(int n_probes);
};

/// Evaluates every sample functional from a solver step view.
class EnergyMonitor {
 public:
  EnergyMonitor(const Mesh1D& mesh, const MaterialField1D& mat,
                MonitorParams params, const Eigen::VectorXd& f1);

  EnergySample sample(const StepView& view,
                      const std::vector<int>& probes) const;
  const MonitorParams& params() const { return params_; }

 private:
  const Mesh1D& mesh_;
  const MaterialField1D& mat_;
  MonitorParams params_;
  Eigen::ArrayXd eps0_;  ///< initial strain, for the B cross term
};

/// Fills the B and L columns; with params.auto_tune the N3/N1 weights are
/// doubled (16..1024) until the sandwich inequalities hold at t = 0 and at
/// the quarter-points of the trace.
void finalize_trace(EnergyTrace& trace);

/// Runs a simulation and returns the monitored trace plus any snapshots.
struct RunResult {
  EnergyTrace trace;
  std::vector<Snapshot> snapshots;
};

RunResult run_simulation(const Mesh1D& mesh, const MaterialField1D& mat,
                         const SimConfig& cfg, const InitialData& init,
                         MonitorParams params);

// ---------------------------------------------------------------------------
// Identity checks
// ---------------------------------------------------------------------------

/// Residual summary of a discrete identity along a trace: max and rms
/// absolute residual over interior samples plus the scale of the compared
/// quantities (max |rhs|).
struct IdentityReport {
  double max_residual = 0;
  double rms_residual = 0;
  double scale = 0;
};

/// d/dt E = -1/2 int G grad u : grad u + 1/2 int Gdot box du - s |udot(L)|^2.
IdentityReport check_identity_energy_rate(const EnergyTrace& trace);

/// Same identity for E(t, udot), including the initial-strain source term
/// + int G(t) grad u(0) : grad uddot and the -s |uddot(L)|^2 boundary term.
IdentityReport check_identity_energy_rate_dot(const EnergyTrace& trace);

/// d/dt int u udot = int |udot|^2 - int (C - int G) grad u : grad u
///                   - int (int G (grad u(t)-grad u(tau))) : grad u
///                   - s udot(L) u(L).
IdentityReport check_identity_virial(const EnergyTrace& trace);

/// Convolution/box-product identity for a prescribed smooth field, evaluated
/// by quadrature only (no PDE solve). grad_v(x, t) is the spatial gradient of
/// the manufactured field; the scalar kernel is sampled in closed form. The
/// residual converges at second order in dtau.
IdentityReport check_identity_convolution(
    const std::function<double(double, double)>& grad_v, const KernelSpec& k,
    double length, int cells, const std::vector<double>& times, double dtau);

}  // namespace vid

#endif
