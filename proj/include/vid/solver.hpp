#ifndef VID_SOLVER_HPP
#define VID_SOLVER_HPP

#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "vid/kernels.hpp"

namespace vid {

/// Uniform 1D mesh on (0, L). Node 0 carries the homogeneous displacement
/// condition, node N the traction(+dissipation) condition.
struct Mesh1D {
  double length = 1;
  int cells = 4;

  double h() const { return length / cells; }
  int nodes() const { return cells + 1; }
  double node_x(int i) const { return length * i / cells; }

  /// Throws DomainError unless cells >= 4 and length > 0.
  void check_valid() const;
};

/// Piecewise-constant material data: per-cell density, per-cell instantaneous
/// modulus, and a shared kernel scaled per cell.
struct MaterialField1D {
  Eigen::ArrayXd rho;      ///< size cells, >= rho0 > 0
  Eigen::ArrayXd modulus;  ///< size cells, instantaneous C
  KernelSpec kernel;       ///< 1x1 amplitudes
  Eigen::ArrayXd kernel_scale;  ///< size cells, >= 0

  static MaterialField1D uniform(const Mesh1D& mesh, double modulus,
                                 KernelSpec kernel, double rho = 1.0);
  void check_valid(const Mesh1D& mesh) const;
  bool unit_density() const;
  double max_wave_speed() const;  ///< max over cells of sqrt(C/rho)

  double kernel_at(int cell, double t, int order = 0) const;
  double kernel_integral_at(int cell, double t) const;
};

/// Convexity of the instantaneous modulus field: alpha0 = min over cells,
/// beta0 = max over cells (1D scalar moduli).
ConvexityReport material_convexity(const MaterialField1D& mat);

/// Per-cell equilibrium modulus certification, worst cell reported.
ConvexityReport material_equilibrium(const MaterialField1D& mat);

enum class MemoryBackend { dense, prony };

struct SimConfig {
  double dt = 0;    ///< explicit step; 0 derives it from cfl
  double cfl = 0.9;  ///< Courant safety factor, must be <= 0.9
  double t_end = 1;
  double boundary_damping = 0;  ///< s >= 0 in T u + s u_t = 0 at x = L
  MemoryBackend backend = MemoryBackend::prony;
  int stride = 10;           ///< energy sampling stride (steps)
  int snapshot_stride = 0;   ///< 0 disables snapshots
  std::vector<int> probes;   ///< node indices recorded per sample
};

/// Nodal initial data; f1[0] must vanish (Dirichlet side).
struct InitialData {
  Eigen::VectorXd f1;  ///< displacement
  Eigen::VectorXd f2;  ///< velocity
};

/// Largest admissible step for the mesh/material pair at safety factor cfl.
double suggested_dt(const Mesh1D& mesh, const MaterialField1D& mat,
                    double cfl = 0.9);

/// Lumped P1 operators on the uniform mesh.
struct DiscreteOperators {
  Eigen::ArrayXd mass;  ///< nodal lumped mass (rho h, halved at the ends)
  double h = 0;
};

DiscreteOperators assemble(const Mesh1D& mesh, const MaterialField1D& mat);

/// Per-cell strain (u_{i+1} - u_i)/h of a nodal field.
Eigen::ArrayXd cell_strain(const Mesh1D& mesh, const Eigen::VectorXd& u);

/// Nodal internal force of a per-cell stress field: flux differences inside,
/// -sigma_{N-1} at the traction node, 0 at the pinned node.
Eigen::VectorXd internal_force(const Mesh1D& mesh,
                               const Eigen::ArrayXd& stress);

/// Per-cell memory quantities a backend exposes at a sample time t:
/// convolutions against G and Gdot, the box products of strain and strain
/// rate against G and Gdot, and the mixed first-order box used by the
/// virial identity check. All arrays have one entry per cell and include
/// the per-cell kernel scale.
struct MemoryReadout {
  Eigen::ArrayXd conv_G;      ///< int G(t-tau) eps(tau) dtau
  Eigen::ArrayXd conv_Gdot;   ///< int Gdot(t-tau) eps(tau) dtau
  Eigen::ArrayXd box_G_u;     ///< int G(t-tau) (eps(t)-eps(tau))^2 dtau
  Eigen::ArrayXd box_Gdot_u;
  Eigen::ArrayXd box_G_v;     ///< same with the strain rate
  Eigen::ArrayXd box_Gdot_v;
  Eigen::ArrayXd mixed_G;     ///< int G(t-tau) (eps(t)-eps(tau)) dtau
};

/// Exponential-recursion accumulators, one set per Prony mode and cell.
/// The trapezoid update psi^{n+1} = E psi^n + dt/2 (E x^n + x^{n+1}) with
/// E = exp(-r dt) unrolls to the composite trapezoid rule applied to
/// int exp(-r(t-tau)) x(tau) dtau, so this backend and the dense one compute
/// the same quadrature of the same convolution.
class PronyMemory {
 public:
  PronyMemory(const PronyKernel& kernel, const Eigen::ArrayXd& scale, int cells,
              double dt);

  void advance_strain(const Eigen::ArrayXd& eps_old,
                      const Eigen::ArrayXd& eps_new);
  void advance_rate(const Eigen::ArrayXd& rate_old,
                    const Eigen::ArrayXd& rate_new);

  /// Memory stress sum_j g_j psi_j at the current accumulator time.
  Eigen::ArrayXd stress() const;

  MemoryReadout readout(double t, const Eigen::ArrayXd& eps,
                        const Eigen::ArrayXd& rate) const;

 private:
  struct Mode {
    double amplitude = 0;
    double rate = 0;
    double decay = 0;   ///< exp(-rate dt)
    double window = 0;  ///< trapezoid of int_0^t exp(-r(t-tau)) dtau
    Eigen::ArrayXd psi_u, psi_u2, psi_v, psi_v2;
  };
  std::vector<Mode> modes_;
  Eigen::ArrayXd scale_;
  double dt_ = 0;
};

/// Full strain history plus precomputed kernel weight tables. The force
/// convolution runs at full step resolution; contributions of history older
/// than the current block are batched into a matrix product every kBlock
/// steps so the quadratic-cost backend stays usable at desk scale. The energy
/// box products quadrate on the sampling-stride tau grid.
class DenseMemory {
 public:
  DenseMemory(const KernelSpec& kernel, const Eigen::ArrayXd& scale, int cells,
              double dt, int stride, int max_steps);

  void push_strain(const Eigen::ArrayXd& eps);       ///< every step
  void push_rate(const Eigen::ArrayXd& rate);        ///< every stride steps

  Eigen::ArrayXd stress() const;  ///< at the time of the last pushed strain

  MemoryReadout readout(double t, const Eigen::ArrayXd& eps,
                        const Eigen::ArrayXd& rate) const;

 private:
  static constexpr int kBlock = 64;

  /// Trapezoid convolution sum_k w[n-k] eps_k at the current step n, split
  /// into the precomputed old-history part and a short recent loop.
  Eigen::ArrayXd convolve(const Eigen::VectorXd& weights,
                          const Eigen::MatrixXd& old_part) const;
  void precompute_old();

  Eigen::ArrayXd scale_;
  double dt_ = 0;
  int stride_ = 1;
  int cells_ = 0;
  int steps_ = 0;  ///< stored history columns (current step index + 1)
  Eigen::VectorXd w_g_, w_gdot_;  ///< kernel value tables at j*dt
  Eigen::MatrixXd hist_;          ///< cells x max_steps strain history
  std::vector<Eigen::ArrayXd> strain_rate_;  ///< per stride step
  int old_cover_ = 0;  ///< old-history products cover k < old_cover_
  Eigen::MatrixXd old_g_, old_gdot_;  ///< kBlock x cells partial sums
  Eigen::MatrixXd w_block_g_, w_block_gdot_;  ///< reusable gemm inputs
};

using MemoryState = std::variant<PronyMemory, DenseMemory>;

/// View of the discrete state a monitor sees at a sample time.
struct StepView {
  long step = 0;
  double t = 0;
  const Eigen::VectorXd& u;
  const Eigen::VectorXd& v;
  const Eigen::VectorXd& a;
  const Eigen::ArrayXd& eps;       ///< cell strain of u
  const Eigen::ArrayXd& eps_rate;  ///< cell strain of v
  const MemoryReadout& memory;
};

struct Snapshot {
  double t = 0;
  Eigen::VectorXd u;
};

/// Explicit central-difference integrator for the 1D viscoelastic system
/// rho u_tt = d/dx (C u_x - int_0^t G(t-tau) u_x(tau) dtau) with u(0,t) = 0
/// and total traction + s u_t = 0 at x = L. The boundary dissipation is the
/// one semi-implicit element: it uses the centered velocity at node N.
class Simulator {
 public:
  /// Validates mesh/material/config/initial data; throws ConfigError with a
  /// suggested dt when the requested step violates the CFL bound.
  Simulator(Mesh1D mesh, MaterialField1D material, SimConfig config,
            InitialData initial);

  long total_steps() const { return n_steps_; }
  double dt() const { return dt_; }

  /// Runs the full time loop; `sample` is invoked at every stride-aligned
  /// step (including step 0 and the final step).
  template <typename SampleFn>
  void run(SampleFn&& sample);

  const std::vector<Snapshot>& snapshots() const { return snapshots_; }
  const Mesh1D& mesh() const { return mesh_; }
  const MaterialField1D& material() const { return material_; }
  const SimConfig& config() const { return config_; }

 private:
  void init();
  Eigen::VectorXd acceleration(const Eigen::ArrayXd& eps,
                               const Eigen::ArrayXd& sigma_mem,
                               double v_end) const;

  Mesh1D mesh_;
  MaterialField1D material_;
  SimConfig config_;
  InitialData initial_;
  DiscreteOperators ops_;
  double dt_ = 0;
  long n_steps_ = 0;
  std::optional<MemoryState> memory_;
  std::vector<Snapshot> snapshots_;

  Eigen::VectorXd u_prev_, u_curr_;
  Eigen::ArrayXd prev_rate_;
};

/// Full time loop with explicit template instantiation kept in the header:
/// steps the three-level recurrence, keeps the memory accumulators aligned
/// with the sample clock, and checks finiteness as it goes.
template <typename SampleFn>
void Simulator::run(SampleFn&& sample) {
  const int cells = mesh_.cells;
  const int last = mesh_.nodes() - 1;
  const double s = config_.boundary_damping;
  const double dt2 = dt_ * dt_;

  Eigen::VectorXd u_next(mesh_.nodes());
  for (long n = 0; n <= n_steps_; ++n) {
    const double t = n * dt_;
    const Eigen::ArrayXd eps = cell_strain(mesh_, u_curr_);

    Eigen::ArrayXd sigma_mem =
        memory_ ? std::visit([](const auto& m) { return m.stress(); },
                             *memory_)
                : Eigen::ArrayXd::Zero(cells).eval();

    // Predict u^{n+1}; the centered velocity of the dissipation term makes
    // the traction-node update implicit in u^{n+1}_N only.
    const Eigen::ArrayXd sigma =
        material_.modulus * eps - sigma_mem;
    const Eigen::VectorXd f = internal_force(mesh_, sigma);
    u_next[0] = 0.0;
    for (int i = 1; i < last; ++i)
      u_next[i] = 2.0 * u_curr_[i] - u_prev_[i] + dt2 * f[i] / ops_.mass[i];
    {
      const double m = ops_.mass[last];
      const double lhs = m / dt2 + 0.5 * s / dt_;
      const double rhs = f[last] + m * (2.0 * u_curr_[last] - u_prev_[last]) / dt2 +
                         0.5 * s * u_prev_[last] / dt_;
      u_next[last] = rhs / lhs;
    }

    const Eigen::VectorXd v = (u_next - u_prev_) / (2.0 * dt_);
    const Eigen::VectorXd a = (u_next - 2.0 * u_curr_ + u_prev_) / dt2;
    const Eigen::ArrayXd eps_rate = cell_strain(mesh_, v);

    if (memory_) {
      if (std::holds_alternative<PronyMemory>(*memory_)) {
        if (n >= 1)
          std::get<PronyMemory>(*memory_).advance_rate(prev_rate_, eps_rate);
      } else if (n % config_.stride == 0) {
        std::get<DenseMemory>(*memory_).push_rate(eps_rate);
      }
    }

    if (n % config_.stride == 0 || n == n_steps_) {
      MemoryReadout readout =
          memory_ ? std::visit([&](const auto& m) {
                      return m.readout(t, eps, eps_rate);
                    },
                    *memory_)
                  : MemoryReadout{Eigen::ArrayXd::Zero(cells),
                                  Eigen::ArrayXd::Zero(cells),
                                  Eigen::ArrayXd::Zero(cells),
                                  Eigen::ArrayXd::Zero(cells),
                                  Eigen::ArrayXd::Zero(cells),
                                  Eigen::ArrayXd::Zero(cells),
                                  Eigen::ArrayXd::Zero(cells)};
      sample(StepView{n, t, u_curr_, v, a, eps, eps_rate, readout});
    }
    if (config_.snapshot_stride > 0 &&
        (n % config_.snapshot_stride == 0 || n == n_steps_)) {
      snapshots_.push_back({t, u_curr_});
    }

    if (n == n_steps_) break;

    if (memory_) {
      const Eigen::ArrayXd eps_next = cell_strain(mesh_, u_next);
      if (std::holds_alternative<PronyMemory>(*memory_))
        std::get<PronyMemory>(*memory_).advance_strain(eps, eps_next);
      else
        std::get<DenseMemory>(*memory_).push_strain(eps_next);
    }

    if (!u_next.allFinite())
      throw NumericalError("instability detected at step " + std::to_string(n + 1) +
                           " (t = " + std::to_string(t + dt_) + ")");

    prev_rate_ = eps_rate;
    u_prev_ = u_curr_;
    u_curr_ = u_next;
  }
}

}  // namespace vid

#endif
