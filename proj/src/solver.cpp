#include "vid/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vid {

void Mesh1D::check_valid() const {
  if (!(length > 0)) throw DomainError("mesh length must be positive");
  if (cells < 4) throw DomainError("mesh needs at least 4 cells");
}

MaterialField1D MaterialField1D::uniform(const Mesh1D& mesh, double modulus,
                                         KernelSpec kernel, double rho) {
  MaterialField1D m;
  m.rho = Eigen::ArrayXd::Constant(mesh.cells, rho);
  m.modulus = Eigen::ArrayXd::Constant(mesh.cells, modulus);
  m.kernel = std::move(kernel);
  m.kernel_scale = Eigen::ArrayXd::Ones(mesh.cells);
  return m;
}

void MaterialField1D::check_valid(const Mesh1D& mesh) const {
  const int n = mesh.cells;
  if (rho.size() != n || modulus.size() != n || kernel_scale.size() != n)
    throw DomainError("material field size does not match the mesh");
  if (!(rho.minCoeff() > 0)) throw DomainError("density must be positive");
  if (!(modulus.minCoeff() > 0)) throw DomainError("modulus must be positive");
  if (kernel_scale.minCoeff() < 0) throw DomainError("kernel scale must be nonnegative");
  check_integrable(kernel);
  if (kernel_dim(kernel) != 1)
    throw DomainError("the 1D solver requires a 1D (scalar) kernel");
}

bool MaterialField1D::unit_density() const {
  return ((rho - 1.0).abs() < 1e-14).all();
}

double MaterialField1D::max_wave_speed() const {
  return std::sqrt((modulus / rho).maxCoeff());
}

double MaterialField1D::kernel_at(int cell, double t, int order) const {
  return kernel_scale[cell] * scalar_kernel_value(kernel, t, order);
}

double MaterialField1D::kernel_integral_at(int cell, double t) const {
  return kernel_scale[cell] * scalar_kernel_integral(kernel, t);
}

ConvexityReport material_convexity(const MaterialField1D& mat) {
  ConvexityReport r;
  r.alpha0 = mat.modulus.minCoeff();
  r.beta0 = mat.modulus.maxCoeff();
  r.strongly_convex = r.alpha0 > 1e-10 * std::max(1.0, r.beta0);
  return r;
}

ConvexityReport material_equilibrium(const MaterialField1D& mat) {
  const double total =
      is_empty(mat.kernel) ? 0.0 : kernel_total_integral(mat.kernel).value();
  const Eigen::ArrayXd eq = mat.modulus - mat.kernel_scale * total;
  ConvexityReport r;
  r.alpha0 = eq.minCoeff();
  r.beta0 = eq.maxCoeff();
  r.strongly_convex = r.alpha0 > 1e-10 * std::max(1.0, r.beta0);
  return r;
}

double suggested_dt(const Mesh1D& mesh, const MaterialField1D& mat, double cfl) {
  return cfl * mesh.h() / mat.max_wave_speed();
}

DiscreteOperators assemble(const Mesh1D& mesh, const MaterialField1D& mat) {
  mesh.check_valid();
  mat.check_valid(mesh);
  DiscreteOperators ops;
  ops.h = mesh.h();
  ops.mass = Eigen::ArrayXd::Zero(mesh.nodes());
  for (int c = 0; c < mesh.cells; ++c) {
    ops.mass[c] += 0.5 * mat.rho[c] * ops.h;
    ops.mass[c + 1] += 0.5 * mat.rho[c] * ops.h;
  }
  return ops;
}

Eigen::ArrayXd cell_strain(const Mesh1D& mesh, const Eigen::VectorXd& u) {
  const int n = mesh.cells;
  return (u.segment(1, n).array() - u.segment(0, n).array()) / mesh.h();
}

Eigen::VectorXd internal_force(const Mesh1D& mesh,
                               const Eigen::ArrayXd& stress) {
  const int n = mesh.cells;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.nodes());
  for (int i = 1; i < n; ++i) f[i] = stress[i] - stress[i - 1];
  f[n] = -stress[n - 1];
  return f;
}

// ---------------------------------------------------------------------------
// Prony memory
// ---------------------------------------------------------------------------

PronyMemory::PronyMemory(const PronyKernel& kernel, const Eigen::ArrayXd& scale,
                         int cells, double dt)
    : scale_(scale), dt_(dt) {
  modes_.reserve(kernel.terms.size());
  for (const auto& term : kernel.terms) {
    Mode m;
    m.amplitude = term.amplitude.value();
    m.rate = term.rate;
    m.decay = std::exp(-term.rate * dt);
    m.psi_u = Eigen::ArrayXd::Zero(cells);
    m.psi_u2 = Eigen::ArrayXd::Zero(cells);
    m.psi_v = Eigen::ArrayXd::Zero(cells);
    m.psi_v2 = Eigen::ArrayXd::Zero(cells);
    modes_.push_back(std::move(m));
  }
}

void PronyMemory::advance_strain(const Eigen::ArrayXd& eps_old,
                                 const Eigen::ArrayXd& eps_new) {
  const double half = 0.5 * dt_;
  for (Mode& m : modes_) {
    m.psi_u = m.decay * (m.psi_u + half * eps_old) + half * eps_new;
    m.psi_u2 = m.decay * (m.psi_u2 + half * eps_old.square()) +
               half * eps_new.square();
    m.window = m.decay * (m.window + half) + half;
  }
}

void PronyMemory::advance_rate(const Eigen::ArrayXd& rate_old,
                               const Eigen::ArrayXd& rate_new) {
  const double half = 0.5 * dt_;
  for (Mode& m : modes_) {
    m.psi_v = m.decay * (m.psi_v + half * rate_old) + half * rate_new;
    m.psi_v2 = m.decay * (m.psi_v2 + half * rate_old.square()) +
               half * rate_new.square();
  }
}

Eigen::ArrayXd PronyMemory::stress() const {
  Eigen::ArrayXd s = Eigen::ArrayXd::Zero(scale_.size());
  for (const Mode& m : modes_) s += m.amplitude * m.psi_u;
  return scale_ * s;
}

MemoryReadout PronyMemory::readout(double t, const Eigen::ArrayXd& eps,
                                   const Eigen::ArrayXd& rate) const {
  (void)t;
  const int cells = static_cast<int>(scale_.size());
  MemoryReadout r;
  r.conv_G = Eigen::ArrayXd::Zero(cells);
  r.conv_Gdot = Eigen::ArrayXd::Zero(cells);
  r.box_G_u = Eigen::ArrayXd::Zero(cells);
  r.box_Gdot_u = Eigen::ArrayXd::Zero(cells);
  r.box_G_v = Eigen::ArrayXd::Zero(cells);
  r.box_Gdot_v = Eigen::ArrayXd::Zero(cells);
  r.mixed_G = Eigen::ArrayXd::Zero(cells);
  for (const Mode& m : modes_) {
    // The box expands as eps^2 J0 - 2 eps J1 + J2. All three accumulators
    // use the same trapezoid rule, so the expansion regroups into the
    // trapezoid sum of the nonnegative integrand exp(-r(t-tau))
    // (eps(t)-eps(tau))^2 and the box stays nonnegative structurally.
    const double j0 = m.window;
    const Eigen::ArrayXd box_u =
        eps.square() * j0 - 2.0 * eps * m.psi_u + m.psi_u2;
    const Eigen::ArrayXd box_v =
        rate.square() * j0 - 2.0 * rate * m.psi_v + m.psi_v2;
    r.conv_G += m.amplitude * m.psi_u;
    r.conv_Gdot += -m.rate * m.amplitude * m.psi_u;
    r.box_G_u += m.amplitude * box_u;
    r.box_Gdot_u += -m.rate * m.amplitude * box_u;
    r.box_G_v += m.amplitude * box_v;
    r.box_Gdot_v += -m.rate * m.amplitude * box_v;
    r.mixed_G += m.amplitude * (eps * j0 - m.psi_u);
  }
  r.conv_G *= scale_;
  r.conv_Gdot *= scale_;
  r.box_G_u *= scale_;
  r.box_Gdot_u *= scale_;
  r.box_G_v *= scale_;
  r.box_Gdot_v *= scale_;
  r.mixed_G *= scale_;
  return r;
}

// ---------------------------------------------------------------------------
// Dense memory
// ---------------------------------------------------------------------------

DenseMemory::DenseMemory(const KernelSpec& kernel, const Eigen::ArrayXd& scale,
                         int cells, double dt, int stride, int max_steps)
    : scale_(scale), dt_(dt), stride_(std::max(1, stride)), cells_(cells) {
  const int n = max_steps + kBlock + 2;
  w_g_.resize(n);
  w_gdot_.resize(n);
  for (int j = 0; j < n; ++j) {
    w_g_[j] = scalar_kernel_value(kernel, j * dt, 0);
    w_gdot_[j] = scalar_kernel_value(kernel, j * dt, 1);
  }
  hist_.resize(cells, max_steps + 2);
  w_block_g_.resize(kBlock, max_steps + 2);
  w_block_gdot_.resize(kBlock, max_steps + 2);
  old_g_.resize(kBlock, cells);
  old_gdot_.resize(kBlock, cells);
}

void DenseMemory::push_strain(const Eigen::ArrayXd& eps) {
  if (steps_ >= hist_.cols())
    throw NumericalError("dense memory exceeded its preallocated history");
  hist_.col(steps_) = eps.matrix();
  ++steps_;
  const int n = steps_ - 1;
  if (n > 0 && n % kBlock == 0) {
    old_cover_ = n;
    precompute_old();
  }
}

void DenseMemory::precompute_old() {
  // Partial trapezoid sums over k < old_cover_ for the kBlock coming steps:
  // row i holds sum_k w[old_cover_ + i - k] eps_k with the k = 0 endpoint
  // halved. W(i, k) = w[old_cover_ + i - k] is a reversed weight segment.
  const int n0 = old_cover_;
  auto w_block_g = w_block_g_.leftCols(n0);
  auto w_block_gdot = w_block_gdot_.leftCols(n0);
  for (int i = 0; i < kBlock; ++i) {
    w_block_g.row(i) = w_g_.segment(i + 1, n0).reverse().transpose();
    w_block_gdot.row(i) = w_gdot_.segment(i + 1, n0).reverse().transpose();
  }
  w_block_g.col(0) *= 0.5;
  w_block_gdot.col(0) *= 0.5;
  old_g_.noalias() = w_block_g * hist_.leftCols(n0).transpose();
  old_gdot_.noalias() = w_block_gdot * hist_.leftCols(n0).transpose();
}

void DenseMemory::push_rate(const Eigen::ArrayXd& rate) {
  strain_rate_.push_back(rate);
}

Eigen::ArrayXd DenseMemory::convolve(const Eigen::VectorXd& weights,
                                     const Eigen::MatrixXd& old_part) const {
  const int n = steps_ - 1;
  Eigen::ArrayXd acc = Eigen::ArrayXd::Zero(cells_);
  if (n < 1) return acc;
  if (old_cover_ > 0) acc = old_part.row(n - old_cover_).transpose().array();
  for (int k = old_cover_; k <= n; ++k) {
    double w = weights[n - k];
    if (k == n) w *= 0.5;
    if (k == 0) w *= 0.5;
    acc += w * hist_.col(k).array();
  }
  return (dt_ * acc) * scale_;
}

Eigen::ArrayXd DenseMemory::stress() const { return convolve(w_g_, old_g_); }

MemoryReadout DenseMemory::readout(double t, const Eigen::ArrayXd& eps,
                                   const Eigen::ArrayXd& rate) const {
  MemoryReadout r;
  r.conv_G = convolve(w_g_, old_g_);
  r.conv_Gdot = convolve(w_gdot_, old_gdot_);

  // Box products quadrate on the sampling-stride tau grid; the strain-rate
  // history only exists at that resolution.
  const int last = steps_ - 1;
  r.box_G_u = Eigen::ArrayXd::Zero(cells_);
  r.box_Gdot_u = Eigen::ArrayXd::Zero(cells_);
  r.box_G_v = Eigen::ArrayXd::Zero(cells_);
  r.box_Gdot_v = Eigen::ArrayXd::Zero(cells_);
  r.mixed_G = Eigen::ArrayXd::Zero(cells_);
  if (last < 1) return r;
  if (last % stride_ != 0)
    throw NumericalError("dense box products need a stride-aligned sample time");
  const int m_max = last / stride_;
  const double dtau = stride_ * dt_;
  for (int m = 0; m <= m_max; ++m) {
    const double cw = (m == 0 || m == m_max) ? 0.5 : 1.0;
    const int j = (m_max - m) * stride_;
    const Eigen::ArrayXd du = eps - hist_.col(m * stride_).array();
    r.box_G_u += cw * w_g_[j] * du.square();
    r.box_Gdot_u += cw * w_gdot_[j] * du.square();
    r.mixed_G += cw * w_g_[j] * du;
    if (m < static_cast<int>(strain_rate_.size())) {
      const Eigen::ArrayXd dv = rate - strain_rate_[m];
      r.box_G_v += cw * w_g_[j] * dv.square();
      r.box_Gdot_v += cw * w_gdot_[j] * dv.square();
    }
  }
  r.box_G_u *= dtau * scale_;
  r.box_Gdot_u *= dtau * scale_;
  r.box_G_v *= dtau * scale_;
  r.box_Gdot_v *= dtau * scale_;
  r.mixed_G *= dtau * scale_;
  (void)t;
  return r;
}

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

Simulator::Simulator(Mesh1D mesh, MaterialField1D material, SimConfig config,
                     InitialData initial)
    : mesh_(mesh),
      material_(std::move(material)),
      config_(std::move(config)),
      initial_(std::move(initial)) {
  mesh_.check_valid();
  material_.check_valid(mesh_);
  ops_ = assemble(mesh_, material_);

  if (!(config_.cfl > 0) || config_.cfl > 0.9)
    throw ConfigError("CFL safety factor must lie in (0, 0.9]");
  const double dt_limit = suggested_dt(mesh_, material_, 0.9);
  dt_ = config_.dt > 0 ? config_.dt : suggested_dt(mesh_, material_, config_.cfl);
  if (dt_ > dt_limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "time step " << dt_ << " violates the CFL bound; use dt <= "
        << dt_limit;
    throw ConfigError(msg.str());
  }
  if (!(config_.t_end >= 0)) throw ConfigError("T_end must be nonnegative");
  if (config_.boundary_damping < 0)
    throw ConfigError("boundary dissipation coefficient must be nonnegative");
  if (config_.stride < 1) throw ConfigError("sampling stride must be positive");

  n_steps_ = std::llround(config_.t_end / dt_);
  if (n_steps_ * dt_ < config_.t_end - 1e-12 * std::max(1.0, config_.t_end))
    ++n_steps_;
  // Keep the sample spacing uniform: end on a stride multiple.
  if (n_steps_ % config_.stride != 0)
    n_steps_ += config_.stride - (n_steps_ % config_.stride);

  if (initial_.f1.size() != mesh_.nodes() || initial_.f2.size() != mesh_.nodes())
    throw ConfigError("initial data size does not match the mesh");
  if (!initial_.f1.allFinite() || !initial_.f2.allFinite())
    throw ConfigError("initial data must be finite");
  if (std::abs(initial_.f1[0]) > 0)
    throw ConfigError("f1 must vanish at the displacement boundary node");

  for (int p : config_.probes)
    if (p < 0 || p >= mesh_.nodes())
      throw ConfigError("probe node index out of range");

  init();
}

Eigen::VectorXd Simulator::acceleration(const Eigen::ArrayXd& eps,
                                        const Eigen::ArrayXd& sigma_mem,
                                        double v_end) const {
  const Eigen::ArrayXd sigma = material_.modulus * eps - sigma_mem;
  Eigen::VectorXd f = internal_force(mesh_, sigma);
  f[mesh_.nodes() - 1] -= config_.boundary_damping * v_end;
  Eigen::VectorXd a = Eigen::VectorXd::Zero(mesh_.nodes());
  for (int i = 1; i < mesh_.nodes(); ++i) a[i] = f[i] / ops_.mass[i];
  return a;
}

void Simulator::init() {
  const int cells = mesh_.cells;
  if (!is_empty(material_.kernel)) {
    const bool poly = std::holds_alternative<PolynomialKernel>(material_.kernel);
    if (config_.backend == MemoryBackend::prony) {
      if (poly)
        throw ConfigError(
            "the recursive memory backend requires a Prony kernel; "
            "use the dense backend for polynomial kernels");
      memory_.emplace(PronyMemory(std::get<PronyKernel>(material_.kernel),
                                  material_.kernel_scale, cells, dt_));
    } else {
      memory_.emplace(DenseMemory(material_.kernel, material_.kernel_scale,
                                  cells, dt_, config_.stride,
                                  static_cast<int>(n_steps_)));
      std::get<DenseMemory>(*memory_).push_strain(
          cell_strain(mesh_, initial_.f1));
    }
  }

  // Start the three-level recurrence: u^1 by a Taylor step, and the ghost
  // level u^{-1} = u^1 - 2 dt f2 so that the centered velocity at t=0 is f2.
  u_curr_ = initial_.f1;
  u_curr_[0] = 0.0;
  const Eigen::ArrayXd eps0 = cell_strain(mesh_, u_curr_);
  const Eigen::VectorXd a0 = acceleration(
      eps0, Eigen::ArrayXd::Zero(cells), initial_.f2[mesh_.nodes() - 1]);
  u_prev_ = u_curr_ - dt_ * initial_.f2 + 0.5 * dt_ * dt_ * a0;
  u_prev_[0] = 0.0;
}

}  // namespace vid
