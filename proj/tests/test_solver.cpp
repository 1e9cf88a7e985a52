#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vid/energy.hpp"
#include "vid/solver.hpp"

using namespace vid;

namespace {

constexpr double kPi = std::numbers::pi;

KernelSpec single_term(double amplitude, double rate) {
  PronyKernel k;
  k.terms.push_back({VoigtTensor::scalar(amplitude), rate});
  return KernelSpec{k};
}

InitialData quarter_sine(const Mesh1D& mesh, double amplitude = 1.0) {
  InitialData init;
  init.f1.resize(mesh.nodes());
  init.f2 = Eigen::VectorXd::Zero(mesh.nodes());
  for (int i = 0; i < mesh.nodes(); ++i)
    init.f1[i] = amplitude * std::sin(kPi * mesh.node_x(i) / (2.0 * mesh.length));
  return init;
}

}  // namespace

TEST_CASE("lumped mass on the 4-cell unit mesh") {
  const Mesh1D mesh{1.0, 4};
  const MaterialField1D mat =
      MaterialField1D::uniform(mesh, 1.0, KernelSpec{PronyKernel{}});
  const DiscreteOperators ops = assemble(mesh, mat);
  CHECK(ops.mass[0] == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(ops.mass[4] == doctest::Approx(0.125).epsilon(1e-15));
  for (int i = 1; i < 4; ++i)
    CHECK(ops.mass[i] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("stiffness action on a linear profile") {
  const Mesh1D mesh{1.0, 8};
  Eigen::VectorXd u(mesh.nodes());
  for (int i = 0; i < mesh.nodes(); ++i) u[i] = mesh.node_x(i);

  const Eigen::ArrayXd eps = cell_strain(mesh, u);
  for (int c = 0; c < mesh.cells; ++c)
    CHECK(eps[c] == doctest::Approx(1.0).epsilon(1e-14));

  // Unit modulus: interior residual vanishes, only the traction node carries
  // the boundary flux C u_x = 1.
  const Eigen::VectorXd f = internal_force(mesh, eps);
  for (int i = 1; i < mesh.nodes() - 1; ++i)
    CHECK(std::abs(f[i]) <= 1e-14);
  CHECK(f[mesh.nodes() - 1] == doctest::Approx(-1.0).epsilon(1e-14));

  // Scaling the modulus scales the stiffness output.
  const Eigen::VectorXd f3 = internal_force(mesh, (3.0 * eps).eval());
  for (int i = 0; i < mesh.nodes(); ++i)
    CHECK(f3[i] == doctest::Approx(3.0 * f[i]).epsilon(1e-14));
}

TEST_CASE("zero initial data stays zero") {
  const Mesh1D mesh{1.0, 16};
  const MaterialField1D mat = MaterialField1D::uniform(mesh, 2.0, single_term(1.0, 1.0));
  SimConfig cfg;
  cfg.t_end = 2.0;
  cfg.stride = 4;
  InitialData init{Eigen::VectorXd::Zero(mesh.nodes()),
                   Eigen::VectorXd::Zero(mesh.nodes())};
  Simulator sim(mesh, mat, cfg, init);
  sim.run([&](const StepView& v) {
    CHECK(v.u.norm() == 0.0);
    CHECK(v.v.norm() == 0.0);
  });
}

TEST_CASE("dirichlet node is pinned exactly") {
  const Mesh1D mesh{1.0, 32};
  const MaterialField1D mat = MaterialField1D::uniform(mesh, 1.0, single_term(0.5, 1.5));
  SimConfig cfg;
  cfg.t_end = 3.0;
  cfg.stride = 1;
  cfg.boundary_damping = 0.3;
  Simulator sim(mesh, mat, cfg, quarter_sine(mesh));
  sim.run([&](const StepView& v) { CHECK(v.u[0] == 0.0); });
}

TEST_CASE("memory stress of a frozen strain matches the window integral") {
  const int cells = 8;
  const double g = 1.5, r = 2.0, dt = 1e-3;
  const Eigen::ArrayXd scale = Eigen::ArrayXd::Ones(cells);
  const Eigen::ArrayXd eps0 = Eigen::ArrayXd::Constant(cells, 0.7);

  PronyMemory prony(std::get<PronyKernel>(single_term(g, r)), scale, cells, dt);
  DenseMemory dense(single_term(g, r), scale, cells, dt, 4, 2100);
  dense.push_strain(eps0);

  for (int n = 0; n < 2000; ++n) {
    prony.advance_strain(eps0, eps0);
    dense.push_strain(eps0);
  }
  const double t = 2000 * dt;
  const double exact = g * 0.7 * (1.0 - std::exp(-r * t)) / r;
  CHECK(prony.stress()[3] == doctest::Approx(exact).epsilon(1e-6));
  CHECK(dense.stress()[3] == doctest::Approx(exact).epsilon(1e-6));
  // And at t = 0 the integral is empty.
  PronyMemory fresh(std::get<PronyKernel>(single_term(g, r)), scale, cells, dt);
  CHECK(fresh.stress().abs().maxCoeff() == 0.0);
}

TEST_CASE("dense and recursive backends compute the same trapezoid sums") {
  // Random smooth strain sequence, two-mode kernel: the unrolled exponential
  // recursion is algebraically the composite trapezoid rule, so the two
  // routes agree to roundoff.
  const int cells = 6;
  const double dt = 2e-3;
  PronyKernel pk;
  pk.terms.push_back({VoigtTensor::scalar(1.5), 2.0});
  pk.terms.push_back({VoigtTensor::scalar(0.4), 0.3});
  const Eigen::ArrayXd scale = Eigen::ArrayXd::Ones(cells);

  PronyMemory prony(pk, scale, cells, dt);
  DenseMemory dense(KernelSpec{pk}, scale, cells, dt, 4, 300);

  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  Eigen::ArrayXd phase(cells), freq(cells);
  for (int c = 0; c < cells; ++c) {
    phase[c] = amp(rng);
    freq[c] = 2.0 + amp(rng);
  }
  const auto strain_at = [&](int n) {
    return (freq * (n * dt) + phase).sin().eval();
  };

  dense.push_strain(strain_at(0));
  double worst = 0;
  for (int n = 0; n < 200; ++n) {
    prony.advance_strain(strain_at(n), strain_at(n + 1));
    dense.push_strain(strain_at(n + 1));
    const Eigen::ArrayXd d = prony.stress() - dense.stress();
    worst = std::max(worst, d.abs().maxCoeff());
  }
  CHECK(worst <= 1e-6);
  CHECK(worst <= 1e-12);  // in fact identical up to summation order
}

TEST_CASE("elastic quarter wave returns after one period") {
  // Fixed-free string, fundamental mode: u = sin(pi x / 2L) cos(pi c t / 2L),
  // period 4L/c. Second-order accurate in h and dt together.
  double prev_err = 0;
  for (int level = 0; level < 2; ++level) {
    const int n = 64 << level;
    const Mesh1D mesh{1.0, n};
    const MaterialField1D mat =
        MaterialField1D::uniform(mesh, 1.0, KernelSpec{PronyKernel{}});
    SimConfig cfg;
    cfg.dt = 0.5 * mesh.h();
    cfg.t_end = 4.0;
    cfg.stride = 1;
    const InitialData init = quarter_sine(mesh);
    Simulator sim(mesh, mat, cfg, init);
    double err = 0;
    sim.run([&](const StepView& v) {
      if (std::abs(v.t - 4.0) < 0.26 * cfg.dt)
        err = (v.u - init.f1).cwiseAbs().maxCoeff();
    });
    if (level == 0) CHECK(err <= 0.01);
    if (level > 0) CHECK(err <= 0.35 * prev_err);
    prev_err = err;
  }
}

TEST_CASE("runs scale linearly with the initial data") {
  const Mesh1D mesh{1.0, 48};
  const MaterialField1D mat = MaterialField1D::uniform(mesh, 2.0, single_term(1.0, 1.0));
  SimConfig cfg;
  cfg.t_end = 3.0;
  cfg.stride = 6;
  cfg.boundary_damping = 0.2;

  std::vector<Eigen::VectorXd> u1, u2;
  {
    Simulator sim(mesh, mat, cfg, quarter_sine(mesh, 1.0));
    sim.run([&](const StepView& v) { u1.push_back(v.u); });
  }
  {
    Simulator sim(mesh, mat, cfg, quarter_sine(mesh, 2.0));
    sim.run([&](const StepView& v) { u2.push_back(v.u); });
  }
  REQUIRE(u1.size() == u2.size());
  for (size_t k = 0; k < u1.size(); ++k) {
    const double diff = (u2[k] - 2.0 * u1[k]).cwiseAbs().maxCoeff();
    CHECK(diff <= 1e-12 * std::max(1.0, u2[k].cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("cfl violations are refused with a suggested step") {
  const Mesh1D mesh{1.0, 32};
  const MaterialField1D mat =
      MaterialField1D::uniform(mesh, 4.0, KernelSpec{PronyKernel{}});
  SimConfig cfg;
  cfg.dt = mesh.h();  // wave speed 2: the bound is 0.9 h / 2
  cfg.t_end = 1.0;
  try {
    Simulator sim(mesh, mat, cfg, quarter_sine(mesh));
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dt") != std::string::npos);
    CHECK(msg.find("0.0140") != std::string::npos);  // 0.9 * h / 2 = 0.0140625
  }
  CHECK_THROWS_AS(
      [&] {
        SimConfig bad = cfg;
        bad.dt = 0;
        bad.cfl = 0.95;
        Simulator sim(mesh, mat, bad, quarter_sine(mesh));
      }(),
      ConfigError);
}

TEST_CASE("blow-ups are reported with the failing step") {
  // An uncertified kernel with a large negative amplitude pumps energy in;
  // the run must stop with a NumericalError naming the step.
  const Mesh1D mesh{1.0, 16};
  const MaterialField1D mat = MaterialField1D::uniform(mesh, 1.0, single_term(-500.0, 0.1));
  SimConfig cfg;
  cfg.t_end = 50.0;
  cfg.stride = 50;
  Simulator sim(mesh, mat, cfg, quarter_sine(mesh));
  try {
    sim.run([](const StepView&) {});
    FAIL("expected a NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("step") != std::string::npos);
  }
}

TEST_CASE("suggested dt and config validation") {
  const Mesh1D mesh{2.0, 50};
  const MaterialField1D mat =
      MaterialField1D::uniform(mesh, 9.0, KernelSpec{PronyKernel{}}, 1.0);
  CHECK(suggested_dt(mesh, mat, 0.9) ==
        doctest::Approx(0.9 * 0.04 / 3.0).epsilon(1e-14));

  Mesh1D tiny{1.0, 3};
  CHECK_THROWS_AS(tiny.check_valid(), DomainError);

  SimConfig cfg;
  cfg.t_end = 1.0;
  InitialData init = quarter_sine(mesh);
  init.f1[0] = 0.5;  // violates the pinned end
  CHECK_THROWS_AS(Simulator(mesh, mat, cfg, init), ConfigError);
}

TEST_CASE("prony backend refuses polynomial kernels") {
  const Mesh1D mesh{1.0, 16};
  PolynomialKernel poly;
  poly.amplitude = VoigtTensor::scalar(1.0);
  poly.scale = 0.5;
  poly.a = 3.0;
  poly.p = 3.0;
  const MaterialField1D mat = MaterialField1D::uniform(mesh, 2.0, KernelSpec{poly});
  SimConfig cfg;
  cfg.t_end = 1.0;
  cfg.backend = MemoryBackend::prony;
  CHECK_THROWS_AS(Simulator(mesh, mat, cfg, quarter_sine(mesh)), ConfigError);
  cfg.backend = MemoryBackend::dense;
  Simulator ok(mesh, mat, cfg, quarter_sine(mesh));
  CHECK(ok.total_steps() > 0);
}

TEST_CASE("a zero-length run yields the single initial sample") {
  const Mesh1D mesh{1.0, 8};
  const MaterialField1D mat =
      MaterialField1D::uniform(mesh, 1.0, KernelSpec{PronyKernel{}});
  SimConfig cfg;
  cfg.t_end = 0.0;
  const RunResult r = run_simulation(mesh, mat, cfg, quarter_sine(mesh),
                                     default_monitor_params(mesh, mat, MonitorMode::exponential));
  CHECK(r.trace.samples.size() == 1);
  CHECK(r.trace.samples[0].t == 0.0);
}
