#include "vid/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace vid {

void PolyBoundParams::check_valid() const {
  if (!(y0 >= 0)) throw DomainError("y0 must be nonnegative");
  if (!(m2 >= 0)) throw DomainError("M2 must be nonnegative");
  if (!(m3 >= 0)) throw DomainError("M3 must be nonnegative");
  if (!(q >= 1)) throw DomainError("q must be at least 1");
}

double poly_bound(const PolyBoundParams& p, double t) {
  p.check_valid();
  if (!(p.m2 > 0)) throw DomainError("the closed-form envelope requires M2 > 0");
  if (!(p.m3 > 0)) throw DomainError("the closed-form envelope requires M3 > 0");
  if (t < 0) throw DomainError("t must be nonnegative");
  const double head = std::pow(p.y0 + 2.0 * std::pow(p.m2, p.q) * p.m3, -1.0 / p.q);
  const double slope = std::pow(p.m3, -1.0 / p.q) / (2.0 * p.m2);
  return std::pow(p.q, p.q) * std::pow(head + slope * t, -p.q);
}

OdeTrace ode_oracle(const PolyBoundParams& p, double t_end, double dt) {
  p.check_valid();
  if (!(t_end >= 0)) throw DomainError("t_end must be nonnegative");
  const double dt_max = 1e-3 * std::max(1.0, 1.0 / p.m2);
  if (!(dt > 0) || dt > dt_max * (1.0 + 1e-12))
    throw DomainError("ode_oracle requires dt <= 1e-3 * max(1, 1/M2)");

  const auto rhs = [&p](double t, double y) {
    return -p.m2 * std::pow(std::max(y, 0.0), 1.0 + 1.0 / p.q) +
           p.m3 * std::pow(1.0 + t, -p.q - 1.0);
  };

  for (int halving = 0; halving <= 3; ++halving) {
    const double step = dt / (1 << halving);
    const long n = std::max<long>(1, std::llround(t_end / step));
    OdeTrace trace;
    trace.t.reserve(n + 1);
    trace.y.reserve(n + 1);
    trace.t.push_back(0.0);
    trace.y.push_back(p.y0);
    double y = p.y0;
    bool ok = true;
    for (long i = 0; i < n; ++i) {
      const double t = i * step;
      const double k1 = rhs(t, y);
      const double k2 = rhs(t + 0.5 * step, y + 0.5 * step * k1);
      const double k3 = rhs(t + 0.5 * step, y + 0.5 * step * k2);
      const double k4 = rhs(t + step, y + step * k3);
      y += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (y < 0) y = 0.0;  // the true solution stays nonnegative
      if (!std::isfinite(y)) {
        ok = false;
        break;
      }
      trace.t.push_back(t + step);
      trace.y.push_back(y);
    }
    if (ok) return trace;
  }
  throw NumericalError("ode_oracle: step rejected after 3 halvings");
}

LemmaReport verify_lemma_bound(const PolyBoundParams& p, double t_end,
                               double dt, double rel_slack) {
  const OdeTrace trace = ode_oracle(p, t_end, dt);
  LemmaReport rep;
  rep.pass = true;
  rep.worst_margin = std::numeric_limits<double>::infinity();

  // M3 = 0 has no forcing; the envelope's slope constant M3^{-1/q} blows up,
  // so compare against the forcing-free closed form q^q (y0^{-1/q} + M2 t/q)^{-q}
  // (the separable-ODE solution inflated by the q^q head factor).
  rep.degenerate_forcing = !(p.m3 > 0);
  const auto bound = [&](double t) {
    if (!rep.degenerate_forcing) return poly_bound(p, t);
    if (p.y0 == 0) return 0.0;
    const double head = std::pow(p.y0, -1.0 / p.q);
    return std::pow(p.q, p.q) * std::pow(head + p.m2 * t / p.q, -p.q);
  };

  for (size_t i = 0; i < trace.t.size(); ++i) {
    const double b = bound(trace.t[i]);
    const double margin = (b - trace.y[i]) / std::max(b, 1e-300);
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_t = trace.t[i];
    }
    if (trace.y[i] > b * (1.0 + rel_slack)) rep.pass = false;
  }
  return rep;
}

PmResult pm_for(double p) {
  if (!(p > 2)) throw DomainError("p must exceed 2");
  PmResult r;
  // Largest positive m with p_m = 2^m - 1 < p - 1, i.e. 2^m < p.
  int m = 1;
  while (std::pow(2.0, m + 1) < p) ++m;
  r.m = m;
  r.p_m = std::pow(2.0, m) - 1.0;
  return r;
}

double exp_bound(double l0, double a3, double b3, double t) {
  return l0 * a3 * std::exp(-b3 * t);
}

double linear_comparison_ode(double z0, double kappa, double b, double t) {
  // z' = exp(-kappa t) - b z  =>  z = z0 e^{-bt} + (e^{-bt} - e^{-kappa t})/(kappa - b)
  if (std::abs(kappa - b) < 1e-12 * std::max(std::abs(kappa), std::abs(b)))
    return (z0 + t) * std::exp(-b * t);
  return z0 * std::exp(-b * t) +
         (std::exp(-b * t) - std::exp(-kappa * t)) / (kappa - b);
}

ExpVerifyReport verify_exp(std::span<const double> t,
                           std::span<const double> value, double kappa4_tilde,
                           double rel_slack, double window_lo,
                           double window_hi) {
  if (t.size() != value.size() || t.empty())
    throw DomainError("verify_exp needs matching nonempty spans");
  ExpVerifyReport rep;
  double peak = 0;
  for (double v : value) peak = std::max(peak, std::abs(v));
  if (peak == 0) {  // a vanishing trace is dominated by any envelope
    rep.pass = true;
    rep.max_ratio = 0;
    return rep;
  }
  const DecayFit fit =
      fit_decay(t, value, DecayModel::exponential, window_lo, window_hi);
  rep.b2 = fit.rate;
  rep.b3 = fit.rate;
  rep.r_squared = fit.r_squared;
  const double z0 = value[0];
  rep.a3 = z0 > 0 ? std::exp(fit.intercept) / z0 : 1.0;
  if (!(rep.b2 > 0)) {
    rep.pass = false;
    return rep;
  }
  rep.pass = true;
  for (size_t i = 0; i < t.size(); ++i) {
    const double z = linear_comparison_ode(z0, kappa4_tilde, rep.b2, t[i]);
    const double ratio = value[i] / std::max(z, 1e-300);
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    if (ratio > 1.0 + rel_slack) rep.pass = false;
  }
  return rep;
}

DecayFit fit_decay(std::span<const double> t, std::span<const double> y,
                   DecayModel model, double window_lo, double window_hi) {
  if (t.size() != y.size() || t.empty())
    throw DomainError("fit_decay needs matching nonempty spans");
  const double t_max = t.back();
  if (window_lo < 0) window_lo = 0.5 * t_max;
  if (window_hi < 0) window_hi = t_max;
  if (window_lo > window_hi) throw DomainError("empty fit window");

  DecayFit fit;
  fit.model = model;
  fit.t_lo = window_lo;
  fit.t_hi = window_hi;

  std::vector<double> xs, ys;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window_lo || t[i] > window_hi) continue;
    if (!(y[i] > 0)) {
      ++fit.n_trimmed;
      continue;
    }
    xs.push_back(model == DecayModel::power ? std::log1p(t[i]) : t[i]);
    ys.push_back(std::log(y[i]));
  }
  if (xs.size() < 2) throw DomainError("fit window holds fewer than 2 positive samples");
  fit.n_used = static_cast<int>(xs.size());

  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0)) throw DomainError("degenerate fit window");
  const double slope = sxy / sxx;
  fit.intercept = my - slope * mx;
  fit.exponent = slope;
  fit.rate = -slope;

  double ss_res = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  return fit;
}

}  // namespace vid
