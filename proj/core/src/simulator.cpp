#include "kaplan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kaplan/error.hpp"

namespace kaplan {

using nlohmann::json;

void EvolutionConfig::validate() const {
  if (!(dt_safety > 0.0 && dt_safety < 1.0)) throw Error(ErrorCode::BadParameter, "dt_safety must lie in (0,1)");
  if (!(max_time > 0.0) || !std::isfinite(max_time)) throw Error(ErrorCode::BadParameter, "max_time must be positive");
  if (!(blowup_norm_threshold > 0.0)) throw Error(ErrorCode::BadParameter, "blowup_norm_threshold must be positive");
  if (!(dt_floor > 0.0)) throw Error(ErrorCode::BadParameter, "dt_floor must be positive");
  if (record_stride < 1) throw Error(ErrorCode::BadParameter, "record_stride must be >= 1");
  if (fixed_dt && !(*fixed_dt > 0.0)) throw Error(ErrorCode::BadParameter, "fixed_dt must be positive");
  double prev = 0.0;
  for (double t : sample_times) {
    if (!(t > prev)) throw Error(ErrorCode::BadParameter, "sample_times must be positive and strictly increasing");
    prev = t;
  }
}

EvolutionConfig EvolutionConfig::from_json(const json& j) {
  EvolutionConfig c;
  c.dt_safety = j.value("dt_safety", c.dt_safety);
  c.max_time = j.value("max_time", c.max_time);
  c.blowup_norm_threshold = j.value("blowup_norm_threshold", c.blowup_norm_threshold);
  c.dt_floor = j.value("dt_floor", c.dt_floor);
  c.record_stride = j.value("record_stride", c.record_stride);
  if (j.contains("fixed_dt") && !j["fixed_dt"].is_null()) c.fixed_dt = j["fixed_dt"].get<double>();
  if (j.contains("sample_times")) c.sample_times = j["sample_times"].get<std::vector<double>>();
  c.validate();
  return c;
}

json EvolutionConfig::to_json() const {
  json j = {{"dt_safety", dt_safety},
            {"max_time", max_time},
            {"blowup_norm_threshold", blowup_norm_threshold},
            {"dt_floor", dt_floor},
            {"record_stride", record_stride}};
  j["fixed_dt"] = fixed_dt ? json(*fixed_dt) : json(nullptr);
  if (!sample_times.empty()) j["sample_times"] = sample_times;
  return j;
}

std::string_view to_string(RunVerdict v) {
  switch (v) {
    case RunVerdict::Blowup: return "blowup";
    case RunVerdict::Bounded: return "bounded";
    case RunVerdict::Horizon: return "horizon";
  }
  return "?";
}

json Trajectory::summary_json() const {
  json j;
  j["verdict"] = std::string(to_string(detection.verdict));
  if (detection.t_star) {
    j["t_star_interval"] = {detection.t_star->last_finite, detection.t_star->extrapolated};
  } else {
    j["t_star_interval"] = nullptr;
  }
  j["step_collapse"] = detection.step_collapse;
  j["within_bound"] = detection.within_bound ? json(*detection.within_bound) : json(nullptr);
  j["steps"] = steps;
  j["records"] = times.size();
  j["final_time"] = times.empty() ? 0.0 : times.back();
  j["final_sup_norm"] = sup_norm.empty() ? 0.0 : sup_norm.back();
  j["lambda"] = lambda;
  if (!kaplan.empty()) {
    j["kaplan_initial"] = kaplan.front();
    j["kaplan_final"] = kaplan.back();
  }
  if (!residual.empty()) j["residual_min"] = *std::min_element(residual.begin(), residual.end());
  if (!flux_bound.empty()) j["flux_bound_max"] = *std::max_element(flux_bound.begin(), flux_bound.end());
  if (!jensen_gap.empty()) j["jensen_gap_min"] = *std::min_element(jensen_gap.begin(), jensen_gap.end());
  return j;
}

double kaplan_functional(const WeightedGraph& g, const Barrier& bar, std::span<const double> u) {
  double phi = 0.0;
  for (Vertex x = 0; x < g.size(); ++x) phi += bar.phi[x] * u[x] * g.mu(x);
  return phi;
}

std::vector<double> kaplan_series(const WeightedGraph& g, const Barrier& bar, const std::vector<VertexFunction>& states) {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(kaplan_functional(g, bar, s));
  return out;
}

double jensen_gap(const WeightedGraph& g, const Barrier& bar, std::span<const double> u, const Nonlinearity& f) {
  double lhs = 0.0;
  for (Vertex x = 0; x < g.size(); ++x) lhs += bar.phi[x] * f(u[x]) * g.mu(x);
  return lhs - f(kaplan_functional(g, bar, u));
}

std::vector<double> inequality_residual(std::span<const double> times, std::span<const double> kaplan, double lambda,
                                        const Nonlinearity& f, DifferenceScheme scheme) {
  if (times.size() != kaplan.size()) throw Error(ErrorCode::BadParameter, "times and series differ in length");
  if (times.size() < 3) throw Error(ErrorCode::TooFewSamples, "the residual needs at least 3 records");
  std::vector<double> out;
  const std::size_t n = times.size();
  if (scheme == DifferenceScheme::Forward) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double d = (kaplan[i + 1] - kaplan[i]) / (times[i + 1] - times[i]);
      out.push_back(d + lambda * kaplan[i] - f(kaplan[i]));
    }
    return out;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h1 = times[i] - times[i - 1];
    const double h2 = times[i + 1] - times[i];
    const double d = -h2 / (h1 * (h1 + h2)) * kaplan[i - 1] + (h2 - h1) / (h1 * h2) * kaplan[i] +
                     h1 / (h2 * (h1 + h2)) * kaplan[i + 1];
    out.push_back(d + lambda * kaplan[i] - f(kaplan[i]));
  }
  return out;
}

BlowupDetection detect_blowup(const Trajectory& traj, double threshold, std::optional<double> bound) {
  BlowupDetection det;
  if (traj.sup_norm.empty()) return det;
  const double first = traj.sup_norm.front();
  const double last = traj.sup_norm.back();
  const bool crossed = traj.threshold_crossed || last > threshold;
  const bool collapse = traj.dt_collapsed && last > first;
  if (crossed || collapse) {
    det.verdict = RunVerdict::Blowup;
    det.step_collapse = collapse && !crossed;
    BlowupInterval iv;
    iv.last_finite = traj.times.back();
    iv.extrapolated = iv.last_finite;
    const auto& d = traj.doubling_times;
    if (d.size() >= 3) {
      const double t1 = d[d.size() - 3], t2 = d[d.size() - 2], t3 = d.back();
      const double g1 = t2 - t1, g2 = t3 - t2;
      if (g1 > g2 && g2 >= 0.0) iv.extrapolated = std::max(iv.last_finite, t3 + g2 * g2 / (g1 - g2));
    }
    det.t_star = iv;
    if (bound) det.within_bound = iv.last_finite <= *bound;
    return det;
  }
  det.verdict = last <= first ? RunVerdict::Bounded : RunVerdict::Horizon;
  return det;
}

Trajectory evolve(const WeightedGraph& g, std::span<const double> u0, const Nonlinearity& f, const EvolutionConfig& cfg,
                  const Barrier* bar, std::optional<double> lambda) {
  cfg.validate();
  if (u0.size() != g.size()) throw Error(ErrorCode::BadParameter, "datum and graph disagree on vertex count");
  if (bar && bar->phi.size() != g.size()) throw Error(ErrorCode::BadParameter, "barrier and graph disagree on vertex count");
  const std::size_t n = g.size();
  VertexFunction u(n, 0.0);
  for (Vertex x = 0; x < n; ++x) {
    if (!(u0[x] >= 0.0) || !std::isfinite(u0[x])) {
      throw Error(ErrorCode::NegativeDatum, "u0(" + std::to_string(x) + ") is not a finite nonnegative value");
    }
    if (g.is_interior(x)) u[x] = u0[x];
  }

  double max_deg = 0.0;
  for (Vertex x = 0; x < n; ++x) {
    if (g.is_interior(x)) max_deg = std::max(max_deg, g.weighted_degree(x));
  }
  if (cfg.fixed_dt && *cfg.fixed_dt * max_deg >= 1.0) {
    throw Error(ErrorCode::BadParameter, "fixed_dt violates dt * max Deg < 1");
  }

  Trajectory traj;
  traj.lambda = bar ? lambda.value_or(bar->lambda) : lambda.value_or(0.0);
  const double bmass = bar ? boundary_adjacent_mass(g, *bar) : 0.0;

  auto sup_of = [&](const VertexFunction& v) { return *std::max_element(v.begin(), v.end()); };
  double umax = sup_of(u);
  double phi_now = bar ? kaplan_functional(g, *bar, u) : 0.0;
  double t = 0.0;

  auto record = [&] {
    traj.times.push_back(t);
    traj.sup_norm.push_back(umax);
    traj.dt.push_back(0.0);
    if (bar) {
      traj.kaplan.push_back(phi_now);
      traj.flux_bound.push_back(bmass * umax * max_deg);
      traj.jensen_gap.push_back(jensen_gap(g, *bar, u, f));
    }
  };
  record();
  bool pending_residual = bar != nullptr;

  double next_level = umax > 0.0 ? 2.0 * umax : std::numeric_limits<double>::infinity();
  std::size_t sample_idx = 0;
  const bool sampled = !cfg.sample_times.empty();
  VertexFunction next(n, 0.0);

  while (true) {
    if (umax > cfg.blowup_norm_threshold) {
      traj.threshold_crossed = true;
      break;
    }
    const double target = sampled ? (sample_idx < cfg.sample_times.size() ? cfg.sample_times[sample_idx] : -1.0)
                                  : cfg.max_time;
    if (target < 0.0 || t >= cfg.max_time) break;
    double dt;
    if (cfg.fixed_dt) {
      dt = *cfg.fixed_dt;
    } else {
      const double ratio = umax > 0.0 ? std::max(0.0, f.ratio(umax)) : 0.0;
      dt = cfg.dt_safety / (max_deg + ratio);
      if (dt < cfg.dt_floor) {
        traj.dt_collapsed = true;
        break;
      }
    }
    const double stop = std::min(target, cfg.max_time);
    bool lands = false;
    if (t + dt >= stop - 1e-14 * std::max(1.0, stop)) {
      dt = stop - t;
      lands = true;
    }

    for (Vertex x = 0; x < n; ++x) {
      if (g.is_boundary(x)) {
        next[x] = 0.0;
        continue;
      }
      double inflow = 0.0;
      for (const auto& [y, w] : g.neighbors(x)) inflow += w * u[y];
      const double mu = g.mu(x);
      const double v = u[x] * (1.0 - dt * g.degree(x) / mu) + dt * (inflow / mu + f(u[x]));
      if (std::isnan(v)) throw Error(ErrorCode::NaNDetected, "NaN at vertex " + std::to_string(x));
      if (v < 0.0) throw Error(ErrorCode::InvariantViolated, "negative value at vertex " + std::to_string(x));
      next[x] = v;
    }
    const double prev_max = umax;
    u.swap(next);
    umax = sup_of(u);
    if (!std::isfinite(umax)) {
      umax = std::numeric_limits<double>::infinity();
    }
    while (umax >= next_level) {
      const double frac = std::isfinite(umax) && umax > prev_max
                              ? (std::log(next_level) - std::log(prev_max)) / (std::log(umax) - std::log(prev_max))
                              : 1.0;
      traj.doubling_times.push_back(t + std::clamp(frac, 0.0, 1.0) * dt);
      next_level *= 2.0;
      if (!std::isfinite(next_level)) break;
    }
    const double phi_prev = phi_now;
    if (bar) phi_now = kaplan_functional(g, *bar, u);
    if (pending_residual) {
      traj.residual.push_back((phi_now - phi_prev) / dt + traj.lambda * phi_prev - f(phi_prev));
      pending_residual = false;
    }
    if (traj.steps == 0) traj.first_dt = dt;
    traj.dt.back() = traj.dt.back() == 0.0 ? dt : traj.dt.back();
    t = lands ? stop : t + dt;
    ++traj.steps;

    const bool at_sample = sampled && lands && sample_idx < cfg.sample_times.size() && stop == cfg.sample_times[sample_idx];
    if (at_sample) ++sample_idx;
    const bool stride_hit = !sampled && traj.steps % static_cast<std::size_t>(cfg.record_stride) == 0;
    if (at_sample || stride_hit || (lands && t >= cfg.max_time)) {
      record();
      pending_residual = bar != nullptr;
    }
  }
  if (traj.times.back() != t) {
    record();
  }
  traj.final_state = u;
  traj.detection = detect_blowup(traj, cfg.blowup_norm_threshold);
  return traj;
}

}  // namespace kaplan
