#include "orim/report.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "orim/errors.hpp"

namespace orim {
namespace {

std::string g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

}  // namespace

void to_json(nlohmann::json& j, const LinearFit& x) {
  j = {{"slope", x.slope},
       {"intercept", x.intercept},
       {"r2", x.r2},
       {"points", x.points}};
}

void to_json(nlohmann::json& j, const PressurePoint& x) {
  j = {{"t", x.t},
       {"value", x.value},
       {"std_error", x.std_error},
       {"lower", x.lower},
       {"upper", x.upper},
       {"orbits", x.orbits},
       {"depth", x.depth},
       {"estimator", x.estimator}};
}

void to_json(nlohmann::json& j, const PressureCurve& x) {
  j = {{"points", x.points}};
}

void to_json(nlohmann::json& j, const EscapeReport& x) {
  j = {{"slope", x.slope},
       {"slope_r2", x.slope_r2},
       {"pressure_difference", x.pressure_difference},
       {"pressure_difference_error", x.pressure_difference_error},
       {"masses", x.masses},
       {"fit_from", x.fit_from},
       {"depth", x.depth},
       {"agree", x.agree},
       {"tolerance", x.tolerance}};
}

void to_json(nlohmann::json& j, const BisectionStep& x) {
  j = {{"t", x.t}, {"ep", x.ep}, {"std_error", x.std_error}, {"orbits", x.orbits}};
}

void to_json(nlohmann::json& j, const DimensionReport& x) {
  j = {{"h", x.h},
       {"bracket_lo", x.bracket_lo},
       {"bracket_hi", x.bracket_hi},
       {"boundary_low", x.boundary_low},
       {"boundary_high", x.boundary_high},
       {"method", x.method},
       {"steps", x.steps}};
}

void to_json(nlohmann::json& j, const DecaySeries& x) {
  j = {{"id", x.id},
       {"c", x.c},
       {"kappa", x.kappa},
       {"r2", x.r2},
       {"log_intercept", x.log_intercept},
       {"fitted", x.fitted},
       {"exact", x.exact},
       {"correlation", x.correlation}};
}

void to_json(nlohmann::json& j, const DecayReport& x) {
  j = {{"series", x.series},
       {"burn_in", x.burn_in},
       {"floor", x.floor},
       {"depth", x.depth}};
}

void to_json(nlohmann::json& j, const ConditionalInvarianceRow& x) {
  j = {{"id", x.id},
       {"conditioned_mass", x.conditioned_mass},
       {"residual", x.residual},
       {"eta_limit", x.eta_limit},
       {"monotone_after_burn_in", x.monotone_after_burn_in}};
}

void to_json(nlohmann::json& j, const LyConstants& x) {
  j = {{"depth", x.depth},
       {"zeta", x.zeta},
       {"g_sup", x.g_sup},
       {"g_inf_full", x.g_inf_full},
       {"closed_sup", x.closed_sup},
       {"delta_lower", x.delta_lower},
       {"rho_lo", x.rho_lo},
       {"rho_hi", x.rho_hi},
       {"a", x.a},
       {"b", x.b},
       {"q", x.q},
       {"k", x.k}};
}

void to_json(nlohmann::json& j, const ConditionReport& x) {
  j = {{"full_branch_outside_hole", x.full_branch_outside_hole},
       {"zeta1", x.zeta1},
       {"hole_components", x.hole_components},
       {"mean_log_zeta_plus_2", x.mean_log_zeta_plus_2},
       {"birkhoff_osc", x.birkhoff_osc},
       {"mean_log_f", x.mean_log_f},
       {"q1_margin", x.q1_margin},
       {"q1_pass", x.q1_pass},
       {"n1", x.n1},
       {"n2", x.n2},
       {"margins_tried", x.margins_tried},
       {"covering", x.covering},
       {"distortion", x.distortion},
       {"monte_carlo_words", x.monte_carlo_words}};
}

void to_json(nlohmann::json& j, const LambdaEstimate& x) {
  j = {{"value", x.value}, {"error", x.error}, {"iterations", x.iterations}};
}

void to_json(nlohmann::json& j, const MeasureValue& x) {
  j = {{"id", x.id}, {"value", x.value}, {"error", x.error}};
}

void to_json(nlohmann::json& j, const MeasureEstimate& x) {
  std::string kind;
  switch (x.kind) {
    case MeasureKind::nu_open: kind = "nu_open"; break;
    case MeasureKind::nu_closed: kind = "nu_closed"; break;
    case MeasureKind::mu: kind = "mu"; break;
    case MeasureKind::eta: kind = "eta"; break;
  }
  j = {{"kind", kind}, {"values", x.values}};
}

void to_json(nlohmann::json& j, const DensityEstimate& x) {
  j = {{"values", x.q.values()},
       {"residual", x.residual},
       {"lambda_check_error", x.lambda_check_error},
       {"mask_cells", x.d_mask.count},
       {"d_stabilized", x.d_stabilized},
       {"depth", x.depth},
       {"min_on_mask", x.min_on_mask}};
}

void to_json(nlohmann::json& j, const RaccimEstimate& x) {
  j = {{"eta", x.eta},
       {"alpha", x.alpha},
       {"alpha_error", x.alpha_error},
       {"defining_residual", x.defining_residual},
       {"exact_reference", x.exact_reference}};
}

nlohmann::json envelope(const RunConfig& cfg, double wall_seconds,
                        nlohmann::json result) {
  return {{"version", kVersion},
          {"config_hash", config_hash(cfg.raw)},
          {"seed", cfg.seed},
          {"wall_time", wall_seconds},
          {"result", std::move(result)}};
}

std::string pressure_csv(const PressureCurve& curve) {
  std::ostringstream out;
  out << "t,value,std_error,lower,upper,orbits,depth,estimator\n";
  for (const PressurePoint& p : curve.points) {
    out << g17(p.t) << ',' << g17(p.value) << ',' << g17(p.std_error) << ','
        << g17(p.lower) << ',' << g17(p.upper) << ',' << p.orbits << ','
        << p.depth << ',' << p.estimator << '\n';
  }
  return out.str();
}

std::string decay_csv(const DecayReport& report) {
  std::ostringstream out;
  out << "id,n,c,correlation\n";
  for (const DecaySeries& s : report.series) {
    for (std::size_t n = 0; n < s.c.size(); ++n) {
      out << s.id << ',' << n << ',' << g17(s.c[n]) << ','
          << (n < s.correlation.size() ? g17(s.correlation[n]) : "") << '\n';
    }
  }
  return out.str();
}

std::string density_csv(const GridPtr& grid, const DensityEstimate& density) {
  std::ostringstream out;
  out << "cell,lo,hi,q,on_mask\n";
  for (std::size_t i = 0; i < grid->cells(); ++i) {
    out << i << ',' << g17(grid->left(i)) << ',' << g17(grid->right(i)) << ','
        << g17(density.q[i]) << ',' << int(density.d_mask.on[i]) << '\n';
  }
  return out.str();
}

std::string survivors_csv(const std::vector<double>& masses,
                          const std::vector<std::size_t>& components) {
  std::ostringstream out;
  out << "depth,mass,components\n";
  for (std::size_t n = 0; n < masses.size(); ++n) {
    out << n << ',' << g17(masses[n]) << ','
        << (n < components.size() ? std::to_string(components[n]) : "") << '\n';
  }
  return out.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

}  // namespace orim
