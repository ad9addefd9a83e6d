#pragma once

// ModelSpec from the human-editable config format, plus JSON serialization of
// the report types for the CLI.
//
// [model]
// dimension = 2
// power = 16
// seed = 42
// [[model.generator]]
// weight = 0.5
// [[model.generator.map]]
// type = "rotation"
// plane = [0, 1]          # axis pair; alternatively matrix = [[...], ...]
// angle = 1.0
// [[model.generator.map]]
// type = "twist"
// pair = [0, 1]
// amplitude = 1.2
// coefficients = [1.0]    # one entry per profile term
// exponents = [[0, 0, 1]] # matching exponent vectors

#include <nlohmann/json.hpp>

#include "ergolab/certify.hpp"
#include "ergolab/config.hpp"
#include "ergolab/geometry.hpp"
#include "ergolab/kakeya.hpp"
#include "ergolab/sobolev.hpp"
#include "ergolab/stable.hpp"
#include "ergolab/stats.hpp"

namespace ergolab {

using json = nlohmann::json;

inline PrimitiveMap primitive_from_config(ConfigTable& t, int ambient_dim) {
  std::string type = t.str("type");
  if (type == "rotation") {
    if (t.has("matrix")) {
      ConfigValue* rows = t.find("matrix");
      t.consumed["matrix"] = true;
      const ConfigArray& arr = std::get<ConfigArray>(rows->v);
      Matrix m(ambient_dim, ambient_dim);
      if (static_cast<int>(arr.size()) != ambient_dim)
        throw InvalidConfig("rotation matrix must have d+1 rows");
      for (int i = 0; i < ambient_dim; ++i) {
        const ConfigArray& row = std::get<ConfigArray>(arr[i].v);
        if (static_cast<int>(row.size()) != ambient_dim)
          throw InvalidConfig("rotation matrix must be square");
        for (int j = 0; j < ambient_dim; ++j) m(i, j) = row[j].as_number("matrix");
      }
      return Rotation{std::move(m)};
    }
    std::vector<double> plane = t.number_list("plane");
    if (plane.size() != 2) throw InvalidConfig("rotation plane must be an index pair");
    double angle = t.number("angle");
    return plane_rotation(ambient_dim, static_cast<int>(plane[0]),
                          static_cast<int>(plane[1]), angle);
  }
  if (type == "twist") {
    std::vector<double> pair = t.number_list("pair");
    if (pair.size() != 2) throw InvalidConfig("twist pair must have two indices");
    double amplitude = t.number("amplitude");
    std::vector<double> coefs = t.number_list("coefficients");
    ConfigValue* expv = t.find("exponents");
    if (!expv) throw InvalidConfig("twist requires 'exponents'");
    t.consumed["exponents"] = true;
    const ConfigArray& earr = std::get<ConfigArray>(expv->v);
    if (earr.size() != coefs.size())
      throw InvalidConfig("coefficients and exponents must have matching lengths");
    Polynomial profile;
    for (std::size_t i = 0; i < coefs.size(); ++i) {
      const ConfigArray& row = std::get<ConfigArray>(earr[i].v);
      Polynomial::Term term;
      term.coef = coefs[i];
      for (const ConfigValue& e : row)
        term.expo.push_back(static_cast<int>(e.as_number("exponents")));
      if (static_cast<int>(term.expo.size()) != ambient_dim)
        throw InvalidConfig("exponent vectors must have d+1 entries");
      profile.terms.push_back(std::move(term));
    }
    return Twist{static_cast<int>(pair[0]), static_cast<int>(pair[1]), amplitude,
                 std::move(profile)};
  }
  throw InvalidConfig("unknown primitive map type '" + type + "'");
}

inline ModelSpec model_spec_from_config(ConfigTable& model) {
  ModelSpec spec;
  spec.dimension = static_cast<int>(model.integer("dimension"));
  spec.power = static_cast<int>(model.integer_or("power", 1));
  spec.seed = static_cast<std::uint64_t>(model.integer_or("seed", 0));
  for (ConfigTable& g : model.table_array("generator")) {
    Generator gen;
    gen.weight = g.number("weight");
    for (ConfigTable& m : g.table_array("map"))
      gen.maps.push_back(primitive_from_config(m, spec.dimension + 1));
    spec.generators.push_back(std::move(gen));
  }
  return spec;
}

// ---------------------------------------------------------------------------
// JSON echoes (manifest) and report serialization

inline json to_json(const ModelSpec& spec) {
  json gens = json::array();
  for (const Generator& g : spec.generators) {
    json maps = json::array();
    for (const PrimitiveMap& m : g.maps) {
      if (const auto* rot = std::get_if<Rotation>(&m)) {
        json rows = json::array();
        for (int i = 0; i < rot->mat.rows(); ++i) {
          json row = json::array();
          for (int j = 0; j < rot->mat.cols(); ++j) row.push_back(rot->mat(i, j));
          rows.push_back(row);
        }
        maps.push_back({{"type", "rotation"}, {"matrix", rows}});
      } else {
        const Twist& tw = std::get<Twist>(m);
        json coefs = json::array(), expos = json::array();
        for (const Polynomial::Term& t : tw.profile.terms) {
          coefs.push_back(t.coef);
          expos.push_back(t.expo);
        }
        maps.push_back({{"type", "twist"},
                        {"pair", {tw.i, tw.j}},
                        {"amplitude", tw.amplitude},
                        {"coefficients", coefs},
                        {"exponents", expos}});
      }
    }
    gens.push_back({{"weight", g.weight}, {"maps", maps}});
  }
  return {{"dimension", spec.dimension},
          {"power", spec.power},
          {"seed", spec.seed},
          {"generators", gens}};
}

inline json to_json(const LyapunovReport& r) {
  return {{"exponents", r.exponents},
          {"n_steps", r.n_steps},
          {"residual_sum", r.residual_sum}};
}

inline json to_json(const GapCertificate& c) {
  return {{"N", c.N},
          {"form", to_string(c.form)},
          {"est_min_gap", c.est_min_gap},
          {"ci_halfwidth", c.ci_halfwidth},
          {"certified_positive", c.certified_positive()},
          {"argmin_point", c.argmin_point.x},
          {"argmin_normal", c.argmin_normal},
          {"n_base_samples", c.n_base_samples},
          {"n_word_samples", c.n_word_samples},
          {"max_form_defect", c.max_form_defect}};
}

inline json to_json(const CoexpEstimate& c) {
  return {{"N", c.N},
          {"est_min", c.est_min},
          {"ci_halfwidth", c.ci_halfwidth},
          {"certified_positive", c.certified_positive()},
          {"argmin_point", c.argmin_point.x},
          {"argmin_xi", c.argmin_xi},
          {"n_base_samples", c.n_base_samples},
          {"n_word_samples", c.n_word_samples}};
}

inline json to_json(const MomentDecayReport& r) {
  return {{"sigma", r.sigma},       {"n_list", r.n_list},
          {"moment_values", r.moment_values}, {"fitted_rate", r.fitted_rate},
          {"fit_r2", r.fit_r2},     {"kappa1", r.kappa1},
          {"c1", r.c1}};
}

inline json to_json(const StableDirectionResult& r) {
  return {{"e_ss", r.e_ss},
          {"method", to_string(r.method)},
          {"horizon", r.horizon},
          {"convergence_angle", r.convergence_angle},
          {"graph_norm_history", r.graph_norm_history}};
}

inline json to_json(const SplittingReport& r) {
  return {{"kappa", r.kappa},
          {"kappa_prime", r.kappa_prime},
          {"eps", r.eps},
          {"c_norm", r.c_norm},
          {"c_angle", r.c_angle},
          {"c_contract", r.c_contract},
          {"n_max", r.n_max},
          {"direction_horizon", r.direction_horizon}};
}

inline json to_json(const SplittingTailReport& r) {
  return {{"c_values", r.c_values}, {"n_failed", r.n_failed},
          {"thresholds", r.thresholds}, {"log_tail", r.log_tail},
          {"slope", r.slope},       {"r2", r.r2},
          {"fit_ok", r.fit_ok}};
}

inline json to_json(const AngleTailReport& r) {
  return {{"rho_list", r.rho_list}, {"tail_probs", r.tail_probs},
          {"alpha_fit", r.alpha_fit}, {"c_prime_fit", r.c_prime_fit},
          {"r2", r.r2},             {"degenerate", r.degenerate},
          {"horizon", r.horizon},   {"n_failed", r.n_failed}};
}

inline json to_json(const FrameDetReport& r) {
  return {{"theta1", r.theta1},
          {"theta1_lo", r.theta1_lo},
          {"theta1_hi", r.theta1_hi},
          {"horizon", r.horizon},
          {"n_failed", r.n_failed},
          {"n_samples", r.dets.size()}};
}

inline json to_json(const CurveTrace& t) {
  json pts = json::array();
  for (const SpherePoint& p : t.points) pts.push_back(p.x);
  return {{"points", pts},
          {"base_index", t.base_index},
          {"h_arc", t.h_arc},
          {"goodness_constant", t.goodness_constant},
          {"crossing_ratio", t.crossing_ratio}};
}

inline json to_json(const MixingReport& r) {
  return {{"n_list", r.n_list},   {"correlations", r.correlations},
          {"fitted_theta", r.fitted_theta}, {"r2", r.r2},
          {"c_fit", r.c_fit},     {"non_mixing", r.non_mixing}};
}

inline json to_json(const CltReport& r) {
  return {{"sigma2_formula", r.sigma2_formula},
          {"sigma2_empirical", r.sigma2_empirical},
          {"ks_distance", r.ks_distance},
          {"n_steps", r.n_steps},
          {"trials", r.trials},
          {"truncation_n_star", r.truncation_n_star},
          {"series_terms", r.series_terms}};
}

inline json to_json(const GapProxyReport& r) {
  return {{"max_l", r.max_l},
          {"matrix_dim", r.matrix_dim},
          {"second_singular_value", r.second_singular_value},
          {"gap", r.gap},
          {"constant_residual", r.constant_residual}};
}

inline json to_json(const KakeyaScan& s) {
  return {{"delta", s.delta},   {"p", s.p},
          {"rho_list", s.rho_list}, {"lhs_values", s.lhs_values},
          {"ratios", s.ratios}, {"max_min_ratio", s.max_min_ratio},
          {"newton_fallbacks", s.newton_fallbacks}};
}

inline json to_json(const ConvolutionDefectReport& r) {
  return {{"delta_list", r.delta_list},
          {"defects", r.defects},
          {"ratios", r.ratios},
          {"hs_norm_sq", r.hs_norm_sq}};
}

inline json to_json(const DensityGapEval& e) {
  return {{"kappa_density", e.kappa_density},
          {"delta", e.delta},
          {"p", e.p},
          {"s", e.s},
          {"c_p", e.c_p},
          {"dim", e.dim},
          {"eps_p", e.eps_p},
          {"lhs", e.lhs},
          {"rhs", e.rhs},
          {"holds", e.holds},
          {"vacuous", e.vacuous},
          {"margin_at_delta_s", e.margin_at_delta_s}};
}

// ---------------------------------------------------------------------------
// Kakeya family-spec file (JSON: frame, curve coefficients, weights)

inline std::vector<TubeFamily> tube_families_from_json(const json& j) {
  std::vector<TubeFamily> families;
  for (const json& fj : j.at("families")) {
    TubeFamily fam;
    fam.direction = fj.at("direction").get<Vec>();
    for (const json& cj : fj.at("curves")) {
      PolyCurve c;
      c.dim = static_cast<int>(fam.direction.size());
      const json& coef = cj.at("coefficients");
      for (std::size_t k = 0; k < coef.size() && k < 4; ++k)
        c.coef[k] = coef[k].get<Vec>();
      c.t_min = cj.at("t_min").get<double>();
      c.t_max = cj.at("t_max").get<double>();
      fam.curves.push_back(std::move(c));
    }
    if (fj.contains("weights")) fam.weights = fj.at("weights").get<Vec>();
    families.push_back(std::move(fam));
  }
  return families;
}

inline json tube_families_to_json(const std::vector<TubeFamily>& families) {
  json out = json::array();
  for (const TubeFamily& fam : families) {
    json curves = json::array();
    for (const PolyCurve& c : fam.curves) {
      json coef = json::array();
      for (int k = 0; k < 4; ++k) coef.push_back(c.coef[k].empty() ? Vec(c.dim, 0.0) : c.coef[k]);
      curves.push_back({{"coefficients", coef}, {"t_min", c.t_min}, {"t_max", c.t_max}});
    }
    json fj = {{"direction", fam.direction}, {"curves", curves}};
    if (!fam.weights.empty()) fj["weights"] = fam.weights;
    out.push_back(fj);
  }
  return {{"families", out}};
}

} // namespace ergolab
