#include "gglab/json_io.hpp"

#include <stdexcept>

namespace gglab {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  Eigen::Index i = 0;
  for (const auto& x : j) v(i++) = x.get<double>();
  return v;
}

json matrix_to_json_row_major(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
  return out;
}

}  // namespace

nlohmann::json coefficients_to_json(const BeliefCoefficients& cf) {
  json j;
  j["n"] = cf.n;
  j["sigma2"] = cf.sigma2;
  j["tau2"] = cf.tau2;
  j["eta2_n"] = cf.eta2_n;
  j["a_n"] = cf.a_n;
  j["b_n"] = cf.b_n;
  j["eta2_prev"] = cf.eta2_prev;
  j["a_prev"] = cf.a_prev;
  j["b_prev"] = cf.b_prev;
  j["gamma2_n"] = cf.gamma2_n;
  j["c_n"] = cf.c_n;
  j["d_n"] = cf.d_n;
  j["e_n"] = cf.e_n;
  j["w_n"] = cf.w_n;
  j["beta_n"] = cf.beta_n;
  j["diag_n"] = cf.diag_n;
  j["offdiag_n"] = cf.offdiag_n;
  j["V"] = matrix_to_json_row_major(cf.V);
  j["identities"] = {{"a_plus_peers_b", cf.a_n + (cf.n - 1) * cf.b_n},
                     {"c_plus_d", cf.c_n + cf.d_n}};
  return j;
}

nlohmann::json condition_report_to_json(const ConditionReport& rep) {
  json j;
  j["lipschitz_bound_lhs"] = rep.lipschitz_bound_lhs;
  j["contraction_factor"] = rep.contraction_factor;
  j["w_n"] = rep.w_n;
  j["tau"] = rep.tau;
  j["lipschitz_ok"] = rep.lipschitz_ok;
  j["contraction_ok"] = rep.contraction_ok;
  j["banach_ok"] = rep.banach_ok;
  if (rep.n2_reformulated_lhs) j["n2_reformulated_lhs"] = *rep.n2_reformulated_lhs;
  return j;
}

nlohmann::json diagnostics_to_json(const SolveDiagnostics& diag,
                                   bool include_wall_time) {
  json j;
  j["iterations"] = diag.iterations;
  j["sup_deltas"] = diag.sup_deltas;
  j["converged"] = diag.converged;
  j["banach_warning"] = diag.banach_warning;
  j["final_lipschitz_ratio"] = diag.final_lipschitz_ratio;
  j["integration_error_estimate"] = diag.integration_error_estimate;
  j["condition"] = condition_report_to_json(diag.condition);
  if (include_wall_time) j["wall_time_seconds"] = diag.wall_time_seconds;
  return j;
}

nlohmann::json grid_to_json(const GridFunction& g) {
  json j;
  j["lower"] = vector_to_json(g.spec().lower);
  j["upper"] = vector_to_json(g.spec().upper);
  j["points_per_axis"] = g.spec().points;
  j["lipschitz"] = g.lipschitz_bound();
  j["codomain"] = {g.lo(), g.hi()};
  j["values"] = vector_to_json(g.values());
  return j;
}

GridFunction grid_from_json(const nlohmann::json& j) {
  GridSpec spec;
  spec.lower = vector_from_json(j.at("lower"));
  spec.upper = vector_from_json(j.at("upper"));
  spec.points = j.at("points_per_axis").get<std::vector<int>>();
  const auto codomain = j.at("codomain");
  return GridFunction(std::move(spec), vector_from_json(j.at("values")),
                      j.at("lipschitz").get<double>(), codomain.at(0).get<double>(),
                      codomain.at(1).get<double>());
}

nlohmann::json solution_to_json(const GameParams& params,
                                const ThresholdFunction& tf) {
  json j;
  j["params"] = {{"n", params.n}, {"sigma2", params.sigma2}, {"tau2", params.tau2}};
  j["coeffs"] = coefficients_to_json(tf.coeffs);
  j["g"] = grid_to_json(tf.g);
  return j;
}

std::pair<GameParams, ThresholdFunction> solution_from_json(const nlohmann::json& j) {
  GameParams params;
  params.n = j.at("params").at("n").get<int>();
  params.sigma2 = j.at("params").at("sigma2").get<double>();
  params.tau2 = j.at("params").at("tau2").get<double>();
  params.validate();
  GridFunction g = grid_from_json(j.at("g"));
  return {params, ThresholdFunction{std::move(g), compute_coefficients(params)}};
}

nlohmann::json observation_to_json(const ObservationVector& y) {
  json j;
  j["x"] = y.own;
  j["shared"] = vector_to_json(y.shared);
  j["z"] = y.shared_sum;
  return j;
}

nlohmann::json best_response_to_json(const BestResponseReport& rep) {
  json j;
  j["y_i"] = observation_to_json(rep.y_i);
  j["lhs"] = rep.lhs;
  j["rhs"] = rep.rhs;
  j["mc_stderr"] = rep.mc_stderr;
  j["h_value"] = rep.h_value;
  j["prescribed_risky"] = rep.prescribed_risky;
  j["consistent"] = rep.consistent;
  j["peer_risky_prob"] = vector_to_json(rep.peer_risky_prob);
  return j;
}

nlohmann::json verification_to_json(const VerificationSummary& summary) {
  json j;
  j["probes"] = summary.probes;
  j["consistent"] = summary.consistent;
  j["indeterminate"] = summary.indeterminate;
  j["inconsistent"] = summary.inconsistent;
  j["worst_gap"] = summary.worst_gap;
  j["seed"] = summary.seed;
  j["pass"] = summary.pass;
  json reports = json::array();
  for (const auto& rec : summary.reports) {
    json r = best_response_to_json(rec.report);
    r["near_root"] = rec.near_root;
    reports.push_back(std::move(r));
  }
  j["reports"] = std::move(reports);
  return j;
}

nlohmann::json witness_to_json(const WitnessResult& result) {
  json j;
  j["y_i"] = observation_to_json(result.y_i);
  j["report"] = best_response_to_json(result.report);
  j["posterior_mean"] = result.posterior_mean;
  j["peer_mean_target"] = result.peer_mean_target;
  j["chebyshev_bound"] = result.chebyshev_bound;
  j["mc_peer_risky"] = result.mc_peer_risky;
  j["direction"] =
      result.direction == WitnessDirection::PeersSafe ? "peers-safe" : "peers-risky";
  return j;
}

nlohmann::json playout_to_json(const PlayoutResult& result) {
  json j;
  j["theta"] = result.theta;
  j["actions"] = result.actions;
  json payoffs = json::array();
  for (Eigen::Index i = 0; i < result.payoffs.size(); ++i) {
    payoffs.push_back(result.payoffs(i));
  }
  j["payoffs"] = std::move(payoffs);
  json obs = json::array();
  for (const auto& y : result.observations) obs.push_back(observation_to_json(y));
  j["observations"] = std::move(obs);
  return j;
}

}  // namespace gglab
