#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

#include "smoothscale/bounds.hpp"
#include "smoothscale/discrepancy.hpp"
#include "smoothscale/env.hpp"

namespace smoothscale {

// 17 significant digits: enough to round-trip any double exactly.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline nlohmann::json to_json(const EnvInfo& info) {
  nlohmann::json j{{"kind", kind_name(info.kind)}, {"side", info.side}};
  if (info.param_k >= 0) j["param_k"] = info.param_k;
  if (!std::isnan(info.value)) j["value"] = info.value;
  if (!std::isnan(info.extreme_fraction))
    j["extreme_fraction"] = info.extreme_fraction;
  j["seed"] = info.seed;
  return j;
}

inline nlohmann::json to_json(const DiscrepancyReport& r) {
  return {{"ld1", r.ld1}, {"ld2", r.ld2}, {"gd1", r.gd1},
          {"gd2", r.gd2}, {"lc", r.lc},   {"edges", r.edges}};
}

inline nlohmann::json to_json(const ScaleProfile& p) {
  nlohmann::json scales = nlohmann::json::array();
  for (std::size_t ell = 0; ell < p.ld1.size(); ++ell)
    scales.push_back({{"scale", ell},
                      {"ld1", p.ld1[ell].mean},
                      {"se_ld1", p.ld1[ell].se},
                      {"ld2", p.ld2[ell].mean},
                      {"se_ld2", p.ld2[ell].se},
                      {"gd2", p.gd2[ell].mean},
                      {"se_gd2", p.gd2[ell].se},
                      {"trials", p.ld1[ell].trials}});
  return {{"side_n", p.side_n},
          {"num_scales_k", p.num_scales_k},
          {"seed", p.seed},
          {"scales", scales},
          {"aggregate",
           {{"ld1", p.agg_ld1},
            {"se_ld1", p.agg_se_ld1},
            {"ld2", p.agg_ld2},
            {"se_ld2", p.agg_se_ld2},
            {"gd2", p.agg_gd2},
            {"se_gd2", p.agg_se_gd2}}}};
}

inline std::string profile_csv(const ScaleProfile& p) {
  std::string out = "scale,ld1,ld2,gd2,se_ld1,se_ld2,se_gd2,trials\n";
  for (std::size_t ell = 0; ell < p.ld1.size(); ++ell) {
    out += std::to_string(ell) + ',' + fmt17(p.ld1[ell].mean) + ',' +
           fmt17(p.ld2[ell].mean) + ',' + fmt17(p.gd2[ell].mean) + ',' +
           fmt17(p.ld1[ell].se) + ',' + fmt17(p.ld2[ell].se) + ',' +
           fmt17(p.gd2[ell].se) + ',' + std::to_string(p.ld1[ell].trials) + '\n';
  }
  out += "aggregate," + fmt17(p.agg_ld1) + ',' + fmt17(p.agg_ld2) + ',' +
         fmt17(p.agg_gd2) + ',' + fmt17(p.agg_se_ld1) + ',' +
         fmt17(p.agg_se_ld2) + ',' + fmt17(p.agg_se_gd2) + ",\n";
  return out;
}

inline nlohmann::json to_json(const DecaySolution& s) {
  return {{"alpha", s.alpha},       {"log_n", s.log_n},
          {"p", s.p},               {"bound", s.bound},
          {"asymptotic", s.asymptotic}, {"residual", s.residual}};
}

inline nlohmann::json to_json(const FeasibilityReport& r) {
  return {{"feasible", r.feasible()},
          {"min_value", r.min_value},
          {"sum_margin", r.sum_margin},
          {"min_window_margin", r.min_window_margin},
          {"worst_window", r.worst_window}};
}

inline nlohmann::json to_json(const Lemma3Report& r) {
  nlohmann::json scales = nlohmann::json::array();
  for (const auto& s : r.scales)
    scales.push_back({{"scale", s.scale},
                      {"margin", s.margin},
                      {"se", s.se},
                      {"ok", s.ok}});
  return {{"scales", scales},
          {"min_margin", r.min_margin},
          {"min_sigma", r.min_sigma},
          {"all_ok", r.all_ok}};
}

inline nlohmann::json to_json(const Theorem2Report& r) {
  nlohmann::json scales = nlohmann::json::array();
  for (const auto& s : r.scales)
    scales.push_back({{"scale", s.scale},
                      {"gd2", s.gd2},
                      {"ld2", s.ld2},
                      {"slack", s.slack},
                      {"ok", s.ok}});
  return {{"decay", to_json(r.decay)},
          {"scales", scales},
          {"premise_ok", r.premise_ok},
          {"empirical_alpha", r.empirical_alpha},
          {"sum_ld1", r.sum_ld1},
          {"sum_ld1_se", r.sum_ld1_se},
          {"ld1_avg", r.ld1_avg},
          {"conclusion_ok", r.conclusion_ok},
          {"ok", r.ok}};
}

inline nlohmann::json to_json(const ProbeResult& r) {
  return {{"decay", to_json(r.decay)},
          {"max_objective", r.max_objective},
          {"best_random", r.best_random},
          {"best_climbed", r.best_climbed},
          {"samples", r.samples},
          {"climbs", r.climbs},
          {"within_bound", r.within_bound}};
}

}  // namespace smoothscale
