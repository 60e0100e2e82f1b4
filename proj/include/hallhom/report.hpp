// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HALLHOM_REPORT_HPP
#define HALLHOM_REPORT_HPP

// CSV and JSON writers for effective tensors, sweeps, duality checks and
// the transformed-phase table. Numbers are printed in shortest round-trip
// form, so equal inputs give byte-identical files.

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hallhom/experiments.hpp"
#include "hallhom/mask_io.hpp"

namespace hallhom
{

using Json = nlohmann::ordered_json;

inline std::string csv_number(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

template <int D>
Json matrix_json(const Mat<D> &m)
{
  Json a = Json::array();
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      a.push_back(m(i, j));
  return a;
}

inline Json phase_json(const PerturbedPhase &p)
{
  return Json{{"alpha", p.alpha()}, {"beta", p.beta()}};
}

/// Effective-tensor report; `resolution` is the element count per axis.
template <int D>
Json effective_tensor_json(const EffectiveTensor<D> &t, const std::vector<double> &h,
                           const std::vector<PerturbedPhase> &phases, double wall_time_s)
{
  Json j;
  j["dim"] = D;
  j["resolution"] = Json::array();
  for (int a = 0; a < D; ++a)
    j["resolution"].push_back(t.grid[a]);
  j["h"] = h;
  j["phases"] = Json::array();
  for (const auto &p : phases)
    j["phases"].push_back(phase_json(p));
  j["sigma_star"] = matrix_json(t.matrix);
  j["residuals"] = Json(std::vector<double>(t.residuals.begin(), t.residuals.end()));
  j["iterations"] = Json(std::vector<std::size_t>(t.iterations.begin(), t.iterations.end()));
  j["wall_time_s"] = wall_time_s;
  j["solver"] = to_string(t.method);
  j["coercivity"] = t.coercivity;
  j["contrast"] = t.contrast;
  return j;
}

inline constexpr const char *kSweepCsvHeader =
  "n,theta,feature_size,resolution,entry,computed,predicted,rel_error,iters,residual,wall_time_s";

inline std::string entry_name(int i, int j)
{
  return "s" + std::to_string(i + 1) + std::to_string(j + 1);
}

/// One row per tensor entry per term. `iters` and `residual` belong to the
/// corrector of the entry's column direction. Failed terms get nan values.
inline void write_sweep_csv(std::ostream &os, const SweepResult &res, bool timing = true)
{
  os << kSweepCsvHeader << '\n';
  const int d = res.dim;
  for (const auto &r : res.records)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const std::size_t k = static_cast<std::size_t>(i * d + j);
        const bool have = r.ok && k < r.computed.size();
        os << r.n << ',' << csv_number(r.theta) << ',' << csv_number(r.feature) << ',' << r.resolution << ','
           << entry_name(i, j) << ',' << csv_number(have ? r.computed[k] : NAN) << ','
           << csv_number(have ? r.predicted[k] : NAN) << ',' << csv_number(have ? r.rel_error[k] : NAN) << ','
           << (have ? std::to_string(r.iterations[j]) : std::string("0")) << ','
           << csv_number(have ? r.residuals[j] : NAN) << ',' << csv_number(timing ? r.wall_time_s : 0.0) << '\n';
      }
}

inline Json sweep_json(const SweepResult &res, bool timing = true)
{
  Json j;
  j["kind"] = res.kind;
  j["dim"] = res.dim;
  j["phases"] = Json{{"alpha1", res.phases.alpha1},
                     {"beta1", res.phases.beta1},
                     {"alpha2", res.phases.alpha2},
                     {"beta2", res.phases.beta2}};
  if (res.kind == "cross")
    j["ell"] = res.ell;
  j["h"] = res.h;
  j["fixed_beta"] = res.fixed_beta;
  if (res.fixed_beta)
    j["note"] = "fixed beta2n: outside the strong-field regime covered by the limit formula";
  j["records"] = Json::array();
  for (const auto &r : res.records) {
    Json rec;
    rec["n"] = r.n;
    rec["feature_size"] = r.feature;
    rec["theta_nominal"] = r.theta_nominal;
    rec["theta"] = r.theta;
    rec["resolution"] = r.resolution;
    rec["alpha2n"] = r.alpha2n;
    rec["beta2n"] = r.beta2n;
    rec["pre_asymptotic"] = r.pre_asymptotic;
    rec["status"] = r.ok ? "ok" : (r.nonconvergence ? "nonconvergence" : "error");
    if (!r.ok)
      rec["error"] = r.error;
    rec["computed"] = r.computed;
    rec["predicted"] = r.predicted;
    rec["rel_error"] = r.rel_error;
    rec["max_rel_error"] = r.ok ? Json(r.max_rel_error()) : Json(nullptr);
    rec["residuals"] = r.residuals;
    rec["iterations"] = r.iterations;
    if (r.has_xi) {
      rec["xi_ratio"] = {r.xi_ratio[0], r.xi_ratio[1]};
      rec["xi_predicted"] = {r.xi_predicted[0], r.xi_predicted[1]};
    }
    if (r.epsilon > 0.0) {
      rec["epsilon"] = r.epsilon;
      rec["epsilon_flag"] = r.epsilon_flag;
    }
    rec["wall_time_s"] = timing ? r.wall_time_s : 0.0;
    j["records"].push_back(rec);
  }
  if (res.dim == 3)
    j["epsilon_warning"] = res.epsilon_warning;
  return j;
}

inline Json duality_json(const DualityReport &rep)
{
  Json j;
  j["sigma_star"] = matrix_json(rep.sigma_star);
  j["keller"] = Json{{"dual_field_sigma_star", matrix_json(rep.dual_sigma_star)},
                     {"predicted", matrix_json(rep.keller_predicted)},
                     {"deviation", rep.keller_deviation}};
  if (rep.dykhne) {
    const auto &d = *rep.dykhne;
    j["dykhne"] = Json{{"a", d.coeffs.a},
                       {"b", d.coeffs.b},
                       {"p", d.coeffs.p},
                       {"q", d.coeffs.q},
                       {"r", d.coeffs.r},
                       {"transformed_sigma_star", matrix_json(d.transformed_sigma_star)},
                       {"predicted", matrix_json(d.predicted)},
                       {"deviation", d.deviation},
                       {"pointwise_asymmetry", d.pointwise_asymmetry}};
  } else {
    j["dykhne"] = Json{{"skipped", rep.dykhne_skipped}};
  }
  j["iterations"] = rep.iterations;
  return j;
}

inline constexpr const char *kAsymptoticCsvHeader =
  "theta,alpha1_prime,theta_alpha2_prime,p,q,r,err_alpha1,err_theta_alpha2,err_q,err_r";

inline void write_asymptotic_csv(std::ostream &os, const AsymptoticTable &tab)
{
  os << kAsymptoticCsvHeader << '\n';
  for (const auto &r : tab.rows)
    os << csv_number(r.theta) << ',' << csv_number(r.alpha1_prime) << ',' << csv_number(r.theta_alpha2_prime) << ','
       << csv_number(r.p) << ',' << csv_number(r.q) << ',' << csv_number(r.r) << ','
       << csv_number(std::abs(r.alpha1_prime - tab.lim_alpha1)) << ','
       << csv_number(std::abs(r.theta_alpha2_prime - tab.lim_theta_alpha2)) << ','
       << csv_number(std::abs(r.q - tab.lim_q)) << ',' << csv_number(std::abs(r.r - tab.lim_r)) << '\n';
}

inline Json asymptotic_json(const AsymptoticTable &tab)
{
  Json j;
  j["h"] = tab.h;
  j["limits"] = Json{{"alpha1_prime", tab.lim_alpha1},
                     {"theta_alpha2_prime", tab.lim_theta_alpha2},
                     {"p", tab.lim_p},
                     {"q", tab.lim_q},
                     {"r", tab.lim_r}};
  j["rows"] = Json::array();
  for (const auto &r : tab.rows)
    j["rows"].push_back(Json{{"theta", r.theta},
                             {"alpha1_prime", r.alpha1_prime},
                             {"theta_alpha2_prime", r.theta_alpha2_prime},
                             {"a", r.a},
                             {"b", r.b},
                             {"p", r.p},
                             {"q", r.q},
                             {"r", r.r}});
  return j;
}

} // namespace hallhom

#endif // HALLHOM_REPORT_HPP
