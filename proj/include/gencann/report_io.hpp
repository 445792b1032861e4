#pragma once

// JSON and CSV forms of models and reports. Keys are emitted sorted, so equal
// inputs give byte-identical files.

#include <fstream>

#include <json.hpp>

#include "gen_loop.hpp"
#include "train.hpp"

namespace gencann {

using Json = nlohmann::json;

namespace detail {
inline Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }
} // namespace detail

inline Json to_json(const FitReport& r) {
  Json j;
  j["mean_r2"] = detail::num(r.mean_r2);
  j["final_loss"] = detail::num(r.final_loss);
  j["epochs"] = r.epochs;
  j["wall_time_s"] = r.wall_time_s;
  j["fiber_angle"] = detail::opt(r.fiber_angle);
  j["scores"] = Json::array();
  for (const auto& s : r.scores)
    j["scores"].push_back({{"path", s.path},
                           {"component", s.component},
                           {"r2_train", detail::opt(s.r2_train)},
                           {"r2_test", detail::opt(s.r2_test)},
                           {"r2_all", detail::opt(s.r2_all)}});
  j["loss_history"] = Json::array();
  for (auto [e, l] : r.loss_history) j["loss_history"].push_back({e, detail::num(l)});
  return j;
}

inline Json to_json(const CvFold& f) {
  Json j;
  j["left_out"] = f.left_out;
  j["left_out_r2"] = Json::array();
  for (const auto& v : f.left_out_r2) j["left_out_r2"].push_back(detail::opt(v));
  j["failure"] = f.failure ? Json(*f.failure) : Json(nullptr);
  j["train_report"] = f.train_report ? to_json(*f.train_report) : Json(nullptr);
  return j;
}

inline Json to_json(const CvReport& r) {
  Json j;
  j["folds"] = Json::array();
  for (const auto& f : r.folds) j["folds"].push_back(to_json(f));
  return j;
}

inline Json to_json(const StabilityReport& s) {
  return {{"best_r2", s.best_r2},
          {"mean", s.mean},
          {"variance", s.variance},
          {"attempts", s.attempts},
          {"parse_errors", s.parse_errors},
          {"training_errors", s.training_errors},
          {"successes", s.successes},
          {"parse_error_fraction", s.parse_error_fraction},
          {"training_error_fraction", s.training_error_fraction},
          {"success_fraction", s.success_fraction}};
}

inline Json to_json(const std::vector<GenerationRun>& runs) {
  Json j = Json::array();
  for (const auto& r : runs) {
    Json a = Json::array();
    for (const auto& t : r.attempts)
      a.push_back({{"round", t.round},
                   {"outcome", to_string(t.outcome)},
                   {"detail", t.detail},
                   {"mean_r2", t.report ? detail::num(t.report->mean_r2) : Json(nullptr)}});
    j.push_back({{"repetition", r.repetition},
                 {"refinement_rounds", r.refinement_rounds},
                 {"best_attempt", r.best ? Json(*r.best) : Json(nullptr)},
                 {"attempts", a}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// model files

constexpr int model_format_version = 1;

inline Json model_to_json(const ConstitutiveModel& m, const std::optional<FitReport>& metrics = std::nullopt) {
  Json j;
  j["format_version"] = model_format_version;
  j["spec_text"] = dsl::serialize(m.spec());
  j["params"] = std::vector<double>(m.params().data(), m.params().data() + m.params().size());
  j["fiber_angle"] = detail::opt(m.fiber_angle());
  const auto a = m.spec().architecture();
  j["architecture"] = {{"input_width", a.input_width},
                       {"hidden_widths", a.hidden_widths},
                       {"activation", to_string(a.hidden_activation)},
                       {"output", to_string(a.output_activation)},
                       {"param_count", m.param_count()}};
  j["metrics"] = metrics ? to_json(*metrics) : Json(nullptr);
  return j;
}

inline ConstitutiveModel model_from_json(const Json& j) {
  try {
    if (j.at("format_version").get<int>() != model_format_version)
      throw InvalidInput("unsupported model format version " + j.at("format_version").dump());
    auto parsed = dsl::parse(j.at("spec_text").get<std::string>());
    if (auto* e = std::get_if<dsl::ParseError>(&parsed)) throw InvalidInput("model spec: " + e->to_string());
    ConstitutiveModel m = build(std::get<CannSpec>(parsed));
    const auto p = j.at("params").get<std::vector<double>>();
    m.set_params(Eigen::Map<const ParamVector>(p.data(), Eigen::Index(p.size())));
    return m;
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed model file: ") + e.what());
  }
}

inline Json read_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw IngestionError("cannot open '" + file + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InvalidInput("'" + file + "' is not valid JSON: " + e.what());
  }
}

inline void write_text(const std::string& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw IngestionError("cannot write '" + file + "'");
  out << text;
}

inline void write_json(const std::string& file, const Json& j) { write_text(file, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// CSV dumps

/// lambda1,lambda2,pred,truth for one stress component; lambda2 is the
/// lateral stretch of the state (gamma for simple shear).
inline std::string predictions_csv(const Dataset& d, const std::vector<PointPrediction>& preds, const std::string& path,
                                   int component) {
  std::string o = "lambda1,lambda2,pred,truth\n";
  for (const auto& lp : d.paths) {
    if (lp.name != path) continue;
    for (const auto& q : preds) {
      if (q.path != path || q.component != component) continue;
      DataPoint pt;
      pt.lambda1 = q.lambda1;
      pt.second = q.second;
      const auto mode = loading_mode(d, lp, pt);
      const double l2 = mode.kind == LoadingKind::simple_shear ? mode.magnitude : deformation_gradient(mode)(1, 1);
      o += detail::shortest(q.lambda1) + "," + detail::shortest(l2) + "," + detail::shortest(q.pred) + "," +
           detail::shortest(q.truth) + "\n";
    }
  }
  return o;
}

inline std::string plane_csv(const PlaneErrorField& f) {
  std::string o = "row,col,lambda1,lambda2,i1,i2,s11_pred,s22_pred,s11_oracle,s22_oracle,relative_error,reference,"
                  "interior\n";
  for (const auto& e : f.points) {
    const auto& g = e.point;
    o += std::to_string(g.row) + "," + std::to_string(g.col) + "," + detail::shortest(g.lambda1) + "," +
         detail::shortest(g.lambda2) + "," + detail::shortest(g.i1) + "," + detail::shortest(g.i2) + "," +
         detail::shortest(e.predicted[0]) + "," + detail::shortest(e.predicted[1]) + "," +
         detail::shortest(e.oracle[0]) + "," + detail::shortest(e.oracle[1]) + "," +
         detail::shortest(e.relative_error) + "," + (e.reference ? "1" : "0") + "," + (e.interior ? "1" : "0") + "\n";
  }
  return o;
}

inline Json to_json(const PlaneErrorField& f) {
  return {{"points", f.points.size()},
          {"median", f.median},
          {"max", f.max},
          {"interior_median", f.interior_median},
          {"interior_max", f.interior_max}};
}

} // namespace gencann
