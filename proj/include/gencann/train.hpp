#pragma once

// Full-batch training, R^2 metrics, leave-one-path-out cross-validation and
// invariant-plane evaluation.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "data.hpp"
#include "model.hpp"

namespace gencann {

struct TrainConfig {
  OptimizerConfig optimizer;
  double learning_rate = 1e-3;
  long epochs = 20000;
  double l2_weight = 0.0;
  double reference_penalty_weight = 0.0;
  std::vector<double> path_weights; ///< empty: 1 / path length
  long patience = 500;
  double min_improvement = 1e-10;
  std::uint64_t seed = 0;
  /// Record the loss every this many epochs (the final epoch is always recorded).
  long history_stride = 100;
  /// Called with the exact data handed to the optimizer; used for instrumentation.
  std::function<void(const Dataset&)> observer;

  static TrainConfig from_spec(const CannSpec& s) {
    TrainConfig c;
    c.optimizer = s.training.optimizer;
    c.learning_rate = s.training.learning_rate;
    c.epochs = s.training.epochs;
    c.l2_weight = s.training.l2_weight;
    c.reference_penalty_weight = s.training.reference_penalty_weight;
    c.path_weights = s.training.path_weights;
    c.patience = s.training.patience;
    c.min_improvement = s.training.min_improvement;
    c.seed = s.network.seed;
    return c;
  }
};

inline double r2(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size() || truth.empty()) throw InvalidInput("r2 needs equal, non-empty inputs");
  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / double(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  if (ss_tot == 0.0) throw UndefinedMetric("r2 undefined for constant truth");
  return 1.0 - ss_res / ss_tot;
}

struct ComponentScore {
  std::string path;
  int component = 0;
  std::optional<double> r2_train, r2_test, r2_all;

  /// Score used for averaging: test split when the dataset has one, else training points.
  std::optional<double> headline(bool use_test) const { return use_test ? r2_test : r2_train; }
};

struct FitReport {
  std::vector<ComponentScore> scores;
  double mean_r2 = std::numeric_limits<double>::quiet_NaN();
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  long epochs = 0;
  double wall_time_s = 0.0;
  std::vector<std::pair<long, double>> loss_history;
  std::optional<double> fiber_angle;
};

class TrainingFailure : public std::runtime_error {
public:
  TrainingFailure(const std::string& msg, FitReport report)
      : std::runtime_error(msg), report_(std::move(report)) {}
  const FitReport& report() const { return report_; }

private:
  FitReport report_;
};

struct PointPrediction {
  std::string path;
  double lambda1 = 1.0, second = 0.0;
  int component = 0;
  double pred = 0.0, truth = 0.0;
  Split split = Split::train;
};

/// Predictions for every point and stress component of a dataset.
inline std::vector<PointPrediction> predict_dataset(const ConstitutiveModel& model, const Dataset& d) {
  std::vector<PointPrediction> out;
  for (const auto& path : d.paths)
    for (const auto& pt : path.points) {
      const auto s = model.predict_stress(loading_mode(d, path, pt), d.measure, d.stress_columns);
      for (std::size_t c = 0; c < s.components.size() && c < pt.stress.size(); ++c)
        out.push_back({path.name, pt.lambda1, pt.second, int(c), s[c], pt.stress[c], pt.split});
    }
  return out;
}

/// Per-path, per-component R^2 and their mean.
inline FitReport score(const ConstitutiveModel& model, const Dataset& d) {
  const auto preds = predict_dataset(model, d);
  const bool use_test = d.has_test_points();
  FitReport rep;
  double sum = 0.0;
  int n = 0;
  for (const auto& path : d.paths)
    for (int c = 0; c < d.stress_columns; ++c) {
      if (path.kind == LoadingKind::simple_shear && c > 0) continue;
      ComponentScore sc{path.name, c, {}, {}, {}};
      std::vector<double> p[3], t[3]; // train, test, all
      for (const auto& q : preds)
        if (q.path == path.name && q.component == c) {
          const int k = q.split == Split::train ? 0 : 1;
          p[k].push_back(q.pred);
          t[k].push_back(q.truth);
          p[2].push_back(q.pred);
          t[2].push_back(q.truth);
        }
      auto safe = [](const std::vector<double>& a, const std::vector<double>& b) -> std::optional<double> {
        if (a.empty()) return std::nullopt;
        try {
          return r2(a, b);
        } catch (const UndefinedMetric&) {
          return std::nullopt;
        }
      };
      sc.r2_train = safe(p[0], t[0]);
      sc.r2_test = safe(p[1], t[1]);
      sc.r2_all = safe(p[2], t[2]);
      if (auto h = sc.headline(use_test)) {
        sum += *h;
        ++n;
      }
      rep.scores.push_back(std::move(sc));
    }
  if (n) rep.mean_r2 = sum / n;
  rep.fiber_angle = model.fiber_angle();
  return rep;
}

/// Training states of a dataset as loss contexts, weighted per path.
inline std::vector<FeatureContext> training_batch(const Dataset& d, const std::vector<double>& path_weights) {
  if (!path_weights.empty() && path_weights.size() != d.paths.size())
    throw InvalidInput("path_weights has " + std::to_string(path_weights.size()) + " entries for " +
                       std::to_string(d.paths.size()) + " paths");
  std::vector<FeatureContext> batch;
  std::size_t active_paths = 0;
  for (const auto& p : d.paths)
    if (p.count(Split::train)) ++active_paths;
  for (std::size_t k = 0; k < d.paths.size(); ++k) {
    const auto& path = d.paths[k];
    const std::size_t ntrain = path.count(Split::train);
    if (!ntrain) continue;
    const double w = path_weights.empty() ? 1.0 / double(ntrain) : path_weights[k];
    for (const auto& pt : path.points) {
      if (pt.split != Split::train) continue;
      const LoadingMode mode = loading_mode(d, path, pt);
      FeatureContext ctx;
      ctx.F = deformation_gradient(mode);
      ctx.free_direction = mode.free_direction;
      ctx.measure = d.measure;
      ctx.components = output_components(mode, d.stress_columns);
      ctx.targets.assign(pt.stress.begin(), pt.stress.begin() + std::ptrdiff_t(ctx.components.size()));
      ctx.weight = w / (double(active_paths) * double(ctx.components.size()));
      ctx.prepare();
      batch.push_back(std::move(ctx));
    }
  }
  if (batch.empty()) throw InvalidInput("dataset has no training points");
  return batch;
}

struct TrainResult {
  ConstitutiveModel model;
  FitReport report;
};

/// Full-batch optimization. Throws TrainingFailure on a non-finite loss or a
/// negative mean R^2; the model state is unchanged in that case.
inline TrainResult train(ConstitutiveModel model, const Dataset& d, const TrainConfig& cfg) {
  if (cfg.epochs <= 0) throw InvalidInput("epochs must be positive");
  if (!(cfg.learning_rate > 0.0)) throw InvalidInput("learning rate must be positive");
  for (const auto& path : d.paths)
    for (const auto& pt : path.points) model.check_mode(loading_mode(d, path, pt));
  if (cfg.observer) cfg.observer(d);

  const auto t0 = std::chrono::steady_clock::now();
  const auto batch = training_batch(d, cfg.path_weights);
  const LossConfig lc{cfg.l2_weight, cfg.reference_penalty_weight};

  ParamVector p = model.params();
  ParamVector best = p;
  double best_loss = std::numeric_limits<double>::infinity();
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(p.size()), m2 = m1;
  std::vector<double> losses, best_so_far;
  losses.reserve(std::size_t(std::min<long>(cfg.epochs, 1'000'000)));
  best_so_far.reserve(losses.capacity());
  FitReport rep;
  const auto& o = cfg.optimizer;
  long epoch = 0;
  auto fail = [&](const std::string& why) {
    rep.epochs = epoch;
    rep.final_loss = losses.empty() ? std::numeric_limits<double>::quiet_NaN() : losses.back();
    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    throw TrainingFailure(why, rep);
  };

  for (epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto lg = model.loss_and_param_grad(p, batch, lc);
    if (!std::isfinite(lg.loss) || !lg.grad.allFinite())
      fail("non-finite loss at epoch " + std::to_string(epoch));
    losses.push_back(lg.loss);
    if ((epoch - 1) % std::max<long>(1, cfg.history_stride) == 0) rep.loss_history.emplace_back(epoch, lg.loss);
    if (lg.loss < best_loss) {
      best_loss = lg.loss;
      best = p;
    }
    best_so_far.push_back(best_loss);
    if (o.kind == OptimizerConfig::Kind::adam) {
      m1 = o.beta1 * m1 + (1.0 - o.beta1) * lg.grad;
      m2 = o.beta2 * m2 + (1.0 - o.beta2) * lg.grad.cwiseProduct(lg.grad);
      const double c1 = 1.0 - std::pow(o.beta1, double(epoch));
      const double c2 = 1.0 - std::pow(o.beta2, double(epoch));
      p.array() -= cfg.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + o.epsilon);
    } else {
      p -= cfg.learning_rate * lg.grad;
    }
    model.project(p);
    if (!p.allFinite()) fail("parameters diverged at epoch " + std::to_string(epoch));
    // compare running bests so a single Adam spike does not end training
    if (cfg.patience > 0 && epoch > cfg.patience &&
        best_so_far[std::size_t(epoch - 1 - cfg.patience)] - best_loss < cfg.min_improvement)
      break;
  }
  epoch = std::min(epoch, cfg.epochs);
  // the loss of the final update has not been evaluated; keep the best evaluated state
  model.set_params(best);
  rep = [&] {
    FitReport r = score(model, d);
    r.loss_history = std::move(rep.loss_history);
    return r;
  }();
  if (rep.loss_history.empty() || rep.loss_history.back().first != long(losses.size()))
    rep.loss_history.emplace_back(long(losses.size()), losses.back());
  rep.final_loss = best_loss;
  rep.epochs = long(losses.size());
  rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!std::isfinite(rep.mean_r2)) throw TrainingFailure("R^2 undefined after training", rep);
  if (rep.mean_r2 < 0.0)
    throw TrainingFailure("training produced a negative mean R^2 (" + std::to_string(rep.mean_r2) + ")", rep);
  return {std::move(model), std::move(rep)};
}

// ---------------------------------------------------------------------------
// cross-validation

struct CvFold {
  std::string left_out;
  std::optional<FitReport> train_report;       ///< fit on the remaining paths
  std::vector<std::optional<double>> left_out_r2; ///< per stress component
  std::optional<std::string> failure;
};

struct CvReport {
  std::vector<CvFold> folds;
};

inline Dataset fold_training_data(const Dataset& d, std::size_t left_out) {
  const std::string name = d.paths.at(left_out).name;
  return filter_paths(d, [&](const LoadingPath& p) { return p.name != name; });
}

/// Seed for fold k, distinct per fold and deterministic.
inline std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (fold + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return (z ^ (z >> 31)) & 0x7FFFFFFFFFFFull;
}

inline CvReport leave_one_out_cv(const CannSpec& spec, const Dataset& d, const TrainConfig& cfg,
                                 unsigned threads = std::thread::hardware_concurrency()) {
  if (d.paths.size() < 2) throw InvalidInput("cross-validation needs at least two paths");
  auto run_fold = [&](std::size_t k) {
    CvFold fold;
    fold.left_out = d.paths[k].name;
    CannSpec s = spec;
    s.network.seed = fold_seed(spec.network.seed, k);
    TrainConfig c = cfg;
    c.seed = s.network.seed;
    if (!c.path_weights.empty()) {
      c.path_weights.erase(c.path_weights.begin() + std::ptrdiff_t(k));
    }
    Dataset train_data = fold_training_data(d, k);
    for (auto& p : train_data.paths)
      for (auto& pt : p.points) pt.split = Split::train;
    Dataset held = filter_paths(d, [&](const LoadingPath& p) { return p.name == fold.left_out; });
    try {
      auto res = train(build(s), train_data, c);
      fold.train_report = res.report;
      const auto preds = predict_dataset(res.model, held);
      for (int comp = 0; comp < d.stress_columns; ++comp) {
        std::vector<double> pr, tr;
        for (const auto& q : preds)
          if (q.component == comp) {
            pr.push_back(q.pred);
            tr.push_back(q.truth);
          }
        if (pr.empty()) continue;
        try {
          fold.left_out_r2.push_back(r2(pr, tr));
        } catch (const UndefinedMetric&) {
          fold.left_out_r2.push_back(std::nullopt);
        }
      }
    } catch (const TrainingFailure& e) {
      fold.failure = e.what();
      fold.train_report = e.report();
    } catch (const EvaluationError& e) {
      fold.failure = e.what();
    }
    return fold;
  };

  CvReport rep;
  rep.folds.resize(d.paths.size());
  if (threads <= 1) {
    for (std::size_t k = 0; k < d.paths.size(); ++k) rep.folds[k] = run_fold(k);
  } else {
    std::vector<std::future<CvFold>> jobs;
    for (std::size_t k = 0; k < d.paths.size(); ++k) jobs.push_back(std::async(std::launch::async, run_fold, k));
    for (std::size_t k = 0; k < jobs.size(); ++k) rep.folds[k] = jobs[k].get();
  }
  return rep;
}

// ---------------------------------------------------------------------------
// invariant plane

struct PlanePointError {
  GridPoint point;
  Eigen::Vector2d predicted, oracle;
  double relative_error = 0.0;
  bool reference = false; ///< oracle stress ~ 0, excluded from summaries
  bool interior = false;
};

struct PlaneErrorField {
  std::vector<PlanePointError> points;
  double median = 0.0, max = 0.0;                  ///< over all non-reference points
  double interior_median = 0.0, interior_max = 0.0; ///< over interior points only
};

/// Relative error |s_pred - s_oracle| / (|s_oracle| + eps_abs) of the in-plane
/// Cauchy stresses (s11, s22) under plane stress.
inline PlaneErrorField evaluate_plane(const ConstitutiveModel& model, const std::vector<GridPoint>& grid,
                                      const OracleMaterial& oracle, double eps_abs = 1e-6) {
  if (model.has_fiber()) throw InvalidInput("plane evaluation requires an isotropic model");
  if (grid.empty()) throw InvalidInput("empty grid");
  int n = 0;
  for (const auto& g : grid) n = std::max(n, g.row + 1);
  PlaneErrorField field;
  std::vector<double> all, inner;
  for (const auto& g : grid) {
    PlanePointError e;
    e.point = g;
    const Tensor3 sp = model.stress_tensor(g.F, 2, StressMeasure::cauchy);
    const Tensor3 so = finish_stress(g.F, oracle.piola_iso(g.F), 2, StressMeasure::cauchy);
    e.predicted = {sp(0, 0), sp(1, 1)};
    e.oracle = {so(0, 0), so(1, 1)};
    e.reference = e.oracle.norm() < eps_abs;
    e.interior = g.row > 0 && g.row < n - 1 && g.col > 0 && g.col < n - 1;
    e.relative_error = (e.predicted - e.oracle).norm() / (e.oracle.norm() + eps_abs);
    if (!e.reference) {
      all.push_back(e.relative_error);
      if (e.interior) inner.push_back(e.relative_error);
    }
    field.points.push_back(e);
  }
  auto median = [](std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  auto maxof = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
  field.median = median(all);
  field.max = maxof(all);
  field.interior_median = median(inner);
  field.interior_max = maxof(inner);
  return field;
}

} // namespace gencann
