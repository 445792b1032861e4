#pragma once

// Generate-train-refine loop around an LLM that writes CANN specifications.
//
// Per repetition: ask for a spec, feed parse errors and training failures back
// until one trains (bounded by max_initial_retries), then run a fixed number of
// refinement rounds, each sending the last successful spec and its R^2 table.
// The best attempt of each repetition and the best over all repetitions are kept.

#include <functional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dsl.hpp"
#include "train.hpp"

namespace gencann {

struct Message {
  std::string role;
  std::string content;
  bool operator==(const Message&) const = default;
};

class TransportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class LlmClient {
public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const std::vector<Message>& messages) = 0;
};

/// Replays a fixed list of responses; running out is a transport error.
class ScriptedClient : public LlmClient {
public:
  explicit ScriptedClient(std::vector<std::string> responses) : responses_(std::move(responses)) {}

  std::string complete(const std::vector<Message>& messages) override {
    if (next_ >= responses_.size())
      throw TransportError("scripted client exhausted after " + std::to_string(responses_.size()) + " responses");
    seen_.push_back(messages);
    return responses_[next_++];
  }
  std::size_t calls() const { return next_; }
  const std::vector<std::vector<Message>>& requests() const { return seen_; }

private:
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
  std::vector<std::vector<Message>> seen_;
};

// ---------------------------------------------------------------------------
// prompts

struct PromptBundle {
  std::string part1; ///< task, theory, requirements, dataset summary
  std::string part2; ///< specification skeleton
};

inline std::string dataset_summary(const Dataset& d) {
  std::ostringstream o;
  o << "name: " << d.name << "\n"
    << "stress measure: "
    << (d.measure == StressMeasure::nominal ? "nominal (first Piola-Kirchhoff)" : "cauchy") << "\n"
    << "paths: " << d.paths.size() << ", points: " << d.point_count() << "\n";
  for (const auto& p : d.paths) {
    const auto& first = p.points.front();
    const auto& last = p.points.back();
    o << "  - " << p.name << " (" << to_string(p.kind) << "): " << p.points.size() << " points, "
      << p.count(Split::train) << " train / " << p.count(Split::test) << " test; components";
    for (auto c : output_components(loading_mode(d, p, first), d.stress_columns))
      o << " " << component_name(d.measure, c);
    if (p.kind == LoadingKind::simple_shear && d.second_column == SecondColumn::gamma)
      o << "; gamma " << detail::shortest(first.second) << " to " << detail::shortest(last.second);
    else
      o << "; lambda1 " << detail::shortest(first.lambda1) << " to " << detail::shortest(last.lambda1);
    if (d.second_column == SecondColumn::lambda2)
      o << ", lambda2 " << detail::shortest(first.second) << " to " << detail::shortest(last.second);
    o << "\n";
  }
  return o.str();
}

inline PromptBundle assemble_prompt(MaterialClass c, const std::string& summary) {
  const bool ti = c == MaterialClass::transversely_isotropic;
  std::ostringstream a;
  a << "Task\n"
       "Design a constitutive artificial neural network (CANN) for an incompressible hyperelastic "
    << (ti ? "transversely isotropic" : "isotropic")
    << " material. The network maps invariant features to a strain energy Psi; stresses are its "
       "derivatives, so the model is hyperelastic by construction. You choose the features, the network "
       "and the training setup by filling in the specification skeleton.\n\n"
       "Theory\n"
       "- Deformation gradient F with det F = 1 (incompressible); right Cauchy-Green tensor C = F^T F.\n"
       "- I1 = tr C, I2 = ((tr C)^2 - tr(C^2)) / 2.\n";
  if (ti)
    a << "- Fiber direction n = [cos a, sin a, 0] in the 1-2 plane, structure tensor N = n (x) n; "
         "I4 = N : C, I5 = N : C^2. The angle a can be learned.\n";
  a << "- Features enter with reference offsets (I1 - 3, I2 - 3"
    << (ti ? ", I4 - 1, I5 - 1" : "")
    << ") so they vanish in the undeformed state. Optional stretch features F11 - 1, F22 - 1, F33 - 1 are "
       "only defined without shear.\n"
       "- P = dPsi/dF - p F^-T, with the pressure p fixed by the traction-free out-of-plane direction; "
       "Cauchy stress sigma = P F^T.\n\n"
       "Requirements\n"
       "- Reply with exactly one complete specification in the skeleton's language; replace every `choose`.\n"
       "- invariants: list from ["
    << (ti ? "I1, I2, I4, I5" : "I1, I2")
    << "]; use_stretches: true | false.\n"
       "- layers: list of positive hidden widths; activation: softplus | tanh | exp_minus_one | relu_smooth; "
       "output: linear | softplus; initializer: glorot_uniform | uniform(low, high); nonneg_weights: true | false "
       "(non-negative weights with softplus make Psi monotone in each feature).\n";
  if (ti)
    a << "- angle_init: an angle in [0, 1.5707963267948966] radians or uniform(low, high); trainable: true | false.\n";
  a << "- optimizer: adam | adam(beta1, beta2, epsilon) | gd; learning_rate > 0; integer epochs > 0; "
       "reference_penalty_weight >= 0 penalizes stress in the undeformed state; l2_weight >= 0.\n"
       "- Training is full batch on the train split; the score is R^2 per loading path and stress component, "
       "averaged (test split where present).\n\n"
       "Dataset\n"
    << summary;

  std::ostringstream b;
  b << "Specification skeleton\n\n"
       "material {\n  class: "
    << to_string(c)
    << ";\n  incompressible: true;\n}\n\n"
       "features {\n  use_stretches: choose;\n  invariants: choose;\n  offsets: reference;\n}\n\n"
       "network {\n  layers: choose;\n  activation: choose;\n  output: choose;\n  initializer: choose;\n"
       "  nonneg_weights: choose;\n  seed: 0;\n}\n\n";
  if (ti) b << "fiber {\n  angle_init: choose;\n  trainable: choose;\n}\n\n";
  b << "training {\n  optimizer: choose;\n  learning_rate: choose;\n  epochs: choose;\n  loss: mse;\n"
       "  reference_penalty_weight: choose;\n  l2_weight: choose;\n}\n";
  return {a.str(), b.str()};
}

/// The specification inside a reply: the first fenced block if there is one, else the whole text.
inline std::string extract_spec_text(const std::string& reply) {
  const auto open = reply.find("```");
  if (open == std::string::npos) return reply;
  const auto body = reply.find('\n', open);
  if (body == std::string::npos) return reply;
  const auto close = reply.find("```", body + 1);
  return reply.substr(body + 1, close == std::string::npos ? std::string::npos : close - body - 1);
}

inline std::string r2_table(const Dataset& d, const FitReport& r) {
  std::ostringstream o;
  const bool use_test = d.has_test_points();
  for (const auto& s : r.scores) {
    std::string comp = std::to_string(s.component);
    for (const auto& p : d.paths)
      if (p.name == s.path) {
        const auto cs = output_components(loading_mode(d, p, p.points.front()), d.stress_columns);
        if (std::size_t(s.component) < cs.size()) comp = component_name(d.measure, cs[std::size_t(s.component)]);
      }
    const auto h = s.headline(use_test);
    o << "  " << s.path << " " << comp << ": " << (h ? detail::shortest(*h) : std::string("undefined")) << "\n";
  }
  o << "mean R^2: " << detail::shortest(r.mean_r2) << "\n";
  return o.str();
}

// ---------------------------------------------------------------------------
// runs

enum class Outcome { parse_error, training_error, success };

inline std::string_view to_string(Outcome o) {
  switch (o) {
  case Outcome::parse_error: return "parse_error";
  case Outcome::training_error: return "training_error";
  case Outcome::success: return "success";
  }
  return "?";
}

struct Attempt {
  int round = 0; ///< 0 = initial phase, 1.. = refinement round
  std::string response;
  Outcome outcome = Outcome::parse_error;
  std::string detail;
  std::optional<FitReport> report;
};

struct GenerationRun {
  int repetition = 1;
  std::vector<Attempt> attempts;
  int refinement_rounds = 0;
  std::optional<std::size_t> best; ///< index into attempts
  std::optional<CannSpec> best_spec;
  std::optional<ConstitutiveModel> best_model;

  double best_r2() const { return best ? attempts[*best].report->mean_r2 : std::numeric_limits<double>::quiet_NaN(); }
};

class GenerationFailed : public std::runtime_error {
public:
  GenerationFailed(const std::string& msg, std::vector<GenerationRun> runs)
      : std::runtime_error(msg), runs_(std::move(runs)) {}
  const std::vector<GenerationRun>& runs() const { return runs_; }

private:
  std::vector<GenerationRun> runs_;
};

struct StabilityReport {
  std::vector<double> best_r2; ///< per repetition
  double mean = 0.0, variance = 0.0;
  std::size_t attempts = 0, parse_errors = 0, training_errors = 0, successes = 0;
  double parse_error_fraction = 0.0, training_error_fraction = 0.0, success_fraction = 0.0;
};

inline StabilityReport stability_summary(const std::vector<GenerationRun>& runs) {
  if (runs.empty()) throw InvalidInput("no runs to summarize");
  StabilityReport s;
  for (const auto& r : runs) {
    if (r.best) s.best_r2.push_back(r.best_r2());
    for (const auto& a : r.attempts) {
      ++s.attempts;
      if (a.outcome == Outcome::parse_error) ++s.parse_errors;
      if (a.outcome == Outcome::training_error) ++s.training_errors;
      if (a.outcome == Outcome::success) ++s.successes;
    }
  }
  if (!s.best_r2.empty()) {
    for (double v : s.best_r2) s.mean += v;
    s.mean /= double(s.best_r2.size());
    for (double v : s.best_r2) s.variance += (v - s.mean) * (v - s.mean);
    s.variance /= double(s.best_r2.size());
  }
  if (s.attempts) {
    s.parse_error_fraction = double(s.parse_errors) / double(s.attempts);
    s.training_error_fraction = double(s.training_errors) / double(s.attempts);
    s.success_fraction = double(s.successes) / double(s.attempts);
  }
  return s;
}

using Trainer = std::function<TrainResult(const CannSpec&, const Dataset&)>;

inline TrainResult default_trainer(const CannSpec& spec, const Dataset& d) {
  return train(build(spec), d, TrainConfig::from_spec(spec));
}

struct GenConfig {
  int max_initial_retries = 10;
  int refinements = 3;
  int repetitions = 5;
  Trainer trainer = default_trainer;
  std::ostream* log = nullptr; ///< JSON lines, one record per exchange
  std::string secret;          ///< scrubbed from every log record
};

struct GenerationResult {
  CannSpec spec;
  ConstitutiveModel model;
  FitReport report;
  std::size_t best_run = 0;
  std::vector<GenerationRun> runs;
  StabilityReport stability;
};

namespace detail {

inline std::string redact(std::string s, const std::string& secret) {
  if (secret.empty()) return s;
  for (auto pos = s.find(secret); pos != std::string::npos; pos = s.find(secret, pos))
    s.replace(pos, secret.size(), "[redacted]");
  return s;
}

class RunLog {
public:
  RunLog(std::ostream* out, std::string secret) : out_(out), secret_(std::move(secret)) {}

  void exchange(int repetition, int index, int round, const std::vector<Message>& sent, const std::string* response,
                std::string_view outcome, const std::string& detail, std::optional<double> mean_r2) {
    if (!out_) return;
    nlohmann::json j;
    j["repetition"] = repetition;
    j["exchange"] = index;
    j["phase"] = round == 0 ? "initial" : "refinement";
    j["round"] = round;
    j["sent"] = nlohmann::json::array();
    for (const auto& m : sent) j["sent"].push_back({{"role", m.role}, {"content", m.content}});
    j["response"] = response ? nlohmann::json(*response) : nlohmann::json(nullptr);
    j["outcome"] = outcome;
    j["detail"] = detail;
    j["mean_r2"] = mean_r2 ? nlohmann::json(*mean_r2) : nlohmann::json(nullptr);
    *out_ << redact(j.dump(), secret_) << "\n";
    out_->flush();
  }

private:
  std::ostream* out_;
  std::string secret_;
};

} // namespace detail

/// One repetition. Throws GenerationFailed (carrying `done` plus this run) when
/// the initial budget runs out; transport errors propagate unchanged.
inline GenerationRun run_repetition(LlmClient& client, const Dataset& d, MaterialClass c, const GenConfig& cfg,
                                    int repetition, detail::RunLog& log, const std::vector<GenerationRun>& done) {
  const PromptBundle prompt = assemble_prompt(c, dataset_summary(d));
  std::vector<Message> history{{"system", prompt.part1}, {"user", prompt.part2}};
  std::size_t logged = 0; // history entries already written to the log
  GenerationRun run;
  run.repetition = repetition;
  int exchange = 0;
  std::optional<std::size_t> last_success;

  auto ask = [&](int round) {
    const std::vector<Message> sent(history.begin() + std::ptrdiff_t(logged), history.end());
    ++exchange;
    std::string reply;
    try {
      reply = client.complete(history);
    } catch (const std::exception& e) {
      log.exchange(repetition, exchange, round, sent, nullptr, "transport_error", e.what(), std::nullopt);
      throw;
    }
    history.push_back({"assistant", reply});
    logged = history.size();

    Attempt a;
    a.round = round;
    a.response = reply;
    std::optional<TrainResult> trained;
    std::optional<CannSpec> spec;
    auto parsed = dsl::parse(extract_spec_text(reply));
    if (auto* err = std::get_if<dsl::ParseError>(&parsed)) {
      a.outcome = Outcome::parse_error;
      a.detail = err->to_string();
    } else {
      spec = std::get<CannSpec>(parsed);
      try {
        if (spec->material.material_class != c)
          throw InvalidInput("material class must be " + std::string(to_string(c)));
        trained = cfg.trainer(*spec, d);
        a.outcome = Outcome::success;
        a.report = trained->report;
      } catch (const TrainingFailure& e) {
        a.outcome = Outcome::training_error;
        a.detail = e.what();
      } catch (const InvalidInput& e) {
        a.outcome = Outcome::training_error;
        a.detail = e.what();
      } catch (const EvaluationError& e) {
        a.outcome = Outcome::training_error;
        a.detail = e.what();
      }
    }
    log.exchange(repetition, exchange, round, sent, &reply, to_string(a.outcome), a.detail,
                 a.report ? std::optional<double>(a.report->mean_r2) : std::nullopt);
    run.attempts.push_back(a);
    const std::size_t idx = run.attempts.size() - 1;
    if (trained) {
      last_success = idx;
      // strict improvement keeps the earliest of tied attempts
      if (!run.best || a.report->mean_r2 > run.best_r2()) {
        run.best = idx;
        run.best_spec = *spec;
        run.best_model.emplace(std::move(trained->model));
      }
    }
    return idx;
  };

  for (int k = 0;; ++k) {
    if (k == cfg.max_initial_retries) {
      std::vector<GenerationRun> all = done;
      all.push_back(std::move(run));
      throw GenerationFailed("repetition " + std::to_string(repetition) + ": no trainable specification after " +
                                 std::to_string(cfg.max_initial_retries) + " attempts",
                             std::move(all));
    }
    const Attempt& a = run.attempts[ask(0)];
    if (a.outcome == Outcome::success) break;
    if (a.outcome == Outcome::parse_error)
      history.push_back({"user", "Your reply could not be parsed: " + a.detail +
                                     "\nReply with the corrected, complete specification."});
    else
      history.push_back({"user", "Training failed: " + a.detail +
                                     "\nRevise the specification and reply with a complete specification."});
  }

  for (int round = 1; round <= cfg.refinements; ++round) {
    const Attempt& prev = run.attempts.back();
    const Attempt& base = run.attempts[*last_success];
    std::string msg;
    if (prev.outcome != Outcome::success)
      msg += std::string(prev.outcome == Outcome::parse_error ? "Your previous reply could not be parsed: "
                                                              : "Your previous specification failed to train: ") +
             prev.detail + "\n\n";
    msg += "Refinement round " + std::to_string(round) + " of " + std::to_string(cfg.refinements) +
           ". This specification trained successfully:\n\n" + extract_spec_text(base.response) +
           "\n\nR^2 per loading path and stress component:\n" + r2_table(d, *base.report) +
           "\nImprove the specification to raise the mean R^2. Reply with one complete specification.";
    history.push_back({"user", msg});
    ask(round);
    run.refinement_rounds = round;
  }
  return run;
}

inline GenerationResult run_generation(LlmClient& client, const Dataset& d, MaterialClass c,
                                       const GenConfig& cfg = {}) {
  if (cfg.repetitions < 1 || cfg.max_initial_retries < 1 || cfg.refinements < 0)
    throw InvalidInput("repetitions and max_initial_retries must be positive, refinements non-negative");
  detail::RunLog log(cfg.log, cfg.secret);
  std::vector<GenerationRun> runs;
  for (int rep = 1; rep <= cfg.repetitions; ++rep) runs.push_back(run_repetition(client, d, c, cfg, rep, log, runs));

  std::size_t best = 0;
  for (std::size_t k = 1; k < runs.size(); ++k)
    if (runs[k].best_r2() > runs[best].best_r2()) best = k;
  GenerationRun& b = runs[best];
  GenerationResult out{*b.best_spec, *b.best_model, *b.attempts[*b.best].report, best, {}, {}};
  out.stability = stability_summary(runs);
  out.runs = std::move(runs);
  return out;
}

} // namespace gencann
