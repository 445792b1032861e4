// gencann: generate, train and evaluate CANN constitutive models.
//
// Exit codes:
//   0  success
//   1  unexpected error
//   2  usage error
//   3  missing/unreadable file or malformed dataset
//   4  invalid spec, model file or spec/dataset combination
//   5  training failed (non-finite loss or negative mean R^2)
//   6  generation failed (retry budget exhausted)
//   7  transport error talking to the LLM endpoint

#include <gencann/remote_client.hpp>
#include <gencann/report_io.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace gencann;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, other = 1, usage = 2, io = 3, invalid = 4, training = 5, generation = 6, transport = 7 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw IngestionError("cannot open '" + file + "'");
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

CannSpec read_spec(const std::string& file) {
  auto r = dsl::parse(read_file(file));
  if (auto* e = std::get_if<dsl::ParseError>(&r)) throw InvalidInput(file + ": " + e->to_string());
  return std::get<CannSpec>(r);
}

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

std::string safe_name(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') c = '_';
  return s;
}

void print_fit(const FitReport& r, const Dataset& d) {
  std::cout << r2_table(d, r);
  if (r.fiber_angle) std::cout << "fiber angle: " << *r.fiber_angle << "\n";
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string dataset, material_class = "isotropic", llm = "remote", script, out_dir = ".", log;
  std::string base_url = "https://api.openai.com/v1", model = "o3";
  std::optional<double> temperature;
  int repetitions = 5, refinements = 3, max_retries = 10;
};

int run_gen(const GenArgs& a) {
  const auto mc = material_class_from_string(a.material_class);
  if (!mc) throw UsageError("--class must be isotropic or transversely_isotropic");
  const Dataset d = load_dataset(a.dataset);

  std::unique_ptr<LlmClient> client;
  std::string secret;
  if (a.llm == "scripted") {
    if (a.script.empty()) throw UsageError("--llm scripted needs --script FILE");
    const Json j = read_json(a.script);
    if (!j.is_array()) throw InvalidInput(a.script + ": expected a JSON array of response strings");
    client = std::make_unique<ScriptedClient>(j.get<std::vector<std::string>>());
  } else {
    secret = api_key_from_env();
    if (secret.empty()) std::cerr << "gencann: warning: GENCANN_API_KEY is not set; sending no credentials\n";
    RemoteConfig rc;
    rc.base_url = a.base_url;
    rc.model = a.model;
    rc.temperature = a.temperature;
    client = std::make_unique<RemoteClient>(rc, secret);
  }

  const std::string log_file = a.log.empty() ? out_path(a.out_dir, "generation_log.jsonl") : a.log;
  std::ofstream log(log_file, std::ios::app);
  if (!log) throw IngestionError("cannot write '" + log_file + "'");
  GenConfig cfg;
  cfg.repetitions = a.repetitions;
  cfg.refinements = a.refinements;
  cfg.max_initial_retries = a.max_retries;
  cfg.log = &log;
  cfg.secret = secret;

  try {
    const GenerationResult res = run_generation(*client, d, *mc, cfg);
    write_json(out_path(a.out_dir, "best_model.json"), model_to_json(res.model, res.report));
    write_text(out_path(a.out_dir, "best_spec.cann"), dsl::serialize(res.spec));
    Json st = to_json(res.stability);
    st["runs"] = to_json(res.runs);
    st["best_repetition"] = res.best_run + 1;
    write_json(out_path(a.out_dir, "stability.json"), st);
    std::cout << "best repetition " << res.best_run + 1 << ", mean R^2 " << res.report.mean_r2 << "\n";
    print_fit(res.report, d);
    std::cout << "repetition mean " << res.stability.mean << ", variance " << res.stability.variance << "\n";
    return ok;
  } catch (const GenerationFailed& e) {
    Json st = {{"failure", e.what()}, {"runs", to_json(e.runs())}};
    write_json(out_path(a.out_dir, "stability.json"), st);
    throw;
  }
}

int run_train(const std::string& spec_file, const std::string& data_file, const std::string& out_dir) {
  const CannSpec spec = read_spec(spec_file);
  const Dataset d = load_dataset(data_file);
  try {
    const auto res = train(build(spec), d, TrainConfig::from_spec(spec));
    write_json(out_path(out_dir, "model.json"), model_to_json(res.model, res.report));
    write_json(out_path(out_dir, "fit_report.json"), to_json(res.report));
    print_fit(res.report, d);
    return ok;
  } catch (const TrainingFailure& e) {
    write_json(out_path(out_dir, "fit_report.json"), to_json(e.report()));
    throw;
  }
}

int run_eval(const std::string& model_file, const std::string& data_file, const std::string& out_dir) {
  const ConstitutiveModel m = model_from_json(read_json(model_file));
  const Dataset d = load_dataset(data_file);
  const FitReport rep = score(m, d);
  write_json(out_path(out_dir, "eval_report.json"), to_json(rep));
  const auto preds = predict_dataset(m, d);
  for (const auto& p : d.paths)
    for (int c = 0; c < int(output_components(loading_mode(d, p, p.points.front()), d.stress_columns).size()); ++c)
      write_text(out_path(out_dir, "pred_" + safe_name(p.name) + "_" + std::to_string(c + 1) + ".csv"),
                 predictions_csv(d, preds, p.name, c));
  print_fit(rep, d);
  return ok;
}

int run_cv(const std::string& spec_file, const std::string& data_file, const std::string& out_dir, unsigned threads) {
  const CannSpec spec = read_spec(spec_file);
  const Dataset d = load_dataset(data_file);
  const CvReport rep = leave_one_out_cv(spec, d, TrainConfig::from_spec(spec), threads);
  write_json(out_path(out_dir, "cv_report.json"), to_json(rep));
  for (std::size_t k = 0; k < rep.folds.size(); ++k) {
    const auto& f = rep.folds[k];
    write_json(out_path(out_dir, "cv_fold_" + std::to_string(k + 1) + "_" + safe_name(f.left_out) + ".json"),
               to_json(f));
    std::cout << f.left_out << ":";
    for (const auto& v : f.left_out_r2) std::cout << " " << (v ? detail::shortest(*v) : std::string("undefined"));
    if (f.failure) std::cout << " failed: " << *f.failure;
    std::cout << "\n";
  }
  return ok;
}

int run_plane(const std::string& model_file, double lambda_max, int n, const OracleMaterial& o,
              const std::string& out_dir) {
  const ConstitutiveModel m = model_from_json(read_json(model_file));
  const PlaneErrorField f = evaluate_plane(m, invariant_plane_grid(lambda_max, n), o);
  write_text(out_path(out_dir, "plane_error.csv"), plane_csv(f));
  write_json(out_path(out_dir, "plane_summary.json"), to_json(f));
  std::cout << "median " << f.median << ", max " << f.max << "; interior median " << f.interior_median
            << ", interior max " << f.interior_max << "\n";
  return ok;
}

int run_report(const std::string& file) {
  std::cout << read_json(file).dump(2) << "\n";
  return ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate, train and evaluate constitutive artificial neural networks"};
  app.require_subcommand(1);

  GenArgs g;
  auto* gen = app.add_subcommand("gen", "Generate a model with an LLM (writes best_model.json, stability.json)");
  gen->add_option("--dataset", g.dataset, "Dataset CSV")->required();
  gen->add_option("--class", g.material_class, "isotropic | transversely_isotropic")->required();
  gen->add_option("--llm", g.llm, "remote | scripted")->check(CLI::IsMember({"remote", "scripted"}));
  gen->add_option("--script", g.script, "JSON array of responses for --llm scripted");
  gen->add_option("--base-url", g.base_url, "Chat-completions endpoint base URL");
  gen->add_option("--model", g.model, "Model name sent to the endpoint");
  gen->add_option("--temperature", g.temperature, "Sampling temperature (omitted when unset)");
  gen->add_option("--repetitions", g.repetitions, "Independent generation runs")->check(CLI::PositiveNumber);
  gen->add_option("--refinements", g.refinements, "Refinement rounds after the first success")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--max-retries", g.max_retries, "Initial attempts per repetition")->check(CLI::PositiveNumber);
  gen->add_option("--log", g.log, "Run log (JSON lines); default OUT_DIR/generation_log.jsonl");
  gen->add_option("--out-dir", g.out_dir, "Output directory");

  std::string spec_file, data_file, model_file, out_dir = ".", report_file;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  auto* tr = app.add_subcommand("train", "Train a spec on a dataset (writes model.json, fit_report.json)");
  tr->add_option("--spec", spec_file, "Spec file")->required();
  tr->add_option("--dataset", data_file, "Dataset CSV")->required();
  tr->add_option("--out-dir", out_dir, "Output directory");

  auto* ev = app.add_subcommand("eval", "Score a model on a dataset (writes eval_report.json, pred_*.csv)");
  ev->add_option("--model", model_file, "Model JSON")->required();
  ev->add_option("--dataset", data_file, "Dataset CSV")->required();
  ev->add_option("--out-dir", out_dir, "Output directory");

  auto* cv = app.add_subcommand("cv", "Leave-one-path-out cross-validation (writes cv_report.json, cv_fold_*.json)");
  cv->add_option("--spec", spec_file, "Spec file")->required();
  cv->add_option("--dataset", data_file, "Dataset CSV")->required();
  cv->add_option("--threads", threads, "Folds trained concurrently")->check(CLI::PositiveNumber);
  cv->add_option("--out-dir", out_dir, "Output directory");

  double lambda_max = 3.0;
  int n = 40;
  OracleMaterial oracle;
  auto* pl = app.add_subcommand("plane", "Invariant-plane error against the oracle (writes plane_error.csv)");
  pl->add_option("--model", model_file, "Model JSON")->required();
  pl->add_option("--lambda-max", lambda_max, "Largest lambda1 of the grid")->required();
  pl->add_option("--n", n, "Grid points per axis")->required();
  pl->add_option("--c10", oracle.c10, "Oracle c10");
  pl->add_option("--c01", oracle.c01, "Oracle c01");
  pl->add_option("--c20", oracle.c20, "Oracle c20");
  pl->add_option("--out-dir", out_dir, "Output directory");

  auto* rp = app.add_subcommand("report", "Pretty-print a JSON artifact");
  rp->add_option("file", report_file, "JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage;
  }

  try {
    if (*gen) return run_gen(g);
    if (*tr) return run_train(spec_file, data_file, out_dir);
    if (*ev) return run_eval(model_file, data_file, out_dir);
    if (*cv) return run_cv(spec_file, data_file, out_dir, threads);
    if (*pl) return run_plane(model_file, lambda_max, n, oracle, out_dir);
    if (*rp) return run_report(report_file);
    return usage;
  } catch (const UsageError& e) {
    std::cerr << "gencann: " << e.what() << "\n";
    return usage;
  } catch (const IngestionError& e) {
    std::cerr << "gencann: " << e.what() << "\n";
    return io;
  } catch (const BuildError& e) {
    std::cerr << "gencann: " << e.what() << "\n";
    return invalid;
  } catch (const InvalidInput& e) {
    std::cerr << "gencann: " << e.what() << "\n";
    return invalid;
  } catch (const TrainingFailure& e) {
    std::cerr << "gencann: training failed: " << e.what() << "\n";
    return training;
  } catch (const GenerationFailed& e) {
    std::cerr << "gencann: generation failed: " << e.what() << "\n";
    return generation;
  } catch (const TransportError& e) {
    std::cerr << "gencann: transport error: " << e.what() << "\n";
    return transport;
  } catch (const std::exception& e) {
    std::cerr << "gencann: " << e.what() << "\n";
    return other;
  }
}
