#include "ordmix/runner.hpp"
#include "ordmix/checksum.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <set>

namespace fs = std::filesystem;

namespace ordmix {

namespace {

const std::set<std::string> kCommands{"fit", "select", "benchmark", "bootstrap", "sensitivity", "generate"};
const std::set<std::string> kAxes{"alpha", "item_set", "n_min", "weights"};

bool needs_input(const std::string& command) { return command != "benchmark" && command != "generate"; }

template <class T>
void take(const Json& obj, const char* key, T& field) {
  if (!obj.contains(key)) return;
  try {
    field = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidConfig, std::string("setting '") + key + "' has the wrong type");
  }
}

void reject_unknown(const Json& obj, const std::string& what, const std::set<std::string>& known) {
  if (!obj.is_object()) throw Error(ErrorCode::InvalidConfig, what + " must be a JSON object");
  for (const auto& [k, v] : obj.items())
    if (!known.count(k)) throw Error(ErrorCode::InvalidConfig, "unknown " + what + " setting '" + k + "'");
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Emitter {
public:
  explicit Emitter(fs::path dir) : dir_(std::move(dir)) {}

  void text(const std::string& name, const std::string& contents) {
    write_file_atomic((dir_ / name).string(), contents);
    outputs_.push_back({{"file", name}, {"bytes", contents.size()}, {"sha256", sha256_hex(contents)}});
  }
  void json(const std::string& name, const Json& j) { text(name, j.dump(2) + "\n"); }
  const Json& outputs() const { return outputs_; }

private:
  fs::path dir_;
  Json outputs_ = Json::array();
};

std::vector<TierSpec> configured_tiers(const RunConfig& c) {
  auto tiers = default_tiers(*c.seed);
  std::vector<TierSpec> out;
  for (auto& t : tiers) {
    if (!c.tiers.empty() && std::find(c.tiers.begin(), c.tiers.end(), t.name) == c.tiers.end()) continue;
    if (c.replications) t.replications = *c.replications;
    if (c.n) t.n = *c.n;
    if (c.tier_overrides.contains(t.name)) update_from_json(c.tier_overrides.at(t.name), t);
    t.validate();
    out.push_back(std::move(t));
  }
  for (const auto& name : c.tiers)
    if (std::none_of(out.begin(), out.end(), [&](const TierSpec& t) { return t.name == name; }))
      throw Error(ErrorCode::InvalidConfig, "unknown tier '" + name + "'");
  return out;
}

Json model_file(const ScoreEmbedding& emb, const MixtureModel& m) {
  return {{"embedding", to_json(emb)}, {"model", to_json(m)}};
}

Json dispatch(const RunConfig& c, const IngestResult* in, Emitter& out) {
  MixtureConfig mix = c.mixture;
  mix.seed = *c.seed;
  SelectionPlan plan = c.plan;
  plan.seed = *c.seed;
  plan.threads = c.threads;

  if (c.command == "fit") {
    const auto emb = fit_embedding(in->data);
    const Matrix X = transform(in->data, emb).X;
    const auto model = fit(X, mix);
    out.json("model.json", model_file(emb, model));
    out.text("assignments.csv", assignments_csv(model.responsibilities, model.assignments));
    return {{"status", fit_status_name(model.status)},
            {"active_clusters", model.active_count()},
            {"effective_k", effective_k(model, mix.effective_k_threshold)},
            {"iterations", model.trace.empty() ? 0 : model.trace.back().iteration}};
  }
  if (c.command == "select") {
    const auto rep = run_pipeline(in->data, plan, mix);
    out.json("selection.json", to_json(rep));
    out.json("model.json", model_file(rep.embedding, rep.confirmatory));
    out.text("model_comparison.csv", model_comparison_csv(rep));
    out.text("k_curve.csv", k_curve_csv(rep.curve));
    out.text("assignments.csv", assignments_csv(rep.confirmatory.responsibilities, rep.confirmatory.assignments));
    Json holdout = Json::object();
    for (const auto& s : rep.holdout) holdout[s.model] = s.mse;
    return {{"k_star", rep.curve.k_star}, {"k_bnp", rep.k_bnp}, {"holdout_mse", holdout}};
  }
  if (c.command == "benchmark") {
    BenchmarkOptions o;
    o.mixture = mix;
    o.plan = plan;
    o.select_k = c.benchmark_select_k;
    o.threads = c.threads;
    const auto rep = run_benchmark(configured_tiers(c), o);
    out.json("benchmark.json", to_json(rep));
    out.text("benchmark.csv", benchmark_csv(rep));
    out.text("benchmark_summary.csv", benchmark_summary_csv(rep));
    return {{"rows", rep.rows.size()}, {"k_star", rep.k_star}};
  }
  if (c.command == "generate") {
    int files = 0;
    for (const auto& t : configured_tiers(c))
      for (int r = 0; r < t.replications; ++r) {
        const auto inst = generate(t, r);
        const std::string stem = t.name + "_r" + std::to_string(r + 1);
        out.text(stem + ".csv", dataset_csv(inst.data));
        out.json(stem + ".json", to_json(inst));
        ++files;
      }
    return {{"instances", files}};
  }
  if (c.command == "bootstrap") {
    const auto ref = run_pipeline(in->data, plan, mix);
    BootstrapOptions o;
    o.B = c.bootstrap_b;
    o.seed = derive_seed(*c.seed, {0x626f6f74});
    o.k_mode = bootstrap_k_from_name(c.bootstrap_k);
    o.plan = plan;
    o.threads = c.threads;
    const auto rep = bootstrap_stability(in->data, ref.confirmatory, o, mix);
    Json j = to_json(rep);
    j["reference_k_star"] = ref.curve.k_star;
    j["k_mode"] = c.bootstrap_k;
    out.json("bootstrap.json", j);
    out.text("bootstrap.csv", bootstrap_csv(rep));
    return {{"k_star", ref.curve.k_star},
            {"agreement_mean", rep.agreement.mean},
            {"agreement_sd", rep.agreement.sd},
            {"mean_effective_k", rep.mean_effective_k}};
  }
  // sensitivity
  const auto ctx = make_reference(in->data, plan, mix, c.base_items);
  std::vector<SensitivityReport> reports;
  for (const auto& axis : c.axes) {
    if (axis == "alpha") reports.push_back(alpha_sweep(ctx, c.alphas));
    if (axis == "n_min") reports.push_back(n_min_sweep(ctx, c.n_mins));
    if (axis == "item_set") {
      auto variants = c.item_variants;
      if (variants.empty())
        for (const auto& name : ctx.data.item_names) variants.push_back({"drop_" + name, {}, {name}});
      reports.push_back(item_set_sweep(ctx, variants));
    }
    if (axis == "weights") {
      std::vector<double> w = in->weights;
      if (w.empty()) w.assign(static_cast<std::size_t>(ctx.data.rows()), 1.0);
      WeightResampleOptions o;
      o.R = c.weight_replicates;
      o.seed = derive_seed(*c.seed, {0x77656967});
      o.threads = c.threads;
      reports.push_back(weight_resample_refit(ctx, w, o));
    }
  }
  const double ref_mse = ctx.reference.holdout.back().mse;
  Json j = {{"reference", {{"k_star", ctx.reference.curve.k_star}, {"k_bnp", ctx.reference.k_bnp}, {"mse", ref_mse}}},
            {"axes", Json::array()}};
  for (const auto& r : reports) j["axes"].push_back(to_json(r));
  out.json("sensitivity.json", j);
  out.text("sensitivity.csv", sensitivity_csv(reports, ref_mse));
  return {{"reference_mse", ref_mse}, {"axes", c.axes}};
}

}  // namespace

void RunConfig::validate() const {
  if (!kCommands.count(command)) throw Error(ErrorCode::InvalidConfig, "unknown command '" + command + "'");
  if (!seed) throw Error(ErrorCode::InvalidConfig, "a seed is required");
  if (needs_input(command) && input.empty())
    throw Error(ErrorCode::InvalidConfig, "command '" + command + "' needs an input file");
  if (output_dir.empty()) throw Error(ErrorCode::InvalidConfig, "output directory is empty");
  if (threads < 1) throw Error(ErrorCode::InvalidConfig, "threads must be >= 1");
  if (bootstrap_b < 1) throw Error(ErrorCode::InvalidConfig, "bootstrap B must be >= 1");
  if (weight_replicates < 1) throw Error(ErrorCode::InvalidConfig, "weight replicates must be >= 1");
  for (const auto& a : axes)
    if (!kAxes.count(a)) throw Error(ErrorCode::InvalidConfig, "unknown sensitivity axis '" + a + "'");
  mixture.validate();
  plan.validate();
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig c;
  reject_unknown(j, "run", {"command", "input", "output_dir", "seed", "missing_token", "schema", "weight_column",
                            "threads", "mixture", "selection", "benchmark", "bootstrap", "sensitivity"});
  take(j, "command", c.command);
  take(j, "input", c.input);
  take(j, "output_dir", c.output_dir);
  if (j.contains("seed") && !j.at("seed").is_null()) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
      throw Error(ErrorCode::InvalidConfig, "seed must be a non-negative integer");
    if (j.at("seed").is_number_integer() && j.at("seed").get<long long>() < 0)
      throw Error(ErrorCode::InvalidConfig, "seed must be a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  take(j, "missing_token", c.ingest.missing_token);
  take(j, "schema", c.ingest.schema_path);
  take(j, "weight_column", c.ingest.weight_column);
  take(j, "threads", c.threads);
  if (j.contains("mixture")) update_from_json(j.at("mixture"), c.mixture);
  if (j.contains("selection")) update_from_json(j.at("selection"), c.plan);
  if (j.contains("benchmark")) {
    const auto& b = j.at("benchmark");
    reject_unknown(b, "benchmark", {"tiers", "replications", "n", "select_k", "tier_overrides"});
    take(b, "tiers", c.tiers);
    if (b.contains("replications") && !b.at("replications").is_null()) {
      int r = 0;
      take(b, "replications", r);
      c.replications = r;
    }
    if (b.contains("n") && !b.at("n").is_null()) {
      Eigen::Index n = 0;
      take(b, "n", n);
      c.n = n;
    }
    take(b, "select_k", c.benchmark_select_k);
    if (b.contains("tier_overrides")) c.tier_overrides = b.at("tier_overrides");
  }
  if (j.contains("bootstrap")) {
    const auto& b = j.at("bootstrap");
    reject_unknown(b, "bootstrap", {"B", "k_mode"});
    take(b, "B", c.bootstrap_b);
    take(b, "k_mode", c.bootstrap_k);
    bootstrap_k_from_name(c.bootstrap_k);
  }
  if (j.contains("sensitivity")) {
    const auto& s = j.at("sensitivity");
    reject_unknown(s, "sensitivity", {"axes", "alphas", "n_min", "item_variants", "base_items", "replicates"});
    take(s, "axes", c.axes);
    take(s, "alphas", c.alphas);
    take(s, "n_min", c.n_mins);
    take(s, "base_items", c.base_items);
    take(s, "replicates", c.weight_replicates);
    if (s.contains("item_variants")) {
      for (const auto& v : s.at("item_variants")) {
        reject_unknown(v, "item variant", {"label", "add", "remove"});
        ItemVariant iv;
        take(v, "label", iv.label);
        take(v, "add", iv.add);
        take(v, "remove", iv.remove);
        c.item_variants.push_back(std::move(iv));
      }
    }
  }
  return c;
}

Json to_json(const RunConfig& c) {
  Json variants = Json::array();
  for (const auto& v : c.item_variants) variants.push_back({{"label", v.label}, {"add", v.add}, {"remove", v.remove}});
  Json mixture = to_json(c.mixture);
  mixture.erase("seed");
  Json selection = to_json(c.plan);
  selection.erase("seed");
  return {{"command", c.command},
          {"input", c.input},
          {"output_dir", c.output_dir},
          {"seed", c.seed ? Json(*c.seed) : Json(nullptr)},
          {"missing_token", c.ingest.missing_token},
          {"schema", c.ingest.schema_path},
          {"weight_column", c.ingest.weight_column},
          {"threads", c.threads},
          {"mixture", mixture},
          {"selection", selection},
          {"benchmark",
           {{"tiers", c.tiers},
            {"replications", c.replications ? Json(*c.replications) : Json(nullptr)},
            {"n", c.n ? Json(*c.n) : Json(nullptr)},
            {"select_k", c.benchmark_select_k},
            {"tier_overrides", c.tier_overrides}}},
          {"bootstrap", {{"B", c.bootstrap_b}, {"k_mode", c.bootstrap_k}}},
          {"sensitivity",
           {{"axes", c.axes},
            {"alphas", c.alphas},
            {"n_min", c.n_mins},
            {"item_variants", variants},
            {"base_items", c.base_items},
            {"replicates", c.weight_replicates}}}};
}

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Io: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Numeric: return 4;
    case ErrorCategory::Internal: return 1;
  }
  return 1;
}

namespace {

// `rejected` carries a configuration error found before a RunConfig existed;
// the manifest then records the raw configuration text instead.
RunOutcome run_impl(const RunConfig& config, const Error* rejected, const Json& raw_config) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  RunOutcome outcome;
  Json manifest = {{"tool", "ordmix"},
                   {"version", kVersion},
                   {"command", config.command},
                   {"config", rejected ? raw_config : to_json(config)}};
  Json input = nullptr;
  Json error = nullptr;
  Json summary = nullptr;
  Emitter out(config.output_dir);
  bool dir_ok = false;

  auto fail = [&](const std::string& code, ErrorCategory cat, const std::string& message) {
    outcome.exit_code = exit_code_for(cat);
    static const char* names[] = {"config", "data", "numeric", "io", "internal"};
    error = {{"code", code},
             {"category", names[static_cast<int>(cat)]},
             {"message", message},
             {"exit_code", outcome.exit_code}};
  };

  try {
    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    if (ec || !fs::is_directory(config.output_dir))
      throw Error(ErrorCode::IoError, "cannot create output directory '" + config.output_dir + "'");
    dir_ok = true;
    if (rejected) throw *rejected;
    config.validate();
    std::optional<IngestResult> ingested;
    if (needs_input(config.command)) {
      if (!fs::is_regular_file(config.input))
        throw Error(ErrorCode::IoError, "input file '" + config.input + "' does not exist");
      input = {{"path", config.input}, {"sha256", sha256_file(config.input)}};
      ingested = ingest_csv(config.input, config.ingest);
      input["rows_read"] = ingested->rows_read;
      input["rows_dropped"] = ingested->rows_dropped;
      input["rows_used"] = ingested->data.rows();
      input["items"] = ingested->data.item_names;
    }
    summary = dispatch(config, ingested ? &*ingested : nullptr, out);
  } catch (const Error& e) {
    fail(error_code_name(e.code()), e.category(), e.what());
  } catch (const std::exception& e) {
    fail("INTERNAL", ErrorCategory::Internal, e.what());
  }

  manifest["status"] = error.is_null() ? "ok" : "error";
  manifest["error"] = error;
  manifest["input"] = input;
  manifest["outputs"] = out.outputs();
  manifest["summary"] = summary;
  manifest["started_at"] = started;
  manifest["finished_at"] = utc_now();
  manifest["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (dir_ok) {
    try {
      write_file_atomic((fs::path(config.output_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    } catch (const Error& e) {
      if (error.is_null()) fail(error_code_name(e.code()), e.category(), e.what());
    }
  }

  outcome.result = {{"status", error.is_null() ? "ok" : "error"},
                    {"exit_code", outcome.exit_code},
                    {"error", error},
                    {"output_dir", config.output_dir},
                    {"outputs", out.outputs()},
                    {"summary", summary}};
  return outcome;
}

}  // namespace

RunOutcome run(const RunConfig& config) { return run_impl(config, nullptr, nullptr); }

RunOutcome run(const std::string& command, const std::string& config_json) {
  RunConfig config;
  config.command = command;
  Json raw = config_json;
  try {
    raw = config_json.empty() ? Json::object() : Json::parse(config_json);
    config = run_config_from_json(raw);
  } catch (const Error& e) {
    if (raw.is_object() && raw.contains("output_dir") && raw["output_dir"].is_string())
      config.output_dir = raw["output_dir"].get<std::string>();
    config.command = command;
    return run_impl(config, &e, raw);
  } catch (const nlohmann::json::exception& e) {
    const Error err(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
    config.command = command;
    return run_impl(config, &err, raw);
  }
  if (!command.empty()) config.command = command;
  return run(config);
}

}  // namespace ordmix
