#include "ordmix/ordmix.h"
#include "ordmix/metrics.hpp"
#include "ordmix/runner.hpp"

#include <cstdlib>
#include <cstring>

struct ordmix_dataset {
  ordmix::OrdinalDataset data;
};

struct ordmix_model {
  ordmix::ScoreEmbedding embedding;
  ordmix::MixtureModel model;
};

namespace {

thread_local std::string g_last_error;

constexpr int kLastCode = static_cast<int>(ordmix::ErrorCode::Internal);

int status_of(ordmix::ErrorCode c) { return static_cast<int>(c) + 2; }

int fail(int status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Translates exceptions into status codes at the boundary.
template <class Fn>
int guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return ORDMIX_OK;
  } catch (const ordmix::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ORDMIX_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ORDMIX_INTERNAL, e.what());
  } catch (...) {
    return fail(ORDMIX_INTERNAL, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int status_from_name(const std::string& name) {
  for (int c = 0; c <= kLastCode; ++c)
    if (name == ordmix::error_code_name(static_cast<ordmix::ErrorCode>(c))) return c + 2;
  return ORDMIX_INTERNAL;
}

}  // namespace

extern "C" {

const char* ordmix_version(void) { return ordmix::kVersion; }

const char* ordmix_status_name(int status) {
  if (status == ORDMIX_OK) return "OK";
  if (status == ORDMIX_INVALID_ARGUMENT) return "INVALID_ARGUMENT";
  if (status >= 2 && status <= kLastCode + 2) return ordmix::error_code_name(static_cast<ordmix::ErrorCode>(status - 2));
  return "UNKNOWN";
}

int ordmix_exit_code(int status) {
  if (status == ORDMIX_OK) return 0;
  if (status == ORDMIX_INVALID_ARGUMENT) return 2;
  if (status >= 2 && status <= kLastCode + 2)
    return ordmix::exit_code_for(ordmix::error_category(static_cast<ordmix::ErrorCode>(status - 2)));
  return 1;
}

const char* ordmix_last_error(void) { return g_last_error.c_str(); }

void ordmix_string_free(char* s) { std::free(s); }

int ordmix_dataset_from_csv(const char* path, const char* options_json, ordmix_dataset** out) {
  if (!path || !out) return fail(ORDMIX_INVALID_ARGUMENT, "path and out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    ordmix::IngestOptions opts;
    if (options_json) {
      ordmix::Json j;
      try {
        j = ordmix::Json::parse(options_json);
      } catch (const nlohmann::json::exception& e) {
        throw ordmix::Error(ordmix::ErrorCode::InvalidConfig, std::string("options are not valid JSON: ") + e.what());
      }
      for (const auto& [k, v] : j.items()) {
        if (!v.is_string()) throw ordmix::Error(ordmix::ErrorCode::InvalidConfig, "option '" + k + "' must be a string");
        if (k == "missing_token") opts.missing_token = v.get<std::string>();
        else if (k == "schema") opts.schema_path = v.get<std::string>();
        else if (k == "weight_column") opts.weight_column = v.get<std::string>();
        else throw ordmix::Error(ordmix::ErrorCode::InvalidConfig, "unknown option '" + k + "'");
      }
    }
    auto res = ordmix::ingest_csv(path, opts);
    *out = new ordmix_dataset{std::move(res.data)};
  });
}

int ordmix_dataset_from_codes(const int32_t* codes, size_t rows, size_t items, const char* const* names,
                              const int32_t* category_counts, ordmix_dataset** out) {
  if (!out || !names || (!codes && rows * items > 0)) return fail(ORDMIX_INVALID_ARGUMENT, "NULL argument");
  *out = nullptr;
  return guarded([&] {
    ordmix::OrdinalDataset d;
    d.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(items));
    std::vector<int> max_code(items, 0);
    for (size_t i = 0; i < rows; ++i)
      for (size_t j = 0; j < items; ++j) {
        d.values(i, j) = codes[i * items + j];
        max_code[j] = std::max(max_code[j], static_cast<int>(codes[i * items + j]));
      }
    for (size_t j = 0; j < items; ++j) {
      if (!names[j]) throw ordmix::Error(ordmix::ErrorCode::InvalidConfig, "item name is NULL");
      d.item_names.emplace_back(names[j]);
      d.category_counts.push_back(category_counts ? category_counts[j] : max_code[j]);
    }
    d.validate();
    *out = new ordmix_dataset{std::move(d)};
  });
}

int ordmix_dataset_shape(const ordmix_dataset* data, size_t* rows, size_t* items) {
  if (!data) return fail(ORDMIX_INVALID_ARGUMENT, "dataset is NULL");
  if (rows) *rows = static_cast<size_t>(data->data.rows());
  if (items) *items = static_cast<size_t>(data->data.items());
  return ORDMIX_OK;
}

void ordmix_dataset_free(ordmix_dataset* data) { delete data; }

int ordmix_fit(const ordmix_dataset* data, const char* config_json, ordmix_model** out) {
  if (!data || !out) return fail(ORDMIX_INVALID_ARGUMENT, "dataset and out must not be NULL");
  *out = nullptr;
  return guarded([&] {
    ordmix::MixtureConfig cfg;
    if (config_json) {
      ordmix::Json j;
      try {
        j = ordmix::Json::parse(config_json);
      } catch (const nlohmann::json::exception& e) {
        throw ordmix::Error(ordmix::ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
      }
      if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
        j.erase("seed");
      }
      ordmix::update_from_json(j, cfg);
    }
    cfg.validate();
    auto m = std::make_unique<ordmix_model>();
    m->embedding = ordmix::fit_embedding(data->data);
    m->model = ordmix::fit(ordmix::transform(data->data, m->embedding).X, cfg);
    *out = m.release();
  });
}

int ordmix_model_components(const ordmix_model* model, size_t* components, size_t* active) {
  if (!model) return fail(ORDMIX_INVALID_ARGUMENT, "model is NULL");
  if (components) *components = static_cast<size_t>(model->model.components());
  if (active) *active = static_cast<size_t>(model->model.active_count());
  return ORDMIX_OK;
}

int ordmix_model_assignments(const ordmix_model* model, int32_t* labels, size_t n) {
  if (!model || !labels) return fail(ORDMIX_INVALID_ARGUMENT, "NULL argument");
  const auto& a = model->model.assignments;
  if (n != a.size()) return fail(ORDMIX_LENGTH_MISMATCH, "buffer length differs from the row count");
  std::copy(a.begin(), a.end(), labels);
  return ORDMIX_OK;
}

int ordmix_model_to_json(const ordmix_model* model, char** out_json) {
  if (!model || !out_json) return fail(ORDMIX_INVALID_ARGUMENT, "NULL argument");
  *out_json = nullptr;
  return guarded([&] {
    const ordmix::Json j = {{"embedding", ordmix::to_json(model->embedding)}, {"model", ordmix::to_json(model->model)}};
    *out_json = dup_string(j.dump());
  });
}

void ordmix_model_free(ordmix_model* model) { delete model; }

int ordmix_normal_quantile(double p, double* out) {
  if (!out) return fail(ORDMIX_INVALID_ARGUMENT, "out is NULL");
  return guarded([&] { *out = ordmix::normal_quantile(p); });
}

int ordmix_ari(const int32_t* a, const int32_t* b, size_t n, double* out) {
  if ((!a || !b) && n > 0) return fail(ORDMIX_INVALID_ARGUMENT, "NULL label buffer");
  if (!out) return fail(ORDMIX_INVALID_ARGUMENT, "out is NULL");
  return guarded([&] { *out = ordmix::ari({a, n}, {b, n}); });
}

int ordmix_nmi(const int32_t* a, const int32_t* b, size_t n, double* out) {
  if ((!a || !b) && n > 0) return fail(ORDMIX_INVALID_ARGUMENT, "NULL label buffer");
  if (!out) return fail(ORDMIX_INVALID_ARGUMENT, "out is NULL");
  return guarded([&] { *out = ordmix::nmi({a, n}, {b, n}); });
}

int ordmix_run(const char* command, const char* config_json, char** result_json) {
  if (result_json) *result_json = nullptr;
  int status = ORDMIX_OK;
  const int guard = guarded([&] {
    const auto outcome = ordmix::run(command ? command : "", config_json ? config_json : "");
    if (outcome.exit_code != 0) {
      const auto& err = outcome.result.at("error");
      status = status_from_name(err.value("code", "INTERNAL"));
      g_last_error = err.value("message", "");
    }
    if (result_json) *result_json = dup_string(outcome.result.dump(2));
  });
  return guard != ORDMIX_OK ? guard : status;
}

}  // extern "C"
