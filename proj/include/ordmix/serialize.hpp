#pragma once

#include "ordmix/benchmark.hpp"
#include "ordmix/stability.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace ordmix {

using Json = nlohmann::ordered_json;

Json to_json(const DagStructure& g);
Json to_json(const ArchetypeDag& d);
Json to_json(const ScoreEmbedding& e);
Json to_json(const MixtureConfig& c);
Json to_json(const SelectionPlan& p);
Json to_json(const MixtureModel& m);
Json to_json(const BaselineModel& m);
Json to_json(const KCurve& c);
Json to_json(const SelectionReport& r);
Json to_json(const TierSpec& t);
Json to_json(const BenchmarkInstance& inst);  // sidecar; "items" doubles as an ingestion schema
Json to_json(const BenchmarkReport& r);
Json to_json(const BootstrapReport& r);
Json to_json(const SensitivityReport& r);

/// Overlay keys present in `j`; unknown keys throw InvalidConfig.
void update_from_json(const Json& j, MixtureConfig& c);
void update_from_json(const Json& j, SelectionPlan& p);
void update_from_json(const Json& j, TierSpec& t);

// Plot-ready tables with fixed column orders.
std::string model_comparison_csv(const SelectionReport& r);  // model,mse,delta_vs_baseline
std::string k_curve_csv(const KCurve& c);                     // k,mse,mse_sd,selected
std::string benchmark_csv(const BenchmarkReport& r);          // tier,replicate,model,metric,value
std::string benchmark_summary_csv(const BenchmarkReport& r);  // tier,model,metric,mean,sd,count
std::string bootstrap_csv(const BootstrapReport& r);
std::string sensitivity_csv(const std::vector<SensitivityReport>& reports, double reference_mse);
std::string assignments_csv(const Matrix& responsibilities, std::span<const int> labels);

}  // namespace ordmix
