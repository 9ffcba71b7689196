#include "doctest.h"
#include "helpers.hpp"

#include "ordmix/checksum.hpp"
#include "ordmix/io.hpp"
#include "ordmix/runner.hpp"
#include "ordmix/serialize.hpp"

#include <filesystem>

using namespace ordmix;
namespace fs = std::filesystem;

namespace {

ErrorCode ingest_error(const std::string& path, const IngestOptions& o = {}) {
  try {
    ingest_csv(path, o);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

std::string ingest_message(const std::string& path) {
  try {
    ingest_csv(path);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("csv splitting") {
  CHECK(split_csv_line("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(split_csv_line("\"x,y\",2,\"say \"\"hi\"\"\"") == std::vector<std::string>{"x,y", "2", "say \"hi\""});
  CHECK(split_csv_line("") == std::vector<std::string>{""});
}

TEST_CASE("complete-case ingestion") {
  const auto dir = testing::scratch_dir("ingest");
  const auto path = testing::write_text(dir / "d.csv",
                                        "\xEF\xBB\xBFQ1, \"Q2\" ,w\r\n"
                                        "1,2,0.5\r\n"
                                        "3,NA,1\r\n"
                                        "2,,1\r\n"
                                        " 2 ,1,2\r\n"
                                        "\r\n");
  IngestOptions o;
  o.weight_column = "w";
  const auto r = ingest_csv(path, o);
  CHECK(r.data.item_names == std::vector<std::string>{"Q1", "Q2"});
  CHECK(r.data.rows() == 2);
  CHECK(r.rows_read == 4);
  CHECK(r.rows_dropped == 2);
  CHECK(r.dropped_lines == std::vector<Eigen::Index>{3, 4});
  CHECK(r.weights == std::vector<double>{0.5, 2.0});
  CHECK(r.data.category_counts == std::vector<int>{2, 2});
  CHECK(r.data.values(1, 0) == 2);

  const auto schema = testing::write_text(dir / "s.json", R"({"items": {"Q1": 5, "Q2": 4}})");
  o.schema_path = schema;
  CHECK(ingest_csv(path, o).data.category_counts == std::vector<int>{5, 4});
  testing::write_text(dir / "s.json", R"({"Q1": 1, "Q2": 4})");
  CHECK(ingest_error(path, o) == ErrorCode::SchemaMismatch);
  testing::write_text(dir / "s.json", R"({"Q1": 3})");
  CHECK(ingest_error(path, o) == ErrorCode::SchemaMismatch);

  IngestOptions token;
  token.missing_token = "-9";
  const auto p2 = testing::write_text(dir / "e.csv", "a,b\n1,2\n-9,1\n2,1\n");
  CHECK(ingest_csv(p2, token).rows_dropped == 1);
}

TEST_CASE("ingestion failures") {
  const auto dir = testing::scratch_dir("ingest_bad");
  auto file = [&](const std::string& name, const std::string& text) { return testing::write_text(dir / name, text); };
  CHECK(ingest_error((dir / "missing.csv").string()) == ErrorCode::IoError);
  CHECK(ingest_error(file("empty.csv", "")) == ErrorCode::EmptyDataset);
  CHECK(ingest_error(file("header.csv", "a,b\n")) == ErrorCode::EmptyDataset);
  CHECK(ingest_error(file("dup.csv", "a,a\n1,2\n")) == ErrorCode::ParseError);
  CHECK(ingest_error(file("blank.csv", "a,\n1,2\n")) == ErrorCode::ParseError);
  CHECK(ingest_error(file("nonint.csv", "a,b\n1,2\n1.5,2\n")) == ErrorCode::NonIntegerCell);
  CHECK(ingest_error(file("word.csv", "a,b\n1,x\n")) == ErrorCode::NonIntegerCell);
  CHECK(ingest_error(file("zero.csv", "a,b\n0,1\n1,2\n")) == ErrorCode::ParseError);
  CHECK(ingest_error(file("neg.csv", "a,b\n-1,1\n1,2\n")) == ErrorCode::ParseError);
  CHECK(ingest_error(file("alldrop.csv", "a,b\nNA,1\n2,\n")) == ErrorCode::AllRowsDropped);
  const auto ragged = file("ragged.csv", "a,b\n1,2\n1,2,3\n");
  CHECK(ingest_error(ragged) == ErrorCode::ParseError);
  CHECK(ingest_message(ragged).find("line 3") != std::string::npos);
  CHECK(ingest_message(file("nonint2.csv", "a,b\n1,2\n2,y\n")).find("line 3") != std::string::npos);
  IngestOptions o;
  o.weight_column = "w";
  CHECK(ingest_error(file("now.csv", "a,b\n1,2\n2,1\n"), o) == ErrorCode::SchemaMismatch);
  CHECK(ingest_error(file("degen.csv", "a,b\n1,2\n1,1\n")) == ErrorCode::DegenerateItem);
}

TEST_CASE("dataset csv round trip and atomic writes") {
  const auto dir = testing::scratch_dir("roundtrip");
  std::mt19937_64 rng(4);
  const auto d = testing::random_dataset(50, 3, rng);
  const auto path = (dir / "d.csv").string();
  write_dataset_csv(path, d);
  const auto back = ingest_csv(path).data;
  CHECK(back.values == d.values);
  CHECK(back.item_names == d.item_names);
  CHECK(dataset_csv(back) == testing::read_text(path));

  write_file_atomic((dir / "x.txt").string(), "one");
  write_file_atomic((dir / "x.txt").string(), "two");
  CHECK(testing::read_text(dir / "x.txt") == "two");
  CHECK_FALSE(fs::exists(dir / "x.txt.tmp"));
  try {
    write_file_atomic((dir / "nope" / "x.txt").string(), "z");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
  CHECK(format_number(std::nan("")) == "NA");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("configuration overlays") {
  MixtureConfig c;
  update_from_json(Json::parse(R"({"k": 4, "alpha": 2.5, "max_parents": 1, "restarts": 0})"), c);
  CHECK(*c.fixed_k == 4);
  CHECK(c.alpha == 2.5);
  CHECK(c.dag.max_parents == 1);
  CHECK(c.dag.restarts == 0);
  update_from_json(Json::parse(R"({"k": null})"), c);
  CHECK_FALSE(c.fixed_k.has_value());
  CHECK_THROWS_AS(update_from_json(Json::parse(R"({"kk": 1})"), c), Error);
  CHECK_THROWS_AS(update_from_json(Json::parse(R"({"alpha": "big"})"), c), Error);

  SelectionPlan p;
  update_from_json(Json::parse(R"({"k_grid": [2, 4], "folds": 3})"), p);
  CHECK(p.k_grid == std::vector<int>{2, 4});
  CHECK(p.inner_folds == 3);

  const auto rc = run_config_from_json(Json::parse(R"({"command": "fit", "seed": 3, "mixture": {"k": 2}})"));
  CHECK(*rc.seed == 3);
  CHECK(*rc.mixture.fixed_k == 2);
  const auto again = run_config_from_json(to_json(rc));
  CHECK(to_json(again) == to_json(rc));
  try {
    run_config_from_json(Json::parse(R"({"sed": 3})"));
    FAIL("expected InvalidConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
  }
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorCategory::Config) == 2);
  CHECK(exit_code_for(ErrorCategory::Io) == 2);
  CHECK(exit_code_for(ErrorCategory::Data) == 3);
  CHECK(exit_code_for(ErrorCategory::Numeric) == 4);
  CHECK(exit_code_for(ErrorCategory::Internal) == 1);
  CHECK(error_category(ErrorCode::NonIntegerCell) == ErrorCategory::Data);
  CHECK(std::string(error_code_name(ErrorCode::AllRowsDropped)) == "ALL_ROWS_DROPPED");
}

TEST_CASE("failed runs still write a manifest") {
  const auto dir = testing::scratch_dir("runner_fail");
  auto manifest = [&](const fs::path& d) { return Json::parse(testing::read_text(d / "manifest.json")); };

  const auto a = run("fit", Json{{"output_dir", (dir / "a").string()}, {"input", "x.csv"}}.dump());
  CHECK(a.exit_code == 2);
  CHECK(manifest(dir / "a")["error"]["code"] == "INVALID_CONFIG");

  const auto b = run("fit", Json{{"output_dir", (dir / "b").string()}, {"seed", 1}, {"input", (dir / "none.csv").string()}}.dump());
  CHECK(b.exit_code == 2);
  CHECK(manifest(dir / "b")["error"]["code"] == "IO_ERROR");

  const auto bad = testing::write_text(dir / "bad.csv", "a,b\n1,2\n1,x\n");
  const auto c = run("fit", Json{{"output_dir", (dir / "c").string()}, {"seed", 1}, {"input", bad}}.dump());
  CHECK(c.exit_code == 3);
  const auto m = manifest(dir / "c");
  CHECK(m["status"] == "error");
  CHECK(m["error"]["category"] == "data");
  CHECK(m["input"]["sha256"].get<std::string>().size() == 64);

  const auto d = run("fit", Json{{"output_dir", (dir / "d").string()}, {"seed", 1}, {"bogus", 2}}.dump());
  CHECK(d.exit_code == 2);
  CHECK(manifest(dir / "d")["config"]["bogus"] == 2);

  const auto e = run("explode", Json{{"output_dir", (dir / "e").string()}, {"seed", 1}}.dump());
  CHECK(e.exit_code == 2);
  CHECK(manifest(dir / "e")["command"] == "explode");

  const auto old = fs::current_path();
  fs::current_path(dir);
  const auto f = run("fit", "{not json");
  fs::current_path(old);
  CHECK(f.exit_code == 2);
  CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("fit run artifacts") {
  const auto dir = testing::scratch_dir("runner_fit");
  std::mt19937_64 rng(9);
  const auto d = testing::random_dataset(300, 4, rng);
  const auto input = (dir / "in.csv").string();
  write_dataset_csv(input, d);
  const auto r = run("fit", Json{{"output_dir", (dir / "out").string()}, {"seed", 2}, {"input", input},
                                 {"mixture", {{"k", 2}, {"restarts", 1}}}}
                                .dump());
  REQUIRE(r.exit_code == 0);
  CHECK(fs::exists(dir / "out" / "model.json"));
  const auto assign = testing::read_text(dir / "out" / "assignments.csv");
  CHECK(assign.rfind("row,cluster,max_responsibility\n", 0) == 0);
  const auto m = Json::parse(testing::read_text(dir / "out" / "manifest.json"));
  CHECK(m["status"] == "ok");
  CHECK(m["version"] == kVersion);
  for (const auto& o : m["outputs"]) {
    const auto text = testing::read_text(dir / "out" / o["file"].get<std::string>());
    CHECK(o["bytes"] == text.size());
    CHECK(o["sha256"] == sha256_hex(text));
  }
  for (const auto& key : manifest_time_fields()) CHECK(m.contains(key));
}
