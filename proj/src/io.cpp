#include "ordmix/io.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace ordmix {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string where(Eigen::Index line, std::size_t col, const std::string& name) {
  return "line " + std::to_string(line) + ", column " + std::to_string(col + 1) + " ('" + name + "')";
}

std::map<std::string, int> read_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open schema sidecar '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "schema sidecar '" + path + "': " + e.what());
  }
  const auto& items = j.contains("items") ? j.at("items") : j;
  if (!items.is_object()) throw Error(ErrorCode::ParseError, "schema sidecar must map item names to category counts");
  std::map<std::string, int> out;
  for (const auto& [k, v] : items.items()) {
    if (!v.is_number_integer()) throw Error(ErrorCode::ParseError, "schema entry '" + k + "' is not an integer");
    out[k] = v.get<int>();
  }
  return out;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

IngestResult ingest_csv(const std::string& path, const IngestOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");

  std::string line;
  Eigen::Index line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw Error(ErrorCode::EmptyDataset, "'" + path + "' has no header row");
  for (auto& h : header) h = trim(h);

  int weight_col = -1;
  std::set<std::string> seen;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].empty()) throw Error(ErrorCode::ParseError, "empty column name at " + where(line_no, c, ""));
    if (!seen.insert(header[c]).second)
      throw Error(ErrorCode::ParseError, "duplicate column '" + header[c] + "'");
    if (!opts.weight_column.empty() && header[c] == opts.weight_column) weight_col = static_cast<int>(c);
  }
  if (!opts.weight_column.empty() && weight_col < 0)
    throw Error(ErrorCode::SchemaMismatch, "weight column '" + opts.weight_column + "' not found");

  IngestResult res;
  std::vector<std::vector<int>> rows;
  std::vector<int> max_code(header.size(), 0);
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(header.size()) + " fields, found " +
                                             std::to_string(cells.size()));
    ++res.rows_read;
    std::vector<int> codes;
    double weight = 1.0;
    bool missing = false;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell = trim(cells[c]);
      if (cell.empty() || cell == opts.missing_token) {
        missing = true;
        continue;
      }
      if (static_cast<int>(c) == weight_col) {
        const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), weight);
        if (r.ec != std::errc() || r.ptr != cell.data() + cell.size() || !std::isfinite(weight) || weight <= 0.0)
          throw Error(ErrorCode::ParseError, "invalid weight '" + cell + "' at " + where(line_no, c, header[c]));
        continue;
      }
      int v = 0;
      const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (r.ec != std::errc() || r.ptr != cell.data() + cell.size())
        throw Error(ErrorCode::NonIntegerCell, "non-integer value '" + cell + "' at " + where(line_no, c, header[c]));
      if (v == 0)
        throw Error(ErrorCode::ParseError, "code 0 at " + where(line_no, c, header[c]) +
                                               ": codes must be 1-based; remap 0..C-1 to 1..C before ingestion");
      if (v < 0)
        throw Error(ErrorCode::ParseError, "negative code " + cell + " at " + where(line_no, c, header[c]) +
                                               "; declare it as the missing token if it encodes nonresponse");
      codes.push_back(v);
    }
    if (missing) {
      ++res.rows_dropped;
      res.dropped_lines.push_back(line_no);
      continue;
    }
    std::size_t k = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (static_cast<int>(c) == weight_col) continue;
      max_code[c] = std::max(max_code[c], codes[k++]);
    }
    rows.push_back(std::move(codes));
    if (weight_col >= 0) res.weights.push_back(weight);
  }
  if (res.rows_read == 0) throw Error(ErrorCode::EmptyDataset, "'" + path + "' has no data rows");
  if (rows.empty())
    throw Error(ErrorCode::AllRowsDropped,
                "all " + std::to_string(res.rows_read) + " rows contain a missing value");

  auto& d = res.data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<int>(c) == weight_col) continue;
    d.item_names.push_back(header[c]);
    d.category_counts.push_back(max_code[c]);
  }
  if (!opts.schema_path.empty()) {
    const auto schema = read_schema(opts.schema_path);
    for (std::size_t j = 0; j < d.item_names.size(); ++j) {
      auto it = schema.find(d.item_names[j]);
      if (it == schema.end())
        throw Error(ErrorCode::SchemaMismatch, "schema sidecar does not declare item '" + d.item_names[j] + "'");
      if (it->second < d.category_counts[j])
        throw Error(ErrorCode::SchemaMismatch, "item '" + d.item_names[j] + "' has code " +
                                                   std::to_string(d.category_counts[j]) + " above its declared " +
                                                   std::to_string(it->second) + " categories");
      d.category_counts[j] = it->second;
    }
  }
  d.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.item_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) d.values(i, j) = rows[i][j];
  d.validate();
  return res;
}

std::string dataset_csv(const OrdinalDataset& data) {
  std::ostringstream os;
  for (std::size_t j = 0; j < data.item_names.size(); ++j) os << (j ? "," : "") << data.item_names[j];
  os << '\n';
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.items(); ++j) os << (j ? "," : "") << data.values(i, j);
    os << '\n';
  }
  return os.str();
}

void write_dataset_csv(const std::string& path, const OrdinalDataset& data) { write_file_atomic(path, dataset_csv(data)); }

void write_file_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + tmp + "'");
    out << contents;
    if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot move '" + tmp + "' into place: " + ec.message());
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace ordmix
