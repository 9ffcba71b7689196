#pragma once

#include "ordmix/embedding.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ordmix {

struct IngestOptions {
  std::string missing_token = "NA";  // empty cells are always missing
  std::string schema_path;           // optional JSON sidecar: {"items": {"Q1": 4, ...}}
  std::string weight_column;         // optional numeric column kept out of the items
};

struct IngestResult {
  OrdinalDataset data;
  std::vector<double> weights;  // one per kept row when a weight column is declared
  Eigen::Index rows_read = 0;
  Eigen::Index rows_dropped = 0;
  std::vector<Eigen::Index> dropped_lines;  // 1-based file line numbers
};

/// Complete-case CSV ingestion with a header row of item names and 1-based
/// integer codes. Throws IoError, ParseError, NonIntegerCell, AllRowsDropped,
/// EmptyDataset or SchemaMismatch.
IngestResult ingest_csv(const std::string& path, const IngestOptions& opts = {});

/// Split one CSV record; double quotes group fields and "" escapes a quote.
std::vector<std::string> split_csv_line(const std::string& line);

std::string dataset_csv(const OrdinalDataset& data);
void write_dataset_csv(const std::string& path, const OrdinalDataset& data);

/// Byte-for-byte write through a temporary file and rename. Throws IoError.
void write_file_atomic(const std::string& path, const std::string& contents);

/// Shortest round-trip text for a double; "NA" for NaN.
std::string format_number(double v);

}  // namespace ordmix
