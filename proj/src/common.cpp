#include "ordmix/common.hpp"

namespace ordmix {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::InvalidSpec: return "INVALID_SPEC";
    case ErrorCode::InvalidVariant: return "INVALID_VARIANT";
    case ErrorCode::EmptyDataset: return "EMPTY_DATASET";
    case ErrorCode::DegenerateItem: return "DEGENERATE_ITEM";
    case ErrorCode::SchemaMismatch: return "SCHEMA_MISMATCH";
    case ErrorCode::UnseenCategory: return "UNSEEN_CATEGORY";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::NonIntegerCell: return "NON_INTEGER_CELL";
    case ErrorCode::AllRowsDropped: return "ALL_ROWS_DROPPED";
    case ErrorCode::LengthMismatch: return "LENGTH_MISMATCH";
    case ErrorCode::NodeSetMismatch: return "NODE_SET_MISMATCH";
    case ErrorCode::NoMatchedClusters: return "NO_MATCHED_CLUSTERS";
    case ErrorCode::EmptyTestSet: return "EMPTY_TEST_SET";
    case ErrorCode::DomainError: return "DOMAIN_ERROR";
    case ErrorCode::InvalidWeights: return "INVALID_WEIGHTS";
    case ErrorCode::NonFinite: return "NON_FINITE";
    case ErrorCode::IoError: return "IO_ERROR";
    case ErrorCode::Internal: return "INTERNAL";
  }
  return "INTERNAL";
}

ErrorCategory error_category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidVariant:
      return ErrorCategory::Config;
    case ErrorCode::EmptyDataset:
    case ErrorCode::DegenerateItem:
    case ErrorCode::SchemaMismatch:
    case ErrorCode::UnseenCategory:
    case ErrorCode::ParseError:
    case ErrorCode::NonIntegerCell:
    case ErrorCode::AllRowsDropped:
    case ErrorCode::LengthMismatch:
    case ErrorCode::NodeSetMismatch:
    case ErrorCode::NoMatchedClusters:
    case ErrorCode::EmptyTestSet:
      return ErrorCategory::Data;
    case ErrorCode::DomainError:
    case ErrorCode::InvalidWeights:
    case ErrorCode::NonFinite:
      return ErrorCategory::Numeric;
    case ErrorCode::IoError:
      return ErrorCategory::Io;
    case ErrorCode::Internal:
      return ErrorCategory::Internal;
  }
  return ErrorCategory::Internal;
}

namespace {
std::uint64_t splitmix(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = splitmix(base);
  for (auto t : tags) h = splitmix(h ^ splitmix(t + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace ordmix
