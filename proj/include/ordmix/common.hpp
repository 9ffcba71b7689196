#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace ordmix {

// Row-major so that per-respondent rows are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class ErrorCode {
  InvalidConfig,
  InvalidSpec,
  InvalidVariant,
  EmptyDataset,
  DegenerateItem,
  SchemaMismatch,
  UnseenCategory,
  ParseError,
  NonIntegerCell,
  AllRowsDropped,
  LengthMismatch,
  NodeSetMismatch,
  NoMatchedClusters,
  EmptyTestSet,
  DomainError,
  InvalidWeights,
  NonFinite,
  IoError,
  Internal,
};

enum class ErrorCategory { Config, Data, Numeric, Io, Internal };

const char* error_code_name(ErrorCode code) noexcept;
ErrorCategory error_category(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return error_category(code_); }

private:
  ErrorCode code_;
};

// Stateless seed mixing (splitmix64 finalizer) so that every independent job
// (fold, replicate, tier) gets a reproducible stream regardless of scheduling.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept;

}  // namespace ordmix
