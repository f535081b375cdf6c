#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cmc {

enum class ErrorCode {
  // crag
  OverlappingLeaves,
  LeavesDoNotCoverImage,
  SubsetNotForest,
  AdjacencyBetweenOverlapping,
  AdjacencyNotTouching,
  InvalidCandidate,
  KeyMismatch,
  // hierarchy
  InvalidBoundary,
  NoSeeds,
  NotAdjacent,
  // features
  EmptyRegion,
  NotAnEdge,
  // costmodel
  DimensionMismatch,
  SingleClass,
  SchemaMismatch,
  // solver
  TooLarge,
  InfeasibleSolution,
  // eval
  EmptyOverlap,
  DegenerateInput,
  // synthetic / io
  PlacementFailure,
  InvalidArgument,
  Io,
  Parse,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-checkable code and, where relevant, the
/// candidate ids that triggered it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<long long> ids = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(message),
        ids_(std::move(ids)) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }
  const std::vector<long long>& ids() const noexcept { return ids_; }

 private:
  ErrorCode code_;
  std::string message_;
  std::vector<long long> ids_;
};

}  // namespace cmc
