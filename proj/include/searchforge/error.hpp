// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sf {

enum class ErrorCode {
  // reasoning graph
  DuplicateNode,
  DanglingEdge,
  CycleInDag,
  SelfLoop,
  UnknownNode,
  // complexity metrics
  ForeignVertex,
  GraphTooLarge,
  Timeout,
  Overflow,
  UniverseTooLarge,
  Uncoverable,
  // synthesis
  SizeRangeInfeasible,
  NoEligibleNode,
  MissingTemplate,
  AnswerLeakage,
  MissingComplexityReport,
  PluginFailure,
  // verifier
  EnvironmentUnreachable,
  MissingPassRate,
  // sim env
  EmptyCorpus,
  EmptyQuery,
  TemplateExhaustion,
  InsufficientDistractors,
  PortInUse,
  // trajectory
  AlreadyFinalized,
  UnknownTool,
  QuestionAloneExceedsBudget,
  MalformedRecord,
  // grpo
  DegenerateGroup,
  MissingRatios,
  AllMasked,
  // generic
  InvalidArgument,
  ConfigInvalid,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sf
