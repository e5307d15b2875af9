#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "humanizer/model.hpp"

namespace humanizer {

struct ExternalScorerOptions {
  std::string command;
  std::chrono::milliseconds timeout{30000};
};

/// Conditional model served by a child process over newline-delimited JSON
/// on stdin/stdout: one request per line {"seq": "<residues, '#' = MASK>"},
/// one response per line {"logits": [[20 floats] x L]}, natural-log values in
/// fixed alphabet column order.
///
/// One child serves requests serially; this class is not thread-safe. Spawn
/// one instance per worker for concurrent use (generate_batch does this via
/// its model provider).
class ExternalScorerModel : public ConditionalSequenceModel {
 public:
  explicit ExternalScorerModel(ExternalScorerOptions options);
  ~ExternalScorerModel() override;

  ExternalScorerModel(const ExternalScorerModel&) = delete;
  ExternalScorerModel& operator=(const ExternalScorerModel&) = delete;

  LogitsMatrix score(const AntibodySequence& seq) const override;

 private:
  struct Child;

  void ensure_spawned() const;

  ExternalScorerOptions options_;
  mutable std::unique_ptr<Child> child_;
};

}  // namespace humanizer
