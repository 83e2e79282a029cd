#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "factorplan/strategies.hpp"

namespace factorplan {

enum class SessionEvent { kDemoDone, kSkipEntry, kStatus };

SessionEvent session_event_from_string(const std::string& name);

// Cursor over a plan during data collection. The mutating event log is the
// source of truth: replaying it from a fresh state reproduces cursor and
// per-entry counts exactly, which load_session verifies. State is
// checkpointed after every event.
struct SessionState {
  std::string plan_path;
  std::string plan_hash;  // FNV-1a of the plan document, guards stale checkpoints
  int cursor = 0;         // == entries means the session is complete
  std::vector<int> demos_done;
  std::vector<std::string> event_log;  // "demo_done" / "skip_entry"

  bool complete(const CollectionPlan& plan) const {
    return cursor >= static_cast<int>(plan.entries.size());
  }
};

struct StepResult {
  std::string message;
  bool advanced = false;
  bool completed = false;
  int changes_instructed = 0;  // factor changes in this step's instructions
};

SessionState session_init(const CollectionPlan& plan, const std::string& plan_path,
                          const std::string& plan_hash);

// Human-readable setup instructions for the first entry (the N initial
// changes, reported separately from per-step instructions).
std::string session_setup_text(const CollectionPlan& plan, const FactorSpace& space);

// Applies one event. demo_done increments the current entry and, when its
// quota fills, advances with change instructions (the Hamming diff to the
// next entry). skip_entry abandons the current entry's remaining quota and
// advances. status only reports. Throws past the end of the plan.
StepResult session_step(SessionState& state, const CollectionPlan& plan,
                        const FactorSpace& space, SessionEvent event);

std::string session_status_text(const SessionState& state, const CollectionPlan& plan,
                                const FactorSpace& space);

nlohmann::json session_to_json(const SessionState& state);
SessionState session_from_json(const nlohmann::json& doc);

// Rebuilds state by replaying an event log against the plan.
SessionState replay_session(const CollectionPlan& plan, const std::string& plan_path,
                            const std::string& plan_hash,
                            const std::vector<std::string>& event_log);

}  // namespace factorplan
