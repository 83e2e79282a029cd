#include "factorplan/session.hpp"

#include <sstream>

#include "factorplan/errors.hpp"

namespace factorplan {

namespace {

std::string value_id(const FactorSpace& space, int factor, int value) {
  return space.factor(factor).values[static_cast<std::size_t>(value)].id;
}

// "change <factor>: <from> -> <to>" per differing factor.
std::string change_instructions(const FactorConfig& from, const FactorConfig& to,
                                const FactorSpace& space, int* changes) {
  std::ostringstream out;
  int count = 0;
  for (int i = 0; i < space.num_factors(); ++i) {
    if (from[i] == to[i]) continue;
    ++count;
    out << "change " << space.factor(i).name << ": " << value_id(space, i, from[i])
        << " -> " << value_id(space, i, to[i]) << "\n";
  }
  if (changes) *changes = count;
  return out.str();
}

std::string entry_summary(const SessionState& state, const CollectionPlan& plan,
                          const FactorSpace& space) {
  const auto index = static_cast<std::size_t>(state.cursor);
  const PlanEntry& entry = plan.entries[index];
  std::ostringstream out;
  out << "entry " << state.cursor + 1 << "/" << plan.entries.size() << ", config =";
  for (int i = 0; i < space.num_factors(); ++i) {
    out << ' ' << space.factor(i).name << '=' << value_id(space, i, entry.config[i]);
  }
  out << ", " << state.demos_done[index] << "/" << entry.demos << " demos";
  return out.str();
}

void apply_event(SessionState& state, const CollectionPlan& plan, SessionEvent event) {
  if (state.complete(plan)) {
    throw ValidationError("session is complete; no further steps are possible");
  }
  const auto index = static_cast<std::size_t>(state.cursor);
  switch (event) {
    case SessionEvent::kDemoDone:
      ++state.demos_done[index];
      if (state.demos_done[index] >= plan.entries[index].demos) {
        ++state.cursor;
      }
      break;
    case SessionEvent::kSkipEntry:
      ++state.cursor;
      break;
    case SessionEvent::kStatus:
      break;
  }
}

}  // namespace

SessionEvent session_event_from_string(const std::string& name) {
  if (name == "demo_done") return SessionEvent::kDemoDone;
  if (name == "skip_entry") return SessionEvent::kSkipEntry;
  if (name == "status") return SessionEvent::kStatus;
  throw ValidationError("unknown session event '" + name +
                        "' (expected demo_done, skip_entry, or status)");
}

SessionState session_init(const CollectionPlan& plan, const std::string& plan_path,
                          const std::string& plan_hash) {
  if (plan.entries.empty()) {
    throw ValidationError("cannot start a session on an empty plan");
  }
  SessionState state;
  state.plan_path = plan_path;
  state.plan_hash = plan_hash;
  state.cursor = 0;
  state.demos_done.assign(plan.entries.size(), 0);
  return state;
}

std::string session_setup_text(const CollectionPlan& plan, const FactorSpace& space) {
  std::ostringstream out;
  out << "initial setup (" << space.num_factors() << " factor changes):\n";
  const FactorConfig& first = plan.entries.front().config;
  for (int i = 0; i < space.num_factors(); ++i) {
    out << "set " << space.factor(i).name << ": " << value_id(space, i, first[i]) << "\n";
  }
  out << "collect " << plan.entries.front().demos << " demos for entry 1/"
      << plan.entries.size() << "\n";
  return out.str();
}

StepResult session_step(SessionState& state, const CollectionPlan& plan,
                        const FactorSpace& space, SessionEvent event) {
  if (state.demos_done.size() != plan.entries.size()) {
    throw ValidationError("checkpoint does not match the plan (entry count differs)");
  }
  StepResult result;
  if (event == SessionEvent::kStatus) {
    result.message = session_status_text(state, plan, space);
    return result;
  }

  const int before = state.cursor;
  apply_event(state, plan, event);
  state.event_log.push_back(event == SessionEvent::kDemoDone ? "demo_done" : "skip_entry");

  std::ostringstream out;
  if (state.cursor != before) {
    result.advanced = true;
    if (state.complete(plan)) {
      result.completed = true;
      out << "session complete (" << plan.entries.size() << " entries)\n";
    } else {
      const FactorConfig& from =
          plan.entries[static_cast<std::size_t>(before)].config;
      const FactorConfig& to =
          plan.entries[static_cast<std::size_t>(state.cursor)].config;
      out << change_instructions(from, to, space, &result.changes_instructed);
      out << entry_summary(state, plan, space) << "\n";
    }
  } else {
    out << entry_summary(state, plan, space) << "\n";
  }
  result.message = out.str();
  return result;
}

std::string session_status_text(const SessionState& state, const CollectionPlan& plan,
                                const FactorSpace& space) {
  if (state.complete(plan)) {
    return "session complete (" + std::to_string(plan.entries.size()) + " entries)\n";
  }
  return entry_summary(state, plan, space) + "\n";
}

nlohmann::json session_to_json(const SessionState& state) {
  nlohmann::json doc;
  doc["plan_path"] = state.plan_path;
  doc["plan_hash"] = state.plan_hash;
  doc["cursor"] = state.cursor;
  doc["demos_done"] = state.demos_done;
  doc["event_log"] = state.event_log;
  return doc;
}

SessionState session_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw ValidationError("session checkpoint: expected a JSON object");
  }
  for (const char* key : {"plan_path", "plan_hash", "cursor", "demos_done", "event_log"}) {
    if (!doc.contains(key)) {
      throw ValidationError(std::string("session checkpoint: missing field '") + key + "'");
    }
  }
  SessionState state;
  try {
    state.plan_path = doc["plan_path"].get<std::string>();
    state.plan_hash = doc["plan_hash"].get<std::string>();
    state.cursor = doc["cursor"].get<int>();
    state.demos_done = doc["demos_done"].get<std::vector<int>>();
    state.event_log = doc["event_log"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("session checkpoint: malformed field: ") + e.what());
  }
  if (state.cursor < 0 || state.cursor > static_cast<int>(state.demos_done.size())) {
    throw ValidationError("session checkpoint: cursor out of range");
  }
  return state;
}

SessionState replay_session(const CollectionPlan& plan, const std::string& plan_path,
                            const std::string& plan_hash,
                            const std::vector<std::string>& event_log) {
  SessionState state = session_init(plan, plan_path, plan_hash);
  for (const std::string& name : event_log) {
    const SessionEvent event = session_event_from_string(name);
    if (event == SessionEvent::kStatus) continue;
    apply_event(state, plan, event);
    state.event_log.push_back(name);
  }
  return state;
}

}  // namespace factorplan
