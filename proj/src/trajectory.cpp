#include "rltr/trajectory.hpp"

#include <algorithm>
#include <unordered_set>

namespace rltr {

bool is_identifier(std::string_view s) noexcept {
  if (s.empty()) {
    return false;
  }
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  });
}

ToolRegistry::ToolRegistry(std::vector<ToolSpec> tools) : tools_(std::move(tools)) {
  if (tools_.empty()) {
    throw std::invalid_argument("tool registry must contain at least one tool");
  }
  std::unordered_set<std::string> names;
  for (const auto& t : tools_) {
    if (!is_identifier(t.name)) {
      throw std::invalid_argument("tool name is not an identifier: '" + t.name + "'");
    }
    if (!names.insert(t.name).second) {
      throw std::invalid_argument("duplicate tool name: " + t.name);
    }
    if (t.arg_slots.empty()) {
      throw std::invalid_argument("tool has no argument slots: " + t.name);
    }
    for (const auto& s : t.arg_slots) {
      if (!is_identifier(s)) {
        throw std::invalid_argument("slot of tool " + t.name + " is not an identifier: '" + s + "'");
      }
    }
  }
}

const ToolSpec* ToolRegistry::find(std::string_view name) const noexcept {
  for (const auto& t : tools_) {
    if (t.name == name) {
      return &t;
    }
  }
  return nullptr;
}

bool ToolRegistry::has_slot(std::string_view tool, std::string_view slot) const noexcept {
  const auto* spec = find(tool);
  if (spec == nullptr) {
    return false;
  }
  return std::find(spec->arg_slots.begin(), spec->arg_slots.end(), slot) != spec->arg_slots.end();
}

std::string_view to_string(ToolErrorCode code) noexcept {
  switch (code) {
    case ToolErrorCode::unknown_slot:
      return "unknown_slot";
    case ToolErrorCode::missing_operands:
      return "missing_operands";
    case ToolErrorCode::bad_tool:
      return "bad_tool";
  }
  return "bad_tool";
}

std::optional<ToolErrorCode> parse_error_code(std::string_view s) noexcept {
  for (auto c : {ToolErrorCode::unknown_slot, ToolErrorCode::missing_operands, ToolErrorCode::bad_tool}) {
    if (to_string(c) == s) {
      return c;
    }
  }
  return std::nullopt;
}

std::string_view to_string(FormatError e) noexcept {
  switch (e) {
    case FormatError::none:
      return "none";
    case FormatError::empty:
      return "empty";
    case FormatError::missing_answer:
      return "missing_answer";
    case FormatError::answer_not_last:
      return "answer_not_last";
    case FormatError::unknown_tool:
      return "unknown_tool";
    case FormatError::unknown_slot:
      return "unknown_slot";
    case FormatError::index_gap:
      return "index_gap";
    case FormatError::observation_mismatch:
      return "observation_mismatch";
    case FormatError::terminated_mismatch:
      return "terminated_mismatch";
  }
  return "none";
}

FormatVerdict check_structure(const Trajectory& traj) {
  const auto& steps = traj.steps;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    if (s.index != i) {
      return FormatVerdict::invalid(FormatError::index_gap);
    }
    if (is_answer(s.action) && i + 1 != steps.size()) {
      return FormatVerdict::invalid(FormatError::answer_not_last);
    }
    if (s.observation.has_value() == is_answer(s.action)) {
      return FormatVerdict::invalid(FormatError::observation_mismatch);
    }
  }
  const bool ends_with_answer = !steps.empty() && is_answer(steps.back().action);
  if (traj.terminated != ends_with_answer) {
    return FormatVerdict::invalid(FormatError::terminated_mismatch);
  }
  return FormatVerdict::ok();
}

FormatVerdict validate_format(const Trajectory& traj, const ToolRegistry& registry) {
  if (traj.steps.empty()) {
    return FormatVerdict::invalid(FormatError::empty);
  }
  if (auto v = check_structure(traj); !v.valid()) {
    return v;
  }
  for (const auto& s : traj.steps) {
    if (const auto* call = std::get_if<ToolCall>(&s.action)) {
      if (registry.find(call->tool) == nullptr) {
        return FormatVerdict::invalid(FormatError::unknown_tool);
      }
      if (!registry.has_slot(call->tool, call->arg)) {
        return FormatVerdict::invalid(FormatError::unknown_slot);
      }
    }
  }
  if (!is_answer(traj.steps.back().action)) {
    return FormatVerdict::invalid(FormatError::missing_answer);
  }
  return FormatVerdict::ok();
}

std::size_t repetition_count(const Trajectory& traj) {
  std::size_t n = 0;
  for (std::size_t t = 1; t < traj.steps.size(); ++t) {
    if (traj.steps[t].action == traj.steps[t - 1].action) {
      ++n;
    }
  }
  return n;
}

std::size_t error_count(const Trajectory& traj) {
  return static_cast<std::size_t>(std::count_if(traj.steps.begin(), traj.steps.end(), [](const Step& s) {
    return s.observation.has_value() && std::holds_alternative<ToolError>(*s.observation);
  }));
}

}  // namespace rltr
