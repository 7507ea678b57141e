#pragma once

// Trajectory formalism for multi-turn tool use: tools, actions, observations,
// steps, format validation, rule-violation counting, and the mask-annotated
// training template.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rltr {

using Value = std::int64_t;

/// True for non-empty [A-Za-z0-9_] tokens. Tool names, slots and query ids
/// must be identifiers so the template grammar stays unambiguous.
bool is_identifier(std::string_view s) noexcept;

struct ToolSpec {
  std::string name;
  std::vector<std::string> arg_slots;
  std::string description;
};

class ToolRegistry {
 public:
  explicit ToolRegistry(std::vector<ToolSpec> tools);

  const std::vector<ToolSpec>& tools() const noexcept { return tools_; }
  std::size_t size() const noexcept { return tools_.size(); }

  const ToolSpec* find(std::string_view name) const noexcept;
  bool has_slot(std::string_view tool, std::string_view slot) const noexcept;

 private:
  std::vector<ToolSpec> tools_;
};

struct ToolCall {
  std::string tool;
  std::string arg;
  bool operator==(const ToolCall&) const = default;
};

struct Answer {
  bool operator==(const Answer&) const = default;
};

using Action = std::variant<ToolCall, Answer>;

inline bool is_answer(const Action& a) noexcept { return std::holds_alternative<Answer>(a); }

struct Fact {
  std::string slot;
  Value value = 0;
  bool operator==(const Fact&) const = default;
};

struct ComputeResult {
  Value value = 0;
  bool operator==(const ComputeResult&) const = default;
};

enum class ToolErrorCode { unknown_slot, missing_operands, bad_tool };

struct ToolError {
  ToolErrorCode code = ToolErrorCode::bad_tool;
  bool operator==(const ToolError&) const = default;
};

using Observation = std::variant<Fact, ComputeResult, ToolError>;

std::string_view to_string(ToolErrorCode code) noexcept;
std::optional<ToolErrorCode> parse_error_code(std::string_view s) noexcept;

struct Step {
  std::size_t index = 0;
  Action action;
  std::optional<Observation> observation;  // absent iff action is Answer
  bool operator==(const Step&) const = default;
};

struct Trajectory {
  std::string query_id;
  std::vector<double> query_features;
  std::vector<Step> steps;
  bool terminated = false;

  /// Index of the last step. Undefined for an empty trajectory.
  std::size_t terminal_index() const noexcept { return steps.empty() ? 0 : steps.size() - 1; }
  bool operator==(const Trajectory&) const = default;
};

enum class FormatError {
  none,
  empty,
  missing_answer,
  answer_not_last,
  unknown_tool,
  unknown_slot,
  index_gap,
  observation_mismatch,
  terminated_mismatch,
};

std::string_view to_string(FormatError e) noexcept;

struct FormatVerdict {
  FormatError reason = FormatError::none;
  bool valid() const noexcept { return reason == FormatError::none; }
  static FormatVerdict ok() { return {}; }
  static FormatVerdict invalid(FormatError e) { return {e}; }
};

/// Checks the registry-independent invariants: contiguous indices, at most one
/// Answer which must be last, observation present iff ToolCall, terminated
/// flag consistent with the last action. An empty or truncated trajectory is
/// structurally fine.
FormatVerdict check_structure(const Trajectory& traj);

FormatVerdict validate_format(const Trajectory& traj, const ToolRegistry& registry);

/// Number of t >= 1 with action_t == action_{t-1}.
std::size_t repetition_count(const Trajectory& traj);

/// Number of steps whose observation is a ToolError.
std::size_t error_count(const Trajectory& traj);

enum class SegmentKind { scaffold, action, observation, terminal };

struct TemplateSegment {
  std::string text;
  bool trainable = false;
  SegmentKind kind = SegmentKind::scaffold;
  bool operator==(const TemplateSegment&) const = default;
};

class TemplateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& what);
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Serializes a trajectory into template segments. Action and terminal spans
/// are trainable; scaffolding and every observation span are masked.
/// Throws TemplateError on a structurally malformed trajectory.
std::vector<TemplateSegment> render_training_template(const Trajectory& traj);

std::string concat_segments(const std::vector<TemplateSegment>& segments);

inline std::string render_text(const Trajectory& traj) {
  return concat_segments(render_training_template(traj));
}

/// Inverse of render_text. Throws ParseError (with byte offset) on malformed
/// text or a tool name the registry does not know.
Trajectory parse_template(std::string_view text, const ToolRegistry& registry);

}  // namespace rltr
