#include "rltr/trajectory.hpp"

#include <charconv>
#include <cstring>

// Template grammar:
//
//   <query id=ID features=F,F,...>\n
//   <turn 0><act>tool(arg)</act><obs>fact slot=V</obs>\n
//   <turn 1><act>tool(arg)</act><obs>result V</obs>\n
//   <turn 2><act>tool(arg)</act><obs>error code</obs>\n
//   <turn 3><act>ANSWER</act><answer/>
//
// The query header is folded into the scaffold segment of turn 0.

namespace rltr {

namespace {

constexpr std::string_view kAnswerToken = "ANSWER";

void append_double(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::string header(const Trajectory& traj) {
  std::string h = "<query id=" + traj.query_id + " features=";
  for (std::size_t i = 0; i < traj.query_features.size(); ++i) {
    if (i > 0) {
      h += ',';
    }
    append_double(h, traj.query_features[i]);
  }
  h += ">\n";
  return h;
}

std::string observation_text(const Observation& obs) {
  struct Visitor {
    std::string operator()(const Fact& f) const { return "fact " + f.slot + "=" + std::to_string(f.value); }
    std::string operator()(const ComputeResult& r) const { return "result " + std::to_string(r.value); }
    std::string operator()(const ToolError& e) const { return "error " + std::string(to_string(e.code)); }
  };
  return "<obs>" + std::visit(Visitor{}, obs) + "</obs>\n";
}

void require_token(const std::string& s, const char* what) {
  if (!is_identifier(s)) {
    throw TemplateError(std::string(what) + " is not an identifier: '" + s + "'");
  }
}

}  // namespace

ParseError::ParseError(std::size_t position, const std::string& what)
    : std::runtime_error("parse error at byte " + std::to_string(position) + ": " + what), position_(position) {}

std::vector<TemplateSegment> render_training_template(const Trajectory& traj) {
  if (auto v = check_structure(traj); !v.valid()) {
    throw TemplateError("cannot render malformed trajectory: " + std::string(to_string(v.reason)));
  }
  require_token(traj.query_id, "query id");

  std::vector<TemplateSegment> segs;
  segs.reserve(3 * traj.steps.size() + 1);
  if (traj.steps.empty()) {
    segs.push_back({header(traj), false, SegmentKind::scaffold});
    return segs;
  }
  for (const auto& step : traj.steps) {
    std::string scaffold = step.index == 0 ? header(traj) : std::string{};
    scaffold += "<turn " + std::to_string(step.index) + ">";
    segs.push_back({std::move(scaffold), false, SegmentKind::scaffold});

    if (const auto* call = std::get_if<ToolCall>(&step.action)) {
      require_token(call->tool, "tool name");
      require_token(call->arg, "tool argument");
      segs.push_back({"<act>" + call->tool + "(" + call->arg + ")</act>", true, SegmentKind::action});
      if (const auto* fact = std::get_if<Fact>(&*step.observation)) {
        require_token(fact->slot, "fact slot");
      }
      segs.push_back({observation_text(*step.observation), false, SegmentKind::observation});
    } else {
      segs.push_back({"<act>" + std::string(kAnswerToken) + "</act>", true, SegmentKind::action});
      segs.push_back({"<answer/>", true, SegmentKind::terminal});
    }
  }
  return segs;
}

std::string concat_segments(const std::vector<TemplateSegment>& segments) {
  std::string out;
  for (const auto& s : segments) {
    out += s.text;
  }
  return out;
}

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool at_end() const noexcept { return pos_ >= text_.size(); }
  std::size_t pos() const noexcept { return pos_; }

  bool consume(std::string_view lit) {
    if (text_.substr(pos_, lit.size()) == lit) {
      pos_ += lit.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view lit) {
    if (!consume(lit)) {
      fail("expected '" + std::string(lit) + "'");
    }
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && is_identifier(text_.substr(pos_, 1))) {
      ++pos_;
    }
    if (start == pos_) {
      fail("expected identifier");
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  template <typename T>
  T number() {
    T v{};
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{}) {
      fail("expected number");
    }
    pos_ += static_cast<std::size_t>(res.ptr - first);
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos_, what); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

Observation parse_observation(Cursor& c) {
  c.expect("<obs>");
  Observation obs;
  if (c.consume("fact ")) {
    Fact f;
    f.slot = c.identifier();
    c.expect("=");
    f.value = c.number<Value>();
    obs = f;
  } else if (c.consume("result ")) {
    obs = ComputeResult{c.number<Value>()};
  } else if (c.consume("error ")) {
    std::size_t at = c.pos();
    auto code = parse_error_code(c.identifier());
    if (!code) {
      throw ParseError(at, "unknown error code");
    }
    obs = ToolError{*code};
  } else {
    c.fail("expected observation kind");
  }
  c.expect("</obs>\n");
  return obs;
}

}  // namespace

Trajectory parse_template(std::string_view text, const ToolRegistry& registry) {
  Cursor c(text);
  Trajectory traj;
  c.expect("<query id=");
  traj.query_id = c.identifier();
  c.expect(" features=");
  if (!c.consume(">\n")) {
    while (true) {
      traj.query_features.push_back(c.number<double>());
      if (c.consume(">\n")) {
        break;
      }
      c.expect(",");
    }
  }

  while (!c.at_end()) {
    if (traj.terminated) {
      c.fail("content after terminal marker");
    }
    c.expect("<turn ");
    std::size_t at = c.pos();
    auto index = c.number<std::size_t>();
    if (index != traj.steps.size()) {
      throw ParseError(at, "turn index out of sequence");
    }
    c.expect("><act>");
    Step step;
    step.index = index;
    if (c.consume(kAnswerToken)) {
      c.expect("</act><answer/>");
      step.action = Answer{};
      traj.terminated = true;
    } else {
      std::size_t tool_at = c.pos();
      ToolCall call;
      call.tool = c.identifier();
      if (registry.find(call.tool) == nullptr) {
        throw ParseError(tool_at, "unknown tool '" + call.tool + "'");
      }
      c.expect("(");
      call.arg = c.identifier();
      c.expect(")</act>");
      step.action = std::move(call);
      step.observation = parse_observation(c);
    }
    traj.steps.push_back(std::move(step));
  }
  return traj;
}

}  // namespace rltr
