#pragma once

#include <cctype>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "waynav/topograph.hpp"

namespace waynav {

// One past visit: node id plus the textual scene tag observed there (the
// text-only stand-in for per-node imagery).
struct HistoryEntry {
  int node = 0;
  std::string tag;
};

// A currently navigable option, with geometry relative to the agent pose.
struct ActionOption {
  int node = 0;
  double bearing_deg = 0.0;  // counterclockwise from heading, [0, 360)
  double distance_m = 0.0;
  bool visited = false;
  std::string tag;
};

struct SupplementaryEntry {
  int node = 0;
  std::string tag;
};

// The full per-step context handed to a planner: instruction, history,
// trajectory, graph snapshot, visitation of the current options,
// supplementary unvisited places, and the action options themselves.
struct PromptContext {
  std::string instruction;
  std::vector<HistoryEntry> history;
  std::vector<int> trajectory;
  TopoGraph graph;
  std::vector<ActionOption> options;
  std::vector<SupplementaryEntry> supplementary;
};

// Section toggles for the prompt ablations.
struct PromptOptions {
  bool include_graph = true;
  bool include_visit_info = true;
};

struct GoTo {
  int node = 0;
  bool operator==(const GoTo& o) const { return node == o.node; }
};
struct Stop {
  bool operator==(const Stop&) const { return true; }
};

struct PlannerResponse {
  std::string thought;  // single line
  std::variant<GoTo, Stop> action = Stop{};

  bool is_stop() const { return std::holds_alternative<Stop>(action); }
  int target() const { return std::get<GoTo>(action).node; }
};

enum class ParseError { MissingAction, UnknownNodeId, Ambiguous };

inline const char* to_string(ParseError e) {
  switch (e) {
    case ParseError::MissingAction: return "missing_action";
    case ParseError::UnknownNodeId: return "unknown_node_id";
    case ParseError::Ambiguous: return "ambiguous";
  }
  return "unknown";
}

using ParseOutcome = std::variant<PlannerResponse, ParseError>;

// front: |bearing| <= 45; left: (45, 135]; back: (135, 225]; right: the rest.
inline const char* direction_word(double bearing_deg) {
  const double b = normalize_deg(bearing_deg);
  if (b <= 45.0 || b >= 315.0) return "front";
  if (b <= 135.0) return "left";
  if (b <= 225.0) return "back";
  return "right";
}

namespace detail {

inline std::string format_m(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Matches lines like "Action: ...", "**action** : ...", "> Action: ...".
// Returns the text after the colon, or nullopt.
inline std::optional<std::string> section_line(const std::string& line,
                                               const std::string& key) {
  size_t i = 0;
  while (i < line.size() &&
         (std::isspace(static_cast<unsigned char>(line[i])) || line[i] == '*' ||
          line[i] == '#' || line[i] == '`' || line[i] == '>' || line[i] == '-')) {
    ++i;
  }
  if (line.size() - i < key.size()) return std::nullopt;
  for (size_t k = 0; k < key.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(line[i + k])) != key[k]) {
      return std::nullopt;
    }
  }
  i += key.size();
  while (i < line.size() && (std::isspace(static_cast<unsigned char>(line[i])) ||
                             line[i] == '*')) {
    ++i;
  }
  if (i >= line.size() || line[i] != ':') return std::nullopt;
  ++i;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  return line.substr(i);
}

}  // namespace detail

// One line per visited node describing its connectivity, ids ascending.
inline std::string serialize_graph(const TopoGraph& g) {
  std::ostringstream out;
  bool first = true;
  for (const Node& n : g.nodes()) {
    if (!n.visited) continue;
    if (!first) out << '\n';
    first = false;
    const std::vector<int> nbrs = g.neighbors(n.id);
    if (nbrs.empty()) {
      out << "Place " << n.id << " is connected with no other places";
      continue;
    }
    out << "Place " << n.id << " is connected with Places ";
    for (size_t i = 0; i < nbrs.size(); ++i) {
      if (i) out << ", ";
      out << nbrs[i];
    }
  }
  return out.str();
}

// Deterministic rendering of the whole context, fixed section order:
// Instruction, History, Trajectory, Graph, VisitInfo, Supplementary,
// Action Options, then the output-format directive.
inline std::string serialize_context(const PromptContext& ctx,
                                     const PromptOptions& opts = {}) {
  std::ostringstream out;
  out << "Instruction: " << ctx.instruction << "\n\n";

  out << "History:\n";
  if (ctx.history.empty()) {
    out << "(no places visited yet)\n";
  } else {
    for (size_t i = 0; i < ctx.history.size(); ++i) {
      out << "Step " << i << ": Place " << ctx.history[i].node;
      if (!ctx.history[i].tag.empty()) out << " (" << ctx.history[i].tag << ")";
      out << '\n';
    }
  }

  out << "\nTrajectory: ";
  if (ctx.trajectory.empty()) {
    out << "(empty)";
  } else {
    for (size_t i = 0; i < ctx.trajectory.size(); ++i) {
      if (i) out << " -> ";
      out << "Place " << ctx.trajectory[i];
    }
  }
  out << '\n';

  if (opts.include_graph) {
    out << "\nGraph:\n";
    const std::string g = serialize_graph(ctx.graph);
    out << (g.empty() ? "(empty)" : g) << '\n';
  }

  if (opts.include_visit_info) {
    out << "\nVisitInfo:\n";
    if (ctx.options.empty()) {
      out << "(no current options)\n";
    } else {
      for (const ActionOption& o : ctx.options) {
        out << "Place " << o.node << ": " << (o.visited ? "visited" : "unvisited")
            << '\n';
      }
    }
  }

  out << "\nSupplementary:\n";
  if (ctx.supplementary.empty()) {
    out << "(no other unvisited places)\n";
  } else {
    for (const SupplementaryEntry& s : ctx.supplementary) {
      out << "Place " << s.node;
      if (!s.tag.empty()) out << " (" << s.tag << ")";
      out << ": unvisited, reachable through the graph\n";
    }
  }

  out << "\nAction Options:\n";
  if (ctx.options.empty()) {
    out << "(none available)\n";
  } else {
    for (const ActionOption& o : ctx.options) {
      out << "Place " << o.node << ": " << direction_word(o.bearing_deg)
          << ", bearing " << static_cast<int>(std::lround(o.bearing_deg))
          << " deg, distance " << detail::format_m(o.distance_m) << " m";
      if (!o.tag.empty()) out << " (" << o.tag << ")";
      out << '\n';
    }
  }

  out << "\nReply with exactly two lines:\n"
         "Thought: <one short sentence>\n"
         "Action: <a place id, or stop>\n";
  return out.str();
}

// Renders a response in the protocol's two-line shape. The thought is
// canonicalized to one left-trimmed line so rendering and parsing invert each
// other exactly.
inline std::string render_response(const PlannerResponse& r) {
  std::string thought = r.thought;
  for (char& c : thought) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  size_t lead = 0;
  while (lead < thought.size() &&
         std::isspace(static_cast<unsigned char>(thought[lead]))) {
    ++lead;
  }
  thought.erase(0, lead);
  std::string out = "Thought: " + thought + "\nAction: ";
  if (r.is_stop()) {
    out += "stop";
  } else {
    out += std::to_string(r.target());
  }
  return out;
}

// Scans for the last "Thought:" and last "Action:" lines (case-insensitive,
// tolerating markdown fences and punctuation). The action body must contain
// either the word "stop" or exactly one integer node id.
inline ParseOutcome parse_response(const std::string& raw,
                                   const std::set<int>* valid_ids = nullptr) {
  std::optional<std::string> thought, action;
  std::istringstream in(raw);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto t = detail::section_line(line, "thought")) thought = *t;
    if (auto a = detail::section_line(line, "action")) action = *a;
  }
  if (!action) return ParseError::MissingAction;

  // Tokenize the action body: punctuation separates, digits group.
  std::vector<std::string> tokens;
  std::string cur;
  for (const char c : *action) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(cur);

  bool saw_stop = false;
  std::vector<long> ids;
  for (const std::string& t : tokens) {
    if (t == "stop") {
      saw_stop = true;
    } else if (t.find_first_not_of("0123456789") == std::string::npos) {
      ids.push_back(std::stol(t));
    }
    // Filler words ("place", "go", "to") are ignored.
  }

  PlannerResponse resp;
  resp.thought = thought.value_or("");
  if (saw_stop && ids.empty()) {
    resp.action = Stop{};
  } else if (!saw_stop && ids.size() == 1) {
    if (valid_ids && valid_ids->count(static_cast<int>(ids[0])) == 0) {
      return ParseError::UnknownNodeId;
    }
    resp.action = GoTo{static_cast<int>(ids[0])};
  } else {
    return ParseError::Ambiguous;
  }
  return resp;
}

}  // namespace waynav
