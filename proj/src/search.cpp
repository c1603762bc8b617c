#include "cmall/search.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace cmall {

namespace {

enum class NodeResult { Proved, Refuted, LimitHit };

bool is_async(Rule r) { return r == Rule::Par || r == Rule::With || r == Rule::CPar; }

struct RefutedRecord {
  int depth_left;       // refuted with this much depth budget remaining
  int structural_run;   // and this many consecutive structural rules already used
};

struct Searcher {
  CalculusVariant v;
  const SearchLimits& lim;
  std::chrono::steady_clock::time_point deadline;
  long visited = 0;
  bool limit_tripped = false;
  std::string limit_reason;

  std::map<std::string, ProofTree> proved;          // canonical bytes -> proof
  std::map<std::string, std::vector<RefutedRecord>> refuted;

  Searcher(CalculusVariant vv, const SearchLimits& l)
      : v(vv), lim(l),
        deadline(std::chrono::steady_clock::now() +
                 std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                     std::chrono::duration<double>(l.time_budget_seconds))) {}

  void trip(const std::string& why) {
    limit_tripped = true;
    if (limit_reason.empty()) limit_reason = why;
  }

  NodeResult search(const Multisequent& goal, int depth_left, int structural_run,
                    std::set<std::string>& path, std::optional<ProofTree>& out) {
    std::string key = canonicalize(goal).bytes;
    if (auto it = proved.find(key); it != proved.end()) {
      ProofTree t = it->second;
      t.conclusion = goal;  // checker compares up to isomorphism
      out = std::move(t);
      return NodeResult::Proved;
    }
    if (auto it = refuted.find(key); it != refuted.end())
      for (const auto& r : it->second)
        if (depth_left <= r.depth_left && structural_run >= r.structural_run)
          return NodeResult::Refuted;
    if (path.count(key)) return NodeResult::Refuted;  // loop: a minimal proof never repeats

    ++visited;
    if (visited > lim.max_visited) {
      trip("visited-node limit reached");
      return NodeResult::LimitHit;
    }
    if ((visited & 0x3ff) == 0 && std::chrono::steady_clock::now() > deadline) {
      trip("time budget exhausted");
      return NodeResult::LimitHit;
    }

    auto apps = enumerate_backward(v, goal);
    // Asynchronous rules are invertible: committing to the first such
    // candidate preserves both provability and refutability.
    if (v == CalculusVariant::CMALL) {
      for (auto& app : apps)
        if (is_async(app.instance.rule())) {
          std::vector<RuleApplication> only;
          only.push_back(std::move(app));
          apps = std::move(only);
          break;
        }
    }

    path.insert(key);
    bool any_limit = false;
    NodeResult result = NodeResult::Refuted;
    for (const auto& app : apps) {
      bool structural = is_structural(app.instance.rule());
      if (structural && structural_run >= lim.max_structural_run) continue;
      if (depth_left <= 0) {
        // Leaf rules still close the branch at depth 0.
        if (!app.premises.empty()) {
          any_limit = true;
          trip("depth limit reached");
          continue;
        }
      }
      int next_run = structural ? structural_run + 1 : 0;
      std::vector<ProofTree> kids;
      bool failed = false, limit = false;
      for (const auto& premise : app.premises) {
        std::optional<ProofTree> sub;
        NodeResult r = search(premise, depth_left - 1, next_run, path, sub);
        if (r == NodeResult::Proved) {
          kids.push_back(std::move(*sub));
        } else {
          failed = true;
          limit = (r == NodeResult::LimitHit);
          break;
        }
      }
      if (!failed) {
        ProofTree t{goal, app.instance, std::move(kids)};
        proved.emplace(key, t);
        out = std::move(t);
        result = NodeResult::Proved;
        break;
      }
      if (limit) any_limit = true;
    }
    path.erase(key);

    if (result == NodeResult::Proved) return result;
    if (any_limit) return NodeResult::LimitHit;
    refuted[key].push_back({depth_left, structural_run});
    return NodeResult::Refuted;
  }
};

}  // namespace

SearchOutcome prove(CalculusVariant v, const Multisequent& goal, const SearchLimits& lim) {
  goal.validate();
  Searcher s(v, lim);
  SearchOutcome out;
  std::set<std::string> path;
  std::optional<ProofTree> proof;
  NodeResult r = s.search(goal, lim.max_depth, 0, path, proof);
  out.visited = s.visited;
  switch (r) {
    case NodeResult::Proved:
      out.kind = OutcomeKind::Proved;
      out.proof = std::move(proof);
      break;
    case NodeResult::Refuted:
      out.kind = OutcomeKind::Refuted;
      out.exhausted = true;
      break;
    case NodeResult::LimitHit:
      out.kind = OutcomeKind::Unknown;
      out.reason = s.limit_reason.empty() ? "limit reached" : s.limit_reason;
      break;
  }
  return out;
}

bool CorpusReport::all_ok() const {
  for (const auto& e : entries)
    if (!e.ok) return false;
  return true;
}

std::string CorpusReport::render() const {
  std::ostringstream out;
  for (const auto& e : entries) {
    out << e.file << ": ";
    if (!e.error.empty()) {
      out << "ERROR " << e.error;
    } else {
      const char* got = e.outcome == OutcomeKind::Proved    ? "proved"
                        : e.outcome == OutcomeKind::Refuted ? "refuted"
                                                            : "unknown";
      out << got << " (expected " << e.expect << ") " << (e.ok ? "OK" : "MISMATCH");
    }
    out << "\n";
  }
  return out.str();
}

CorpusReport prove_corpus(CalculusVariant default_variant, const std::vector<std::string>& files,
                          const SearchLimits& lim) {
  CorpusReport report;
  for (const auto& file : files) {
    CorpusEntry entry;
    entry.file = file;
    entry.variant = default_variant;
    std::ifstream in(file);
    if (!in) {
      entry.error = "cannot open file";
      report.entries.push_back(std::move(entry));
      continue;
    }
    std::string line, body;
    SearchLimits file_lim = lim;
    while (std::getline(in, line)) {
      if (line.rfind("#expect ", 0) == 0) {
        entry.expect = line.substr(8);
      } else if (line.rfind("#max-depth ", 0) == 0) {
        file_lim.max_depth = std::atoi(line.c_str() + 11);
      } else if (line.rfind("#max-structural ", 0) == 0) {
        file_lim.max_structural_run = std::atoi(line.c_str() + 16);
      } else if (line.rfind("#variant ", 0) == 0) {
        std::string vname = line.substr(9);
        if (vname == "cmall")
          entry.variant = CalculusVariant::CMALL;
        else if (vname == "naive")
          entry.variant = CalculusVariant::NaiveLazyMLL;
        else
          entry.error = "unknown variant " + vname;
      } else if (!line.empty() && line[0] == '#') {
        // comment
      } else {
        body += line + "\n";
      }
    }
    if (entry.error.empty() && entry.expect != "proved" && entry.expect != "refuted")
      entry.error = "missing or bad #expect header";
    if (entry.error.empty()) {
      try {
        Multisequent goal = parse_multisequent(body);
        SearchOutcome oc = prove(entry.variant, goal, file_lim);
        entry.outcome = oc.kind;
        entry.ok = (oc.kind == OutcomeKind::Proved && entry.expect == "proved") ||
                   (oc.kind == OutcomeKind::Refuted && entry.expect == "refuted");
      } catch (const std::exception& e) {
        entry.error = e.what();
      }
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace cmall
