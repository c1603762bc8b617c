#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmall/proof.hpp"

namespace cmall {

struct SearchLimits {
  int max_depth = 12;
  long max_visited = 200000;
  int max_structural_run = 4;  // consecutive clone/dereliction/separation per branch
  double time_budget_seconds = 60.0;
};

enum class OutcomeKind { Proved, Refuted, Unknown };

struct SearchOutcome {
  OutcomeKind kind = OutcomeKind::Unknown;
  std::optional<ProofTree> proof;  // set iff Proved
  std::string reason;              // set iff Unknown
  long visited = 0;
  /// True refutation certificate: the whole space was exhausted under the
  /// documented caps; never set when a depth/visited/time limit tripped.
  bool exhausted = false;
};

/// Bounded exhaustive cut-free backward search.  Memoizes on canonical form,
/// prunes branches that revisit a canonical form already on the branch, caps
/// consecutive structural rules, and (for CMALL) commits to the first
/// asynchronous candidate (par, with, cpar) since those rules are invertible.
SearchOutcome prove(CalculusVariant v, const Multisequent& goal, const SearchLimits& lim = {});

struct CorpusEntry {
  std::string file;
  std::string expect;  // "proved" or "refuted"
  CalculusVariant variant = CalculusVariant::CMALL;
  OutcomeKind outcome = OutcomeKind::Unknown;
  bool ok = false;
  std::string error;  // parse/io problem, if any
};

struct CorpusReport {
  std::vector<CorpusEntry> entries;
  bool all_ok() const;
  std::string render() const;
};

/// Corpus file: optional `#expect proved|refuted`, `#variant cmall|naive`,
/// `#max-depth N` and `#max-structural N` header lines, then a multisequent.
/// `default_variant` and `lim` apply when the file has no matching header.
CorpusReport prove_corpus(CalculusVariant default_variant,
                          const std::vector<std::string>& files, const SearchLimits& lim = {});

}  // namespace cmall
