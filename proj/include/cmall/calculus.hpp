#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cmall/multisequent.hpp"

namespace cmall {

enum class Rule {
  Axiom, One, EmptyLeaf, Bot, Top,
  Tensor, Par, CTimes, CPar, Plus1, Plus2, With,
  Clone, Derelict, Separate, Cut, SharedS, UnsharedU,
};

const char* rule_name(Rule r);
std::optional<Rule> rule_from_name(const std::string& name);
bool rule_in_variant(CalculusVariant v, Rule r);
/// Structural rules: clone (c), dereliction (d), separation (s).
bool is_structural(Rule r);

struct RuleError : std::runtime_error {
  explicit RuleError(const std::string& msg) : std::runtime_error(msg) {}
};

// Rule instances.  Occurrence ids refer to the premise multisequents except
// where noted; `fresh` ids name occurrences the rule introduces in the
// conclusion.  Two-premise rules require premises disjoint in both occurrence
// and sequent ids.

struct AxiomInst { Formula a; OccId pos, neg; SeqId seq; };   // conclusion {a, a^dual}
struct OneInst { OccId occ; SeqId seq; };                      // conclusion {1}
struct EmptyLeafInst {};                                       // the closed leaf
struct BotInst { OccId fresh; std::vector<SeqId> targets; };   // add shared bot occurrence
struct TopInst {                                               // append sequents holding top
  OccId top_occ;
  std::map<OccId, Formula> fresh;                // occurrences private to the added sequents
  std::vector<std::set<OccId>> added_seqs;       // each contains top_occ; may reuse premise occs
};
struct ParInst { OccId a, b, fresh; };
struct CParInst { OccId a, b, fresh; };          // merge {G,A}{G,B} pairs into {G, A cpar B}
struct PlusInst { OccId a; bool left; Formula other; OccId fresh; };
struct TensorInst { OccId a, b, fresh; };        // a in premise 0, b in premise 1; i x j product
struct CTimesInst { OccId a, b, fresh; };        // contexts stay separate, one shared occurrence
struct WithInst {
  OccId a, b, fresh;                             // a in premise 0, b in premise 1
  std::map<OccId, OccId> occ_1to0;               // premise-1 occurrence -> premise-0 copy
  std::map<SeqId, SeqId> seq_1to0;
};
struct CloneInst { SeqId src; SeqId copy; };      // duplicate sequent, sharing occurrences
struct DerelictInst { OccId occ; SeqId target; }; // add existing occurrence to one sequent
struct SeparateInst {};                           // disjoint union of two multisequents
struct CutInst { OccId a, b; };                   // a in premise 0; b in premise 1, dual formula
struct SharedSInst {
  // Premise sequents form an m x n grid: seq (i,j) = Gamma_i^j + Delta_j.
  // Row contexts are per-column copies identified by the conclusion; Delta_j
  // occurrences are shared down each column and gain ^s.
  std::vector<std::vector<SeqId>> grid;                       // grid[i][j]
  std::vector<std::set<OccId>> delta;                         // per column j
  std::vector<std::vector<std::map<OccId, OccId>>> copy_map;  // [i][j]: col-0 occ -> col-j occ (j>=1)
};
struct UnsharedUInst { OccId a; };                // A -> A^u, contexts gain ^s

struct RuleInstance {
  std::variant<AxiomInst, OneInst, EmptyLeafInst, BotInst, TopInst, ParInst,
               CParInst, PlusInst, TensorInst, CTimesInst, WithInst, CloneInst,
               DerelictInst, SeparateInst, CutInst, SharedSInst, UnsharedUInst>
      v;
  Rule rule() const;
  std::size_t arity() const;  // number of premises
};

/// How a conclusion occurrence relates to premise occurrences: the pairs
/// (premise index, premise occurrence) it continues or, for occurrences the
/// rule builds from principal material, the principal occurrences it merges.
/// Empty for occurrences created from nothing (axiom, 1, bot, top).
struct ForwardResult {
  Multisequent conclusion;
  std::map<OccId, std::vector<std::pair<std::size_t, OccId>>> occ_origin;
  std::map<SeqId, std::vector<std::pair<std::size_t, SeqId>>> seq_origin;
};

ForwardResult apply_forward(CalculusVariant v, const RuleInstance& inst,
                            const std::vector<Multisequent>& premises);

struct RuleApplication {
  RuleInstance instance;
  std::vector<Multisequent> premises;
};

struct BackwardOptions {
  int max_tensor_context = 12;   // occurrences across principal sequents (tensor/ctimes)
  int max_free_side_choices = 6; // unconstrained component placements to enumerate
  int max_shared_subsets = 10;   // candidate ^s occurrences for grid recovery
  int max_components = 8;        // components considered for separation splits
};

/// All cut-free rule applications whose conclusion is `goal`, deduplicated per
/// rule by premise-list canonical form.
std::vector<RuleApplication> enumerate_backward(CalculusVariant v, const Multisequent& goal,
                                                const BackwardOptions& opts = {});

}  // namespace cmall
