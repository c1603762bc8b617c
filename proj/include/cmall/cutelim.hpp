#pragma once

#include <stdexcept>
#include <vector>

#include "cmall/proof.hpp"

namespace cmall {

/// The proof rewrites: principal cut reductions, cut commutation past a
/// non-principal rule, hoisting of asynchronous rules to the root, and
/// splitting of proofs with disconnected conclusions.
enum class ReductionKind {
  Axiom,           // cut against an axiom disappears
  OneBot,          // cut of the 1 leaf against a bot inference collapses
  TensorPar,       // one cut on A tensor B becomes two cuts on A and on B
  CTimesCPar,      // likewise for the concurrent pair
  WithPlus,        // cut on A with B picks the side chosen by the plus rule
  SharedUnshared,  // cut on A^s is pushed under a fresh sharing inference
  CommuteCut,
  PermuteAsync,
  SplitDisjoint,
};

struct ReductionStep {
  ReductionKind kind;
  ProofPath location;
};

/// A rewrite was asked at a node where its redex pattern does not match.
struct TransformError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CutEliminationError : std::runtime_error {
  ProofTree partial;  // the proof as far as rewriting got
  CutEliminationError(const std::string& msg, ProofTree p)
      : std::runtime_error(msg), partial(std::move(p)) {}
};

/// Which principal reduction applies at the cut addressed by `at`, if any.
std::optional<ReductionKind> classify_principal(CalculusVariant v, const ProofTree& p,
                                                const ProofPath& at);

/// Rewrites the cut at `at` whose premises both end with the dual rules
/// introducing the cut formulas (or where one premise is an axiom).  The
/// conclusion of the addressed node is unchanged; cuts inside the replacement
/// act on strictly smaller formulas.
ProofTree reduce_principal(CalculusVariant v, const ProofTree& p, const ProofPath& at);

/// Moves the last rule of the left premise below the cut at `at`.  Fails when
/// that rule introduces the cut formula.  The subtree ending with the cut
/// never gets taller.
ProofTree commute_cut(CalculusVariant v, const ProofTree& p, const ProofPath& at);

/// Returns a proof of the same conclusion and the same height whose last rule
/// introduces `occ`, a par/with/cpar occurrence of the conclusion.
ProofTree permute_async_down(CalculusVariant v, const ProofTree& p, OccId occ);

/// Innermost-first cut elimination: commute each cut until both premises are
/// principal, then reduce; repeat.  Throws CutEliminationError carrying the
/// partial result if `step_limit` rewrites do not suffice.
ProofTree eliminate_cuts(CalculusVariant v, const ProofTree& p, long step_limit = 100000);

/// One proof per connected component of the conclusion; their conclusions
/// partition the original.  A connected conclusion yields a singleton.
std::vector<ProofTree> split_disjoint(CalculusVariant v, const ProofTree& p);

}  // namespace cmall
