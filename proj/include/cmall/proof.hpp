#pragma once

#include <string>
#include <vector>

#include "cmall/calculus.hpp"

namespace cmall {

/// A derivation.  Leaves are nodes with zero-premise rules (axiom, one, empty
/// leaf).  Conclusions are stored at every node; the checker re-derives each
/// node from its children and compares up to isomorphism, so stored ids are
/// authoritative for the instances referring to them.
struct ProofTree {
  Multisequent conclusion;
  RuleInstance rule;
  std::vector<ProofTree> children;
};

struct ProofStats {
  int height = 0;     // see check_proof
  int cut_count = 0;
  int nodes = 0;
  std::map<Rule, int> histogram;
};

struct CheckError : std::runtime_error {
  std::string path;  // child indices from the root, e.g. "0.1"
  CheckError(const std::string& msg, std::string p)
      : std::runtime_error(msg + " (at node " + (p.empty() ? "root" : p) + ")"),
        path(std::move(p)) {}
};

/// Verifies every node by replaying its rule on the children's conclusions and
/// comparing with the stored conclusion up to isomorphism.  Throws CheckError
/// at the first failing node, with a diff of expected vs actual.
///
/// The height in the returned stats charges each root-to-leaf path with the
/// logical rules whose principal material traces into that branch: axiom and
/// one count 1 at their leaf; bot and top count on every leaf of their
/// subtree; clone, dereliction and separation count 0; every other rule adds 1
/// to the leaves its principal occurrences trace back to through the premise
/// provenance.  The height is the maximum charge over leaves.  This measure is
/// invariant under the asynchronous-rule permutations, unlike node depth.
ProofStats check_proof(CalculusVariant v, const ProofTree& p);

/// Addressing into a proof: child indices from the root.
using ProofPath = std::vector<std::size_t>;
ProofTree& node_at(ProofTree& p, const ProofPath& path);
const ProofTree& node_at(const ProofTree& p, const ProofPath& path);

/// Text format: s-expressions `(rule-name (inst ...) (ms ...) child*)`, with
/// the conclusion spelled as `(ms (occ ID "formula")* (seq ID ID*)*)`.
/// Deserialization is purely syntactic; invalid proofs parse fine and are
/// rejected by check_proof.
std::string serialize_proof(const ProofTree& p);
ProofTree deserialize_proof(const std::string& text);

}  // namespace cmall
