#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cmall/formula.hpp"

namespace cmall {

using OccId = std::uint32_t;
using SeqId = std::uint32_t;

/// A multiset of sequents over a shared pool of formula occurrences.
/// Sequents are sets of occurrence ids; an occurrence may belong to several
/// sequents.  Sequent ids are bookkeeping only: multisequents are compared up
/// to occurrence renaming and sequent permutation via CanonicalForm.
struct Multisequent {
  std::map<OccId, Formula> occs;
  std::map<SeqId, std::set<OccId>> seqs;
  std::map<OccId, std::string> labels;  // display names, optional

  bool empty() const { return seqs.empty(); }

  OccId fresh_occ() const { return occs.empty() ? 0 : occs.rbegin()->first + 1; }
  SeqId fresh_seq() const { return seqs.empty() ? 0 : seqs.rbegin()->first + 1; }

  const Formula& formula(OccId o) const;
  std::vector<SeqId> sequents_containing(OccId o) const;

  OccId add_occ(Formula f, std::string label = {});
  SeqId add_seq(std::set<OccId> members);

  /// Drops an occurrence from every sequent and from the pool.
  void erase_occ(OccId o);
  /// Drops a sequent; occurrences left in no sequent are dropped too.
  void erase_seq(SeqId s);

  /// Throws std::runtime_error if the occurrence/sequent cross-references are
  /// inconsistent.
  void validate() const;

  std::string render() const;
};

struct CanonicalForm {
  std::string bytes;
  bool operator==(const CanonicalForm& o) const { return bytes == o.bytes; }
  bool operator!=(const CanonicalForm& o) const { return bytes != o.bytes; }
  bool operator<(const CanonicalForm& o) const { return bytes < o.bytes; }
};

/// Canonical labeling: bytes plus the maps that produced them.
struct CanonicalLabeling {
  CanonicalForm form;
  std::map<OccId, std::uint32_t> occ_index;   // occurrence -> canonical index
  std::map<SeqId, std::uint32_t> seq_index;   // sequent -> canonical position
};

CanonicalLabeling canonical_labeling(const Multisequent& m);
CanonicalForm canonicalize(const Multisequent& m);
bool isomorphic(const Multisequent& a, const Multisequent& b);

/// Occurrence + sequent bijection a -> b, derived from canonical labelings.
/// Empty optional when the two are not isomorphic.
struct Isomorphism {
  std::map<OccId, OccId> occ;
  std::map<SeqId, SeqId> seq;
};
std::optional<Isomorphism> find_isomorphism(const Multisequent& a, const Multisequent& b);

/// Multisequent grammar: `multiseq := sequent+`,
/// `sequent := "{" item ("," item)* "}"`,
/// `item := label ":" formula | label | formula`.
/// Reusing a label shares the occurrence; an unlabeled formula gets a private
/// occurrence.  A two-sided `Gamma |- Delta` form (comma-separated formulas)
/// is sugar for one sequent of the negations of Gamma plus Delta.
Multisequent parse_multisequent(const std::string& text);

}  // namespace cmall
