#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cmall/fock.hpp"
#include "cmall/multisequent.hpp"

namespace cmall {

struct SemanticsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A set of Fock elements closed by biorthogonal.
struct Fact {
  FockSet set;
};

/// Biorthogonal closure of the seeds.
Fact make_fact(const Universe& u, std::vector<FockElem> seeds);

struct PhaseStructure {
  Universe universe;
  std::map<std::string, Fact> valuation;  // atom name -> fact
  std::string name;                       // used in reports
};

bool modality_free(const Formula& f);
bool modality_free(const Multisequent& s);

/// Denotation of a formula.  Atoms must be valued; modalities are
/// unsupported.  Constants: bot = biorth of the unit, one = its orthogonal,
/// zero = biorth of nothing, top = orthogonal of nothing.
Fact interpret_formula(const PhaseStructure& ps, const Formula& f);

/// The element a dual assignment contributes to the multisequent's
/// denotation: the sum over all ordered coproduct decompositions of the
/// per-sequent convolution products composed across sequents.  Every dual
/// must lie in the denotation of the occurrence's negation.
FockElem interpret_multisequent(const PhaseStructure& ps, const Multisequent& s,
                                const std::map<OccId, FockElem>& duals);

enum class Validity { Valid, Invalid, Unknown };

struct ValidityReport {
  Validity outcome = Validity::Unknown;
  std::size_t assignments = 0;  // dual assignments attempted
  std::size_t overflowed = 0;   // assignments lost to truncation overflow
  bool vacuous = false;         // some dual fact is empty: nothing to check
  std::string violation;        // rendered violating assignment, when found
};

/// Checks that every generated element lies in the pole.  Dual assignments
/// range over all elements of each dual fact; the coproduct enumeration is
/// exact on idempotent sums.  The outcome is Unknown when overflow dominates
/// (more assignments overflow than get checked).
ValidityReport is_valid(const PhaseStructure& ps, const Multisequent& s);

/// Small phase structures for sweeps: universes with at most two generators,
/// degree bounds at most three, bottoms of size at most two; every atom is
/// valued with a fact generated from a singleton monomial seed.
std::vector<PhaseStructure> sweep_structures(const std::vector<std::string>& atoms,
                                             std::size_t limit = 64);

struct SoundnessEntry {
  std::string sequent;
  std::string structure;
  Validity outcome = Validity::Unknown;
  std::size_t overflowed = 0;
};

struct SoundnessReport {
  std::vector<SoundnessEntry> entries;
  std::size_t skipped = 0;     // sequents not proved or not modality-free
  std::size_t violations = 0;  // hard failures: proved but invalid
  std::size_t decisive = 0;
  std::string render() const;
};

/// Proves each sequent by search; every proved, modality-free sequent is
/// checked for validity in every structure.  An Invalid entry is a hard
/// failure of the implementation.
SoundnessReport soundness_harness(CalculusVariant v, const std::vector<Multisequent>& corpus,
                                  const std::vector<PhaseStructure>& structures);

/// Sweeps small structures for one where the multisequent is decisively
/// invalid; finding one certifies unprovability.  Returns nothing when the
/// budget (number of structures tried) runs out.
std::optional<PhaseStructure> countermodel_search(const Multisequent& s, std::size_t budget = 64);

}  // namespace cmall
