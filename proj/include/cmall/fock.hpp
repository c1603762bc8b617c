#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmall {

/// Raised whenever an algebraic result would leave the configured
/// truncation.  Nothing is ever truncated silently.
struct AlgebraError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Word of a free commutative monoid: one exponent per universe generator.
/// A component may instead be the adjoined unit marker (rendered "E"), which
/// multiplies neutrally but is distinct from the empty word: tuples keep
/// their unit components, so f o E has one degree more than f.
struct MonoidElem {
  std::vector<unsigned> exp;  // empty for the unit marker
  bool unit = false;
  unsigned degree() const;  // 0 for the unit marker
  auto operator<=>(const MonoidElem&) const = default;
};

/// The finite truncation all operations live in.
struct Universe {
  std::vector<std::string> generators;
  /// Degree bound for *enumerated* monomials (carrier components) and for
  /// parsing; products of monomials are never truncated — the free monoid
  /// is infinite and exponent arithmetic always stays exact.
  unsigned max_mono_degree = 3;
  unsigned max_fock_degree = 3;    // symmetric-power index of operation results
  std::size_t max_terms = 2;       // summands an operation result may have
  /// The carrier enumeration is allowed to be strictly smaller than what
  /// operations may produce: these caps bound the symmetric power, the
  /// component degree and the summand count of enumerated elements.  They
  /// default to the corresponding operation bounds (summands to
  /// min(max_terms, 2)) when the config omits them.
  unsigned max_carrier_degree = 3;
  unsigned max_carrier_mono_degree = 3;
  std::size_t max_carrier_terms = 2;
  std::vector<MonoidElem> bottom;  // subset of M seeding the pole

  int generator_index(const std::string& name) const;  // -1 when absent
};

/// Plain key-value configuration:
///   generators = a b
///   max_mono_degree = 3
///   max_fock_degree = 2
///   max_terms = 4
///   max_carrier_degree = 2
///   max_carrier_mono_degree = 1
///   max_carrier_terms = 2
///   bottom = a, a^2*b
/// Lines starting with '#' and blank lines are skipped.
Universe parse_universe(const std::string& text);
Universe load_universe(const std::string& path);
std::string render_universe(const Universe& u);

MonoidElem monoid_unit(const Universe& u);
MonoidElem mono_mul(const Universe& u, const MonoidElem& x, const MonoidElem& y);
/// "1", or '*'-separated factors "a", "b^2".
MonoidElem parse_monomial(const Universe& u, const std::string& text);
std::string render(const Universe& u, const MonoidElem& x);

/// Multiset of monoid elements, written additively; the empty sum is 0.
struct MSum {
  std::vector<MonoidElem> terms;  // kept sorted
};
MSum msum(std::vector<MonoidElem> terms);

using Tuple = std::vector<MonoidElem>;

/// Element of the Fock space: a formal sum of unordered degree-tuples whose
/// components are monoid elements or the unit marker.  Sums are idempotent
/// (repeated summands collapse): with genuine multiplicities the convolution
/// product fails to be associative, so coefficients live in the Boolean
/// semiring.  The adjoined unit is the single-component unit tuple; it is
/// neutral for the convolution product only.
struct FockElem {
  unsigned degree = 0;            // positive; tuples all have this length
  std::vector<Tuple> terms;       // each tuple sorted; the list sorted, unique
  auto operator<=>(const FockElem&) const = default;
};

/// The adjoined unit element (one unit-marker component).
FockElem fock_unit();

FockElem fock_zero(unsigned degree);
FockElem fock_of(const MonoidElem& x);
FockElem fock_of(const MSum& a);
FockElem fock_simple(Tuple t);  // one summand; sorts the tuple
std::string render(const Universe& u, const FockElem& f);

/// Sum; both operands must have the same degree.
FockElem add(const Universe& u, const FockElem& f, const FockElem& g);
/// Symmetric product; degrees add, the operation is bilinear.
FockElem compose(const Universe& u, const FockElem& f, const FockElem& g);
/// The convolution product: for simple operands of degrees m and n, split
/// every factor of f into n ordered parts and every factor of g into m,
/// multiply crosswise and symmetrize; extended bilinearly.
FockElem star(const Universe& u, const FockElem& f, const FockElem& g);
/// Summand containment (an h with g = f + h exists).
bool leq(const FockElem& f, const FockElem& g);

/// All ordered k-tuples of monoid elements with product x.
std::vector<Tuple> factorizations(const Universe& u, const MonoidElem& x, unsigned k);
/// Shuffle coproduct: all ordered pairs, extended additively.
std::vector<Tuple> delta(const Universe& u, const MSum& a);
/// Iterated coproduct: ordered (n+1)-tuples.
std::vector<Tuple> delta_n(const Universe& u, const MSum& a, unsigned n);
/// Ordered k-part decompositions of a Fock element under the convolution
/// product, following the morphism extension of the coproduct.
std::vector<std::vector<FockElem>> delta_parts(const Universe& u, const FockElem& f, unsigned k);

struct FockSet {
  std::set<FockElem> elements;
  /// Pairs skipped because their product left the truncation.
  std::size_t overflow = 0;
};
FockSet fock_set(std::vector<FockElem> elems);

/// The enumerable carrier: for each degree up to the carrier cap, all sums
/// of at most max_carrier_terms distinct tuples whose components are
/// in-bound monomials or the unit marker.  Cached per universe; raises if
/// the enumeration would be unreasonably large.
const std::vector<FockElem>& carrier(const Universe& u);

/// Membership in the pole: the least subset of the carrier containing the
/// bottom seeds, upward closed for leq, and closed under the symmetric
/// product in both directions.  Those closure rules collapse to a witness
/// condition: some summand is a tuple all of whose components lie in
/// bottom.  In particular the adjoined unit is never in the pole: witness
/// components are genuine monomials, so every pole member decomposes into
/// pole monomials (plus a remainder), which is what the dual computations
/// rely on.
bool in_pole(const Universe& u, const FockElem& f);
FockSet pole(const Universe& u);

/// All carrier elements g with star(f, g) in the pole for every f in F.
/// Overflowing pairs are excluded and tallied, never raised.
FockSet orth(const FockSet& F, const Universe& u);
FockSet biorth(const FockSet& F, const Universe& u);

/// Pointwise products of two sets; overflow pairs tallied and skipped.
FockSet star_set(const Universe& u, const FockSet& F, const FockSet& G);
FockSet compose_set(const Universe& u, const FockSet& F, const FockSet& G);

}  // namespace cmall
