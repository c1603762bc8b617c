#include "cmall/semantics.hpp"

#include <algorithm>
#include <sstream>

#include "cmall/search.hpp"

namespace cmall {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw SemanticsError(msg); }

FockSet seeds_to_set(std::vector<FockElem> seeds) {
  FockSet s;
  for (auto& e : seeds) s.elements.insert(std::move(e));
  return s;
}

FockSet set_union(const FockSet& a, const FockSet& b) {
  FockSet out = a;
  out.elements.insert(b.elements.begin(), b.elements.end());
  out.overflow += b.overflow;
  return out;
}

FockSet set_intersection(const FockSet& a, const FockSet& b) {
  FockSet out;
  out.overflow = a.overflow + b.overflow;
  for (const auto& e : a.elements)
    if (b.elements.count(e)) out.elements.insert(e);
  return out;
}

}  // namespace

Fact make_fact(const Universe& u, std::vector<FockElem> seeds) {
  return Fact{biorth(seeds_to_set(std::move(seeds)), u)};
}

bool modality_free(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
    case Formula::Kind::Const:
      return true;
    case Formula::Kind::Bin:
      return modality_free(f.left()) && modality_free(f.right());
    case Formula::Kind::Mod:
      return false;
  }
  return false;
}

bool modality_free(const Multisequent& s) {
  for (const auto& [o, f] : s.occs)
    if (!modality_free(f)) return false;
  return true;
}

Fact interpret_formula(const PhaseStructure& ps, const Formula& f) {
  const Universe& u = ps.universe;
  switch (f.kind()) {
    case Formula::Kind::Atom: {
      auto it = ps.valuation.find(f.atom_name());
      if (it == ps.valuation.end()) fail("no valuation for atom '" + f.atom_name() + "'");
      if (!f.atom_dualized()) return it->second;
      return Fact{orth(it->second.set, u)};
    }
    case Formula::Kind::Const:
      switch (f.const_kind()) {
        case ConstKind::Bot:
          return Fact{orth(seeds_to_set({fock_unit()}), u)};
        case ConstKind::One:
          return Fact{biorth(seeds_to_set({fock_unit()}), u)};
        case ConstKind::Zero:
          return Fact{biorth(FockSet{}, u)};
        case ConstKind::Top:
          return Fact{orth(FockSet{}, u)};
      }
      break;
    case Formula::Kind::Bin: {
      Fact a = interpret_formula(ps, f.left());
      Fact b = interpret_formula(ps, f.right());
      switch (f.conn()) {
        case Conn::Tensor:
          return Fact{biorth(star_set(u, a.set, b.set), u)};
        case Conn::Par:
          return Fact{orth(star_set(u, orth(a.set, u), orth(b.set, u)), u)};
        case Conn::CTimes:
          return Fact{biorth(compose_set(u, a.set, b.set), u)};
        case Conn::CPar:
          return Fact{orth(compose_set(u, orth(a.set, u), orth(b.set, u)), u)};
        case Conn::Plus:
          return Fact{biorth(set_union(a.set, b.set), u)};
        case Conn::With:
          return Fact{set_intersection(a.set, b.set)};
      }
      break;
    }
    case Formula::Kind::Mod:
      fail("no phase interpretation for modalities: " + f.render());
  }
  fail("unreachable formula kind");
}

FockElem interpret_multisequent(const PhaseStructure& ps, const Multisequent& s,
                                const std::map<OccId, FockElem>& duals) {
  const Universe& u = ps.universe;
  std::vector<SeqId> order;
  for (const auto& [sid, members] : s.seqs) order.push_back(sid);

  // Ordered split of each shared dual into one part per containing sequent.
  std::vector<OccId> occ_order;
  std::map<OccId, std::vector<std::vector<FockElem>>> splits;
  std::map<OccId, std::size_t> choice;
  for (const auto& [o, f] : s.occs) {
    auto it = duals.find(o);
    if (it == duals.end()) fail("missing dual for occurrence " + std::to_string(o));
    unsigned shared = static_cast<unsigned>(s.sequents_containing(o).size());
    if (shared == 0) continue;
    occ_order.push_back(o);
    splits[o] = delta_parts(u, it->second, shared);
    if (splits[o].empty()) fail("zero dual for occurrence " + std::to_string(o));
    choice[o] = 0;
  }

  std::vector<FockElem> summands;
  for (;;) {
    // One summand: compose across sequents the convolution product of the
    // parts each occurrence contributes to that sequent.  The adjoined unit
    // is not neutral for the symmetric product, so the fold starts from the
    // first sequent's product instead of a unit seed.
    std::map<OccId, std::size_t> used;
    std::optional<FockElem> total;
    for (SeqId sid : order) {
      FockElem prod = fock_unit();
      for (OccId o : s.seqs.at(sid)) {
        const auto& parts = splits.at(o)[choice.at(o)];
        prod = star(u, prod, parts[used[o]++]);
      }
      total = total ? compose(u, *total, prod) : prod;
    }
    if (!total) fail("multisequent with no sequents");
    summands.push_back(std::move(*total));

    std::size_t p = 0;
    while (p < occ_order.size()) {
      OccId o = occ_order[p];
      if (choice[o] + 1 < splits[o].size()) {
        ++choice[o];
        break;
      }
      choice[o] = 0;
      ++p;
    }
    if (p == occ_order.size()) break;
  }

  FockElem sum = summands.front();
  for (std::size_t i = 1; i < summands.size(); ++i) sum = add(u, sum, summands[i]);
  return sum;
}

namespace {

/// Dual candidates: every element of the dual fact.  The coproduct
/// decomposition enumeration is exact on any idempotent sum, so nothing
/// needs to be excluded beyond the degenerate zero element.
std::vector<FockElem> candidate_elements(const Fact& fact) {
  std::vector<FockElem> out;
  for (const auto& e : fact.set.elements)
    if (!e.terms.empty()) out.push_back(e);
  return out;
}

}  // namespace

ValidityReport is_valid(const PhaseStructure& ps, const Multisequent& s) {
  ValidityReport rep;
  const Universe& u = ps.universe;

  std::vector<OccId> occ_order;
  std::vector<std::vector<FockElem>> candidates;
  for (const auto& [o, f] : s.occs) {
    if (s.sequents_containing(o).empty()) continue;
    Fact dual_fact = interpret_formula(ps, negate(f));
    if (dual_fact.set.elements.empty()) {
      rep.vacuous = true;
      rep.outcome = Validity::Valid;
      return rep;
    }
    auto cands = candidate_elements(dual_fact);
    if (cands.empty()) {
      // Only the zero element, which contributes nothing: undecidable.
      rep.outcome = Validity::Unknown;
      return rep;
    }
    occ_order.push_back(o);
    candidates.push_back(std::move(cands));
  }

  std::vector<std::size_t> idx(occ_order.size(), 0);
  std::size_t checked = 0;
  for (;;) {
    std::map<OccId, FockElem> duals;
    for (std::size_t i = 0; i < occ_order.size(); ++i)
      duals[occ_order[i]] = candidates[i][idx[i]];
    ++rep.assignments;
    try {
      FockElem e = interpret_multisequent(ps, s, duals);
      ++checked;
      if (!in_pole(u, e)) {
        rep.outcome = Validity::Invalid;
        std::ostringstream os;
        os << "element " << render(u, e) << " escapes the pole for duals";
        for (std::size_t i = 0; i < occ_order.size(); ++i)
          os << " " << occ_order[i] << ":=" << render(u, candidates[i][idx[i]]);
        rep.violation = os.str();
        return rep;
      }
    } catch (const AlgebraError&) {
      ++rep.overflowed;
    }
    std::size_t p = 0;
    while (p < idx.size() && idx[p] + 1 == candidates[p].size()) idx[p++] = 0;
    if (p == idx.size()) break;
    ++idx[p];
  }
  rep.outcome = rep.overflowed > checked ? Validity::Unknown : Validity::Valid;
  return rep;
}

namespace {

struct SweepSpec {
  std::string universe_text;
};

std::vector<Universe> sweep_universes() {
  std::vector<std::string> texts = {
      // Generous operation budgets keep set operations exact: with carrier
      // elements capped at degree d, orthogonality tests multiply degrees up
      // to d^3, hence max_fock_degree = 8 for the degree-2 carriers.
      //
      // All of these put the monomial 1 in bottom.  That choice makes the
      // truncated carrier "closed enough": every constraint that would rule
      // out a spurious fact member already appears at carrier degree, so the
      // tensor/compose duality below holds on the nose instead of only up to
      // truncation noise.
      "generators = a b\nmax_mono_degree = 3\nmax_fock_degree = 4\nmax_terms = 1000000\n"
      "max_carrier_degree = 1\nmax_carrier_mono_degree = 1\nmax_carrier_terms = 1\n"
      "bottom = 1\n",
      "generators = a b\nmax_mono_degree = 3\nmax_fock_degree = 4\nmax_terms = 1000000\n"
      "max_carrier_degree = 1\nmax_carrier_mono_degree = 1\nmax_carrier_terms = 2\n"
      "bottom = 1\n",
      "generators = a b\nmax_mono_degree = 3\nmax_fock_degree = 4\nmax_terms = 1000000\n"
      "max_carrier_degree = 1\nmax_carrier_mono_degree = 2\nmax_carrier_terms = 2\n"
      "bottom = 1\n",
      "generators = a\nmax_mono_degree = 3\nmax_fock_degree = 4\nmax_terms = 1000000\n"
      "max_carrier_degree = 1\nmax_carrier_mono_degree = 2\nmax_carrier_terms = 3\n"
      "bottom = 1\n",
      "generators = a\nmax_mono_degree = 3\nmax_fock_degree = 8\nmax_terms = 1000000\n"
      "max_carrier_degree = 2\nmax_carrier_mono_degree = 1\nmax_carrier_terms = 2\n"
      "bottom = 1\n",
      "generators = a b\nmax_mono_degree = 3\nmax_fock_degree = 8\nmax_terms = 1000000\n"
      "max_carrier_degree = 2\nmax_carrier_mono_degree = 1\nmax_carrier_terms = 1\n"
      "bottom = 1\n",
  };
  std::vector<Universe> out;
  for (const auto& t : texts) out.push_back(parse_universe(t));
  return out;
}

/// Singleton seeds: low-degree monomials of the universe.
std::vector<MonoidElem> seed_monomials(const Universe& u) {
  std::vector<MonoidElem> out;
  out.push_back(monoid_unit(u));
  for (std::size_t g = 0; g < u.generators.size(); ++g) {
    MonoidElem m = monoid_unit(u);
    m.exp[g] = 1;
    out.push_back(m);
    if (u.max_mono_degree >= 2) {
      MonoidElem m2 = m;
      m2.exp[g] = 2;
      out.push_back(m2);
    }
  }
  return out;
}

}  // namespace

std::vector<PhaseStructure> sweep_structures(const std::vector<std::string>& atoms,
                                             std::size_t limit) {
  std::vector<PhaseStructure> out;
  for (const auto& u : sweep_universes()) {
    auto seeds = seed_monomials(u);
    // one seed per atom, cycled through offsets for variety
    for (std::size_t offset = 0; offset < seeds.size(); ++offset) {
      PhaseStructure ps;
      ps.universe = u;
      std::ostringstream name;
      name << "[" << render_universe(u).substr(0, render_universe(u).find('\n')) << "; bottom =";
      for (const auto& b : u.bottom) name << " " << render(u, b);
      name << "]";
      for (std::size_t i = 0; i < atoms.size(); ++i) {
        const MonoidElem& m = seeds[(offset + i) % seeds.size()];
        ps.valuation[atoms[i]] = make_fact(u, {fock_of(m)});
        name << " " << atoms[i] << ":=<" << render(u, m) << ">";
      }
      ps.name = name.str();
      out.push_back(std::move(ps));
      if (out.size() >= limit) return out;
      if (atoms.empty()) break;  // one structure per universe is enough
    }
  }
  return out;
}

std::string SoundnessReport::render() const {
  std::ostringstream os;
  os << "soundness: " << entries.size() << " checks, " << decisive << " decisive, " << violations
     << " violations, " << skipped << " skipped\n";
  for (const auto& e : entries) {
    const char* tag = e.outcome == Validity::Valid     ? "VALID"
                      : e.outcome == Validity::Invalid ? "VIOLATION"
                                                       : "UNKNOWN";
    os << "  " << tag << " " << e.sequent << " in " << e.structure;
    if (e.overflowed) os << " (overflowed " << e.overflowed << ")";
    os << "\n";
  }
  return os.str();
}

SoundnessReport soundness_harness(CalculusVariant v, const std::vector<Multisequent>& corpus,
                                  const std::vector<PhaseStructure>& structures) {
  SoundnessReport rep;
  for (const auto& ps : structures)
    if (ps.universe.bottom.empty())
      throw SemanticsError("phase structure '" + ps.name + "' has an empty bottom set");
  for (const auto& s : corpus) {
    if (!modality_free(s)) {
      ++rep.skipped;
      continue;
    }
    SearchOutcome oc = prove(v, s, {});
    if (oc.kind != OutcomeKind::Proved) {
      ++rep.skipped;
      continue;
    }
    for (const auto& ps : structures) {
      ValidityReport vr = is_valid(ps, s);
      SoundnessEntry e{s.render(), ps.name, vr.outcome, vr.overflowed};
      if (vr.outcome == Validity::Invalid) ++rep.violations;
      if (vr.outcome != Validity::Unknown) ++rep.decisive;
      rep.entries.push_back(std::move(e));
    }
  }
  return rep;
}

std::optional<PhaseStructure> countermodel_search(const Multisequent& s, std::size_t budget) {
  if (!modality_free(s)) throw SemanticsError("countermodel search needs a modality-free input");
  std::set<std::string> atom_set;
  for (const auto& [o, f] : s.occs) {
    std::vector<Formula> stack = {f};
    while (!stack.empty()) {
      Formula g = stack.back();
      stack.pop_back();
      if (g.is_atom()) atom_set.insert(g.atom_name());
      if (g.kind() == Formula::Kind::Bin) {
        stack.push_back(g.left());
        stack.push_back(g.right());
      }
    }
  }
  std::vector<std::string> atoms(atom_set.begin(), atom_set.end());
  for (auto& ps : sweep_structures(atoms, budget)) {
    ValidityReport vr = is_valid(ps, s);
    if (vr.outcome == Validity::Invalid) return std::move(ps);
  }
  return std::nullopt;
}

}  // namespace cmall
