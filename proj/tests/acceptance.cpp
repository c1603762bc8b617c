// Acceptance gate: eight self-contained checks, one pass/fail line each.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cmall/cutelim.hpp"
#include "cmall/search.hpp"
#include "cmall/semantics.hpp"

using namespace cmall;

namespace {

const CalculusVariant CM = CalculusVariant::CMALL;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
  if (!cond) throw Failure(what);
}

ProofTree mk(RuleInstance inst, std::vector<ProofTree> kids) {
  std::vector<Multisequent> premises;
  for (const auto& k : kids) premises.push_back(k.conclusion);
  ForwardResult fr = apply_forward(CM, inst, premises);
  return ProofTree{std::move(fr.conclusion), std::move(inst), std::move(kids)};
}

Formula F(const std::string& s) { return parse_formula(s); }

Multisequent identity_goal(const Formula& f, OccId base, SeqId seq) {
  Multisequent m;
  m.occs.insert_or_assign(base, negate(f));
  m.occs.insert_or_assign(base + 1, f);
  m.seqs[seq] = {base, base + 1};
  return m;
}

ProofTree proved(CalculusVariant v, const std::string& goal, const SearchLimits& lim = {}) {
  SearchOutcome oc = prove(v, parse_multisequent(goal), lim);
  require(oc.kind == OutcomeKind::Proved, "not proved: " + goal);
  return *oc.proof;
}

ProofTree proved_goal(const Multisequent& goal, int depth = 14) {
  SearchLimits lim;
  lim.max_depth = depth;
  SearchOutcome oc = prove(CM, goal, lim);
  require(oc.kind == OutcomeKind::Proved, "helper goal not proved");
  return *oc.proof;
}

void refuted(CalculusVariant v, const std::string& goal, const SearchLimits& lim = {}) {
  SearchOutcome oc = prove(v, parse_multisequent(goal), lim);
  require(oc.kind == OutcomeKind::Refuted, "not refuted: " + goal);
  require(oc.exhausted, "refutation not exhaustive: " + goal);
}

// The shared regression corpus, mirrored from corpus/*.mseq.
const std::vector<std::string> kProvable = {
    "{a~, a % bot}",
    "{a~ % b~, a $ b}",
    "{(a $ (b & c))~, (a $ b) & (a $ c)}",
    "{((a $ b) & (a $ c))~, a $ (b & c)}",
    "{1, bot $ bot}",
    "{a~, a^s $ a^s}",
    "{a~, a^s $ r1~, r1}",
    "{a~, a^s $ r2~, r2}",
    "{a~, (a^s $ r1~) $ (a^s $ r2~), r1 @ r2}",
};

// --- criterion 1: golden provability, cut-free search at default depth ---
void criterion1() {
  for (const auto& s : kProvable) {
    ProofTree p = proved(CM, s);
    ProofStats st = check_proof(CM, p);
    require(st.cut_count == 0, "search produced a cut: " + s);
  }
}

// --- criterion 2: golden refutations, exhaustive under documented caps ---
void criterion2() {
  refuted(CM, "{1, bot * bot}");
  SearchLimits tensor_caps;
  tensor_caps.max_depth = 16;
  tensor_caps.max_structural_run = 2;
  refuted(CM, "{a~, (a^s $ r2~) % (a^s $ r1~), r1 * r2}", tensor_caps);
  const CalculusVariant NV = CalculusVariant::NaiveLazyMLL;
  refuted(NV, "{u: a~, v: a % bot} {u, w: 1 % 1}");
  proved(NV, "{a~, a % bot}");
  proved(NV, "{u: a~ $ 1, v: a % bot} {u, w: 1 % 1}");
}

// --- criterion 3: cut elimination over constructed redexes ---
void check_eliminates(const ProofTree& cut) {
  require(check_proof(CM, cut).cut_count >= 1, "construction has no cut");
  ProofTree red = eliminate_cuts(CM, cut);
  require(check_proof(CM, red).cut_count == 0, "cuts remain");
  require(canonicalize(red.conclusion) == canonicalize(cut.conclusion),
          "conclusion changed");
}

void criterion3() {
  int eliminated = 0;
  // every principal redex shape
  {
    ProofTree ax = mk({AxiomInst{F("a"), 0, 1, 0}}, {});
    ProofTree bot = mk({BotInst{2, {0}}}, {ax});
    ProofTree one = mk({OneInst{10, 5}}, {});
    check_eliminates(mk({CutInst{2, 10}}, {bot, one}));  // 1 against bot
    ++eliminated;
  }
  {
    ProofTree axp = mk({AxiomInst{F("c~"), 0, 1, 0}}, {});
    ProofTree par = mk({ParInst{0, 1, 2}}, {axp});
    ProofTree axt1 = mk({AxiomInst{F("c~"), 10, 11, 5}}, {});
    ProofTree axt2 = mk({AxiomInst{F("c"), 12, 13, 6}}, {});
    ProofTree ten = mk({TensorInst{10, 12, 14}}, {axt1, axt2});
    check_eliminates(mk({CutInst{2, 14}}, {par, ten}));  // tensor against par
    ++eliminated;
  }
  {
    ProofTree ax1 = mk({AxiomInst{F("a"), 0, 1, 0}}, {});
    ProofTree ax2 = mk({AxiomInst{F("b"), 2, 3, 1}}, {});
    ProofTree sep = mk({SeparateInst{}}, {ax1, ax2});
    ProofTree d1 = mk({DerelictInst{1, 1}}, {sep});
    ProofTree d2 = mk({DerelictInst{3, 0}}, {d1});
    ProofTree cp = mk({CParInst{0, 2, 4}}, {d2});
    ProofTree bx = mk({AxiomInst{F("b~"), 10, 11, 5}}, {});
    ProofTree axx = mk({AxiomInst{F("a~"), 12, 13, 6}}, {});
    ProofTree ct = mk({CTimesInst{10, 12, 14}}, {bx, axx});
    check_eliminates(mk({CutInst{4, 14}}, {cp, ct}));  // ctimes against cpar
    ++eliminated;
  }
  {
    ProofTree axs = mk({AxiomInst{F("c"), 0, 1, 0}}, {});
    ProofTree sh = mk({SharedSInst{{{0}}, {{0}}, {{{}}}}}, {axs});
    ProofTree axu = mk({AxiomInst{F("c~"), 10, 11, 5}}, {});
    ProofTree un = mk({UnsharedUInst{10}}, {axu});
    check_eliminates(mk({CutInst{0, 10}}, {sh, un}));  // shared against unshared
    ++eliminated;
  }
  // identity cuts over a formula zoo
  const std::vector<std::string> formulas = {
      "a",    "b",       "a~",      "1",        "bot",     "a*b",   "a%b",
      "a&b",  "a+b",     "a$b",     "a@b",      "a*b~",    "a%b~",  "(a*b)%c",
      "a*(b%c)", "(a&b)+c", "(a+b)&c", "1*a",   "bot%a",   "a*1",   "(a$b)*c",
      "(a@b)%c", "a&(b+c)", "(a%b)&c"};
  for (const auto& s : formulas) {
    Formula f = F(s);
    ProofTree left = proved_goal(identity_goal(f, 0, 0));
    ProofTree right = proved_goal(identity_goal(f, 10, 5));
    check_eliminates(mk({CutInst{1, 10}}, {left, right}));
    ++eliminated;
  }
  require(eliminated >= 20, "fewer than 20 cut proofs");
}

// --- criterion 4: commutation lemmas on randomized proofs ---
void criterion4() {
  std::mt19937 rng(42);
  const std::vector<std::string> parts = {"a", "b", "a~", "1", "bot", "a*b", "a&b"};
  const std::vector<std::string> tops = {"%", "&", "$"};
  int hoisted = 0;
  for (int i = 0; i < 200; ++i) {
    std::string x = parts[rng() % parts.size()];
    std::string y = parts[rng() % parts.size()];
    Formula f = F("(" + x + ") " + tops[rng() % tops.size()] + " (" + y + ")");
    ProofTree p = proved_goal(identity_goal(f, 0, 0));
    int deco = static_cast<int>(rng() % 3);
    for (int d = 0; d < deco; ++d) {
      switch (rng() % 3) {
        case 0:
          p = mk({BotInst{p.conclusion.fresh_occ(), {p.conclusion.seqs.begin()->first}}}, {p});
          break;
        case 1:
          p = mk({CloneInst{p.conclusion.seqs.begin()->first, p.conclusion.fresh_seq()}}, {p});
          break;
        case 2: {
          OccId base = p.conclusion.fresh_occ() + 3;
          SeqId sq = p.conclusion.fresh_seq() + 3;
          ProofTree side = mk({AxiomInst{F("e"), base, base + 1, sq}}, {});
          p = mk({SeparateInst{}}, {p, side});
          break;
        }
      }
    }
    ProofTree q = permute_async_down(CM, p, 1);
    require(canonicalize(q.conclusion) == canonicalize(p.conclusion), "hoist changed goal");
    require(check_proof(CM, q).height == check_proof(CM, p).height, "hoist changed height");
    ++hoisted;
  }
  require(hoisted == 200, "fewer than 200 permutations");

  std::vector<std::string> pool = {"a", "a~", "a*b", "a%b", "a&b", "a+b", "1"};
  for (int i = 0; i < 30; ++i) {
    Formula f = F(pool[rng() % pool.size()]);
    ProofTree w = proved_goal(identity_goal(f, 0, 0));
    if (rng() % 2)
      w = mk({BotInst{w.conclusion.fresh_occ(), {0}}}, {w});
    else
      w = mk({CloneInst{0, w.conclusion.fresh_seq()}}, {w});
    ProofTree vside = proved_goal(identity_goal(f, 20, 9));
    ProofTree cut = mk({CutInst{0, 21}}, {w, vside});
    int h_before = check_proof(CM, cut).height;
    ProofTree q = commute_cut(CM, cut, {});
    require(canonicalize(q.conclusion) == canonicalize(cut.conclusion), "commute changed goal");
    check_proof(CM, q);
    for (const auto& c : q.children)
      if (c.rule.rule() == Rule::Cut)
        require(check_proof(CM, c).height <= h_before, "cut subtree grew");
  }
}

// --- criterion 5: algebra property suite ---
std::vector<Tuple> sorted(std::vector<Tuple> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<Tuple> ref_star_tuples(const Universe& u, const Tuple& tf, const Tuple& tg) {
  std::size_t m = tf.size(), n = tg.size();
  std::vector<std::vector<Tuple>> fs, gs;
  for (const auto& x : tf) fs.push_back(factorizations(u, x, static_cast<unsigned>(n)));
  for (const auto& y : tg) gs.push_back(factorizations(u, y, static_cast<unsigned>(m)));
  std::vector<std::size_t> idx(m + n, 0);
  auto size_of = [&](std::size_t p) { return p < m ? fs[p].size() : gs[p - m].size(); };
  std::vector<Tuple> out;
  for (;;) {
    Tuple t;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        t.push_back(mono_mul(u, fs[i][idx[i]][j], gs[j][idx[m + j]][i]));
    std::sort(t.begin(), t.end());
    out.push_back(std::move(t));
    std::size_t p = 0;
    while (p < idx.size() && idx[p] + 1 == size_of(p)) idx[p++] = 0;
    if (p == idx.size()) break;
    ++idx[p];
  }
  out = sorted(std::move(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void criterion5() {
  Universe u = parse_universe(
      "generators = a b\nmax_mono_degree = 3\nmax_fock_degree = 3\n"
      "max_terms = 1000000\nbottom = a\n");
  std::vector<MonoidElem> monos;
  {
    MonoidElem x = monoid_unit(u);
    for (unsigned i = 0; i <= 3; ++i)
      for (unsigned j = 0; i + j <= 3; ++j) {
        x.exp = {i, j};
        monos.push_back(x);
      }
  }
  // coassociativity and cocommutativity, exhaustive
  for (const auto& x : monos)
    for (unsigned n = 1; n <= 3; ++n) {
      auto direct = sorted(delta_n(u, msum({x}), n));
      for (unsigned i = 0; i < n; ++i) {
        std::vector<Tuple> expanded;
        for (const auto& t : delta_n(u, msum({x}), n - 1))
          for (const auto& p : factorizations(u, t[i], 2)) {
            Tuple e(t.begin(), t.begin() + i);
            e.push_back(p[0]);
            e.push_back(p[1]);
            e.insert(e.end(), t.begin() + i + 1, t.end());
            expanded.push_back(std::move(e));
          }
        require(direct == sorted(std::move(expanded)), "coassociativity failed");
      }
      for (unsigned i = 0; i + 1 <= n; ++i)
        for (unsigned j = i + 1; j <= n; ++j) {
          std::vector<Tuple> swapped;
          for (auto t : delta_n(u, msum({x}), n)) {
            std::swap(t[i], t[j]);
            swapped.push_back(std::move(t));
          }
          require(direct == sorted(std::move(swapped)), "cocommutativity failed");
        }
    }
  // convolution laws on random triples
  std::mt19937 rng(11);
  std::vector<MonoidElem> small = {parse_monomial(u, "1"), parse_monomial(u, "a"),
                                   parse_monomial(u, "b")};
  auto random_simple = [&](unsigned deg) {
    Tuple t;
    for (unsigned i = 0; i < deg; ++i) t.push_back(small[rng() % small.size()]);
    return fock_simple(std::move(t));
  };
  auto random_elem = [&](unsigned deg, unsigned max_summands) {
    if (rng() % 8 == 0) return fock_unit();
    FockElem f = fock_zero(deg);
    unsigned s = 1 + rng() % max_summands;
    for (unsigned i = 0; i < s; ++i) f = add(u, f, random_simple(deg));
    return f;
  };
  const std::vector<std::array<unsigned, 3>> degs = {
      {1, 1, 1}, {1, 1, 2}, {1, 2, 1}, {2, 1, 1}, {1, 1, 3}, {1, 3, 1}, {3, 1, 1}};
  int checked = 0;
  for (int i = 0; i < 1100; ++i) {
    auto [d1, d2, d3] = degs[rng() % degs.size()];
    FockElem f = random_elem(d1, 2), g = random_elem(d2, 2), h = random_elem(d3, 2);
    require(star(u, f, g) == star(u, g, f), "star not commutative");
    require(star(u, star(u, f, g), h) == star(u, f, star(u, g, h)), "star not associative");
    if (!f.terms.empty() && !g.terms.empty()) {
      Tuple tf = f.terms[0], tg = g.terms[0];
      std::shuffle(tf.begin(), tf.end(), rng);
      std::shuffle(tg.begin(), tg.end(), rng);
      require(ref_star_tuples(u, tf, tg) ==
                  star(u, fock_simple(f.terms[0]), fock_simple(g.terms[0])).terms,
              "representative dependence");
    }
    ++checked;
  }
  require(checked >= 1000, "fewer than 1000 triples");
  // distribution over the symmetric product, exhaustive for degree-1 factors
  for (const auto& um : monos) {
    if (um.degree() > 2) continue;
    for (const auto& fm : monos)
      for (const auto& gm : monos) {
        if (fm.degree() > 2 || gm.degree() > 2) continue;
        FockElem uf = fock_of(um), f = fock_of(fm), g = fock_of(gm);
        FockElem lhs;
        try {
          lhs = star(u, uf, compose(u, f, g));
        } catch (const AlgebraError&) {
          continue;  // product leaves the degree truncation
        }
        FockElem rhs = fock_zero(2);
        for (const auto& p : factorizations(u, um, 2))
          rhs = add(u, rhs,
                    compose(u, star(u, fock_of(p[0]), f), star(u, fock_of(p[1]), g)));
        require(lhs == rhs, "distribution identity failed");
      }
  }
  // order and choice on the truncated pole, exhaustive
  Universe up = parse_universe(
      "generators = a b\nmax_mono_degree = 3\nmax_fock_degree = 3\n"
      "max_terms = 2\nbottom = a\n");
  FockSet p = pole(up);
  const auto& car = carrier(up);
  for (const auto& f : p.elements)
    for (const auto& g : car)
      if (leq(f, g)) require(p.elements.count(g) > 0, "pole not upward closed");
  std::vector<FockElem> singles;
  for (const auto& g : car)
    if (g.terms.size() == 1 && g.degree <= 2) singles.push_back(g);
  int closed = 0;
  for (const auto& f : car) {
    if (f.terms.size() > 1) continue;
    for (const auto& g : singles) {
      if (f.degree + g.degree > up.max_fock_degree) continue;
      FockElem fg;
      try {
        fg = compose(up, f, g);
      } catch (const AlgebraError&) {
        continue;
      }
      bool both = p.elements.count(f) && p.elements.count(g);
      require(both == (p.elements.count(fg) > 0), "pole product closure failed");
      ++closed;
    }
  }
  require(closed > 100, "too few closure pairs");
  for (const auto& f : p.elements) {
    bool witness = false;
    for (const auto& t : f.terms) {
      bool good = true;
      for (const auto& x : t)
        good = good && std::binary_search(up.bottom.begin(), up.bottom.end(), x);
      if (!good) continue;
      witness = true;
      require(leq(fock_simple(t), f), "witness not below element");
      break;
    }
    require(witness, "pole element without a seed-product summand");
  }
}

// --- criterion 6: duality of the two products on fact pairs ---
void criterion6() {
  int pairs = 0;
  for (const auto& base : sweep_structures({}, 6)) {
    const Universe& u = base.universe;
    std::vector<Fact> facts;
    facts.push_back(make_fact(u, {fock_of(monoid_unit(u))}));
    for (std::size_t g = 0; g < u.generators.size(); ++g) {
      MonoidElem m = monoid_unit(u);
      m.exp[g] = 1;
      facts.push_back(make_fact(u, {fock_of(m)}));
      m.exp[g] = 2;
      facts.push_back(make_fact(u, {fock_of(m)}));
    }
    facts.push_back(make_fact(u, {fock_unit()}));
    for (const auto& A : facts)
      for (const auto& B : facts) {
        FockSet lhs = biorth(star_set(u, A.set, B.set), u);
        FockSet rhs = orth(compose_set(u, orth(A.set, u), orth(B.set, u)), u);
        require(lhs.elements == rhs.elements, "set equality failed");
        require(lhs.overflow == 0 && rhs.overflow == 0, "overflow during sweep");
        ++pairs;
      }
  }
  require(pairs >= 50, "fewer than 50 fact pairs");
}

// --- criterion 7: soundness harness over the proved corpus ---
void criterion7() {
  std::vector<Multisequent> corpus;
  for (const auto& s : kProvable) corpus.push_back(parse_multisequent(s));
  corpus.push_back(parse_multisequent("{a, a~}"));
  corpus.push_back(parse_multisequent("{1}"));
  corpus.push_back(parse_multisequent("{a~ & b~, a + b}"));
  auto structures = sweep_structures({"a", "b", "c", "r1", "r2"}, 8);
  SoundnessReport rep = soundness_harness(CM, corpus, structures);
  require(!rep.entries.empty(), "no checked pairs");
  require(rep.violations == 0, "proved sequent invalid:\n" + rep.render());
  require(rep.decisive * 5 >= rep.entries.size() * 4, "under 80% decisive");
}

// --- criterion 8: no countermodel for anything provable ---
void criterion8() {
  for (const auto& s : kProvable) {
    Multisequent m = parse_multisequent(s);
    if (!modality_free(m)) continue;
    require(!countermodel_search(m).has_value(), "countermodel for proved: " + s);
  }
  require(countermodel_search(parse_multisequent("{a}")).has_value(),
          "no countermodel for the unprovable control");
}

struct Criterion {
  const char* label;
  void (*run)();
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"golden provability", criterion1},
      {"golden refutations", criterion2},
      {"cut elimination", criterion3},
      {"commutation lemmas", criterion4},
      {"algebra property suite", criterion5},
      {"product duality on facts", criterion6},
      {"soundness harness", criterion7},
      {"consistency of the countermodel sweep", criterion8},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    try {
      criteria[i].run();
    } catch (const std::exception& e) {
      detail = e.what();
    }
    if (detail.empty()) {
      std::printf("criterion %zu (%s): PASS\n", i + 1, criteria[i].label);
    } else {
      std::printf("criterion %zu (%s): FAIL — %s\n", i + 1, criteria[i].label, detail.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures;
}
