#include "cmall/fock.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>

namespace cmall {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw AlgebraError(msg); }

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

unsigned MonoidElem::degree() const { return std::accumulate(exp.begin(), exp.end(), 0u); }

namespace {
MonoidElem unit_marker() { return MonoidElem{{}, true}; }
}  // namespace

int Universe::generator_index(const std::string& name) const {
  for (std::size_t i = 0; i < generators.size(); ++i)
    if (generators[i] == name) return static_cast<int>(i);
  return -1;
}

MonoidElem monoid_unit(const Universe& u) {
  return MonoidElem{std::vector<unsigned>(u.generators.size(), 0)};
}

MonoidElem mono_mul(const Universe& u, const MonoidElem& x, const MonoidElem& y) {
  if (x.unit) return y;
  if (y.unit) return x;
  if (x.exp.size() != y.exp.size()) fail("monoid elements from different universes");
  // The monoid is free and infinite: products are always exact.  The degree
  // bound only restricts enumeration and parsing.
  MonoidElem r = x;
  for (std::size_t i = 0; i < r.exp.size(); ++i) r.exp[i] += y.exp[i];
  return r;
}

MonoidElem parse_monomial(const Universe& u, const std::string& text) {
  MonoidElem r = monoid_unit(u);
  std::string t = trim(text);
  if (t == "1") return r;
  if (t == "E" && u.generator_index("E") < 0) return unit_marker();
  for (const std::string& factor : split(t, '*')) {
    std::string name = factor;
    unsigned k = 1;
    if (auto caret = factor.find('^'); caret != std::string::npos) {
      name = trim(factor.substr(0, caret));
      try {
        k = static_cast<unsigned>(std::stoul(trim(factor.substr(caret + 1))));
      } catch (...) {
        fail("bad exponent in monomial '" + text + "'");
      }
    }
    int gi = u.generator_index(name);
    if (gi < 0) fail("unknown generator '" + name + "' in monomial '" + text + "'");
    r.exp[static_cast<std::size_t>(gi)] += k;
  }
  if (r.degree() > u.max_mono_degree) fail("monomial '" + text + "' exceeds max_mono_degree");
  return r;
}

std::string render(const Universe& u, const MonoidElem& x) {
  if (x.unit) return "E";
  std::string out;
  for (std::size_t i = 0; i < x.exp.size(); ++i) {
    if (x.exp[i] == 0) continue;
    if (!out.empty()) out += "*";
    out += u.generators[i];
    if (x.exp[i] > 1) out += "^" + std::to_string(x.exp[i]);
  }
  return out.empty() ? "1" : out;
}

Universe parse_universe(const std::string& text) {
  Universe u;
  u.max_terms = 2;
  std::string bottom_line;
  bool saw_generators = false;
  bool saw_carrier_terms = false;
  bool saw_carrier_degree = false;
  bool saw_carrier_mono = false;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("bad universe line (expected key = value): " + line);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "generators") {
      std::stringstream vs(value);
      std::string g;
      while (vs >> g) u.generators.push_back(g);
      saw_generators = true;
    } else if (key == "max_mono_degree") {
      u.max_mono_degree = static_cast<unsigned>(std::stoul(value));
    } else if (key == "max_fock_degree") {
      u.max_fock_degree = static_cast<unsigned>(std::stoul(value));
    } else if (key == "max_terms") {
      u.max_terms = std::stoul(value);
    } else if (key == "max_carrier_terms") {
      u.max_carrier_terms = std::stoul(value);
      saw_carrier_terms = true;
    } else if (key == "max_carrier_degree") {
      u.max_carrier_degree = static_cast<unsigned>(std::stoul(value));
      saw_carrier_degree = true;
    } else if (key == "max_carrier_mono_degree") {
      u.max_carrier_mono_degree = static_cast<unsigned>(std::stoul(value));
      saw_carrier_mono = true;
    } else if (key == "bottom") {
      bottom_line = value;
    } else {
      fail("unknown universe key '" + key + "'");
    }
  }
  if (!saw_generators || u.generators.empty()) fail("universe needs a nonempty generator list");
  if (!saw_carrier_terms) u.max_carrier_terms = std::min<std::size_t>(u.max_terms, 2);
  if (!saw_carrier_degree) u.max_carrier_degree = u.max_fock_degree;
  if (!saw_carrier_mono) u.max_carrier_mono_degree = u.max_mono_degree;
  for (const std::string& item : split(bottom_line, ',')) u.bottom.push_back(parse_monomial(u, item));
  std::sort(u.bottom.begin(), u.bottom.end());
  u.bottom.erase(std::unique(u.bottom.begin(), u.bottom.end()), u.bottom.end());
  return u;
}

Universe load_universe(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open universe file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_universe(ss.str());
}

std::string render_universe(const Universe& u) {
  std::string out = "generators =";
  for (const auto& g : u.generators) out += " " + g;
  out += "\nmax_mono_degree = " + std::to_string(u.max_mono_degree);
  out += "\nmax_fock_degree = " + std::to_string(u.max_fock_degree);
  out += "\nmax_terms = " + std::to_string(u.max_terms);
  out += "\nmax_carrier_degree = " + std::to_string(u.max_carrier_degree);
  out += "\nmax_carrier_mono_degree = " + std::to_string(u.max_carrier_mono_degree);
  out += "\nmax_carrier_terms = " + std::to_string(u.max_carrier_terms);
  out += "\nbottom = ";
  for (std::size_t i = 0; i < u.bottom.size(); ++i) {
    if (i) out += ", ";
    out += render(u, u.bottom[i]);
  }
  out += "\n";
  return out;
}

MSum msum(std::vector<MonoidElem> terms) {
  std::sort(terms.begin(), terms.end());
  return MSum{std::move(terms)};
}

FockElem fock_unit() { return FockElem{1, {{unit_marker()}}}; }

FockElem fock_zero(unsigned degree) {
  if (degree == 0) fail("zero needs a positive degree");
  return FockElem{degree, {}};
}

FockElem fock_of(const MonoidElem& x) { return FockElem{1, {{x}}}; }

FockElem fock_of(const MSum& a) {
  FockElem f{1, {}};
  for (const auto& x : a.terms) f.terms.push_back({x});
  std::sort(f.terms.begin(), f.terms.end());
  f.terms.erase(std::unique(f.terms.begin(), f.terms.end()), f.terms.end());
  return f;
}

FockElem fock_simple(Tuple t) {
  if (t.empty()) fail("a simple element needs a positive degree");
  std::sort(t.begin(), t.end());
  unsigned d = static_cast<unsigned>(t.size());
  return FockElem{d, {std::move(t)}};
}

std::string render(const Universe& u, const FockElem& f) {
  if (f.terms.empty()) return "0";
  std::string out;
  for (const auto& t : f.terms) {
    if (!out.empty()) out += " + ";
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i) out += " o ";
      out += render(u, t[i]);
    }
  }
  return out;
}

namespace {

constexpr std::size_t kRawTermLimit = 2000000;

void check_terms(const Universe& u, const std::vector<Tuple>& terms, const char* op) {
  if (terms.size() > u.max_terms)
    fail(std::string(op) + " term-count overflow: " + std::to_string(terms.size()) +
         " summands exceed max_terms");
}

FockElem normalized(const Universe& u, unsigned degree, std::vector<Tuple> terms, const char* op) {
  if (degree > u.max_fock_degree)
    fail(std::string(op) + " degree overflow: " + std::to_string(degree) +
         " exceeds max_fock_degree");
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  check_terms(u, terms, op);
  return FockElem{degree, std::move(terms)};
}

}  // namespace

FockElem add(const Universe& u, const FockElem& f, const FockElem& g) {
  if (f.degree != g.degree) fail("sum of elements of different degrees");
  std::vector<Tuple> terms = f.terms;
  terms.insert(terms.end(), g.terms.begin(), g.terms.end());
  return normalized(u, f.degree, std::move(terms), "add");
}

FockElem compose(const Universe& u, const FockElem& f, const FockElem& g) {
  std::vector<Tuple> terms;
  for (const auto& tf : f.terms)
    for (const auto& tg : g.terms) {
      Tuple t = tf;
      t.insert(t.end(), tg.begin(), tg.end());
      std::sort(t.begin(), t.end());
      terms.push_back(std::move(t));
    }
  return normalized(u, f.degree + g.degree, std::move(terms), "compose");
}

std::vector<Tuple> factorizations(const Universe& u, const MonoidElem& x, unsigned k) {
  if (k == 0) fail("factorizations need k >= 1");
  // The unit marker only factors into unit markers.
  if (x.unit) return {Tuple(k, unit_marker())};
  if (x.exp.size() != u.generators.size()) fail("monoid element from a different universe");
  std::vector<Tuple> out;
  Tuple current(k, monoid_unit(u));
  // Choose the first part (every componentwise divisor, in ascending lexicographic
  // order), then recurse on the quotient.
  std::function<void(const MonoidElem&, unsigned)> go = [&](const MonoidElem& rest, unsigned slot) {
    if (slot + 1 == k) {
      current[slot] = rest;
      out.push_back(current);
      return;
    }
    MonoidElem part = monoid_unit(u);
    for (;;) {
      current[slot] = part;
      MonoidElem quot = rest;
      for (std::size_t i = 0; i < quot.exp.size(); ++i) quot.exp[i] -= part.exp[i];
      go(quot, slot + 1);
      // next divisor of rest, odometer style
      std::size_t i = 0;
      while (i < part.exp.size() && part.exp[i] == rest.exp[i]) part.exp[i++] = 0;
      if (i == part.exp.size()) break;
      ++part.exp[i];
    }
  };
  go(x, 0);
  return out;
}

std::vector<Tuple> delta(const Universe& u, const MSum& a) { return delta_n(u, a, 1); }

std::vector<Tuple> delta_n(const Universe& u, const MSum& a, unsigned n) {
  std::vector<Tuple> out;
  for (const auto& x : a.terms) {
    auto fs = factorizations(u, x, n + 1);
    out.insert(out.end(), fs.begin(), fs.end());
  }
  if (out.size() > u.max_terms)
    fail("coproduct term-count overflow: " + std::to_string(out.size()) +
         " summands exceed max_terms");
  return out;
}

std::vector<std::vector<FockElem>> delta_parts(const Universe& u, const FockElem& f, unsigned k) {
  if (k == 0) fail("delta_parts needs k >= 1");
  std::vector<std::vector<FockElem>> out;
  for (const auto& t : f.terms) {
    // Factor each tuple component independently; the j-th part composes the
    // j-th factors across components.
    std::vector<std::vector<Tuple>> comp;
    for (const auto& x : t) comp.push_back(factorizations(u, x, k));
    std::vector<std::size_t> idx(t.size(), 0);
    for (;;) {
      std::vector<FockElem> parts;
      for (unsigned j = 0; j < k; ++j) {
        Tuple pj;
        for (std::size_t i = 0; i < t.size(); ++i) pj.push_back(comp[i][idx[i]][j]);
        parts.push_back(fock_simple(std::move(pj)));
      }
      out.push_back(std::move(parts));
      if (out.size() > u.max_terms)
        fail("coproduct term-count overflow: decompositions exceed max_terms");
      std::size_t i = 0;
      while (i < idx.size() && idx[i] + 1 == comp[i].size()) idx[i++] = 0;
      if (i == idx.size()) break;
      ++idx[i];
    }
  }
  return out;
}

FockElem star(const Universe& u, const FockElem& f, const FockElem& g) {
  if (f == fock_unit()) return g;
  if (g == fock_unit()) return f;
  unsigned m = f.degree, n = g.degree;
  unsigned degree = m * n;
  if (degree > u.max_fock_degree)
    fail("star degree overflow: " + std::to_string(degree) + " exceeds max_fock_degree");
  std::vector<Tuple> terms;
  for (const auto& tf : f.terms)
    for (const auto& tg : g.terms) {
      // Ordered splits: every factor of tf into n parts, of tg into m parts.
      std::vector<std::vector<Tuple>> fs, gs;
      for (const auto& x : tf) fs.push_back(factorizations(u, x, n));
      for (const auto& y : tg) gs.push_back(factorizations(u, y, m));
      std::vector<std::size_t> idx(m + n, 0);
      auto size_of = [&](std::size_t p) { return p < m ? fs[p].size() : gs[p - m].size(); };
      for (;;) {
        Tuple t;
        t.reserve(degree);
        for (unsigned i = 0; i < m; ++i)
          for (unsigned j = 0; j < n; ++j)
            t.push_back(mono_mul(u, fs[i][idx[i]][j], gs[j][idx[m + j]][i]));
        std::sort(t.begin(), t.end());
        terms.push_back(std::move(t));
        // Repeated splits collapse under the idempotent sum, so the term
        // budget is checked after normalization; this only bounds raw growth.
        if (terms.size() > kRawTermLimit) fail("star expansion too large for this universe");
        std::size_t p = 0;
        while (p < idx.size() && idx[p] + 1 == size_of(p)) idx[p++] = 0;
        if (p == idx.size()) break;
        ++idx[p];
      }
    }
  return normalized(u, degree, std::move(terms), "star");
}

bool leq(const FockElem& f, const FockElem& g) {
  if (f.terms.empty()) return true;
  if (f.degree != g.degree) return false;
  return std::includes(g.terms.begin(), g.terms.end(), f.terms.begin(), f.terms.end());
}

FockSet fock_set(std::vector<FockElem> elems) {
  FockSet s;
  s.elements.insert(elems.begin(), elems.end());
  return s;
}

namespace {

std::vector<MonoidElem> all_monomials(const Universe& u, unsigned max_degree) {
  std::vector<MonoidElem> out;
  MonoidElem x = monoid_unit(u);
  for (;;) {
    if (x.degree() <= max_degree) out.push_back(x);
    // odometer over exponent vectors bounded by max_degree per slot
    std::size_t i = 0;
    while (i < x.exp.size() && x.exp[i] == max_degree) x.exp[i++] = 0;
    if (i == x.exp.size()) break;
    ++x.exp[i];
  }
  std::sort(out.begin(), out.end());
  return out;
}

constexpr std::size_t kCarrierLimit = 2000000;

/// Nondecreasing index sequences of length `len` into a pool of size `pool`;
/// strictly increasing when `distinct` is set.
void multisets(std::size_t pool, std::size_t len, bool distinct,
               const std::function<void(const std::vector<std::size_t>&)>& emit) {
  std::vector<std::size_t> idx(len, 0);
  std::function<void(std::size_t, std::size_t)> go = [&](std::size_t slot, std::size_t from) {
    if (slot == len) {
      emit(idx);
      return;
    }
    for (std::size_t i = from; i < pool; ++i) {
      idx[slot] = i;
      go(slot + 1, distinct ? i + 1 : i);
    }
  };
  go(0, 0);
}

std::vector<FockElem> enumerate_carrier(const Universe& u) {
  std::vector<FockElem> out;
  // Tuple components range over the monoid plus the unit marker, so the
  // carrier is closed under composing with the adjoined unit.
  auto monos = all_monomials(u, std::min(u.max_mono_degree, u.max_carrier_mono_degree));
  monos.insert(monos.begin(), unit_marker());
  for (unsigned d = 1; d <= std::min(u.max_fock_degree, u.max_carrier_degree); ++d) {
    std::vector<Tuple> tuples;
    multisets(monos.size(), d, false, [&](const std::vector<std::size_t>& idx) {
      Tuple t;
      for (auto i : idx) t.push_back(monos[i]);
      tuples.push_back(std::move(t));
    });
    for (std::size_t s = 0; s <= std::min(u.max_carrier_terms, u.max_terms); ++s) {
      multisets(tuples.size(), s, true, [&](const std::vector<std::size_t>& idx) {
        FockElem f{d, {}};
        for (auto i : idx) f.terms.push_back(tuples[i]);
        out.push_back(std::move(f));
        if (out.size() > kCarrierLimit) fail("carrier enumeration too large for this universe");
      });
    }
  }
  return out;
}

}  // namespace

const std::vector<FockElem>& carrier(const Universe& u) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<std::vector<FockElem>>> cache;
  std::string key = render_universe(u);
  std::scoped_lock lock(mu);
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<std::vector<FockElem>>(enumerate_carrier(u));
  return *slot;
}

bool in_pole(const Universe& u, const FockElem& f) {
  if (u.bottom.empty()) fail("pole needs a nonempty bottom set");
  for (const auto& t : f.terms) {
    bool good = true;
    for (const auto& x : t)
      if (!std::binary_search(u.bottom.begin(), u.bottom.end(), x)) {
        good = false;
        break;
      }
    if (good) return true;
  }
  return false;
}

FockSet pole(const Universe& u) {
  FockSet p;
  for (const auto& f : carrier(u))
    if (in_pole(u, f)) p.elements.insert(f);
  return p;
}

FockSet orth(const FockSet& F, const Universe& u) {
  FockSet out;
  out.overflow = F.overflow;
  for (const auto& g : carrier(u)) {
    bool keep = true;
    for (const auto& f : F.elements) {
      try {
        if (!in_pole(u, star(u, f, g))) {
          keep = false;
          break;
        }
      } catch (const AlgebraError&) {
        ++out.overflow;
        keep = false;
        break;
      }
    }
    if (keep) out.elements.insert(g);
  }
  return out;
}

FockSet biorth(const FockSet& F, const Universe& u) { return orth(orth(F, u), u); }

namespace {

FockSet pointwise(const Universe& u, const FockSet& F, const FockSet& G,
                  FockElem (*op)(const Universe&, const FockElem&, const FockElem&)) {
  FockSet out;
  out.overflow = F.overflow + G.overflow;
  for (const auto& f : F.elements)
    for (const auto& g : G.elements) {
      try {
        out.elements.insert(op(u, f, g));
      } catch (const AlgebraError&) {
        ++out.overflow;
      }
    }
  return out;
}

}  // namespace

FockSet star_set(const Universe& u, const FockSet& F, const FockSet& G) {
  return pointwise(u, F, G, star);
}

FockSet compose_set(const Universe& u, const FockSet& F, const FockSet& G) {
  return pointwise(u, F, G, compose);
}

}  // namespace cmall
