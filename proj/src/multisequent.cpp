#include "cmall/multisequent.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <stdexcept>

namespace cmall {

const Formula& Multisequent::formula(OccId o) const {
  auto it = occs.find(o);
  if (it == occs.end()) throw std::runtime_error("unknown occurrence id");
  return it->second;
}

std::vector<SeqId> Multisequent::sequents_containing(OccId o) const {
  std::vector<SeqId> out;
  for (const auto& [sid, members] : seqs)
    if (members.count(o)) out.push_back(sid);
  return out;
}

OccId Multisequent::add_occ(Formula f, std::string label) {
  OccId id = fresh_occ();
  occs.emplace(id, std::move(f));
  if (!label.empty()) labels[id] = std::move(label);
  return id;
}

SeqId Multisequent::add_seq(std::set<OccId> members) {
  SeqId id = fresh_seq();
  seqs.emplace(id, std::move(members));
  return id;
}

void Multisequent::erase_occ(OccId o) {
  for (auto& [sid, members] : seqs) members.erase(o);
  occs.erase(o);
  labels.erase(o);
}

void Multisequent::erase_seq(SeqId s) {
  seqs.erase(s);
  std::set<OccId> live;
  for (const auto& [sid, members] : seqs) live.insert(members.begin(), members.end());
  for (auto it = occs.begin(); it != occs.end();) {
    if (!live.count(it->first)) {
      labels.erase(it->first);
      it = occs.erase(it);
    } else {
      ++it;
    }
  }
}

void Multisequent::validate() const {
  std::set<OccId> seen;
  for (const auto& [sid, members] : seqs)
    for (OccId o : members) {
      if (!occs.count(o)) throw std::runtime_error("sequent references unknown occurrence");
      seen.insert(o);
    }
  for (const auto& [o, f] : occs)
    if (!seen.count(o)) throw std::runtime_error("occurrence appears in no sequent");
}

std::string Multisequent::render() const {
  // First mention of an occurrence prints `label: formula`; later mentions
  // print the label alone.
  std::map<OccId, std::string> name;
  std::set<std::string> used;
  for (const auto& [o, f] : occs) {
    auto it = labels.find(o);
    std::string n = it != labels.end() ? it->second : "";
    if (n.empty() || used.count(n)) n = "o" + std::to_string(o);
    used.insert(n);
    name[o] = n;
  }
  std::ostringstream out;
  std::set<OccId> printed;
  bool first_seq = true;
  for (const auto& [sid, members] : seqs) {
    if (!first_seq) out << " ";
    first_seq = false;
    out << "{";
    bool first = true;
    for (OccId o : members) {
      if (!first) out << ", ";
      first = false;
      if (printed.count(o)) {
        out << name[o];
      } else {
        out << name[o] << ": " << formula(o).render();
        printed.insert(o);
      }
    }
    out << "}";
  }
  if (seqs.empty()) out << "{}";  // the distinguished empty multisequent
  return out.str();
}

// ---------------------------------------------------------------------------
// Canonicalization: color refinement on the occurrence/sequent incidence
// structure, with individualization branching on ties.

namespace {

struct Coloring {
  std::map<OccId, std::string> occ;
  std::map<SeqId, std::string> seq;
};

void refine(const Multisequent& m, Coloring& c) {
  for (;;) {
    std::map<SeqId, std::string> seq2;
    for (const auto& [sid, members] : m.seqs) {
      std::vector<std::string> cs;
      for (OccId o : members) cs.push_back(c.occ.at(o));
      std::sort(cs.begin(), cs.end());
      std::string s = "S[";
      for (auto& x : cs) s += x + ";";
      s += "]";
      seq2[sid] = s;
    }
    std::map<OccId, std::string> occ2;
    for (const auto& [o, f] : m.occs) {
      std::vector<std::string> cs;
      for (const auto& [sid, members] : m.seqs)
        if (members.count(o)) cs.push_back(seq2.at(sid));
      std::sort(cs.begin(), cs.end());
      std::string s = c.occ.at(o) + "@[";
      for (auto& x : cs) s += x + ";";
      s += "]";
      occ2[o] = s;
    }
    // Compress to small indices so strings stay bounded across rounds.
    auto compress = [](auto& colors) {
      std::map<std::string, int> idx;
      for (auto& [k, v] : colors) idx.emplace(v, 0);
      int i = 0;
      for (auto& [k, v] : idx) v = i++;
      for (auto& [k, v] : colors) v = std::to_string(idx.at(v));
      return idx.size();
    };
    std::size_t prev_classes = 0;
    {
      std::set<std::string> cls;
      for (auto& [k, v] : c.occ) cls.insert(v);
      prev_classes = cls.size();
    }
    std::size_t new_classes = compress(occ2);
    compress(seq2);
    c.occ = std::move(occ2);
    c.seq = std::move(seq2);
    if (new_classes == prev_classes) return;
  }
}

std::string serialize_with(const Multisequent& m,
                           const std::map<OccId, std::uint32_t>& occ_index) {
  std::vector<std::pair<std::uint32_t, std::string>> occ_list;
  for (const auto& [o, f] : m.occs) occ_list.push_back({occ_index.at(o), f.render()});
  std::sort(occ_list.begin(), occ_list.end());
  std::vector<std::string> seq_strs;
  for (const auto& [sid, members] : m.seqs) {
    std::vector<std::uint32_t> idx;
    for (OccId o : members) idx.push_back(occ_index.at(o));
    std::sort(idx.begin(), idx.end());
    std::string s = "(";
    for (auto i : idx) s += std::to_string(i) + ",";
    s += ")";
    seq_strs.push_back(s);
  }
  std::sort(seq_strs.begin(), seq_strs.end());
  std::string out = "occs:";
  for (auto& [i, f] : occ_list) out += std::to_string(i) + "=" + f + "|";
  out += " seqs:";
  for (auto& s : seq_strs) out += s;
  return out;
}

struct CanonSearch {
  const Multisequent& m;
  std::string best_bytes;
  std::map<OccId, std::uint32_t> best_index;
  bool have_best = false;

  explicit CanonSearch(const Multisequent& ms) : m(ms) {}

  void run(Coloring c) {
    refine(m, c);
    // Group occurrences by color; stable partition ordered by color value.
    std::map<std::string, std::vector<OccId>> classes;
    for (const auto& [o, col] : c.occ) classes[col].push_back(o);
    const std::vector<OccId>* ambiguous = nullptr;
    for (const auto& [col, os] : classes)
      if (os.size() > 1) {
        ambiguous = &os;
        break;
      }
    if (ambiguous) {
      for (OccId pick : *ambiguous) {
        Coloring branch = c;
        branch.occ[pick] += "!";
        run(std::move(branch));
      }
      return;
    }
    // Discrete: canonical index = rank of color.
    std::map<OccId, std::uint32_t> index;
    std::uint32_t i = 0;
    for (const auto& [col, os] : classes) index[os.front()] = i++;
    std::string bytes = serialize_with(m, index);
    if (!have_best || bytes < best_bytes) {
      best_bytes = std::move(bytes);
      best_index = std::move(index);
      have_best = true;
    }
  }
};

}  // namespace

CanonicalLabeling canonical_labeling(const Multisequent& m) {
  CanonicalLabeling out;
  if (m.occs.empty()) {
    out.form.bytes = serialize_with(m, {});
    std::uint32_t i = 0;
    for (const auto& [sid, members] : m.seqs) out.seq_index[sid] = i++;
    return out;
  }
  Coloring init;
  for (const auto& [o, f] : m.occs) init.occ[o] = "F:" + f.render();
  for (const auto& [sid, members] : m.seqs) init.seq[sid] = "s";
  CanonSearch search(m);
  search.run(std::move(init));
  out.form.bytes = std::move(search.best_bytes);
  out.occ_index = std::move(search.best_index);
  // Sequent positions: order by canonical serialization, ties broken by SeqId.
  std::vector<std::pair<std::string, SeqId>> seq_keys;
  for (const auto& [sid, members] : m.seqs) {
    std::vector<std::uint32_t> idx;
    for (OccId o : members) idx.push_back(out.occ_index.at(o));
    std::sort(idx.begin(), idx.end());
    std::string s;
    for (auto i : idx) s += std::to_string(i) + ",";
    seq_keys.push_back({s, sid});
  }
  std::sort(seq_keys.begin(), seq_keys.end());
  std::uint32_t i = 0;
  for (auto& [key, sid] : seq_keys) out.seq_index[sid] = i++;
  return out;
}

CanonicalForm canonicalize(const Multisequent& m) { return canonical_labeling(m).form; }

bool isomorphic(const Multisequent& a, const Multisequent& b) {
  return canonicalize(a) == canonicalize(b);
}

std::optional<Isomorphism> find_isomorphism(const Multisequent& a, const Multisequent& b) {
  CanonicalLabeling la = canonical_labeling(a);
  CanonicalLabeling lb = canonical_labeling(b);
  if (la.form != lb.form) return std::nullopt;
  Isomorphism iso;
  std::map<std::uint32_t, OccId> inv_occ;
  for (const auto& [o, i] : lb.occ_index) inv_occ[i] = o;
  for (const auto& [o, i] : la.occ_index) iso.occ[o] = inv_occ.at(i);
  std::map<std::uint32_t, SeqId> inv_seq;
  for (const auto& [s, i] : lb.seq_index) inv_seq[i] = s;
  for (const auto& [s, i] : la.seq_index) iso.seq[s] = inv_seq.at(i);
  return iso;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

// Splits `text` into sequent bodies (contents of balanced braces).
std::vector<std::string> split_sequents(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  for (;;) {
    skip_ws();
    if (i >= text.size()) break;
    if (text[i] != '{') throw ParseError("expected '{'", i);
    std::size_t start = ++i;
    int depth = 0;
    while (i < text.size() && (text[i] != '}' || depth > 0)) {
      if (text[i] == '(') ++depth;
      if (text[i] == ')') --depth;
      if (text[i] == '{') throw ParseError("nested '{'", i);
      ++i;
    }
    if (i >= text.size()) throw ParseError("unterminated sequent", start);
    out.push_back(text.substr(start, i - start));
    ++i;
  }
  if (out.empty()) throw ParseError("no sequents", 0);
  return out;
}

std::vector<std::string> split_items(const std::string& body) {
  std::vector<std::string> out;
  std::size_t start = 0;
  int depth = 0;
  for (std::size_t i = 0; i <= body.size(); ++i) {
    if (i == body.size() || (body[i] == ',' && depth == 0)) {
      std::string item = body.substr(start, i - start);
      // trim
      std::size_t a = item.find_first_not_of(" \t\n\r");
      std::size_t b = item.find_last_not_of(" \t\n\r");
      if (a == std::string::npos) throw ParseError("empty item", start);
      out.push_back(item.substr(a, b - a + 1));
      start = i + 1;
    } else if (body[i] == '(') {
      ++depth;
    } else if (body[i] == ')') {
      --depth;
    }
  }
  return out;
}

bool is_plain_identifier(const std::string& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

Multisequent parse_two_sided(const std::string& text, std::size_t turnstile) {
  auto split_formulas = [](const std::string& part) {
    std::vector<Formula> out;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i <= part.size(); ++i) {
      if (i == part.size() || (part[i] == ',' && depth == 0)) {
        std::string piece = part.substr(start, i - start);
        std::size_t a = piece.find_first_not_of(" \t\n\r");
        if (a != std::string::npos) out.push_back(parse_formula(piece));
        start = i + 1;
      } else if (part[i] == '(') {
        ++depth;
      } else if (part[i] == ')') {
        --depth;
      }
    }
    return out;
  };
  Multisequent m;
  std::set<OccId> members;
  for (const Formula& f : split_formulas(text.substr(0, turnstile)))
    members.insert(m.add_occ(negate(f)));
  for (const Formula& f : split_formulas(text.substr(turnstile + 2)))
    members.insert(m.add_occ(f));
  if (members.empty()) throw ParseError("empty two-sided sequent", 0);
  m.add_seq(members);
  return m;
}

}  // namespace

Multisequent parse_multisequent(const std::string& text) {
  if (std::size_t t = text.find("|-"); t != std::string::npos)
    return parse_two_sided(text, t);

  std::vector<std::vector<std::string>> sequent_items;
  for (const std::string& body : split_sequents(text))
    sequent_items.push_back(split_items(body));

  // Pass 1: collect declared labels.
  std::set<std::string> declared;
  for (const auto& items : sequent_items)
    for (const auto& item : items)
      if (std::size_t c = item.find(':'); c != std::string::npos) {
        std::string label = item.substr(0, c);
        std::size_t b = label.find_last_not_of(" \t");
        label = label.substr(0, b + 1);
        if (!is_plain_identifier(label)) throw ParseError("bad label: " + label, 0);
        declared.insert(label);
      }

  Multisequent m;
  std::map<std::string, OccId> by_label;
  for (const auto& items : sequent_items) {
    std::set<OccId> members;
    for (const auto& item : items) {
      OccId occ;
      if (std::size_t c = item.find(':'); c != std::string::npos) {
        std::string label = item.substr(0, c);
        label = label.substr(0, label.find_last_not_of(" \t") + 1);
        Formula f = parse_formula(item.substr(c + 1));
        auto it = by_label.find(label);
        if (it != by_label.end()) {
          if (m.formula(it->second) != f)
            throw ParseError("conflicting formula for label " + label, 0);
          occ = it->second;
        } else {
          occ = m.add_occ(f, label);
          by_label[label] = occ;
        }
      } else if (is_plain_identifier(item) && declared.count(item)) {
        auto it = by_label.find(item);
        if (it == by_label.end())
          throw ParseError("label " + item + " referenced before declaration", 0);
        occ = it->second;
      } else {
        occ = m.add_occ(parse_formula(item));
      }
      if (members.count(occ))
        throw ParseError("label used twice inside one sequent", 0);
      members.insert(occ);
    }
    m.add_seq(members);
  }
  m.validate();
  return m;
}

}  // namespace cmall
