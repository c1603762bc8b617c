#include "cmall/proof.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace cmall {

ProofTree& node_at(ProofTree& p, const ProofPath& path) {
  ProofTree* cur = &p;
  for (std::size_t i : path) {
    if (i >= cur->children.size()) throw std::out_of_range("bad proof path");
    cur = &cur->children[i];
  }
  return *cur;
}

const ProofTree& node_at(const ProofTree& p, const ProofPath& path) {
  return node_at(const_cast<ProofTree&>(p), path);
}

namespace {

/// Principal occurrences as (premise index, premise occurrence id) pairs.
struct PrincipalV {
    std::vector<std::pair<std::size_t, OccId>> operator()(const ParInst& i) {
      return {{0, i.a}, {0, i.b}};
    }
    std::vector<std::pair<std::size_t, OccId>> operator()(const CParInst& i) {
      return {{0, i.a}, {0, i.b}};
    }
    std::vector<std::pair<std::size_t, OccId>> operator()(const PlusInst& i) {
      return {{0, i.a}};
    }
    std::vector<std::pair<std::size_t, OccId>> operator()(const TensorInst& i) {
      return {{0, i.a}, {1, i.b}};
    }
    std::vector<std::pair<std::size_t, OccId>> operator()(const CTimesInst& i) {
      return {{0, i.a}, {1, i.b}};
    }
    std::vector<std::pair<std::size_t, OccId>> operator()(const WithInst& i) {
      return {{0, i.a}, {1, i.b}};
    }
    std::vector<std::pair<std::size_t, OccId>> operator()(const CutInst& i) {
      return {{0, i.a}, {1, i.b}};
    }
    std::vector<std::pair<std::size_t, OccId>> operator()(const SharedSInst& i) {
      std::set<OccId> ds;
      for (const auto& col : i.delta) ds.insert(col.begin(), col.end());
      std::vector<std::pair<std::size_t, OccId>> out;
      for (OccId o : ds) out.push_back({0, o});
      return out;
    }
    std::vector<std::pair<std::size_t, OccId>> operator()(const UnsharedUInst& i) {
      return {{0, i.a}};
    }
  template <class T>
  std::vector<std::pair<std::size_t, OccId>> operator()(const T&) {
    return {};
  }
};

std::vector<std::pair<std::size_t, OccId>> principal_occs(const RuleInstance& inst) {
  return std::visit(PrincipalV{}, inst.v);
}

struct NodeInfo {
  const ProofTree* node = nullptr;
  ForwardResult replay;
  std::map<OccId, OccId> stored_to_replay;  // stored-conclusion ids -> replay ids
  std::vector<int> leaves;                  // leaf indices in this subtree
  std::vector<NodeInfo> kids;
};

struct Checker {
  CalculusVariant v;
  int next_leaf = 0;
  std::vector<int> charge;
  ProofStats stats;

  NodeInfo walk(const ProofTree& t, const std::string& path) {
    NodeInfo info;
    info.node = &t;
    for (std::size_t i = 0; i < t.children.size(); ++i)
      info.kids.push_back(
          walk(t.children[i], path.empty() ? std::to_string(i) : path + "." + std::to_string(i)));
    std::vector<Multisequent> premises;
    for (const auto& c : t.children) premises.push_back(c.conclusion);
    try {
      info.replay = apply_forward(v, t.rule, premises);
    } catch (const RuleError& e) {
      throw CheckError(std::string(rule_name(t.rule.rule())) + ": " + e.what(), path);
    }
    auto iso = find_isomorphism(t.conclusion, info.replay.conclusion);
    if (!iso) {
      throw CheckError(std::string(rule_name(t.rule.rule())) + ": derived conclusion " +
                           info.replay.conclusion.render() + " but node claims " +
                           t.conclusion.render(),
                       path);
    }
    info.stored_to_replay = std::move(iso->occ);

    stats.nodes += 1;
    stats.histogram[t.rule.rule()] += 1;
    if (t.rule.rule() == Rule::Cut) stats.cut_count += 1;

    if (t.children.empty()) {
      info.leaves = {next_leaf++};
      charge.push_back(0);
    } else {
      for (const auto& k : info.kids)
        info.leaves.insert(info.leaves.end(), k.leaves.begin(), k.leaves.end());
    }

    switch (t.rule.rule()) {
      case Rule::Axiom:
      case Rule::One:
        charge[info.leaves.front()] += 1;
        break;
      case Rule::EmptyLeaf:
      case Rule::Clone:
      case Rule::Derelict:
      case Rule::Separate:
        break;
      case Rule::Bot:
      case Rule::Top:
        for (int l : info.leaves) charge[l] += 1;
        break;
      default: {
        std::set<int> charged;
        for (auto [ci, occ] : principal_occs(t.rule)) {
          if (ci >= info.kids.size()) continue;
          auto ls = trace(info.kids[ci], occ);
          charged.insert(ls.begin(), ls.end());
        }
        for (int l : charged) charge[l] += 1;
        break;
      }
    }
    return info;
  }

  /// Leaves that the stored-conclusion occurrence `o` of subtree `c` traces
  /// back to; falls back to the whole subtree when the occurrence was created
  /// at this node.
  std::set<int> trace(const NodeInfo& c, OccId o) {
    std::set<int> all(c.leaves.begin(), c.leaves.end());
    if (c.node->children.empty()) return all;
    auto m = c.stored_to_replay.find(o);
    if (m == c.stored_to_replay.end()) return all;
    auto it = c.replay.occ_origin.find(m->second);
    if (it == c.replay.occ_origin.end() || it->second.empty()) return all;
    std::set<int> out;
    for (auto [j, oo] : it->second) {
      if (j >= c.kids.size()) continue;
      auto sub = trace(c.kids[j], oo);
      out.insert(sub.begin(), sub.end());
    }
    return out.empty() ? all : out;
  }
};

}  // namespace

ProofStats check_proof(CalculusVariant v, const ProofTree& p) {
  Checker ck{v};
  ck.walk(p, "");
  ck.stats.height = 0;
  for (int c : ck.charge) ck.stats.height = std::max(ck.stats.height, c);
  return ck.stats;
}

// ---------------------------------------------------------------------------
// Serialization: s-expressions.

namespace {

void quote_to(std::ostream& out, const std::string& s) { out << '"' << s << '"'; }

void write_ms(std::ostream& out, const Multisequent& m) {
  out << "(ms";
  for (const auto& [o, f] : m.occs) {
    out << " (occ " << o << " ";
    quote_to(out, f.render());
    out << ")";
  }
  for (const auto& [s, members] : m.seqs) {
    out << " (seq " << s;
    for (OccId o : members) out << " " << o;
    out << ")";
  }
  out << ")";
}

struct InstWriter {
  std::ostream& out;
  void operator()(const AxiomInst& i) {
    out << "(a ";
    quote_to(out, i.a.render());
    out << ") (pos " << i.pos << ") (neg " << i.neg << ") (seq " << i.seq << ")";
  }
  void operator()(const OneInst& i) { out << "(occ " << i.occ << ") (seq " << i.seq << ")"; }
  void operator()(const EmptyLeafInst&) {}
  void operator()(const BotInst& i) {
    out << "(fresh " << i.fresh << ") (targets";
    for (SeqId s : i.targets) out << " " << s;
    out << ")";
  }
  void operator()(const TopInst& i) {
    out << "(top " << i.top_occ << ") (fresh";
    for (const auto& [o, f] : i.fresh) {
      out << " (" << o << " ";
      quote_to(out, f.render());
      out << ")";
    }
    out << ") (added";
    for (const auto& members : i.added_seqs) {
      out << " (";
      bool first = true;
      for (OccId o : members) {
        if (!first) out << " ";
        first = false;
        out << o;
      }
      out << ")";
    }
    out << ")";
  }
  void abf(OccId a, OccId b, OccId fresh) {
    out << "(a " << a << ") (b " << b << ") (fresh " << fresh << ")";
  }
  void operator()(const ParInst& i) { abf(i.a, i.b, i.fresh); }
  void operator()(const CParInst& i) { abf(i.a, i.b, i.fresh); }
  void operator()(const TensorInst& i) { abf(i.a, i.b, i.fresh); }
  void operator()(const CTimesInst& i) { abf(i.a, i.b, i.fresh); }
  void operator()(const PlusInst& i) {
    out << "(a " << i.a << ") (left " << (i.left ? 1 : 0) << ") (other ";
    quote_to(out, i.other.render());
    out << ") (fresh " << i.fresh << ")";
  }
  void operator()(const WithInst& i) {
    abf(i.a, i.b, i.fresh);
    out << " (occmap";
    for (auto [o1, o0] : i.occ_1to0) out << " (" << o1 << " " << o0 << ")";
    out << ") (seqmap";
    for (auto [s1, s0] : i.seq_1to0) out << " (" << s1 << " " << s0 << ")";
    out << ")";
  }
  void operator()(const CloneInst& i) { out << "(src " << i.src << ") (copy " << i.copy << ")"; }
  void operator()(const DerelictInst& i) {
    out << "(occ " << i.occ << ") (target " << i.target << ")";
  }
  void operator()(const SeparateInst&) {}
  void operator()(const CutInst& i) { out << "(a " << i.a << ") (b " << i.b << ")"; }
  void operator()(const SharedSInst& i) {
    out << "(grid";
    for (const auto& row : i.grid) {
      out << " (";
      bool first = true;
      for (SeqId s : row) {
        if (!first) out << " ";
        first = false;
        out << s;
      }
      out << ")";
    }
    out << ") (delta";
    for (const auto& col : i.delta) {
      out << " (";
      bool first = true;
      for (OccId o : col) {
        if (!first) out << " ";
        first = false;
        out << o;
      }
      out << ")";
    }
    out << ") (copy";
    for (std::size_t r = 0; r < i.copy_map.size(); ++r)
      for (std::size_t c = 0; c < i.copy_map[r].size(); ++c)
        for (auto [o0, oc] : i.copy_map[r][c])
          out << " (" << r << " " << c << " " << o0 << " " << oc << ")";
    out << ")";
  }
  void operator()(const UnsharedUInst& i) { out << "(a " << i.a << ")"; }
};

void write_node(std::ostream& out, const ProofTree& t) {
  out << "(" << rule_name(t.rule.rule()) << " (inst ";
  std::visit(InstWriter{out}, t.rule.v);
  out << ") ";
  write_ms(out, t.conclusion);
  for (const auto& c : t.children) {
    out << " ";
    write_node(out, c);
  }
  out << ")";
}

// --- reading ---

struct Sexp {
  // Either an atom (leaf) or a list.
  std::string atom;
  bool quoted = false;
  std::vector<Sexp> items;
  bool is_atom() const { return items.empty() && (!atom.empty() || quoted); }
};

struct SexpParser {
  const std::string& s;
  std::size_t pos = 0;
  explicit SexpParser(const std::string& text) : s(text) {}

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos); }

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  Sexp parse() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of proof text");
    if (s[pos] == '(') {
      ++pos;
      Sexp list;
      list.items.push_back({});  // mark as list even when empty
      list.items.clear();
      for (;;) {
        skip_ws();
        if (pos >= s.size()) fail("unterminated list");
        if (s[pos] == ')') {
          ++pos;
          return list;
        }
        list.items.push_back(parse());
      }
    }
    if (s[pos] == '"') {
      ++pos;
      std::size_t start = pos;
      while (pos < s.size() && s[pos] != '"') ++pos;
      if (pos >= s.size()) fail("unterminated string");
      Sexp a;
      a.atom = s.substr(start, pos - start);
      a.quoted = true;
      ++pos;
      return a;
    }
    std::size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos])) &&
           s[pos] != '(' && s[pos] != ')')
      ++pos;
    if (pos == start) fail("bad token");
    Sexp a;
    a.atom = s.substr(start, pos - start);
    return a;
  }
};

[[noreturn]] void bad_proof(const std::string& msg) { throw ParseError(msg, 0); }

std::uint32_t as_num(const Sexp& e) {
  if (!e.is_atom() || e.quoted) bad_proof("expected number");
  try {
    return static_cast<std::uint32_t>(std::stoul(e.atom));
  } catch (const std::exception&) {
    bad_proof("expected number, got " + e.atom);
  }
}

/// Finds the named sub-list `(key ...)` inside a list of attribute lists.
const Sexp* find_attr(const std::vector<Sexp>& items, const std::string& key) {
  for (const auto& e : items)
    if (!e.is_atom() && !e.items.empty() && e.items[0].atom == key) return &e;
  return nullptr;
}

const Sexp& need_attr(const std::vector<Sexp>& items, const std::string& key) {
  const Sexp* e = find_attr(items, key);
  if (!e) bad_proof("missing attribute " + key);
  return *e;
}

std::uint32_t num_attr(const std::vector<Sexp>& items, const std::string& key) {
  const Sexp& e = need_attr(items, key);
  if (e.items.size() != 2) bad_proof("attribute " + key + " wants one value");
  return as_num(e.items[1]);
}

Formula formula_attr(const std::vector<Sexp>& items, const std::string& key) {
  const Sexp& e = need_attr(items, key);
  if (e.items.size() != 2 || !e.items[1].quoted) bad_proof("attribute " + key + " wants a string");
  return parse_formula(e.items[1].atom);
}

Multisequent read_ms(const Sexp& e) {
  if (e.is_atom() || e.items.empty() || e.items[0].atom != "ms") bad_proof("expected (ms ...)");
  Multisequent m;
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    const auto& item = e.items[i];
    if (item.is_atom() || item.items.empty()) bad_proof("bad ms entry");
    if (item.items[0].atom == "occ") {
      if (item.items.size() != 3 || !item.items[2].quoted) bad_proof("bad occ entry");
      m.occs.insert_or_assign(as_num(item.items[1]), parse_formula(item.items[2].atom));
    } else if (item.items[0].atom == "seq") {
      if (item.items.size() < 2) bad_proof("bad seq entry");
      std::set<OccId> members;
      for (std::size_t k = 2; k < item.items.size(); ++k) members.insert(as_num(item.items[k]));
      m.seqs[as_num(item.items[1])] = std::move(members);
    } else {
      bad_proof("unknown ms entry " + item.items[0].atom);
    }
  }
  return m;
}

RuleInstance read_inst(Rule r, const Sexp& e) {
  if (e.is_atom() || e.items.empty() || e.items[0].atom != "inst") bad_proof("expected (inst ...)");
  const auto& it = e.items;
  auto nums_of = [](const Sexp& list, std::size_t from) {
    std::vector<std::uint32_t> out;
    for (std::size_t k = from; k < list.items.size(); ++k) out.push_back(as_num(list.items[k]));
    return out;
  };
  switch (r) {
    case Rule::Axiom:
      return {AxiomInst{formula_attr(it, "a"), num_attr(it, "pos"), num_attr(it, "neg"),
                        num_attr(it, "seq")}};
    case Rule::One:
      return {OneInst{num_attr(it, "occ"), num_attr(it, "seq")}};
    case Rule::EmptyLeaf:
      return {EmptyLeafInst{}};
    case Rule::Bot: {
      BotInst i;
      i.fresh = num_attr(it, "fresh");
      for (auto n : nums_of(need_attr(it, "targets"), 1)) i.targets.push_back(n);
      return {i};
    }
    case Rule::Top: {
      TopInst i;
      i.top_occ = num_attr(it, "top");
      const Sexp& fr = need_attr(it, "fresh");
      for (std::size_t k = 1; k < fr.items.size(); ++k) {
        const auto& pair = fr.items[k];
        if (pair.items.size() != 2 || !pair.items[1].quoted) bad_proof("bad top fresh entry");
        i.fresh.insert_or_assign(as_num(pair.items[0]), parse_formula(pair.items[1].atom));
      }
      const Sexp& ad = need_attr(it, "added");
      for (std::size_t k = 1; k < ad.items.size(); ++k) {
        std::set<OccId> members;
        for (const auto& n : ad.items[k].items) members.insert(as_num(n));
        i.added_seqs.push_back(std::move(members));
      }
      return {i};
    }
    case Rule::Par:
      return {ParInst{num_attr(it, "a"), num_attr(it, "b"), num_attr(it, "fresh")}};
    case Rule::CPar:
      return {CParInst{num_attr(it, "a"), num_attr(it, "b"), num_attr(it, "fresh")}};
    case Rule::Tensor:
      return {TensorInst{num_attr(it, "a"), num_attr(it, "b"), num_attr(it, "fresh")}};
    case Rule::CTimes:
      return {CTimesInst{num_attr(it, "a"), num_attr(it, "b"), num_attr(it, "fresh")}};
    case Rule::Plus1:
    case Rule::Plus2:
      return {PlusInst{num_attr(it, "a"), num_attr(it, "left") != 0, formula_attr(it, "other"),
                       num_attr(it, "fresh")}};
    case Rule::With: {
      WithInst i;
      i.a = num_attr(it, "a");
      i.b = num_attr(it, "b");
      i.fresh = num_attr(it, "fresh");
      const Sexp& om = need_attr(it, "occmap");
      for (std::size_t k = 1; k < om.items.size(); ++k) {
        if (om.items[k].items.size() != 2) bad_proof("bad occmap pair");
        i.occ_1to0[as_num(om.items[k].items[0])] = as_num(om.items[k].items[1]);
      }
      const Sexp& sm = need_attr(it, "seqmap");
      for (std::size_t k = 1; k < sm.items.size(); ++k) {
        if (sm.items[k].items.size() != 2) bad_proof("bad seqmap pair");
        i.seq_1to0[as_num(sm.items[k].items[0])] = as_num(sm.items[k].items[1]);
      }
      return {i};
    }
    case Rule::Clone:
      return {CloneInst{num_attr(it, "src"), num_attr(it, "copy")}};
    case Rule::Derelict:
      return {DerelictInst{num_attr(it, "occ"), num_attr(it, "target")}};
    case Rule::Separate:
      return {SeparateInst{}};
    case Rule::Cut:
      return {CutInst{num_attr(it, "a"), num_attr(it, "b")}};
    case Rule::SharedS: {
      SharedSInst i;
      const Sexp& gr = need_attr(it, "grid");
      for (std::size_t k = 1; k < gr.items.size(); ++k) {
        std::vector<SeqId> row;
        for (const auto& n : gr.items[k].items) row.push_back(as_num(n));
        i.grid.push_back(std::move(row));
      }
      const Sexp& de = need_attr(it, "delta");
      for (std::size_t k = 1; k < de.items.size(); ++k) {
        std::set<OccId> col;
        for (const auto& n : de.items[k].items) col.insert(as_num(n));
        i.delta.push_back(std::move(col));
      }
      std::size_t rows = i.grid.size();
      std::size_t cols = i.delta.size();
      i.copy_map.assign(rows, std::vector<std::map<OccId, OccId>>(cols));
      const Sexp& cp = need_attr(it, "copy");
      for (std::size_t k = 1; k < cp.items.size(); ++k) {
        const auto& t = cp.items[k];
        if (t.items.size() != 4) bad_proof("bad copy tuple");
        std::size_t r0 = as_num(t.items[0]), c0 = as_num(t.items[1]);
        if (r0 >= rows || c0 >= cols) bad_proof("copy tuple out of range");
        i.copy_map[r0][c0][as_num(t.items[2])] = as_num(t.items[3]);
      }
      return {i};
    }
    case Rule::UnsharedU:
      return {UnsharedUInst{num_attr(it, "a")}};
  }
  bad_proof("unknown rule");
}

ProofTree read_node(const Sexp& e) {
  if (e.is_atom() || e.items.size() < 3 || !e.items[0].is_atom())
    bad_proof("expected (rule (inst ...) (ms ...) child*)");
  auto r = rule_from_name(e.items[0].atom);
  if (!r) bad_proof("unknown rule name " + e.items[0].atom);
  ProofTree t{read_ms(e.items[2]), read_inst(*r, e.items[1]), {}};
  for (std::size_t i = 3; i < e.items.size(); ++i) t.children.push_back(read_node(e.items[i]));
  return t;
}

}  // namespace

std::string serialize_proof(const ProofTree& p) {
  std::ostringstream out;
  write_node(out, p);
  out << "\n";
  return out.str();
}

ProofTree deserialize_proof(const std::string& text) {
  SexpParser sp(text);
  Sexp root = sp.parse();
  sp.skip_ws();
  if (sp.pos != text.size()) throw ParseError("trailing input after proof", sp.pos);
  return read_node(root);
}

}  // namespace cmall
