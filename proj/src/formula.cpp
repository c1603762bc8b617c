#include "cmall/formula.hpp"

#include <cctype>
#include <map>

namespace cmall {

namespace {

int prec(Conn c) {
  switch (c) {
    case Conn::With:
    case Conn::Plus:
      return 1;
    case Conn::Par:
    case Conn::CPar:
      return 2;
    case Conn::Tensor:
    case Conn::CTimes:
      return 3;
  }
  return 0;
}

const char* conn_sym(Conn c) {
  switch (c) {
    case Conn::Tensor: return "*";
    case Conn::Par: return "%";
    case Conn::CTimes: return "@";
    case Conn::CPar: return "$";
    case Conn::Plus: return "+";
    case Conn::With: return "&";
  }
  return "?";
}

std::string render_node(const Formula& f, int parent_prec) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return f.atom_dualized() ? f.atom_name() + "~" : f.atom_name();
    case Formula::Kind::Const:
      switch (f.const_kind()) {
        case ConstKind::One: return "1";
        case ConstKind::Bot: return "bot";
        case ConstKind::Zero: return "0";
        case ConstKind::Top: return "top";
      }
      return "?";
    case Formula::Kind::Mod: {
      std::string inner = render_node(f.body(), 4);
      return inner + (f.mod_kind() == ModKind::Shared ? "^s" : "^u");
    }
    case Formula::Kind::Bin: {
      int p = prec(f.conn());
      // Left-associative: right child needs parens at equal precedence.
      std::string s = render_node(f.left(), p) + " " + conn_sym(f.conn()) + " " +
                      render_node(f.right(), p + 1);
      if (p < parent_prec) s = "(" + s + ")";
      return s;
    }
  }
  return "?";
}

}  // namespace

Formula Formula::atom(std::string name, bool dualized) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Atom;
  n->name = std::move(name);
  n->dualized = dualized;
  n->text = n->dualized ? n->name + "~" : n->name;
  return Formula(n);
}

Formula Formula::constant(ConstKind k) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->ckind = k;
  switch (k) {
    case ConstKind::One: n->text = "1"; break;
    case ConstKind::Bot: n->text = "bot"; break;
    case ConstKind::Zero: n->text = "0"; break;
    case ConstKind::Top: n->text = "top"; break;
  }
  return Formula(n);
}

Formula Formula::bin(Conn c, Formula left, Formula right) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Bin;
  n->conn = c;
  n->left = left.node_;
  n->right = right.node_;
  Formula f(n);
  auto m = std::const_pointer_cast<Node>(n);
  m->text = render_node(f, 0);
  return f;
}

Formula Formula::mod(ModKind mk, Formula body) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Mod;
  n->mkind = mk;
  n->left = body.node_;
  Formula f(n);
  auto m = std::const_pointer_cast<Node>(n);
  m->text = render_node(f, 0);
  return f;
}

int Formula::size() const {
  switch (kind()) {
    case Kind::Atom:
    case Kind::Const:
      return 1;
    case Kind::Mod:
      return 1 + body().size();
    case Kind::Bin:
      return 1 + left().size() + right().size();
  }
  return 1;
}

bool Formula::operator==(const Formula& o) const {
  if (node_ == o.node_) return true;
  return node_->text == o.node_->text;
}

Formula negate(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return Formula::atom(f.atom_name(), !f.atom_dualized());
    case Formula::Kind::Const:
      switch (f.const_kind()) {
        case ConstKind::One: return Formula::constant(ConstKind::Bot);
        case ConstKind::Bot: return Formula::constant(ConstKind::One);
        case ConstKind::Zero: return Formula::constant(ConstKind::Top);
        case ConstKind::Top: return Formula::constant(ConstKind::Zero);
      }
      break;
    case Formula::Kind::Mod:
      return Formula::mod(
          f.mod_kind() == ModKind::Shared ? ModKind::Unshared : ModKind::Shared,
          negate(f.body()));
    case Formula::Kind::Bin: {
      Formula l = negate(f.right());  // operand order swaps under negation
      Formula r = negate(f.left());
      switch (f.conn()) {
        case Conn::Tensor: return Formula::bin(Conn::Par, l, r);
        case Conn::Par: return Formula::bin(Conn::Tensor, l, r);
        case Conn::CTimes: return Formula::bin(Conn::CPar, l, r);
        case Conn::CPar: return Formula::bin(Conn::CTimes, l, r);
        case Conn::Plus: return Formula::bin(Conn::With, l, r);
        case Conn::With: return Formula::bin(Conn::Plus, l, r);
      }
      break;
    }
  }
  throw std::logic_error("negate: unreachable");
}

Formula dual_in(CalculusVariant v, const Formula& f) {
  if (v == CalculusVariant::CMALL) return negate(f);
  // Naive lazy MLL: par and cpar are dual to each other.
  switch (f.kind()) {
    case Formula::Kind::Atom:
      return Formula::atom(f.atom_name(), !f.atom_dualized());
    case Formula::Kind::Const:
      switch (f.const_kind()) {
        case ConstKind::One: return Formula::constant(ConstKind::Bot);
        case ConstKind::Bot: return Formula::constant(ConstKind::One);
        default: throw std::logic_error("dual_in: constant not in naive fragment");
      }
    case Formula::Kind::Bin: {
      Formula l = dual_in(v, f.right());
      Formula r = dual_in(v, f.left());
      switch (f.conn()) {
        case Conn::Par: return Formula::bin(Conn::CPar, l, r);
        case Conn::CPar: return Formula::bin(Conn::Par, l, r);
        default: throw std::logic_error("dual_in: connective not in naive fragment");
      }
    }
    case Formula::Kind::Mod:
      throw std::logic_error("dual_in: modality not in naive fragment");
  }
  throw std::logic_error("dual_in: unreachable");
}

namespace {

struct Parser {
  const std::string& s;
  std::size_t pos = 0;

  explicit Parser(const std::string& text) : s(text) {}

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos); }

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }

  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    if (pos >= s.size() || !std::isalpha(static_cast<unsigned char>(s[pos])))
      fail("expected identifier");
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    return s.substr(start, pos - start);
  }

  Formula primary() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of input");
    char c = s[pos];
    Formula f = [&] {
      if (c == '(') {
        ++pos;
        Formula inner = expr(1);
        if (!eat(')')) fail("expected ')'");
        return inner;
      }
      if (c == '1') {
        ++pos;
        return Formula::constant(ConstKind::One);
      }
      if (c == '0') {
        ++pos;
        return Formula::constant(ConstKind::Zero);
      }
      std::string id = ident();
      if (id == "bot") return Formula::constant(ConstKind::Bot);
      if (id == "top") return Formula::constant(ConstKind::Top);
      return Formula::atom(id);
    }();
    // Postfix operators, tightest binding.
    for (;;) {
      skip_ws();
      if (pos < s.size() && s[pos] == '~') {
        ++pos;
        f = negate(f);
      } else if (pos + 1 < s.size() && s[pos] == '^' &&
                 (s[pos + 1] == 's' || s[pos + 1] == 'u')) {
        ModKind m = s[pos + 1] == 's' ? ModKind::Shared : ModKind::Unshared;
        pos += 2;
        f = Formula::mod(m, f);
      } else {
        break;
      }
    }
    return f;
  }

  Formula expr(int min_prec) {
    Formula lhs = primary();
    for (;;) {
      char c = peek();
      Conn conn;
      int p;
      switch (c) {
        case '&': conn = Conn::With; p = 1; break;
        case '+': conn = Conn::Plus; p = 1; break;
        case '%': conn = Conn::Par; p = 2; break;
        case '$': conn = Conn::CPar; p = 2; break;
        case '*': conn = Conn::Tensor; p = 3; break;
        case '@': conn = Conn::CTimes; p = 3; break;
        default: return lhs;
      }
      if (p < min_prec) return lhs;
      ++pos;
      Formula rhs = expr(p + 1);
      lhs = Formula::bin(conn, lhs, rhs);
    }
  }

  Formula run() {
    Formula f = expr(1);
    skip_ws();
    if (pos != s.size()) fail("trailing input");
    return f;
  }
};

}  // namespace

Formula parse_formula(const std::string& text) { return Parser(text).run(); }

}  // namespace cmall
