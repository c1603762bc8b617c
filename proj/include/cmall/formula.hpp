#pragma once

#include <memory>
#include <stdexcept>
#include <string>

namespace cmall {

enum class Conn { Tensor, Par, CTimes, CPar, Plus, With };
enum class ConstKind { One, Bot, Zero, Top };
enum class ModKind { Shared, Unshared };

enum class CalculusVariant { CMALL, NaiveLazyMLL };

struct ParseError : std::runtime_error {
  std::size_t position;
  ParseError(std::string msg, std::size_t pos)
      : std::runtime_error(std::move(msg)), position(pos) {}
};

/// Immutable formula in negation normal form: negation lives only on atoms.
class Formula {
 public:
  enum class Kind { Atom, Const, Bin, Mod };

  static Formula atom(std::string name, bool dualized = false);
  static Formula constant(ConstKind k);
  static Formula bin(Conn c, Formula left, Formula right);
  static Formula mod(ModKind m, Formula body);

  Kind kind() const { return node_->kind; }

  const std::string& atom_name() const { return node_->name; }
  bool atom_dualized() const { return node_->dualized; }
  ConstKind const_kind() const { return node_->ckind; }
  Conn conn() const { return node_->conn; }
  ModKind mod_kind() const { return node_->mkind; }
  Formula left() const { return Formula(node_->left); }
  Formula right() const { return Formula(node_->right); }
  Formula body() const { return Formula(node_->left); }

  bool is_atom() const { return kind() == Kind::Atom; }
  bool is_const(ConstKind k) const { return kind() == Kind::Const && const_kind() == k; }
  bool is_bin(Conn c) const { return kind() == Kind::Bin && conn() == c; }
  bool is_mod(ModKind m) const { return kind() == Kind::Mod && mod_kind() == m; }

  /// Number of connective/atom nodes; used as the cut-formula size measure.
  int size() const;

  bool operator==(const Formula& o) const;
  bool operator!=(const Formula& o) const { return !(*this == o); }
  bool operator<(const Formula& o) const { return render() < o.render(); }

  /// Canonical text form, re-parsable by parse_formula.
  const std::string& render() const { return node_->text; }

 private:
  struct Node {
    Kind kind;
    std::string name;   // Atom
    bool dualized = false;
    ConstKind ckind = ConstKind::One;
    Conn conn = Conn::Tensor;
    ModKind mkind = ModKind::Shared;
    std::shared_ptr<const Node> left, right;  // Bin; Mod uses left
    std::string text;  // cached render
  };
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

/// De Morgan dual with operand order swapped: (A * B)~ = B~ % A~, etc.
/// Modalities dualize Shared <-> Unshared.
Formula negate(const Formula& f);

/// Duality used by axiom/cut checks in a given variant.  The naive lazy MLL
/// pairs par with cpar instead of cpar with ctimes.
Formula dual_in(CalculusVariant v, const Formula& f);

/// Grammar (ASCII): atoms [a-zA-Z][a-zA-Z0-9_]*, constants `1 bot 0 top`,
/// postfix `~` `^s` `^u`, infix loosest->tightest `&` `+` | `%` `$` | `*` `@`,
/// parentheses.  `~` is applied via negate, so results stay in NNF.
Formula parse_formula(const std::string& text);

}  // namespace cmall
