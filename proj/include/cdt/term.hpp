// Hash-consed first-order terms, substitutions, and unification.
//
// All terms live in one global interning arena: structurally equal terms
// always have the same TermId, so term equality is integer equality and
// structure sharing is automatic. The arena only grows; ids stay valid
// for the process lifetime. Interning is safe from multiple threads.
//
// Substitutions are kept in solved (idempotent) form. unify() runs
// sound unification over finite trees: the occurs check is always on,
// implemented as a cycle check when the solved form is built, so that
// unifying large structure-shared problems stays near-linear.
#ifndef CDT_TERM_HPP
#define CDT_TERM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cdt/errors.hpp"
#include "cdt/position.hpp"

namespace cdt {

using TermId = int32_t;
using VarId = int32_t;
using SymId = int32_t;

constexpr TermId kNoTerm = -1;

enum class TermKind : uint8_t { Var, Const, Fun };

// Variables carry a role so positional bookkeeping (the y_p / x_p^i
// variables used when assembling proof-tree constraint sets) stays
// first-class instead of being encoded in name strings.
enum class VarKind : uint8_t { Named, PosY, PosX, Fresh };

// ---------------------------------------------------------------- symbols
SymId functor(const std::string& name, int arity);
SymId constant(const std::string& name);
const std::string& functor_name(SymId f);
int functor_arity(SymId f);
const std::string& constant_name(SymId c);

// The binary implication connective; every formula in the toolkit is
// built from it, variables, and (for ground goals) constants.
SymId fn_i();

// -------------------------------------------------------------- variables
VarId named_var(const std::string& name);
VarId pos_var_y(const Position& p);
VarId pos_var_x(const Position& p, int index);
VarId fresh_var();
const std::string& var_name(VarId v);
VarKind var_kind(VarId v);
// Position of a PosY/PosX variable (throws for other kinds).
const Position& var_position(VarId v);
int var_index(VarId v);  // superscript of a PosX variable

// ------------------------------------------------------------------ terms
TermId mk_var(VarId v);
TermId mk_const(SymId c);
TermId mk_fun(SymId f, const std::vector<TermId>& args);
TermId mk_i(TermId antecedent, TermId consequent);

TermKind term_kind(TermId t);
VarId term_var(TermId t);   // Var nodes only
SymId term_sym(TermId t);   // Const/Fun nodes
int term_nargs(TermId t);
TermId term_arg(TermId t, int i);  // 0-based

// -------------------------------------------------------------- structure
// All node positions in pre-order (root first, arguments left to right).
std::vector<Position> positions(TermId t);
TermId subterm_at(TermId t, const Position& p);   // PositionOutOfRange
TermId replace_at(TermId t, const Position& p, TermId s);

// Distinct variables in left-to-right first-occurrence order.
std::vector<VarId> term_vars(TermId t);
bool contains_var(TermId t, VarId v);

// Tree measures (computed over the tree unfolding, cached per node).
int64_t term_inner_count(TermId t);  // function nodes, with multiplicity
int32_t term_height(TermId t);       // leaf = 0
// Distinct compound subterms (the term's minimal-dag node count).
int64_t term_compound_count(TermId t);
int term_var_count(TermId t);

// ----------------------------------------------------------- substitution
// Idempotent substitution: mapping VarId -> fully resolved TermId with
// no bound variable occurring in any image. apply() memoizes per
// instance; one instance must not be shared across threads while in use.
class Subst {
 public:
  Subst() = default;
  explicit Subst(std::unordered_map<VarId, TermId> solved);

  bool empty() const { return map_.empty(); }
  const std::unordered_map<VarId, TermId>& map() const { return map_; }
  std::optional<TermId> lookup(VarId v) const;
  TermId apply(TermId t) const;
  TermId apply_var(VarId v) const;

 private:
  std::unordered_map<VarId, TermId> map_;
  mutable std::unordered_map<TermId, TermId> memo_;
};

// apply(t, s) then theta: (t)(compose(s, theta)) == ((t)s)theta.
Subst compose(const Subst& s, const Subst& theta);

using TermPair = std::pair<TermId, TermId>;
using TermPairSet = std::vector<TermPair>;

// Most general unifier of all pairs, or nullopt when none exists.
// The result is clean: its domain and image variables all occur in the
// input pairs, and it is idempotent.
std::optional<Subst> unify(const TermPairSet& pairs);
std::optional<Subst> unify_one(TermId a, TermId b);

// s subsumes t (t is an instance of s): some substitution maps s onto t.
bool subsumes(TermId s, TermId t);
// Variants: instances of each other (equal up to variable renaming).
bool variant(TermId s, TermId t);

// Canonical renaming by left-to-right first occurrence. The internal
// pool (v1, v2, ...) yields the dedup key for variant classes; the
// display pool (p, q, r, s, t, u, v, w, then v1, v2, ...) is the
// spelling used in printed output and golden files.
enum class RenamePool : uint8_t { Internal, Display };
TermId rename_canonical(TermId t, RenamePool pool);
// The k-th variable (0-based) of a pool, as assigned by rename_canonical.
VarId pool_var(RenamePool pool, size_t k);
// Replace every variable by a brand-new fresh variable.
TermId rename_all_fresh(TermId t);

}  // namespace cdt

#endif  // CDT_TERM_HPP
