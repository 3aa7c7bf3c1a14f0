// Hash-consed detachment proof structures (D-terms), their measures,
// compacted (minimal-DAG) representations, and structure enumeration.
//
// A D-term is a full binary tree: leaves are primitive proofs (axiom
// labels, or the reserved marker "n" standing for an arbitrary minor
// premise), and an inner node D(d1, d2) applies detachment with major
// premise d1 and minor premise d2. Hash-consing makes structural
// equality integer equality, so "distinct compound subterms" is
// literally "distinct node ids".
#ifndef CDT_DTERM_HPP
#define CDT_DTERM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdt/errors.hpp"
#include "cdt/position.hpp"

namespace cdt {

using DTermId = int32_t;
using PrimId = int32_t;

constexpr DTermId kNoDTerm = -1;

// ------------------------------------------------------------- primitives
PrimId prim(const std::string& name);
PrimId prim_n();  // the reserved minor-premise marker "n"
const std::string& prim_name(PrimId p);

// ------------------------------------------------------------------ nodes
DTermId d_leaf(PrimId p);
DTermId d_comp(DTermId major, DTermId minor);
bool d_is_leaf(DTermId d);
PrimId d_leaf_prim(DTermId d);  // leaves only
DTermId d_major(DTermId d);     // inner nodes only
DTermId d_minor(DTermId d);

// --------------------------------------------------------------- measures
// t-size: inner (detachment) node count of the tree unfolding.
// height: edge count of the longest root-leaf path.
// c-size: number of distinct compound subterms (minimal-DAG node count).
// sc-size: sum of c-size over all distinct subterms.
int64_t t_size(DTermId d);
int32_t d_height(DTermId d);
int64_t c_size(DTermId d);
int64_t sc_size(DTermId d);

struct SizeReport {
  int64_t t_size = 0;
  int64_t c_size = 0;
  int64_t sc_size = 0;
  int32_t height = 0;
};
SizeReport measure(DTermId d);

// Distinct compound subterms of the whole collection.
int64_t c_size_of_set(const std::vector<DTermId>& ds);

// -------------------------------------------------------------- structure
// Distinct compound subterms in post-order first-visit order (the order
// in which compact() numbers them). subeq includes d itself; sub is
// strict.
std::vector<DTermId> subeq_compounds(DTermId d);
std::vector<DTermId> sub_compounds(DTermId d);
// Distinct primitive labels, in first-visit (left-to-right) order.
std::vector<PrimId> prims_of(DTermId d);
bool d_contains(DTermId d, DTermId e);  // e occurs in d (as a subterm)
bool contains_prim(DTermId d, PrimId p);
bool contains_n(DTermId d);

// Compaction orderings: d >=_c e iff every strict compound subterm of e
// is one of d; the strict version additionally requires inequality of
// the subterm sets.
bool c_geq(DTermId d, DTermId e);
bool c_gt(DTermId d, DTermId e);

// All D-terms s with d >=_c s and DPrim(s) ⊆ DPrim(d): every pairing of
// two strict subterms of d, plus d's primitives. Deterministic order;
// size (c_size-1+|DPrim|)^2 + |DPrim|. Throws NotCompound for leaves.
std::vector<DTermId> c_smaller_set(DTermId d);

// Prime: every compound subterm occurs exactly once (t_size == c_size).
bool is_prime(DTermId d);

// Maxima of consecutive same-direction edges over all root-leaf paths:
// first = major-major runs, second = minor-minor runs.
std::pair<int32_t, int32_t> successive_heights(DTermId d);

// ---------------------------------------------------- tree-view positions
// The tree unfolding can be exponentially larger than the DAG; callers
// get a guard limit (ResourceLimit beyond it).
std::vector<std::pair<Position, DTermId>> d_positions(DTermId d, size_t limit = 1u << 22);
DTermId d_subterm_at(DTermId d, const Position& p);
DTermId d_replace_at(DTermId d, const Position& p, DTermId s);
// Simultaneous replacement of every occurrence of e.
DTermId d_replace_all(DTermId d, DTermId e, DTermId repl);

// ------------------------------------------------------- compacted form
// A compacted D-term is an ordered list of bindings label -> compound
// right-hand side whose leaves may reference earlier labels; degenerate
// roots (a bare primitive, or a root equal to an already-bound tree) are
// recorded as aliases. goal_labels carries the '*' marks of corpus
// files.
struct CompactedDTerm {
  std::vector<std::pair<PrimId, DTermId>> bindings;
  std::vector<std::pair<PrimId, PrimId>> aliases;
  std::vector<PrimId> goal_labels;

  bool defines(PrimId l) const;
  DTermId rhs(PrimId l) const;  // UnknownLabel; aliases resolved one step
  std::vector<PrimId> domain() const;
  // Labels never referenced from any right-hand side or alias.
  std::vector<PrimId> maximal_labels() const;
};

// Minimal-DAG compaction: interior nodes get fresh labels in post-order
// first-visit order; each given root keeps its given label.
CompactedDTerm compact(const std::vector<std::pair<PrimId, DTermId>>& roots);

// Full expansion of a defined label (UnknownLabel otherwise; CyclicLabels
// on cyclic reference chains).
DTermId expand(const CompactedDTerm& delta, PrimId label);
// Expand a D-term over delta's label space: defined-label leaves are
// replaced by their expansions, other leaves stay primitive.
DTermId expand_tree(const CompactedDTerm& delta, DTermId t);

struct DagStats {
  // Inner nodes written in the bindings (label leaves count as leaves).
  int64_t inner_nodes = 0;
  // In-edges: occurrences as a leaf of some right-hand side (plus alias
  // targets), per label and per primitive.
  std::vector<std::pair<PrimId, int64_t>> di;
  // Occurrence counts in the expanded maximal-label trees, per label and
  // per primitive; "n" leaves are excluded from the primitive counts.
  std::vector<std::pair<PrimId, int64_t>> dr;
  std::vector<PrimId> roots;  // maximal labels
  int64_t total_inner = 0;    // inner nodes of the expanded maximal trees
  int64_t total_leaves = 0;   // leaves of those trees ("n" included)
};
DagStats dag_stats(const CompactedDTerm& delta);

// ------------------------------------------------------------ enumeration
// Primes by c-size level. Single-axiom prime terms are generated
// directly; with several axioms the c-size enumeration is filtered.
std::vector<DTermId> prime_level(int n, const std::vector<PrimId>& axioms);
// Proof-structure-pairing levels: level 0 is the axiom leaves; level n+1
// pairs each level-n term d with its own subterms (D(d,d') for d' ⊴ d,
// D(d',d) for d' ◁ d) and with every axiom leaf on either side.
// Levels are cached; every member of level n has c-size exactly n.
const std::vector<DTermId>& psp_level(int n, const std::vector<PrimId>& axioms,
                                      size_t max_terms = size_t{8} << 20);

// Canonical minimal-DAG enumeration of all D-terms with c-size exactly n
// (deterministic order). jobs: 0 = library default, 1 = serial
// reference, k > 1 = parallel with k threads; the result is identical
// for every jobs value.
std::vector<DTermId> csize_level(int n, const std::vector<PrimId>& axioms, int jobs = 0);

enum class CountMeasure { TSize, Height, CSize, Prime, Psp };
// Number of D-terms with the given exact measure value, single axiom.
// Throws ResourceLimit when the count overflows uint64 or the
// enumeration exceeds its budget.
uint64_t count_dterms(CountMeasure m, int n, int jobs = 0);

}  // namespace cdt

#endif  // CDT_DTERM_HPP
