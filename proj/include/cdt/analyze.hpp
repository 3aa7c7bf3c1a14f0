// Per-subproof property analysis for compacted detachment proofs: the
// structural, formula, minimal-proof, regularity and instance-statistics
// columns of a proof report, plus the two-valued tautology oracle and
// the organicness classifier that back the formula columns.
#ifndef CDT_ANALYZE_HPP
#define CDT_ANALYZE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cdt/cd.hpp"
#include "cdt/dterm.hpp"
#include "cdt/term.hpp"

namespace cdt {

// ------------------------------------------------------------- tautology
// Truth of f under all two-valued assignments with the classical reading
// of `i` as implication. Only sound as a theoremhood test for axiom
// systems that are complete for the classical implicational fragment.
// Errors: NonImplicational (constants or foreign functors),
// ResourceLimit (more than 24 distinct variables).
bool is_tautology(TermId f);

// ---------------------------------------------------------- organicness
// organic: no strict subterm of f is a tautology. weakly-organic: not
// organic, f = i(p, g) with p a variable not occurring in g, and g is a
// tautology that is organic. undetermined is never produced here; the
// report uses it when the tautology oracle does not apply.
enum class OrganicStatus : uint8_t { Organic, WeaklyOrganic, Neither, Undetermined };
const char* organic_status_name(OrganicStatus s);  // "organic", ...

// Classify a theorem. Errors: NotATheorem when !is_tautology(f), plus
// everything is_tautology throws.
OrganicStatus organic_status(TermId f);

// ------------------------------------------------- premise relation (DS)
// How the two immediate subproofs of a compound D-term relate:
//   =            the premises are equal
//   n-minor      the minor premise is the "n" marker
//   axiom-major  the major premise is a primitive (axiom leaf)
//   axiom-minor  the minor premise is a primitive
//   ◁            the major premise is a strict subterm of the minor
//   ▷            the minor premise is a strict subterm of the major
//   <c           the minor premise is strictly greater in the
//                compaction ordering (major <c minor)
//   >c           the major premise is strictly greater (major >c minor)
//   none         none of the above
// Tags are tested in the order listed; the first match wins.
enum class DsTag : uint8_t {
  Equal, NMinor, AxiomMajor, AxiomMinor, SubMajor, SubMinor, CLess, CGreater, None,
};
const char* ds_tag_name(DsTag t);  // "=", "n-minor", ..., "◁", "▷", ...

// Errors: NotCompound for a leaf.
DsTag ds_relation(DTermId d);

// -------------------------------------------------- minimal proof search
// An exact value (lo == hi) or an integer interval. hi == kUnbounded
// marks an interval with no known finite upper bound.
struct SizeBound {
  static constexpr int64_t kUnbounded = -1;
  int64_t lo = 0;
  int64_t hi = 0;
  bool exact() const { return lo == hi; }
  // "7" when exact, "[7,10]" otherwise, "[7,inf)" when unbounded.
  std::string to_string() const;
};

enum class ProofMeasure : uint8_t { CSize, TSize };

struct MinProofOptions {
  // Largest measure value enumerated exhaustively.
  int64_t csize_budget = 6;
  int64_t tsize_budget = 9;
  // Abort a level whose candidate pool would exceed this many D-terms;
  // enumeration then stops at the previous level and the result becomes
  // an interval.
  size_t max_candidates = size_t{4} << 20;
  // A known proof size used as the interval's upper bound when the
  // search is not exhaustive (kUnbounded = none known).
  int64_t known_proof_size = SizeBound::kUnbounded;
};

// Smallest measure over all D-terms d built from alpha's axiom leaves
// with a defined most general theorem whose argument subsumes goal_arg.
// Searching only marker-free terms is exhaustive: in any proof whose
// "n" uses pass the any-minor guard, replacing every "n" by an axiom
// leaf preserves the most general theorem and never increases c-size or
// tree size. Returns the exact minimum when it lies within the budget,
// else [budget+1, known_proof_size] (or [budget+1, inf)).
SizeBound min_proof_size(TermId goal_arg, const AxiomAssignment& alpha,
                         ProofMeasure measure, const MinProofOptions& opts = {});

// ------------------------------------------------- per-label operations
// Maximum and rounded median of the tree size and height of the
// instantiated proof theorems at every occurrence of the subproof in
// the expanded goal trees. The median of an even count is the mean of
// the two middle values rounded half-up.
struct IptStats {
  int64_t it_u = 0;  // max tree size
  int64_t it_m = 0;  // rounded median tree size
  int64_t ih_u = 0;  // max height
  int64_t ih_m = 0;  // rounded median height
  int64_t occurrences = 0;
};
IptStats ipt_stats(const CompactedDTerm& delta, const AxiomAssignment& alpha,
                   PrimId label);

// Reducibility of the expanded subproof taken as a proof of its own:
// rs = no single-occurrence replacement pair exists (the in-context
// instance-based test), rc = no all-occurrence replacement candidate
// exists (the compaction-ordering test).
struct Regularity {
  bool rs = true;
  bool rc = true;
};
Regularity regularity(const CompactedDTerm& delta, const AxiomAssignment& alpha,
                      PrimId label);

// ------------------------------------------------------------ concordance
// Curated cross-reference data: canonical formula -> historical labels
// (columns MER and ŁUK) and nickname (column NN). Never computed; loaded
// from a tab-separated file with columns polish, MER, ŁUK, NN (header
// line required, '#' comments allowed, empty cells allowed).
struct Concordance {
  struct Entry {
    std::string mer;
    std::string luk;
    std::string nn;
  };
  std::vector<std::pair<TermId, Entry>> entries;  // key: canonical renaming

  void add(TermId formula, const std::string& mer, const std::string& luk,
           const std::string& nn);
  // nullptr when the formula has no entry (lookup by variant class).
  const Entry* find(TermId formula) const;
};
Concordance load_concordance(const std::string& path);
Concordance parse_concordance_text(const std::string& text);

// ------------------------------------------------------------ the report
// One row per axiom primitive plus one per distinct compound subproof of
// the expanded label trees, in definition order (axioms first, then
// compounds by first post-order appearance while walking the bindings in
// definition order). `label` is the 1-based row number; `dterm` renders
// the row's node with children named by row numbers.
struct PropertyRow {
  std::string label;
  std::string dterm;
  std::string mer, luk, nn;       // concordance cross-references
  int64_t dc = 0;                 // compacted size
  int64_t dt = 0;                 // tree size
  int64_t dh = 0;                 // height
  int64_t dx = 0;                 // sc-size
  int64_t di = 0;                 // in-edges in the minimal DAG (per slot)
  int64_t dr = 0;                 // occurrences in the expanded goal trees
  bool compound = false;          // axiom rows have no DS entry
  DsTag ds = DsTag::None;
  bool dp = false;                // prime
  int32_t dk_l = 0, dk_r = 0;     // longest unidirectional edge runs
  int64_t fc = 0;                 // compacted size of the theorem
  int64_t ft = 0;                 // tree size of the theorem
  int64_t fh = 0;                 // height of the theorem
  int64_t fv = 0;                 // distinct variables of the theorem
  OrganicStatus fo = OrganicStatus::Undetermined;
  SizeBound mc, mt;               // minimal proof sizes
  bool rs = true, rc = true;      // regularity
  int64_t it_u = 0, it_m = 0;     // instantiated-theorem tree-size stats
  int64_t ih_u = 0, ih_m = 0;     // instantiated-theorem height stats
  DTermId subject = kNoDTerm;     // the row's node (expanded)
  TermId theorem = kNoTerm;       // canonical MGT argument
};

struct AnalyzeOptions {
  MinProofOptions min_proof;
  int jobs = 0;  // 0 = library default, 1 = serial reference
};

// Errors: UndefinedMgt when some goal tree proves nothing, InvalidNUse
// via the underlying proof machinery, UnknownLabel/CyclicLabels from
// expansion.
std::vector<PropertyRow> analyze(const CompactedDTerm& delta,
                                 const AxiomAssignment& alpha,
                                 const Concordance& concordance = {},
                                 const AnalyzeOptions& opts = {});

// ---------------------------------------------------------------- export
// CSV header: label,dterm,MER,ŁUK,NN,DC,DT,DH,DX,DI,DR,DS,DP,DK_L,DK_R,
// FC,FT,FH,FV,FO,MC,MT,RS,RC,IT_U,IT_M,IH_U,IH_M. Booleans render as
// "•"/"-", organicness as "•"/"(•)"/"-"/"?", intervals as "[lo,hi]";
// the DS cell of an axiom row is empty.
std::string rows_to_csv(const std::vector<PropertyRow>& rows);
// JSON: array of objects with the same keys; counts are numbers,
// DP/RS/RC are booleans, MC/MT are numbers when exact and "[lo,hi]"
// strings otherwise, DS/FO are tag strings (DS null on axiom rows).
std::string rows_to_json(const std::vector<PropertyRow>& rows);

}  // namespace cdt

#endif  // CDT_ANALYZE_HPP
