// Text formats: Polish notation for implicational formulas, D-notation
// for detachment proof structures, the line-oriented proof-corpus file
// format, a JSON rendering of corpora, and the TPTP CNF subset used by
// condensed-detachment problem files.
#ifndef CDT_FORMATS_HPP
#define CDT_FORMATS_HPP

#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cdt/dterm.hpp"
#include "cdt/term.hpp"

namespace cdt {

// ---------------------------------------------------------------- Polish
// Alphabet: 'C' (binary implication, prefix) and variables written as a
// lowercase letter optionally followed by digits ("p", "v12"). Letters
// listed in `constants` parse as constant symbols instead. Errors:
// Malformed on truncated or trailing input.
TermId parse_polish(const std::string& text,
                    const std::unordered_set<char>& constants = {});
// Inverse of parse_polish on the implicational fragment; throws
// NonImplicational for terms with any other functor.
std::string print_polish(TermId t);

// ------------------------------------------------------------ D-notation
// Alphabet: 'D', digits, '.', 'n'. Strict reading: a digit run
// terminated by '.' is one numeral; an unterminated run is a sequence of
// single-digit numerals. Lenient reading: on a strict parse failure,
// retry with unterminated runs read greedily as whole numerals.
enum class DotPolicy { Strict, Lenient };
DTermId parse_dnotation(const std::string& text, DotPolicy dots = DotPolicy::Strict);
// Canonical printing: a numeral is followed by '.' iff it has >= 2
// digits or the next token is a dotted numeral (so printed digit runs
// never merge). Throws Malformed for primitives whose names are neither
// digit strings nor "n".
std::string print_dnotation(DTermId d);

// ----------------------------------------------------------- proof corpus
// Line-oriented, UTF-8, '#' starts a comment line. Entries:
//   label : PolishFormula     (axiom)
//   label = DNotation         (proof step; a bare label/primitive rhs
//                              records an alias)
// A '* ' prefix marks a goal root. Labels are digit strings; "n" is
// reserved. References must be to labels defined on earlier lines
// (UndefinedLabel), a label may be bound once (DuplicateLabel), and a
// step referencing itself raises CyclicLabels.
struct Corpus {
  CompactedDTerm delta;
  std::vector<std::pair<PrimId, TermId>> axioms;  // label -> formula
  std::vector<PrimId> line_order;                 // step labels in file order
};

Corpus parse_corpus_text(const std::string& text, DotPolicy dots = DotPolicy::Strict);
Corpus load_corpus(const std::string& path, DotPolicy dots = DotPolicy::Strict);
std::string print_corpus(const Corpus& c);
void save_corpus(const Corpus& c, const std::string& path);
// Wrap a compacted proof with axiom formulas (canonical line order:
// bindings first, then aliases).
Corpus make_corpus(const CompactedDTerm& delta,
                   const std::vector<std::pair<PrimId, TermId>>& axioms);

// ------------------------------------------------------------------ JSON
// Schema: {"axioms": {label: polish}, "steps": [{"label": l, "d":
// nested-array-or-label}], "roots": [goal labels]}. A step's "d" value
// renders D(a, b) as [a, b] with leaves as label strings.
std::string corpus_to_json(const Corpus& c);
Corpus corpus_from_json(const std::string& json_text);

// ------------------------------------------------------------ TPTP subset
// cnf(name, role, clause). records; '%' comments. Recognized clause
// shapes: the detachment rule (two negative literals, one over a binary
// application of the implication functor, plus the matching positive
// literal), unit positive axioms (variables normalized to x_eps^i in
// first-occurrence order), and one unit negative ground goal. Errors:
// Malformed (syntax), UnrecognizedClauseShape, MultipleDetClauses.
struct CdProblem {
  std::vector<std::pair<std::string, TermId>> axioms;  // clause name -> formula
  std::optional<TermId> goal;                          // ground (Skolem constants)
  std::string det_name;                                // detachment clause name
};

CdProblem parse_tptp_text(const std::string& text);
CdProblem load_tptp(const std::string& path);

// ----------------------------------------------------------------- files
std::string read_text_file(const std::string& path);  // Malformed if unreadable
void write_text_file(const std::string& path, const std::string& content);

}  // namespace cdt

#endif  // CDT_FORMATS_HPP
