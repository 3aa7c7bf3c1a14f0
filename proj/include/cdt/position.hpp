// Dewey positions into terms and proof trees.
//
// A position is a sequence of 1-based argument indices; the empty
// sequence addresses the root. Positions are ordered first by length
// then lexicographically where noted, but most consumers only need
// prefix tests and printing ("1.2.1"; the root prints as "e").
#ifndef CDT_POSITION_HPP
#define CDT_POSITION_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace cdt {

using Position = std::vector<int32_t>;

inline std::string position_to_string(const Position& p) {
  if (p.empty()) return "e";
  std::string s;
  for (size_t i = 0; i < p.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(p[i]);
  }
  return s;
}

Position parse_position(const std::string& s);

// Strict prefix: p addresses a proper ancestor of q.
inline bool is_strict_prefix(const Position& p, const Position& q) {
  if (p.size() >= q.size()) return false;
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] != q[i]) return false;
  return true;
}

inline bool is_prefix(const Position& p, const Position& q) {
  return p.size() == q.size() ? p == q : is_strict_prefix(p, q);
}

// Lexicographic order on equal footing with depth-insensitive
// left-to-right reading order (shorter prefixes first).
inline bool position_lex_less(const Position& a, const Position& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace cdt

#endif  // CDT_POSITION_HPP
