#include "cdt/term.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "cdt/detail/chunked.hpp"

namespace cdt {

namespace {

// ------------------------------------------------------------ registries

struct FunctorInfo {
  std::string name;
  int arity;
};

struct Registry {
  std::mutex mu;
  std::vector<FunctorInfo> functors;
  std::unordered_map<std::string, SymId> functor_ids;  // key: name/arity
  std::vector<std::string> constants;
  std::unordered_map<std::string, SymId> constant_ids;
};

Registry& reg() {
  static Registry r;
  return r;
}

struct VarInfo {
  std::string name;
  VarKind kind = VarKind::Named;
  Position pos;
  int index = 0;
};

struct VarRegistry {
  std::mutex mu;
  std::vector<VarInfo> vars;
  std::unordered_map<std::string, VarId> by_key;
};

VarRegistry& vreg() {
  static VarRegistry r;
  return r;
}

std::string pos_key(const Position& p) {
  std::string k;
  for (int32_t i : p) {
    k += std::to_string(i);
    k += '.';
  }
  return k;
}

// ------------------------------------------------------------ term arena

struct TermNode {
  uint8_t kind = 0;
  int32_t sym = 0;
  int32_t nargs = 0;
  uint32_t args_ofs = 0;
  // Lazily cached measures; -1 = not yet computed. Races are benign:
  // every writer stores the same value.
  std::atomic<int64_t> inner_count{-1};
  std::atomic<int32_t> height{-1};
  std::atomic<int64_t> compound_count{-1};
  std::atomic<int32_t> var_count{-1};
};

constexpr int kShardBits = 4;
constexpr int kShards = 1 << kShardBits;

struct Shard {
  std::mutex mu;
  detail::ChunkedStore<TermNode> nodes;
  detail::ChunkedStore<TermId> args;
  std::unordered_multimap<uint64_t, TermId> dedup;
};

struct Arena {
  Shard shards[kShards];
};

Arena& arena() {
  static Arena a;
  return a;
}

inline uint64_t mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

uint64_t node_hash(TermKind kind, int32_t sym, const TermId* args, int nargs) {
  uint64_t h = mix(0x243f6a8885a308d3ULL, static_cast<uint64_t>(kind));
  h = mix(h, static_cast<uint64_t>(static_cast<uint32_t>(sym)));
  for (int i = 0; i < nargs; ++i) h = mix(h, static_cast<uint64_t>(static_cast<uint32_t>(args[i])));
  return h;
}

inline Shard& shard_of(TermId t) { return arena().shards[t & (kShards - 1)]; }
inline TermNode& node_of(TermId t) { return shard_of(t).nodes[static_cast<size_t>(t) >> kShardBits]; }

TermId intern(TermKind kind, int32_t sym, const TermId* args, int nargs) {
  uint64_t h = node_hash(kind, sym, args, nargs);
  Shard& sh = arena().shards[h & (kShards - 1)];
  std::lock_guard<std::mutex> lock(sh.mu);
  auto range = sh.dedup.equal_range(h);
  for (auto it = range.first; it != range.second; ++it) {
    const TermNode& n = sh.nodes[static_cast<size_t>(it->second) >> kShardBits];
    if (n.kind != static_cast<uint8_t>(kind) || n.sym != sym || n.nargs != nargs) continue;
    bool same = true;
    for (int i = 0; i < nargs && same; ++i) same = sh.args[n.args_ofs + i] == args[i];
    if (same) return it->second;
  }
  uint32_t ofs = static_cast<uint32_t>(sh.args.size());
  for (int i = 0; i < nargs; ++i) {
    sh.args.prepare() = args[i];
    sh.args.publish();
  }
  size_t idx = sh.nodes.size();
  TermNode& n = sh.nodes.prepare();
  n.kind = static_cast<uint8_t>(kind);
  n.sym = sym;
  n.nargs = nargs;
  n.args_ofs = ofs;
  sh.nodes.publish();
  TermId id = static_cast<TermId>((idx << kShardBits) | (h & (kShards - 1)));
  sh.dedup.emplace(h, id);
  return id;
}

}  // namespace

// ---------------------------------------------------------------- symbols

SymId functor(const std::string& name, int arity) {
  Registry& r = reg();
  std::lock_guard<std::mutex> lock(r.mu);
  std::string key = name + "/" + std::to_string(arity);
  auto it = r.functor_ids.find(key);
  if (it != r.functor_ids.end()) return it->second;
  SymId id = static_cast<SymId>(r.functors.size());
  r.functors.push_back({name, arity});
  r.functor_ids.emplace(std::move(key), id);
  return id;
}

SymId constant(const std::string& name) {
  Registry& r = reg();
  std::lock_guard<std::mutex> lock(r.mu);
  auto it = r.constant_ids.find(name);
  if (it != r.constant_ids.end()) return it->second;
  SymId id = static_cast<SymId>(r.constants.size());
  r.constants.push_back(name);
  r.constant_ids.emplace(name, id);
  return id;
}

const std::string& functor_name(SymId f) {
  Registry& r = reg();
  std::lock_guard<std::mutex> lock(r.mu);
  return r.functors[static_cast<size_t>(f)].name;
}

int functor_arity(SymId f) {
  Registry& r = reg();
  std::lock_guard<std::mutex> lock(r.mu);
  return r.functors[static_cast<size_t>(f)].arity;
}

const std::string& constant_name(SymId c) {
  Registry& r = reg();
  std::lock_guard<std::mutex> lock(r.mu);
  return r.constants[static_cast<size_t>(c)];
}

SymId fn_i() {
  static SymId id = functor("i", 2);
  return id;
}

// -------------------------------------------------------------- variables

namespace {
VarId intern_var(const std::string& key, VarInfo info) {
  VarRegistry& r = vreg();
  std::lock_guard<std::mutex> lock(r.mu);
  auto it = r.by_key.find(key);
  if (it != r.by_key.end()) return it->second;
  VarId id = static_cast<VarId>(r.vars.size());
  r.vars.push_back(std::move(info));
  r.by_key.emplace(key, id);
  return id;
}
}  // namespace

VarId named_var(const std::string& name) {
  return intern_var("n:" + name, VarInfo{name, VarKind::Named, {}, 0});
}

VarId pos_var_y(const Position& p) {
  return intern_var("y:" + pos_key(p),
                    VarInfo{"y" + position_to_string(p), VarKind::PosY, p, 0});
}

VarId pos_var_x(const Position& p, int index) {
  return intern_var(
      "x:" + pos_key(p) + "#" + std::to_string(index),
      VarInfo{"x" + position_to_string(p) + "^" + std::to_string(index), VarKind::PosX, p, index});
}

VarId fresh_var() {
  VarRegistry& r = vreg();
  std::lock_guard<std::mutex> lock(r.mu);
  VarId id = static_cast<VarId>(r.vars.size());
  r.vars.push_back(VarInfo{"_" + std::to_string(id), VarKind::Fresh, {}, 0});
  return id;
}

const std::string& var_name(VarId v) {
  VarRegistry& r = vreg();
  std::lock_guard<std::mutex> lock(r.mu);
  return r.vars[static_cast<size_t>(v)].name;
}

VarKind var_kind(VarId v) {
  VarRegistry& r = vreg();
  std::lock_guard<std::mutex> lock(r.mu);
  return r.vars[static_cast<size_t>(v)].kind;
}

const Position& var_position(VarId v) {
  VarRegistry& r = vreg();
  std::lock_guard<std::mutex> lock(r.mu);
  const VarInfo& info = r.vars[static_cast<size_t>(v)];
  if (info.kind != VarKind::PosY && info.kind != VarKind::PosX)
    throw Error("NotPositional", "variable " + info.name + " carries no position");
  return info.pos;
}

int var_index(VarId v) {
  VarRegistry& r = vreg();
  std::lock_guard<std::mutex> lock(r.mu);
  return r.vars[static_cast<size_t>(v)].index;
}

// ------------------------------------------------------------------ terms

TermId mk_var(VarId v) { return intern(TermKind::Var, v, nullptr, 0); }
TermId mk_const(SymId c) { return intern(TermKind::Const, c, nullptr, 0); }

TermId mk_fun(SymId f, const std::vector<TermId>& args) {
  if (static_cast<int>(args.size()) != functor_arity(f))
    throw Error("Arity", "functor " + functor_name(f) + " applied to " +
                             std::to_string(args.size()) + " arguments");
  return intern(TermKind::Fun, f, args.data(), static_cast<int>(args.size()));
}

TermId mk_i(TermId a, TermId b) {
  TermId args[2] = {a, b};
  return intern(TermKind::Fun, fn_i(), args, 2);
}

TermKind term_kind(TermId t) { return static_cast<TermKind>(node_of(t).kind); }
VarId term_var(TermId t) { return node_of(t).sym; }
SymId term_sym(TermId t) { return node_of(t).sym; }
int term_nargs(TermId t) { return node_of(t).nargs; }

TermId term_arg(TermId t, int i) {
  const TermNode& n = node_of(t);
  return shard_of(t).args[n.args_ofs + static_cast<size_t>(i)];
}

// -------------------------------------------------------------- structure

namespace {
void positions_rec(TermId t, Position& cur, std::vector<Position>& out) {
  out.push_back(cur);
  int n = term_nargs(t);
  for (int i = 0; i < n; ++i) {
    cur.push_back(i + 1);
    positions_rec(term_arg(t, i), cur, out);
    cur.pop_back();
  }
}
}  // namespace

std::vector<Position> positions(TermId t) {
  std::vector<Position> out;
  Position cur;
  positions_rec(t, cur, out);
  return out;
}

TermId subterm_at(TermId t, const Position& p) {
  TermId cur = t;
  for (size_t i = 0; i < p.size(); ++i) {
    int32_t k = p[i];
    if (k < 1 || k > term_nargs(cur))
      throw PositionOutOfRangeError("no argument " + std::to_string(k) + " at " +
                                    position_to_string(Position(p.begin(), p.begin() + i)));
    cur = term_arg(cur, k - 1);
  }
  return cur;
}

TermId replace_at(TermId t, const Position& p, TermId s) {
  if (p.empty()) return s;
  int32_t k = p.front();
  if (k < 1 || k > term_nargs(t))
    throw PositionOutOfRangeError("no argument " + std::to_string(k));
  std::vector<TermId> args;
  args.reserve(term_nargs(t));
  for (int i = 0; i < term_nargs(t); ++i) args.push_back(term_arg(t, i));
  args[k - 1] = replace_at(args[k - 1], Position(p.begin() + 1, p.end()), s);
  return mk_fun(term_sym(t), args);
}

std::vector<VarId> term_vars(TermId t) {
  std::vector<VarId> out;
  std::unordered_set<VarId> seen;
  std::unordered_set<TermId> visited;  // shared subterms contribute once
  std::vector<TermId> stack{t};
  while (!stack.empty()) {
    TermId cur = stack.back();
    stack.pop_back();
    switch (term_kind(cur)) {
      case TermKind::Var:
        if (seen.insert(term_var(cur)).second) out.push_back(term_var(cur));
        break;
      case TermKind::Const:
        break;
      case TermKind::Fun:
        if (!visited.insert(cur).second) break;
        for (int i = term_nargs(cur) - 1; i >= 0; --i) stack.push_back(term_arg(cur, i));
        break;
    }
  }
  return out;
}

bool contains_var(TermId t, VarId v) {
  std::vector<TermId> stack{t};
  std::unordered_set<TermId> seen;
  while (!stack.empty()) {
    TermId cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    if (term_kind(cur) == TermKind::Var) {
      if (term_var(cur) == v) return true;
    } else {
      for (int i = 0; i < term_nargs(cur); ++i) stack.push_back(term_arg(cur, i));
    }
  }
  return false;
}

int64_t term_inner_count(TermId t) {
  TermNode& n = node_of(t);
  int64_t cached = n.inner_count.load(std::memory_order_relaxed);
  if (cached >= 0) return cached;
  int64_t v = 0;
  if (term_kind(t) == TermKind::Fun) {
    v = 1;
    for (int i = 0; i < n.nargs; ++i) v += term_inner_count(term_arg(t, i));
  }
  n.inner_count.store(v, std::memory_order_relaxed);
  return v;
}

int32_t term_height(TermId t) {
  TermNode& n = node_of(t);
  int32_t cached = n.height.load(std::memory_order_relaxed);
  if (cached >= 0) return cached;
  int32_t v = 0;
  for (int i = 0; i < n.nargs; ++i) v = std::max(v, 1 + term_height(term_arg(t, i)));
  n.height.store(v, std::memory_order_relaxed);
  return v;
}

int64_t term_compound_count(TermId t) {
  TermNode& n = node_of(t);
  int64_t cached = n.compound_count.load(std::memory_order_relaxed);
  if (cached >= 0) return cached;
  int64_t count = 0;
  std::unordered_set<TermId> seen;
  std::vector<TermId> stack{t};
  while (!stack.empty()) {
    TermId cur = stack.back();
    stack.pop_back();
    if (term_kind(cur) != TermKind::Fun || !seen.insert(cur).second) continue;
    ++count;
    for (int i = 0; i < term_nargs(cur); ++i) stack.push_back(term_arg(cur, i));
  }
  n.compound_count.store(count, std::memory_order_relaxed);
  return count;
}

int term_var_count(TermId t) {
  TermNode& n = node_of(t);
  int32_t cached = n.var_count.load(std::memory_order_relaxed);
  if (cached >= 0) return cached;
  int32_t v = static_cast<int32_t>(term_vars(t).size());
  n.var_count.store(v, std::memory_order_relaxed);
  return v;
}

// ----------------------------------------------------------- substitution

Subst::Subst(std::unordered_map<VarId, TermId> solved) : map_(std::move(solved)) {}

std::optional<TermId> Subst::lookup(VarId v) const {
  auto it = map_.find(v);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

TermId Subst::apply(TermId t) const {
  if (map_.empty()) return t;
  switch (term_kind(t)) {
    case TermKind::Var: {
      auto it = map_.find(term_var(t));
      return it == map_.end() ? t : it->second;
    }
    case TermKind::Const:
      return t;
    case TermKind::Fun: {
      auto memo = memo_.find(t);
      if (memo != memo_.end()) return memo->second;
      std::vector<TermId> args;
      args.reserve(term_nargs(t));
      bool changed = false;
      for (int i = 0; i < term_nargs(t); ++i) {
        TermId a = term_arg(t, i);
        TermId b = apply(a);
        changed |= (a != b);
        args.push_back(b);
      }
      TermId r = changed ? mk_fun(term_sym(t), args) : t;
      memo_.emplace(t, r);
      return r;
    }
  }
  return t;
}

TermId Subst::apply_var(VarId v) const { return apply(mk_var(v)); }

Subst compose(const Subst& s, const Subst& theta) {
  std::unordered_map<VarId, TermId> out;
  for (const auto& [v, img] : s.map()) {
    TermId r = theta.apply(img);
    if (r != mk_var(v)) out.emplace(v, r);
  }
  for (const auto& [v, img] : theta.map()) {
    if (!s.map().count(v) && img != mk_var(v)) out.emplace(v, img);
  }
  return Subst(std::move(out));
}

// ------------------------------------------------------------ unification

namespace {

// Solved-form builder over a triangular binding map. Occurs violations
// surface as cycles among bound variables and make resolution fail.
struct Resolver {
  const std::unordered_map<VarId, TermId>& bind;
  std::unordered_map<VarId, uint8_t> state;  // 1 in progress, 2 done
  std::unordered_map<VarId, TermId> resolved;
  std::unordered_map<TermId, TermId> memo;
  bool ok = true;

  TermId resolve_var(VarId v) {
    auto st = state.find(v);
    if (st != state.end()) {
      if (st->second == 1) {
        ok = false;  // cycle: v depends on itself
        return mk_var(v);
      }
      return resolved[v];
    }
    auto b = bind.find(v);
    if (b == bind.end()) {
      state[v] = 2;
      resolved[v] = mk_var(v);
      return resolved[v];
    }
    state[v] = 1;
    TermId r = apply(b->second);
    state[v] = 2;
    resolved[v] = r;
    return r;
  }

  TermId apply(TermId t) {
    if (!ok) return t;
    switch (term_kind(t)) {
      case TermKind::Var:
        return resolve_var(term_var(t));
      case TermKind::Const:
        return t;
      case TermKind::Fun: {
        auto it = memo.find(t);
        if (it != memo.end()) return it->second;
        std::vector<TermId> args;
        args.reserve(term_nargs(t));
        bool changed = false;
        for (int i = 0; i < term_nargs(t); ++i) {
          TermId a = term_arg(t, i);
          TermId b = apply(a);
          if (!ok) return t;
          changed |= (a != b);
          args.push_back(b);
        }
        TermId r = changed ? mk_fun(term_sym(t), args) : t;
        memo.emplace(t, r);
        return r;
      }
    }
    return t;
  }
};

}  // namespace

std::optional<Subst> unify(const TermPairSet& pairs) {
  std::unordered_map<VarId, TermId> bind;
  std::vector<TermPair> work(pairs.rbegin(), pairs.rend());
  // An equated non-var pair contributes its argument constraints exactly
  // once; skipping repeats keeps the decomposition near-linear when the
  // inputs share subterms.
  std::unordered_set<uint64_t> decomposed;
  auto pair_key = [](TermId a, TermId b) {
    if (b < a) std::swap(a, b);
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
           static_cast<uint32_t>(b);
  };
  auto walk = [&bind](TermId t) {
    while (term_kind(t) == TermKind::Var) {
      auto it = bind.find(term_var(t));
      if (it == bind.end()) break;
      t = it->second;
    }
    return t;
  };
  while (!work.empty()) {
    auto [a, b] = work.back();
    work.pop_back();
    a = walk(a);
    b = walk(b);
    if (a == b) continue;
    if (term_kind(a) == TermKind::Var) {
      bind[term_var(a)] = b;
      continue;
    }
    if (term_kind(b) == TermKind::Var) {
      bind[term_var(b)] = a;
      continue;
    }
    if (term_kind(a) != term_kind(b) || term_sym(a) != term_sym(b) ||
        term_nargs(a) != term_nargs(b))
      return std::nullopt;
    if (!decomposed.insert(pair_key(a, b)).second) continue;
    for (int i = term_nargs(a) - 1; i >= 0; --i)
      work.emplace_back(term_arg(a, i), term_arg(b, i));
  }
  Resolver res{bind, {}, {}, {}, true};
  std::unordered_map<VarId, TermId> solved;
  for (const auto& [v, img] : bind) {
    (void)img;
    TermId r = res.resolve_var(v);
    if (!res.ok) return std::nullopt;
    if (r != mk_var(v)) solved.emplace(v, r);
  }
  return Subst(std::move(solved));
}

std::optional<Subst> unify_one(TermId a, TermId b) { return unify({{a, b}}); }

// ------------------------------------------------------------ subsumption

bool subsumes(TermId s, TermId t) {
  std::unordered_map<VarId, TermId> m;
  // A matched pattern/subject pair yields the same argument constraints on
  // every repeat; skipping them keeps the match near-linear when the inputs
  // share subterms.  Keys are ordered: the sides play different roles.
  std::unordered_set<uint64_t> matched;
  std::vector<TermPair> work{{s, t}};
  while (!work.empty()) {
    auto [a, b] = work.back();
    work.pop_back();
    if (term_kind(a) == TermKind::Var) {
      auto [it, inserted] = m.try_emplace(term_var(a), b);
      if (!inserted && it->second != b) return false;
      continue;
    }
    if (term_kind(a) != term_kind(b) || term_sym(a) != term_sym(b) ||
        term_nargs(a) != term_nargs(b))
      return false;
    uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
                   static_cast<uint32_t>(b);
    if (!matched.insert(key).second) continue;
    for (int i = term_nargs(a) - 1; i >= 0; --i)
      work.emplace_back(term_arg(a, i), term_arg(b, i));
  }
  return true;
}

bool variant(TermId s, TermId t) { return subsumes(s, t) && subsumes(t, s); }

// --------------------------------------------------------------- renaming

namespace {

const char* kDisplayPool[] = {"p", "q", "r", "s", "t", "u", "v", "w"};

}  // namespace

VarId pool_var(RenamePool pool, size_t k) {
  if (pool == RenamePool::Display) {
    if (k < 8) return named_var(kDisplayPool[k]);
    return named_var("v" + std::to_string(k - 7));
  }
  return named_var("v" + std::to_string(k + 1));
}

namespace {

TermId rename_with(TermId t, const std::unordered_map<VarId, TermId>& m,
                   std::unordered_map<TermId, TermId>& memo) {
  switch (term_kind(t)) {
    case TermKind::Var: {
      auto it = m.find(term_var(t));
      return it == m.end() ? t : it->second;
    }
    case TermKind::Const:
      return t;
    case TermKind::Fun: {
      auto it = memo.find(t);
      if (it != memo.end()) return it->second;
      std::vector<TermId> args;
      args.reserve(term_nargs(t));
      bool changed = false;
      for (int i = 0; i < term_nargs(t); ++i) {
        TermId a = term_arg(t, i);
        TermId b = rename_with(a, m, memo);
        changed |= (a != b);
        args.push_back(b);
      }
      TermId r = changed ? mk_fun(term_sym(t), args) : t;
      memo.emplace(t, r);
      return r;
    }
  }
  return t;
}

}  // namespace

TermId rename_canonical(TermId t, RenamePool pool) {
  std::vector<VarId> vars = term_vars(t);
  std::unordered_map<VarId, TermId> m;
  for (size_t k = 0; k < vars.size(); ++k) m.emplace(vars[k], mk_var(pool_var(pool, k)));
  std::unordered_map<TermId, TermId> memo;
  return rename_with(t, m, memo);
}

TermId rename_all_fresh(TermId t) {
  std::vector<VarId> vars = term_vars(t);
  std::unordered_map<VarId, TermId> m;
  for (VarId v : vars) m.emplace(v, mk_var(fresh_var()));
  std::unordered_map<TermId, TermId> memo;
  return rename_with(t, m, memo);
}

Position parse_position(const std::string& s) {
  if (s.empty() || s == "e") return {};
  Position p;
  size_t i = 0;
  while (i < s.size()) {
    size_t j = i;
    while (j < s.size() && s[j] != '.') ++j;
    if (j == i) throw MalformedError("empty component in position '" + s + "'");
    p.push_back(static_cast<int32_t>(std::stol(s.substr(i, j - i))));
    i = j + 1;
  }
  return p;
}

}  // namespace cdt
