#pragma once

#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "skelfix/abstraction.hpp"
#include "skelfix/analysis.hpp"
#include "skelfix/differencing.hpp"
#include "skelfix/typecheck.hpp"

namespace skelfix {

struct NoFilling : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InstantiationCaps {
  std::size_t max_candidates_per_skeleton = 500;
  std::size_t max_mods_per_patch = 3;
};

// One concrete statement produced from a skeleton.
struct InstantiatedStatement {
  AstNode stmt;
  std::map<int, std::string> tokens;  // hole id -> chosen token
  bool identity = false;
  bool all_common = false;
  std::size_t distance = 0;  // token edit distance to the origin statement
};

struct InstantiationContext {
  std::size_t site = 0;  // unit-text offset of the repair position
  std::set<std::string> buggy_tokens;
  std::set<std::string> guide_tokens;
};

struct CandidatePatch {
  std::vector<Modification> applied_modifications;
  AstNode patched_body;
  int guiding_patch_id = 0;
  std::size_t distance_to_guide = 0;
  int candidate_id = 0;
  std::vector<std::size_t> subset;  // modification indices into the script
  std::map<std::size_t, std::map<int, std::string>> fillings;
};

namespace detail {

inline TypeChecker site_checker(const SymbolTable& table, std::size_t site) {
  TypeChecker c(table.classes, table.enclosing_class,
                table.enclosing_return_type);
  c.push_scope();
  for (const VariableInfo& v :
       visible_variables(site, TypeConstraint::none(), table)) {
    if (v.kind == VariableInfo::Kind::Local ||
        v.kind == VariableInfo::Kind::Parameter)
      c.declare(v.name, v.declared_type);
  }
  c.set_permissive_loop_context();
  c.set_constructor_context(table.repair_function == table.enclosing_class);
  return c;
}

inline bool statement_checks(const AstNode& stmt, const SymbolTable& table,
                             std::size_t site) {
  TypeChecker c = site_checker(table, site);
  c.push_scope();
  c.check_statement(stmt);
  return c.errors.empty();
}

inline std::optional<std::string> fragment_type(const AstNode& e,
                                                const SymbolTable& table,
                                                std::size_t site) {
  TypeChecker c = site_checker(table, site);
  auto t = c.type_of(e);
  if (!c.errors.empty()) return std::nullopt;
  return t;
}

// Enumeration of hole fillings in rank-sum order. Per-hole candidate lists
// are computed lazily because later holes depend on earlier choices (a method
// name hole needs its receiver's type).
class SkeletonFiller {
 public:
  SkeletonFiller(const Skeleton& sk, const SymbolTable& table,
                 const InstantiationContext& ctx)
      : sk_(sk), table_(table), ctx_(ctx) {
    origin_tokens_ = tokenize_node(instantiate_tokens(sk_.root, {}));
  }

  std::vector<InstantiatedStatement> enumerate(std::size_t cap) {
    std::vector<InstantiatedStatement> out;
    std::set<std::string> seen_text;

    auto add = [&](std::map<int, std::string> tokens, bool identity) {
      AstNode stmt = instantiate_tokens(sk_.root, tokens);
      std::string text = pretty_print(stmt);
      if (!seen_text.insert(text).second) return;
      if (!statement_checks(stmt, table_, ctx_.site)) return;
      InstantiatedStatement inst;
      inst.tokens = std::move(tokens);
      inst.identity = identity;
      inst.all_common = all_common(inst.tokens);
      inst.distance = token_edit_distance(tokenize_node(stmt), origin_tokens_);
      inst.stmt = std::move(stmt);
      out.push_back(std::move(inst));
    };

    // the guide's own statement comes first whenever it is valid here
    std::map<int, std::string> identity_fill;
    for (const Hole& h : sk_.holes)
      identity_fill[h.hole_id] = h.origin_token;
    add(identity_fill, true);

    if (sk_.holes.empty()) {
      if (out.empty())
        throw NoFilling("statement is not usable at the repair site");
      return out;
    }

    // best-first over per-hole rank sums
    struct State {
      std::size_t rank_sum;
      std::vector<std::size_t> ranks;
      std::map<int, std::string> tokens;
      std::size_t next_hole;
    };
    auto cmp = [](const State& a, const State& b) {
      if (a.rank_sum != b.rank_sum) return a.rank_sum > b.rank_sum;
      return a.ranks > b.ranks;
    };
    std::priority_queue<State, std::vector<State>, decltype(cmp)> frontier(
        cmp);
    frontier.push({0, {}, {}, 0});
    bool saw_empty_candidates = false;
    std::size_t expansions = 0;
    const std::size_t expansion_limit = 200000;

    while (!frontier.empty() && out.size() < cap &&
           expansions < expansion_limit) {
      State st = frontier.top();
      frontier.pop();
      ++expansions;
      if (st.next_hole == sk_.holes.size()) {
        add(st.tokens, false);
        continue;
      }
      const Hole& h = sk_.holes[st.next_hole];
      std::vector<std::string> cands = hole_candidates(h, st.tokens);
      if (cands.empty()) {
        saw_empty_candidates = true;
        continue;
      }
      for (std::size_t r = 0; r < cands.size(); ++r) {
        State next = st;
        next.rank_sum += r;
        next.ranks.push_back(r);
        next.tokens[h.hole_id] = cands[r];
        next.next_hole = st.next_hole + 1;
        frontier.push(std::move(next));
      }
    }

    if (out.empty()) {
      throw NoFilling(saw_empty_candidates
                          ? "a hole has no candidate elements"
                          : "no filling survives the type check");
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const InstantiatedStatement& a,
                        const InstantiatedStatement& b) {
                       if (a.identity != b.identity) return a.identity;
                       if (a.all_common != b.all_common) return a.all_common;
                       if (a.distance != b.distance)
                         return a.distance < b.distance;
                       return pretty_print(a.stmt) < pretty_print(b.stmt);
                     });
    if (out.size() > cap) out.resize(cap);
    return out;
  }

 private:
  const Skeleton& sk_;
  const SymbolTable& table_;
  const InstantiationContext& ctx_;
  TokenSequence origin_tokens_;

  bool all_common(const std::map<int, std::string>& tokens) const {
    for (const auto& [id, tok] : tokens)
      if (!ctx_.buggy_tokens.count(tok) || !ctx_.guide_tokens.count(tok))
        return false;
    return true;
  }

  // Moves candidates found in both the buggy code and the guiding patch to
  // the front, keeping the origin token first overall.
  std::vector<std::string> ranked(std::vector<std::string> cands,
                                  const std::string& origin) const {
    std::vector<std::string> out;
    std::set<std::string> used;
    auto push = [&](const std::string& c) {
      if (used.insert(c).second) out.push_back(c);
    };
    for (const std::string& c : cands)
      if (c == origin) push(c);
    for (const std::string& c : cands)
      if (ctx_.buggy_tokens.count(c) && ctx_.guide_tokens.count(c)) push(c);
    for (const std::string& c : cands) push(c);
    return out;
  }

  const SkelNode* find_hole_node(const SkelNode& n, int hole_id) const {
    if (n.hole_id == hole_id) return &n;
    for (const auto& c : n.children)
      if (const SkelNode* f = find_hole_node(c, hole_id)) return f;
    return nullptr;
  }

  std::optional<std::string> typed_receiver(
      const SkelNode& node, const std::map<int, std::string>& partial) const {
    if (node.children.empty() ||
        node.children[0].kind == NodeKind::Empty)
      return std::nullopt;
    AstNode recv = instantiate_tokens(node.children[0], partial);
    return fragment_type(recv, table_, ctx_.site);
  }

  std::vector<std::string> hole_candidates(
      const Hole& h, const std::map<int, std::string>& partial) const {
    const SkelNode* node = find_hole_node(sk_.root, h.hole_id);
    std::vector<std::string> cands;
    switch (h.hole_kind) {
      case HoleKind::VAR: {
        if (node && node->kind == NodeKind::FieldAccess) {
          auto recv = typed_receiver(*node, partial);
          if (!recv) return {};
          bool static_recv = recv->rfind("class:", 0) == 0;
          std::string type = static_recv ? recv->substr(6) : *recv;
          cands = field_candidates(type, h.constraint, static_recv);
        } else if (node && node->kind == NodeKind::SuperFieldAccess) {
          auto it = table_.classes.find(table_.enclosing_class);
          if (it == table_.classes.end() || !it->second.supertype) return {};
          cands = field_candidates(*it->second.supertype, h.constraint,
                                   false);
        } else {
          for (const VariableInfo& v :
               visible_variables(ctx_.site, h.constraint, table_))
            cands.push_back(v.name);
          // a receiver may also be a class name (static access)
          if (table_.classes.count(h.origin_token))
            cands.push_back(h.origin_token);
        }
        break;
      }
      case HoleKind::FNAME: {
        std::size_t arity = h.constraint.arg_types.size();
        TypeConstraint ret = h.constraint.return_constraint
                                 ? *h.constraint.return_constraint
                                 : TypeConstraint::none();
        std::optional<std::string> recv_type;
        bool static_only = false;
        if (node && node->kind == NodeKind::SuperMethodInvocation) {
          auto it = table_.classes.find(table_.enclosing_class);
          if (it == table_.classes.end() || !it->second.supertype) return {};
          recv_type = *it->second.supertype;
        } else if (node && node->children.size() > 0 &&
                   node->children[0].kind != NodeKind::Empty) {
          auto t = typed_receiver(*node, partial);
          if (!t) return {};
          if (t->rfind("class:", 0) == 0) {
            recv_type = t->substr(6);
            static_only = true;
          } else {
            recv_type = *t;
          }
        }
        for (const MethodSig& m :
             candidate_methods(recv_type, arity, ret, table_)) {
          if (static_only && !m.is_static) continue;
          // unqualified calls must resolve in the enclosing chain
          if (!recv_type && !owner_in_enclosing_chain(m.owner)) continue;
          cands.push_back(m.name);
        }
        break;
      }
      case HoleKind::CNAME: {
        std::size_t arity = h.constraint.arg_types.size();
        TypeConstraint want = h.constraint.return_constraint
                                  ? *h.constraint.return_constraint
                                  : TypeConstraint::none();
        for (const ClassInfo& c : candidate_classes(want, arity, table_))
          cands.push_back(c.name);
        break;
      }
      case HoleKind::INFIX_OP:
        cands = infix_domain(h, partial);
        break;
      case HoleKind::PREFIX_OP: {
        const std::string& op = h.origin_token;
        if (op == "!")
          cands = {"!"};
        else if (op == "-" || op == "+")
          cands = {"-", "+"};
        else if (op == "~")
          cands = {"~"};
        else
          cands = {"++", "--"};
        break;
      }
      case HoleKind::POSTFIX_OP:
        cands = {"++", "--"};
        break;
    }
    return ranked(std::move(cands), h.origin_token);
  }

  bool owner_in_enclosing_chain(const std::string& owner) const {
    std::string cur = table_.enclosing_class;
    for (int guard = 0; guard < 64; ++guard) {
      if (cur == owner) return true;
      auto it = table_.classes.find(cur);
      if (it == table_.classes.end() || !it->second.supertype) return false;
      cur = *it->second.supertype;
    }
    return false;
  }

  std::vector<std::string> field_candidates(const std::string& type,
                                            const TypeConstraint& want,
                                            bool static_only) const {
    std::vector<std::string> out;
    std::string cur = type;
    bool own = cur == table_.enclosing_class;
    for (int guard = 0; guard < 64; ++guard) {
      auto it = table_.classes.find(cur);
      if (it == table_.classes.end()) break;
      for (const VariableInfo& f : it->second.fields) {
        if (f.is_private && !own) continue;
        if (static_only && !f.is_static) continue;
        if (!type_compatible(f.declared_type, want, table_)) continue;
        out.push_back(f.name);
      }
      if (!it->second.supertype) break;
      cur = *it->second.supertype;
      own = cur == table_.enclosing_class;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::string operand_category(
      const Hole& h, const std::map<int, std::string>& partial) const {
    if (!h.operand_type.empty()) return h.operand_type;
    const SkelNode* node = find_hole_node(sk_.root, h.hole_id);
    if (node && !node->children.empty()) {
      AstNode left = instantiate_tokens(node->children[0], partial);
      if (auto t = fragment_type(left, table_, ctx_.site)) {
        if (*t == "boolean") return "boolean";
        if (is_numeric(*t) || *t == "char") return "num";
        if (*t == "String") return "String";
        return "ref";
      }
    }
    return "";
  }

  // Candidate operators keep the origin operator's value category so the
  // substitution is type preserving: comparisons stay comparisons, logical
  // connectives stay boolean, arithmetic stays arithmetic.
  std::vector<std::string> infix_domain(
      const Hole& h, const std::map<int, std::string>& partial) const {
    const std::string& op = h.origin_token;
    std::string cat = operand_category(h, partial);
    bool comparison = op == "<" || op == ">" || op == "<=" || op == ">=" ||
                      op == "==" || op == "!=";
    if (comparison) {
      if (cat == "boolean" || cat == "String" || cat == "ref")
        return {"==", "!="};
      return {"<", ">", "<=", ">=", "==", "!="};
    }
    if (op == "&&" || op == "||") return {"&&", "||", "&", "|", "^"};
    if (op == "&" || op == "|" || op == "^") {
      if (cat == "boolean") return {"&", "|", "^", "&&", "||"};
      return {"&", "|", "^"};
    }
    if (cat == "String") return {"+"};
    return {"+", "-", "*", "/", "%"};
  }
};

}  // namespace detail

// All constraint-satisfying concrete statements for one skeleton, best first:
// the guide's own statement, then fillings whose elements appear in both the
// buggy code and the guide, then by rising distance to the guide statement.
inline std::vector<InstantiatedStatement> instantiate_skeleton(
    const Skeleton& sk, const SymbolTable& table,
    const InstantiationContext& ctx, std::size_t cap = 500) {
  if (cap == 0) cap = 1;
  detail::SkeletonFiller filler(sk, table, ctx);
  return filler.enumerate(cap);
}

// Modification subsets in application order: the whole script first when it
// is small enough, then subsets of at most `max_size` by falling total
// complexity. Ties keep document order.
inline std::vector<std::vector<std::size_t>> select_modification_subsets(
    const EditScript& script, std::size_t max_size = 3) {
  const std::size_t n = script.modifications.size();
  std::vector<std::vector<std::size_t>> subsets;
  std::vector<std::size_t> full(n);
  for (std::size_t i = 0; i < n; ++i) full[i] = i;
  if (n <= max_size && n > 0) subsets.push_back(full);

  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> rest;
  std::vector<std::size_t> idx;
  auto complexity = [&](const std::vector<std::size_t>& s) {
    std::size_t sum = 0;
    for (std::size_t i : s) sum += script.modifications[i].complexity;
    return sum;
  };
  std::function<void(std::size_t)> gen = [&](std::size_t from) {
    if (!idx.empty() && idx.size() <= max_size && idx.size() != n)
      rest.emplace_back(complexity(idx), idx);
    if (idx.size() == max_size) return;
    for (std::size_t i = from; i < n; ++i) {
      idx.push_back(i);
      gen(i + 1);
      idx.pop_back();
    }
  };
  gen(0);
  std::stable_sort(rest.begin(), rest.end(),
                   [](const auto& a, const auto& b) {
                     if (a.first != b.first) return a.first > b.first;
                     return a.second < b.second;
                   });
  for (auto& [c, s] : rest) subsets.push_back(std::move(s));
  return subsets;
}

struct GenerationInput {
  const SourceUnit* buggy_unit = nullptr;
  std::string function;
  const AstNode* buggy_body = nullptr;
  const std::vector<SourceUnit>* extra_units = nullptr;
  int guide_id = 0;
  const AstNode* guide_body = nullptr;
  InstantiationCaps caps;
};

// The unit with the named function's body replaced.
inline std::string unit_with_body(const SourceUnit& unit,
                                  const std::string& fn,
                                  const AstNode& new_body) {
  SourceUnit copy = unit;
  for (auto& cls : copy.classes) {
    for (auto& m : cls.children) {
      if ((m.kind == NodeKind::MethodDecl ||
           m.kind == NodeKind::ConstructorDecl) &&
          m.token == fn) {
        m.children.back() = new_body;
        reindex_unit(copy);
        return unit_text(copy);
      }
    }
  }
  return unit_text(copy);
}

namespace detail {

inline std::size_t insert_site(const AstNode& body, const Modification& m) {
  const AstNode* container = node_at(body, m.parent);
  if (!container) return body.span.begin + 1;
  std::size_t base = container->kind == NodeKind::SwitchCase ? 1 : 0;
  std::size_t pos = base + static_cast<std::size_t>(m.index);
  if (pos < container->children.size())
    return container->children[pos].span.begin;
  return container->span.end > 0 ? container->span.end - 1
                                 : body.span.begin + 1;
}

inline std::size_t mod_site(const AstNode& body, const Modification& m) {
  if (m.op == ModOp::Insert) return insert_site(body, m);
  const AstNode* target = node_at(body, m.target);
  return target ? target->span.begin : body.span.begin + 1;
}

}  // namespace detail

// Streams candidate patches for one guiding patch's edit script into `sink`
// until the stream ends or the sink returns false. `skeletons` aligns with
// the script (no entry for Delete). Candidates are deduplicated by canonical
// body text and must pass a full re-parse and type check.
inline void generate_candidates(
    const EditScript& script,
    const std::vector<std::optional<Skeleton>>& skeletons,
    const SymbolTable& table, const GenerationInput& in,
    const std::function<bool(CandidatePatch&&)>& sink) {
  static const std::vector<SourceUnit> no_extras;
  const std::vector<SourceUnit>& extras =
      in.extra_units ? *in.extra_units : no_extras;

  InstantiationContext ctx;
  ctx.buggy_tokens = [&] {
    TokenSequence t = tokenize_node(*in.buggy_body);
    return std::set<std::string>(t.begin(), t.end());
  }();
  ctx.guide_tokens = [&] {
    TokenSequence t = tokenize_node(*in.guide_body);
    return std::set<std::string>(t.begin(), t.end());
  }();

  TokenSequence guide_tokens = tokenize_node(*in.guide_body);
  std::string buggy_text = pretty_print(*in.buggy_body);

  // per-modification instantiation lists, computed on first use
  std::vector<std::optional<std::vector<InstantiatedStatement>>> lists(
      script.modifications.size());
  auto list_for = [&](std::size_t mi)
      -> const std::vector<InstantiatedStatement>* {
    if (lists[mi]) return &*lists[mi];
    const Modification& m = script.modifications[mi];
    if (m.op == ModOp::Delete) {
      InstantiatedStatement del;
      del.identity = true;
      lists[mi] = std::vector<InstantiatedStatement>{std::move(del)};
      return &*lists[mi];
    }
    ctx.site = detail::mod_site(*in.buggy_body, m);
    try {
      lists[mi] = instantiate_skeleton(*skeletons[mi], table, ctx,
                                       in.caps.max_candidates_per_skeleton);
    } catch (const NoFilling&) {
      lists[mi] = std::vector<InstantiatedStatement>{};
    }
    return &*lists[mi];
  };

  std::set<std::string> seen_bodies;
  int next_id = 0;

  for (const std::vector<std::size_t>& subset :
       select_modification_subsets(script, in.caps.max_mods_per_patch)) {
    std::vector<const std::vector<InstantiatedStatement>*> per_mod;
    bool viable = true;
    for (std::size_t mi : subset) {
      const auto* list = list_for(mi);
      if (list->empty()) {
        viable = false;
        break;
      }
      per_mod.push_back(list);
    }
    if (!viable) continue;

    // rank-sum breadth-first combination so low-distance fillings surface
    // early across all modifications in the subset
    struct Combo {
      std::size_t sum;
      std::vector<std::size_t> ranks;
    };
    auto cmp = [](const Combo& a, const Combo& b) {
      if (a.sum != b.sum) return a.sum > b.sum;
      return a.ranks > b.ranks;
    };
    std::priority_queue<Combo, std::vector<Combo>, decltype(cmp)> frontier(
        cmp);
    frontier.push({0, std::vector<std::size_t>(subset.size(), 0)});
    std::set<std::vector<std::size_t>> queued{
        std::vector<std::size_t>(subset.size(), 0)};

    while (!frontier.empty()) {
      Combo combo = frontier.top();
      frontier.pop();

      EditScript applied;
      CandidatePatch cand;
      for (std::size_t k = 0; k < subset.size(); ++k) {
        std::size_t mi = subset[k];
        const InstantiatedStatement& inst = (*per_mod[k])[combo.ranks[k]];
        Modification m = script.modifications[mi];
        if (m.op != ModOp::Delete) {
          m.payload = inst.stmt;
          cand.fillings[mi] = inst.tokens;
        }
        applied.modifications.push_back(std::move(m));
      }

      bool emitted_ok = true;
      try {
        AstNode body = apply_edit_script(*in.buggy_body, applied);
        std::string text = pretty_print(body);
        if (text != buggy_text && seen_bodies.insert(text).second) {
          std::string whole = unit_with_body(*in.buggy_unit, in.function,
                                             body);
          if (check_unit_text(whole, in.function, extras).empty()) {
            cand.applied_modifications = std::move(applied.modifications);
            cand.patched_body = std::move(body);
            cand.guiding_patch_id = in.guide_id;
            cand.distance_to_guide =
                token_edit_distance(tokenize_node(cand.patched_body),
                                    guide_tokens);
            cand.candidate_id = next_id++;
            cand.subset = subset;
            emitted_ok = sink(std::move(cand));
          }
        }
      } catch (const AnchorNotFound&) {
        // a combination of modifications can destroy another's anchor
      }
      if (!emitted_ok) return;

      for (std::size_t k = 0; k < subset.size(); ++k) {
        if (combo.ranks[k] + 1 >= per_mod[k]->size()) continue;
        Combo next = combo;
        next.ranks[k] += 1;
        next.sum += 1;
        if (queued.insert(next.ranks).second) frontier.push(std::move(next));
      }
    }
  }
}

inline nlohmann::json to_json(const CandidatePatch& c) {
  nlohmann::json fill = nlohmann::json::object();
  for (const auto& [mi, tokens] : c.fillings) {
    nlohmann::json t = nlohmann::json::object();
    for (const auto& [hole, tok] : tokens) t[std::to_string(hole)] = tok;
    fill[std::to_string(mi)] = std::move(t);
  }
  return nlohmann::json{{"candidate_id", c.candidate_id},
                        {"guide_id", c.guiding_patch_id},
                        {"subset", c.subset},
                        {"distance_to_guide", c.distance_to_guide},
                        {"fillings", std::move(fill)},
                        {"body", pretty_print(c.patched_body)}};
}

}  // namespace skelfix
