#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "skelfix/abstraction.hpp"
#include "skelfix/ast.hpp"
#include "skelfix/parse.hpp"

namespace skelfix {

struct UnknownFunction : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct VariableInfo {
  enum class Kind { Local, Parameter, Field, InheritedField };

  std::string name;
  std::string declared_type;
  Span scope;  // span of the unit text in which the name is visible
  Kind kind = Kind::Local;
  bool is_static = false;
  bool is_private = false;
  std::string owner;  // declaring class, for fields
  int depth = 0;      // block nesting depth, for locals
};

struct MethodSig {
  std::string name;
  std::string owner;
  std::vector<std::string> param_types;
  std::string return_type;
  bool is_static = false;
  bool is_private = false;
};

struct ClassInfo {
  std::string name;
  std::optional<std::string> supertype;
  std::vector<VariableInfo> fields;
  std::vector<MethodSig> constructors;
  std::vector<MethodSig> methods;
  bool is_prelude = false;
};

using ClassEnv = std::map<std::string, ClassInfo>;

struct SymbolTable {
  std::vector<VariableInfo> variables;
  ClassEnv classes;
  std::string enclosing_class;
  std::string enclosing_return_type;
  std::string repair_function;
  Span body_span;
};

inline bool is_primitive(const std::string& t) {
  return t == "int" || t == "long" || t == "short" || t == "byte" ||
         t == "float" || t == "double" || t == "boolean" || t == "char" ||
         t == "void";
}

inline bool is_numeric(const std::string& t) {
  return t == "int" || t == "long" || t == "float" || t == "double";
}

namespace detail {

inline int widening_rank(const std::string& t) {
  if (t == "int") return 0;
  if (t == "long") return 1;
  if (t == "float") return 2;
  if (t == "double") return 3;
  return -1;
}

inline MethodSig sig(std::string owner, std::string name,
                     std::vector<std::string> params, std::string ret,
                     bool is_static = false) {
  MethodSig m;
  m.owner = std::move(owner);
  m.name = std::move(name);
  m.param_types = std::move(params);
  m.return_type = std::move(ret);
  m.is_static = is_static;
  return m;
}

// A small fixed standard library standing in for the JDK.
inline ClassEnv prelude() {
  ClassEnv env;

  ClassInfo object;
  object.name = "Object";
  object.is_prelude = true;
  object.methods = {sig("Object", "equals", {"Object"}, "boolean"),
                    sig("Object", "toString", {}, "String")};
  env["Object"] = object;

  ClassInfo str;
  str.name = "String";
  str.supertype = "Object";
  str.is_prelude = true;
  str.methods = {sig("String", "length", {}, "int"),
                 sig("String", "charAt", {"int"}, "char"),
                 sig("String", "isEmpty", {}, "boolean"),
                 sig("String", "equals", {"Object"}, "boolean"),
                 sig("String", "substring", {"int"}, "String"),
                 sig("String", "substring", {"int", "int"}, "String")};
  env["String"] = str;

  ClassInfo math;
  math.name = "Math";
  math.supertype = "Object";
  math.is_prelude = true;
  math.methods = {sig("Math", "abs", {"int"}, "int", true),
                  sig("Math", "abs", {"double"}, "double", true),
                  sig("Math", "max", {"int", "int"}, "int", true),
                  sig("Math", "max", {"double", "double"}, "double", true),
                  sig("Math", "min", {"int", "int"}, "int", true),
                  sig("Math", "min", {"double", "double"}, "double", true),
                  sig("Math", "atan2", {"double", "double"}, "double", true)};
  env["Math"] = math;

  auto exception_class = [&env](const std::string& name,
                                const std::string& super) {
    ClassInfo c;
    c.name = name;
    c.supertype = super;
    c.is_prelude = true;
    c.constructors = {sig(name, name, {}, name),
                      sig(name, name, {"String"}, name)};
    env[name] = c;
  };
  exception_class("Exception", "Object");
  exception_class("RuntimeException", "Exception");
  exception_class("IllegalArgumentException", "RuntimeException");
  exception_class("IllegalStateException", "RuntimeException");

  auto boxed = [&env](const std::string& name, const std::string& parse,
                      const std::string& prim) {
    ClassInfo c;
    c.name = name;
    c.supertype = "Object";
    c.is_prelude = true;
    c.methods = {sig(name, parse, {"String"}, prim, true)};
    env[name] = c;
  };
  boxed("Integer", "parseInt", "int");
  boxed("Double", "parseDouble", "double");
  boxed("Long", "parseLong", "long");
  boxed("Boolean", "parseBoolean", "boolean");

  return env;
}

inline bool has_modifier(const AstNode& decl, const std::string& mod) {
  for (const auto& c : decl.children) {
    if (c.kind != NodeKind::Modifier) break;
    if (c.token == mod) return true;
  }
  return false;
}

inline ClassInfo class_info_from_decl(const AstNode& cls) {
  ClassInfo info;
  info.name = cls.token;
  std::size_t i = 0;
  while (i < cls.children.size() &&
         cls.children[i].kind == NodeKind::Modifier)
    ++i;
  if (i < cls.children.size() && cls.children[i].kind == NodeKind::TypeName) {
    info.supertype = cls.children[i].token;
    ++i;
  } else {
    info.supertype = "Object";
  }
  for (; i < cls.children.size(); ++i) {
    const AstNode& m = cls.children[i];
    if (m.kind == NodeKind::FieldDecl) {
      std::size_t j = 0;
      while (j < m.children.size() &&
             m.children[j].kind == NodeKind::Modifier)
        ++j;
      const std::string& type = m.children[j].token;
      for (std::size_t k = j + 1; k < m.children.size(); ++k) {
        VariableInfo v;
        v.name = m.children[k].token;
        v.declared_type = type;
        v.kind = VariableInfo::Kind::Field;
        v.is_static = has_modifier(m, "static");
        v.is_private = has_modifier(m, "private");
        v.owner = cls.token;
        info.fields.push_back(std::move(v));
      }
    } else if (m.kind == NodeKind::MethodDecl ||
               m.kind == NodeKind::ConstructorDecl) {
      MethodSig s;
      s.name = m.token;
      s.owner = cls.token;
      s.is_static = has_modifier(m, "static");
      s.is_private = has_modifier(m, "private");
      std::size_t j = 0;
      while (j < m.children.size() &&
             m.children[j].kind == NodeKind::Modifier)
        ++j;
      if (m.kind == NodeKind::MethodDecl) {
        s.return_type = m.children[j].token;
        ++j;
      } else {
        s.return_type = cls.token;
      }
      for (; j + 1 < m.children.size(); ++j)
        if (m.children[j].kind == NodeKind::Parameter)
          s.param_types.push_back(m.children[j].children[0].token);
      if (m.kind == NodeKind::MethodDecl)
        info.methods.push_back(std::move(s));
      else
        info.constructors.push_back(std::move(s));
    }
  }
  return info;
}

}  // namespace detail

inline ClassEnv build_class_env(const SourceUnit& unit,
                                const std::vector<SourceUnit>& extra_units) {
  ClassEnv env = detail::prelude();
  auto add_unit = [&env](const SourceUnit& u) {
    for (const auto& cls : u.classes)
      env[cls.token] = detail::class_info_from_decl(cls);
  };
  add_unit(unit);
  for (const auto& u : extra_units) add_unit(u);
  return env;
}

// True when a value of type `have` satisfies the constraint in the context of
// the given class environment. "num" accepts any of int/long/float/double.
inline bool assignable_to(const std::string& have, const std::string& target,
                          const ClassEnv& classes) {
  if (have == target) return true;
  if (target == "num") return is_numeric(have);
  int hr = detail::widening_rank(have), tr = detail::widening_rank(target);
  if (hr >= 0 && tr >= 0) return hr <= tr;
  if (is_primitive(have) || is_primitive(target)) return false;
  if (have == "null") return true;  // null assigns to any reference type
  // subtype walk
  std::string cur = have;
  for (int guard = 0; guard < 64; ++guard) {
    auto it = classes.find(cur);
    if (it == classes.end() || !it->second.supertype) return false;
    cur = *it->second.supertype;
    if (cur == target) return true;
  }
  return false;
}

inline bool type_compatible(const std::string& have,
                            const TypeConstraint& want,
                            const SymbolTable& table) {
  switch (want.kind) {
    case TypeConstraint::Kind::NoConstraint:
      return true;
    case TypeConstraint::Kind::Boolean:
      return have == "boolean";
    case TypeConstraint::Kind::Exception:
      return assignable_to(have, "Exception", table.classes);
    case TypeConstraint::Kind::ReturnCompatible:
      return table.enclosing_return_type != "void" &&
             assignable_to(have, table.enclosing_return_type, table.classes);
    case TypeConstraint::Kind::Exact:
      return have == want.type_name;
    case TypeConstraint::Kind::CompatibleWith:
      return assignable_to(have, want.type_name, table.classes);
    case TypeConstraint::Kind::SignatureFit:
      return !want.return_constraint ||
             type_compatible(have, *want.return_constraint, table);
  }
  return false;
}

namespace detail {

inline void collect_locals(const AstNode& block, int depth, std::size_t end,
                           std::vector<VariableInfo>& out) {
  for (const auto& s : block.children) {
    switch (s.kind) {
      case NodeKind::VarDeclStatement:
        for (std::size_t i = 1; i < s.children.size(); ++i) {
          VariableInfo v;
          v.name = s.children[i].token;
          v.declared_type = s.children[0].token;
          v.kind = VariableInfo::Kind::Local;
          v.depth = depth;
          v.scope = {s.children[i].span.end, end};
          out.push_back(std::move(v));
        }
        break;
      case NodeKind::Block:
        collect_locals(s, depth + 1, s.span.end, out);
        break;
      case NodeKind::IfStatement:
        for (std::size_t i = 1; i < s.children.size(); ++i)
          collect_locals(s.children[i], depth + 1, s.children[i].span.end,
                         out);
        break;
      case NodeKind::WhileStatement:
      case NodeKind::DoStatement:
        collect_locals(s.children[1], depth + 1, s.children[1].span.end, out);
        break;
      case NodeKind::ForStatement: {
        const AstNode& init = s.children[0];
        if (init.kind == NodeKind::VarDeclExpression) {
          for (std::size_t i = 1; i < init.children.size(); ++i) {
            VariableInfo v;
            v.name = init.children[i].token;
            v.declared_type = init.children[0].token;
            v.kind = VariableInfo::Kind::Local;
            v.depth = depth + 1;
            v.scope = {init.children[i].span.end, s.span.end};
            out.push_back(std::move(v));
          }
        }
        collect_locals(s.children[3], depth + 1, s.children[3].span.end, out);
        break;
      }
      case NodeKind::SwitchStatement:
        for (std::size_t i = 1; i < s.children.size(); ++i) {
          const AstNode& sc = s.children[i];
          for (std::size_t j = 1; j < sc.children.size(); ++j) {
            if (sc.children[j].kind == NodeKind::VarDeclStatement) {
              const AstNode& d = sc.children[j];
              for (std::size_t k = 1; k < d.children.size(); ++k) {
                VariableInfo v;
                v.name = d.children[k].token;
                v.declared_type = d.children[0].token;
                v.kind = VariableInfo::Kind::Local;
                v.depth = depth + 1;
                v.scope = {d.children[k].span.end, s.span.end};
                out.push_back(std::move(v));
              }
            }
          }
        }
        break;
      default:
        break;
    }
  }
}

}  // namespace detail

// Collects every program element usable inside the named function: its
// locals and parameters, fields of the enclosing class and its supertypes,
// and all classes/methods of the unit, the extra units, and the prelude.
inline SymbolTable collect_scope(const SourceUnit& unit,
                                 const std::string& repair_function,
                                 const std::vector<SourceUnit>& extra_units) {
  SymbolTable table;
  table.classes = build_class_env(unit, extra_units);
  table.repair_function = repair_function;

  const AstNode* cls = nullptr;
  const AstNode* fn = nullptr;
  for (const auto& c : unit.classes) {
    for (const auto& m : c.children) {
      if ((m.kind == NodeKind::MethodDecl ||
           m.kind == NodeKind::ConstructorDecl) &&
          m.token == repair_function) {
        cls = &c;
        fn = &m;
        break;
      }
    }
    if (fn) break;
  }
  if (!fn)
    throw UnknownFunction("no function named '" + repair_function +
                          "' in the unit");

  table.enclosing_class = cls->token;
  const AstNode* body = method_body(*fn);
  table.body_span = body->span;
  if (fn->kind == NodeKind::MethodDecl) {
    std::size_t i = 0;
    while (fn->children[i].kind == NodeKind::Modifier) ++i;
    table.enclosing_return_type = fn->children[i].token;
  } else {
    table.enclosing_return_type = "void";
  }

  for (const auto& c : fn->children) {
    if (c.kind != NodeKind::Parameter) continue;
    VariableInfo v;
    v.name = c.token;
    v.declared_type = c.children[0].token;
    v.kind = VariableInfo::Kind::Parameter;
    v.scope = body->span;
    table.variables.push_back(std::move(v));
  }

  detail::collect_locals(*body, 1, body->span.end, table.variables);

  bool is_static_fn = detail::has_modifier(*fn, "static");
  std::string cur = table.enclosing_class;
  bool own = true;
  for (int guard = 0; guard < 64 && !cur.empty(); ++guard) {
    auto it = table.classes.find(cur);
    if (it == table.classes.end()) break;
    for (const VariableInfo& f : it->second.fields) {
      if (!own && f.is_private) continue;
      if (is_static_fn && !f.is_static) continue;
      VariableInfo v = f;
      v.kind = own ? VariableInfo::Kind::Field
                   : VariableInfo::Kind::InheritedField;
      v.scope = body->span;
      table.variables.push_back(std::move(v));
    }
    if (!it->second.supertype) break;
    cur = *it->second.supertype;
    own = false;
  }

  return table;
}

// Variables visible at `site` whose type satisfies `want`, ordered local
// tiers first (innermost scopes before outer ones), then parameters, then
// own fields, then inherited fields; names sort alphabetically within a tier.
inline std::vector<VariableInfo> visible_variables(std::size_t site,
                                                   const TypeConstraint& want,
                                                   const SymbolTable& table) {
  std::vector<VariableInfo> out;
  for (const VariableInfo& v : table.variables) {
    if (site < v.scope.begin || site > v.scope.end) continue;
    if (!type_compatible(v.declared_type, want, table)) continue;
    out.push_back(v);
  }
  auto tier = [](const VariableInfo& v) {
    switch (v.kind) {
      case VariableInfo::Kind::Local: return 0;
      case VariableInfo::Kind::Parameter: return 1;
      case VariableInfo::Kind::Field: return 2;
      case VariableInfo::Kind::InheritedField: return 3;
    }
    return 4;
  };
  std::sort(out.begin(), out.end(),
            [&](const VariableInfo& a, const VariableInfo& b) {
              if (tier(a) != tier(b)) return tier(a) < tier(b);
              if (a.kind == VariableInfo::Kind::Local && a.depth != b.depth)
                return a.depth > b.depth;
              if (a.name != b.name) return a.name < b.name;
              return a.declared_type < b.declared_type;
            });
  return out;
}

// Methods callable on the given receiver type (or unqualified when absent)
// with a matching arity and a return type satisfying the constraint. Ordered
// by owner proximity in the supertype chain, then name.
inline std::vector<MethodSig> candidate_methods(
    const std::optional<std::string>& receiver_type, std::size_t arity,
    const TypeConstraint& want_return, const SymbolTable& table) {
  std::vector<std::pair<int, MethodSig>> found;
  std::set<std::string> seen;

  auto key = [](const MethodSig& m) {
    std::string k = m.owner + "#" + m.name + "/";
    for (const auto& p : m.param_types) k += p + ",";
    return k;
  };
  auto consider = [&](const MethodSig& m, int proximity) {
    if (m.param_types.size() != arity) return;
    if (m.is_private && m.owner != table.enclosing_class) return;
    if (!type_compatible(m.return_type, want_return, table)) return;
    if (!seen.insert(key(m)).second) return;
    found.emplace_back(proximity, m);
  };
  auto walk_chain = [&](const std::string& start) {
    std::string cur = start;
    for (int prox = 0; prox < 64 && !cur.empty(); ++prox) {
      auto it = table.classes.find(cur);
      if (it == table.classes.end()) break;
      for (const MethodSig& m : it->second.methods) consider(m, prox);
      if (!it->second.supertype) break;
      cur = *it->second.supertype;
    }
  };

  if (receiver_type) {
    walk_chain(*receiver_type);
  } else {
    walk_chain(table.enclosing_class);
    for (const auto& [name, info] : table.classes)
      for (const MethodSig& m : info.methods)
        if (m.is_static) consider(m, 100);
  }

  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) {
                     if (a.first != b.first) return a.first < b.first;
                     if (a.second.name != b.second.name)
                       return a.second.name < b.second.name;
                     return a.second.param_types < b.second.param_types;
                   });
  std::vector<MethodSig> out;
  out.reserve(found.size());
  for (auto& [prox, m] : found) out.push_back(std::move(m));
  return out;
}

// Classes assignable to the constraint that declare (or default to) a
// constructor of the given arity.
inline std::vector<ClassInfo> candidate_classes(const TypeConstraint& want,
                                                std::size_t arity,
                                                const SymbolTable& table) {
  std::vector<ClassInfo> out;
  for (const auto& [name, info] : table.classes) {
    bool arity_ok = false;
    if (info.constructors.empty()) {
      arity_ok = arity == 0 && !info.is_prelude;
    } else {
      for (const MethodSig& c : info.constructors)
        if (c.param_types.size() == arity) arity_ok = true;
    }
    if (!arity_ok) continue;
    if (!type_compatible(name, want, table)) continue;
    out.push_back(info);
  }
  std::sort(out.begin(), out.end(),
            [](const ClassInfo& a, const ClassInfo& b) {
              return a.name < b.name;
            });
  return out;
}

inline nlohmann::json to_json(const SymbolTable& table) {
  nlohmann::json vars = nlohmann::json::array();
  for (const VariableInfo& v : table.variables) {
    const char* kind = v.kind == VariableInfo::Kind::Local ? "local"
                       : v.kind == VariableInfo::Kind::Parameter
                           ? "parameter"
                       : v.kind == VariableInfo::Kind::Field ? "field"
                                                             : "inherited_field";
    vars.push_back({{"name", v.name},
                    {"type", v.declared_type},
                    {"kind", kind},
                    {"scope", {v.scope.begin, v.scope.end}}});
  }
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& [name, info] : table.classes) {
    nlohmann::json methods = nlohmann::json::array();
    for (const MethodSig& m : info.methods) {
      methods.push_back({{"name", m.name},
                         {"params", m.param_types},
                         {"returns", m.return_type},
                         {"static", m.is_static}});
    }
    classes.push_back({{"name", name},
                       {"extends", info.supertype ? *info.supertype : ""},
                       {"methods", std::move(methods)}});
  }
  return nlohmann::json{{"function", table.repair_function},
                        {"class", table.enclosing_class},
                        {"return_type", table.enclosing_return_type},
                        {"variables", std::move(vars)},
                        {"classes", std::move(classes)}};
}

}  // namespace skelfix
