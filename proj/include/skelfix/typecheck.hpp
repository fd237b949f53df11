#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skelfix/analysis.hpp"
#include "skelfix/ast.hpp"
#include "skelfix/parse.hpp"
#include "skelfix/print.hpp"

namespace skelfix {

// Nominal type checker over the Java subset. Used both to vet instantiated
// candidates before they are emitted and as the re-analysis oracle over
// emitted patches. Resolution is strict: unqualified calls resolve in the
// enclosing class chain only, statics elsewhere need a class-name receiver.
class TypeChecker {
 public:
  TypeChecker(const ClassEnv& classes, std::string enclosing_class,
              std::string return_type)
      : classes_(classes),
        enclosing_class_(std::move(enclosing_class)),
        return_type_(std::move(return_type)) {}

  std::vector<std::string> errors;

  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }

  void declare(const std::string& name, const std::string& type) {
    if (!scopes_.empty()) scopes_.back()[name] = type;
  }

  // Fragment checks at a repair site cannot see the enclosing loop or
  // constructor; these put the checker into the right or permissive state.
  void set_constructor_context(bool flag) { in_constructor_ = flag; }
  void set_permissive_loop_context() { loop_depth_ = 1; }

  bool declared_in_current_scope(const std::string& name) const {
    return !scopes_.empty() && scopes_.back().count(name) > 0;
  }

  void check_method(const AstNode& decl) {
    in_constructor_ = decl.kind == NodeKind::ConstructorDecl;
    push_scope();
    for (const auto& c : decl.children)
      if (c.kind == NodeKind::Parameter)
        declare(c.token, c.children[0].token);
    const AstNode* body = method_body(decl);
    if (body) check_block(*body);
    pop_scope();
  }

  void check_block(const AstNode& block) {
    push_scope();
    for (const auto& s : block.children) check_statement(s);
    pop_scope();
  }

  void check_statement(const AstNode& s) {
    switch (s.kind) {
      case NodeKind::Block:
        check_block(s);
        break;
      case NodeKind::ExpressionStatement:
        type_of(s.children[0]);
        break;
      case NodeKind::VarDeclStatement:
        check_var_decl(s);
        break;
      case NodeKind::IfStatement:
        require_boolean(s.children[0]);
        for (std::size_t i = 1; i < s.children.size(); ++i)
          check_block(s.children[i]);
        break;
      case NodeKind::WhileStatement:
      case NodeKind::DoStatement:
        require_boolean(s.children[0]);
        ++loop_depth_;
        check_block(s.children[1]);
        --loop_depth_;
        break;
      case NodeKind::ForStatement: {
        push_scope();
        if (s.children[0].kind == NodeKind::VarDeclExpression)
          check_var_decl(s.children[0]);
        else if (s.children[0].kind != NodeKind::Empty)
          type_of(s.children[0]);
        if (s.children[1].kind != NodeKind::Empty)
          require_boolean(s.children[1]);
        if (s.children[2].kind != NodeKind::Empty) type_of(s.children[2]);
        ++loop_depth_;
        check_block(s.children[3]);
        --loop_depth_;
        pop_scope();
        break;
      }
      case NodeKind::ReturnStatement: {
        auto t = type_of(s.children[0]);
        if (return_type_ == "void") {
          error("void function returns a value");
        } else if (t && !assignable_to(*t, return_type_, classes_)) {
          error("return type " + *t + " is not compatible with " +
                return_type_);
        }
        break;
      }
      case NodeKind::ThrowStatement: {
        auto t = type_of(s.children[0]);
        if (t && !assignable_to(*t, "Exception", classes_))
          error("thrown value of type " + *t + " is not an Exception");
        break;
      }
      case NodeKind::AssertStatement:
        require_boolean(s.children[0]);
        break;
      case NodeKind::SwitchStatement: {
        auto sel = type_of(s.children[0]);
        if (sel && *sel != "int" && *sel != "char" && *sel != "String")
          error("switch selector must be int, char or String");
        push_scope();
        for (std::size_t i = 1; i < s.children.size(); ++i) {
          const AstNode& sc = s.children[i];
          if (sc.children[0].kind != NodeKind::Empty) {
            auto lab = type_of(sc.children[0]);
            if (sel && lab && !assignable_to(*lab, *sel, classes_) &&
                !assignable_to(*sel, *lab, classes_))
              error("case label type " + *lab +
                    " does not match selector type " + *sel);
          }
          for (std::size_t j = 1; j < sc.children.size(); ++j)
            check_statement(sc.children[j]);
        }
        pop_scope();
        break;
      }
      case NodeKind::ConstructorInvocation: {
        if (!in_constructor_)
          error("this(...) outside of a constructor");
        std::vector<std::string> args;
        bool ok = true;
        for (const auto& a : s.children) {
          auto t = type_of(a);
          if (!t) ok = false;
          else args.push_back(*t);
        }
        if (ok && !find_constructor(enclosing_class_, args))
          error("no matching constructor for this(...)");
        break;
      }
      case NodeKind::BreakStatement:
      case NodeKind::ContinueStatement:
        if (loop_depth_ == 0) error("break/continue outside of a loop");
        break;
      default:
        error(std::string("unexpected statement kind ") + kind_name(s.kind));
        break;
    }
  }

  // Type of an expression, or nullopt after recording an error.
  std::optional<std::string> type_of(const AstNode& e) {
    switch (e.kind) {
      case NodeKind::Literal:
        return literal_type(e.token);
      case NodeKind::SimpleName: {
        if (auto t = lookup(e.token)) return t;
        if (classes_.count(e.token)) return "class:" + e.token;
        error("unknown name '" + e.token + "'");
        return std::nullopt;
      }
      case NodeKind::ParenthesizedExpression:
        return type_of(e.children[0]);
      case NodeKind::FieldAccess: {
        auto recv = type_of(e.children[0]);
        if (!recv) return std::nullopt;
        bool static_access = recv->rfind("class:", 0) == 0;
        std::string type = static_access ? recv->substr(6) : *recv;
        if (const VariableInfo* f = find_field(type, e.token)) {
          if (static_access && !f->is_static) {
            error("field '" + e.token + "' is not static");
            return std::nullopt;
          }
          return f->declared_type;
        }
        error("no field '" + e.token + "' in type " + type);
        return std::nullopt;
      }
      case NodeKind::SuperFieldAccess: {
        auto sup = supertype_of(enclosing_class_);
        if (!sup) {
          error("class has no supertype");
          return std::nullopt;
        }
        if (const VariableInfo* f = find_field(*sup, e.token))
          return f->declared_type;
        error("no field '" + e.token + "' in supertype " + *sup);
        return std::nullopt;
      }
      case NodeKind::ArrayAccess: {
        auto arr = type_of(e.children[0]);
        auto idx = type_of(e.children[1]);
        if (idx && *idx != "int" && *idx != "char")
          error("array index must be int");
        if (!arr) return std::nullopt;
        if (arr->size() > 2 && arr->substr(arr->size() - 2) == "[]")
          return arr->substr(0, arr->size() - 2);
        error("indexing a non-array value of type " + *arr);
        return std::nullopt;
      }
      case NodeKind::MethodInvocation:
        return check_invocation(e);
      case NodeKind::SuperMethodInvocation: {
        auto sup = supertype_of(enclosing_class_);
        if (!sup) {
          error("class has no supertype");
          return std::nullopt;
        }
        return resolve_call(*sup, e.token, e.children, 0, false);
      }
      case NodeKind::ClassInstanceCreation: {
        auto it = classes_.find(e.token);
        if (it == classes_.end()) {
          error("unknown class '" + e.token + "'");
          return std::nullopt;
        }
        std::vector<std::string> args;
        bool ok = true;
        for (const auto& a : e.children) {
          auto t = type_of(a);
          if (!t) ok = false;
          else args.push_back(*t);
        }
        if (ok && !find_constructor(e.token, args))
          error("no matching constructor for new " + e.token);
        return e.token;
      }
      case NodeKind::CastExpression: {
        const std::string& target = e.children[0].token;
        auto src = type_of(e.children[1]);
        if (!src) return target;
        bool num_cast = (is_numeric(*src) || *src == "char") &&
                        (is_numeric(target) || target == "char");
        bool ref_cast = !is_primitive(target) && !is_primitive(*src) &&
                        (*src == "null" ||
                         assignable_to(*src, target, classes_) ||
                         assignable_to(target, *src, classes_));
        if (!num_cast && !ref_cast)
          error("cannot cast " + *src + " to " + target);
        return target;
      }
      case NodeKind::Assignment: {
        auto lhs = lvalue_type(e.children[0]);
        auto rhs = type_of(e.children[1]);
        if (lhs && rhs && !assignable_to(*rhs, *lhs, classes_))
          error("cannot assign " + *rhs + " to " + *lhs);
        return lhs;
      }
      case NodeKind::ConditionalExpression: {
        require_boolean(e.children[0]);
        auto a = type_of(e.children[1]);
        auto b = type_of(e.children[2]);
        if (!a || !b) return a ? a : b;
        if (assignable_to(*b, *a, classes_)) return a;
        if (assignable_to(*a, *b, classes_)) return b;
        error("incompatible conditional branches: " + *a + " vs " + *b);
        return std::nullopt;
      }
      case NodeKind::InfixExpression:
        return infix_type(e);
      case NodeKind::PrefixExpression:
        return prefix_type(e);
      case NodeKind::PostfixExpression: {
        auto t = lvalue_type(e.children[0]);
        if (t && !is_numeric(*t) && *t != "char")
          error("operator '" + e.token + "' needs a numeric operand");
        return t;
      }
      case NodeKind::VarDeclExpression:
        check_var_decl(e);
        return "void";
      default:
        error(std::string("unexpected expression kind ") + kind_name(e.kind));
        return std::nullopt;
    }
  }

 private:
  const ClassEnv& classes_;
  std::string enclosing_class_;
  std::string return_type_;
  std::vector<std::map<std::string, std::string>> scopes_;
  bool in_constructor_ = false;
  int loop_depth_ = 0;

  void error(std::string msg) { errors.push_back(std::move(msg)); }

  void require_boolean(const AstNode& e) {
    auto t = type_of(e);
    if (t && *t != "boolean") error("condition must be boolean, got " + *t);
  }

  std::optional<std::string> lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return f->second;
    }
    // fields of the enclosing class and its supertypes
    std::string cur = enclosing_class_;
    bool own = true;
    for (int guard = 0; guard < 64; ++guard) {
      auto c = classes_.find(cur);
      if (c == classes_.end()) break;
      for (const VariableInfo& f : c->second.fields)
        if (f.name == name && (own || !f.is_private)) return f.declared_type;
      if (!c->second.supertype) break;
      cur = *c->second.supertype;
      own = false;
    }
    return std::nullopt;
  }

  std::optional<std::string> supertype_of(const std::string& cls) const {
    auto it = classes_.find(cls);
    if (it == classes_.end()) return std::nullopt;
    return it->second.supertype;
  }

  const VariableInfo* find_field(const std::string& cls,
                                 const std::string& name) const {
    std::string cur = cls;
    bool own = cur == enclosing_class_;
    for (int guard = 0; guard < 64; ++guard) {
      auto it = classes_.find(cur);
      if (it == classes_.end()) return nullptr;
      for (const VariableInfo& f : it->second.fields)
        if (f.name == name && (own || !f.is_private)) return &f;
      if (!it->second.supertype) return nullptr;
      cur = *it->second.supertype;
      own = cur == enclosing_class_;
    }
    return nullptr;
  }

  bool args_match(const MethodSig& m, const std::vector<std::string>& args) {
    if (m.param_types.size() != args.size()) return false;
    for (std::size_t i = 0; i < args.size(); ++i)
      if (!assignable_to(args[i], m.param_types[i], classes_)) return false;
    return true;
  }

  const MethodSig* find_constructor(const std::string& cls,
                                    const std::vector<std::string>& args) {
    auto it = classes_.find(cls);
    if (it == classes_.end()) return nullptr;
    if (it->second.constructors.empty() && args.empty() &&
        !it->second.is_prelude) {
      static MethodSig implicit;
      return &implicit;  // implicit default constructor
    }
    for (const MethodSig& c : it->second.constructors)
      if (args_match(c, args)) return &c;
    return nullptr;
  }

  std::optional<std::string> resolve_call(const std::string& start_class,
                                          const std::string& name,
                                          const std::vector<AstNode>& children,
                                          std::size_t arg_from,
                                          bool require_static) {
    std::vector<std::string> args;
    for (std::size_t i = arg_from; i < children.size(); ++i) {
      auto t = type_of(children[i]);
      if (!t) return std::nullopt;
      args.push_back(*t);
    }
    std::string cur = start_class;
    bool own = cur == enclosing_class_;
    for (int guard = 0; guard < 64; ++guard) {
      auto it = classes_.find(cur);
      if (it == classes_.end()) break;
      for (const MethodSig& m : it->second.methods) {
        if (m.name != name) continue;
        if (m.is_private && !own) continue;
        if (require_static && !m.is_static) continue;
        if (args_match(m, args)) return m.return_type;
      }
      if (!it->second.supertype) break;
      cur = *it->second.supertype;
      own = cur == enclosing_class_;
    }
    error("no method '" + name + "' with matching arguments in " +
          start_class);
    return std::nullopt;
  }

  std::optional<std::string> check_invocation(const AstNode& e) {
    const AstNode& recv = e.children[0];
    if (recv.kind == NodeKind::Empty)
      return resolve_call(enclosing_class_, e.token, e.children, 1, false);
    auto rt = type_of(recv);
    if (!rt) return std::nullopt;
    if (rt->rfind("class:", 0) == 0)
      return resolve_call(rt->substr(6), e.token, e.children, 1, true);
    if (is_primitive(*rt) ||
        (rt->size() > 2 && rt->substr(rt->size() - 2) == "[]")) {
      error("cannot call a method on a value of type " + *rt);
      return std::nullopt;
    }
    return resolve_call(*rt, e.token, e.children, 1, false);
  }

  void check_var_decl(const AstNode& d) {
    std::string base = d.children[0].token;
    while (base.size() > 2 && base.substr(base.size() - 2) == "[]")
      base = base.substr(0, base.size() - 2);
    if (!is_primitive(base) && !classes_.count(base))
      error("unknown type '" + d.children[0].token + "'");
    for (std::size_t i = 1; i < d.children.size(); ++i) {
      const AstNode& frag = d.children[i];
      if (declared_in_current_scope(frag.token) || lookup_local(frag.token))
        error("redeclaration of '" + frag.token + "'");
      if (!frag.children.empty()) {
        auto t = type_of(frag.children[0]);
        if (t && !assignable_to(*t, d.children[0].token, classes_))
          error("cannot initialize " + d.children[0].token + " with " + *t);
      }
      declare(frag.token, d.children[0].token);
    }
  }

  bool lookup_local(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it)
      if (it->count(name)) return true;
    return false;
  }

  std::optional<std::string> lvalue_type(const AstNode& e) {
    switch (e.kind) {
      case NodeKind::SimpleName: {
        if (auto t = lookup(e.token)) return t;
        error("unknown assignment target '" + e.token + "'");
        return std::nullopt;
      }
      case NodeKind::FieldAccess:
      case NodeKind::ArrayAccess:
      case NodeKind::SuperFieldAccess:
        return type_of(e);
      default:
        error("invalid assignment target");
        return std::nullopt;
    }
  }

  std::optional<std::string> literal_type(const std::string& t) {
    if (t == "true" || t == "false") return "boolean";
    if (t == "null") return "null";
    if (t.front() == '"') return "String";
    if (t.front() == '\'') return "char";
    if (t.find('.') != std::string::npos || t.find('e') != std::string::npos ||
        t.find('E') != std::string::npos ||
        t.back() == 'd' || t.back() == 'D')
      return "double";
    if (t.back() == 'f' || t.back() == 'F') return "float";
    if (t.back() == 'L') return "long";
    return "int";
  }

  std::optional<std::string> promote(const std::string& a,
                                     const std::string& b) {
    auto rank = [](const std::string& t) {
      if (t == "char") return 0;
      return 1 + detail::widening_rank(t);
    };
    return rank(a) >= rank(b) ? (a == "char" ? "int" : a)
                              : (b == "char" ? "int" : b);
  }

  bool numeric_or_char(const std::string& t) {
    return is_numeric(t) || t == "char";
  }

  std::optional<std::string> infix_type(const AstNode& e) {
    const std::string& op = e.token;
    auto a = type_of(e.children[0]);
    auto b = type_of(e.children[1]);
    if (!a || !b) return std::nullopt;
    if (op == "+") {
      if (*a == "String" || *b == "String") return "String";
      if (numeric_or_char(*a) && numeric_or_char(*b)) return promote(*a, *b);
      error("operator '+' needs numeric or String operands");
      return std::nullopt;
    }
    if (op == "-" || op == "*" || op == "/" || op == "%") {
      if (numeric_or_char(*a) && numeric_or_char(*b)) return promote(*a, *b);
      error("operator '" + op + "' needs numeric operands");
      return std::nullopt;
    }
    if (op == "<" || op == ">" || op == "<=" || op == ">=") {
      if (numeric_or_char(*a) && numeric_or_char(*b)) return "boolean";
      error("operator '" + op + "' needs numeric operands");
      return std::nullopt;
    }
    if (op == "==" || op == "!=") {
      if (numeric_or_char(*a) && numeric_or_char(*b)) return "boolean";
      if (*a == "boolean" && *b == "boolean") return "boolean";
      bool ref_a = !is_primitive(*a), ref_b = !is_primitive(*b);
      if (ref_a && ref_b &&
          (*a == "null" || *b == "null" ||
           assignable_to(*a, *b, classes_) ||
           assignable_to(*b, *a, classes_)))
        return "boolean";
      error("operator '" + op + "' on incompatible operands " + *a + " and " +
            *b);
      return std::nullopt;
    }
    if (op == "&&" || op == "||") {
      if (*a == "boolean" && *b == "boolean") return "boolean";
      error("operator '" + op + "' needs boolean operands");
      return std::nullopt;
    }
    if (op == "&" || op == "|" || op == "^") {
      if (*a == "boolean" && *b == "boolean") return "boolean";
      bool ia = *a == "int" || *a == "long" || *a == "char";
      bool ib = *b == "int" || *b == "long" || *b == "char";
      if (ia && ib) return (*a == "long" || *b == "long") ? "long" : "int";
      error("operator '" + op + "' needs boolean or integral operands");
      return std::nullopt;
    }
    error("unknown operator '" + op + "'");
    return std::nullopt;
  }

  std::optional<std::string> prefix_type(const AstNode& e) {
    const std::string& op = e.token;
    if (op == "!") {
      require_boolean(e.children[0]);
      return "boolean";
    }
    if (op == "-" || op == "+") {
      auto t = type_of(e.children[0]);
      if (t && !numeric_or_char(*t))
        error("operator '" + op + "' needs a numeric operand");
      if (t && *t == "char") return "int";
      return t;
    }
    if (op == "~") {
      auto t = type_of(e.children[0]);
      if (t && *t != "int" && *t != "long" && *t != "char")
        error("operator '~' needs an integral operand");
      return t && *t == "long" ? "long" : "int";
    }
    // ++ / --
    auto t = lvalue_type(e.children[0]);
    if (t && !is_numeric(*t) && *t != "char")
      error("operator '" + op + "' needs a numeric operand");
    return t;
  }
};

// Type checks the named function of a parsed unit against the unit, the
// extra units and the prelude. Returns the error list; empty means well
// typed.
inline std::vector<std::string> check_function(
    const SourceUnit& unit, const std::string& fn_name,
    const std::vector<SourceUnit>& extra_units) {
  ClassEnv env = build_class_env(unit, extra_units);
  for (const auto& cls : unit.classes) {
    for (const auto& m : cls.children) {
      if ((m.kind == NodeKind::MethodDecl ||
           m.kind == NodeKind::ConstructorDecl) &&
          m.token == fn_name) {
        std::string ret = "void";
        if (m.kind == NodeKind::MethodDecl) {
          std::size_t i = 0;
          while (m.children[i].kind == NodeKind::Modifier) ++i;
          ret = m.children[i].token;
        }
        TypeChecker checker(env, cls.token, ret);
        checker.check_method(m);
        return std::move(checker.errors);
      }
    }
  }
  return {"no function named '" + fn_name + "'"};
}

// Parses `unit_text` and type checks the named function; parse failures count
// as check failures.
inline std::vector<std::string> check_unit_text(
    const std::string& unit_text, const std::string& fn_name,
    const std::vector<SourceUnit>& extra_units) {
  try {
    SourceUnit u = parse_function(unit_text);
    return check_function(u, fn_name, extra_units);
  } catch (const ParseError& e) {
    return {std::string("parse error: ") + e.what()};
  }
}

}  // namespace skelfix
