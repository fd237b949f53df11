#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "skelfix/ast.hpp"
#include "skelfix/differencing.hpp"
#include "skelfix/print.hpp"

namespace skelfix {

struct NotAbstractable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "num" is the internal numeric wildcard type: any of int/long/float/double
// satisfies CompatibleWith("num").
struct TypeConstraint {
  enum class Kind {
    Exact,
    CompatibleWith,
    Boolean,
    Exception,
    ReturnCompatible,
    NoConstraint,
    SignatureFit,
  };

  Kind kind = Kind::NoConstraint;
  std::string type_name;                    // Exact / CompatibleWith
  std::vector<TypeConstraint> arg_types;    // SignatureFit
  std::shared_ptr<TypeConstraint> return_constraint;  // SignatureFit

  static TypeConstraint none() { return {}; }
  static TypeConstraint boolean() { return {Kind::Boolean, "", {}, nullptr}; }
  static TypeConstraint exception() {
    return {Kind::Exception, "", {}, nullptr};
  }
  static TypeConstraint return_compatible() {
    return {Kind::ReturnCompatible, "", {}, nullptr};
  }
  static TypeConstraint exact(std::string t) {
    return {Kind::Exact, std::move(t), {}, nullptr};
  }
  static TypeConstraint compatible(std::string t) {
    return {Kind::CompatibleWith, std::move(t), {}, nullptr};
  }
  static TypeConstraint signature(std::size_t arity, TypeConstraint ret) {
    TypeConstraint c;
    c.kind = Kind::SignatureFit;
    c.arg_types.assign(arity, none());
    c.return_constraint = std::make_shared<TypeConstraint>(std::move(ret));
    return c;
  }

  std::string render() const {
    switch (kind) {
      case Kind::NoConstraint: return "";
      case Kind::Boolean: return "boolean";
      case Kind::Exception: return "Exception";
      case Kind::ReturnCompatible: return "return";
      case Kind::Exact:
      case Kind::CompatibleWith: return type_name;
      case Kind::SignatureFit: {
        std::string s = "(";
        for (std::size_t i = 0; i < arg_types.size(); ++i) {
          if (i) s += ",";
          std::string a = arg_types[i].render();
          s += a.empty() ? "*" : a;
        }
        s += ")->";
        std::string r = return_constraint ? return_constraint->render() : "";
        s += r.empty() ? "*" : r;
        return s;
      }
    }
    return "";
  }
};

enum class HoleKind { VAR, CNAME, FNAME, INFIX_OP, PREFIX_OP, POSTFIX_OP };

inline const char* hole_kind_name(HoleKind k) {
  switch (k) {
    case HoleKind::VAR: return "VAR";
    case HoleKind::CNAME: return "CNAME";
    case HoleKind::FNAME: return "FNAME";
    case HoleKind::INFIX_OP: return "INFIX_OP";
    case HoleKind::PREFIX_OP: return "PREFIX_OP";
    case HoleKind::POSTFIX_OP: return "POSTFIX_OP";
  }
  return "?";
}

inline bool is_operator_hole(HoleKind k) {
  return k == HoleKind::INFIX_OP || k == HoleKind::PREFIX_OP ||
         k == HoleKind::POSTFIX_OP;
}

struct Hole {
  int hole_id = 0;
  HoleKind hole_kind = HoleKind::VAR;
  TypeConstraint constraint;
  std::string origin_token;   // the concrete token abstracted away
  std::string operand_type;   // operator holes: "num", "boolean", "char", ...
  bool boolean_context = false;  // operator holes in condition positions
};

// A template mirroring the abstracted statement's tree. A node whose
// hole_id >= 0 has its token abstracted; the original token stays available
// through the hole's origin_token.
struct SkelNode {
  NodeKind kind = NodeKind::Empty;
  std::string token;
  int hole_id = -1;
  std::vector<SkelNode> children;
};

struct Skeleton {
  SkelNode root;
  std::vector<Hole> holes;
  Modification source;
};

struct SkelFragment {
  SkelNode root;
  std::vector<Hole> holes;
};

namespace detail {

// Syntactic type of an expression where it is evident without analysis;
// literals, casts and constructions are enough to seed operand constraints.
inline std::optional<std::string> syntactic_type(const AstNode& n) {
  switch (n.kind) {
    case NodeKind::Literal: {
      const std::string& t = n.token;
      if (t == "true" || t == "false") return "boolean";
      if (t == "null") return std::nullopt;
      if (t.front() == '"') return "String";
      if (t.front() == '\'') return "char";
      return "num";
    }
    case NodeKind::CastExpression:
      return n.children[0].token;
    case NodeKind::ClassInstanceCreation:
      return n.token;
    case NodeKind::ParenthesizedExpression:
      return syntactic_type(n.children[0]);
    default:
      return std::nullopt;
  }
}

class Abstractor {
 public:
  std::vector<Hole> holes;

  SkelNode statement(const AstNode& n) {
    switch (n.kind) {
      case NodeKind::Block: {
        SkelNode out = shell(n);
        for (const auto& s : n.children) out.children.push_back(statement(s));
        return out;
      }
      case NodeKind::AssertStatement:
        return wrap(n, {expr(n.children[0], TypeConstraint::boolean())});
      case NodeKind::ConstructorInvocation: {
        SkelNode out = shell(n);
        for (const auto& a : n.children)
          out.children.push_back(expr(a, TypeConstraint::none()));
        return out;
      }
      case NodeKind::DoStatement:
      case NodeKind::WhileStatement:
        return wrap(n, {expr(n.children[0], TypeConstraint::boolean()),
                        statement(n.children[1])});
      case NodeKind::ForStatement: {
        SkelNode out = shell(n);
        out.children.push_back(n.children[0].kind == NodeKind::Empty
                                   ? shell(n.children[0])
                                   : expr(n.children[0],
                                          TypeConstraint::none()));
        out.children.push_back(n.children[1].kind == NodeKind::Empty
                                   ? shell(n.children[1])
                                   : expr(n.children[1],
                                          TypeConstraint::boolean()));
        out.children.push_back(n.children[2].kind == NodeKind::Empty
                                   ? shell(n.children[2])
                                   : expr(n.children[2],
                                          TypeConstraint::none()));
        out.children.push_back(statement(n.children[3]));
        return out;
      }
      case NodeKind::IfStatement: {
        SkelNode out = shell(n);
        out.children.push_back(expr(n.children[0], TypeConstraint::boolean()));
        for (std::size_t i = 1; i < n.children.size(); ++i)
          out.children.push_back(statement(n.children[i]));
        return out;
      }
      case NodeKind::ReturnStatement:
        return wrap(n,
                    {expr(n.children[0], TypeConstraint::return_compatible())});
      case NodeKind::SwitchStatement: {
        SkelNode out = shell(n);
        out.children.push_back(expr(n.children[0], TypeConstraint::none()));
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          const AstNode& sc = n.children[i];
          SkelNode cs = shell(sc);
          cs.children.push_back(sc.children[0].kind == NodeKind::Empty
                                    ? shell(sc.children[0])
                                    : expr(sc.children[0],
                                           TypeConstraint::none()));
          for (std::size_t j = 1; j < sc.children.size(); ++j)
            cs.children.push_back(statement(sc.children[j]));
          out.children.push_back(std::move(cs));
        }
        return out;
      }
      case NodeKind::ThrowStatement:
        return wrap(n, {expr(n.children[0], TypeConstraint::exception())});
      case NodeKind::VarDeclStatement:
      case NodeKind::VarDeclExpression: {
        SkelNode out = shell(n);
        out.children.push_back(verbatim(n.children[0]));
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          const AstNode& frag = n.children[i];
          SkelNode fs = shell(frag);  // declared name preserved
          if (!frag.children.empty())
            fs.children.push_back(expr(
                frag.children[0],
                TypeConstraint::compatible(n.children[0].token)));
          out.children.push_back(std::move(fs));
        }
        return out;
      }
      case NodeKind::ExpressionStatement:
        return wrap(n, {expr(n.children[0], TypeConstraint::none())});
      case NodeKind::BreakStatement:
      case NodeKind::ContinueStatement:
        return shell(n);
      default:
        return verbatim(n);
    }
  }

  SkelNode expr(const AstNode& n, const TypeConstraint& expected) {
    switch (n.kind) {
      case NodeKind::SimpleName:
        return var_hole(n, expected);
      case NodeKind::Literal:
      case NodeKind::Empty:
        return verbatim(n);
      case NodeKind::Assignment: {
        auto lt = syntactic_type(n.children[0]);
        auto rt = syntactic_type(n.children[1]);
        SkelNode out = shell(n);
        out.children.push_back(
            expr(n.children[0], rt ? TypeConstraint::compatible(*rt)
                                   : TypeConstraint::none()));
        out.children.push_back(
            expr(n.children[1], lt ? TypeConstraint::compatible(*lt)
                                   : TypeConstraint::none()));
        return out;
      }
      case NodeKind::CastExpression: {
        SkelNode out = shell(n);
        out.children.push_back(verbatim(n.children[0]));
        out.children.push_back(expr(
            n.children[1], TypeConstraint::compatible(n.children[0].token)));
        return out;
      }
      case NodeKind::ClassInstanceCreation: {
        SkelNode out = shell(n);
        out.hole_id = add_hole(HoleKind::CNAME,
                               TypeConstraint::signature(n.children.size(),
                                                         expected),
                               n.token);
        for (const auto& a : n.children)
          out.children.push_back(expr(a, TypeConstraint::none()));
        return out;
      }
      case NodeKind::ConditionalExpression: {
        SkelNode out = shell(n);
        out.children.push_back(expr(n.children[0], TypeConstraint::boolean()));
        out.children.push_back(expr(n.children[1], expected));
        out.children.push_back(expr(n.children[2], expected));
        return out;
      }
      case NodeKind::FieldAccess: {
        // receiver holes precede the member hole so fillers can resolve the
        // receiver type first
        SkelNode out = shell(n);
        out.children.push_back(expr(n.children[0], TypeConstraint::none()));
        out.hole_id = add_hole(HoleKind::VAR, expected, n.token);
        return out;
      }
      case NodeKind::SuperFieldAccess: {
        SkelNode out = shell(n);
        out.hole_id = add_hole(HoleKind::VAR, expected, n.token);
        return out;
      }
      case NodeKind::InfixExpression: {
        auto lt = syntactic_type(n.children[0]);
        auto rt = syntactic_type(n.children[1]);
        std::string operand = lt ? *lt : rt.value_or("");
        SkelNode out = shell(n);
        out.children.push_back(
            expr(n.children[0], rt ? TypeConstraint::compatible(*rt)
                                   : TypeConstraint::none()));
        {
          Hole h;
          h.hole_id = static_cast<int>(holes.size());
          h.hole_kind = HoleKind::INFIX_OP;
          h.constraint = operand.empty()
                             ? TypeConstraint::none()
                             : TypeConstraint::compatible(operand);
          h.origin_token = n.token;
          h.operand_type = operand;
          h.boolean_context = expected.kind == TypeConstraint::Kind::Boolean;
          holes.push_back(std::move(h));
          out.hole_id = holes.back().hole_id;
        }
        out.children.push_back(
            expr(n.children[1], lt ? TypeConstraint::compatible(*lt)
                                   : TypeConstraint::none()));
        return out;
      }
      case NodeKind::PrefixExpression: {
        bool logical = n.token == "!";
        SkelNode out = shell(n);
        Hole h;
        h.hole_id = static_cast<int>(holes.size());
        h.hole_kind = HoleKind::PREFIX_OP;
        h.constraint = TypeConstraint::compatible(logical ? "boolean" : "num");
        h.origin_token = n.token;
        h.operand_type = logical ? "boolean" : "num";
        h.boolean_context = expected.kind == TypeConstraint::Kind::Boolean;
        holes.push_back(std::move(h));
        out.hole_id = holes.back().hole_id;
        out.children.push_back(
            expr(n.children[0], logical ? TypeConstraint::boolean()
                                        : TypeConstraint::compatible("num")));
        return out;
      }
      case NodeKind::PostfixExpression: {
        SkelNode out = shell(n);
        Hole h;
        h.hole_id = static_cast<int>(holes.size());
        h.hole_kind = HoleKind::POSTFIX_OP;
        h.constraint = TypeConstraint::compatible("num");
        h.origin_token = n.token;
        h.operand_type = "num";
        holes.push_back(std::move(h));
        out.hole_id = holes.back().hole_id;
        out.children.push_back(
            expr(n.children[0], TypeConstraint::compatible("num")));
        return out;
      }
      case NodeKind::MethodInvocation: {
        SkelNode out = shell(n);
        out.children.push_back(n.children[0].kind == NodeKind::Empty
                                   ? verbatim(n.children[0])
                                   : expr(n.children[0],
                                          TypeConstraint::none()));
        out.hole_id = add_hole(
            HoleKind::FNAME,
            TypeConstraint::signature(n.children.size() - 1, expected),
            n.token);
        for (std::size_t i = 1; i < n.children.size(); ++i)
          out.children.push_back(expr(n.children[i], TypeConstraint::none()));
        return out;
      }
      case NodeKind::SuperMethodInvocation: {
        SkelNode out = shell(n);
        out.hole_id = add_hole(
            HoleKind::FNAME,
            TypeConstraint::signature(n.children.size(), expected), n.token);
        for (const auto& a : n.children)
          out.children.push_back(expr(a, TypeConstraint::none()));
        return out;
      }
      case NodeKind::VarDeclExpression:
        return statement(n);
      case NodeKind::VarDeclFragment: {
        SkelNode out = shell(n);
        if (!n.children.empty())
          out.children.push_back(expr(n.children[0], expected));
        return out;
      }
      case NodeKind::ArrayAccess: {
        SkelNode out = shell(n);
        out.children.push_back(expr(n.children[0], TypeConstraint::none()));
        out.children.push_back(
            expr(n.children[1], TypeConstraint::compatible("int")));
        return out;
      }
      case NodeKind::ParenthesizedExpression: {
        SkelNode out = shell(n);
        out.children.push_back(expr(n.children[0], expected));
        return out;
      }
      default:
        return verbatim(n);
    }
  }

 private:
  SkelNode shell(const AstNode& n) {
    SkelNode s;
    s.kind = n.kind;
    s.token = n.token;
    return s;
  }

  SkelNode wrap(const AstNode& n, std::vector<SkelNode> children) {
    SkelNode s = shell(n);
    s.children = std::move(children);
    return s;
  }

  SkelNode verbatim(const AstNode& n) {
    SkelNode s = shell(n);
    for (const auto& c : n.children) s.children.push_back(verbatim(c));
    return s;
  }

  int add_hole(HoleKind kind, TypeConstraint constraint,
               const std::string& origin) {
    Hole h;
    h.hole_id = static_cast<int>(holes.size());
    h.hole_kind = kind;
    h.constraint = std::move(constraint);
    h.origin_token = origin;
    holes.push_back(std::move(h));
    return holes.back().hole_id;
  }

  SkelNode var_hole(const AstNode& n, const TypeConstraint& expected) {
    SkelNode s = shell(n);
    s.hole_id = add_hole(HoleKind::VAR, expected, n.token);
    return s;
  }
};

}  // namespace detail

// Abstracts a single node per the per-kind rules, with `expected` as the
// context type constraint.
inline SkelFragment abstract_node(const AstNode& n,
                                  const TypeConstraint& expected) {
  detail::Abstractor a;
  SkelFragment f;
  f.root = is_statement(n.kind) ? a.statement(n) : a.expr(n, expected);
  f.holes = std::move(a.holes);
  return f;
}

// Abstracts the introduced statement of an Update or Insert modification.
// Delete introduces nothing and is rejected.
inline Skeleton abstract_modification(const Modification& m) {
  if (!m.is_abstractable())
    throw NotAbstractable("Delete modifications have no skeleton");
  detail::Abstractor a;
  Skeleton sk;
  sk.root = a.statement(m.payload);
  sk.holes = std::move(a.holes);
  sk.source = m;
  return sk;
}

namespace detail {

inline AstNode skeleton_to_ast(const SkelNode& n,
                               const std::map<int, std::string>& tokens) {
  AstNode out;
  out.kind = n.kind;
  out.token = n.token;
  if (n.hole_id >= 0) {
    auto it = tokens.find(n.hole_id);
    if (it != tokens.end()) out.token = it->second;
  }
  for (const auto& c : n.children)
    out.children.push_back(skeleton_to_ast(c, tokens));
  return out;
}

}  // namespace detail

// Concrete statement obtained by substituting a token for every hole.
// Holes missing from the map keep their original token.
inline AstNode instantiate_tokens(const SkelNode& root,
                                  const std::map<int, std::string>& tokens) {
  AstNode n = detail::skeleton_to_ast(root, tokens);
  std::size_t next = 0;
  assign_preorder(n, next);
  return n;
}

// Human-readable skeleton text with holes printed as placeholders.
inline std::string render_skeleton(const Skeleton& s) {
  std::map<int, std::string> placeholders;
  for (const Hole& h : s.holes) {
    std::string p = "⟨";
    p += hole_kind_name(h.hole_kind);
    if (!is_operator_hole(h.hole_kind)) {
      std::string c = h.constraint.render();
      if (!c.empty()) p += ":" + c;
    }
    p += "⟩";
    placeholders[h.hole_id] = std::move(p);
  }
  return pretty_print(detail::skeleton_to_ast(s.root, placeholders));
}

inline nlohmann::json to_json(const TypeConstraint& c) {
  nlohmann::json j;
  switch (c.kind) {
    case TypeConstraint::Kind::Exact: j["kind"] = "exact"; break;
    case TypeConstraint::Kind::CompatibleWith:
      j["kind"] = "compatible_with";
      break;
    case TypeConstraint::Kind::Boolean: j["kind"] = "boolean"; break;
    case TypeConstraint::Kind::Exception: j["kind"] = "exception"; break;
    case TypeConstraint::Kind::ReturnCompatible:
      j["kind"] = "return_compatible";
      break;
    case TypeConstraint::Kind::NoConstraint: j["kind"] = "none"; break;
    case TypeConstraint::Kind::SignatureFit: j["kind"] = "signature"; break;
  }
  if (!c.type_name.empty()) j["type"] = c.type_name;
  if (c.kind == TypeConstraint::Kind::SignatureFit) {
    j["arity"] = c.arg_types.size();
    if (c.return_constraint) j["returns"] = to_json(*c.return_constraint);
  }
  return j;
}

namespace detail {

inline nlohmann::json skel_node_json(const SkelNode& n) {
  nlohmann::json j;
  j["kind"] = kind_name(n.kind);
  if (n.hole_id >= 0)
    j["hole"] = n.hole_id;
  else if (!n.token.empty())
    j["token"] = n.token;
  if (!n.children.empty()) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : n.children) arr.push_back(skel_node_json(c));
    j["children"] = std::move(arr);
  }
  return j;
}

}  // namespace detail

inline nlohmann::json to_json(const Skeleton& s) {
  nlohmann::json holes = nlohmann::json::array();
  for (const Hole& h : s.holes) {
    nlohmann::json j;
    j["id"] = h.hole_id;
    j["kind"] = hole_kind_name(h.hole_kind);
    j["constraint"] = to_json(h.constraint);
    j["origin"] = h.origin_token;
    if (!h.operand_type.empty()) j["operand_type"] = h.operand_type;
    holes.push_back(std::move(j));
  }
  return nlohmann::json{{"root", detail::skel_node_json(s.root)},
                        {"holes", std::move(holes)}};
}

}  // namespace skelfix
