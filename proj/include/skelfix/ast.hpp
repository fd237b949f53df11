#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace skelfix {

// Node kinds of the source language under repair. The language is a fixed
// Java subset; see docs/grammar.md for the grammar.
enum class NodeKind {
  // statements
  AssertStatement,
  ConstructorInvocation,
  DoStatement,
  ForStatement,
  IfStatement,
  ReturnStatement,
  SwitchStatement,
  ThrowStatement,
  VarDeclStatement,
  WhileStatement,
  ExpressionStatement,
  Block,
  BreakStatement,
  ContinueStatement,
  // expressions
  Assignment,
  CastExpression,
  ClassInstanceCreation,
  ConditionalExpression,
  FieldAccess,
  InfixExpression,
  PrefixExpression,
  PostfixExpression,
  MethodInvocation,
  SimpleName,
  SuperFieldAccess,
  SuperMethodInvocation,
  VarDeclExpression,
  VarDeclFragment,
  Literal,
  ArrayAccess,
  ParenthesizedExpression,
  // declarations and supporting kinds
  TypeName,
  MethodDecl,
  ConstructorDecl,
  ClassDecl,
  FieldDecl,
  Parameter,
  SwitchCase,
  Modifier,
  Empty,
};

inline const char* kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::AssertStatement: return "AssertStatement";
    case NodeKind::ConstructorInvocation: return "ConstructorInvocation";
    case NodeKind::DoStatement: return "DoStatement";
    case NodeKind::ForStatement: return "ForStatement";
    case NodeKind::IfStatement: return "IfStatement";
    case NodeKind::ReturnStatement: return "ReturnStatement";
    case NodeKind::SwitchStatement: return "SwitchStatement";
    case NodeKind::ThrowStatement: return "ThrowStatement";
    case NodeKind::VarDeclStatement: return "VarDeclStatement";
    case NodeKind::WhileStatement: return "WhileStatement";
    case NodeKind::ExpressionStatement: return "ExpressionStatement";
    case NodeKind::Block: return "Block";
    case NodeKind::BreakStatement: return "BreakStatement";
    case NodeKind::ContinueStatement: return "ContinueStatement";
    case NodeKind::Assignment: return "Assignment";
    case NodeKind::CastExpression: return "CastExpression";
    case NodeKind::ClassInstanceCreation: return "ClassInstanceCreation";
    case NodeKind::ConditionalExpression: return "ConditionalExpression";
    case NodeKind::FieldAccess: return "FieldAccess";
    case NodeKind::InfixExpression: return "InfixExpression";
    case NodeKind::PrefixExpression: return "PrefixExpression";
    case NodeKind::PostfixExpression: return "PostfixExpression";
    case NodeKind::MethodInvocation: return "MethodInvocation";
    case NodeKind::SimpleName: return "SimpleName";
    case NodeKind::SuperFieldAccess: return "SuperFieldAccess";
    case NodeKind::SuperMethodInvocation: return "SuperMethodInvocation";
    case NodeKind::VarDeclExpression: return "VarDeclExpression";
    case NodeKind::VarDeclFragment: return "VarDeclFragment";
    case NodeKind::Literal: return "Literal";
    case NodeKind::ArrayAccess: return "ArrayAccess";
    case NodeKind::ParenthesizedExpression: return "ParenthesizedExpression";
    case NodeKind::TypeName: return "TypeName";
    case NodeKind::MethodDecl: return "MethodDecl";
    case NodeKind::ConstructorDecl: return "ConstructorDecl";
    case NodeKind::ClassDecl: return "ClassDecl";
    case NodeKind::FieldDecl: return "FieldDecl";
    case NodeKind::Parameter: return "Parameter";
    case NodeKind::SwitchCase: return "SwitchCase";
    case NodeKind::Modifier: return "Modifier";
    case NodeKind::Empty: return "Empty";
  }
  return "?";
}

// True for every kind that may appear directly in a Block.
inline bool is_statement(NodeKind k) {
  switch (k) {
    case NodeKind::AssertStatement:
    case NodeKind::ConstructorInvocation:
    case NodeKind::DoStatement:
    case NodeKind::ForStatement:
    case NodeKind::IfStatement:
    case NodeKind::ReturnStatement:
    case NodeKind::SwitchStatement:
    case NodeKind::ThrowStatement:
    case NodeKind::VarDeclStatement:
    case NodeKind::WhileStatement:
    case NodeKind::ExpressionStatement:
    case NodeKind::Block:
    case NodeKind::BreakStatement:
    case NodeKind::ContinueStatement:
      return true;
    default:
      return false;
  }
}

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// One syntax tree node. Leaves carry a token (identifier, literal lexeme,
// operator); token-bearing interior nodes exist too (a MethodInvocation
// carries its callee name, an InfixExpression its operator).
//
// Shapes per kind (children in order):
//   Block             -> statements...
//   IfStatement       -> cond, then Block [, else Block]
//   While/DoStatement -> cond, Block
//   ForStatement      -> init|Empty, cond|Empty, update|Empty, Block
//   SwitchStatement   -> selector, SwitchCase...
//   SwitchCase        -> label expr | Empty (default), statements...
//   Assert/Return/Throw/ExpressionStatement -> expr
//   VarDeclStatement/VarDeclExpression -> TypeName, VarDeclFragment...
//   VarDeclFragment   -> [init expr]                (token = declared name)
//   ConstructorInvocation -> args...
//   Assignment        -> lhs, rhs                   (token = "=")
//   Infix             -> lhs, rhs                   (token = operator)
//   Prefix/Postfix    -> operand                    (token = operator)
//   MethodInvocation  -> receiver|Empty, args...    (token = callee name)
//   SuperMethodInvocation -> args...                (token = callee name)
//   FieldAccess       -> receiver                   (token = field name)
//   SuperFieldAccess  -> (none)                     (token = field name)
//   ClassInstanceCreation -> args...                (token = class name)
//   CastExpression    -> TypeName, operand
//   ConditionalExpression -> cond, then, else
//   ArrayAccess       -> array, index
//   ParenthesizedExpression -> inner
//   MethodDecl        -> Modifier..., TypeName(ret), Parameter..., Block
//   ConstructorDecl   -> Modifier..., Parameter..., Block
//   ClassDecl         -> Modifier..., [TypeName(super)], members...
//   FieldDecl         -> Modifier..., TypeName, VarDeclFragment...
//   Parameter         -> TypeName                   (token = name)
struct AstNode {
  NodeKind kind = NodeKind::Empty;
  std::string token;
  std::vector<AstNode> children;
  Span span;
  std::size_t preorder_index = 0;

  bool operator==(const AstNode& other) const {
    if (kind != other.kind || token != other.token ||
        children.size() != other.children.size())
      return false;
    for (std::size_t i = 0; i < children.size(); ++i)
      if (!(children[i] == other.children[i])) return false;
    return true;
  }
};

struct SourceUnit {
  std::optional<std::string> package_name;
  std::vector<AstNode> classes;
  std::string raw_text;
};

inline AstNode make_node(NodeKind k, std::string token = {},
                         std::vector<AstNode> children = {}) {
  AstNode n;
  n.kind = k;
  n.token = std::move(token);
  n.children = std::move(children);
  return n;
}

inline std::size_t node_count(const AstNode& n) {
  std::size_t c = 1;
  for (const auto& ch : n.children) c += node_count(ch);
  return c;
}

inline void assign_preorder(AstNode& n, std::size_t& next) {
  n.preorder_index = next++;
  for (auto& ch : n.children) assign_preorder(ch, next);
}

inline void reindex_unit(SourceUnit& unit) {
  std::size_t next = 0;
  for (auto& c : unit.classes) assign_preorder(c, next);
}

// Direct descendant statements, descending through the node's own block and
// switch-case wrappers. Statements nested in deeper statements are not
// included; expressions never are.
inline void collect_child_statements(const AstNode& n,
                                     std::vector<const AstNode*>& out) {
  auto take_block = [&out](const AstNode& blk) {
    for (const auto& s : blk.children)
      if (is_statement(s.kind)) out.push_back(&s);
  };
  switch (n.kind) {
    case NodeKind::Block:
      take_block(n);
      break;
    case NodeKind::IfStatement:
      for (std::size_t i = 1; i < n.children.size(); ++i)
        take_block(n.children[i]);
      break;
    case NodeKind::WhileStatement:
    case NodeKind::DoStatement:
      take_block(n.children[1]);
      break;
    case NodeKind::ForStatement:
      take_block(n.children[3]);
      break;
    case NodeKind::SwitchStatement:
      for (std::size_t i = 1; i < n.children.size(); ++i) {
        const AstNode& sc = n.children[i];
        for (std::size_t j = 1; j < sc.children.size(); ++j)
          if (is_statement(sc.children[j].kind))
            out.push_back(&sc.children[j]);
      }
      break;
    default:
      break;
  }
}

inline std::vector<const AstNode*> child_statements(const AstNode& n) {
  std::vector<const AstNode*> out;
  collect_child_statements(n, out);
  return out;
}

// Child-index path from a root node; used to anchor modifications.
using NodePath = std::vector<int>;

inline const AstNode* node_at(const AstNode& root, const NodePath& path) {
  const AstNode* n = &root;
  for (int idx : path) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= n->children.size())
      return nullptr;
    n = &n->children[static_cast<std::size_t>(idx)];
  }
  return n;
}

inline bool find_path(const AstNode& root, const AstNode* target,
                      NodePath& path) {
  if (&root == target) return true;
  for (std::size_t i = 0; i < root.children.size(); ++i) {
    path.push_back(static_cast<int>(i));
    if (find_path(root.children[i], target, path)) return true;
    path.pop_back();
  }
  return false;
}

}  // namespace skelfix
