// Copyright 2026 The Verifuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "verifuzz/toy/ast.h"

#include <algorithm>
#include <array>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace verifuzz::toy {
namespace {

using grammar::DerivationTree;

constexpr std::array<std::string_view, static_cast<size_t>(NodeKind::kCount)>
    kNodeKindNames = {
        "program",
        "class",
        "enum",
        "enum_member",
        "method",
        "field",
        "run_block",
        "param",
        "requires",
        "ensures",
        "context_everywhere",
        "type_int",
        "type_bool",
        "type_void",
        "type_named",
        "local_decl",
        "assign",
        "if",
        "while",
        "loop_invariant",
        "return",
        "block",
        "label",
        "assert",
        "lock",
        "fork",
        "sequential",
        "int_lit",
        "bool_lit",
        "null_lit",
        "ident",
        "result",
        "old",
        "not",
        "neg",
        "add",
        "sub",
        "mul",
        "eq",
        "ne",
        "lt",
        "le",
        "and",
        "or",
};

// Thrown on trees that do not match the mini-PVL grammar; converted to a
// status at the API boundary.
struct ShapeError {
  std::string message;
};

[[noreturn]] void Fail(const DerivationTree& node, const std::string& what) {
  throw ShapeError{absl::StrCat("unexpected ", what, " in '", node.name, "'")};
}

SourcePos FirstPos(const DerivationTree& node) {
  if (node.IsLeaf()) return node.pos;
  for (const DerivationTree& child : node.children) {
    SourcePos pos = FirstPos(child);
    if (pos.line != 0) return pos;
  }
  return {};
}

bool IsLiteral(const DerivationTree& node, std::string_view text) {
  return node.kind == DerivationTree::Kind::kLiteral && node.text == text;
}

bool IsRule(const DerivationTree& node, std::string_view name) {
  return node.kind == DerivationTree::Kind::kRule && node.name == name;
}

int BinaryPrecedence(NodeKind kind) {
  switch (kind) {
    case NodeKind::kOr:
      return 1;
    case NodeKind::kAnd:
      return 2;
    case NodeKind::kEq:
    case NodeKind::kNe:
      return 3;
    case NodeKind::kLt:
    case NodeKind::kLe:
      return 4;
    case NodeKind::kAdd:
    case NodeKind::kSub:
      return 5;
    case NodeKind::kMul:
      return 6;
    default:
      return 0;
  }
}

NodeKind BinaryKind(std::string_view op) {
  if (op == "+") return NodeKind::kAdd;
  if (op == "-") return NodeKind::kSub;
  if (op == "*") return NodeKind::kMul;
  if (op == "==") return NodeKind::kEq;
  if (op == "!=") return NodeKind::kNe;
  if (op == "<") return NodeKind::kLt;
  if (op == "<=") return NodeKind::kLe;
  if (op == "&&") return NodeKind::kAnd;
  if (op == "||") return NodeKind::kOr;
  return NodeKind::kCount;
}

class Builder {
 public:
  Builder(NodeVisitor visit, void* context)
      : visit_(visit), context_(context) {}

  Program BuildProgram(const DerivationTree& node) {
    if (!IsRule(node, "program")) Fail(node, "root");
    Visit(NodeKind::kProgram);
    Program program;
    for (const DerivationTree& child : node.children) {
      if (!IsRule(child, "decl") || child.children.size() != 1) {
        Fail(node, "child");
      }
      const DerivationTree& inner = child.children[0];
      if (IsRule(inner, "class_decl")) {
        program.decls.emplace_back(BuildClass(inner));
      } else if (IsRule(inner, "enum_decl")) {
        program.decls.emplace_back(BuildEnum(inner));
      } else if (IsRule(inner, "method_decl")) {
        program.decls.emplace_back(BuildMethod(inner));
      } else {
        Fail(inner, "declaration");
      }
    }
    return program;
  }

 private:
  void Visit(NodeKind kind) {
    if (visit_ != nullptr) visit_(context_, kind);
  }

  Enum BuildEnum(const DerivationTree& node) {
    Visit(NodeKind::kEnum);
    Enum result;
    result.pos = FirstPos(node);
    // enum IDENT { (IDENT (, IDENT)*)? }
    result.name = node.children.at(1).text;
    for (size_t i = 3; i + 1 < node.children.size(); ++i) {
      const DerivationTree& child = node.children[i];
      if (child.kind != DerivationTree::Kind::kToken) continue;
      Visit(NodeKind::kEnumMember);
      result.members.push_back({child.text, child.pos});
    }
    return result;
  }

  Class BuildClass(const DerivationTree& node) {
    Visit(NodeKind::kClass);
    Class result;
    result.pos = FirstPos(node);
    result.name = node.children.at(1).text;
    for (const DerivationTree& child : node.children) {
      if (!IsRule(child, "member")) continue;
      const DerivationTree& inner = child.children.at(0);
      if (IsRule(inner, "field_decl")) {
        Visit(NodeKind::kField);
        Field field;
        field.pos = FirstPos(inner);
        field.type = BuildType(inner.children.at(0));
        field.name = inner.children.at(1).text;
        result.members.emplace_back(std::move(field));
      } else if (IsRule(inner, "method_decl")) {
        result.members.emplace_back(BuildMethod(inner));
      } else if (IsRule(inner, "run_block")) {
        Visit(NodeKind::kRunBlock);
        RunBlock run;
        run.pos = FirstPos(inner);
        run.body = BuildBlockBody(inner.children.at(1));
        result.members.emplace_back(std::move(run));
      } else {
        Fail(inner, "member");
      }
    }
    return result;
  }

  Method BuildMethod(const DerivationTree& node) {
    Visit(NodeKind::kMethod);
    Method result;
    result.pos = FirstPos(node);
    size_t i = 0;
    for (; i < node.children.size() && IsRule(node.children[i], "contract");
         ++i) {
      result.contracts.push_back(BuildContract(node.children[i]));
    }
    result.return_type = BuildType(node.children.at(i++));
    result.name = node.children.at(i++).text;
    for (; i < node.children.size(); ++i) {
      const DerivationTree& child = node.children[i];
      if (IsRule(child, "params")) {
        for (const DerivationTree& param : child.children) {
          if (!IsRule(param, "param")) continue;
          Visit(NodeKind::kParam);
          result.params.push_back({BuildType(param.children.at(0)),
                                   param.children.at(1).text, FirstPos(param)});
        }
      } else if (IsRule(child, "block")) {
        result.body = BuildBlockBody(child);
      }
    }
    return result;
  }

  Contract BuildContract(const DerivationTree& node) {
    Contract result;
    result.pos = FirstPos(node);
    const std::string& keyword = node.children.at(0).text;
    if (keyword == "requires") {
      result.kind = NodeKind::kRequires;
    } else if (keyword == "ensures") {
      result.kind = NodeKind::kEnsures;
    } else {
      result.kind = NodeKind::kContextEverywhere;
    }
    Visit(result.kind);
    result.expr = BuildExpr(node.children.at(1));
    return result;
  }

  TypeRef BuildType(const DerivationTree& node) {
    if (!IsRule(node, "type")) Fail(node, "type");
    const DerivationTree& leaf = node.children.at(0);
    TypeRef result;
    result.pos = leaf.pos;
    if (leaf.kind == DerivationTree::Kind::kToken) {
      result.kind = NodeKind::kTypeNamed;
      result.name = leaf.text;
    } else if (leaf.text == "int") {
      result.kind = NodeKind::kTypeInt;
    } else if (leaf.text == "bool") {
      result.kind = NodeKind::kTypeBool;
    } else {
      result.kind = NodeKind::kTypeVoid;
    }
    Visit(result.kind);
    return result;
  }

  // Statements between the braces of a `block` or `seq_block` node.
  std::vector<Stmt> BuildBlockBody(const DerivationTree& node) {
    std::vector<Stmt> body;
    for (const DerivationTree& child : node.children) {
      if (IsRule(child, "stmt")) body.push_back(BuildStmt(child));
    }
    return body;
  }

  Stmt BuildStmt(const DerivationTree& node) {
    const DerivationTree& inner = node.children.at(0);
    const auto& c = inner.children;
    Stmt stmt;
    stmt.pos = FirstPos(inner);
    if (IsRule(inner, "local_decl")) {
      stmt.kind = NodeKind::kLocalDecl;
      Visit(stmt.kind);
      stmt.type = BuildType(c.at(0));
      stmt.name = c.at(1).text;
      if (c.size() > 3) stmt.expr = BuildExpr(c.at(3));
    } else if (IsRule(inner, "assign")) {
      stmt.kind = NodeKind::kAssign;
      Visit(stmt.kind);
      stmt.name = c.at(0).text;
      stmt.expr = BuildExpr(c.at(2));
    } else if (IsRule(inner, "if_stmt")) {
      stmt.kind = NodeKind::kIf;
      Visit(stmt.kind);
      stmt.expr = BuildExpr(c.at(2));
      stmt.body = BuildBlockBody(c.at(4));
      if (c.size() > 5) {
        stmt.has_else = true;
        stmt.else_body = BuildBlockBody(c.at(6));
      }
    } else if (IsRule(inner, "while_stmt")) {
      stmt.kind = NodeKind::kWhile;
      Visit(stmt.kind);
      size_t i = 0;
      while (IsLiteral(c.at(i), "loop_invariant")) {
        Visit(NodeKind::kLoopInvariant);
        stmt.invariants.push_back(BuildExpr(c.at(i + 1)));
        i += 3;
      }
      stmt.expr = BuildExpr(c.at(i + 2));
      stmt.body = BuildBlockBody(c.at(i + 4));
    } else if (IsRule(inner, "return_stmt")) {
      stmt.kind = NodeKind::kReturn;
      Visit(stmt.kind);
      if (c.size() > 2) stmt.expr = BuildExpr(c.at(1));
    } else if (IsRule(inner, "block")) {
      stmt.kind = NodeKind::kBlock;
      Visit(stmt.kind);
      stmt.body = BuildBlockBody(inner);
    } else if (IsRule(inner, "label_stmt")) {
      stmt.kind = NodeKind::kLabel;
      Visit(stmt.kind);
      stmt.name = c.at(1).text;
    } else if (IsRule(inner, "assert_stmt")) {
      stmt.kind = NodeKind::kAssert;
      Visit(stmt.kind);
      stmt.expr = BuildExpr(c.at(1));
    } else if (IsRule(inner, "lock_stmt")) {
      stmt.kind = NodeKind::kLock;
      Visit(stmt.kind);
      stmt.expr = BuildExpr(c.at(1));
    } else if (IsRule(inner, "fork_stmt")) {
      stmt.kind = NodeKind::kFork;
      Visit(stmt.kind);
      stmt.expr = BuildExpr(c.at(1));
    } else if (IsRule(inner, "seq_block")) {
      stmt.kind = NodeKind::kSequential;
      Visit(stmt.kind);
      stmt.body = BuildBlockBody(inner);
    } else {
      Fail(inner, "statement");
    }
    return stmt;
  }

  // `expr` nodes are right-nested flat chains `unary (binop unary)*`;
  // operator precedence is applied here by precedence climbing.
  Expr BuildExpr(const DerivationTree& node) {
    std::vector<Expr> operands;
    std::vector<NodeKind> ops;
    const DerivationTree* cur = &node;
    while (true) {
      if (!IsRule(*cur, "expr")) Fail(*cur, "expression");
      operands.push_back(BuildUnary(cur->children.at(0)));
      if (cur->children.size() == 1) break;
      const DerivationTree& binop = cur->children.at(1);
      NodeKind kind = BinaryKind(binop.children.at(0).text);
      if (kind == NodeKind::kCount) Fail(binop, "operator");
      ops.push_back(kind);
      cur = &cur->children.at(2);
    }
    size_t next = 0;
    Expr result = Climb(operands, ops, next, 1);
    return result;
  }

  Expr Climb(std::vector<Expr>& operands, const std::vector<NodeKind>& ops,
             size_t& next, int min_precedence) {
    Expr lhs = std::move(operands[next]);
    while (next < ops.size() && BinaryPrecedence(ops[next]) >= min_precedence) {
      NodeKind op = ops[next];
      ++next;
      Expr rhs = Climb(operands, ops, next, BinaryPrecedence(op) + 1);
      Visit(op);
      Expr combined;
      combined.kind = op;
      combined.pos = lhs.pos;
      combined.operands.push_back(std::move(lhs));
      combined.operands.push_back(std::move(rhs));
      lhs = std::move(combined);
    }
    return lhs;
  }

  Expr BuildUnary(const DerivationTree& node) {
    if (!IsRule(node, "unary")) Fail(node, "operand");
    const DerivationTree& first = node.children.at(0);
    if (IsRule(first, "primary")) return BuildPrimary(first);
    Expr result;
    result.pos = first.pos;
    result.kind = first.text == "!" ? NodeKind::kNot : NodeKind::kNeg;
    Visit(result.kind);
    result.operands.push_back(BuildUnary(node.children.at(1)));
    return result;
  }

  Expr BuildPrimary(const DerivationTree& node) {
    const DerivationTree& first = node.children.at(0);
    Expr result;
    result.pos = first.pos;
    if (first.kind == DerivationTree::Kind::kToken) {
      result.kind = first.name == "INT" ? NodeKind::kIntLit : NodeKind::kIdent;
      result.text = first.text;
    } else if (first.text == "true" || first.text == "false") {
      result.kind = NodeKind::kBoolLit;
      result.text = first.text;
    } else if (first.text == "null") {
      result.kind = NodeKind::kNullLit;
    } else if (first.text == "\\result") {
      result.kind = NodeKind::kResult;
    } else if (first.text == "\\old") {
      result.kind = NodeKind::kOld;
      result.operands.push_back(BuildExpr(node.children.at(2)));
    } else if (first.text == "(") {
      return BuildExpr(node.children.at(1));
    } else {
      Fail(node, "primary");
    }
    Visit(result.kind);
    return result;
  }

  NodeVisitor visit_;
  void* context_;
};

int BodyDepth(const std::vector<Stmt>& body, int level) {
  int depth = 0;
  for (const Stmt& stmt : body) {
    depth = std::max(depth, level);
    depth = std::max(depth, BodyDepth(stmt.body, level + 1));
    depth = std::max(depth, BodyDepth(stmt.else_body, level + 1));
  }
  return depth;
}

}  // namespace

std::string_view NodeKindName(NodeKind kind) {
  auto index = static_cast<size_t>(kind);
  return index < kNodeKindNames.size() ? kNodeKindNames[index] : "unknown";
}

bool Class::HasRunBlock() const {
  return std::any_of(members.begin(), members.end(), [](const Member& m) {
    return std::holds_alternative<RunBlock>(m);
  });
}

absl::StatusOr<Program> BuildProgram(const grammar::DerivationTree& tree,
                                     NodeVisitor visit, void* context) {
  try {
    return Builder(visit, context).BuildProgram(tree);
  } catch (const ShapeError& e) {
    return absl::InvalidArgumentError(e.message);
  } catch (const std::out_of_range&) {
    return absl::InvalidArgumentError("truncated derivation tree");
  }
}

int MaxStatementDepth(const Program& program) {
  int depth = 0;
  auto visit_method = [&depth](const Method& method) {
    depth = std::max(depth, BodyDepth(method.body, 1));
  };
  for (const Decl& decl : program.decls) {
    if (const auto* method = std::get_if<Method>(&decl)) {
      visit_method(*method);
    } else if (const auto* cls = std::get_if<Class>(&decl)) {
      for (const Member& member : cls->members) {
        if (const auto* m = std::get_if<Method>(&member)) {
          visit_method(*m);
        } else if (const auto* run = std::get_if<RunBlock>(&member)) {
          depth = std::max(depth, BodyDepth(run->body, 1));
        }
      }
    }
  }
  return depth;
}

}  // namespace verifuzz::toy
