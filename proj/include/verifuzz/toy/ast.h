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

// Abstract syntax of mini-PVL and its construction from a derivation tree
// produced by the shipped grammar.

#ifndef VERIFUZZ_TOY_AST_H_
#define VERIFUZZ_TOY_AST_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "verifuzz/grammar.h"

namespace verifuzz::toy {

using grammar::SourcePos;

// Every syntactic category the front-end handles. The numeric values are
// part of the coverage counter table and must not be reordered.
enum class NodeKind : uint16_t {
  kProgram,
  kClass,
  kEnum,
  kEnumMember,
  kMethod,
  kField,
  kRunBlock,
  kParam,
  kRequires,
  kEnsures,
  kContextEverywhere,
  kTypeInt,
  kTypeBool,
  kTypeVoid,
  kTypeNamed,
  kLocalDecl,
  kAssign,
  kIf,
  kWhile,
  kLoopInvariant,
  kReturn,
  kBlock,
  kLabel,
  kAssert,
  kLock,
  kFork,
  kSequential,
  kIntLit,
  kBoolLit,
  kNullLit,
  kIdent,
  kResult,
  kOld,
  kNot,
  kNeg,
  kAdd,
  kSub,
  kMul,
  kEq,
  kNe,
  kLt,
  kLe,
  kAnd,
  kOr,
  kCount,
};

std::string_view NodeKindName(NodeKind kind);

struct TypeRef {
  NodeKind kind = NodeKind::kTypeInt;
  std::string name;  // Only for kTypeNamed.
  SourcePos pos;
};

struct Expr {
  NodeKind kind = NodeKind::kIntLit;
  // Literal text or identifier.
  std::string text;
  std::vector<Expr> operands;
  SourcePos pos;
};

struct Stmt {
  NodeKind kind = NodeKind::kBlock;
  SourcePos pos;
  TypeRef type;      // kLocalDecl
  std::string name;  // kLocalDecl, kAssign target, kLabel
  // Initializer, assigned value, condition, returned value or operand.
  std::optional<Expr> expr;
  std::vector<Expr> invariants;  // kWhile
  std::vector<Stmt> body;        // kBlock, kIf, kWhile, kSequential
  std::vector<Stmt> else_body;   // kIf
  bool has_else = false;
};

struct Contract {
  NodeKind kind = NodeKind::kRequires;
  Expr expr;
  SourcePos pos;
};

struct Param {
  TypeRef type;
  std::string name;
  SourcePos pos;
};

struct Method {
  std::vector<Contract> contracts;
  TypeRef return_type;
  std::string name;
  std::vector<Param> params;
  std::vector<Stmt> body;
  SourcePos pos;
};

struct Field {
  TypeRef type;
  std::string name;
  SourcePos pos;
};

struct RunBlock {
  std::vector<Stmt> body;
  SourcePos pos;
};

using Member = std::variant<Field, Method, RunBlock>;

struct Class {
  std::string name;
  std::vector<Member> members;
  SourcePos pos;

  bool HasRunBlock() const;
};

struct EnumMember {
  std::string name;
  SourcePos pos;
};

struct Enum {
  std::string name;
  std::vector<EnumMember> members;
  SourcePos pos;
};

using Decl = std::variant<Class, Enum, Method>;

struct Program {
  std::vector<Decl> decls;
};

// Receives one call per node built, used for coverage accounting.
using NodeVisitor = void (*)(void* context, NodeKind kind);

// Converts a mini-PVL derivation tree into a Program. Fails only if the tree
// does not come from the mini-PVL grammar.
absl::StatusOr<Program> BuildProgram(const grammar::DerivationTree& tree,
                                     NodeVisitor visit = nullptr,
                                     void* context = nullptr);

// Deepest statement nesting in any method or run block body. Statements
// directly in a body are at depth 1.
int MaxStatementDepth(const Program& program);

}  // namespace verifuzz::toy

#endif  // VERIFUZZ_TOY_AST_H_
