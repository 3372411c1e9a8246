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

#include "verifuzz/toy/verifier.h"

#include <algorithm>
#include <array>
#include <map>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "verifuzz/toy/ast.h"

namespace verifuzz::toy {
namespace {

// Inputs beyond these limits are rejected as parse errors so that the
// recursive phases cannot exhaust the stack.
constexpr size_t kMaxTokens = 20000;
constexpr int kMaxNesting = 200;

enum class DiagCode : uint32_t {
  kLexError = 1,
  kParseError,
  kInputTooLarge,
  kDuplicateType,
  kDuplicateMethod,
  kDuplicateField,
  kDuplicateEnumMember,
  kDuplicateVariable,
  kDuplicateLabel,
  kUndefinedType,
  kUndefinedName,
  kNotAssignable,
  kVoidVariable,
  kTypeMismatch,
  kNotBoolean,
  kOperandType,
  kReturnValueInVoid,
  kMissingReturnValue,
  kReturnInRunBlock,
  kResultPlacement,
  kResultInVoid,
  kLockTarget,
  kForkTarget,
  kForkWithoutRun,
  kOldInPrecondition,
  kOldPlacement,
  kEnd,
};

constexpr std::array<std::string_view, static_cast<size_t>(DiagCode::kEnd) - 1>
    kDiagNames = {
        "lex_error",
        "parse_error",
        "input_too_large",
        "duplicate_type",
        "duplicate_method",
        "duplicate_field",
        "duplicate_enum_member",
        "duplicate_variable",
        "duplicate_label",
        "undefined_type",
        "undefined_name",
        "not_assignable",
        "void_variable",
        "type_mismatch",
        "not_boolean",
        "operand_type",
        "return_value_in_void",
        "missing_return_value",
        "return_in_run_block",
        "result_placement",
        "result_in_void",
        "lock_target",
        "fork_target",
        "fork_without_run",
        "old_in_precondition",
        "old_placement",
};

constexpr std::array<std::string_view, kBugCount> kCanonicalTriggers = {
    "enum Empty {\n}\n",
    "void ___() {\n}\n",
    "class Three {\n  run {\n    label sixty;\n  }\n}\n",
    "requires \\old(true);\nvoid example() {\n}\n",
    "void example() {\n  lock null;\n}\n",
    "void spork() {\n  fork null;\n}\n",
    "void func_2147483648() {\n}\n",
    "void x() {\n  sequential {\n  }\n}\n",
};

// Clean rejection of the input; becomes exit status 1.
struct Diagnostic {
  Phase phase;
  DiagCode code;
  std::string text;  // Message including the position.
};

// Seeded bug fired; becomes exit status 70.
struct CrashSignal {
  CrashInfo info;
};

struct FrameSite {
  const char* class_name;
  const char* method_name;
  const char* file_name;
  int line;
};

// Shadow call stack of the verifier's own "managed" frames. Only pass-level
// functions push frames, so one bug always produces the same frame list no
// matter where in the program its trigger sits.
thread_local std::vector<FrameSite> shadow_stack;

class FrameScope {
 public:
  explicit FrameScope(FrameSite site) { shadow_stack.push_back(site); }
  ~FrameScope() { shadow_stack.pop_back(); }
  FrameScope(const FrameScope&) = delete;
  FrameScope& operator=(const FrameScope&) = delete;
};

#define TOY_FRAME(cls, method, file) \
  FrameScope toy_frame_scope(FrameSite{cls, method, file, __LINE__})

// Builds the trace for a crash raised at `line` of the innermost shadow
// frame. `library` frames sit above it, innermost first.
CrashInfo MakeCrash(Bug bug, std::string exception, std::string message,
                    int line, std::initializer_list<FrameSite> library) {
  CrashInfo info;
  info.bug = bug;
  info.exception = std::move(exception);
  info.message = std::move(message);
  for (const FrameSite& site : library) {
    info.frames.push_back(
        {site.class_name, site.method_name, site.file_name, site.line});
  }
  for (auto it = shadow_stack.rbegin(); it != shadow_stack.rend(); ++it) {
    int frame_line = it == shadow_stack.rbegin() ? line : it->line;
    info.frames.push_back(
        {it->class_name, it->method_name, it->file_name, frame_line});
  }
  return info;
}

std::string PosText(SourcePos pos) {
  return absl::StrCat(pos.line, ":", pos.col);
}

// Resolved semantic type.
struct Type {
  enum class Kind { kInt, kBool, kVoid, kNull, kClass, kEnum };
  Kind kind = Kind::kInt;
  std::string name;

  bool operator==(const Type&) const = default;
};

std::string Describe(const Type& type) {
  switch (type.kind) {
    case Type::Kind::kInt:
      return "int";
    case Type::Kind::kBool:
      return "bool";
    case Type::Kind::kVoid:
      return "void";
    case Type::Kind::kNull:
      return "null";
    case Type::Kind::kClass:
    case Type::Kind::kEnum:
      return type.name;
  }
  return "?";
}

bool Assignable(const Type& target, const Type& value) {
  return target == value ||
         (target.kind == Type::Kind::kClass && value.kind == Type::Kind::kNull);
}

bool ContainsKind(const Expr& expr, NodeKind kind) {
  if (expr.kind == kind) return true;
  return std::any_of(expr.operands.begin(), expr.operands.end(),
                     [kind](const Expr& e) { return ContainsKind(e, kind); });
}

struct ClassInfo {
  const Class* decl = nullptr;
  std::map<std::string, const Field*> fields;
  std::map<std::string, const Method*> methods;
};

// A method or run block body together with its surroundings.
struct Body {
  const ClassInfo* owner = nullptr;
  const Method* method = nullptr;  // Null for run blocks.
  const std::vector<Stmt>* stmts = nullptr;
  SourcePos pos;
};

// Lexically scoped variables of one body.
class Scopes {
 public:
  void Push() { frames_.emplace_back(); }
  void Pop() { frames_.pop_back(); }
  // False when `name` is already declared in the innermost scope or is a
  // parameter.
  bool Declare(const std::string& name, const TypeRef* type) {
    if (frames_.size() > 1 && frames_.front().count(name) > 0) return false;
    return frames_.back().emplace(name, type).second;
  }
  const TypeRef* Lookup(const std::string& name) const {
    for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
      auto found = it->find(name);
      if (found != it->end()) return found->second;
    }
    return nullptr;
  }

 private:
  // frames_[0] holds the parameters.
  std::vector<std::map<std::string, const TypeRef*>> frames_;
};

class Checker {
 public:
  Checker(const BugToggles& bugs, CheckResult& result)
      : bugs_(bugs), result_(result) {}

  void Run(std::string_view text) {
    TOY_FRAME("toy.Main", "main", "Main.scala");
    Enter(Phase::kLex);
    absl::StatusOr<std::vector<grammar::Token>> tokens =
        grammar::Lex(MiniPvlGrammar(), text);
    if (!tokens.ok()) {
      Reject(Phase::kLex, DiagCode::kLexError,
             std::string(tokens.status().message()));
    }
    Enter(Phase::kParse);
    CheckLimits(*tokens);
    absl::StatusOr<grammar::DerivationTree> tree =
        MiniPvlParser().ParseTokens(*tokens);
    if (!tree.ok()) {
      Reject(Phase::kParse, DiagCode::kParseError,
             std::string(tree.status().message()));
    }
    absl::StatusOr<Program> program = BuildProgram(
        *tree,
        [](void* self, NodeKind kind) {
          static_cast<Checker*>(self)->Hit(kCounterBuildBase +
                                           static_cast<uint32_t>(kind));
        },
        this);
    if (!program.ok()) {
      Reject(Phase::kParse, DiagCode::kParseError,
             std::string(program.status().message()));
    }
    program_ = &*program;
    Enter(Phase::kResolve);
    Resolve();
    Enter(Phase::kTypecheck);
    Typecheck();
    Enter(Phase::kEncode);
    Encode();
    Hit(kCounterSuccess);
  }

 private:
  void Enter(Phase phase) {
    result_.phase = phase;
    Hit(PhaseCounter(phase));
  }

  void Hit(uint32_t id) { result_.counters.insert(id); }

  bool Enabled(Bug bug) const { return bugs_.test(static_cast<size_t>(bug)); }

  [[noreturn]] void Reject(Phase phase, DiagCode code, std::string text) {
    Hit(kCounterDiagnosticBase + static_cast<uint32_t>(code));
    throw Diagnostic{phase, code, std::move(text)};
  }

  [[noreturn]] void Error(DiagCode code, SourcePos pos,
                          const std::string& message) {
    Reject(result_.phase, code, absl::StrCat(message, " at ", PosText(pos)));
  }

  [[noreturn]] void Raise(Bug bug, std::string exception, std::string message,
                          int line,
                          std::initializer_list<FrameSite> library = {}) {
    Hit(kCounterBugBase + static_cast<uint32_t>(bug) + 1);
    throw CrashSignal{MakeCrash(bug, std::move(exception), std::move(message),
                                line, library)};
  }

  void CheckLimits(const std::vector<grammar::Token>& tokens) {
    if (tokens.size() > kMaxTokens) {
      Error(DiagCode::kInputTooLarge, tokens[kMaxTokens].pos,
            absl::StrCat("input exceeds ", kMaxTokens, " tokens"));
    }
    // Bracket nesting, and the length of operator chains, which the parser
    // turns into right-nested trees.
    int brackets = 0;
    int operators = 0;
    for (const grammar::Token& token : tokens) {
      if (!token.is_literal) continue;
      const std::string& t = token.text;
      if (t == "(" || t == "{") {
        ++brackets;
      } else if (t == ")" || t == "}") {
        brackets = std::max(0, brackets - 1);
        operators = 0;
      } else if (t == ";") {
        operators = 0;
      } else if (BinaryOrUnaryOperator(t)) {
        ++operators;
      }
      if (brackets > kMaxNesting || operators > kMaxNesting) {
        Error(DiagCode::kInputTooLarge, token.pos, "nesting too deep");
      }
    }
  }

  static bool BinaryOrUnaryOperator(const std::string& t) {
    static const std::set<std::string>* const kOperators =
        new std::set<std::string>{
            "+", "-", "*", "==", "!=", "<", "<=", "&&", "||", "!"};
    return kOperators->count(t) > 0;
  }

  // ---------------------------------------------------------------------
  // resolve

  void Resolve() {
    TOY_FRAME("toy.resolve.ResolvePhase", "run", "ResolvePhase.scala");
    DeclareAllNames();
    CheckEnums();
    BuildSymbolTables();
    ResolveLabels();
    for (const Body& body : bodies_) ResolveBody(body);
  }

  void DeclareAllNames() {
    TOY_FRAME("toy.resolve.Namer", "declareAll", "Namer.scala");
    std::vector<std::string> names;
    auto add_body = [&names](const std::vector<Stmt>& body) {
      CollectStmtNames(body, names);
    };
    auto add_method = [&](const Method& m) {
      names.push_back(m.name);
      for (const Param& p : m.params) names.push_back(p.name);
      add_body(m.body);
    };
    for (const Decl& decl : program_->decls) {
      if (const auto* cls = std::get_if<Class>(&decl)) {
        names.push_back(cls->name);
        for (const Member& member : cls->members) {
          if (const auto* field = std::get_if<Field>(&member)) {
            names.push_back(field->name);
          } else if (const auto* method = std::get_if<Method>(&member)) {
            add_method(*method);
          } else {
            add_body(std::get<RunBlock>(member).body);
          }
        }
      } else if (const auto* e = std::get_if<Enum>(&decl)) {
        names.push_back(e->name);
        for (const EnumMember& member : e->members) {
          names.push_back(member.name);
        }
      } else {
        add_method(std::get<Method>(decl));
      }
    }
    for (const std::string& name : names) DeclareName(name);
  }

  static void CollectStmtNames(const std::vector<Stmt>& body,
                               std::vector<std::string>& names) {
    for (const Stmt& stmt : body) {
      if (stmt.kind == NodeKind::kLocalDecl || stmt.kind == NodeKind::kLabel) {
        names.push_back(stmt.name);
      }
      CollectStmtNames(stmt.body, names);
      CollectStmtNames(stmt.else_body, names);
    }
  }

  void DeclareName(const std::string& name) {
    TOY_FRAME("toy.resolve.Namer", "declare", "Namer.scala");
    NameSuffix(name);
    MangleName(name);
  }

  // Trailing digits of a name are parsed as a disambiguation index.
  void NameSuffix(const std::string& name) {
    TOY_FRAME("toy.resolve.Namer", "suffix", "Namer.scala");
    size_t start = name.size();
    while (start > 0 && absl::ascii_isdigit(name[start - 1])) --start;
    if (start == name.size()) return;
    std::string digits = name.substr(start);
    std::string_view value = digits;
    while (value.size() > 1 && value.front() == '0') value.remove_prefix(1);
    constexpr std::string_view kIntMax = "2147483647";
    bool overflows = value.size() > kIntMax.size() ||
                     (value.size() == kIntMax.size() && value > kIntMax);
    if (overflows && Enabled(Bug::kNumericSuffix)) {
      Raise(Bug::kNumericSuffix, "java.lang.NumberFormatException",
            absl::StrCat("For input string: \"", digits, "\""), __LINE__,
            {{"java.lang.NumberFormatException", "forInputString",
              "NumberFormatException.java", 68},
             {"java.lang.Integer", "parseInt", "Integer.java", 652}});
    }
  }

  // Names are split at their last run of underscores when mangled.
  void MangleName(const std::string& name) {
    TOY_FRAME("toy.resolve.Namer", "mangle", "Namer.scala");
    bool only_underscores =
        !name.empty() && name.find_first_not_of('_') == std::string::npos;
    if (only_underscores && Enabled(Bug::kUnderscoreName)) {
      Raise(Bug::kUnderscoreName, "java.lang.StringIndexOutOfBoundsException",
            absl::StrCat("begin 0, end -1, length ", name.size()), __LINE__,
            {{"java.lang.String", "checkBoundsBeginEnd", "String.java", 3319},
             {"java.lang.String", "substring", "String.java", 1874}});
    }
  }

  void CheckEnums() {
    TOY_FRAME("toy.resolve.EnumChecker", "check", "EnumChecker.scala");
    for (const Decl& decl : program_->decls) {
      if (const auto* e = std::get_if<Enum>(&decl)) EnumMembers(*e);
    }
  }

  void EnumMembers(const Enum& e) {
    TOY_FRAME("toy.resolve.EnumChecker", "members", "EnumChecker.scala");
    if (e.members.empty() && Enabled(Bug::kEmptyEnum)) {
      Raise(Bug::kEmptyEnum, "toy.util.EmptyCollectionException",
            absl::StrCat("enum ", e.name, " has no members"), __LINE__);
    }
  }

  void BuildSymbolTables() {
    TOY_FRAME("toy.resolve.SymbolTable", "build", "SymbolTable.scala");
    std::set<std::string> types;
    auto declare_type = [&](const std::string& name, SourcePos pos) {
      if (!types.insert(name).second) {
        Error(DiagCode::kDuplicateType, pos,
              absl::StrCat("duplicate type '", name, "'"));
      }
    };
    for (const Decl& decl : program_->decls) {
      if (const auto* cls = std::get_if<Class>(&decl)) {
        declare_type(cls->name, cls->pos);
        ClassInfo& info = classes_[cls->name];
        info.decl = cls;
        for (const Member& member : cls->members) {
          if (const auto* field = std::get_if<Field>(&member)) {
            if (!info.fields.emplace(field->name, field).second) {
              Error(DiagCode::kDuplicateField, field->pos,
                    absl::StrCat("duplicate field '", field->name, "'"));
            }
          } else if (const auto* method = std::get_if<Method>(&member)) {
            if (!info.methods.emplace(method->name, method).second) {
              Error(DiagCode::kDuplicateMethod, method->pos,
                    absl::StrCat("duplicate method '", method->name, "'"));
            }
          }
        }
      } else if (const auto* e = std::get_if<Enum>(&decl)) {
        declare_type(e->name, e->pos);
        enums_[e->name] = e;
        for (const EnumMember& member : e->members) {
          if (!enum_constants_.emplace(member.name, e).second) {
            Error(DiagCode::kDuplicateEnumMember, member.pos,
                  absl::StrCat("duplicate enum constant '", member.name, "'"));
          }
        }
      } else {
        const auto& method = std::get<Method>(decl);
        if (!global_methods_.emplace(method.name, &method).second) {
          Error(DiagCode::kDuplicateMethod, method.pos,
                absl::StrCat("duplicate method '", method.name, "'"));
        }
      }
    }
    for (const Decl& decl : program_->decls) {
      if (const auto* cls = std::get_if<Class>(&decl)) {
        const ClassInfo& info = classes_.at(cls->name);
        for (const Member& member : cls->members) {
          if (const auto* method = std::get_if<Method>(&member)) {
            bodies_.push_back({&info, method, &method->body, method->pos});
          } else if (const auto* run = std::get_if<RunBlock>(&member)) {
            bodies_.push_back({&info, nullptr, &run->body, run->pos});
          }
        }
      } else if (const auto* method = std::get_if<Method>(&decl)) {
        bodies_.push_back({nullptr, method, &method->body, method->pos});
      }
    }
  }

  void ResolveLabels() {
    TOY_FRAME("toy.resolve.LabelResolver", "run", "LabelResolver.scala");
    for (const Body& body : bodies_) {
      std::set<std::string> seen;
      DeclareLabels(body, *body.stmts, seen);
    }
  }

  void DeclareLabels(const Body& body, const std::vector<Stmt>& stmts,
                     std::set<std::string>& seen) {
    for (const Stmt& stmt : stmts) {
      if (stmt.kind == NodeKind::kLabel) {
        LabelScope(body, stmt);
        if (!seen.insert(stmt.name).second) {
          Error(DiagCode::kDuplicateLabel, stmt.pos,
                absl::StrCat("duplicate label '", stmt.name, "'"));
        }
      }
      DeclareLabels(body, stmt.body, seen);
      DeclareLabels(body, stmt.else_body, seen);
    }
  }

  // Labels are registered in the scope of the enclosing method.
  void LabelScope(const Body& body, const Stmt& label) {
    TOY_FRAME("toy.resolve.Scopes", "labelScope", "Scopes.scala");
    if (body.method == nullptr && Enabled(Bug::kLabelInRunBlock)) {
      Raise(Bug::kLabelInRunBlock, "toy.resolve.Scopes$NoScope",
            absl::StrCat("no method scope for label ", label.name), __LINE__);
    }
  }

  void ResolveType(const TypeRef& type) {
    Hit(kCounterResolveBase + static_cast<uint32_t>(type.kind));
    if (type.kind != NodeKind::kTypeNamed) return;
    if (classes_.count(type.name) == 0 && enums_.count(type.name) == 0) {
      Error(DiagCode::kUndefinedType, type.pos,
            absl::StrCat("undefined type '", type.name, "'"));
    }
  }

  void ResolveBody(const Body& body) {
    TOY_FRAME("toy.resolve.ReferenceResolver", "resolveBody",
              "ReferenceResolver.scala");
    Hit(kCounterResolveBase + static_cast<uint32_t>(body.method
                                                        ? NodeKind::kMethod
                                                        : NodeKind::kRunBlock));
    Scopes scopes;
    scopes.Push();
    if (body.method != nullptr) {
      ResolveType(body.method->return_type);
      for (const Param& param : body.method->params) {
        Hit(kCounterResolveBase + static_cast<uint32_t>(NodeKind::kParam));
        ResolveType(param.type);
        if (!scopes.Declare(param.name, &param.type)) {
          Error(DiagCode::kDuplicateVariable, param.pos,
                absl::StrCat("duplicate variable '", param.name, "'"));
        }
      }
      for (const Contract& contract : body.method->contracts) {
        Hit(kCounterResolveBase + static_cast<uint32_t>(contract.kind));
        ResolveExpr(body, scopes, contract.expr);
      }
    }
    if (body.owner != nullptr) {
      for (const auto& [name, field] : body.owner->fields) {
        Hit(kCounterResolveBase + static_cast<uint32_t>(NodeKind::kField));
        ResolveType(field->type);
      }
    }
    scopes.Push();
    ResolveStmts(body, scopes, *body.stmts);
    scopes.Pop();
  }

  void ResolveStmts(const Body& body, Scopes& scopes,
                    const std::vector<Stmt>& stmts) {
    for (const Stmt& stmt : stmts) {
      Hit(kCounterResolveBase + static_cast<uint32_t>(stmt.kind));
      switch (stmt.kind) {
        case NodeKind::kLocalDecl:
          ResolveType(stmt.type);
          if (stmt.expr) ResolveExpr(body, scopes, *stmt.expr);
          if (!scopes.Declare(stmt.name, &stmt.type)) {
            Error(DiagCode::kDuplicateVariable, stmt.pos,
                  absl::StrCat("duplicate variable '", stmt.name, "'"));
          }
          break;
        case NodeKind::kAssign:
          if (LookupVariable(body, scopes, stmt.name) == nullptr) {
            if (enum_constants_.count(stmt.name) > 0) {
              Error(DiagCode::kNotAssignable, stmt.pos,
                    absl::StrCat("cannot assign to enum constant '", stmt.name,
                                 "'"));
            }
            Error(DiagCode::kUndefinedName, stmt.pos,
                  absl::StrCat("undefined name '", stmt.name, "'"));
          }
          ResolveExpr(body, scopes, *stmt.expr);
          break;
        case NodeKind::kWhile:
          for (const Expr& inv : stmt.invariants) {
            Hit(kCounterResolveBase +
                static_cast<uint32_t>(NodeKind::kLoopInvariant));
            ResolveExpr(body, scopes, inv);
          }
          [[fallthrough]];
        case NodeKind::kIf:
          ResolveExpr(body, scopes, *stmt.expr);
          scopes.Push();
          ResolveStmts(body, scopes, stmt.body);
          scopes.Pop();
          if (stmt.has_else) {
            scopes.Push();
            ResolveStmts(body, scopes, stmt.else_body);
            scopes.Pop();
          }
          break;
        case NodeKind::kBlock:
        case NodeKind::kSequential:
          scopes.Push();
          ResolveStmts(body, scopes, stmt.body);
          scopes.Pop();
          break;
        case NodeKind::kReturn:
        case NodeKind::kAssert:
        case NodeKind::kLock:
        case NodeKind::kFork:
          if (stmt.expr) ResolveExpr(body, scopes, *stmt.expr);
          break;
        default:
          break;
      }
    }
  }

  void ResolveExpr(const Body& body, const Scopes& scopes, const Expr& expr) {
    Hit(kCounterResolveBase + static_cast<uint32_t>(expr.kind));
    if (expr.kind == NodeKind::kIdent) {
      if (LookupVariable(body, scopes, expr.text) == nullptr &&
          enum_constants_.count(expr.text) == 0) {
        Error(DiagCode::kUndefinedName, expr.pos,
              absl::StrCat("undefined name '", expr.text, "'"));
      }
    }
    for (const Expr& operand : expr.operands) {
      ResolveExpr(body, scopes, operand);
    }
  }

  static const TypeRef* LookupVariable(const Body& body, const Scopes& scopes,
                                       const std::string& name) {
    if (const TypeRef* local = scopes.Lookup(name)) return local;
    if (body.owner != nullptr) {
      auto it = body.owner->fields.find(name);
      if (it != body.owner->fields.end()) return &it->second->type;
    }
    return nullptr;
  }

  // ---------------------------------------------------------------------
  // typecheck

  Type ToType(const TypeRef& ref) const {
    switch (ref.kind) {
      case NodeKind::kTypeInt:
        return {Type::Kind::kInt, ""};
      case NodeKind::kTypeBool:
        return {Type::Kind::kBool, ""};
      case NodeKind::kTypeVoid:
        return {Type::Kind::kVoid, ""};
      default:
        return {classes_.count(ref.name) > 0 ? Type::Kind::kClass
                                             : Type::Kind::kEnum,
                ref.name};
    }
  }

  void Typecheck() {
    TOY_FRAME("toy.check.TypeChecker", "run", "TypeChecker.scala");
    for (const auto& [name, info] : classes_) {
      for (const auto& [field_name, field] : info.fields) {
        Hit(kCounterTypecheckBase + static_cast<uint32_t>(NodeKind::kField));
        if (ToType(field->type).kind == Type::Kind::kVoid) {
          Error(DiagCode::kVoidVariable, field->pos,
                absl::StrCat("field '", field_name, "' has type void"));
        }
      }
    }
    for (const Body& body : bodies_) TypecheckBody(body);
  }

  // What the expression checker allows at the current position.
  struct ExprContext {
    const Body* body = nullptr;
    const Scopes* scopes = nullptr;
    bool in_postcondition = false;
  };

  void TypecheckBody(const Body& body) {
    TOY_FRAME("toy.check.TypeChecker", "checkBody", "TypeChecker.scala");
    Scopes scopes;
    scopes.Push();
    if (body.method != nullptr) {
      Hit(kCounterTypecheckBase + static_cast<uint32_t>(NodeKind::kMethod));
      for (const Param& param : body.method->params) {
        Hit(kCounterTypecheckBase + static_cast<uint32_t>(NodeKind::kParam));
        if (ToType(param.type).kind == Type::Kind::kVoid) {
          Error(DiagCode::kVoidVariable, param.pos,
                absl::StrCat("parameter '", param.name, "' has type void"));
        }
        scopes.Declare(param.name, &param.type);
      }
      for (const Contract& contract : body.method->contracts) {
        Hit(kCounterTypecheckBase + static_cast<uint32_t>(contract.kind));
        ExprContext ctx{&body, &scopes, contract.kind == NodeKind::kEnsures};
        RequireBool(ctx, contract.expr, "contract");
      }
    } else {
      Hit(kCounterTypecheckBase + static_cast<uint32_t>(NodeKind::kRunBlock));
    }
    scopes.Push();
    TypecheckStmts(body, scopes, *body.stmts);
  }

  void TypecheckStmts(const Body& body, Scopes& scopes,
                      const std::vector<Stmt>& stmts) {
    ExprContext ctx{&body, &scopes, false};
    for (const Stmt& stmt : stmts) {
      Hit(kCounterTypecheckBase + static_cast<uint32_t>(stmt.kind));
      switch (stmt.kind) {
        case NodeKind::kLocalDecl: {
          Type declared = ToType(stmt.type);
          if (declared.kind == Type::Kind::kVoid) {
            Error(DiagCode::kVoidVariable, stmt.pos,
                  absl::StrCat("variable '", stmt.name, "' has type void"));
          }
          if (stmt.expr) RequireAssignable(ctx, declared, *stmt.expr);
          scopes.Declare(stmt.name, &stmt.type);
          break;
        }
        case NodeKind::kAssign: {
          const TypeRef* target = LookupVariable(body, scopes, stmt.name);
          RequireAssignable(ctx, ToType(*target), *stmt.expr);
          break;
        }
        case NodeKind::kWhile:
          for (const Expr& inv : stmt.invariants) {
            Hit(kCounterTypecheckBase +
                static_cast<uint32_t>(NodeKind::kLoopInvariant));
            RequireBool(ctx, inv, "loop invariant");
          }
          [[fallthrough]];
        case NodeKind::kIf:
          RequireBool(ctx, *stmt.expr, "condition");
          scopes.Push();
          TypecheckStmts(body, scopes, stmt.body);
          scopes.Pop();
          if (stmt.has_else) {
            scopes.Push();
            TypecheckStmts(body, scopes, stmt.else_body);
            scopes.Pop();
          }
          break;
        case NodeKind::kBlock:
        case NodeKind::kSequential:
          scopes.Push();
          TypecheckStmts(body, scopes, stmt.body);
          scopes.Pop();
          break;
        case NodeKind::kReturn:
          TypecheckReturn(ctx, stmt);
          break;
        case NodeKind::kAssert:
          RequireBool(ctx, *stmt.expr, "assertion");
          break;
        case NodeKind::kLock:
          LockTarget(ctx, stmt);
          break;
        case NodeKind::kFork:
          ForkTarget(ctx, stmt);
          break;
        default:
          break;
      }
    }
  }

  void TypecheckReturn(const ExprContext& ctx, const Stmt& stmt) {
    if (ctx.body->method == nullptr) {
      if (stmt.expr) {
        Error(DiagCode::kReturnInRunBlock, stmt.pos,
              "run block cannot return a value");
      }
      return;
    }
    Type result = ToType(ctx.body->method->return_type);
    if (result.kind == Type::Kind::kVoid) {
      if (stmt.expr) {
        Error(DiagCode::kReturnValueInVoid, stmt.pos,
              "void method cannot return a value");
      }
      return;
    }
    if (!stmt.expr) {
      Error(DiagCode::kMissingReturnValue, stmt.pos, "missing return value");
    }
    RequireAssignable(ctx, result, *stmt.expr);
  }

  void LockTarget(const ExprContext& ctx, const Stmt& stmt) {
    TOY_FRAME("toy.check.LockChecker", "target", "LockChecker.scala");
    if (stmt.expr->kind == NodeKind::kNullLit && Enabled(Bug::kLockNull)) {
      Raise(Bug::kLockNull, "toy.check.UnreachableAfterTypeCheck",
            "lock target of type null has no monitor", __LINE__);
    }
    Type target = TypeOf(ctx, *stmt.expr);
    if (target.kind != Type::Kind::kClass) {
      Error(DiagCode::kLockTarget, stmt.expr->pos,
            absl::StrCat("lock target must be an object, found ",
                         Describe(target)));
    }
  }

  void ForkTarget(const ExprContext& ctx, const Stmt& stmt) {
    TOY_FRAME("toy.check.ForkChecker", "target", "ForkChecker.scala");
    if (stmt.expr->kind == NodeKind::kNullLit && Enabled(Bug::kForkNull)) {
      Raise(Bug::kForkNull, "java.lang.ClassCastException",
            "class toy.ast.NullLiteral cannot be cast to class "
            "toy.ast.ClassType",
            __LINE__);
    }
    Type target = TypeOf(ctx, *stmt.expr);
    if (target.kind != Type::Kind::kClass) {
      Error(DiagCode::kForkTarget, stmt.expr->pos,
            absl::StrCat("fork target must be an object, found ",
                         Describe(target)));
    }
    if (!classes_.at(target.name).decl->HasRunBlock()) {
      Error(DiagCode::kForkWithoutRun, stmt.expr->pos,
            absl::StrCat("class '", target.name, "' has no run block"));
    }
  }

  void RequireBool(const ExprContext& ctx, const Expr& expr,
                   std::string_view what) {
    Type type = TypeOf(ctx, expr);
    if (type.kind != Type::Kind::kBool) {
      Error(DiagCode::kNotBoolean, expr.pos,
            absl::StrCat(std::string(what), " must be bool, found ",
                         Describe(type)));
    }
  }

  void RequireAssignable(const ExprContext& ctx, const Type& target,
                         const Expr& expr) {
    Type value = TypeOf(ctx, expr);
    if (!Assignable(target, value)) {
      Error(DiagCode::kTypeMismatch, expr.pos,
            absl::StrCat("type mismatch: expected ", Describe(target),
                         ", found ", Describe(value)));
    }
  }

  Type TypeOf(const ExprContext& ctx, const Expr& expr) {
    Hit(kCounterTypecheckBase + static_cast<uint32_t>(expr.kind));
    auto operand = [&](size_t i, Type::Kind want) {
      Type type = TypeOf(ctx, expr.operands[i]);
      if (type.kind != want) {
        Error(DiagCode::kOperandType, expr.operands[i].pos,
              absl::StrCat("operand of '", std::string(NodeKindName(expr.kind)),
                           "' must be ", Describe({want, ""}), ", found ",
                           Describe(type)));
      }
    };
    switch (expr.kind) {
      case NodeKind::kIntLit:
        return {Type::Kind::kInt, ""};
      case NodeKind::kBoolLit:
        return {Type::Kind::kBool, ""};
      case NodeKind::kNullLit:
        return {Type::Kind::kNull, ""};
      case NodeKind::kIdent: {
        if (const TypeRef* var =
                LookupVariable(*ctx.body, *ctx.scopes, expr.text)) {
          return ToType(*var);
        }
        return {Type::Kind::kEnum, enum_constants_.at(expr.text)->name};
      }
      case NodeKind::kResult: {
        if (!ctx.in_postcondition) {
          Error(DiagCode::kResultPlacement, expr.pos,
                "\\result is only allowed in postconditions");
        }
        Type result = ToType(ctx.body->method->return_type);
        if (result.kind == Type::Kind::kVoid) {
          Error(DiagCode::kResultInVoid, expr.pos,
                "\\result used in a void method");
        }
        return result;
      }
      case NodeKind::kOld:
        return TypeOf(ctx, expr.operands[0]);
      case NodeKind::kNot:
        operand(0, Type::Kind::kBool);
        return {Type::Kind::kBool, ""};
      case NodeKind::kNeg:
        operand(0, Type::Kind::kInt);
        return {Type::Kind::kInt, ""};
      case NodeKind::kAdd:
      case NodeKind::kSub:
      case NodeKind::kMul:
        operand(0, Type::Kind::kInt);
        operand(1, Type::Kind::kInt);
        return {Type::Kind::kInt, ""};
      case NodeKind::kLt:
      case NodeKind::kLe:
        operand(0, Type::Kind::kInt);
        operand(1, Type::Kind::kInt);
        return {Type::Kind::kBool, ""};
      case NodeKind::kAnd:
      case NodeKind::kOr:
        operand(0, Type::Kind::kBool);
        operand(1, Type::Kind::kBool);
        return {Type::Kind::kBool, ""};
      case NodeKind::kEq:
      case NodeKind::kNe: {
        Type lhs = TypeOf(ctx, expr.operands[0]);
        Type rhs = TypeOf(ctx, expr.operands[1]);
        if (!Assignable(lhs, rhs) && !Assignable(rhs, lhs)) {
          Error(DiagCode::kOperandType, expr.pos,
                absl::StrCat("cannot compare ", Describe(lhs), " with ",
                             Describe(rhs)));
        }
        return {Type::Kind::kBool, ""};
      }
      default:
        return {Type::Kind::kVoid, ""};
    }
  }

  // ---------------------------------------------------------------------
  // encode

  void Encode() {
    TOY_FRAME("toy.encode.Encoder", "run", "Encoder.scala");
    for (const Body& body : bodies_) EncodeBody(body);
  }

  void EncodeBody(const Body& body) {
    TOY_FRAME("toy.encode.Encoder", "encodeBody", "Encoder.scala");
    if (body.method != nullptr) {
      Hit(kCounterEncodeBase + static_cast<uint32_t>(NodeKind::kMethod));
      for (const Contract& contract : body.method->contracts) {
        Hit(kCounterEncodeBase + static_cast<uint32_t>(contract.kind));
        if (contract.kind == NodeKind::kEnsures) {
          EncodeExpr(contract.expr);
        } else {
          EncodePrecondition(contract);
        }
      }
    } else {
      Hit(kCounterEncodeBase + static_cast<uint32_t>(NodeKind::kRunBlock));
    }
    EncodeStmts(*body.stmts);
  }

  void EncodePrecondition(const Contract& contract) {
    TOY_FRAME("toy.encode.ContractEncoder", "precondition",
              "ContractEncoder.scala");
    if (ContainsKind(contract.expr, NodeKind::kOld)) {
      if (Enabled(Bug::kOldInPrecondition)) {
        Raise(Bug::kOldInPrecondition, "toy.encode.BackendRejection",
              "old expression cannot be encoded in a precondition", __LINE__);
      }
      Error(DiagCode::kOldInPrecondition, contract.pos,
            "\\old is not allowed in preconditions");
    }
    EncodeExpr(contract.expr);
  }

  void EncodeStmts(const std::vector<Stmt>& stmts) {
    for (const Stmt& stmt : stmts) {
      Hit(kCounterEncodeBase + static_cast<uint32_t>(stmt.kind));
      for (const Expr& inv : stmt.invariants) {
        Hit(kCounterEncodeBase +
            static_cast<uint32_t>(NodeKind::kLoopInvariant));
        EncodeExpr(inv);
      }
      if (stmt.expr) {
        if (ContainsKind(*stmt.expr, NodeKind::kOld)) {
          Error(DiagCode::kOldPlacement, stmt.expr->pos,
                "\\old is only allowed in postconditions and loop "
                "invariants");
        }
        EncodeExpr(*stmt.expr);
      }
      if (stmt.kind == NodeKind::kSequential) EncodeSequential(stmt);
      EncodeStmts(stmt.body);
      EncodeStmts(stmt.else_body);
    }
  }

  // Sequential blocks are encoded as a head statement chained to the rest.
  void EncodeSequential(const Stmt& stmt) {
    TOY_FRAME("toy.encode.SequentialEncoder", "encode",
              "SequentialEncoder.scala");
    if (stmt.body.empty() && Enabled(Bug::kEmptySequential)) {
      Raise(Bug::kEmptySequential, "java.lang.UnsupportedOperationException",
            "tail of empty list", __LINE__,
            {{"scala.collection.immutable.Nil$", "tail", "List.scala", 663}});
    }
  }

  void EncodeExpr(const Expr& expr) {
    Hit(kCounterEncodeBase + static_cast<uint32_t>(expr.kind));
    for (const Expr& operand : expr.operands) EncodeExpr(operand);
  }

  const BugToggles& bugs_;
  CheckResult& result_;
  const Program* program_ = nullptr;
  std::map<std::string, ClassInfo> classes_;
  std::map<std::string, const Enum*> enums_;
  std::map<std::string, const Enum*> enum_constants_;
  std::map<std::string, const Method*> global_methods_;
  std::vector<Body> bodies_;
};

}  // namespace

std::string BugName(Bug bug) {
  return absl::StrCat("B", static_cast<int>(bug) + 1);
}

absl::StatusOr<BugToggles> ParseBugList(std::string_view list) {
  BugToggles bugs;
  for (absl::string_view part :
       absl::StrSplit(absl::string_view(list.data(), list.size()), ',')) {
    absl::string_view name = absl::StripAsciiWhitespace(part);
    if (name.empty() || name == "none") continue;
    if (name == "all") {
      bugs.set();
      continue;
    }
    bool found = false;
    for (int i = 0; i < kBugCount; ++i) {
      if (name == BugName(static_cast<Bug>(i))) {
        bugs.set(i);
        found = true;
      }
    }
    if (!found) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown bug '", name, "'"));
    }
  }
  return bugs;
}

std::string_view CanonicalTrigger(Bug bug) {
  return kCanonicalTriggers[static_cast<size_t>(bug)];
}

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kLex:
      return "lex";
    case Phase::kParse:
      return "parse";
    case Phase::kResolve:
      return "resolve";
    case Phase::kTypecheck:
      return "typecheck";
    case Phase::kEncode:
      return "encode";
  }
  return "unknown";
}

uint32_t PhaseCounter(Phase phase) { return static_cast<uint32_t>(phase) + 1; }

std::string CrashInfo::Render() const {
  std::string out = absl::StrCat("Exception in thread \"main\" ", exception);
  if (!message.empty()) absl::StrAppend(&out, ": ", message);
  out += '\n';
  for (const TraceFrame& frame : frames) {
    absl::StrAppend(&out, "\tat ", frame.class_name, ".", frame.method_name,
                    "(", frame.file_name, ":", frame.line, ")\n");
  }
  return out;
}

int CheckResult::ExitCode() const {
  switch (outcome) {
    case Outcome::kVerified:
      return 0;
    case Outcome::kDiagnostic:
      return 1;
    case Outcome::kCrash:
      return 70;
  }
  return 70;
}

std::string CheckResult::StdoutText() const {
  return outcome == Outcome::kVerified ? "verified (backend skipped)\n" : "";
}

std::string CheckResult::StderrText() const {
  switch (outcome) {
    case Outcome::kVerified:
      return "";
    case Outcome::kDiagnostic:
      return diagnostic + "\n";
    case Outcome::kCrash:
      return crash->Render();
  }
  return "";
}

CheckResult Check(std::string_view text, const BugToggles& bugs) {
  CheckResult result;
  try {
    Checker(bugs, result).Run(text);
    result.outcome = CheckResult::Outcome::kVerified;
  } catch (const Diagnostic& d) {
    result.outcome = CheckResult::Outcome::kDiagnostic;
    result.diagnostic =
        absl::StrCat("error: ", std::string(PhaseName(d.phase)), ": ", d.text);
  } catch (const CrashSignal& s) {
    result.outcome = CheckResult::Outcome::kCrash;
    result.crash = s.info;
  }
  return result;
}

Phase PhaseReached(std::string_view text) {
  return Check(text, BugToggles()).phase;
}

std::vector<CounterInfo> CounterTable() {
  std::vector<CounterInfo> table;
  for (int p = 0; p <= static_cast<int>(Phase::kEncode); ++p) {
    auto phase = static_cast<Phase>(p);
    table.push_back({PhaseCounter(phase),
                     absl::StrCat("phase.", std::string(PhaseName(phase)))});
  }
  table.push_back({kCounterSuccess, "phase.success"});
  const std::pair<uint32_t, const char*> bases[] = {
      {kCounterBuildBase, "build"},
      {kCounterResolveBase, "resolve"},
      {kCounterTypecheckBase, "typecheck"},
      {kCounterEncodeBase, "encode"},
  };
  for (const auto& [base, prefix] : bases) {
    for (uint32_t k = 0; k < static_cast<uint32_t>(NodeKind::kCount); ++k) {
      table.push_back(
          {base + k,
           absl::StrCat(prefix, ".",
                        std::string(NodeKindName(static_cast<NodeKind>(k))))});
    }
  }
  for (uint32_t c = 1; c < static_cast<uint32_t>(DiagCode::kEnd); ++c) {
    table.push_back(
        {kCounterDiagnosticBase + c,
         absl::StrCat("diagnostic.", std::string(kDiagNames[c - 1]))});
  }
  for (int b = 0; b < kBugCount; ++b) {
    table.push_back({kCounterBugBase + b + 1,
                     absl::StrCat("bug.", BugName(static_cast<Bug>(b)))});
  }
  return table;
}

const grammar::Grammar& MiniPvlGrammar() {
  static const grammar::Grammar* grammar = [] {
    absl::StatusOr<grammar::Grammar> parsed =
        grammar::ParseGrammar(MiniPvlGrammarText());
    // The embedded grammar is validated by the build's tests.
    if (!parsed.ok()) std::abort();
    return new grammar::Grammar(*std::move(parsed));
  }();
  return *grammar;
}

const grammar::Parser& MiniPvlParser() {
  static const grammar::Parser* parser = new grammar::Parser(MiniPvlGrammar());
  return *parser;
}

}  // namespace verifuzz::toy
