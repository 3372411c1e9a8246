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

#include "verifuzz/typedgen.h"

#include <algorithm>
#include <array>
#include <utility>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "verifuzz/rng.h"

namespace verifuzz::typedgen {
namespace {

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "enums", "contracts", "loops",      "labels",
    "locks", "forks",     "par_blocks", "old_expr",
};

// Expressions deeper than this are cut off with a literal or variable.
constexpr int kMaxExprDepth = 5;
constexpr int kMaxParams = 2;
constexpr int kMaxContracts = 2;
constexpr int kMaxInvariants = 2;
constexpr int kMaxEnums = 2;
constexpr int kMaxEnumMembers = 3;
constexpr int kMaxStmtsPerBlock = 3;

struct Ty {
  enum class Kind { kInt, kBool, kVoid, kClass, kEnum };
  Kind kind = Kind::kInt;
  int index = 0;  // Class or enum number.

  bool operator==(const Ty&) const = default;
};

struct Var {
  std::string name;
  Ty type;
};

struct MethodPlan {
  std::string name;
  Ty result;
  std::vector<Var> params;
};

struct ClassPlan {
  std::string name;
  std::vector<Var> fields;
  std::vector<MethodPlan> methods;
  bool has_run = false;
};

struct EnumPlan {
  std::string name;
  std::vector<std::string> members;
};

// Where an expression appears; controls `\result` and `\old`.
struct ExprSite {
  bool allow_result = false;
  bool allow_old = false;
};

class Generator {
 public:
  explicit Generator(const TypedGenConfig& config)
      : config_(config), rng_(config.seed) {}

  std::string Run() {
    Plan();
    for (const EnumPlan& e : enums_) {
      absl::StrAppend(&out_, "enum ", e.name, " { ",
                      absl::StrJoin(e.members, ", "), " }\n\n");
    }
    for (size_t i = 0; i < classes_.size(); ++i) {
      if (i > 0) out_ += "\n";
      EmitClass(classes_[i]);
    }
    return std::move(out_);
  }

 private:
  bool Has(Feature f) const { return config_.Has(f); }

  // ---------------------------------------------------------------------
  // declarations

  void Plan() {
    if (Has(Feature::kEnums)) {
      int count = static_cast<int>(rng_.Range(0, kMaxEnums));
      for (int i = 0; i < count; ++i) {
        EnumPlan e;
        e.name = absl::StrCat("E", i);
        int members = static_cast<int>(rng_.Range(1, kMaxEnumMembers));
        for (int m = 0; m < members; ++m) {
          e.members.push_back(absl::StrCat(e.name, "V", m));
        }
        enums_.push_back(std::move(e));
      }
    }
    int class_count = static_cast<int>(rng_.Range(1, config_.max_classes));
    classes_.resize(class_count);
    for (int i = 0; i < class_count; ++i) {
      classes_[i].name = absl::StrCat("C", i);
      classes_[i].has_run = Has(Feature::kForks) && (i == 0 || rng_.Coin());
    }
    // Signatures are fixed before any body so bodies may refer forward.
    for (ClassPlan& cls : classes_) {
      int fields =
          static_cast<int>(rng_.Range(0, config_.max_methods_per_class - 1));
      for (int f = 0; f < fields; ++f) {
        cls.fields.push_back({absl::StrCat("f", f), RandomValueType()});
      }
      int methods =
          static_cast<int>(rng_.Range(1, config_.max_methods_per_class));
      for (int m = 0; m < methods; ++m) {
        MethodPlan method;
        method.name = absl::StrCat("m", m);
        if (m == 0) {
          method.result = {Ty::Kind::kVoid, 0};
        } else {
          method.result =
              rng_.Chance(1, 4) ? Ty{Ty::Kind::kVoid, 0} : RandomValueType();
          int params = static_cast<int>(rng_.Range(0, kMaxParams));
          for (int p = 0; p < params; ++p) {
            method.params.push_back({absl::StrCat("p", p), RandomValueType()});
          }
        }
        cls.methods.push_back(std::move(method));
      }
    }
  }

  // Types a variable may have. Class-typed variables only appear when a
  // feature needs object references.
  Ty RandomValueType() {
    std::vector<std::pair<Ty, uint32_t>> options = {
        {{Ty::Kind::kInt, 0}, 5},
        {{Ty::Kind::kBool, 0}, 4},
    };
    if (Has(Feature::kLocks) || Has(Feature::kForks)) {
      for (size_t i = 0; i < classes_.size(); ++i) {
        options.push_back({{Ty::Kind::kClass, static_cast<int>(i)}, 1});
      }
    }
    for (size_t i = 0; i < enums_.size(); ++i) {
      options.push_back({{Ty::Kind::kEnum, static_cast<int>(i)}, 1});
    }
    return PickWeighted(options);
  }

  template <typename T>
  T PickWeighted(const std::vector<std::pair<T, uint32_t>>& options) {
    std::vector<uint32_t> weights;
    weights.reserve(options.size());
    for (const auto& option : options) weights.push_back(option.second);
    return options[rng_.Weighted(weights)].first;
  }

  std::string TypeName(const Ty& ty) const {
    switch (ty.kind) {
      case Ty::Kind::kInt:
        return "int";
      case Ty::Kind::kBool:
        return "bool";
      case Ty::Kind::kVoid:
        return "void";
      case Ty::Kind::kClass:
        return classes_[ty.index].name;
      case Ty::Kind::kEnum:
        return enums_[ty.index].name;
    }
    return "int";
  }

  void Indent(int level) { out_.append(2 * level, ' '); }

  void EmitClass(const ClassPlan& cls) {
    cls_ = &cls;
    absl::StrAppend(&out_, "class ", cls.name, " {\n");
    for (const Var& field : cls.fields) {
      Indent(1);
      absl::StrAppend(&out_, TypeName(field.type), " ", field.name, ";\n");
    }
    for (const MethodPlan& method : cls.methods) EmitMethod(method);
    if (cls.has_run) {
      method_ = nullptr;
      scopes_.assign(1, {});
      Indent(1);
      out_ += "run {\n";
      EmitStmts(1, /*in_run=*/true);
      Indent(1);
      out_ += "}\n";
    }
    out_ += "}\n";
  }

  void EmitMethod(const MethodPlan& method) {
    method_ = &method;
    scopes_.assign(1, method.params);
    if (Has(Feature::kContracts)) {
      int contracts = static_cast<int>(rng_.Range(0, kMaxContracts));
      for (int i = 0; i < contracts; ++i) EmitContract(method);
    }
    Indent(1);
    std::vector<std::string> params;
    for (const Var& p : method.params) {
      params.push_back(absl::StrCat(TypeName(p.type), " ", p.name));
    }
    absl::StrAppend(&out_, TypeName(method.result), " ", method.name, "(",
                    absl::StrJoin(params, ", "), ") {\n");
    scopes_.emplace_back();
    EmitStmts(1, /*in_run=*/false);
    if (method.result.kind != Ty::Kind::kVoid) {
      Indent(2);
      absl::StrAppend(&out_, "return ", Expr(method.result, 0, {}), ";\n");
    }
    Indent(1);
    out_ += "}\n";
  }

  void EmitContract(const MethodPlan& method) {
    enum class Kind { kRequires, kEnsures, kContext };
    Kind kind = PickWeighted<Kind>(
        {{Kind::kRequires, 2}, {Kind::kEnsures, 2}, {Kind::kContext, 1}});
    ExprSite site;
    const char* keyword = "requires";
    if (kind == Kind::kEnsures) {
      keyword = "ensures";
      site.allow_result = method.result.kind != Ty::Kind::kVoid;
      site.allow_old = Has(Feature::kOldExpr);
    } else {
      if (kind == Kind::kContext) keyword = "context_everywhere";
      site.allow_old = Has(Feature::kOldExpr) && config_.illegal_old_placement;
    }
    Indent(1);
    absl::StrAppend(&out_, keyword, " ", Expr({Ty::Kind::kBool, 0}, 0, site),
                    ";\n");
  }

  // ---------------------------------------------------------------------
  // statements

  enum class StmtKind {
    kLocal,
    kAssign,
    kAssert,
    kIf,
    kWhile,
    kBlock,
    kLabel,
    kLock,
    kFork,
    kSequential,
  };

  // Emits 1..kMaxStmtsPerBlock statements at nesting `depth`; top-level
  // body statements are at depth 1.
  void EmitStmts(int depth, bool in_run) {
    int count = static_cast<int>(rng_.Range(1, kMaxStmtsPerBlock));
    for (int i = 0; i < count; ++i) EmitStmt(depth, in_run);
  }

  void EmitNested(int depth, bool in_run) {
    scopes_.emplace_back();
    EmitStmts(depth, in_run);
    scopes_.pop_back();
  }

  void EmitStmt(int depth, bool in_run) {
    const bool can_nest = depth < config_.max_stmt_depth;
    std::vector<std::pair<StmtKind, uint32_t>> options = {
        {StmtKind::kLocal, 4},
        {StmtKind::kAssert, 2},
    };
    if (!AllVars().empty()) options.push_back({StmtKind::kAssign, 2});
    if (Has(Feature::kLoops) && can_nest) {
      options.push_back({StmtKind::kIf, 1});
      options.push_back({StmtKind::kWhile, 1});
      options.push_back({StmtKind::kBlock, 1});
    }
    if (Has(Feature::kLabels) && !in_run) {
      options.push_back({StmtKind::kLabel, 1});
    }
    if (Has(Feature::kLocks)) options.push_back({StmtKind::kLock, 1});
    if (Has(Feature::kForks)) options.push_back({StmtKind::kFork, 1});
    if (Has(Feature::kParBlocks) && can_nest) {
      options.push_back({StmtKind::kSequential, 1});
    }
    ExprSite site;
    site.allow_old = Has(Feature::kOldExpr) && config_.illegal_old_placement &&
                     rng_.Chance(1, 8);
    const int indent = depth + 1;
    switch (PickWeighted(options)) {
      case StmtKind::kLocal: {
        Ty type = RandomValueType();
        std::string init = Expr(type, 0, site);
        Var var{absl::StrCat("v", next_local_++), type};
        Indent(indent);
        absl::StrAppend(&out_, TypeName(type), " ", var.name, " = ", init,
                        ";\n");
        scopes_.back().push_back(std::move(var));
        break;
      }
      case StmtKind::kAssign: {
        std::vector<Var> vars = AllVars();
        const Var& target = vars[rng_.Below(vars.size())];
        Indent(indent);
        absl::StrAppend(&out_, target.name, " = ", Expr(target.type, 0, site),
                        ";\n");
        break;
      }
      case StmtKind::kAssert:
        Indent(indent);
        absl::StrAppend(&out_, "assert ", Expr({Ty::Kind::kBool, 0}, 0, site),
                        ";\n");
        break;
      case StmtKind::kIf:
        Indent(indent);
        absl::StrAppend(&out_, "if (", Expr({Ty::Kind::kBool, 0}, 0, site),
                        ") {\n");
        EmitNested(depth + 1, in_run);
        Indent(indent);
        if (rng_.Coin()) {
          out_ += "} else {\n";
          EmitNested(depth + 1, in_run);
          Indent(indent);
        }
        out_ += "}\n";
        break;
      case StmtKind::kWhile:
        if (Has(Feature::kContracts)) {
          int invariants = static_cast<int>(rng_.Range(0, kMaxInvariants));
          ExprSite inv_site;
          inv_site.allow_old = Has(Feature::kOldExpr) && rng_.Chance(1, 4);
          for (int i = 0; i < invariants; ++i) {
            Indent(indent);
            absl::StrAppend(&out_, "loop_invariant ",
                            Expr({Ty::Kind::kBool, 0}, 0, inv_site), ";\n");
          }
        }
        Indent(indent);
        absl::StrAppend(&out_, "while (", Expr({Ty::Kind::kBool, 0}, 0, site),
                        ") {\n");
        EmitNested(depth + 1, in_run);
        Indent(indent);
        out_ += "}\n";
        break;
      case StmtKind::kBlock:
        Indent(indent);
        out_ += "{\n";
        EmitNested(depth + 1, in_run);
        Indent(indent);
        out_ += "}\n";
        break;
      case StmtKind::kLabel:
        Indent(indent);
        absl::StrAppend(&out_, "label L", next_label_++, ";\n");
        break;
      case StmtKind::kLock:
        Indent(indent);
        absl::StrAppend(&out_, "lock ", ObjectVar(indent, false), ";\n");
        break;
      case StmtKind::kFork:
        Indent(indent);
        absl::StrAppend(&out_, "fork ", ObjectVar(indent, true), ";\n");
        break;
      case StmtKind::kSequential:
        Indent(indent);
        out_ += "sequential {\n";
        EmitNested(depth + 1, in_run);
        Indent(indent);
        out_ += "}\n";
        break;
    }
  }

  // Name of an in-scope class-typed variable, declaring a fresh one first
  // when none fits. With `runnable`, the class must have a run block.
  std::string ObjectVar(int indent, bool runnable) {
    std::vector<Var> candidates;
    for (const Var& var : AllVars()) {
      if (var.type.kind == Ty::Kind::kClass &&
          (!runnable || classes_[var.type.index].has_run)) {
        candidates.push_back(var);
      }
    }
    if (!candidates.empty()) {
      return candidates[rng_.Below(candidates.size())].name;
    }
    std::vector<int> eligible;
    for (size_t i = 0; i < classes_.size(); ++i) {
      if (!runnable || classes_[i].has_run) {
        eligible.push_back(static_cast<int>(i));
      }
    }
    Ty type{Ty::Kind::kClass, eligible[rng_.Below(eligible.size())]};
    Var var{absl::StrCat("v", next_local_++), type};
    absl::StrAppend(&out_, TypeName(type), " ", var.name, " = null;\n");
    Indent(indent);
    scopes_.back().push_back(var);
    return var.name;
  }

  std::vector<Var> AllVars() const {
    std::vector<Var> vars;
    for (const auto& scope : scopes_) {
      vars.insert(vars.end(), scope.begin(), scope.end());
    }
    if (cls_ != nullptr) {
      vars.insert(vars.end(), cls_->fields.begin(), cls_->fields.end());
    }
    return vars;
  }

  // ---------------------------------------------------------------------
  // expressions

  enum class ExprKind {
    kLeaf,
    kAdd,
    kSub,
    kMul,
    kNeg,
    kNot,
    kAnd,
    kOr,
    kLt,
    kLe,
    kEq,
    kNe,
    kResult,
    kOld,
  };

  // Fully parenthesized expression of type `goal`.
  std::string Expr(const Ty& goal, int depth, const ExprSite& site) {
    if (depth >= kMaxExprDepth) return Leaf(goal);
    std::vector<std::pair<ExprKind, uint32_t>> options = {{ExprKind::kLeaf, 4}};
    if (goal.kind == Ty::Kind::kInt) {
      options.insert(options.end(), {{ExprKind::kAdd, 1},
                                     {ExprKind::kSub, 1},
                                     {ExprKind::kMul, 1},
                                     {ExprKind::kNeg, 1}});
    } else if (goal.kind == Ty::Kind::kBool) {
      options.insert(options.end(), {{ExprKind::kNot, 1},
                                     {ExprKind::kAnd, 1},
                                     {ExprKind::kOr, 1},
                                     {ExprKind::kLt, 1},
                                     {ExprKind::kLe, 1},
                                     {ExprKind::kEq, 1},
                                     {ExprKind::kNe, 1}});
    }
    if (site.allow_result && method_ != nullptr && method_->result == goal) {
      options.push_back({ExprKind::kResult, 2});
    }
    if (site.allow_old && HasVarOfType(goal)) {
      options.push_back({ExprKind::kOld, 2});
    }
    const Ty kInt{Ty::Kind::kInt, 0};
    const Ty kBool{Ty::Kind::kBool, 0};
    auto binary = [&](const Ty& operand, const char* op) {
      std::string lhs = Expr(operand, depth + 1, site);
      std::string rhs = Expr(operand, depth + 1, site);
      return absl::StrCat("(", lhs, " ", op, " ", rhs, ")");
    };
    switch (PickWeighted(options)) {
      case ExprKind::kLeaf:
        return Leaf(goal);
      case ExprKind::kAdd:
        return binary(kInt, "+");
      case ExprKind::kSub:
        return binary(kInt, "-");
      case ExprKind::kMul:
        return binary(kInt, "*");
      case ExprKind::kNeg:
        return absl::StrCat("(-", Expr(kInt, depth + 1, site), ")");
      case ExprKind::kNot:
        return absl::StrCat("(!", Expr(kBool, depth + 1, site), ")");
      case ExprKind::kAnd:
        return binary(kBool, "&&");
      case ExprKind::kOr:
        return binary(kBool, "||");
      case ExprKind::kLt:
        return binary(kInt, "<");
      case ExprKind::kLe:
        return binary(kInt, "<=");
      case ExprKind::kEq:
        return binary(ComparableType(), "==");
      case ExprKind::kNe:
        return binary(ComparableType(), "!=");
      case ExprKind::kResult:
        return "\\result";
      case ExprKind::kOld: {
        ExprSite inner = site;
        inner.allow_old = false;
        inner.allow_result = false;
        return absl::StrCat("\\old(", Expr(goal, depth + 1, inner), ")");
      }
    }
    return Leaf(goal);
  }

  Ty ComparableType() {
    std::vector<std::pair<Ty, uint32_t>> options = {{{Ty::Kind::kInt, 0}, 3},
                                                    {{Ty::Kind::kBool, 0}, 2}};
    for (size_t i = 0; i < enums_.size(); ++i) {
      options.push_back({{Ty::Kind::kEnum, static_cast<int>(i)}, 1});
    }
    if (Has(Feature::kLocks) || Has(Feature::kForks)) {
      for (size_t i = 0; i < classes_.size(); ++i) {
        options.push_back({{Ty::Kind::kClass, static_cast<int>(i)}, 1});
      }
    }
    return PickWeighted(options);
  }

  bool HasVarOfType(const Ty& type) const {
    for (const Var& var : AllVars()) {
      if (var.type == type) return true;
    }
    return false;
  }

  std::string Leaf(const Ty& goal) {
    std::vector<std::string> vars;
    for (const Var& var : AllVars()) {
      if (var.type == goal) vars.push_back(var.name);
    }
    if (!vars.empty() && rng_.Coin()) return vars[rng_.Below(vars.size())];
    switch (goal.kind) {
      case Ty::Kind::kInt:
        return absl::StrCat(rng_.Range(0, 99));
      case Ty::Kind::kBool:
        return rng_.Coin() ? "true" : "false";
      case Ty::Kind::kClass:
        return "null";
      case Ty::Kind::kEnum: {
        const EnumPlan& e = enums_[goal.index];
        return e.members[rng_.Below(e.members.size())];
      }
      case Ty::Kind::kVoid:
        break;
    }
    return "0";
  }

  const TypedGenConfig& config_;
  Rng rng_;
  std::string out_;
  std::vector<EnumPlan> enums_;
  std::vector<ClassPlan> classes_;
  const ClassPlan* cls_ = nullptr;
  const MethodPlan* method_ = nullptr;
  // scopes_[0] holds the parameters of the current method.
  std::vector<std::vector<Var>> scopes_;
  int next_local_ = 0;
  int next_label_ = 0;
};

}  // namespace

std::string_view FeatureName(Feature feature) {
  return kFeatureNames[static_cast<size_t>(feature)];
}

absl::StatusOr<FeatureSet> ParseFeatures(std::string_view list) {
  FeatureSet features;
  for (absl::string_view part :
       absl::StrSplit(absl::string_view(list.data(), list.size()), ',')) {
    absl::string_view name = absl::StripAsciiWhitespace(part);
    if (name.empty() || name == "none") continue;
    if (name == "all") {
      features.set();
      continue;
    }
    auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(),
                        std::string_view(name.data(), name.size()));
    if (it == kFeatureNames.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown feature '", name, "'"));
    }
    features.set(static_cast<size_t>(it - kFeatureNames.begin()));
  }
  return features;
}

std::string FeaturesToString(const FeatureSet& features) {
  std::vector<std::string> names;
  for (int i = 0; i < kFeatureCount; ++i) {
    if (features.test(i)) names.emplace_back(kFeatureNames[i]);
  }
  return absl::StrJoin(names, ",");
}

absl::Status ValidateConfig(const TypedGenConfig& config) {
  if (config.max_classes < 1 || config.max_methods_per_class < 1 ||
      config.max_stmt_depth < 1) {
    return absl::InvalidArgumentError(
        "max_classes, max_methods_per_class and max_stmt_depth must be "
        "at least 1");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::string> GenerateTyped(const TypedGenConfig& config) {
  if (absl::Status status = ValidateConfig(config); !status.ok()) {
    return status;
  }
  return Generator(config).Run();
}

TypedGenConfig ShrinkConfig(const TypedGenConfig& config) {
  TypedGenConfig shrunk = config;
  shrunk.max_classes = std::max(1, config.max_classes / 2);
  shrunk.max_methods_per_class = std::max(1, config.max_methods_per_class / 2);
  shrunk.max_stmt_depth = std::max(1, config.max_stmt_depth / 2);
  return shrunk;
}

}  // namespace verifuzz::typedgen
