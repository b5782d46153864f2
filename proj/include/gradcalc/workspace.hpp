#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gradcalc/along.hpp"
#include "gradcalc/connection.hpp"
#include "gradcalc/inner.hpp"
#include "gradcalc/module.hpp"
#include "gradcalc/nole.hpp"
#include "gradcalc/operator.hpp"

namespace gradcalc {

// Parse-time diagnostic with a 1-based source position. Column positions on
// continued logical lines refer to the physical character that triggered the
// complaint.
class dsl_error : public std::runtime_error {
public:
    dsl_error(int line, int col, const std::string& msg)
        : std::runtime_error(msg), line_(line), col_(col) {}

    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

enum class EntryKind {
    algebra,
    module,
    map,
    hom,
    bilinear,
    op,
    connection,
    inner,
    ole,
    truncated,
    along
};

using WorkspaceValue =
    std::variant<BaseAlgebra, FreeGradedModule, AlgebraMap, ModuleHom, BilinearMap, OperatorExpr,
                 Connection, InnerStructureSpec, std::shared_ptr<const NoleAlgebra>,
                 TruncatedModule, AlongModule>;

// One named declaration. refs lists the previously declared names the entry
// was built from, in written order; action_keys is only populated by the
// explicit truncated-module form and pairs up with the trailing refs.
struct Entry {
    EntryKind kind = EntryKind::algebra;
    std::string name;
    std::vector<std::string> refs;
    std::vector<std::pair<int, int>> action_keys;
    WorkspaceValue value;
};

// A non-declaration line: raw whitespace-separated tokens, validated only
// when the command is executed.
struct Command {
    std::vector<std::string> tokens;
    int line = 0;
};

// Insertion-ordered symbol table plus the command list of one workspace
// file. Declarations are fully validated at construction, so every stored
// value is a usable library object.
class Workspace {
public:
    const std::vector<Entry>& entries() const { return entries_; }
    const std::vector<Command>& commands() const { return commands_; }
    SignConvention signs() const { return signs_; }

    bool has(const std::string& name) const { return index_.count(name) != 0; }
    // nullptr when the name is not declared.
    const Entry* find(const std::string& name) const;

    // Interleaved original order of declarations and commands, as
    // (is_command, index into the respective vector) pairs.
    const std::vector<std::pair<bool, size_t>>& order() const { return order_; }

private:
    std::vector<Entry> entries_;
    std::map<std::string, size_t> index_;
    std::vector<Command> commands_;
    std::vector<std::pair<bool, size_t>> order_;
    SignConvention signs_ = SignConvention::trivial;

    friend Workspace parse_workspace(const std::string& text, SignConvention signs);
};

// Parses a workspace file. Deterministic; every malformed input is rejected
// with a dsl_error carrying a line and column. `signs` is the global
// commutativity convention applied to the ole algebras built by the file.
Workspace parse_workspace(const std::string& text, SignConvention signs = SignConvention::trivial);

// Canonical text of a workspace: parse followed by print is idempotent, and
// printing a parsed canonical file reproduces it byte for byte.
std::string print_workspace(const Workspace& ws);

} // namespace gradcalc
