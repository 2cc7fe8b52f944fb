#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oblivio/value.hpp"

namespace oblivio {

struct SourcePos {
    int line = 0;
    int column = 0;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
    enum class Kind : uint8_t { IntLit, StrLit, Var, Binary };

    Kind kind;
    int64_t int_value = 0;  // IntLit
    std::string name;       // StrLit payload / Var name
    BinOp op = BinOp::Add;  // Binary
    ExprPtr lhs, rhs;       // Binary
    SourcePos pos;

    static ExprPtr int_lit(int64_t v, SourcePos p = {});
    static ExprPtr str_lit(std::string s, SourcePos p = {});
    static ExprPtr var(std::string name, SourcePos p = {});
    static ExprPtr binary(BinOp op, ExprPtr l, ExprPtr r, SourcePos p = {});
};

bool expr_equal(const Expr& a, const Expr& b);

struct Command;
using CommandPtr = std::shared_ptr<const Command>;

/// Surface commands plus the runtime-only forms Stop and Pop, which the
/// parser never produces.
struct Command {
    enum class Kind : uint8_t {
        Skip,
        Seq,
        Assign,      // x = e
        OblivAssign, // x ?= e
        LocalInput,  // x ?= input(ch, e)
        Send,        // send(NODE/CH, e)
        Output,      // output(ch, e)
        If,
        While,
        OblivIf,
        Stop,
        Pop,
    };

    Kind kind;
    std::string var;     // Assign/OblivAssign/LocalInput target
    std::string channel; // LocalInput/Output local channel; Send "NODE/CH"
    ExprPtr expr;        // rhs, payload, or guard
    CommandPtr c1, c2;   // Seq parts, branches, or While body (c1)
    SourcePos pos;

    static CommandPtr skip(SourcePos p = {});
    static CommandPtr seq(CommandPtr a, CommandPtr b, SourcePos p = {});
    static CommandPtr assign(std::string x, ExprPtr e, SourcePos p = {});
    static CommandPtr obliv_assign(std::string x, ExprPtr e, SourcePos p = {});
    static CommandPtr local_input(std::string x, std::string ch, ExprPtr e, SourcePos p = {});
    static CommandPtr send(std::string ch, ExprPtr e, SourcePos p = {});
    static CommandPtr output(std::string ch, ExprPtr e, SourcePos p = {});
    static CommandPtr if_(ExprPtr g, CommandPtr t, CommandPtr f, SourcePos p = {});
    static CommandPtr while_(ExprPtr g, CommandPtr body, SourcePos p = {});
    static CommandPtr obliv_if(ExprPtr g, CommandPtr t, CommandPtr f, SourcePos p = {});
    static CommandPtr stop();
    static CommandPtr pop();
};

bool command_equal(const Command& a, const Command& b);

struct VarDecl {
    std::string name;
    Sort sort;
    std::string level;
    std::optional<SizedValue> init; // literal initializer
    SourcePos pos;
};

struct LocalChannelDecl {
    std::string name;
    Sort sort;
    std::string level;
    SourcePos pos;
};

struct Handler {
    std::string name;
    std::string mode_level;
    uint64_t potential = 0;
    std::string param_name;
    Sort param_sort;
    std::string param_level;
    CommandPtr body;
    SourcePos pos;
};

struct Program {
    std::string node_id;
    std::vector<std::pair<std::string, std::string>> lattice_pairs; // empty = default {L < H}
    std::vector<LocalChannelDecl> locals;
    std::vector<VarDecl> globals;
    std::vector<Handler> handlers;

    const Handler* find_handler(const std::string& name) const;
    const VarDecl* find_global(const std::string& name) const;
    const LocalChannelDecl* find_local(const std::string& name) const;
};

bool program_equal(const Program& a, const Program& b);

/// Default value a declared variable starts with when no initializer is
/// given: <0|8> for ints, <""|0> for strings.
SizedValue default_value(Sort sort);

std::string pretty_print(const Expr& e);
std::string pretty_print(const Command& c, int indent = 0);
std::string pretty_print(const Program& p);

} // namespace oblivio
