#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oblivio/ast.hpp"
#include "oblivio/lattice.hpp"

namespace oblivio {

struct VarType {
    Sort sort;
    std::string level;
};

/// Network channel type (sigma, l_mode, l_val, q). The potential q bounds
/// the dummy messages the channel's handler may cause, directly or
/// transitively.
struct ChannelType {
    Sort sort;
    std::string mode_level;
    std::string value_level;
    uint64_t potential = 0;
};

using Lambda = std::map<std::string, ChannelType>;

/// The static typing environments: Gamma (store), Pi (local channels),
/// Lambda (network channels), and the per-handler Delta binding.
struct TypeEnvs {
    std::map<std::string, VarType> vars;
    std::map<std::string, VarType> locals;
    Lambda net;
    std::optional<std::pair<std::string, VarType>> param;
};

enum class TypeErrorKind : uint8_t {
    FlowViolation,
    PublicGuardViolation,
    PotentialDeficit,
    AssignUnderSecretPc,
    WhileUnderSecretPc,
    SortMismatch,
    UnknownIdentifier,
};

const char* type_error_kind_name(TypeErrorKind kind);

class TypeError : public std::runtime_error {
  public:
    TypeError(TypeErrorKind kind, SourcePos pos, const std::string& detail)
        : std::runtime_error(std::string(type_error_kind_name(kind)) + " at " +
                             std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " +
                             detail),
          kind_(kind), pos_(pos), detail_(detail) {}

    TypeErrorKind kind() const { return kind_; }
    SourcePos pos() const { return pos_; }
    const std::string& detail() const { return detail_; }

  private:
    TypeErrorKind kind_;
    SourcePos pos_;
    std::string detail_;
};

struct ExprType {
    Sort sort;
    std::string level;
};

/// Literals type at the principal level bottom; variables look up Delta
/// first (Delta shadows Gamma); binary operators join operand levels.
/// Throws TypeError on unknown variables or operator/sort mismatches.
ExprType type_expr(const Lattice& lat, const TypeEnvs& envs, const Expr& e);

/// Least potential q such that the command types under pc, or nullopt when
/// no q works (a structural rule is violated).
std::optional<uint64_t> infer_min_potential(const Lattice& lat, const TypeEnvs& envs,
                                            const std::string& pc, const Command& c);

/// Throws the first TypeError violated by c under pc with budget q.
void check_command(const Lattice& lat, const TypeEnvs& envs, const std::string& pc, uint64_t q,
                   const Command& c);

/// Network channel environment assembled from every handler of every node
/// in the simulation; key "NODE/CH".
Lambda build_lambda(const std::vector<Program>& programs);

/// Gamma and Pi of one node plus a shared Lambda. Delta is left empty.
TypeEnvs make_envs(const Program& p, Lambda lambda);

/// Check every handler body at pc = mode label with the annotated
/// potential, plus initializer well-formedness. Empty result means ok.
std::vector<TypeError> check_program(const Lattice& lat, const Program& p, const Lambda& lambda);

/// Minimal potential for one handler's body (Delta bound to its
/// parameter, pc = mode label); nullopt when the body cannot type.
std::optional<uint64_t> handler_min_potential(const Lattice& lat, const TypeEnvs& base_envs,
                                              const Handler& h);

uint64_t max_potential(const Lambda& lambda);

} // namespace oblivio
