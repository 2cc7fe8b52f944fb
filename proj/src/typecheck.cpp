#include "oblivio/typecheck.hpp"

#include <algorithm>

namespace oblivio {

const char* type_error_kind_name(TypeErrorKind kind) {
    switch (kind) {
    case TypeErrorKind::FlowViolation: return "flow violation";
    case TypeErrorKind::PublicGuardViolation: return "public-guard violation";
    case TypeErrorKind::PotentialDeficit: return "potential deficit";
    case TypeErrorKind::AssignUnderSecretPc: return "non-oblivious assign under secret pc";
    case TypeErrorKind::WhileUnderSecretPc: return "while under secret pc";
    case TypeErrorKind::SortMismatch: return "arity/sort mismatch";
    case TypeErrorKind::UnknownIdentifier: return "unknown identifier";
    }
    return "?";
}

ExprType type_expr(const Lattice& lat, const TypeEnvs& envs, const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::IntLit:
        return {Sort::Int, lat.bottom()};
    case Expr::Kind::StrLit:
        return {Sort::String, lat.bottom()};
    case Expr::Kind::Var: {
        if (envs.param && envs.param->first == e.name)
            return {envs.param->second.sort, envs.param->second.level};
        auto it = envs.vars.find(e.name);
        if (it == envs.vars.end())
            throw TypeError(TypeErrorKind::UnknownIdentifier, e.pos,
                            "variable '" + e.name + "' is not bound");
        return {it->second.sort, it->second.level};
    }
    case Expr::Kind::Binary: {
        ExprType lhs = type_expr(lat, envs, *e.lhs);
        ExprType rhs = type_expr(lat, envs, *e.rhs);
        Sort result;
        if (!binop_signature(e.op, lhs.sort, rhs.sort, result))
            throw TypeError(TypeErrorKind::SortMismatch, e.pos,
                            std::string("operator ") + binop_symbol(e.op) +
                                " is not defined on " + sort_name(lhs.sort) + " x " +
                                sort_name(rhs.sort));
        return {result, lat.lub(lhs.level, rhs.level)};
    }
    }
    throw TypeError(TypeErrorKind::SortMismatch, e.pos, "malformed expression node");
}

namespace {

// Flow checks plus the least potential satisfying the typing rules,
// computed bottom-up. Every rule only lower-bounds q, so a command types
// with q iff q >= the value computed here.
uint64_t min_demand(const Lattice& lat, const TypeEnvs& envs, const std::string& pc,
                    const Command& c) {
    const bool public_pc = lat.is_bottom(pc);
    auto target_var = [&](const std::string& x, SourcePos pos) -> const VarType& {
        if (envs.param && envs.param->first == x)
            throw TypeError(TypeErrorKind::FlowViolation, pos,
                            "handler parameter '" + x + "' is read-only");
        auto it = envs.vars.find(x);
        if (it == envs.vars.end())
            throw TypeError(TypeErrorKind::UnknownIdentifier, pos,
                            "variable '" + x + "' is not declared");
        return it->second;
    };

    switch (c.kind) {
    case Command::Kind::Skip:
        return 0;
    case Command::Kind::Seq:
        return min_demand(lat, envs, pc, *c.c1) + min_demand(lat, envs, pc, *c.c2);
    case Command::Kind::Assign: {
        if (!public_pc)
            throw TypeError(TypeErrorKind::AssignUnderSecretPc, c.pos,
                            "'" + c.var + " = ...' requires pc = " + lat.bottom() +
                                ", current pc is " + pc);
        const VarType& x = target_var(c.var, c.pos);
        ExprType e = type_expr(lat, envs, *c.expr);
        if (e.sort != x.sort)
            throw TypeError(TypeErrorKind::SortMismatch, c.pos,
                            "assigning " + std::string(sort_name(e.sort)) + " to " +
                                sort_name(x.sort) + " variable '" + c.var + "'");
        if (!lat.leq(e.level, x.level))
            throw TypeError(TypeErrorKind::FlowViolation, c.pos,
                            "flow " + e.level + " into '" + c.var + "' at " + x.level);
        return 0;
    }
    case Command::Kind::OblivAssign: {
        const VarType& x = target_var(c.var, c.pos);
        ExprType e = type_expr(lat, envs, *c.expr);
        if (e.sort != x.sort)
            throw TypeError(TypeErrorKind::SortMismatch, c.pos,
                            "assigning " + std::string(sort_name(e.sort)) + " to " +
                                sort_name(x.sort) + " variable '" + c.var + "'");
        if (!lat.leq(lat.lub(e.level, pc), x.level))
            throw TypeError(TypeErrorKind::FlowViolation, c.pos,
                            "flow " + lat.lub(e.level, pc) + " into '" + c.var + "' at " +
                                x.level);
        return 0;
    }
    case Command::Kind::LocalInput: {
        const VarType& x = target_var(c.var, c.pos);
        auto ch = envs.locals.find(c.channel);
        if (ch == envs.locals.end())
            throw TypeError(TypeErrorKind::UnknownIdentifier, c.pos,
                            "local channel '" + c.channel + "' is not declared");
        if (ch->second.sort != x.sort)
            throw TypeError(TypeErrorKind::SortMismatch, c.pos,
                            "channel '" + c.channel + "' carries " +
                                sort_name(ch->second.sort) + ", variable '" + c.var + "' is " +
                                sort_name(x.sort));
        ExprType bound = type_expr(lat, envs, *c.expr);
        if (bound.sort != Sort::Int)
            throw TypeError(TypeErrorKind::SortMismatch, c.pos,
                            "input size bound must be an int");
        if (!lat.leq(lat.lub(bound.level, pc), ch->second.level) ||
            !lat.leq(ch->second.level, x.level))
            throw TypeError(TypeErrorKind::FlowViolation, c.pos,
                            "input flow must satisfy bound_level | pc <= channel <= variable");
        return 0;
    }
    case Command::Kind::Send: {
        auto ch = envs.net.find(c.channel);
        if (ch == envs.net.end())
            throw TypeError(TypeErrorKind::UnknownIdentifier, c.pos,
                            "network channel '" + c.channel + "' has no handler anywhere");
        ExprType e = type_expr(lat, envs, *c.expr);
        if (e.sort != ch->second.sort)
            throw TypeError(TypeErrorKind::SortMismatch, c.pos,
                            "channel '" + c.channel + "' carries " +
                                sort_name(ch->second.sort) + ", payload is " +
                                sort_name(e.sort));
        if (!lat.leq(pc, ch->second.mode_level))
            throw TypeError(TypeErrorKind::FlowViolation, c.pos,
                            "pc " + pc + " does not flow to mode label " +
                                ch->second.mode_level + " of '" + c.channel + "'");
        if (!lat.leq(e.level, ch->second.value_level))
            throw TypeError(TypeErrorKind::FlowViolation, c.pos,
                            "payload at " + e.level + " does not flow to value label " +
                                ch->second.value_level + " of '" + c.channel + "'");
        return public_pc ? 0 : 1 + ch->second.potential;
    }
    case Command::Kind::Output: {
        auto ch = envs.locals.find(c.channel);
        if (ch == envs.locals.end())
            throw TypeError(TypeErrorKind::UnknownIdentifier, c.pos,
                            "local channel '" + c.channel + "' is not declared");
        ExprType e = type_expr(lat, envs, *c.expr);
        if (e.sort != ch->second.sort)
            throw TypeError(TypeErrorKind::SortMismatch, c.pos,
                            "channel '" + c.channel + "' carries " +
                                sort_name(ch->second.sort) + ", payload is " +
                                sort_name(e.sort));
        if (!lat.leq(lat.lub(e.level, pc), ch->second.level))
            throw TypeError(TypeErrorKind::FlowViolation, c.pos,
                            "output flow " + lat.lub(e.level, pc) + " exceeds channel level " +
                                ch->second.level);
        return 0;
    }
    case Command::Kind::If: {
        ExprType g = type_expr(lat, envs, *c.expr);
        if (g.sort != Sort::Int)
            throw TypeError(TypeErrorKind::SortMismatch, c.pos, "if guard must be an int");
        if (!lat.is_bottom(g.level))
            throw TypeError(TypeErrorKind::PublicGuardViolation, c.pos,
                            "if guard is at " + g.level + "; branch obliviously instead");
        return std::max(min_demand(lat, envs, pc, *c.c1), min_demand(lat, envs, pc, *c.c2));
    }
    case Command::Kind::While: {
        if (!public_pc)
            throw TypeError(TypeErrorKind::WhileUnderSecretPc, c.pos,
                            "while requires pc = " + lat.bottom() + ", current pc is " + pc);
        ExprType g = type_expr(lat, envs, *c.expr);
        if (g.sort != Sort::Int)
            throw TypeError(TypeErrorKind::SortMismatch, c.pos, "while guard must be an int");
        if (!lat.is_bottom(g.level))
            throw TypeError(TypeErrorKind::PublicGuardViolation, c.pos,
                            "while guard is at " + g.level + "; only public guards may loop");
        uint64_t body = min_demand(lat, envs, pc, *c.c1);
        if (body != 0)
            throw TypeError(TypeErrorKind::PotentialDeficit, c.pos,
                            "while body must type with potential 0, needs " +
                                std::to_string(body));
        return 0;
    }
    case Command::Kind::OblivIf: {
        ExprType g = type_expr(lat, envs, *c.expr);
        if (g.sort != Sort::Int)
            throw TypeError(TypeErrorKind::SortMismatch, c.pos, "oblif guard must be an int");
        if (lat.is_bottom(g.level))
            throw TypeError(TypeErrorKind::PublicGuardViolation, c.pos,
                            "oblif guard is public; use a plain if");
        const std::string& branch_pc = lat.lub(pc, g.level);
        return min_demand(lat, envs, branch_pc, *c.c1) +
               min_demand(lat, envs, branch_pc, *c.c2);
    }
    case Command::Kind::Stop:
    case Command::Kind::Pop:
        throw TypeError(TypeErrorKind::SortMismatch, c.pos,
                        "internal command form in surface syntax");
    }
    throw TypeError(TypeErrorKind::SortMismatch, c.pos, "malformed command node");
}

} // namespace

std::optional<uint64_t> infer_min_potential(const Lattice& lat, const TypeEnvs& envs,
                                            const std::string& pc, const Command& c) {
    try {
        return min_demand(lat, envs, pc, c);
    } catch (const TypeError&) {
        return std::nullopt;
    }
}

void check_command(const Lattice& lat, const TypeEnvs& envs, const std::string& pc, uint64_t q,
                   const Command& c) {
    uint64_t need = min_demand(lat, envs, pc, c);
    if (q < need)
        throw TypeError(TypeErrorKind::PotentialDeficit, c.pos,
                        "needs potential " + std::to_string(need) + ", only " +
                            std::to_string(q) + " available");
}

Lambda build_lambda(const std::vector<Program>& programs) {
    Lambda lambda;
    for (const auto& p : programs) {
        for (const auto& h : p.handlers) {
            std::string key = p.node_id + "/" + h.name;
            lambda[key] = ChannelType{h.param_sort, h.mode_level, h.param_level, h.potential};
        }
    }
    return lambda;
}

TypeEnvs make_envs(const Program& p, Lambda lambda) {
    TypeEnvs envs;
    envs.net = std::move(lambda);
    for (const auto& v : p.globals)
        envs.vars[v.name] = VarType{v.sort, v.level};
    for (const auto& l : p.locals)
        envs.locals[l.name] = VarType{l.sort, l.level};
    return envs;
}

std::optional<uint64_t> handler_min_potential(const Lattice& lat, const TypeEnvs& base_envs,
                                              const Handler& h) {
    TypeEnvs envs = base_envs;
    envs.param = {h.param_name, VarType{h.param_sort, h.param_level}};
    return infer_min_potential(lat, envs, h.mode_level, *h.body);
}

std::vector<TypeError> check_program(const Lattice& lat, const Program& p,
                                     const Lambda& lambda) {
    std::vector<TypeError> errors;
    TypeEnvs base = make_envs(p, lambda);
    for (const auto& v : p.globals) {
        if (v.init && v.init->sort() != v.sort)
            errors.emplace_back(TypeErrorKind::SortMismatch, v.pos,
                                "initializer sort does not match declaration of '" + v.name +
                                    "'");
    }
    for (const auto& h : p.handlers) {
        TypeEnvs envs = base;
        envs.param = {h.param_name, VarType{h.param_sort, h.param_level}};
        try {
            check_command(lat, envs, h.mode_level, h.potential, *h.body);
        } catch (const TypeError& e) {
            errors.push_back(e);
        }
    }
    return errors;
}

uint64_t max_potential(const Lambda& lambda) {
    uint64_t q = 0;
    for (const auto& [name, type] : lambda)
        q = std::max(q, type.potential);
    return q;
}

} // namespace oblivio
