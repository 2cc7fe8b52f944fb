#include "oblivio/interpreter.hpp"

#include <algorithm>

namespace oblivio {

StuckError::StuckError(const std::string& msg, const History& history)
    : std::runtime_error(msg + " (after " + std::to_string(history.size()) +
                         " history events, t=" + std::to_string(time_of(history)) + ")"),
      history_(std::make_shared<History>(history)) {}

bool wellformed_pcstack(const Lattice& lat, const std::string& pc0,
                        const std::vector<std::string>& pcs) {
    if (pcs.empty() || pcs.front() != pc0)
        return false;
    for (std::size_t i = 1; i < pcs.size(); ++i) {
        if (lat.is_bottom(pcs[i]) || !lat.leq(pcs[i - 1], pcs[i]))
            return false;
    }
    return true;
}

bool wellformed_bitstack(const Lattice& lat, const std::vector<std::string>& pcs,
                         const std::vector<uint8_t>& bits) {
    if (pcs.size() != bits.size() || bits.empty())
        return false;
    if (lat.is_bottom(pcs.front()) && bits.front() != 1)
        return false;
    for (std::size_t i = 1; i < pcs.size(); ++i)
        if (lat.is_bottom(pcs[i]))
            return false;
    return true;
}

Monitor::Monitor(const Lattice& lat, TypeEnvs envs, std::string handler_mode)
    : lat_(lat), envs_(std::move(envs)), pc0_(handler_mode) {
    pcs_.push_back(std::move(handler_mode));
}

void Monitor::on_oblif(const Expr& guard) {
    ExprType g = type_expr(lat_, envs_, guard);
    std::string raised = lat_.lub(pcs_.back(), g.level);
    pcs_.push_back(raised);
    pcs_.push_back(raised);
}

void Monitor::on_pop() {
    if (pcs_.empty())
        throw MonitorError("pc-stack underflow at pop");
    pcs_.pop_back();
}

void Monitor::check(const std::vector<uint8_t>& bits) const {
    if (!wellformed_pcstack(lat_, pc0_, pcs_))
        throw MonitorError("pc-stack is not well-formed w.r.t. handler mode " + pc0_);
    if (!wellformed_bitstack(lat_, pcs_, bits))
        throw MonitorError("bit-stack is not well-formed w.r.t. the pc-stack");
}

SizedValue eval_expr(const Expr& e, const std::optional<std::pair<std::string, SizedValue>>& m,
                     const Store& store) {
    switch (e.kind) {
    case Expr::Kind::IntLit:
        return SizedValue::of_int(e.int_value);
    case Expr::Kind::StrLit:
        return SizedValue::of_string(e.name);
    case Expr::Kind::Var: {
        if (m && m->first == e.name)
            return m->second;
        auto it = store.find(e.name);
        if (it == store.end())
            throw ValueError("unbound variable '" + e.name + "'");
        return it->second;
    }
    case Expr::Kind::Binary: {
        SizedValue lhs = eval_expr(*e.lhs, m, store);
        SizedValue rhs = eval_expr(*e.rhs, m, store);
        CtCounters ct;
        return apply_binop(e.op, lhs, rhs, ct);
    }
    }
    throw ValueError("malformed expression node");
}

namespace {

uint8_t top_bit(const CmdConfig& cfg) {
    if (cfg.bits.empty())
        throw StuckError("empty bit-stack during handler execution", cfg.history);
    return cfg.bits.back();
}

// Steps the leftmost redex of `slot`, rewriting the command in place.
std::optional<OutEvent> step_at(CommandPtr& slot, CmdConfig& cfg, Monitor* monitor) {
    const Command& c = *slot;
    switch (c.kind) {
    case Command::Kind::Stop:
        throw StuckError("cannot step a stopped configuration", cfg.history);

    case Command::Kind::Seq: {
        CommandPtr head = c.c1;
        CommandPtr tail = c.c2;
        auto event = step_at(head, cfg, monitor);
        if (head->kind == Command::Kind::Stop)
            slot = tail;
        else
            slot = Command::seq(std::move(head), std::move(tail), c.pos);
        return event;
    }

    case Command::Kind::Skip:
        cfg.history.append({HistEvent::Kind::Skp, "", 0, 0, 0});
        slot = Command::stop();
        return std::nullopt;

    case Command::Kind::Assign: {
        if (top_bit(cfg) != 1)
            throw StuckError("assignment reached in phantom mode", cfg.history);
        SizedValue v = eval_expr(*c.expr, cfg.memory, cfg.store);
        cfg.history.append({HistEvent::Kind::Asn, c.var, v.size(), 0, 0});
        cfg.store[c.var] = std::move(v);
        slot = Command::stop();
        return std::nullopt;
    }

    case Command::Kind::OblivAssign: {
        auto it = cfg.store.find(c.var);
        if (it == cfg.store.end())
            throw StuckError("oblivious assignment to unbound '" + c.var + "'", cfg.history);
        SizedValue fresh = eval_expr(*c.expr, cfg.memory, cfg.store);
        uint64_t z = std::max(it->second.size(), fresh.size());
        CtCounters ct;
        SizedValue chosen =
            safe_select(top_bit(cfg), pad(it->second, z), pad(fresh, z), ct);
        cfg.history.append({HistEvent::Kind::Casn, c.var, z, 0, 0});
        it->second = std::move(chosen);
        slot = Command::stop();
        return std::nullopt;
    }

    case Command::Kind::LocalInput: {
        auto it = cfg.store.find(c.var);
        if (it == cfg.store.end())
            throw StuckError("input into unbound '" + c.var + "'", cfg.history);
        SizedValue bound = eval_expr(*c.expr, cfg.memory, cfg.store);
        if (!bound.is_int())
            throw StuckError("input size bound must be an int", cfg.history);
        const bool negative_bound = bound.as_int() < 0;
        uint64_t limit = negative_bound ? 0 : static_cast<uint64_t>(bound.as_int());
        uint64_t z = std::max(it->second.size(), limit);

        SizedValue next = it->second; // unchanged unless a value is consumed
        if (top_bit(cfg) == 1) {
            auto stream = cfg.locals.find(c.channel);
            if (stream != cfg.locals.end() && !stream->second.empty()) {
                const auto& head = stream->second.front();
                if (!head.has_value()) {
                    stream->second.pop_front(); // no value available
                } else if (!negative_bound && head->size() <= limit) {
                    next = *head;
                    stream->second.pop_front();
                }
                // a value too large for the bound stays queued
            }
        }
        cfg.history.append({HistEvent::Kind::In, c.var, z, 0, 0});
        it->second = pad(next, z);
        slot = Command::stop();
        return std::nullopt;
    }

    case Command::Kind::Send: {
        SizedValue v = eval_expr(*c.expr, cfg.memory, cfg.store);
        uint64_t z = v.size();
        cfg.history.append({HistEvent::Kind::Out, c.channel, z, 0, 0});
        OutEvent event{c.channel, time_of(cfg.history), top_bit(cfg), std::move(v)};
        slot = Command::stop();
        return event;
    }

    case Command::Kind::Output: {
        SizedValue v = eval_expr(*c.expr, cfg.memory, cfg.store);
        cfg.history.append({HistEvent::Kind::LOut, c.channel, v.size(), 0, 0});
        if (top_bit(cfg) == 1)
            cfg.local_out.push_back({c.channel, std::move(v)});
        slot = Command::stop();
        return std::nullopt;
    }

    case Command::Kind::If: {
        SizedValue guard = eval_expr(*c.expr, cfg.memory, cfg.store);
        int chosen = guard.truthy() ? 1 : 2;
        cfg.history.append({HistEvent::Kind::Br, "", guard.size(), chosen, 0});
        slot = chosen == 1 ? c.c1 : c.c2;
        return std::nullopt;
    }

    case Command::Kind::While: {
        if (top_bit(cfg) != 1)
            throw StuckError("while reached in phantom mode", cfg.history);
        cfg.history.append({HistEvent::Kind::Whl, "", 0, 0, 0});
        CommandPtr again = slot;
        slot = Command::if_(c.expr, Command::seq(c.c1, std::move(again), c.pos),
                            Command::skip(c.pos), c.pos);
        return std::nullopt;
    }

    case Command::Kind::OblivIf: {
        uint8_t b = top_bit(cfg);
        SizedValue guard = eval_expr(*c.expr, cfg.memory, cfg.store);
        uint8_t b1 = guard.truthy() ? b : 0;
        uint8_t b2 = guard.truthy() ? 0 : b;
        cfg.bits.push_back(b2);
        cfg.bits.push_back(b1); // b1 on top: the then-branch runs first
        cfg.history.append({HistEvent::Kind::Obr, "", guard.size(), 0, 0});
        if (monitor)
            monitor->on_oblif(*c.expr);
        slot = Command::seq(
            c.c1, Command::seq(Command::pop(), Command::seq(c.c2, Command::pop(), c.pos), c.pos),
            c.pos);
        return std::nullopt;
    }

    case Command::Kind::Pop: {
        if (cfg.bits.size() < 2)
            throw StuckError("bit-stack would empty mid-handler", cfg.history);
        cfg.bits.pop_back();
        cfg.history.append({HistEvent::Kind::Pop, "", 0, 0, 0});
        if (monitor)
            monitor->on_pop();
        slot = Command::stop();
        return std::nullopt;
    }
    }
    throw StuckError("malformed command node", cfg.history);
}

} // namespace

std::optional<OutEvent> step_command(CmdConfig& cfg, Monitor* monitor) {
    auto event = step_at(cfg.cmd, cfg, monitor);
    if (monitor)
        monitor->check(cfg.bits);
    return event;
}

HandlerRun run_handler(const IncomingMessage& msg, const Handler& handler, Store store,
                       LocalEnv locals, History history, uint64_t step_budget,
                       Monitor* monitor) {
    CmdConfig cfg;
    cfg.bits.push_back(static_cast<uint8_t>(msg.bit));
    cfg.cmd = handler.body;
    cfg.memory = {handler.param_name, msg.value};
    cfg.store = std::move(store);
    cfg.locals = std::move(locals);
    cfg.history = std::move(history);
    cfg.history.append({HistEvent::Kind::Hl, msg.channel, msg.value.size(), 0, msg.t});
    if (monitor)
        monitor->check(cfg.bits);

    HandlerRun out;
    while (!cfg.stopped()) {
        if (out.steps >= step_budget)
            throw BudgetError("handler for " + msg.channel + " exceeded the step budget of " +
                              std::to_string(step_budget));
        auto event = step_command(cfg, monitor);
        ++out.steps;
        if (event)
            out.emitted.push_back(std::move(*event));
    }
    cfg.history.append({HistEvent::Kind::Ret, "", 0, 0, 0});

    out.store = std::move(cfg.store);
    out.locals = std::move(cfg.locals);
    out.history = std::move(cfg.history);
    out.local_outputs = std::move(cfg.local_out);
    return out;
}

} // namespace oblivio
