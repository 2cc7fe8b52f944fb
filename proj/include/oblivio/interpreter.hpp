#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oblivio/ast.hpp"
#include "oblivio/history.hpp"
#include "oblivio/typecheck.hpp"

namespace oblivio {

using Store = std::map<std::string, SizedValue>;
using LocalStream = std::deque<std::optional<SizedValue>>;
using LocalEnv = std::map<std::string, LocalStream>;

/// Network emission ch->(t, b, <v|z>).
struct OutEvent {
    std::string channel;
    uint64_t t = 0;
    int bit = 1;
    SizedValue value;
};

struct LocalOutput {
    std::string channel;
    SizedValue value;
};

/// A configuration reached a command the semantics withholds (assignment
/// or loop in phantom mode, stepping a stopped command). Impossible after
/// type checking; reported with the history for diagnosis.
class StuckError : public std::runtime_error {
  public:
    StuckError(const std::string& msg, const History& history);
    const History& history() const { return *history_; }

  private:
    std::shared_ptr<History> history_;
};

class BudgetError : public std::runtime_error {
  public:
    explicit BudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A runtime pc-stack/bit-stack well-formedness assertion failed.
class MonitorError : public std::runtime_error {
  public:
    explicit MonitorError(const std::string& msg) : std::runtime_error(msg) {}
};

bool wellformed_pcstack(const Lattice& lat, const std::string& pc0,
                        const std::vector<std::string>& pcs);
bool wellformed_bitstack(const Lattice& lat, const std::vector<std::string>& pcs,
                         const std::vector<uint8_t>& bits);

/// Optional runtime validation monitor: tracks the pc-level of the
/// execution mode alongside the bit-stack and asserts both stacks
/// well-formed after every step. Oblivious branches push pc | level(guard)
/// twice; pop pops both stacks.
class Monitor {
  public:
    Monitor(const Lattice& lat, TypeEnvs envs, std::string handler_mode);

    void on_oblif(const Expr& guard);
    void on_pop();
    void check(const std::vector<uint8_t>& bits) const;

    const std::vector<std::string>& pc_stack() const { return pcs_; }

  private:
    const Lattice& lat_;
    TypeEnvs envs_;
    std::string pc0_;
    std::vector<std::string> pcs_;
};

/// Command configuration <bits, c, m, mu, pi, h> plus the local output
/// sink. Value-like: copyable between steps.
struct CmdConfig {
    std::vector<uint8_t> bits; // back = top of the mode-bit stack
    CommandPtr cmd;
    std::optional<std::pair<std::string, SizedValue>> memory; // read-only m
    Store store;
    LocalEnv locals;
    History history;
    std::vector<LocalOutput> local_out;

    bool stopped() const { return cmd->kind == Command::Kind::Stop; }
};

SizedValue eval_expr(const Expr& e, const std::optional<std::pair<std::string, SizedValue>>& m,
                     const Store& store);

/// One small step. Exactly one rule applies; returns the emitted network
/// event if the step was a send.
std::optional<OutEvent> step_command(CmdConfig& cfg, Monitor* monitor = nullptr);

struct IncomingMessage {
    std::string channel;
    uint64_t t = 0;
    int bit = 1;
    SizedValue value;
};

struct HandlerRun {
    Store store;
    LocalEnv locals;
    History history;
    std::vector<OutEvent> emitted;
    std::vector<LocalOutput> local_outputs;
    uint64_t steps = 0;
};

/// Dispatch one message into a handler and run it to completion: appends
/// hl on entry and ret at stop, returns emissions in order. The budget
/// bounds the step count (phantom termination watchdog).
HandlerRun run_handler(const IncomingMessage& msg, const Handler& handler, Store store,
                       LocalEnv locals, History history, uint64_t step_budget,
                       Monitor* monitor = nullptr);

} // namespace oblivio
