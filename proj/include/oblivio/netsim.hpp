#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "oblivio/interpreter.hpp"
#include "oblivio/parser.hpp"
#include "oblivio/typecheck.hpp"

namespace oblivio {

enum class Direction : uint8_t { Sent, Received, Observed };

const char* direction_name(Direction d); // "out" | "in" | "obs"

/// One attacker-visible trace record; epsilon events are never stored.
struct TraceEvent {
    Direction dir;
    std::string channel;
    uint64_t t = 0;
    int bit = 1;
    SizedValue value;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using Trace = std::vector<TraceEvent>;

class SimError : public std::runtime_error {
  public:
    enum class Kind : uint8_t { Setup, Ingestion };
    SimError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

struct QueuedMessage {
    std::string channel;
    uint64_t t = 0;
    int bit = 1;
    SizedValue value;
};

struct ProducerState {
    std::string channel;
    CmdConfig cfg;
    std::unique_ptr<Monitor> monitor;
};

/// One node of the network: consumer or producer configuration plus the
/// realization of its network strategy (script cursor + delivery queue).
/// Move-only; value-like between steps.
struct SystemState {
    std::shared_ptr<const Program> program;
    Store store;
    LocalEnv locals;
    History history;
    Trace trace;

    StrategyScript script;
    std::size_t script_pos = 0;
    std::deque<QueuedMessage> inbox;

    std::unique_ptr<ProducerState> producer; // null = consumer phase
    std::vector<LocalOutput> local_out;      // pending, flushed by the simulator

    bool is_consumer() const { return producer == nullptr; }

    // Mid-handler, store / locals / history travel with the producer
    // configuration; these see through the phase.
    const History& current_history() const { return producer ? producer->cfg.history : history; }
    const Store& current_store() const { return producer ? producer->cfg.store : store; }
    const LocalEnv& current_locals() const { return producer ? producer->cfg.locals : locals; }
};

struct SimContext {
    Lattice lattice;
    Lambda lambda;
    bool unsafe = false;        // suppressing semantics
    bool monitor = false;       // pc-stack/bit-stack validation
    bool check_ingestion = true;
};

/// Handler selection: first handler of p matching ch. Accepts either the
/// bare handler name or the qualified "NODE/CH" form.
const Handler* handler_lookup(const Program& p, const std::string& ch);

/// Build a node's initial consumer state; validates the script's local
/// streams against the declared local channels.
SystemState make_node(std::shared_ptr<const Program> program, StrategyScript script,
                      const Store& store_overrides = {});

enum class StepOutcome : uint8_t { Stepped, Quiescent, Blocked };

struct StepEffect {
    StepOutcome outcome = StepOutcome::Stepped;
    std::optional<OutEvent> sent; // PP emission that reached the trace
    // Scripted message consumed this step (CC/CP from the script cursor);
    // other nodes observe it, mirroring how inter-node sends are observed
    // at emission.
    std::optional<QueuedMessage> consumed_external;
};

/// One system step (CC, CP, PP or PC; the -Unsafe variants when
/// ctx.unsafe). Quiescent when the strategy is exhausted in consumer
/// phase; Blocked when the unsafe semantics faces a dummy at the cursor.
StepEffect step_system(SystemState& state, const SimContext& ctx);

inline StepEffect step_system_unsafe(SystemState& state, SimContext ctx) {
    ctx.unsafe = true;
    return step_system(state, ctx);
}

struct NodeSpec {
    std::shared_ptr<const Program> program;
    StrategyScript script;
    Store store_overrides; // replaces declared initializers, e.g. mutated secrets
};

enum class SimStatus : uint8_t { Quiescent, BudgetExhausted, Blocked };

const char* sim_status_name(SimStatus s);

struct LogRecord {
    std::string node;
    std::string dir; // "out" | "in" | "obs" | "local"
    std::string channel;
    uint64_t t = 0;
    int bit = 1;
    SizedValue value;

    friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

struct SimResult {
    SimStatus status = SimStatus::Quiescent;
    uint64_t steps = 0;
    std::vector<std::string> node_ids;
    std::vector<SystemState> nodes;
    std::vector<LogRecord> log;

    const SystemState& node(const std::string& id) const;
};

/// Deterministic multi-node run: strict round-robin in declaration order,
/// handlers atomic (a producer runs to completion before the next node
/// moves). A send on B/CH is enqueued for node B and observed by every
/// third node at emission time. Identical inputs give identical results.
SimResult run_simulation(const std::vector<NodeSpec>& specs, const SimContext& ctx,
                         uint64_t budget);

std::string render_log(const std::vector<LogRecord>& log);

std::vector<LogRecord> parse_log(std::string_view text);

} // namespace oblivio
