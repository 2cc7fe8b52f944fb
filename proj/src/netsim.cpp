#include "oblivio/netsim.hpp"

#include <algorithm>

#include "json.hpp"

#include "oblivio/harness.hpp"

namespace oblivio {

const char* direction_name(Direction d) {
    switch (d) {
    case Direction::Sent: return "out";
    case Direction::Received: return "in";
    case Direction::Observed: return "obs";
    }
    return "?";
}

const char* sim_status_name(SimStatus s) {
    switch (s) {
    case SimStatus::Quiescent: return "quiescent";
    case SimStatus::BudgetExhausted: return "budget_exhausted";
    case SimStatus::Blocked: return "blocked";
    }
    return "?";
}

const Handler* handler_lookup(const Program& p, const std::string& ch) {
    std::string name = ch;
    auto slash = ch.find('/');
    if (slash != std::string::npos) {
        if (ch.substr(0, slash) != p.node_id)
            return nullptr;
        name = ch.substr(slash + 1);
    }
    return p.find_handler(name);
}

SystemState make_node(std::shared_ptr<const Program> program, StrategyScript script,
                      const Store& store_overrides) {
    SystemState node;
    for (const auto& v : program->globals)
        node.store[v.name] = v.init ? *v.init : default_value(v.sort);
    for (const auto& [name, value] : store_overrides) {
        if (node.store.find(name) == node.store.end())
            throw SimError(SimError::Kind::Setup, program->node_id +
                                                      ": store override for undeclared '" +
                                                      name + "'");
        node.store[name] = value;
    }
    for (const auto& l : program->locals) {
        auto scripted = script.local.find(l.name);
        if (scripted == script.local.end()) {
            node.locals[l.name] = {};
            continue;
        }
        LocalStream stream;
        for (const auto& item : scripted->second) {
            if (item && item->sort() != l.sort)
                throw SimError(SimError::Kind::Setup,
                               program->node_id + ": local stream for '" + l.name +
                                   "' carries a " + sort_name(item->sort()) + ", channel is " +
                                   sort_name(l.sort));
            stream.push_back(item);
        }
        node.locals[l.name] = std::move(stream);
    }
    for (const auto& [name, stream] : script.local) {
        if (!program->find_local(name))
            throw SimError(SimError::Kind::Setup, program->node_id +
                                                      ": script feeds undeclared local channel '" +
                                                      name + "'");
    }
    node.script = std::move(script);
    node.program = std::move(program);
    return node;
}

namespace {

enum class Source : uint8_t { None, Script, Inbox };

// Strategy realization: scripted messages go ahead of queued deliveries
// unless the entry defers to the queue.
Source next_source(const SystemState& node) {
    if (node.script_pos < node.script.net.size()) {
        const auto& entry = node.script.net[node.script_pos];
        if (entry.immediate || node.inbox.empty())
            return Source::Script;
        return Source::Inbox;
    }
    return node.inbox.empty() ? Source::None : Source::Inbox;
}

QueuedMessage peek_message(const SystemState& node, Source src) {
    if (src == Source::Inbox)
        return node.inbox.front();
    const auto& entry = node.script.net[node.script_pos];
    // Scripted messages get their timestamp at consumption from the
    // receiving node's clock, keeping related runs timestamp-identical.
    return {entry.channel, time_of(node.history), entry.bit, entry.value};
}

void pop_message(SystemState& node, Source src) {
    if (src == Source::Inbox)
        node.inbox.pop_front();
    else
        ++node.script_pos;
}

StepEffect consumer_step(SystemState& node, const SimContext& ctx) {
    Source src = next_source(node);
    if (src == Source::None)
        return {StepOutcome::Quiescent, std::nullopt, std::nullopt};

    QueuedMessage msg = peek_message(node, src);
    if (ctx.unsafe && msg.bit != 1)
        return {StepOutcome::Blocked, std::nullopt, std::nullopt}; // unsafe needs a genuine head

    if (ctx.check_ingestion) {
        if (auto violation = wf_strategy_online(ctx.lattice, ctx.lambda, node.trace, msg))
            throw SimError(SimError::Kind::Ingestion,
                           node.program->node_id + ": ill-formed strategy message on " +
                               msg.channel + ": " + violation->detail);
    }
    pop_message(node, src);
    StepEffect effect{StepOutcome::Stepped, std::nullopt, std::nullopt};
    if (src == Source::Script)
        effect.consumed_external = msg;

    const Handler* handler = handler_lookup(*node.program, msg.channel);
    if (handler == nullptr) {
        node.trace.push_back({Direction::Observed, msg.channel, msg.t, msg.bit, msg.value});
        return effect;
    }

    node.history.append({HistEvent::Kind::Hl, msg.channel, msg.value.size(), 0, msg.t});
    node.trace.push_back({Direction::Received, msg.channel, msg.t, msg.bit, msg.value});

    auto producer = std::make_unique<ProducerState>();
    producer->channel = msg.channel;
    producer->cfg.bits.push_back(static_cast<uint8_t>(msg.bit));
    producer->cfg.cmd = handler->body;
    producer->cfg.memory = {handler->param_name, msg.value};
    producer->cfg.store = std::move(node.store);
    producer->cfg.locals = std::move(node.locals);
    producer->cfg.history = std::move(node.history);
    if (ctx.monitor) {
        TypeEnvs envs = make_envs(*node.program, ctx.lambda);
        envs.param = {handler->param_name, VarType{handler->param_sort, handler->param_level}};
        producer->monitor =
            std::make_unique<Monitor>(ctx.lattice, std::move(envs), handler->mode_level);
        producer->monitor->check(producer->cfg.bits);
    }
    node.producer = std::move(producer);
    return effect;
}

StepEffect producer_step(SystemState& node, const SimContext& ctx) {
    ProducerState& prod = *node.producer;
    if (prod.cfg.stopped()) {
        // PC: hand the state back and return to consumer.
        prod.cfg.history.append({HistEvent::Kind::Ret, "", 0, 0, 0});
        node.store = std::move(prod.cfg.store);
        node.locals = std::move(prod.cfg.locals);
        node.history = std::move(prod.cfg.history);
        for (auto& out : prod.cfg.local_out)
            node.local_out.push_back(std::move(out));
        node.producer.reset();
        return {StepOutcome::Stepped, std::nullopt, std::nullopt};
    }
    auto event = step_command(prod.cfg, prod.monitor.get());
    if (!event)
        return {StepOutcome::Stepped, std::nullopt, std::nullopt};
    if (ctx.unsafe && event->bit != 1)
        return {StepOutcome::Stepped, std::nullopt, std::nullopt}; // PP-Unsafe suppresses dummies
    node.trace.push_back({Direction::Sent, event->channel, event->t, event->bit, event->value});
    return {StepOutcome::Stepped, std::move(event), std::nullopt};
}

} // namespace

StepEffect step_system(SystemState& state, const SimContext& ctx) {
    if (state.is_consumer())
        return consumer_step(state, ctx);
    return producer_step(state, ctx);
}

const SystemState& SimResult::node(const std::string& id) const {
    for (std::size_t i = 0; i < node_ids.size(); ++i)
        if (node_ids[i] == id)
            return nodes[i];
    throw std::out_of_range("no node " + id);
}

namespace {

void flush_local(SystemState& node, std::vector<LogRecord>& log) {
    for (auto& out : node.local_out)
        log.push_back({node.program->node_id, "local", out.channel, time_of(node.history), 1,
                       std::move(out.value)});
    node.local_out.clear();
}

} // namespace

SimResult run_simulation(const std::vector<NodeSpec>& specs, const SimContext& ctx,
                         uint64_t budget) {
    SimResult result;
    for (const auto& spec : specs) {
        result.node_ids.push_back(spec.program->node_id);
        result.nodes.push_back(make_node(spec.program, spec.script, spec.store_overrides));
    }

    auto fan_out = [&](std::size_t sender, const OutEvent& event) {
        result.log.push_back({result.node_ids[sender], "out", event.channel, event.t, event.bit,
                              event.value});
        auto slash = event.channel.find('/');
        std::string target = slash == std::string::npos ? "" : event.channel.substr(0, slash);
        for (std::size_t i = 0; i < result.nodes.size(); ++i) {
            if (i == sender)
                continue;
            if (result.node_ids[i] == target) {
                result.nodes[i].inbox.push_back(
                    {event.channel, event.t, event.bit, event.value});
            } else {
                result.nodes[i].trace.push_back(
                    {Direction::Observed, event.channel, event.t, event.bit, event.value});
                result.log.push_back({result.node_ids[i], "obs", event.channel, event.t,
                                      event.bit, event.value});
            }
        }
    };

    bool out_of_budget = false;
    for (;;) {
        bool progressed = false;
        bool any_blocked = false;
        for (std::size_t i = 0; i < result.nodes.size() && !out_of_budget; ++i) {
            SystemState& node = result.nodes[i];
            if (!node.is_consumer())
                throw SimError(SimError::Kind::Setup, "node mid-handler between turns");
            if (result.steps >= budget) {
                out_of_budget = true;
                break;
            }

            std::size_t trace_before = node.trace.size();
            StepEffect effect = step_system(node, ctx);
            if (effect.outcome == StepOutcome::Quiescent)
                continue;
            if (effect.outcome == StepOutcome::Blocked) {
                any_blocked = true;
                continue;
            }
            progressed = true;
            ++result.steps;
            if (node.is_consumer() && node.trace.size() > trace_before) {
                // CC step: a message without a handler was observed.
                const TraceEvent& ev = node.trace.back();
                result.log.push_back({result.node_ids[i], "obs", ev.channel, ev.t, ev.bit,
                                      ev.value});
            } else if (!node.is_consumer()) {
                const TraceEvent& ev = node.trace.back();
                result.log.push_back(
                    {result.node_ids[i], "in", ev.channel, ev.t, ev.bit, ev.value});
            }
            if (effect.consumed_external) {
                // A scripted message is traffic on the open network too:
                // every other node observes it at consumption.
                const QueuedMessage& m = *effect.consumed_external;
                for (std::size_t j = 0; j < result.nodes.size(); ++j) {
                    if (j == i)
                        continue;
                    result.nodes[j].trace.push_back(
                        {Direction::Observed, m.channel, m.t, m.bit, m.value});
                    result.log.push_back(
                        {result.node_ids[j], "obs", m.channel, m.t, m.bit, m.value});
                }
            }
            // Handlers are atomic: run this producer to completion.
            while (!node.is_consumer()) {
                if (result.steps >= budget) {
                    out_of_budget = true;
                    break;
                }
                StepEffect pp = step_system(node, ctx);
                ++result.steps;
                if (pp.sent)
                    fan_out(i, *pp.sent);
            }
            flush_local(node, result.log);
        }
        if (out_of_budget) {
            result.status = SimStatus::BudgetExhausted;
            break;
        }
        if (!progressed) {
            result.status = any_blocked ? SimStatus::Blocked : SimStatus::Quiescent;
            break;
        }
    }
    return result;
}

std::string render_log(const std::vector<LogRecord>& log) {
    std::string out;
    for (const auto& rec : log) {
        nlohmann::json j;
        j["node"] = rec.node;
        j["dir"] = rec.dir;
        j["ch"] = rec.channel;
        j["t"] = rec.t;
        j["bit"] = rec.bit;
        if (rec.value.is_int())
            j["val"] = rec.value.as_int();
        else
            j["val"] = rec.value.as_string();
        j["size"] = rec.value.size();
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<LogRecord> parse_log(std::string_view text) {
    std::vector<LogRecord> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty())
            continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw ParseError({0, 0}, "trace log line is not valid JSON");
        LogRecord rec;
        rec.node = j.at("node").get<std::string>();
        rec.dir = j.at("dir").get<std::string>();
        rec.channel = j.at("ch").get<std::string>();
        rec.t = j.at("t").get<uint64_t>();
        rec.bit = j.at("bit").get<int>();
        uint64_t size = j.at("size").get<uint64_t>();
        if (j.at("val").is_string())
            rec.value = SizedValue(j.at("val").get<std::string>(), size);
        else
            rec.value = SizedValue(j.at("val").get<int64_t>(), size);
        out.push_back(std::move(rec));
    }
    return out;
}

} // namespace oblivio
