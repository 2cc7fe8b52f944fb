#include "oblivio/harness.hpp"

#include <algorithm>
#include <random>

namespace oblivio {

std::optional<uint64_t> trace_potential(const Lambda& lambda, const Trace& trace) {
    uint64_t q = 0;
    for (const auto& ev : trace) {
        auto it = lambda.find(ev.channel);
        if (it == lambda.end())
            throw SimError(SimError::Kind::Setup,
                           "trace mentions channel '" + ev.channel + "' missing from Lambda");
        if (ev.bit == 1) {
            q += it->second.potential;
        } else {
            if (q == 0)
                return std::nullopt; // dummy at potential zero: ill-formed
            q -= 1;
        }
    }
    return q;
}

std::optional<WfViolation> wf_strategy_online(const Lattice& lat, const Lambda& lambda,
                                              const Trace& trace, const QueuedMessage& msg) {
    auto it = lambda.find(msg.channel);
    if (it == lambda.end())
        return WfViolation{WfViolation::Clause::UnknownChannel,
                           "channel '" + msg.channel + "' is not typed"};
    const ChannelType& ch = it->second;
    if (msg.value.sort() != ch.sort)
        return WfViolation{WfViolation::Clause::SortMismatch,
                           std::string("value sort ") + sort_name(msg.value.sort()) +
                               " does not match channel sort " + sort_name(ch.sort)};
    uint64_t base_size =
        msg.value.is_int() ? size_of(msg.value.as_int()) : size_of(msg.value.as_string());
    if (base_size > msg.value.size())
        return WfViolation{WfViolation::Clause::SizeBound,
                           "base value exceeds the declared size bound"};
    if (msg.bit == 0) {
        if (lat.is_bottom(ch.mode_level))
            return WfViolation{WfViolation::Clause::DummyOnPublicMode,
                               "dummy message on public-mode channel '" + msg.channel + "'"};
        auto q = trace_potential(lambda, trace);
        if (!q || *q < 1 + ch.potential)
            return WfViolation{WfViolation::Clause::PotentialExhausted,
                               "dummy on '" + msg.channel + "' needs trace potential >= " +
                                   std::to_string(1 + ch.potential)};
    }
    return std::nullopt;
}

bool equiv_trace(const Lattice& lat, const Lambda& lambda, const std::string& adv,
                 const Trace& t1, const Trace& t2) {
    if (t1.size() != t2.size())
        return false;
    for (std::size_t i = 0; i < t1.size(); ++i) {
        const TraceEvent& a = t1[i];
        const TraceEvent& b = t2[i];
        if (a.dir != b.dir || a.channel != b.channel || a.t != b.t ||
            a.value.size() != b.value.size())
            return false;
        auto it = lambda.find(a.channel);
        if (it == lambda.end())
            throw SimError(SimError::Kind::Setup,
                           "trace mentions channel '" + a.channel + "' missing from Lambda");
        if (lat.leq(it->second.mode_level, adv) && a.bit != b.bit)
            return false;
        if (lat.leq(it->second.value_level, adv) && !a.value.same_base(b.value))
            return false;
    }
    return true;
}

bool equiv_state(const Lattice& lat, const Lambda& lambda, const std::string& adv,
                 const SystemState& s1, const SystemState& s2) {
    if (!s1.is_consumer() || !s2.is_consumer())
        throw std::invalid_argument("state equivalence is defined on consumer states");
    if (s1.program->node_id != s2.program->node_id)
        return false;
    if (!(s1.history == s2.history))
        return false;

    for (const auto& v : s1.program->globals) {
        const SizedValue& a = s1.store.at(v.name);
        const SizedValue& b = s2.store.at(v.name);
        if (a.size() != b.size())
            return false;
        if (lat.leq(v.level, adv) && !a.same_base(b))
            return false;
    }
    for (const auto& l : s1.program->locals) {
        if (!lat.leq(l.level, adv))
            continue;
        auto a = s1.locals.find(l.name);
        auto b = s2.locals.find(l.name);
        if ((a == s1.locals.end()) != (b == s2.locals.end()))
            return false;
        if (a != s1.locals.end() && a->second != b->second)
            return false;
    }
    return equiv_trace(lat, lambda, adv, s1.trace, s2.trace);
}

bool phantom_extension_check(const Trace& t1, const Trace& t2) {
    for (const auto& ev : t1)
        if (ev.bit != 1)
            return false; // the suppressed-run trace may not contain dummies
    std::size_t i = 0;
    for (const auto& ev : t2) {
        if (ev.bit == 0)
            continue; // dummies in the extended trace are skippable
        if (i == t1.size())
            return false;
        const TraceEvent& g = t1[i];
        if (g.dir != ev.dir || g.channel != ev.channel || !g.value.same_base(ev.value) ||
            g.value.size() > ev.value.size())
            return false;
        ++i;
    }
    return i == t1.size();
}

RunOutcome run_scenario(const Scenario& scenario, const Lattice& lat, const Lambda& lambda,
                        bool unsafe, bool monitor) {
    SimContext ctx{lat, lambda, unsafe, monitor, true};
    RunOutcome out;
    try {
        SimResult result = run_simulation(scenario.nodes, ctx, scenario.budget);
        out.status = result.status;
        out.node_ids = result.node_ids;
        for (auto& node : result.nodes) {
            out.stores.push_back(node.current_store());
            out.traces.push_back(std::move(node.trace));
        }
    } catch (const SimError& e) {
        if (e.kind() != SimError::Kind::Ingestion)
            throw;
        out.ingestion_violation = true;
        out.status = SimStatus::Blocked;
    }
    return out;
}

namespace {

struct Mutation {
    enum class Kind : uint8_t { StoreInit, ScriptValue, ScriptBit, LocalStreamValue };
    Kind kind;
    std::size_t node = 0;
    std::string name;      // variable or local channel
    std::size_t index = 0; // script entry / stream position
    SizedValue value;
    int bit = 1;

    std::string describe(const std::vector<NodeSpec>& nodes) const {
        const std::string& id = nodes[node].program->node_id;
        switch (kind) {
        case Kind::StoreInit:
            return id + ".var " + name + " := " + render_base(value);
        case Kind::ScriptValue:
            return id + ".net[" + std::to_string(index) + "] val := " + render_base(value);
        case Kind::ScriptBit:
            return id + ".net[" + std::to_string(index) + "] bit := " + std::to_string(bit);
        case Kind::LocalStreamValue:
            return id + ".local " + name + "[" + std::to_string(index) +
                   "] := " + render_base(value);
        }
        return "?";
    }
};

uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t x = a + 0x9e3779b97f4a7c15ull * (b + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

SizedValue resample(const SizedValue& old, std::mt19937_64& rng) {
    if (old.is_int()) {
        std::uniform_int_distribution<int64_t> dist(-1000000, 1000000);
        return SizedValue(dist(rng), old.size());
    }
    std::uniform_int_distribution<uint64_t> len_dist(0, old.size());
    uint64_t len = len_dist(rng);
    std::uniform_int_distribution<int> ch_dist('a', 'z');
    std::string s;
    for (uint64_t i = 0; i < len; ++i)
        s += static_cast<char>(ch_dist(rng));
    return SizedValue(std::move(s), old.size());
}

// Secrets an adversary at `adv` cannot see: store bases above the level,
// script values on channels whose value label is unobservable, mode bits
// on channels whose mode label is unobservable, and local stream contents
// on unobservable local channels. Sizes, channels and order stay fixed.
std::vector<Mutation> propose_mutations(const Scenario& scenario, const Lattice& lat,
                                        const Lambda& lambda, const std::string& adv,
                                        std::mt19937_64& rng) {
    std::vector<Mutation> picked;
    std::bernoulli_distribution flip(0.5);
    for (std::size_t n = 0; n < scenario.nodes.size(); ++n) {
        const NodeSpec& spec = scenario.nodes[n];
        for (const auto& v : spec.program->globals) {
            if (lat.leq(v.level, adv) || !flip(rng))
                continue;
            SizedValue current = v.init ? *v.init : default_value(v.sort);
            auto it = spec.store_overrides.find(v.name);
            if (it != spec.store_overrides.end())
                current = it->second;
            picked.push_back({Mutation::Kind::StoreInit, n, v.name, 0, resample(current, rng), 1});
        }
        for (std::size_t i = 0; i < spec.script.net.size(); ++i) {
            const NetScriptEntry& entry = spec.script.net[i];
            auto ch = lambda.find(entry.channel);
            if (ch == lambda.end())
                continue;
            if (!lat.leq(ch->second.value_level, adv) && flip(rng))
                picked.push_back({Mutation::Kind::ScriptValue, n, entry.channel, i,
                                  resample(entry.value, rng), entry.bit});
            if (!lat.leq(ch->second.mode_level, adv) && flip(rng))
                picked.push_back(
                    {Mutation::Kind::ScriptBit, n, entry.channel, i, entry.value, 1 - entry.bit});
        }
        for (const auto& l : spec.program->locals) {
            if (lat.leq(l.level, adv))
                continue;
            auto stream = spec.script.local.find(l.name);
            if (stream == spec.script.local.end())
                continue;
            for (std::size_t i = 0; i < stream->second.size(); ++i) {
                if (!stream->second[i] || !flip(rng))
                    continue; // presence pattern stays fixed
                picked.push_back({Mutation::Kind::LocalStreamValue, n, l.name, i,
                                  resample(*stream->second[i], rng), 1});
            }
        }
    }
    return picked;
}

Scenario apply_mutations(const Scenario& base, const std::vector<Mutation>& mutations) {
    Scenario out = base;
    for (const auto& m : mutations) {
        NodeSpec& spec = out.nodes[m.node];
        switch (m.kind) {
        case Mutation::Kind::StoreInit:
            spec.store_overrides[m.name] = m.value;
            break;
        case Mutation::Kind::ScriptValue:
            spec.script.net[m.index].value = m.value;
            break;
        case Mutation::Kind::ScriptBit:
            spec.script.net[m.index].bit = m.bit;
            break;
        case Mutation::Kind::LocalStreamValue:
            spec.script.local[m.name][m.index] = m.value;
            break;
        }
    }
    return out;
}

struct PairVerdict {
    bool valid = true;       // mutant strategy stayed well-formed
    bool equivalent = true;
    std::string difference;
};

PairVerdict compare_runs(const RunOutcome& base, const RunOutcome& mut, const Lattice& lat,
                         const Lambda& lambda, const std::string& adv) {
    PairVerdict v;
    if (mut.ingestion_violation) {
        v.valid = false;
        return v;
    }
    if (base.status != mut.status) {
        v.equivalent = false;
        v.difference = std::string("terminal status ") + sim_status_name(base.status) +
                       " vs " + sim_status_name(mut.status);
        return v;
    }
    for (std::size_t i = 0; i < base.traces.size(); ++i) {
        if (!equiv_trace(lat, lambda, adv, base.traces[i], mut.traces[i])) {
            v.equivalent = false;
            v.difference = "trace of node " + base.node_ids[i] + " (lengths " +
                           std::to_string(base.traces[i].size()) + " vs " +
                           std::to_string(mut.traces[i].size()) + ")";
            return v;
        }
    }
    return v;
}

} // namespace

NiReport ni_differential_test(const Scenario& scenario, const Lattice& lat,
                              const Lambda& lambda, const std::string& adv, uint64_t trials,
                              uint64_t seed) {
    if (!scenario.unchecked) {
        for (const auto& spec : scenario.nodes) {
            auto errors = check_program(lat, *spec.program, lambda);
            if (!errors.empty())
                throw SimError(SimError::Kind::Setup, spec.program->node_id +
                                                          " does not typecheck: " +
                                                          errors.front().what());
        }
    }

    NiReport report;
    report.trials_requested = trials;
    const RunOutcome base = run_scenario(scenario, lat, lambda, /*unsafe=*/false);
    if (base.ingestion_violation)
        throw SimError(SimError::Kind::Setup, "base scenario strategy is ill-formed");

    auto test_mutations = [&](const std::vector<Mutation>& muts) -> PairVerdict {
        RunOutcome mut = run_scenario(apply_mutations(scenario, muts), lat, lambda, false);
        return compare_runs(base, mut, lat, lambda, adv);
    };

    for (uint64_t trial = 0; trial < trials; ++trial) {
        std::vector<Mutation> muts;
        PairVerdict verdict;
        uint64_t attempt = 0;
        const uint64_t max_attempts = 32;
        for (; attempt < max_attempts; ++attempt) {
            std::mt19937_64 rng(mix(seed, mix(trial, attempt)));
            muts = propose_mutations(scenario, lat, lambda, adv, rng);
            verdict = test_mutations(muts);
            if (verdict.valid)
                break;
        }
        report.trials_run += 1;
        if (!verdict.valid) {
            NiTrial t;
            t.seed = mix(seed, mix(trial, attempt));
            t.valid = false;
            t.difference = "no well-formed mutation found within attempt budget";
            report.trials.push_back(t);
            report.failures.push_back(std::move(t));
            continue;
        }
        if (verdict.equivalent) {
            report.passes += 1;
            NiTrial t;
            t.seed = mix(seed, mix(trial, attempt));
            report.trials.push_back(std::move(t));
            continue;
        }
        // Shrink the failing mutation set one element at a time.
        bool shrunk = true;
        while (shrunk && muts.size() > 1) {
            shrunk = false;
            for (std::size_t i = 0; i < muts.size(); ++i) {
                std::vector<Mutation> candidate = muts;
                candidate.erase(candidate.begin() + static_cast<std::ptrdiff_t>(i));
                PairVerdict v = test_mutations(candidate);
                if (v.valid && !v.equivalent) {
                    muts = std::move(candidate);
                    verdict = v;
                    shrunk = true;
                    break;
                }
            }
        }
        NiTrial t;
        t.seed = mix(seed, mix(trial, attempt));
        t.equivalent = false;
        t.difference = verdict.difference;
        for (const auto& m : muts)
            t.minimized.push_back(m.describe(scenario.nodes));
        report.trials.push_back(t);
        report.failures.push_back(std::move(t));
    }
    return report;
}

bool OverheadReport::all_ok() const {
    return std::all_of(nodes.begin(), nodes.end(), [](const NodeOverhead& n) {
        return n.extension_ok && n.bound_ok && n.genuine_match;
    });
}

namespace {

// (channel, base) multisets of genuine events must coincide, sizes related
// by extension.
bool genuine_multiset_match(const Trace& t1, const Trace& t2) {
    auto project = [](const Trace& t) {
        std::vector<const TraceEvent*> genuine;
        for (const auto& ev : t)
            if (ev.bit == 1)
                genuine.push_back(&ev);
        std::stable_sort(genuine.begin(), genuine.end(),
                         [](const TraceEvent* a, const TraceEvent* b) {
                             if (a->channel != b->channel)
                                 return a->channel < b->channel;
                             return render_base(a->value) < render_base(b->value);
                         });
        return genuine;
    };
    auto g1 = project(t1);
    auto g2 = project(t2);
    if (g1.size() != g2.size())
        return false;
    for (std::size_t i = 0; i < g1.size(); ++i) {
        if (g1[i]->channel != g2[i]->channel || !g1[i]->value.same_base(g2[i]->value) ||
            g1[i]->value.size() > g2[i]->value.size())
            return false;
    }
    return true;
}

} // namespace

NodeOverhead compare_overhead(const std::string& node, const Trace& unsafe_trace,
                              const Trace& safe_trace, uint64_t q_max) {
    NodeOverhead out;
    out.node = node;
    out.unsafe_len = unsafe_trace.size();
    out.safe_len = safe_trace.size();
    out.extension_ok = phantom_extension_check(unsafe_trace, safe_trace);
    out.bound_ok = out.safe_len <= out.unsafe_len * (1 + q_max);
    out.genuine_match = genuine_multiset_match(unsafe_trace, safe_trace);
    return out;
}

OverheadReport overhead_check(const Scenario& unsafe_scenario, const Scenario& safe_scenario,
                              const Lattice& lat, const Lambda& lambda) {
    if (unsafe_scenario.nodes.size() != safe_scenario.nodes.size())
        throw SimError(SimError::Kind::Setup, "scenario node sets differ");
    for (std::size_t i = 0; i < unsafe_scenario.nodes.size(); ++i) {
        const auto& w1 = unsafe_scenario.nodes[i].script;
        const auto& w2 = safe_scenario.nodes[i].script;
        for (const auto& entry : w1.net)
            if (entry.bit != 1)
                throw SimError(SimError::Kind::Setup,
                               "suppressed-run scripts must be genuine-only");
        std::vector<const NetScriptEntry*> genuine2;
        for (const auto& entry : w2.net)
            if (entry.bit == 1)
                genuine2.push_back(&entry);
        if (genuine2.size() != w1.net.size())
            throw SimError(SimError::Kind::Setup,
                           "extended script changes the genuine message count");
        for (std::size_t k = 0; k < genuine2.size(); ++k) {
            const NetScriptEntry& a = w1.net[k];
            const NetScriptEntry& b = *genuine2[k];
            if (a.channel != b.channel || !a.value.same_base(b.value) ||
                a.value.size() > b.value.size())
                throw SimError(SimError::Kind::Setup,
                               "extended script is not a strategy extension at entry " +
                                   std::to_string(k));
        }
        if (w1.local != w2.local)
            throw SimError(SimError::Kind::Setup, "local streams differ between script pairs");
    }
    if (!unsafe_scenario.unchecked) {
        for (const auto& spec : unsafe_scenario.nodes) {
            auto errors = check_program(lat, *spec.program, lambda);
            if (!errors.empty())
                throw SimError(SimError::Kind::Setup, spec.program->node_id +
                                                          " does not typecheck: " +
                                                          errors.front().what());
        }
    }

    RunOutcome unsafe_run = run_scenario(unsafe_scenario, lat, lambda, /*unsafe=*/true);
    RunOutcome safe_run = run_scenario(safe_scenario, lat, lambda, /*unsafe=*/false);
    if (unsafe_run.ingestion_violation || safe_run.ingestion_violation)
        throw SimError(SimError::Kind::Ingestion, "overhead run rejected a strategy message");

    OverheadReport report;
    report.q_max = max_potential(lambda);
    for (std::size_t i = 0; i < unsafe_run.traces.size(); ++i)
        report.nodes.push_back(compare_overhead(unsafe_run.node_ids[i], unsafe_run.traces[i],
                                                safe_run.traces[i], report.q_max));
    return report;
}

} // namespace oblivio
