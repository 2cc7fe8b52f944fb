#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oblivio/netsim.hpp"

namespace oblivio {

/// Trace potential fold: genuine messages add the channel's annotated
/// potential, dummies cost one. nullopt = ill-formed (a dummy arrived at
/// potential zero). Throws SimError on channels missing from Lambda.
std::optional<uint64_t> trace_potential(const Lambda& lambda, const Trace& trace);

struct WfViolation {
    enum class Clause : uint8_t { UnknownChannel, SortMismatch, SizeBound, DummyOnPublicMode, PotentialExhausted };
    Clause clause;
    std::string detail;
};

/// Online well-formedness of the next strategy message against the
/// running trace; nullopt = ok.
std::optional<WfViolation> wf_strategy_online(const Lattice& lat, const Lambda& lambda,
                                              const Trace& trace, const QueuedMessage& msg);

/// Pointwise trace equivalence at the adversary level: channel, direction,
/// timestamp and size always agree; bits agree when the mode label is
/// observable, values when the value label is.
bool equiv_trace(const Lattice& lat, const Lambda& lambda, const std::string& adv,
                 const Trace& t1, const Trace& t2);

/// Consumer-state equivalence: store (sizes always, bases up to level),
/// local streams up to level, traces. Both states must be consumer-phase
/// with the same program; throws std::invalid_argument otherwise.
bool equiv_state(const Lattice& lat, const Lambda& lambda, const std::string& adv,
                 const SystemState& s1, const SystemState& s2);

/// tau2 is tau1 with dummy events interleaved and genuine values possibly
/// more padded (greedy matching; timestamps unconstrained).
bool phantom_extension_check(const Trace& t1, const Trace& t2);

struct Scenario {
    std::vector<NodeSpec> nodes;
    uint64_t budget = 1'000'000;
    bool unchecked = false; // skip type checking (for deliberately leaky programs)
};

struct RunOutcome {
    SimStatus status;
    bool ingestion_violation = false;
    std::vector<std::string> node_ids;
    std::vector<Trace> traces;
    std::vector<Store> stores;
};

/// Run a scenario under the standard (or suppressing) semantics and
/// project what the harness compares.
RunOutcome run_scenario(const Scenario& scenario, const Lattice& lat, const Lambda& lambda,
                        bool unsafe, bool monitor = false);

struct NiTrial {
    uint64_t seed = 0;
    bool equivalent = true;
    bool valid = true;      // false: mutation produced an ill-formed strategy
    std::string difference; // first differing component, empty when equivalent
    std::vector<std::string> minimized; // minimized mutation descriptions
};

struct NiReport {
    uint64_t trials_requested = 0;
    uint64_t trials_run = 0;
    uint64_t passes = 0;
    std::vector<NiTrial> trials; // one record per trial, replayable by seed
    std::vector<NiTrial> failures;
    bool all_passed() const { return failures.empty(); }
};

/// Differential noninterference test: mutate secrets above the adversary
/// level (store bases, script values, mode bits on unobservable channels),
/// run base and mutant, and require trace equivalence at the level plus
/// matching terminal status. A failing trial carries a minimized mutation
/// set.
NiReport ni_differential_test(const Scenario& scenario, const Lattice& lat,
                              const Lambda& lambda, const std::string& adv, uint64_t trials,
                              uint64_t seed);

struct NodeOverhead {
    std::string node;
    bool extension_ok = false;
    bool bound_ok = false;
    bool genuine_match = false;
    std::size_t unsafe_len = 0;
    std::size_t safe_len = 0;
};

struct OverheadReport {
    uint64_t q_max = 0;
    std::vector<NodeOverhead> nodes;
    bool all_ok() const;
};

/// One node's overhead verdict on a pair of traces: extension relation,
/// the length bound |tau2| <= |tau1| * (1 + q_max), and genuine-event
/// multiset agreement up to value extension.
NodeOverhead compare_overhead(const std::string& node, const Trace& unsafe_trace,
                              const Trace& safe_trace, uint64_t q_max);

/// Overhead-bound check: run genuine-only scripts under the suppressing
/// semantics and extended scripts under the standard semantics; per node,
/// assert the phantom-extension relation, the length bound
/// |tau2| <= |tau1| * (1 + q_max), and genuine-event multiset agreement up
/// to value extension. Script pairs must satisfy strategy extension
/// (checked; throws SimError otherwise).
OverheadReport overhead_check(const Scenario& unsafe_scenario, const Scenario& safe_scenario,
                              const Lattice& lat, const Lambda& lambda);

} // namespace oblivio
