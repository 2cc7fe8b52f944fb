#include "doctest.h"

#include <random>

#include "corpus_helpers.hpp"
#include "oblivio/harness.hpp"

using namespace oblivio;
using namespace oblivio::testing;

namespace {

Lambda small_lambda() {
    Lambda lambda;
    lambda["A/CH"] = {Sort::Int, "H", "H", 2};
    lambda["A/PUB"] = {Sort::Int, "L", "L", 0};
    lambda["A/STR"] = {Sort::String, "H", "H", 0};
    return lambda;
}

TraceEvent ev(Direction dir, const std::string& ch, uint64_t t, int bit, SizedValue v) {
    return {dir, ch, t, bit, std::move(v)};
}

} // namespace

TEST_CASE("trace potential folds genuine gains against dummy costs") {
    Lambda lambda = small_lambda();
    CHECK(trace_potential(lambda, {}) == 0);
    CHECK(trace_potential(lambda,
                          {ev(Direction::Received, "A/CH", 1, 1, SizedValue(0, 8))}) == 2);
    CHECK(!trace_potential(lambda, {ev(Direction::Received, "A/CH", 1, 0, SizedValue(0, 8))})
               .has_value()); // a lone dummy is ill-formed
    Trace mixed{ev(Direction::Received, "A/CH", 1, 1, SizedValue(0, 8)),
                ev(Direction::Sent, "A/PUB", 2, 1, SizedValue(0, 8)),
                ev(Direction::Observed, "A/CH", 3, 0, SizedValue(0, 8))};
    CHECK(trace_potential(lambda, mixed) == 1);
    CHECK_THROWS_AS(
        (void)trace_potential(lambda, {ev(Direction::Sent, "NO/WHERE", 1, 1, SizedValue(0, 8))}),
        SimError);
}

TEST_CASE("online strategy well-formedness reports each clause distinctly") {
    Lattice lat = Lattice::two_point();
    Lambda lambda = small_lambda();
    Trace empty;

    auto violation = wf_strategy_online(lat, lambda, empty,
                                        {"A/PUB", 0, 0, SizedValue(0, 8)});
    REQUIRE(violation.has_value());
    CHECK(violation->clause == WfViolation::Clause::DummyOnPublicMode);

    violation = wf_strategy_online(lat, lambda, empty, {"A/CH", 0, 0, SizedValue(0, 8)});
    REQUIRE(violation.has_value());
    CHECK(violation->clause == WfViolation::Clause::PotentialExhausted);

    Trace primed{ev(Direction::Received, "A/CH", 1, 1, SizedValue(0, 8)),
                 ev(Direction::Received, "A/CH", 2, 1, SizedValue(0, 8))};
    CHECK(!wf_strategy_online(lat, lambda, primed, {"A/CH", 0, 0, SizedValue(0, 8)})
               .has_value()); // potential 4 >= 1 + 2

    violation = wf_strategy_online(lat, lambda, empty, {"A/CH", 0, 1, SizedValue("s", 4)});
    REQUIRE(violation.has_value());
    CHECK(violation->clause == WfViolation::Clause::SortMismatch);

    violation = wf_strategy_online(lat, lambda, empty, {"X/Y", 0, 1, SizedValue(0, 8)});
    REQUIRE(violation.has_value());
    CHECK(violation->clause == WfViolation::Clause::UnknownChannel);

    CHECK(!wf_strategy_online(lat, lambda, empty, {"A/CH", 0, 1, SizedValue(0, 8)}).has_value());
}

TEST_CASE("trace equivalence masks exactly what the level cannot see") {
    Lattice lat = Lattice::two_point();
    Lambda lambda = small_lambda();
    Trace base{ev(Direction::Received, "A/CH", 5, 1, SizedValue(42, 8)),
               ev(Direction::Sent, "A/PUB", 9, 1, SizedValue(1, 8))};

    CHECK(equiv_trace(lat, lambda, "L", base, base));

    Trace secret_flip = base;
    secret_flip[0].bit = 0;
    secret_flip[0].value = SizedValue(-3, 8);
    CHECK(equiv_trace(lat, lambda, "L", base, secret_flip)); // H mode and value masked at L
    CHECK(!equiv_trace(lat, lambda, "H", base, secret_flip));

    Trace late = base;
    late[1].t = 10;
    CHECK(!equiv_trace(lat, lambda, "L", base, late)); // timestamps always compared

    Trace fat = base;
    fat[0].value = SizedValue(42, 12);
    CHECK(!equiv_trace(lat, lambda, "L", base, fat)); // sizes always compared

    Trace public_diff = base;
    public_diff[1].value = SizedValue(2, 8);
    CHECK(!equiv_trace(lat, lambda, "L", base, public_diff));

    CHECK(!equiv_trace(lat, lambda, "L", base, Trace{base[0]})); // lengths must match
}

TEST_CASE("trace equivalence is an equivalence relation") {
    Lattice lat = Lattice::two_point();
    Lambda lambda = small_lambda();
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int64_t> val(0, 3);
    std::uniform_int_distribution<int> chan(0, 1);
    auto random_trace = [&](std::size_t len) {
        Trace t;
        for (std::size_t i = 0; i < len; ++i) {
            const char* ch = chan(rng) ? "A/CH" : "A/PUB";
            t.push_back(ev(Direction::Sent, ch, i, coin(rng), SizedValue(val(rng), 8)));
        }
        return t;
    };
    for (int i = 0; i < 300; ++i) {
        Trace a = random_trace(4), b = random_trace(4), c = random_trace(4);
        for (std::string adv : {"L", "H"}) {
            CHECK(equiv_trace(lat, lambda, adv, a, a));
            CHECK(equiv_trace(lat, lambda, adv, a, b) == equiv_trace(lat, lambda, adv, b, a));
            if (equiv_trace(lat, lambda, adv, a, b) && equiv_trace(lat, lambda, adv, b, c))
                CHECK(equiv_trace(lat, lambda, adv, a, c));
        }
    }
}

TEST_CASE("consumer-state equivalence compares stores, streams and traces") {
    CorpusSet set = auction_set();
    SimContext ctx{set.lattice, set.lambda, false, false, true};
    SimResult base = run_simulation(auction_specs(set), ctx, 200'000);
    const SystemState& alice = base.node("ALICE");

    CHECK(equiv_state(set.lattice, set.lambda, "L", alice, alice));
    CHECK(equiv_state(set.lattice, set.lambda, "H", alice, alice));

    SimResult mutated = run_simulation(
        [&] {
            auto specs = auction_specs(set);
            specs[0].store_overrides["max_bid"] = SizedValue(-77, 8); // same size, new base
            return specs;
        }(),
        ctx, 200'000);
    const SystemState& alice2 = mutated.node("ALICE");
    CHECK(equiv_state(set.lattice, set.lambda, "L", alice, alice2));
    CHECK(!equiv_state(set.lattice, set.lambda, "H", alice, alice2));

    // a size difference is visible at every level
    SystemState resized = make_node(set.programs[0], {});
    SystemState resized2 = make_node(set.programs[0], {});
    resized2.store["max_bid"] = SizedValue(200, 16);
    CHECK(!equiv_state(set.lattice, set.lambda, "L", resized, resized2));

    StrategyScript kick;
    kick.net.push_back({"ALICE/TO_LEAD", 1, SizedValue(1, 8), true});
    SystemState producer_state = make_node(set.programs[0], kick);
    step_system(producer_state, ctx);
    CHECK_THROWS_AS((void)equiv_state(set.lattice, set.lambda, "L", producer_state, resized),
                    std::invalid_argument);
}

TEST_CASE("phantom extension skips dummies and allows padding growth") {
    SizedValue v(5, 8);
    Trace empty;
    Trace dummies{ev(Direction::Sent, "A/CH", 1, 0, v), ev(Direction::Sent, "A/CH", 2, 0, v)};
    CHECK(phantom_extension_check(empty, dummies));

    Trace lean{ev(Direction::Sent, "A/CH", 1, 1, SizedValue(5, 8))};
    Trace padded{ev(Direction::Sent, "A/CH", 9, 1, SizedValue(5, 12))};
    CHECK(phantom_extension_check(lean, padded)); // value extension, timestamps free

    Trace other{ev(Direction::Sent, "A/CH", 1, 1, SizedValue(6, 8))};
    CHECK(!phantom_extension_check(lean, other));

    CHECK(!phantom_extension_check(padded, lean));   // padding may not shrink
    CHECK(!phantom_extension_check(dummies, empty)); // the lean trace must be genuine-only
    Trace interleaved{dummies[0], lean[0], dummies[1]};
    CHECK(phantom_extension_check(lean, interleaved));
    CHECK(!phantom_extension_check(lean, empty)); // genuine events cannot vanish
}

TEST_CASE("overhead comparison flags synthetic bound violations") {
    SizedValue v(1, 8);
    Trace lean{ev(Direction::Sent, "A/CH", 1, 1, v)};
    Trace ok(5, ev(Direction::Sent, "A/CH", 2, 0, v));
    ok.insert(ok.begin(), lean[0]); // 1 genuine + 5 dummies = (1+5)*|lean|
    NodeOverhead verdict = compare_overhead("N", lean, ok, 5);
    CHECK(verdict.extension_ok);
    CHECK(verdict.bound_ok);
    CHECK(verdict.genuine_match);

    Trace too_long = ok;
    too_long.push_back(ev(Direction::Sent, "A/CH", 3, 0, v));
    verdict = compare_overhead("N", lean, too_long, 5);
    CHECK(verdict.extension_ok);
    CHECK(!verdict.bound_ok); // |tau2| = |tau1|*(1+q_max)+1

    Trace wrong_genuine = ok;
    wrong_genuine[0].value = SizedValue(2, 8);
    verdict = compare_overhead("N", lean, wrong_genuine, 5);
    CHECK(!verdict.extension_ok);
    CHECK(!verdict.genuine_match);
}

TEST_CASE("auction overhead stays within 1 + q_max with injected dummies") {
    CorpusSet set = auction_set();
    Scenario unsafe_scenario{auction_specs(set), 200'000, false};
    Scenario safe_scenario{auction_specs(set), 200'000, false};
    // pad the genuine kick-off and inject two dummies behind it
    auto& script = safe_scenario.nodes[3].script;
    script.net[0].value = SizedValue(0, 12);
    script.net.push_back({"AUCTIONHOUSE/ALICE_BID", 0, SizedValue(0, 8), true});
    script.net.push_back({"AUCTIONHOUSE/BOB_BID", 0, SizedValue(0, 8), true});

    OverheadReport report = overhead_check(unsafe_scenario, safe_scenario, set.lattice,
                                           set.lambda);
    CHECK(report.q_max == 4);
    CHECK(report.all_ok());
    bool some_slack = false;
    for (const auto& n : report.nodes) {
        CHECK(n.safe_len >= n.unsafe_len);
        some_slack = some_slack || n.safe_len > n.unsafe_len;
    }
    CHECK(some_slack); // the safe run really carries extra dummy traffic

    // reflexive pair on a dummy-free instance: one round means everyone is
    // outbid genuinely, so the standard and suppressing runs coincide
    Scenario one_round{auction_specs(set), 200'000, false};
    for (auto& spec : one_round.nodes)
        if (spec.program->node_id == "AUCTIONHOUSE")
            spec.store_overrides["round_counter"] = SizedValue(1, 8);
    OverheadReport same = overhead_check(one_round, one_round, set.lattice, set.lambda);
    CHECK(same.all_ok());
    for (const auto& n : same.nodes)
        CHECK(n.safe_len == n.unsafe_len);

    // script pairs violating strategy extension are rejected up front
    Scenario bad = safe_scenario;
    bad.nodes[3].script.net[0].value = SizedValue(1, 12); // genuine base changed
    CHECK_THROWS_AS(overhead_check(unsafe_scenario, bad, set.lattice, set.lambda), SimError);
}

TEST_CASE("mode-bit flips on secret-mode channels are unobservable below them") {
    CorpusSet set;
    Program p = parse_program("N\n"
                              "PING@H $1 (x : int@H) {\n"
                              "    oblif x > 0\n"
                              "    then send(OTHER/CH, x);\n"
                              "    else skip;\n"
                              "}\n");
    set.lattice = Lattice::two_point();
    set.lambda = build_lambda({p});
    set.lambda["OTHER/CH"] = ChannelType{Sort::Int, "H", "H", 0};
    set.programs.push_back(std::make_shared<Program>(std::move(p)));

    auto script_with = [](int third_bit) {
        StrategyScript s;
        s.net.push_back({"N/PING", 1, SizedValue(5, 8), true});
        s.net.push_back({"N/PING", 1, SizedValue(3, 8), true});
        // two genuine receptions accrue the potential the dummy needs
        s.net.push_back({"N/PING", third_bit, SizedValue(0, 8), true});
        return s;
    };
    Scenario base{{{set.programs[0], script_with(0), {}}}, 10'000, false};
    Scenario flipped{{{set.programs[0], script_with(1), {}}}, 10'000, false};
    RunOutcome a = run_scenario(base, set.lattice, set.lambda, false);
    RunOutcome b = run_scenario(flipped, set.lattice, set.lambda, false);
    REQUIRE(!a.ingestion_violation);
    REQUIRE(!b.ingestion_violation);
    CHECK(equiv_trace(set.lattice, set.lambda, "L", a.traces[0], b.traces[0]));
    CHECK(!equiv_trace(set.lattice, set.lambda, "H", a.traces[0], b.traces[0]));
}

TEST_CASE("equivalence masks by the declared lattice order, not by name") {
    Lattice lat = Lattice::from_pairs({{"L", "M"}, {"M", "H"}});
    Lambda lambda;
    lambda["A/MID"] = {Sort::Int, "M", "M", 0};
    lambda["A/TOP"] = {Sort::Int, "H", "H", 0};
    Trace t1{ev(Direction::Sent, "A/MID", 1, 1, SizedValue(1, 8)),
             ev(Direction::Sent, "A/TOP", 2, 1, SizedValue(2, 8))};
    Trace t2 = t1;
    t2[1].value = SizedValue(99, 8); // H payload differs
    CHECK(equiv_trace(lat, lambda, "M", t1, t2));
    CHECK(!equiv_trace(lat, lambda, "H", t1, t2));
    Trace t3 = t1;
    t3[0].value = SizedValue(7, 8); // M payload differs
    CHECK(!equiv_trace(lat, lambda, "M", t1, t3));
    CHECK(equiv_trace(lat, lambda, "L", t1, t3));
}

TEST_CASE("checked simulations never produce potential-ill-formed traces") {
    struct Case {
        CorpusSet set;
        std::vector<NodeSpec> specs;
        uint64_t budget;
    };
    std::vector<Case> cases;
    {
        CorpusSet set = auction_set();
        auto specs = auction_specs(set);
        cases.push_back({std::move(set), std::move(specs), 200'000});
    }
    {
        CorpusSet set = load_set({"exponential_alice.oblivio", "exponential_bob.oblivio"});
        auto specs = set.specs({"exponential_alice.strategy.json", ""});
        cases.push_back({std::move(set), std::move(specs), 50'000});
    }
    {
        CorpusSet set = load_set({"chat_alice.oblivio", "chat_bob.oblivio"});
        auto specs = set.specs({"chat_alice.strategy.json", "chat_bob.strategy.json"});
        cases.push_back({std::move(set), std::move(specs), 20'000});
    }
    for (auto& c : cases) {
        for (const auto& spec : c.specs)
            REQUIRE(check_program(c.set.lattice, *spec.program, c.set.lambda).empty());
        SimContext ctx{c.set.lattice, c.set.lambda, false, false, true};
        SimResult result = run_simulation(c.specs, ctx, c.budget);
        for (const auto& node : result.nodes) {
            auto q = trace_potential(c.set.lambda, node.trace);
            CHECK_MESSAGE(q.has_value(), node.program->node_id);
        }
    }
}

TEST_CASE("differential testing passes the auction and catches the leaky transfer") {
    CorpusSet auction = auction_set();
    Scenario scenario{auction_specs(auction), 200'000, false};
    for (std::string adv : {"L", "H"}) {
        NiReport report =
            ni_differential_test(scenario, auction.lattice, auction.lambda, adv, 10, 42);
        CHECK(report.trials_run == 10);
        CHECK_MESSAGE(report.all_passed(), "adv=", adv);
    }

    NiReport none = ni_differential_test(scenario, auction.lattice, auction.lambda, "L", 0, 1);
    CHECK(none.trials_run == 0);
    CHECK(none.all_passed());

    CorpusSet transfer = load_set({"transfer_bank.oblivio", "transfer_attacker.oblivio"});
    Scenario leaky{transfer.specs({"transfer_bank.strategy.json", ""}), 50'000, true};
    NiReport caught =
        ni_differential_test(leaky, transfer.lattice, transfer.lambda, "L", 40, 3);
    CHECK(!caught.all_passed());
    REQUIRE(!caught.failures.empty());
    CHECK(caught.failures.front().minimized.size() == 1); // shrunk to a single secret
}
