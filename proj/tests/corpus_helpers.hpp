#pragma once

#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

#include "oblivio/netsim.hpp"
#include "oblivio/parser.hpp"
#include "oblivio/typecheck.hpp"

namespace oblivio::testing {

inline std::string corpus_path(const std::string& name) {
    return std::string(CORPUS_DIR) + "/" + name;
}

inline Program load_program(const std::string& name) {
    return parse_program(read_file(corpus_path(name)));
}

inline StrategyScript load_strategy(const std::string& name) {
    return parse_strategy(read_file(corpus_path(name)));
}

struct CorpusSet {
    std::vector<std::shared_ptr<const Program>> programs;
    Lattice lattice = Lattice::two_point();
    Lambda lambda;

    std::vector<NodeSpec> specs(std::initializer_list<std::string> strategy_names = {}) const {
        std::vector<NodeSpec> out;
        std::size_t i = 0;
        for (const auto& p : programs) {
            NodeSpec spec;
            spec.program = p;
            out.push_back(std::move(spec));
            ++i;
        }
        i = 0;
        for (const auto& s : strategy_names) {
            if (!s.empty())
                out[i].script = load_strategy(s);
            ++i;
        }
        return out;
    }
};

inline CorpusSet load_set(std::initializer_list<std::string> names) {
    CorpusSet set;
    std::vector<Program> parsed;
    for (const auto& name : names)
        parsed.push_back(load_program(name));
    set.lattice = merge_lattices(parsed);
    set.lambda = build_lambda(parsed);
    for (auto& p : parsed)
        set.programs.push_back(std::make_shared<Program>(std::move(p)));
    return set;
}

inline CorpusSet auction_set() {
    return load_set({"auction_alice.oblivio", "auction_bob.oblivio", "auction_timer.oblivio",
                     "auction_server.oblivio"});
}

inline std::vector<NodeSpec> auction_specs(const CorpusSet& set) {
    return set.specs({"", "", "", "auction_server.strategy.json"});
}

} // namespace oblivio::testing
