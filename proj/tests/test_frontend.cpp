#include "doctest.h"

#include <filesystem>
#include <random>

#include "oblivio/parser.hpp"

using namespace oblivio;

TEST_CASE("parses a node with a variable and an annotated handler") {
    Program p = parse_program("ALICE\n"
                              "var max_bid : int@H;\n"
                              "TO_LEAD@H $1 (bid : int@H) { skip; }\n");
    CHECK(p.node_id == "ALICE");
    REQUIRE(p.globals.size() == 1);
    CHECK(p.globals[0].name == "max_bid");
    CHECK(p.globals[0].sort == Sort::Int);
    CHECK(p.globals[0].level == "H");
    REQUIRE(p.handlers.size() == 1);
    CHECK(p.handlers[0].name == "TO_LEAD");
    CHECK(p.handlers[0].mode_level == "H");
    CHECK(p.handlers[0].potential == 1);
    CHECK(p.handlers[0].param_name == "bid");
    CHECK(p.handlers[0].body->kind == Command::Kind::Skip);
}

TEST_CASE("potential defaults to zero when omitted") {
    Program p = parse_program("N\nH@L (x : int@L) { skip; }");
    CHECK(p.handlers[0].potential == 0);
}

TEST_CASE("internal command forms are not surface syntax") {
    CHECK_THROWS_AS(parse_program("N\nH@L (x : int@L) { x pop; }"), ParseError);
    CHECK_THROWS_AS(parse_program("N\nH@L (x : int@L) { stop; }"), ParseError);
    CHECK_THROWS_AS(parse_program("N\nH@L (x : int@L) { pop = 1; }"), ParseError);
}

TEST_CASE("duplicate names and unknown labels are positioned errors") {
    CHECK_THROWS_AS(parse_program("N\nvar x : int@L;\nvar x : int@H;\nH@L (y : int@L) { skip; }"),
                    ParseError);
    CHECK_THROWS_AS(parse_program("N\nH@L (x : int@L) { skip; }\nH@L (x : int@L) { skip; }"),
                    ParseError);
    CHECK_THROWS_AS(parse_program("N\nH@SECRET (x : int@L) { skip; }"), ParseError);
    try {
        parse_program("N\nvar v : int@M;\nH@L (x : int@L) { skip; }");
        FAIL("expected unknown label");
    } catch (const ParseError& e) {
        CHECK(e.pos().line == 2);
        CHECK(e.message().find("unknown label") != std::string::npos);
    }
    // M is fine once declared
    Program p = parse_program("N\nlattice L < M, M < H;\nvar v : int@M;\nH@L (x : int@L) { skip; }");
    CHECK(p.lattice_pairs.size() == 2);
    CHECK(program_lattice(p).lub("M", "H") == "H");
}

TEST_CASE("declared guards, sends and loops parse into the expected shapes") {
    Program p = parse_program(
        "N\n"
        "local channel IN : string@H;\n"
        "var acc : string@H = \"\";\n"
        "var n : int@L = 3;\n"
        "H@L (x : string@H) {\n"
        "    while n > 0 do {\n"
        "        acc ?= input(IN, 16);\n"
        "        n = n - 1;\n"
        "    }\n"
        "    oblif x != \"\" then send(M/OUT, acc ^ x); else output(IN, x);\n"
        "}\n");
    const Command& body = *p.handlers[0].body;
    REQUIRE(body.kind == Command::Kind::Seq);
    CHECK(body.c1->kind == Command::Kind::While);
    CHECK(body.c2->kind == Command::Kind::OblivIf);
    CHECK(body.c2->c1->channel == "M/OUT");
    CHECK(body.c2->c1->expr->op == BinOp::Concat);
}

TEST_CASE("pretty-print composed with parse is the identity on the AST") {
    namespace fs = std::filesystem;
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(CORPUS_DIR)) {
        if (entry.path().extension() != ".oblivio")
            continue;
        ++seen;
        Program once = parse_program(read_file(entry.path().string()));
        std::string printed = pretty_print(once);
        Program twice = parse_program(printed);
        CHECK_MESSAGE(program_equal(once, twice), entry.path().filename().string());
        CHECK(pretty_print(twice) == printed);
    }
    CHECK(seen >= 10);
}

TEST_CASE("parsing is total on arbitrary bytes") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> len(0, 200);
    std::uniform_int_distribution<int> byte(1, 255);
    const std::string seeds =
        "N var : int@H $ { } ( ) send while oblif ?= \" lattice < , ; // /* */ 12345";
    for (int trial = 0; trial < 3000; ++trial) {
        std::string src;
        if (trial % 2 == 0) {
            int n = len(rng);
            for (int i = 0; i < n; ++i)
                src += static_cast<char>(byte(rng));
        } else {
            // token soup is likelier to reach deep parser states
            std::uniform_int_distribution<std::size_t> at(0, seeds.size() - 1);
            int n = len(rng);
            for (int i = 0; i < n; ++i)
                src += seeds[at(rng)];
        }
        try {
            (void)parse_program(src);
        } catch (const ParseError&) {
            // positioned rejection is the expected outcome
        }
    }
}

TEST_CASE("strategy scripts parse and validate") {
    StrategyScript genuine =
        parse_strategy(R"({"net":[{"ch":"ALICE/TO_LEAD","bit":1,"val":100,"size":8}],"local":{}})");
    REQUIRE(genuine.net.size() == 1);
    CHECK(genuine.net[0].bit == 1);
    CHECK(genuine.net[0].channel == "ALICE/TO_LEAD");
    CHECK(genuine.net[0].value == SizedValue(100, 8));

    StrategyScript dummy =
        parse_strategy(R"({"net":[{"ch":"ALICE/TO_LEAD","bit":0,"val":0,"size":8}],"local":{}})");
    CHECK(dummy.net[0].bit == 0);

    CHECK_THROWS_AS(
        parse_strategy(R"({"net":[{"ch":"A/B","bit":1,"val":"abcd","size":2}],"local":{}})"),
        ParseError); // size below size_of(value)
    CHECK_THROWS_AS(
        parse_strategy(R"({"net":[{"ch":"A/B","bit":7,"val":1,"size":8}],"local":{}})"),
        ParseError); // unknown mode bit
    CHECK_THROWS_AS(parse_strategy(R"({"net":[{"bit":1}],"local":{}})"), ParseError);
    CHECK_THROWS_AS(parse_strategy("not json"), ParseError);

    StrategyScript locals = parse_strategy(
        R"({"net":[],"local":{"STDIN":[{"val":"hi","size":4},null,{"val":"x","size":1}]}})");
    REQUIRE(locals.local.count("STDIN") == 1);
    const auto& stream = locals.local.at("STDIN");
    REQUIRE(stream.size() == 3);
    CHECK(stream[0].has_value());
    CHECK(!stream[1].has_value());
    CHECK(stream[2]->size() == 1);
}
