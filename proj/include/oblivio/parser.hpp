#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oblivio/ast.hpp"
#include "oblivio/lattice.hpp"

namespace oblivio {

class ParseError : public std::runtime_error {
  public:
    ParseError(SourcePos pos, const std::string& message)
        : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " +
                             message),
          pos_(pos), message_(message) {}

    SourcePos pos() const { return pos_; }
    const std::string& message() const { return message_; }

  private:
    SourcePos pos_;
    std::string message_;
};

/// Parse one node's source file. Throws ParseError on malformed input,
/// duplicate handler/variable/channel names, or labels outside the
/// program's security lattice. When `lattice_override` is given, labels are
/// validated against it and any in-file lattice declaration must be
/// consistent with it.
Program parse_program(std::string_view source, const Lattice* lattice_override = nullptr);

/// The security lattice a single program declares ({L, H} when the program
/// has no lattice header).
Lattice program_lattice(const Program& p);

/// Merge the lattice declarations of several programs into one lattice.
/// Programs without a declaration contribute the default L < H pair.
Lattice merge_lattices(const std::vector<Program>& programs);

/// One scripted incoming network message. `immediate` entries (the
/// default) are consumed ahead of queued inter-node deliveries; deferred
/// entries wait until the delivery queue is empty.
struct NetScriptEntry {
    std::string channel;
    int bit = 1;
    SizedValue value;
    bool immediate = true;
};

/// Scripted realization of a network strategy plus the local-channel
/// streams; parsed from a .strategy.json file.
struct StrategyScript {
    std::vector<NetScriptEntry> net;
    std::map<std::string, std::vector<std::optional<SizedValue>>> local;
};

StrategyScript parse_strategy(std::string_view json_text);

std::string read_file(const std::string& path);

} // namespace oblivio
