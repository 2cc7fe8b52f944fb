#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace oblivio {

/// One executed-command record. The logical cost of an event is
/// 1 + size, so the clock derived from a history depends on the public
/// sizes of the values used but never on their contents.
struct HistEvent {
    enum class Kind : uint8_t {
        Skp,  // skip
        Asn,  // assignment, size of assigned value
        Casn, // oblivious assignment, padded size
        In,   // local input, post-padding size
        Out,  // send, payload size
        LOut, // local output, payload size (same cost shape as In)
        Br,   // branch, guard size + chosen index
        Obr,  // oblivious branch, guard size
        Whl,  // loop unfold
        Pop,  // bit-stack pop
        Hl,   // handler dispatch, message size + message timestamp
        Ret,  // handler return
    };

    Kind kind;
    std::string name;      // variable or channel, empty for sizeless events
    uint64_t size = 0;     // z; 0 for sizeless events
    int branch = 0;        // Br: chosen branch index (1 or 2)
    uint64_t msg_time = 0; // Hl: timestamp of the dispatched message

    friend bool operator==(const HistEvent&, const HistEvent&) = default;
};

uint64_t event_cost(const HistEvent& ev);

const char* hist_event_kind_name(HistEvent::Kind kind);

/// Append-only run history with the running logical clock. The clock is
/// strictly increasing under append because every event costs at least 1.
class History {
  public:
    void append(HistEvent ev);

    const std::vector<HistEvent>& events() const { return events_; }
    uint64_t clock() const { return clock_; }
    std::size_t size() const { return events_.size(); }

    friend bool operator==(const History& a, const History& b) {
        return a.events_ == b.events_;
    }

  private:
    std::vector<HistEvent> events_;
    uint64_t clock_ = 0;
};

/// Logical time of a history: the sum of event costs so far.
inline uint64_t time_of(const History& h) {
    return h.clock();
}

} // namespace oblivio
