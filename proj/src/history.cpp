#include "oblivio/history.hpp"

namespace oblivio {

uint64_t event_cost(const HistEvent& ev) {
    return 1 + ev.size;
}

const char* hist_event_kind_name(HistEvent::Kind kind) {
    switch (kind) {
    case HistEvent::Kind::Skp: return "skp";
    case HistEvent::Kind::Asn: return "asn";
    case HistEvent::Kind::Casn: return "casn";
    case HistEvent::Kind::In: return "in";
    case HistEvent::Kind::Out: return "out";
    case HistEvent::Kind::LOut: return "lout";
    case HistEvent::Kind::Br: return "br";
    case HistEvent::Kind::Obr: return "obr";
    case HistEvent::Kind::Whl: return "whl";
    case HistEvent::Kind::Pop: return "pop";
    case HistEvent::Kind::Hl: return "hl";
    case HistEvent::Kind::Ret: return "ret";
    }
    return "?";
}

void History::append(HistEvent ev) {
    clock_ += event_cost(ev);
    events_.push_back(std::move(ev));
}

} // namespace oblivio
