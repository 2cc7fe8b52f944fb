#include "oblivio/parser.hpp"

#include "json.hpp"

namespace oblivio {

namespace {

using nlohmann::json;

SizedValue parse_value(const json& record) {
    if (!record.contains("val") || !record.contains("size"))
        throw ParseError({0, 0}, "strategy record needs 'val' and 'size' fields");
    const json& val = record.at("val");
    const json& size = record.at("size");
    if (!size.is_number_unsigned())
        throw ParseError({0, 0}, "strategy 'size' must be a non-negative integer");
    uint64_t z = size.get<uint64_t>();
    try {
        if (val.is_number_integer())
            return SizedValue(val.get<int64_t>(), z);
        if (val.is_string())
            return SizedValue(val.get<std::string>(), z);
    } catch (const ValueError& e) {
        throw ParseError({0, 0}, std::string("ill-formed strategy value: ") + e.what());
    }
    throw ParseError({0, 0}, "strategy 'val' must be an int or a string");
}

} // namespace

StrategyScript parse_strategy(std::string_view json_text) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded())
        throw ParseError({0, 0}, "strategy file is not valid JSON");
    if (!root.is_object())
        throw ParseError({0, 0}, "strategy file must be a JSON object");

    StrategyScript script;
    if (root.contains("net")) {
        if (!root.at("net").is_array())
            throw ParseError({0, 0}, "'net' must be an array of message records");
        for (const json& record : root.at("net")) {
            if (!record.is_object() || !record.contains("ch") || !record.contains("bit"))
                throw ParseError({0, 0}, "malformed network record");
            NetScriptEntry entry;
            entry.channel = record.at("ch").get<std::string>();
            if (!record.at("bit").is_number_integer())
                throw ParseError({0, 0}, "mode bit must be an integer");
            int64_t bit = record.at("bit").get<int64_t>();
            if (bit != 0 && bit != 1)
                throw ParseError({0, 0}, "unknown mode bit " + std::to_string(bit));
            entry.bit = static_cast<int>(bit);
            entry.value = parse_value(record);
            if (record.contains("immediate"))
                entry.immediate = record.at("immediate").get<bool>();
            script.net.push_back(std::move(entry));
        }
    }
    if (root.contains("local")) {
        if (!root.at("local").is_object())
            throw ParseError({0, 0}, "'local' must map channel names to streams");
        for (const auto& [name, stream] : root.at("local").items()) {
            if (!stream.is_array())
                throw ParseError({0, 0}, "local stream for '" + name + "' must be an array");
            std::vector<std::optional<SizedValue>> values;
            for (const json& item : stream) {
                if (item.is_null()) {
                    values.push_back(std::nullopt); // no value available
                    continue;
                }
                values.push_back(parse_value(item));
            }
            script.local.emplace(name, std::move(values));
        }
    }
    return script;
}

} // namespace oblivio
