#include "oblivio/value.hpp"

#include <algorithm>

namespace oblivio {

namespace {
constexpr uint64_t kIntSize = 8; // fixed size of all integers

// Byte of the conceptual padded buffer backing a sized string: the secret
// content for i < length, zero filler beyond it.
inline uint64_t buffer_byte(const std::string& s, uint64_t i) {
    return i < s.size() ? static_cast<unsigned char>(s[i]) : 0;
}

// Branchless i < j on non-negative machine integers.
inline uint64_t lt_bit(uint64_t i, uint64_t j) {
    return static_cast<uint64_t>(i < j);
}
} // namespace

const char* sort_name(Sort s) {
    return s == Sort::Int ? "int" : "string";
}

const char* binop_symbol(BinOp op) {
    switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Eq: return "=";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    case BinOp::Concat: return "^";
    }
    return "?";
}

uint64_t size_of(int64_t) {
    return kIntSize;
}

uint64_t size_of(const std::string& v) {
    return v.size();
}

SizedValue::SizedValue(int64_t v, uint64_t z) : base_(v), size_(z) {
    if (z < kIntSize)
        throw ValueError("int value needs size >= 8, got " + std::to_string(z));
}

SizedValue::SizedValue(std::string v, uint64_t z) : base_(std::move(v)), size_(z) {
    if (size_of(std::get<std::string>(base_)) > z)
        throw ValueError("string of length " +
                         std::to_string(std::get<std::string>(base_).size()) +
                         " does not fit size " + std::to_string(z));
}

SizedValue SizedValue::of_string(std::string v) {
    uint64_t z = size_of(v);
    return SizedValue(std::move(v), z);
}

bool SizedValue::truthy() const {
    if (is_int())
        return as_int() != 0;
    throw ValueError("guard value must be an int");
}

std::string render_base(const SizedValue& v) {
    return v.is_int() ? std::to_string(v.as_int()) : v.as_string();
}

SizedValue pad(const SizedValue& v, uint64_t new_size) {
    if (new_size < v.size())
        throw ValueError("cannot pad value of size " + std::to_string(v.size()) +
                         " down to " + std::to_string(new_size));
    if (v.is_int())
        return SizedValue(v.as_int(), new_size);
    return SizedValue(v.as_string(), new_size);
}

int64_t safe_eq(const SizedValue& a, const SizedValue& b, CtCounters& ct) {
    const uint64_t z = std::max(a.size(), b.size());
    const SizedValue s1 = pad(a, z);
    const SizedValue s2 = pad(b, z);
    const uint64_t n1 = s1.as_string().size();
    const uint64_t n2 = s2.as_string().size();
    uint64_t x = n1 ^ n2;
    for (uint64_t i = 0; i < z; ++i) {
        // 0/1 bit times the byte xor acts as the full-width mask.
        uint64_t in_both = lt_bit(i, std::min(n1, n2));
        x |= in_both * (buffer_byte(s1.as_string(), i) ^ buffer_byte(s2.as_string(), i));
        ct.loop_iterations += 1;
        ct.byte_ops += 1;
    }
    return x == 0 ? 1 : 0;
}

SizedValue safe_select(int64_t bit, const SizedValue& a, const SizedValue& c, CtCounters& ct) {
    if (a.sort() != c.sort())
        throw ValueError("select operands must share a sort");
    const uint64_t b = static_cast<uint64_t>(bit != 0);
    if (a.is_int()) {
        uint64_t i = static_cast<uint64_t>(a.as_int());
        uint64_t j = static_cast<uint64_t>(c.as_int());
        uint64_t x = ((1 - b) * i) | (b * j);
        ct.byte_ops += 1;
        return SizedValue(static_cast<int64_t>(x), std::max(a.size(), c.size()));
    }
    const uint64_t z = std::max(a.size(), c.size());
    const SizedValue s1 = pad(a, z);
    const SizedValue s2 = pad(c, z);
    std::string buf(static_cast<std::size_t>(z), '\0');
    for (uint64_t i = 0; i < z; ++i) {
        uint64_t byte = ((1 - b) * buffer_byte(s1.as_string(), i)) |
                        (b * buffer_byte(s2.as_string(), i));
        buf[static_cast<std::size_t>(i)] = static_cast<char>(byte);
        ct.loop_iterations += 1;
        ct.byte_ops += 1;
    }
    uint64_t len = ((1 - b) * s1.as_string().size()) | (b * s2.as_string().size());
    buf.resize(static_cast<std::size_t>(len));
    return SizedValue(std::move(buf), z);
}

SizedValue safe_concat(const SizedValue& a, const SizedValue& b, CtCounters& ct) {
    const uint64_t z1 = a.size();
    const uint64_t z2 = b.size();
    const uint64_t z = z1 + z2;
    const std::string& s1 = a.as_string();
    const std::string& s2 = b.as_string();
    const uint64_t n1 = s1.size();
    std::string buf(static_cast<std::size_t>(z), '\0');
    for (uint64_t i = 0; i < z; ++i) {
        uint64_t acc = 0;
        for (uint64_t j = 0; j < z1; ++j) {
            uint64_t sel = static_cast<uint64_t>(i == j) & lt_bit(j, n1);
            acc |= sel * buffer_byte(s1, j);
            ct.loop_iterations += 1;
            ct.byte_ops += 1;
        }
        for (uint64_t j = 0; j < z2; ++j) {
            uint64_t sel = static_cast<uint64_t>(i == j + n1);
            acc |= sel * buffer_byte(s2, j);
            ct.loop_iterations += 1;
            ct.byte_ops += 1;
        }
        buf[static_cast<std::size_t>(i)] = static_cast<char>(acc);
    }
    buf.resize(static_cast<std::size_t>(s1.size() + s2.size()));
    return SizedValue(std::move(buf), z);
}

bool binop_signature(BinOp op, Sort lhs, Sort rhs, Sort& result) {
    if (lhs != rhs)
        return false;
    switch (op) {
    case BinOp::Add:
    case BinOp::Sub:
    case BinOp::Mul:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge:
    case BinOp::And:
    case BinOp::Or:
        if (lhs != Sort::Int)
            return false;
        result = Sort::Int;
        return true;
    case BinOp::Eq:
    case BinOp::Ne:
        result = Sort::Int;
        return true;
    case BinOp::Concat:
        if (lhs != Sort::String)
            return false;
        result = Sort::String;
        return true;
    }
    return false;
}

SizedValue apply_binop(BinOp op, const SizedValue& a, const SizedValue& b, CtCounters& ct) {
    Sort result_sort;
    if (!binop_signature(op, a.sort(), b.sort(), result_sort))
        throw ValueError(std::string("operator ") + binop_symbol(op) + " is not defined on " +
                         sort_name(a.sort()) + " x " + sort_name(b.sort()));

    if (a.is_int()) {
        // Wrapping two's-complement 64-bit arithmetic.
        uint64_t x = static_cast<uint64_t>(a.as_int());
        uint64_t y = static_cast<uint64_t>(b.as_int());
        int64_t r = 0;
        switch (op) {
        case BinOp::Add: r = static_cast<int64_t>(x + y); break;
        case BinOp::Sub: r = static_cast<int64_t>(x - y); break;
        case BinOp::Mul: r = static_cast<int64_t>(x * y); break;
        case BinOp::Eq: r = a.as_int() == b.as_int(); break;
        case BinOp::Ne: r = a.as_int() != b.as_int(); break;
        case BinOp::Lt: r = a.as_int() < b.as_int(); break;
        case BinOp::Le: r = a.as_int() <= b.as_int(); break;
        case BinOp::Gt: r = a.as_int() > b.as_int(); break;
        case BinOp::Ge: r = a.as_int() >= b.as_int(); break;
        case BinOp::And: r = (a.as_int() != 0) && (b.as_int() != 0); break;
        case BinOp::Or: r = (a.as_int() != 0) || (b.as_int() != 0); break;
        case BinOp::Concat: break; // unreachable, signature rejects
        }
        return SizedValue(r, kIntSize);
    }

    switch (op) {
    case BinOp::Eq:
        return SizedValue(safe_eq(a, b, ct), kIntSize);
    case BinOp::Ne:
        return SizedValue(1 - safe_eq(a, b, ct), kIntSize);
    case BinOp::Concat:
        return safe_concat(a, b, ct);
    default:
        break;
    }
    throw ValueError("unreachable string operator"); // defended above
}

} // namespace oblivio
