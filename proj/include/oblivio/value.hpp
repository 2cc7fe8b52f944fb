#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

namespace oblivio {

enum class Sort : uint8_t { Int, String };

const char* sort_name(Sort s);

/// Binary operators of the expression grammar. There is no division.
enum class BinOp : uint8_t {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Concat,
};

const char* binop_symbol(BinOp op);

/// Operation counters for the constant-time primitives. For fixed public
/// sizes (z1, z2) the counters must not depend on the string contents.
struct CtCounters {
    uint64_t loop_iterations = 0;
    uint64_t byte_ops = 0;

    friend bool operator==(const CtCounters&, const CtCounters&) = default;
};

class ValueError : public std::runtime_error {
  public:
    explicit ValueError(const std::string& msg) : std::runtime_error(msg) {}
};

uint64_t size_of(int64_t v);
uint64_t size_of(const std::string& v);

/// A base value paired with its public size bound z, size_of(base) <= z.
/// The base value (including a string's actual length) is secret; only z
/// is observable.
class SizedValue {
  public:
    SizedValue() : base_(int64_t{0}), size_(size_of(int64_t{0})) {}
    SizedValue(int64_t v, uint64_t z);
    SizedValue(std::string v, uint64_t z);

    static SizedValue of_int(int64_t v) { return SizedValue(v, size_of(v)); }
    static SizedValue of_string(std::string v);

    Sort sort() const { return std::holds_alternative<int64_t>(base_) ? Sort::Int : Sort::String; }
    bool is_int() const { return sort() == Sort::Int; }
    int64_t as_int() const { return std::get<int64_t>(base_); }
    const std::string& as_string() const { return std::get<std::string>(base_); }
    uint64_t size() const { return size_; }

    /// True iff the guard is considered taken: nonzero int.
    bool truthy() const;

    bool same_base(const SizedValue& other) const { return base_ == other.base_; }

    friend bool operator==(const SizedValue&, const SizedValue&) = default;

  private:
    std::variant<int64_t, std::string> base_;
    uint64_t size_;
};

std::string render_base(const SizedValue& v);

/// Returns the same base value with size z'; z' >= v.size() required.
SizedValue pad(const SizedValue& v, uint64_t new_size);

/// Data-oblivious string comparison; 1 iff equal up to padding. The inputs
/// are padded to a common public size internally.
int64_t safe_eq(const SizedValue& a, const SizedValue& b, CtCounters& ct);

/// Data-oblivious selection: bit 0 picks a, bit 1 picks c. Operands must
/// share a sort; strings are padded to a common size internally.
SizedValue safe_select(int64_t bit, const SizedValue& a, const SizedValue& c, CtCounters& ct);

/// Data-oblivious concatenation: base a.base ++ b.base, size z1 + z2.
SizedValue safe_concat(const SizedValue& a, const SizedValue& b, CtCounters& ct);

bool binop_signature(BinOp op, Sort lhs, Sort rhs, Sort& result);

/// Total binary operation on well-formed values; the result is well-formed
/// with the size given by the size-op table (ints 8, concat z1+z2).
SizedValue apply_binop(BinOp op, const SizedValue& a, const SizedValue& b, CtCounters& ct);

} // namespace oblivio
