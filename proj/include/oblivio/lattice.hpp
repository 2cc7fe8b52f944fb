#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oblivio {

/// Error raised when a declared level order is not a lattice (cycle, no
/// unique bottom, or a pair without a least upper bound).
class LatticeError : public std::runtime_error {
  public:
    explicit LatticeError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Finite security lattice over named levels. The order is the
/// reflexive-transitive closure of the declared pairs; the bottom element
/// is the network level. The default lattice is {L, H} with L below H.
class Lattice {
  public:
    static Lattice two_point();

    /// Build from declared order pairs (lo, hi). Every name occurring in a
    /// pair becomes a level. Throws LatticeError if the closure has a cycle
    /// between distinct names, lacks a unique bottom, or some pair of
    /// levels has no least upper bound.
    static Lattice from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs);

    bool has_level(const std::string& name) const { return index_.count(name) != 0; }
    const std::vector<std::string>& levels() const { return names_; }
    const std::string& bottom() const { return names_[bottom_]; }
    bool is_bottom(const std::string& name) const { return id(name) == bottom_; }

    bool leq(const std::string& a, const std::string& b) const { return leq_[id(a)][id(b)]; }
    const std::string& lub(const std::string& a, const std::string& b) const {
        return names_[lub_[id(a)][id(b)]];
    }

  private:
    std::size_t id(const std::string& name) const;

    std::vector<std::string> names_;
    std::map<std::string, std::size_t> index_;
    std::vector<std::vector<bool>> leq_;
    std::vector<std::vector<std::size_t>> lub_;
    std::size_t bottom_ = 0;
};

} // namespace oblivio
