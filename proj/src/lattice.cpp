#include "oblivio/lattice.hpp"

#include <algorithm>

namespace oblivio {

std::size_t Lattice::id(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        throw LatticeError("unknown security level '" + name + "'");
    return it->second;
}

Lattice Lattice::two_point() {
    return from_pairs({{"L", "H"}});
}

Lattice Lattice::from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
    Lattice lat;
    auto intern = [&lat](const std::string& n) {
        auto [it, fresh] = lat.index_.try_emplace(n, lat.names_.size());
        if (fresh)
            lat.names_.push_back(n);
        return it->second;
    };
    for (const auto& [lo, hi] : pairs) {
        intern(lo);
        intern(hi);
    }
    const std::size_t n = lat.names_.size();
    if (n == 0)
        throw LatticeError("empty lattice declaration");

    lat.leq_.assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
        lat.leq_[i][i] = true;
    for (const auto& [lo, hi] : pairs)
        lat.leq_[lat.index_[lo]][lat.index_[hi]] = true;

    // Warshall transitive closure.
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (lat.leq_[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (lat.leq_[k][j])
                        lat.leq_[i][j] = true;

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (lat.leq_[i][j] && lat.leq_[j][i])
                throw LatticeError("cycle between levels '" + lat.names_[i] + "' and '" +
                                   lat.names_[j] + "'");

    // Unique bottom: the single level below all others.
    std::vector<std::size_t> minima;
    for (std::size_t i = 0; i < n; ++i) {
        bool below_all = true;
        for (std::size_t j = 0; j < n; ++j)
            below_all = below_all && lat.leq_[i][j];
        if (below_all)
            minima.push_back(i);
    }
    if (minima.size() != 1)
        throw LatticeError("lattice has no unique bottom element");
    lat.bottom_ = minima[0];

    // Join table; every pair must have a least upper bound.
    lat.lub_.assign(n, std::vector<std::size_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<std::size_t> ubs;
            for (std::size_t k = 0; k < n; ++k)
                if (lat.leq_[i][k] && lat.leq_[j][k])
                    ubs.push_back(k);
            auto least = ubs.end();
            for (auto it = ubs.begin(); it != ubs.end(); ++it) {
                bool below_rest = true;
                for (std::size_t u : ubs)
                    below_rest = below_rest && lat.leq_[*it][u];
                if (below_rest) {
                    least = it;
                    break;
                }
            }
            if (least == ubs.end())
                throw LatticeError("levels '" + lat.names_[i] + "' and '" + lat.names_[j] +
                                   "' have no least upper bound");
            lat.lub_[i][j] = *least;
        }
    }
    return lat;
}

} // namespace oblivio
