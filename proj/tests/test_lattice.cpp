#include "doctest.h"

#include "oblivio/lattice.hpp"

using namespace oblivio;

TEST_CASE("two-point lattice orders L below H") {
    Lattice lat = Lattice::two_point();
    CHECK(lat.bottom() == "L");
    CHECK(lat.leq("L", "H"));
    CHECK(lat.leq("L", "L"));
    CHECK(lat.leq("H", "H"));
    CHECK(!lat.leq("H", "L"));
    CHECK(lat.lub("L", "H") == "H");
    CHECK(lat.lub("L", "L") == "L");
}

TEST_CASE("declared chain and diamond lattices") {
    Lattice chain = Lattice::from_pairs({{"L", "M"}, {"M", "H"}});
    CHECK(chain.bottom() == "L");
    CHECK(chain.leq("L", "H")); // transitive closure
    CHECK(chain.lub("M", "H") == "H");

    Lattice diamond =
        Lattice::from_pairs({{"B", "X"}, {"B", "Y"}, {"X", "T"}, {"Y", "T"}});
    CHECK(diamond.bottom() == "B");
    CHECK(diamond.lub("X", "Y") == "T");
    CHECK(diamond.lub("B", "X") == "X");
}

TEST_CASE("degenerate declarations are rejected") {
    CHECK_THROWS_AS(Lattice::from_pairs({{"A", "B"}, {"B", "A"}}), LatticeError); // cycle
    CHECK_THROWS_AS(Lattice::from_pairs({{"A", "C"}, {"B", "C"}}), LatticeError); // two minima
    // no join for the two tops
    CHECK_THROWS_AS(Lattice::from_pairs({{"L", "H"}, {"L", "M"}}), LatticeError);
    CHECK_THROWS(Lattice::two_point().leq("L", "Z")); // unknown level
}

TEST_CASE("lattice laws hold on every declared level") {
    for (const Lattice& lat :
         {Lattice::two_point(), Lattice::from_pairs({{"L", "M"}, {"M", "H"}}),
          Lattice::from_pairs({{"B", "X"}, {"B", "Y"}, {"X", "T"}, {"Y", "T"}})}) {
        const auto& ls = lat.levels();
        for (const auto& a : ls) {
            CHECK(lat.leq(lat.bottom(), a));
            CHECK(lat.lub(a, a) == a);            // idempotent
            CHECK(lat.lub(lat.bottom(), a) == a); // bottom is identity
            for (const auto& b : ls) {
                CHECK(lat.lub(a, b) == lat.lub(b, a)); // commutative
                CHECK(lat.leq(a, b) == (lat.lub(a, b) == b));
                if (lat.leq(a, b) && lat.leq(b, a))
                    CHECK(a == b); // antisymmetric
                for (const auto& c : ls)
                    CHECK(lat.lub(lat.lub(a, b), c) == lat.lub(a, lat.lub(b, c)));
            }
        }
    }
}
