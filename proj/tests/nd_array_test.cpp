#include "doctest.h"

#include "anomorph/nd_array.hpp"

#include <limits>
#include <stdexcept>

using anomorph::NdArray;

TEST_SUITE("nd_array") {

TEST_CASE("construction and indexing") {
    NdArray a({2, 3, 4});
    CHECK(a.rank() == 3);
    CHECK(a.size() == 24);
    CHECK(a.dim(1) == 3);
    for (long i = 0; i < a.size(); ++i) CHECK(a[i] == 0.0f);
    a[5] = 2.5f;
    CHECK(a[5] == 2.5f);
    CHECK(a.shape_str() == "(2,3,4)");
}

TEST_CASE("from_data validates count") {
    CHECK_NOTHROW(NdArray::from_data({2, 2}, {1, 2, 3, 4}));
    CHECK_THROWS(NdArray::from_data({2, 2}, {1, 2, 3}));
}

TEST_CASE("add_inplace requires matching shape") {
    NdArray a({2, 2}), b({2, 2}), c({4});
    b.fill(1.5f);
    a.add_inplace(b);
    CHECK(a[3] == 1.5f);
    CHECK_THROWS(a.add_inplace(c));
}

TEST_CASE("all_finite detects nan and inf") {
    NdArray a({3});
    CHECK(a.all_finite());
    a[1] = std::numeric_limits<float>::quiet_NaN();
    CHECK_FALSE(a.all_finite());
    a[1] = std::numeric_limits<float>::infinity();
    CHECK_FALSE(a.all_finite());
}

}
