#include "doctest.h"

#include "anomorph/errors.hpp"
#include "anomorph/metrics.hpp"

#include "support.hpp"

#include <algorithm>
#include <cmath>

using namespace anomorph;
using namespace testsup;

TEST_SUITE("metrics") {

TEST_CASE("auroc hand cases") {
    // Perfect separation.
    CHECK(auroc({0.1f, 0.2f, 0.8f, 0.9f}, {0, 0, 1, 1}) == doctest::Approx(1.0));
    // Perfectly inverted.
    CHECK(auroc({0.9f, 0.8f, 0.2f, 0.1f}, {0, 0, 1, 1}) == doctest::Approx(0.0));
    // All scores tied: chance.
    CHECK(auroc({0.5f, 0.5f, 0.5f, 0.5f}, {0, 1, 0, 1}) == doctest::Approx(0.5));
    // One swapped pair out of four: 0.75.
    CHECK(auroc({0.1f, 0.5f, 0.4f, 0.9f}, {0, 0, 1, 1}) == doctest::Approx(0.75));
}

TEST_CASE("auroc agrees with the exhaustive pair count on all small cohorts") {
    // Every label pattern and several score draws for n <= 12.
    Rng rng(404);
    for (int n = 2; n <= 12; n += 2) {
        for (int rep = 0; rep < 6; ++rep) {
            std::vector<float> scores((size_t)n);
            std::vector<int> labels((size_t)n);
            int pos = 0;
            for (int i = 0; i < n; ++i) {
                // Coarse quantization provokes plenty of ties.
                scores[(size_t)i] = (float)rng.uniform_int(5) / 4.0f;
                labels[(size_t)i] = rng.uniform_int(2);
                pos += labels[(size_t)i];
            }
            if (pos == 0 || pos == n) labels[0] = 1 - labels[0];
            const double want = auroc_oracle(scores, labels);
            const double got = auroc(scores, labels);
            CHECK(std::abs(got - want) < 1e-12);
        }
    }
}

TEST_CASE("auroc is invariant under strictly monotone transforms") {
    // Lattice scores keep value gaps far above f32 resolution, so the
    // transforms below cannot merge distinct scores (existing ties map to
    // ties, which is the invariance under test).
    Rng rng(405);
    std::vector<float> scores(40);
    std::vector<int> labels(40);
    for (size_t i = 0; i < scores.size(); ++i) {
        scores[i] = (float)rng.uniform_int(100) / 50.0f;
        labels[i] = rng.uniform_int(2);
    }
    labels[0] = 0;
    labels[1] = 1;
    const double base = auroc(scores, labels);

    std::vector<float> exped(scores.size()), shifted(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) {
        exped[i] = std::exp(3.0f * scores[i]);
        shifted[i] = 100.0f + scores[i];
    }
    CHECK(auroc(exped, labels) == doctest::Approx(base).epsilon(1e-12));
    CHECK(auroc(shifted, labels) == doctest::Approx(base).epsilon(1e-12));

    // Flipping scores complements the area.
    std::vector<float> neg(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) neg[i] = -scores[i];
    CHECK(auroc(neg, labels) == doctest::Approx(1.0 - base).epsilon(1e-12));
}

TEST_CASE("auroc input validation") {
    CHECK_THROWS_AS(auroc({0.1f, 0.2f}, {0, 0}), validation_error);   // one class
    CHECK_THROWS_AS(auroc({0.1f, 0.2f}, {1, 1}), validation_error);
    CHECK_THROWS_AS(auroc({0.1f}, {0, 1}), validation_error);         // size mismatch
    CHECK_THROWS_AS(auroc({}, {}), validation_error);                 // empty
    CHECK_THROWS_AS(auroc({0.1f, 0.2f}, {0, 2}), validation_error);   // non-binary
    CHECK_THROWS_AS(auroc({std::nanf(""), 0.2f}, {0, 1}), validation_error);
}

TEST_CASE("mae hand values") {
    NdArray a({1, 1, 4});
    NdArray b({1, 1, 4});
    const float av[] = {0.0f, 1.0f, 2.0f, 3.0f};
    const float bv[] = {1.0f, 1.0f, 0.0f, 7.0f};
    for (int i = 0; i < 4; ++i) {
        a.data()[i] = av[i];
        b.data()[i] = bv[i];
    }
    Volume va(a), vb(b);
    CHECK(mae(va, vb) == doctest::Approx((1.0 + 0.0 + 2.0 + 4.0) / 4.0).epsilon(1e-7));
    CHECK(mae(va, va) == 0.0);
    CHECK_THROWS_AS(mae(va, Volume(NdArray({1, 1, 3}))), validation_error);
}

TEST_CASE("ssim basics") {
    Rng rng(406);
    Volume x(random_array({8, 8, 8}, rng, 0.0f, 1.0f));
    CHECK(ssim(x, x) == doctest::Approx(1.0).epsilon(1e-6));

    Volume y(random_array({8, 8, 8}, rng, 0.0f, 1.0f));
    const double xy = ssim(x, y);
    CHECK(xy < 1.0);
    CHECK(xy >= -1.0);
    CHECK(ssim(y, x) == doctest::Approx(xy).epsilon(1e-12)); // symmetric

    // A small constant shift barely hurts; independent noise hurts a lot.
    NdArray sh(x.data.shape());
    for (long i = 0; i < x.data.size(); ++i) sh.data()[i] = x.data[i] + 0.02f;
    Volume shifted(std::move(sh));
    CHECK(ssim(x, shifted) > xy);
    CHECK_THROWS_AS(ssim(x, Volume(NdArray({2, 2, 2}))), validation_error);
}

} // TEST_SUITE
