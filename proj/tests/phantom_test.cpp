#include "doctest.h"

#include "anomorph/deformation.hpp"
#include "anomorph/errors.hpp"
#include "anomorph/phantom.hpp"

#include "support.hpp"

#include <cstring>

using namespace anomorph;
using namespace testsup;

namespace {

long label_count(const RegionMask& m, int32_t label) {
    long n = 0;
    for (int32_t v : m.labels) n += (v == label);
    return n;
}

double folding_mass(const DeformationField& f) {
    Volume fold = folding_map(jacobian_determinant(f));
    double s = 0.0;
    for (long i = 0; i < fold.data.size(); ++i) s += fold.data[i];
    return s;
}

} // namespace

TEST_SUITE("phantom") {

TEST_CASE("same spec gives bit-identical phantoms") {
    PhantomSpec spec;
    spec.seed = 1234;
    spec.grid = 24;
    spec.severity = 0.6f;
    Phantom a = generate_phantom(spec);
    Phantom b = generate_phantom(spec);
    CHECK(std::memcmp(a.volume.data.data(), b.volume.data.data(),
                      (size_t)a.volume.data.size() * 4) == 0);
    CHECK(a.mask.labels == b.mask.labels);
    CHECK(std::memcmp(a.gt_field.data.data(), b.gt_field.data.data(),
                      (size_t)a.gt_field.data.size() * 4) == 0);

    PhantomSpec other = spec;
    other.seed = 1235;
    Phantom c = generate_phantom(other);
    CHECK(std::memcmp(a.volume.data.data(), c.volume.data.data(),
                      (size_t)a.volume.data.size() * 4) != 0);
}

TEST_CASE("severity zero is the healthy twin with an exactly zero field") {
    PhantomSpec spec;
    spec.seed = 77;
    spec.grid = 24;
    spec.severity = 0.0f;
    Phantom healthy = generate_phantom(spec);
    for (long i = 0; i < healthy.gt_field.data.size(); ++i)
        CHECK(healthy.gt_field.data[i] == 0.0f);

    // Anatomy draws do not depend on severity: away from the deformation
    // support the diseased twin matches the healthy one bit for bit.
    PhantomSpec sick = spec;
    sick.severity = 1.0f;
    Phantom p = generate_phantom(sick);
    long same = 0;
    for (long i = 0; i < p.volume.data.size(); ++i)
        same += (p.volume.data[i] == healthy.volume.data[i]);
    CHECK(same > p.volume.data.size() / 2);
    CHECK(same < p.volume.data.size()); // but the lesion did change something
}

TEST_CASE("intensities stay inside the unit interval with real foreground") {
    PhantomSpec spec;
    spec.seed = 5;
    spec.grid = 32;
    spec.severity = 0.8f;
    Phantom p = generate_phantom(spec);
    long bright = 0;
    for (long i = 0; i < p.volume.data.size(); ++i) {
        CHECK(p.volume.data[i] >= 0.0f);
        CHECK(p.volume.data[i] <= 1.0f);
        bright += (p.volume.data[i] > 0.3f);
    }
    CHECK(bright > p.volume.data.size() / 20);
}

TEST_CASE("mask uses the five-region legend and every label appears") {
    PhantomSpec spec;
    spec.seed = 9;
    spec.grid = 32;
    Phantom p = generate_phantom(spec);
    CHECK(p.mask.legend == phantom_legend());
    CHECK(phantom_legend().size() == 5);
    CHECK_NOTHROW(p.mask.validate());
    for (const auto& [label, name] : phantom_legend()) {
        CAPTURE(name);
        CHECK(label_count(p.mask, label) > 0);
    }
    CHECK(label_count(p.mask, 0) > 0);
}

TEST_CASE("atrophy shrinks the target region monotonically") {
    PhantomSpec spec;
    spec.seed = 31;
    spec.grid = 32;
    spec.target_region = "left_hippocampus";

    spec.severity = 0.0f;
    const long n0 = label_count(generate_phantom(spec).mask, 1);
    spec.severity = 0.5f;
    const long n5 = label_count(generate_phantom(spec).mask, 1);
    spec.severity = 1.0f;
    const long n10 = label_count(generate_phantom(spec).mask, 1);
    CHECK(n5 < n0);
    CHECK(n10 < n5);
}

TEST_CASE("the ground-truth field folds only past the critical severity") {
    PhantomSpec spec;
    spec.seed = 42;
    spec.grid = 32;

    spec.severity = 0.5f;
    CHECK(folding_mass(generate_phantom(spec).gt_field) == 0.0);
    spec.severity = 0.6f;
    CHECK(folding_mass(generate_phantom(spec).gt_field) == 0.0);
    spec.severity = 1.0f;
    CHECK(folding_mass(generate_phantom(spec).gt_field) > 0.0);
}

TEST_CASE("spec validation") {
    PhantomSpec spec;
    spec.grid = 8;
    CHECK_THROWS_AS(generate_phantom(spec), validation_error);
    spec.grid = 32;
    spec.severity = 1.5f;
    CHECK_THROWS_AS(generate_phantom(spec), validation_error);
    spec.severity = -0.1f;
    CHECK_THROWS_AS(generate_phantom(spec), validation_error);
    spec.severity = 0.5f;
    spec.variability = -1.0f;
    CHECK_THROWS_AS(generate_phantom(spec), validation_error);
    spec.variability = 1.0f;
    spec.target_region = "thalamus";
    CHECK_THROWS_WITH_AS(generate_phantom(spec),
                         doctest::Contains("known: left_hippocampus"),
                         validation_error);
}

} // TEST_SUITE
