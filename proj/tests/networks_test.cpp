#include "doctest.h"

#include "anomorph/checkpoint.hpp"
#include "anomorph/errors.hpp"
#include "anomorph/networks.hpp"
#include "anomorph/ops.hpp"

#include "support.hpp"

#include <set>

using namespace anomorph;
using namespace testsup;

namespace {

ArchConfig tiny_arch() {
    ArchConfig a;
    a.levels = 2;
    a.base_channels = 4;
    a.latent_channels = 6;
    a.disc_levels = 2;
    a.disc_base = 4;
    a.deformer_hidden = 3;
    return a;
}

} // namespace

TEST_SUITE("networks") {

TEST_CASE("encoder, decoder and deformer shapes line up") {
    ArchConfig a = tiny_arch();
    ModelSet m = build_models(a, 5, 10.0f, 0.01f);
    Rng rng(5);
    NdArray xv = random_array({2, 1, 8, 8, 8}, rng, 0.0f, 1.0f);
    Tensor x = Tensor::constant(xv);

    Tensor z = encode(m.ae, x);
    CHECK(z.value().shape() == std::vector<int>{2, 6, 2, 2, 2});

    DecodeResult dr = decode(m.ae, z);
    CHECK(dr.recon.value().shape() == std::vector<int>{2, 1, 8, 8, 8});
    CHECK(dr.features.value().shape() == std::vector<int>{2, 4, 8, 8, 8});
    for (long i = 0; i < dr.recon.value().size(); ++i) {
        CHECK(dr.recon.value().data()[i] > 0.0f);
        CHECK(dr.recon.value().data()[i] < 1.0f);
    }

    DecodeResult rr = reconstruct(m.ae, x);
    CHECK(rr.recon.value().shape() == std::vector<int>{2, 1, 8, 8, 8});

    Tensor logits = discriminate(m.disc, x);
    CHECK(logits.value().shape() == std::vector<int>{2, 1, 2, 2, 2});

    Tensor field = estimate_deformation(m.deformer_constrained, dr.features, dr.recon,
                                        x, a.slope);
    CHECK(field.value().shape() == std::vector<int>{2, 3, 8, 8, 8});
}

TEST_CASE("a fresh deformer head emits the exact zero field") {
    ArchConfig a = tiny_arch();
    ModelSet m = build_models(a, 11, 10.0f, 0.01f);
    Rng rng(11);
    NdArray xv = random_array({1, 1, 8, 8, 8}, rng, 0.0f, 1.0f);
    Tensor x = Tensor::constant(xv);
    DecodeResult dr = reconstruct(m.ae, x);
    for (const DeformerHead* h : {&m.deformer_constrained, &m.deformer_unconstrained}) {
        Tensor field = estimate_deformation(*h, dr.features, dr.recon, x, a.slope);
        for (long i = 0; i < field.value().size(); ++i)
            CHECK(field.value().data()[i] == 0.0f);
    }
}

TEST_CASE("input extents must be divisible by the downsampling factor") {
    ArchConfig a = tiny_arch();
    ModelSet m = build_models(a, 3, 10.0f, 0.01f);
    NdArray bad({1, 1, 6, 8, 8}); // 6 not divisible by 4
    bad.fill(0.5f);
    CHECK_THROWS_AS(encode(m.ae, Tensor::constant(bad)), validation_error);
}

TEST_CASE("seeded init is reproducible and seed-sensitive") {
    ArchConfig a = tiny_arch();
    ModelSet m1 = build_models(a, 42, 10.0f, 0.01f);
    ModelSet m2 = build_models(a, 42, 10.0f, 0.01f);
    ModelSet m3 = build_models(a, 43, 10.0f, 0.01f);
    CHECK(params_digest(m1.all_params()) == params_digest(m2.all_params()));
    CHECK(params_digest(m1.all_params()) != params_digest(m3.all_params()));
}

TEST_CASE("parameter groups are disjoint and named") {
    ArchConfig a = tiny_arch();
    ModelSet m = build_models(a, 1, 10.0f, 0.01f);
    auto ae = m.ae_params();
    auto disc = m.disc_params();
    auto def = m.deformer_params();
    auto all = m.all_params();
    CHECK(all.size() == ae.size() + disc.size() + def.size());
    std::set<Parameter*> seen;
    std::set<std::string> names;
    for (Parameter* p : all) {
        CHECK(seen.insert(p).second);
        CHECK(names.insert(p->name).second);
        CHECK(!p->name.empty());
    }
    // Both heads contribute, and betas differ.
    CHECK(m.deformer_constrained.beta == 10.0f);
    CHECK(m.deformer_unconstrained.beta == 0.01f);
}

TEST_CASE("arch config validation") {
    ArchConfig a = tiny_arch();
    CHECK_NOTHROW(a.validate());
    ArchConfig b = a;
    b.levels = 0;
    CHECK_THROWS_AS(b.validate(), validation_error);
    b = a;
    b.base_channels = 0;
    CHECK_THROWS_AS(b.validate(), validation_error);
    b = a;
    b.latent_channels = -1;
    CHECK_THROWS_AS(b.validate(), validation_error);
    b = a;
    b.slope = -0.5f;
    CHECK_THROWS_AS(b.validate(), validation_error);
    b = a;
    b.disc_levels = 0;
    CHECK_THROWS_AS(b.validate(), validation_error);
    b = a;
    b.deformer_hidden = 0;
    CHECK_THROWS_AS(b.validate(), validation_error);
}

} // TEST_SUITE
