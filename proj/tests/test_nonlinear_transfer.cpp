#include "doctest.h"

#include "fiberpert/link.hpp"
#include "fiberpert/nonlinear_transfer.hpp"
#include "support/oracles.hpp"

#include <cmath>

using namespace fiberpert;

namespace {

const double kBeta2 = ps2_per_km_to_beta2(-21.0);
const double kGamma = per_w_km_to_gamma(1.1);
const double kAlpha = db_per_km_to_alpha(0.2);

LinkSpec ssmf(int spans, double b0 = 0.0) {
    return make_homogeneous_link(spans, {100e3, kAlpha, kBeta2, kGamma}, Amplification::Lumped, b0);
}

LinkSpec lossless(double length) {
    return make_homogeneous_link(1, {length, 0.0, kBeta2, kGamma}, Amplification::Lossless);
}

// Direct quadrature of the defining integral with an unrelated rule.
cplx hnl_oracle(const LinkSpec& link, double omega) {
    cplx acc = 0.0;
    for (const auto& s : link.segments()) {
        acc += oracle::simpson(
            [&](double z) {
                const double g = log_power_profile(link, z);
                return std::exp(cplx(g, omega * accumulated_dispersion(link, z)));
            },
            s.z0, s.z0 + s.length, 1e-13 * s.length);
    }
    return acc / effective_length(link);
}

} // namespace

TEST_CASE("expm1 helpers are accurate near zero") {
    for (cplx x : {cplx(1e-9, 2e-9), cplx(-3e-5, 1e-6), cplx(0.0, 1e-4), cplx(0.3, -0.7), cplx(-5.0, 40.0)}) {
        const cplx ref = (std::exp(x) - 1.0) / x;
        const double tol = std::abs(x) < 1e-3 ? 1e-12 : 1e-14;
        if (std::abs(x) > 1e-2) CHECK(std::abs(expm1_ratio(x) - ref) <= tol * std::abs(ref));
        CHECK(std::abs(expm1_complex(x) / x - expm1_ratio(x)) <= 1e-14 * std::abs(expm1_ratio(x)));
    }
    CHECK(expm1_ratio(0.0) == cplx(1.0));
    CHECK(std::abs(expm1_ratio(cplx(1e-9, 0.0)) - (1.0 + 0.5e-9)) < 1e-16);
}

TEST_CASE("normalization at zero phase mismatch") {
    for (const LinkSpec& l : {ssmf(1), ssmf(4), lossless(21.71e3)}) {
        CHECK(hnl_closed_form(l, 0.0) == cplx(1.0));
        CHECK(NonlinearTransfer(l)(0.0) == cplx(1.0));
        CHECK(std::abs(hnl_quadrature(l, 0.0, 3e11) - 1.0) <= 1e-10);
        CHECK(std::abs(hnl_quadrature(l, 2e11, 0.0) - 1.0) <= 1e-10);
    }
}

TEST_CASE("argument symmetry and dependence on the product only") {
    const LinkSpec l = ssmf(2);
    const double u1 = 1.7e11, u2 = -0.9e11;
    const cplx a = hnl_quadrature(l, u1, u2);
    CHECK(std::abs(hnl_quadrature(l, u2, u1) - a) <= 1e-12);
    for (double c : {0.25, 3.0, -2.0}) CHECK(std::abs(hnl_quadrature(l, u1 * c, u2 / c) - a) <= 1e-10);
}

TEST_CASE("lossless single span has the sinc-like closed form") {
    const LinkSpec l = lossless(21.71e3);
    for (double om : {1e21, -4e21, 3e22, 2e23}) {
        const cplx x(0.0, om * kBeta2 * 21.71e3);
        const cplx ref = (std::exp(x) - 1.0) / x;
        CHECK(std::abs(hnl_closed_form(l, om) - ref) <= 1e-13);
    }
}

TEST_CASE("closed form, exact primitives and quadrature agree") {
    const double b0 = 1200e-24;
    for (const LinkSpec& l : {ssmf(1), ssmf(3, b0), lossless(21.71e3)}) {
        const NonlinearTransfer h(l);
        for (double om : {3e20, -2e21, 7e21, 5e22, -1.5e23}) {
            const cplx cf = hnl_closed_form(l, om);
            CHECK(std::abs(h(om) - cf) <= 1e-12);
            const cplx q = hnl_quadrature(l, om / 1e11, 1e11);
            CHECK(std::abs(q - cf) <= 1e-9);
        }
    }
}

TEST_CASE("quadrature matches an independent Simpson oracle") {
    LinkSpec het;
    het.spans = {{80e3, kAlpha, kBeta2, kGamma}, {50e3, db_per_km_to_alpha(0.25), ps2_per_km_to_beta2(-5.0), kGamma}};
    het.pre_dispersion = -300e-24;
    for (double om : {1e21, -6e21, 2.5e22}) {
        const cplx ref = hnl_oracle(het, om);
        CHECK(std::abs(hnl_quadrature(het, om / 1e11, 1e11) - ref) <= 1e-9);
        CHECK(std::abs(NonlinearTransfer(het)(om) - ref) <= 1e-9);
    }
    CHECK_THROWS(hnl_closed_form(het, 1e21));
}

TEST_CASE("coherent addition over identical spans") {
    // Per-span phase of exactly 2 pi makes every span contribute the same value.
    const LinkSpec one = ssmf(1);
    const LinkSpec ten = ssmf(10);
    const double om = 2 * M_PI / (std::abs(kBeta2) * 100e3);
    CHECK(std::abs(hnl_closed_form(ten, om) - hnl_closed_form(one, om)) <= 1e-12);
    const double off = 1.3 * om;
    CHECK(std::abs(hnl_closed_form(ten, off)) < std::abs(hnl_closed_form(one, off)));
}

TEST_CASE("quadrature reports failure instead of truncating") {
    CHECK_THROWS_AS(hnl_quadrature(ssmf(1), 1e14, 1e14, 1e-300), std::runtime_error);
}
