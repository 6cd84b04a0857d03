#include "doctest.h"

#include "fiberpert/fft.hpp"
#include "fiberpert/ssfm.hpp"
#include "fiberpert/txrx.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <filesystem>

using namespace fiberpert;

namespace {

const double kBeta2 = ps2_per_km_to_beta2(-21.0);
const double kGamma = per_w_km_to_gamma(1.1);
const double kAlpha = db_per_km_to_alpha(0.2);

FieldGrid test_field(std::size_t n_sym, double power_dbm, unsigned seed, std::size_t os = 8) {
    const auto a = generate_symbols({64}, n_sym, seed);
    return modulate(a, PulseSpec::from_power(dbm_to_watt(power_dbm), 64e9, 0.2), 64e9, os);
}

double rms_rel(const FieldGrid& a, const FieldGrid& b) {
    double d = 0.0, s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += (a.samples[i] - b.samples[i]).norm2();
        s += b.samples[i].norm2();
    }
    return std::sqrt(d / s);
}

double energy(const FieldGrid& f) { return f.mean_power() * static_cast<double>(f.size()); }

} // namespace

TEST_CASE("nonlinear sub-step is a pointwise phase") {
    FieldGrid u = test_field(64, 5.0, 1);
    const FieldGrid u0 = u;
    nonlinear_step(u, kGamma, 0.0);
    CHECK(u.samples == u0.samples);
    nonlinear_step(u, kGamma, 2.5e3);
    for (std::size_t i = 0; i < u.size(); ++i) {
        CHECK(std::abs(u.samples[i].norm2() - u0.samples[i].norm2()) <= 1e-14 * std::max(1e-3, u0.samples[i].norm2()));
        const cplx want = u0.samples[i].x * std::polar(1.0, -8.0 / 9.0 * kGamma * 2.5e3 * u0.samples[i].norm2());
        CHECK(std::abs(u.samples[i].x - want) <= 1e-15);
    }
}

TEST_CASE("linear sub-step scales by the gain at zero frequency") {
    std::vector<cplx> spec(16, cplx(1.0, 0.5));
    linear_step(spec, 1e12, std::log(4.0), -1e-24);
    CHECK(std::abs(spec[0] - 2.0 * cplx(1.0, 0.5)) <= 1e-15);
    CHECK(std::abs(spec[8] - 2.0 * cplx(1.0, 0.5)) <= 1e-15);
    CHECK(std::abs(std::abs(spec[3]) - 2.0 * std::abs(cplx(1.0, 0.5))) <= 1e-14);
    std::vector<cplx> odd(5);
    CHECK_THROWS(linear_step(odd, 1e12, 0.0, 0.0));
}

TEST_CASE("zero-dispersion propagation matches the analytic phase rotation") {
    const FieldGrid u0 = test_field(256, 8.0, 2);
    for (bool lossy : {false, true}) {
        const LinkSpec link = lossy ? make_homogeneous_link(2, {80e3, kAlpha, 0.0, kGamma}, Amplification::Lumped)
                                    : make_homogeneous_link(1, {21.71e3, 0.0, 0.0, kGamma}, Amplification::Lossless);
        PropagationStats st;
        const FieldGrid u1 = propagate(u0, link, {}, &st);
        const double leff = effective_length(link);
        FieldGrid ref = u0;
        for (auto& v : ref.samples) v *= std::polar(1.0, -8.0 / 9.0 * kGamma * leff * v.norm2());
        CHECK(rms_rel(u1, ref) <= 1e-10);
        CHECK(st.steps > 10u);
        CHECK(st.max_phase <= 3.5e-4 * (1 + 1e-12));
        CHECK(u1.z == link.total_length());
    }
}

TEST_CASE("linear propagation equals the channel transfer function") {
    const FieldGrid u0 = test_field(256, 0.0, 3);
    LinkSpec link = make_homogeneous_link(3, {100e3, kAlpha, kBeta2, 0.0}, Amplification::Lumped, -500e-24);
    PropagationStats st;
    const FieldGrid u1 = propagate(u0, link, {}, &st);
    CHECK(st.steps == 3u);

    const std::size_t n = u0.size();
    std::vector<cplx> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = u0.samples[i].x;
        y[i] = u0.samples[i].y;
    }
    dft(x, FftSign::Forward);
    dft(y, FftSign::Forward);
    for (std::size_t m = 0; m < n; ++m) {
        const cplx h = linear_transfer(link, link.total_length(), u0.omega(m));
        x[m] *= h / static_cast<double>(n);
        y[m] *= h / static_cast<double>(n);
    }
    dft(x, FftSign::Backward);
    dft(y, FftSign::Backward);
    FieldGrid ref = u0;
    for (std::size_t i = 0; i < n; ++i) ref.samples[i] = {x[i], y[i]};
    CHECK(rms_rel(u1, ref) <= 1e-12);
}

TEST_CASE("lossless propagation conserves energy") {
    const FieldGrid u0 = test_field(512, 10.0, 4);
    const LinkSpec link = make_homogeneous_link(1, {21.71e3, 0.0, kBeta2, kGamma}, Amplification::Lossless);
    const FieldGrid u1 = propagate(u0, link, {});
    CHECK(std::abs(energy(u1) - energy(u0)) <= 1e-10 * energy(u0));
    // lumped amplification restores the launch energy in the linear limit
    const LinkSpec lumped = make_homogeneous_link(2, {100e3, kAlpha, kBeta2, 0.0}, Amplification::Lumped);
    CHECK(std::abs(energy(propagate(u0, lumped, {})) - energy(u0)) <= 1e-12 * energy(u0));
}

TEST_CASE("halving the step size reduces the error fourfold") {
    const FieldGrid u0 = test_field(128, 12.0, 5);
    const LinkSpec link = make_homogeneous_link(1, {21.71e3, 0.0, kBeta2, kGamma}, Amplification::Lossless);
    const double p = 4e-3;
    const FieldGrid ref = propagate(u0, link, {p / 8});
    const double e1 = rms_rel(propagate(u0, link, {p}), ref);
    const double e2 = rms_rel(propagate(u0, link, {p / 2}), ref);
    // remove the reference's own error assuming second order
    const double ratio = (e1 * (1.0 + 1.0 / 64.0)) / (e2 * (1.0 + 1.0 / 16.0));
    MESSAGE("step-halving error ratio " << ratio);
    CHECK(ratio >= 3.2);
    CHECK(ratio <= 4.8);
}

TEST_CASE("propagation is deterministic and rejects bad input") {
    const FieldGrid u0 = test_field(128, 6.0, 6);
    const LinkSpec link = make_homogeneous_link(1, {21.71e3, 0.0, kBeta2, kGamma}, Amplification::Lossless);
    CHECK(propagate(u0, link, {}).samples == propagate(u0, link, {}).samples);
    FieldGrid bad = u0;
    bad.samples[17].y = cplx(std::nan(""), 0.0);
    CHECK_THROWS_AS(propagate(bad, link, {}), std::runtime_error);
    CHECK_THROWS(propagate(u0, link, {0.0}));
}

TEST_CASE("wavelength multiplexing") {
    const std::size_t n = 1024;
    const double fs = 512e9;
    FieldGrid a, b;
    a.sample_rate = b.sample_rate = fs;
    a.samples.assign(n, JonesVec{1.0, 0.0});
    b.samples.assign(n, JonesVec{0.0, 0.5});

    // passthrough
    const FieldGrid same = wdm_mux({a}, {0.0}, 10e9);
    CHECK(same.samples == a.samples);

    // two tones land on their exact bins
    const double bin = 2 * M_PI * fs / n;
    const FieldGrid m = wdm_mux({a, b}, {-20 * bin, 20 * bin}, 10e9);
    std::vector<cplx> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = m.samples[i].x;
        y[i] = m.samples[i].y;
    }
    dft(x, FftSign::Forward);
    dft(y, FftSign::Forward);
    for (std::size_t k = 0; k < n; ++k) {
        CHECK(std::abs(x[k]) == doctest::Approx(k == n - 20 ? double(n) : 0.0).epsilon(1e-12).scale(1.0));
        CHECK(std::abs(y[k]) == doctest::Approx(k == 20 ? 0.5 * n : 0.0).epsilon(1e-12).scale(1.0));
    }

    CHECK_THROWS(wdm_mux({a, b}, {0.0, 0.37 * bin}, 10e9));
    CHECK_THROWS(wdm_mux({a, b}, {0.0, 2 * M_PI * 250e9}, 64e9));
    CHECK(snap_offset(2 * M_PI * 100.3e9, fs, n) == doctest::Approx(std::round(100.3e9 / (fs / n)) * bin));
}

TEST_CASE("power adds for spectrally disjoint channels") {
    const std::size_t os = 16;
    const FieldGrid a = test_field(1024, 0.0, 7, os);
    const FieldGrid b = test_field(1024, 3.0, 8, os);
    const double off = snap_offset(2 * M_PI * 150e9, a.sample_rate, a.size());
    const FieldGrid m = wdm_mux({a, b}, {0.0, off}, 1.2 * 64e9);
    CHECK(std::abs(m.mean_power() - (a.mean_power() + b.mean_power())) <= 1e-9 * m.mean_power());
}

TEST_CASE("field dump round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "fiberpert_test_field";
    std::filesystem::create_directories(dir);
    FieldGrid f = test_field(32, 1.0, 9);
    f.z = 1234.5;
    const std::string path = (dir / "f.fsig").string();
    write_field(path, f);
    const FieldGrid g = read_field(path);
    CHECK(g.samples == f.samples);
    CHECK(g.sample_rate == f.sample_rate);
    CHECK(g.z == f.z);
    CHECK(std::filesystem::file_size(path) == 4u + 4 + 8 + 8 + 8 + 32u * f.size());
    std::filesystem::remove_all(dir);
}
