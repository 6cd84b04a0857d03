#include "doctest.h"

#include "fiberpert/fft.hpp"
#include "fiberpert/kernel.hpp"
#include "fiberpert/kernel_io.hpp"
#include "fiberpert/pulse.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <filesystem>
#include <thread>

using namespace fiberpert;

namespace {

const double kBeta2 = ps2_per_km_to_beta2(-21.0);
const double kGamma = per_w_km_to_gamma(1.1);
const double kAlpha = db_per_km_to_alpha(0.2);

LinkSpec ssmf(int spans = 1) {
    return make_homogeneous_link(spans, {100e3, kAlpha, kBeta2, kGamma}, Amplification::Lumped);
}

LinkSpec lossless() {
    return make_homogeneous_link(1, {21.71e3, 0.0, kBeta2, kGamma}, Amplification::Lossless);
}

ChannelPlan plan(double rs, double rho, double offset_hz = 0.0) {
    ChannelPlan p{rs, rho, {{1e-3, 0.0}}, 0};
    if (offset_hz != 0.0) p.channels.push_back({1e-3, 2 * M_PI * offset_hz});
    return p;
}

double max_grid_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

std::string temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("fiberpert_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p.string();
}

} // namespace

TEST_CASE("root-raised-cosine shape satisfies the Nyquist criterion") {
    const double t = 1.0 / 64e9;
    for (double rho : {0.0, 0.1, 0.2, 0.5, 1.0}) {
        for (int i = 0; i < 97; ++i) {
            const double w = -M_PI / t + 2 * M_PI / t * (i + 0.37) / 97.0;
            double sum = 0.0;
            for (int m = -2; m <= 2; ++m) sum += std::pow(rrc_shape(w - 2 * M_PI * m / t, t, rho), 2);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
        }
        CHECK(rrc_shape(0.0, t, rho) == 1.0);
        CHECK(rrc_shape(1.0001 * (1 + rho) * M_PI / t, t, rho) == 0.0);
    }
    // half-open support for the rectangular spectrum
    CHECK(rrc_shape(-M_PI / t, t, 0.0) == 1.0);
    CHECK(rrc_shape(M_PI / t, t, 0.0) == 0.0);
}

TEST_CASE("unaliased kernel values") {
    const ChannelPlan p = plan(64e9, 0.2);
    const double t = p.symbol_period();
    CHECK(e2e_kernel_unaliased(ssmf(), p, 0, 0, 0, 0) / (t * t * t) == cplx(1.0));
    CHECK(e2e_kernel_unaliased(ssmf(), p, 0, 1.01 * 1.2 * M_PI / t, 0, 0) == cplx(0.0));
    CHECK(e2e_kernel_unaliased(ssmf(), p, 0, 0, 0, -1.01 * 1.2 * M_PI / t) == cplx(0.0));
}

TEST_CASE("cross-channel kernel magnitude falls with channel spacing") {
    const double t = 1.0 / 64e9;
    double last = 2.0;
    for (double f : {80e9, 120e9, 200e9, 400e9}) {
        const ChannelPlan p = plan(64e9, 0.2, f);
        const double v = std::abs(e2e_kernel_unaliased(ssmf(), p, 1, 0.3 / t, 0.9 / t, -0.4 / t)) / (t * t * t);
        CHECK(v < last);
        last = v;
    }
}

TEST_CASE("aliased grid equals the folded sum of the unaliased kernel") {
    for (double offset : {0.0, 90e9}) {
        const ChannelPlan p = plan(64e9, 0.2, offset);
        const std::size_t nu = offset == 0.0 ? 0 : 1;
        const std::size_t n = 16;
        const LinkSpec link = ssmf();
        const auto g = alias_kernel(link, p, nu, n);
        const double t = p.symbol_period();
        double worst = 0.0;
        bool folded = false;
        for (std::size_t m1 = 0; m1 < n; ++m1)
            for (std::size_t m2 = 0; m2 < n; ++m2)
                for (std::size_t m3 = 0; m3 < n; ++m3) {
                    cplx sum = 0.0, base = 0.0;
                    for (int a = -1; a <= 1; ++a)
                        for (int b = -1; b <= 1; ++b)
                            for (int c = -1; c <= 1; ++c) {
                                const cplx v = e2e_kernel_unaliased(link, p, nu, g.omega(m1) - 2 * M_PI * a / t,
                                                                    g.omega(m2) - 2 * M_PI * b / t,
                                                                    g.omega(m3) - 2 * M_PI * c / t);
                                sum += v;
                                if (a == 0 && b == 0 && c == 0) base = v;
                            }
                    sum /= t * t * t;
                    base /= t * t * t;
                    worst = std::max(worst, std::abs(sum - g.at(m1, m2, m3)));
                    if (std::abs(sum - base) > 1e-3) folded = true;
                }
        CHECK(worst <= 1e-12);
        CHECK(folded);
    }
}

TEST_CASE("grid normalization and the flat diagonal for a rectangular spectrum") {
    const auto g = alias_kernel(ssmf(), plan(64e9, 0.2), 0, 32);
    CHECK(g.at(0, 0, 0) == cplx(1.0));
    const auto r = alias_kernel(ssmf(), plan(64e9, 0.0), 0, 32);
    for (std::size_t m1 = 0; m1 < 32; ++m1)
        for (std::size_t m3 = 0; m3 < 32; ++m3) CHECK(r.at(m1, m1, m3) == cplx(1.0));
}

TEST_CASE("grid symmetries of the intra-channel kernel") {
    const std::size_t n = 32;
    const auto g = alias_kernel(lossless(), plan(64e9, 0.2), 0, n);
    double worst = 0.0;
    for (std::size_t m1 = 0; m1 < n; ++m1)
        for (std::size_t m2 = 0; m2 < n; ++m2)
            for (std::size_t m3 = 0; m3 < n; ++m3) {
                const cplx v = g.at(m1, m2, m3);
                worst = std::max(worst, std::abs(v - g.at(m3, m2, m1)));
                worst = std::max(worst, std::abs(v - g.at((n - m1) % n, (n - m2) % n, (n - m3) % n)));
            }
    CHECK(worst <= 1e-12);
}

TEST_CASE("phase-matching argument depends on frequency differences only") {
    // Equal products give equal values anywhere on the grid.
    const std::size_t n = 16;
    const auto g = alias_kernel(lossless(), plan(64e9, 0.0), 0, n);
    // (m1, m2, m3) = (0, 2, 1) and (0, 1, -1) give (w2 - w1)(w2 - w3) = 2 * 1 and 1 * 2 bins^2.
    CHECK(std::abs(g.at(0, 2, 1) - g.at(0, 1, n - 1)) <= 1e-12);
}

TEST_CASE("time-domain transform round trip and symmetries") {
    const std::size_t n = 32;
    const auto g = alias_kernel(ssmf(), plan(64e9, 0.2), 0, n);
    const auto h = kernel_time_dense(g);
    CHECK(max_grid_diff(kernel_freq_from_dense(h, n), g.values) <= 1e-12);

    const long nl = static_cast<long>(n);
    auto at = [&](long k1, long k2, long k3) {
        return h[(wrap_index(k1, nl) * n + wrap_index(k2, nl)) * n + wrap_index(k3, nl)];
    };
    const double h0 = std::abs(at(0, 0, 0));
    double worst = 0.0, worst_real = 0.0;
    for (long k1 = -nl / 2; k1 < nl / 2; ++k1)
        for (long k2 = -nl / 2; k2 < nl / 2; ++k2) {
            for (long k3 = -nl / 2; k3 < nl / 2; ++k3) {
                worst = std::max(worst, std::abs(at(k1, k2, k3) - at(k3, k2, k1)));
                worst = std::max(worst, std::abs(at(k1, k2, k3) - at(-k1, -k2, -k3)));
            }
            worst_real = std::max(worst_real, std::abs(at(k1, k1, 0).imag()));
        }
    CHECK(worst <= 1e-12 * h0);
    CHECK(worst_real <= 1e-12 * h0);
}

TEST_CASE("cross-channel time-domain symmetries") {
    const std::size_t n = 32;
    const auto g = alias_kernel(lossless(), plan(64e9, 0.2, 100e9), 1, n);
    const auto td = kernel_time_domain(g, 0.0);
    const double h0 = std::abs(td.center());
    double worst = 0.0;
    const int half = static_cast<int>(n / 2);
    for (int k1 = -half + 1; k1 < half; ++k1)
        for (int k2 = -half + 1; k2 < half; ++k2) {
            const cplx a = td.find(k1, k2, 0)->h;
            const cplx b = td.find(k2, k1, 0)->h;
            worst = std::max(worst, std::abs(a - std::conj(b)));
        }
    CHECK(worst <= 1e-12 * h0);
    for (int k = -half; k < half; ++k) CHECK(std::abs(td.find(k, k, 0)->h.imag()) <= 1e-12 * h0);
}

TEST_CASE("transform sign conventions against a naive DFT") {
    const std::size_t n = 8;
    std::vector<cplx> cube(n * n * n);
    for (std::size_t i = 0; i < cube.size(); ++i) cube[i] = {std::sin(0.3 * i), std::cos(1.7 * i)};
    std::vector<cplx> fast = cube;
    dft_cube(fast, n, {FftSign::Forward, FftSign::Backward, FftSign::Forward});

    // separable naive transform
    std::vector<cplx> slow = cube;
    const int signs[3] = {-1, +1, -1};
    for (int axis = 0; axis < 3; ++axis) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                std::vector<cplx> line(n);
                auto idx = [&](std::size_t i) {
                    std::size_t c[3];
                    c[axis] = i;
                    c[(axis + 1) % 3] = a;
                    c[(axis + 2) % 3] = b;
                    return (c[0] * n + c[1]) * n + c[2];
                };
                for (std::size_t i = 0; i < n; ++i) line[i] = slow[idx(i)];
                const auto t = oracle::dft(line, signs[axis]);
                for (std::size_t i = 0; i < n; ++i) slow[idx(i)] = t[i];
            }
    }
    CHECK(max_grid_diff(fast, slow) <= 1e-12);
}

TEST_CASE("clipping keeps exactly the entries above the threshold") {
    const auto g = alias_kernel(ssmf(), plan(64e9, 0.2), 0, 32);
    const auto full = kernel_time_domain(g, 0.0);
    CHECK(full.entries.size() == 32u * 32u * 32u);
    double last = std::numeric_limits<double>::infinity();
    std::size_t last_count = full.entries.size() + 1;
    for (double db : {-200.0, -80.0, -60.0, -40.0, -20.0}) {
        const double clip = std::pow(10.0, db / 10.0);
        const auto k = kernel_time_domain(g, clip);
        const double p0 = std::norm(k.center());
        for (const auto& e : k.entries) CHECK(std::norm(e.h) > clip * p0);
        const auto en = kernel_energies(k, g, true);
        CHECK(en.td.total <= last);
        CHECK(k.entries.size() <= last_count);
        last = en.td.total;
        last_count = k.entries.size();
        // lexicographic order makes find usable
        CHECK(std::is_sorted(k.entries.begin(), k.entries.end(), [](const KernelEntry& a, const KernelEntry& b) {
            return std::tie(a.k1, a.k2, a.k3) < std::tie(b.k1, b.k2, b.k3);
        }));
    }
    const auto k = kernel_time_domain(g, 1e-6);
    CHECK(k.find(0, 0, 0) != nullptr);
    CHECK(k.find(99, 0, 0) == nullptr);
    CHECK(k.memory() > 0);
    CHECK(k.memory() <= 16);
    CHECK(kernel_time_domain(g, 1e-2).memory() < k.memory());
}

TEST_CASE("time-domain set classification") {
    CHECK(is_multiplicative_td(0, 0, 0, true));
    CHECK(is_multiplicative_td(0, 0, 0, false));
    CHECK_FALSE(is_multiplicative_td(1, 2, 3, true));
    CHECK(is_multiplicative_td(0, 5, 2, true));
    CHECK_FALSE(is_multiplicative_td(0, 5, 2, false));
    CHECK(is_multiplicative_td(4, -1, 0, false));
    CHECK(is_multiplicative_td(4, -1, 0, true));
    CHECK_FALSE(is_multiplicative_td(4, 0, 0, true));
    CHECK_FALSE(is_multiplicative_td(0, 0, 3, true));

    const auto g = alias_kernel(ssmf(), plan(64e9, 0.2), 0, 16);
    const auto k = kernel_time_domain(g, 0.0);
    const auto part = classify_sets_td(k, true);
    CHECK(part.additive.size() + part.multiplicative.size() == k.entries.size());
    // kappa = 0, plus two disjoint families of (n-1)^2 entries each
    CHECK(part.multiplicative.size() == 1u + 2u * 15u * 15u);
    CHECK(classify_sets_td(k, false).multiplicative.size() == 1u + 15u * 15u);
}

TEST_CASE("frequency-domain set classification") {
    const auto p = classify_sets_fd(64, true);
    CHECK(p.n_multiplicative == 8128u);
    CHECK(p.n_multiplicative + p.n_additive == 64u * 64u * 64u);
    CHECK(classify_sets_fd(64, false).n_multiplicative == 64u * 64u);
    CHECK(is_multiplicative_fd(3, 3, 7, true));
    CHECK(is_multiplicative_fd(3, 3, 7, false));
    CHECK(is_multiplicative_fd(5, 9, 9, true));
    CHECK_FALSE(is_multiplicative_fd(5, 9, 9, false));
    CHECK(p.multiplicative[(5 * 64 + 9) * 64 + 9] == 1);
    CHECK(p.multiplicative[(5 * 64 + 8) * 64 + 9] == 0);
}

TEST_CASE("kernel energies") {
    for (std::size_t n : {32u, 64u}) {
        const auto g = alias_kernel(lossless(), plan(64e9, 0.2), 0, n);
        const auto e = kernel_energies(kernel_time_domain(g, 0.0), g, true);
        CHECK(e.td.total == e.td.additive + e.td.multiplicative);
        CHECK(e.fd.total == e.fd.additive + e.fd.multiplicative);
        CHECK(std::abs(e.td.total - e.fd.total) <= 1e-9 * e.fd.total);
    }
    const std::size_t n = 64;
    const auto r = alias_kernel(lossless(), plan(64e9, 0.0), 0, n);
    const auto er = kernel_energies(kernel_time_domain(r, 0.0), r, true);
    CHECK(std::abs(er.fd.multiplicative - (2.0 * n - 1.0) / (n * n)) <= 1e-12);

    const auto other = alias_kernel(lossless(), plan(64e9, 0.2), 0, 32);
    CHECK_THROWS(kernel_energies(kernel_time_domain(other, 0.0), r, true));
}

TEST_CASE("default transform size rule") {
    CHECK(default_fft_size(0.003) == 64u);
    CHECK(default_fft_size(11.7) == 64u);
    CHECK(default_fft_size(16.5) == 128u);
    CHECK(default_fft_size(28.7) == 128u);
    CHECK(default_fft_size(40.0) == 256u);
}

TEST_CASE("kernel oversampling converges to the processing grid") {
    const auto base = alias_kernel(lossless(), plan(64e9, 0.2), 0, 32);
    const auto fine = alias_kernel(lossless(), plan(64e9, 0.2), 0, 32, 2);
    CHECK(fine.n_fft == 32u);
    CHECK(std::abs(fine.at(0, 0, 0) - 1.0) < 1e-3);
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < base.values.size(); ++i) {
        diff += std::norm(base.values[i] - fine.values[i]);
        norm += std::norm(base.values[i]);
    }
    CHECK(diff < 1e-4 * norm);
    CHECK_THROWS(alias_kernel(lossless(), plan(64e9, 0.2), 0, 31));
}

TEST_CASE("binary kernel files round trip") {
    const std::string dir = temp_dir("kernel_io");
    const auto g = alias_kernel(ssmf(), plan(64e9, 0.2), 0, 16);
    const Digest key = kernel_key(ssmf(), plan(64e9, 0.2), 0, 16, 1);
    write_kernel_grid(dir + "/g.fkrn", g, key);
    Digest back{};
    const auto g2 = read_kernel_grid(dir + "/g.fkrn", &back);
    CHECK(back == key);
    CHECK(g2.nu == g.nu);
    CHECK(g2.n_fft == g.n_fft);
    CHECK(g2.period == g.period);
    CHECK(g2.values == g.values);
    CHECK(std::filesystem::file_size(dir + "/g.fkrn") == 4u + 4 + 4 + 4 + 8 + 32 + 16u * 16 * 16 * 16);

    const auto k = kernel_time_domain(g, 1e-6);
    write_kernel_td(dir + "/k.tkrn", k, key);
    const auto k2 = read_kernel_td(dir + "/k.tkrn");
    CHECK(k2.clip == k.clip);
    REQUIRE(k2.entries.size() == k.entries.size());
    for (std::size_t i = 0; i < k.entries.size(); ++i) {
        CHECK(k2.entries[i].k1 == k.entries[i].k1);
        CHECK(k2.entries[i].k3 == k.entries[i].k3);
        CHECK(k2.entries[i].h == k.entries[i].h);
    }
    CHECK_THROWS(read_kernel_grid(dir + "/k.tkrn"));
    CHECK_THROWS(read_kernel_grid(dir + "/missing.fkrn"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("kernel keys separate every input that changes the kernel") {
    const Digest a = kernel_key(ssmf(), plan(64e9, 0.2), 0, 64, 1);
    CHECK(a == kernel_key(ssmf(), plan(64e9, 0.2), 0, 64, 1));
    CHECK(a != kernel_key(ssmf(2), plan(64e9, 0.2), 0, 64, 1));
    CHECK(a != kernel_key(ssmf(), plan(32e9, 0.2), 0, 64, 1));
    CHECK(a != kernel_key(ssmf(), plan(64e9, 0.1), 0, 64, 1));
    CHECK(a != kernel_key(ssmf(), plan(64e9, 0.2), 0, 128, 1));
    CHECK(a != kernel_key(ssmf(), plan(64e9, 0.2), 0, 64, 2));
    // launch power does not enter the kernel
    ChannelPlan louder = plan(64e9, 0.2);
    louder.channels[0].launch_power = 1.0;
    CHECK(a == kernel_key(ssmf(), louder, 0, 64, 1));
    CHECK(to_hex(sha256("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("kernel cache builds once and persists") {
    const std::string dir = temp_dir("cache");
    {
        KernelCache cache(dir);
        std::vector<KernelCache::Lookup> got(6);
        std::vector<std::thread> ts;
        for (int i = 0; i < 6; ++i) ts.emplace_back([&, i] { got[i] = cache.get(ssmf(), plan(64e9, 0.2), 0, 16); });
        for (auto& t : ts) t.join();
        CHECK(cache.size() == 1u);
        int misses = 0;
        for (const auto& g : got) {
            CHECK(g.grid == got[0].grid);
            if (!g.hit) ++misses;
        }
        CHECK(misses == 1);
        CHECK(cache.get(ssmf(), plan(64e9, 0.2), 0, 32).hit == false);
        CHECK(cache.size() == 2u);
    }
    KernelCache again(dir);
    const auto l = again.get(ssmf(), plan(64e9, 0.2), 0, 16);
    CHECK(l.hit);
    CHECK(l.grid->values == alias_kernel(ssmf(), plan(64e9, 0.2), 0, 16).values);
    std::filesystem::remove_all(dir);
}
