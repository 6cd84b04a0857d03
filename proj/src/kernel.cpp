#include "fiberpert/kernel.hpp"

#include "fiberpert/fft.hpp"
#include "fiberpert/nonlinear_transfer.hpp"
#include "fiberpert/parallel.hpp"
#include "fiberpert/pulse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fiberpert {

namespace {

constexpr double kPi = std::numbers::pi;

double channel_offset(const ChannelPlan& plan, std::size_t nu) {
    if (nu >= plan.channels.size()) throw std::out_of_range("channel index out of range");
    return plan.channels[nu].freq_offset;
}

} // namespace

double FreqKernelGrid::omega(std::size_t mu) const {
    const long n = static_cast<long>(n_fft);
    return 2.0 * kPi * static_cast<double>(fold_index(static_cast<long>(mu), n)) /
           (static_cast<double>(n) * period);
}

cplx TimeKernelSparse::center() const {
    const auto* e = find(0, 0, 0);
    return e ? e->h : cplx(0.0);
}

int TimeKernelSparse::memory() const {
    int m = 0;
    for (const auto& e : entries)
        m = std::max({m, std::abs(e.k1), std::abs(e.k2), std::abs(e.k3)});
    return m;
}

const KernelEntry* TimeKernelSparse::find(int k1, int k2, int k3) const {
    auto less = [](const KernelEntry& e, const std::array<int, 3>& k) {
        return std::array<int, 3>{e.k1, e.k2, e.k3} < k;
    };
    const std::array<int, 3> key{k1, k2, k3};
    auto it = std::lower_bound(entries.begin(), entries.end(), key, less);
    if (it != entries.end() && it->k1 == k1 && it->k2 == k2 && it->k3 == k3) return &*it;
    return nullptr;
}

cplx e2e_kernel_unaliased(const LinkSpec& link, const ChannelPlan& plan, std::size_t nu,
                          double omega1, double omega2, double omega3) {
    plan.validate();
    const double t = plan.symbol_period();
    const double rho = plan.rolloff;
    const double dw = channel_offset(plan, nu);
    const double s = rrc_shape(omega1, t, rho) * rrc_shape(omega2, t, rho) * rrc_shape(omega3, t, rho) *
                     rrc_shape(omega1 - omega2 + omega3, t, rho);
    if (s == 0.0) return 0.0;
    const NonlinearTransfer hnl(link);
    return t * t * t * s * hnl((omega2 - omega1) * (omega2 - omega3 + dw));
}

namespace {

FreqKernelGrid alias_grid(const NonlinearTransfer& hnl, const ChannelPlan& plan, std::size_t nu,
                          std::size_t n) {
    const double t = plan.symbol_period();
    const double rho = plan.rolloff;
    const double dw = channel_offset(plan, nu);
    const long nl = static_cast<long>(n);
    const double dw_bin = 2.0 * kPi / (static_cast<double>(n) * t);

    FreqKernelGrid grid;
    grid.nu = static_cast<int>(nu);
    grid.n_fft = n;
    grid.period = t;
    grid.values.assign(n * n * n, cplx(0.0));

    // Frequencies are handled as integer multiples of the bin spacing so that sums such as
    // w1 - w2 + w3 land exactly on the band edges. Alias orders |m| >= 2 vanish because the
    // pulse support is at most 2 pi / T wide, so every index stays within [-2n, 2n].
    const long span = 2 * nl;
    std::vector<double> shape(static_cast<std::size_t>(2 * span + 1));
    for (long j = -span; j <= span; ++j)
        shape[static_cast<std::size_t>(j + span)] = rrc_shape(dw_bin * static_cast<double>(j), t, rho);
    auto shape_at = [&](long j) {
        return (j < -span || j > span) ? 0.0 : shape[static_cast<std::size_t>(j + span)];
    };
    std::vector<std::array<long, 3>> idx(n);
    for (std::size_t mu = 0; mu < n; ++mu)
        for (int m = -1; m <= 1; ++m) idx[mu][m + 1] = fold_index(static_cast<long>(mu), nl) - m * nl;

    parallel_for(n, [&](std::size_t m1) {
        for (std::size_t m2 = 0; m2 < n; ++m2) {
            for (std::size_t m3 = 0; m3 < n; ++m3) {
                cplx acc = 0.0;
                for (int a = 0; a < 3; ++a) {
                    const long j1 = idx[m1][a];
                    const double s1 = shape_at(j1);
                    if (s1 == 0.0) continue;
                    for (int b = 0; b < 3; ++b) {
                        const long j2 = idx[m2][b];
                        const double s2 = shape_at(j2);
                        if (s2 == 0.0) continue;
                        for (int c = 0; c < 3; ++c) {
                            const long j3 = idx[m3][c];
                            const double s3 = shape_at(j3);
                            if (s3 == 0.0) continue;
                            const double s4 = shape_at(j1 - j2 + j3);
                            if (s4 == 0.0) continue;
                            const double w21 = dw_bin * static_cast<double>(j2 - j1);
                            const double w23 = dw_bin * static_cast<double>(j2 - j3) + dw;
                            acc += s1 * s2 * s3 * s4 * hnl(w21 * w23);
                        }
                    }
                }
                grid.values[grid.index(m1, m2, m3)] = acc;
            }
        }
    });
    return grid;
}

} // namespace

FreqKernelGrid alias_kernel(const LinkSpec& link, const ChannelPlan& plan, std::size_t nu,
                            std::size_t n_fft, std::size_t oversample) {
    plan.validate();
    if (n_fft < 2) throw std::invalid_argument("n_fft must be at least 2");
    if (n_fft % 2 != 0) throw std::invalid_argument("n_fft must be even");
    if (oversample < 1) throw std::invalid_argument("kernel oversampling must be at least 1");
    const NonlinearTransfer hnl(link);
    if (oversample == 1) return alias_grid(hnl, plan, nu, n_fft);

    // Resolve the kernel on a finer grid, truncate its time-domain support to the
    // n_fft window and transform back.
    const std::size_t big = n_fft * oversample;
    const auto fine = alias_grid(hnl, plan, nu, big);
    const auto hf = kernel_time_dense(fine);
    const long n = static_cast<long>(n_fft);
    std::vector<cplx> hc(n_fft * n_fft * n_fft);
    for (long k1 = -n / 2; k1 < n / 2; ++k1)
        for (long k2 = -n / 2; k2 < n / 2; ++k2)
            for (long k3 = -n / 2; k3 < n / 2; ++k3) {
                const long bl = static_cast<long>(big);
                hc[(wrap_index(k1, n) * n_fft + wrap_index(k2, n)) * n_fft + wrap_index(k3, n)] =
                    hf[(wrap_index(k1, bl) * big + wrap_index(k2, bl)) * big + wrap_index(k3, bl)];
            }
    FreqKernelGrid grid;
    grid.nu = fine.nu;
    grid.n_fft = n_fft;
    grid.period = fine.period;
    grid.values = kernel_freq_from_dense(hc, n_fft);
    return grid;
}

std::vector<cplx> kernel_time_dense(const FreqKernelGrid& grid) {
    const std::size_t n = grid.n_fft;
    std::vector<cplx> h = grid.values;
    dft_cube(h, n, {FftSign::Forward, FftSign::Backward, FftSign::Forward});
    const double scale = 1.0 / (static_cast<double>(n) * n * n);
    for (auto& v : h) v *= scale;
    return h;
}

std::vector<cplx> kernel_freq_from_dense(const std::vector<cplx>& h, std::size_t n) {
    std::vector<cplx> g = h;
    dft_cube(g, n, {FftSign::Backward, FftSign::Forward, FftSign::Backward});
    return g;
}

TimeKernelSparse kernel_time_domain(const FreqKernelGrid& grid, double clip) {
    const auto h = kernel_time_dense(grid);
    const long n = static_cast<long>(grid.n_fft);
    const double p0 = std::norm(h[0]);

    TimeKernelSparse out;
    out.nu = grid.nu;
    out.n_fft = grid.n_fft;
    out.clip = clip;
    for (long k1 = -n / 2; k1 < n / 2; ++k1)
        for (long k2 = -n / 2; k2 < n / 2; ++k2)
            for (long k3 = -n / 2; k3 < n / 2; ++k3) {
                const cplx v = h[(wrap_index(k1, n) * n + wrap_index(k2, n)) * n + wrap_index(k3, n)];
                if (clip > 0.0 && !(std::norm(v) > clip * p0)) continue;
                out.entries.push_back({static_cast<int>(k1), static_cast<int>(k2), static_cast<int>(k3), v});
            }
    return out;
}

bool is_multiplicative_td(int k1, int k2, int k3, bool is_probe) {
    if (k1 == 0 && k2 == 0 && k3 == 0) return true;
    if (k3 == 0 && k2 != 0 && k1 != 0) return true;
    return is_probe && k1 == 0 && k2 != 0 && k3 != 0;
}

bool is_multiplicative_fd(std::size_t m1, std::size_t m2, std::size_t m3, bool is_probe) {
    return m2 == m1 || (is_probe && m2 == m3);
}

TdPartition classify_sets_td(const TimeKernelSparse& kernel, bool is_probe) {
    TdPartition p;
    for (std::size_t i = 0; i < kernel.entries.size(); ++i) {
        const auto& e = kernel.entries[i];
        (is_multiplicative_td(e.k1, e.k2, e.k3, is_probe) ? p.multiplicative : p.additive).push_back(i);
    }
    return p;
}

FdPartition classify_sets_fd(std::size_t n, bool is_probe) {
    FdPartition p;
    p.n_fft = n;
    p.multiplicative.assign(n * n * n, 0);
    for (std::size_t m1 = 0; m1 < n; ++m1)
        for (std::size_t m2 = 0; m2 < n; ++m2)
            for (std::size_t m3 = 0; m3 < n; ++m3) {
                const bool mult = is_multiplicative_fd(m1, m2, m3, is_probe);
                p.multiplicative[(m1 * n + m2) * n + m3] = mult ? 1 : 0;
                ++(mult ? p.n_multiplicative : p.n_additive);
            }
    return p;
}

KernelEnergies kernel_energies(const TimeKernelSparse& kernel, const FreqKernelGrid& grid, bool is_probe) {
    if (kernel.n_fft != grid.n_fft) throw std::invalid_argument("kernel views use different n_fft");
    KernelEnergies e;
    for (const auto& k : kernel.entries) {
        const double p = std::norm(k.h);
        (is_multiplicative_td(k.k1, k.k2, k.k3, is_probe) ? e.td.multiplicative : e.td.additive) += p;
    }
    e.td.total = e.td.additive + e.td.multiplicative;

    const std::size_t n = grid.n_fft;
    for (std::size_t m1 = 0; m1 < n; ++m1)
        for (std::size_t m2 = 0; m2 < n; ++m2)
            for (std::size_t m3 = 0; m3 < n; ++m3) {
                const double p = std::norm(grid.at(m1, m2, m3));
                (is_multiplicative_fd(m1, m2, m3, is_probe) ? e.fd.multiplicative : e.fd.additive) += p;
            }
    const double scale = 1.0 / (static_cast<double>(n) * n * n);
    e.fd.additive *= scale;
    e.fd.multiplicative *= scale;
    e.fd.total = e.fd.additive + e.fd.multiplicative;
    return e;
}

std::size_t default_fft_size(double map_strength) {
    std::size_t n = 64;
    if (map_strength > 0.0) {
        const int e = static_cast<int>(std::ceil(std::log2(map_strength))) + 2;
        if (e > 6) n = std::size_t{1} << e;
    }
    return n;
}

} // namespace fiberpert
