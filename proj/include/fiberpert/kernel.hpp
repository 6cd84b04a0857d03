#pragma once

#include "fiberpert/link.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace fiberpert {

using cplx = std::complex<double>;

// Aliased end-to-end kernel sampled on an n^3 grid. Bin mu maps to
// omega = 2 pi fold(mu) / (n T) with fold(mu) in [-n/2, n/2).
struct FreqKernelGrid {
    int nu = 0;
    std::size_t n_fft = 0;
    double period = 0.0; // T, s
    std::vector<cplx> values;

    std::size_t index(std::size_t m1, std::size_t m2, std::size_t m3) const {
        return (m1 * n_fft + m2) * n_fft + m3;
    }
    const cplx& at(std::size_t m1, std::size_t m2, std::size_t m3) const { return values[index(m1, m2, m3)]; }
    double omega(std::size_t mu) const;
};

struct KernelEntry {
    int k1 = 0, k2 = 0, k3 = 0;
    cplx h;
};

// Clipped discrete-time kernel with entries in lexicographic (k1, k2, k3) order.
struct TimeKernelSparse {
    int nu = 0;
    std::size_t n_fft = 0;
    double clip = 0.0;
    std::vector<KernelEntry> entries;

    cplx center() const;
    int memory() const; // largest |k_i| among stored entries
    const KernelEntry* find(int k1, int k2, int k3) const;
};

// Unaliased kernel H_nu(omega1, omega2, omega3) in s^3.
cplx e2e_kernel_unaliased(const LinkSpec& link, const ChannelPlan& plan, std::size_t nu,
                          double omega1, double omega2, double omega3);

// Frequency offset as used inside the phase-matching argument
// Omega = (w2 - w1)(w2 - w3 + dw).
FreqKernelGrid alias_kernel(const LinkSpec& link, const ChannelPlan& plan, std::size_t nu,
                            std::size_t n_fft, std::size_t oversample = 1);

// Dense inverse transform, layout [k1][k2][k3] with k_i taken modulo n.
std::vector<cplx> kernel_time_dense(const FreqKernelGrid& grid);
// Forward transform of a dense time-domain cube back to grid values.
std::vector<cplx> kernel_freq_from_dense(const std::vector<cplx>& h, std::size_t n);

// clip <= 0 keeps every coefficient.
TimeKernelSparse kernel_time_domain(const FreqKernelGrid& grid, double clip);

bool is_multiplicative_td(int k1, int k2, int k3, bool is_probe);
bool is_multiplicative_fd(std::size_t m1, std::size_t m2, std::size_t m3, bool is_probe);

struct TdPartition {
    std::vector<std::size_t> additive;       // indices into entries
    std::vector<std::size_t> multiplicative;
};
TdPartition classify_sets_td(const TimeKernelSparse& kernel, bool is_probe);

struct FdPartition {
    std::size_t n_fft = 0;
    std::vector<std::uint8_t> multiplicative; // n^3 mask
    std::size_t n_multiplicative = 0;
    std::size_t n_additive = 0;
};
FdPartition classify_sets_fd(std::size_t n_fft, bool is_probe);

struct EnergySplit {
    double total = 0.0;
    double additive = 0.0;
    double multiplicative = 0.0;
};

struct KernelEnergies {
    EnergySplit td; // E_h
    EnergySplit fd; // E_H
};

KernelEnergies kernel_energies(const TimeKernelSparse& kernel, const FreqKernelGrid& grid, bool is_probe);

// max(2^(ceil(log2 S_T) + 2), 64)
std::size_t default_fft_size(double map_strength);

} // namespace fiberpert
