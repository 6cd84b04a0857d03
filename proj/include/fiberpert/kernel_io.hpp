#pragma once

#include "fiberpert/kernel.hpp"
#include "fiberpert/link.hpp"

#include <array>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace fiberpert {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(const std::string& text);

// SHA-256 over every input that determines the kernel of channel nu.
Digest kernel_key(const LinkSpec& link, const ChannelPlan& plan, std::size_t nu, std::size_t n_fft,
                  std::size_t oversample);
std::string to_hex(const Digest& d);

// "FKRN": version u32, nu i32, n_fft u32, T f64, key[32], n^3 x (re, im) f64.
void write_kernel_grid(const std::string& path, const FreqKernelGrid& grid, const Digest& key);
FreqKernelGrid read_kernel_grid(const std::string& path, Digest* key = nullptr);

// "TKRN": version u32, nu i32, n_fft u32, clip f64, key[32], count u64, then
// records {k1, k2, k3 i32; re, im f64}.
void write_kernel_td(const std::string& path, const TimeKernelSparse& kernel, const Digest& key);
TimeKernelSparse read_kernel_td(const std::string& path, Digest* key = nullptr);

// Kernel grids keyed by kernel_key. Lookups are shared; a miss builds once while other
// requesters of the same key wait. With a directory set, grids persist as FKRN files.
class KernelCache {
public:
    explicit KernelCache(std::string directory = {});

    struct Lookup {
        std::shared_ptr<const FreqKernelGrid> grid;
        bool hit = false;
    };

    Lookup get(const LinkSpec& link, const ChannelPlan& plan, std::size_t nu, std::size_t n_fft,
               std::size_t oversample = 1);
    std::size_t size() const;

private:
    std::string dir_;
    mutable std::mutex mu_;
    std::map<Digest, std::shared_future<std::shared_ptr<const FreqKernelGrid>>> grids_;
};

} // namespace fiberpert
