#include "fiberpert/kernel_io.hpp"

#include "fiberpert/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

namespace fiberpert {

namespace {

constexpr std::uint32_t kVersion = 1;

void hex_double(std::ostringstream& os, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    os << buf << ';';
}

} // namespace

Digest sha256(const std::string& text) {
    Digest d{};
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), d.data(), &len, EVP_sha256(), nullptr) != 1 || len != d.size())
        throw std::runtime_error("SHA-256 computation failed");
    return d;
}

Digest kernel_key(const LinkSpec& link, const ChannelPlan& plan, std::size_t nu, std::size_t n_fft,
                  std::size_t oversample) {
    if (nu >= plan.channels.size()) throw std::out_of_range("channel index out of range");
    std::ostringstream os;
    os << "fiberpert-kernel-v1;amp=" << static_cast<int>(link.amplification) << ';';
    hex_double(os, link.pre_dispersion);
    for (const auto& s : link.spans) {
        os << "span;";
        hex_double(os, s.length);
        hex_double(os, link.amplification == Amplification::Lossless ? 0.0 : s.alpha);
        hex_double(os, s.beta2);
    }
    os << "plan;";
    hex_double(os, plan.symbol_rate);
    hex_double(os, plan.rolloff);
    hex_double(os, plan.channels[nu].freq_offset);
    os << "nu=" << nu << ";n=" << n_fft << ";os=" << oversample;
    return sha256(os.str());
}

std::string to_hex(const Digest& d) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (auto b : d) {
        s += digits[b >> 4];
        s += digits[b & 15];
    }
    return s;
}

void write_kernel_grid(const std::string& path, const FreqKernelGrid& grid, const Digest& key) {
    BinaryWriter w(path);
    w.bytes("FKRN", 4);
    w.u32(kVersion);
    w.i32(grid.nu);
    w.u32(static_cast<std::uint32_t>(grid.n_fft));
    w.f64(grid.period);
    w.bytes(key.data(), key.size());
    for (const auto& v : grid.values) {
        w.f64(v.real());
        w.f64(v.imag());
    }
    w.close();
}

FreqKernelGrid read_kernel_grid(const std::string& path, Digest* key) {
    BinaryReader r(path);
    r.expect_magic("FKRN");
    if (r.u32() != kVersion) throw std::runtime_error(path + ": unsupported kernel file version");
    FreqKernelGrid g;
    g.nu = r.i32();
    g.n_fft = r.u32();
    g.period = r.f64();
    Digest k{};
    r.bytes(k.data(), k.size());
    if (key) *key = k;
    g.values.resize(g.n_fft * g.n_fft * g.n_fft);
    for (auto& v : g.values) {
        const double re = r.f64();
        const double im = r.f64();
        v = {re, im};
    }
    return g;
}

void write_kernel_td(const std::string& path, const TimeKernelSparse& kernel, const Digest& key) {
    BinaryWriter w(path);
    w.bytes("TKRN", 4);
    w.u32(kVersion);
    w.i32(kernel.nu);
    w.u32(static_cast<std::uint32_t>(kernel.n_fft));
    w.f64(kernel.clip);
    w.bytes(key.data(), key.size());
    w.u64(kernel.entries.size());
    for (const auto& e : kernel.entries) {
        w.i32(e.k1);
        w.i32(e.k2);
        w.i32(e.k3);
        w.f64(e.h.real());
        w.f64(e.h.imag());
    }
    w.close();
}

TimeKernelSparse read_kernel_td(const std::string& path, Digest* key) {
    BinaryReader r(path);
    r.expect_magic("TKRN");
    if (r.u32() != kVersion) throw std::runtime_error(path + ": unsupported kernel file version");
    TimeKernelSparse t;
    t.nu = r.i32();
    t.n_fft = r.u32();
    t.clip = r.f64();
    Digest k{};
    r.bytes(k.data(), k.size());
    if (key) *key = k;
    const auto count = r.u64();
    t.entries.resize(count);
    for (auto& e : t.entries) {
        e.k1 = r.i32();
        e.k2 = r.i32();
        e.k3 = r.i32();
        const double re = r.f64();
        const double im = r.f64();
        e.h = {re, im};
    }
    return t;
}

KernelCache::KernelCache(std::string directory) : dir_(std::move(directory)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

KernelCache::Lookup KernelCache::get(const LinkSpec& link, const ChannelPlan& plan, std::size_t nu,
                                     std::size_t n_fft, std::size_t oversample) {
    const Digest key = kernel_key(link, plan, nu, n_fft, oversample);
    std::promise<std::shared_ptr<const FreqKernelGrid>> promise;
    std::shared_future<std::shared_ptr<const FreqKernelGrid>> pending;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = grids_.find(key);
        if (it != grids_.end()) pending = it->second;
        else grids_.emplace(key, promise.get_future().share());
    }
    if (pending.valid()) return {pending.get(), true};

    try {
        std::shared_ptr<const FreqKernelGrid> grid;
        bool from_disk = false;
        const std::string path = dir_.empty() ? std::string() : dir_ + "/" + to_hex(key) + ".fkrn";
        if (!path.empty() && std::filesystem::exists(path)) {
            Digest stored{};
            auto g = read_kernel_grid(path, &stored);
            if (stored == key && g.n_fft == n_fft) {
                grid = std::make_shared<const FreqKernelGrid>(std::move(g));
                from_disk = true;
            }
        }
        if (!grid) {
            grid = std::make_shared<const FreqKernelGrid>(alias_kernel(link, plan, nu, n_fft, oversample));
            if (!path.empty()) write_kernel_grid(path, *grid, key);
        }
        promise.set_value(grid);
        return {grid, from_disk};
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard<std::mutex> lock(mu_);
        grids_.erase(key);
        throw;
    }
}

std::size_t KernelCache::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return grids_.size();
}

} // namespace fiberpert
