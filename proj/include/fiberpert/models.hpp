#pragma once

#include "fiberpert/jones.hpp"
#include "fiberpert/kernel.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace fiberpert {

struct ChannelKernel {
    double phi_nl = 0.0; // rad
    std::shared_ptr<const TimeKernelSparse> td;
    std::shared_ptr<const FreqKernelGrid> fd;
};

struct Interferer {
    int nu = 0;
    JonesSequence symbols; // aligned to the probe clock
    ChannelKernel kernel;
};

struct ModelInput {
    JonesSequence probe;
    ChannelKernel self;
    std::vector<Interferer> interferers;

    void validate(bool need_td, bool need_fd) const;
};

struct BlockFrame {
    std::size_t n_fft = 0;
    std::size_t overlap = 0; // K
    // Largest tolerated fraction of kernel energy reaching outside the block.
    double max_leakage = 1e-4;

    void validate() const;
    std::size_t valid() const { return n_fft - overlap; }
    std::size_t head() const { return overlap / 2; }
    std::size_t blocks(std::size_t n_sym) const { return (n_sym + valid() - 1) / valid(); }
};

// Zero-padded input blocks; block l covers symbols [l (N-K) - K/2, l (N-K) - K/2 + N).
template <class T>
std::vector<std::vector<T>> overlap_save_split(const std::vector<T>& seq, const BlockFrame& frame) {
    frame.validate();
    if (seq.size() < frame.n_fft) throw std::invalid_argument("sequence shorter than the block length");
    const std::size_t nb = frame.blocks(seq.size());
    std::vector<std::vector<T>> out(nb, std::vector<T>(frame.n_fft, T{}));
    for (std::size_t l = 0; l < nb; ++l) {
        const long start = static_cast<long>(l * frame.valid()) - static_cast<long>(frame.head());
        for (std::size_t i = 0; i < frame.n_fft; ++i) {
            const long k = start + static_cast<long>(i);
            if (k >= 0 && k < static_cast<long>(seq.size())) out[l][i] = seq[static_cast<std::size_t>(k)];
        }
    }
    return out;
}

// Keeps samples [K/2, K/2 + N - K) of each block.
template <class T>
std::vector<T> overlap_save_append(const std::vector<std::vector<T>>& blocks, const BlockFrame& frame,
                                   std::size_t n_sym) {
    frame.validate();
    std::vector<T> out(n_sym, T{});
    for (std::size_t l = 0; l < blocks.size(); ++l) {
        if (blocks[l].size() != frame.n_fft) throw std::invalid_argument("block length mismatch");
        for (std::size_t i = 0; i < frame.valid(); ++i) {
            const std::size_t k = l * frame.valid() + i;
            if (k < n_sym) out[k] = blocks[l][frame.head() + i];
        }
    }
    return out;
}

JonesSequence reg_td(const ModelInput& input);
JonesSequence reg_fd(const ModelInput& input, const BlockFrame& frame);
JonesSequence reglog_td(const ModelInput& input);
JonesSequence reglog_fd(const ModelInput& input, const BlockFrame& frame);

// Fraction of time-domain kernel energy with an index outside the block's valid reach.
double overlap_leakage(const FreqKernelGrid& grid, const BlockFrame& frame);

enum class ModelKind { RegTd, RegFd, ReglogTd, ReglogFd };

ModelKind parse_model_kind(const std::string& name);
std::string model_name(ModelKind kind);
bool uses_fd(ModelKind kind);

JonesSequence run_model(ModelKind kind, const ModelInput& input, const BlockFrame& frame);

} // namespace fiberpert
