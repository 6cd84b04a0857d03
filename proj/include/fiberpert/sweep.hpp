#pragma once

#include "fiberpert/config.hpp"
#include "fiberpert/kernel.hpp"
#include "fiberpert/kernel_io.hpp"
#include "fiberpert/models.hpp"

#include <memory>
#include <string>
#include <vector>

namespace fiberpert {

struct KernelBundle {
    std::size_t n_fft = 0;
    std::vector<std::shared_ptr<const FreqKernelGrid>> grids;    // per channel
    std::vector<std::shared_ptr<const TimeKernelSparse>> kernels; // per channel, clipped
    KernelEnergies probe_energies;
    int memory = 0;        // largest |kappa| over stored TD entries
    bool cache_hit = true; // every grid came from the cache
    double seconds = 0.0;
};

std::size_t resolve_fft_size(const RunConfig& cfg);
std::size_t resolve_overlap(const RunConfig& cfg, std::size_t n_fft);

KernelBundle build_kernels(const RunConfig& cfg, KernelCache& cache);

struct TransmitData {
    std::vector<JonesSequence> symbols; // per channel
};

TransmitData make_transmit_data(const RunConfig& cfg);
ModelInput make_model_input(const RunConfig& cfg, const TransmitData& tx, const KernelBundle& kernels);

struct SsfmRun {
    JonesSequence received;
    std::size_t steps = 0;
    double power_offset_db = 0.0; // received probe power relative to transmitted
    double seconds = 0.0;
};

SsfmRun run_ssfm_reference(const RunConfig& cfg, const TransmitData& tx);

struct ModelOutcome {
    ModelKind kind = ModelKind::RegTd;
    double mse_db = 0.0;
    double seconds = 0.0;
};

struct PointResult {
    std::string config_hash;
    double symbol_rate_gbd = 0.0;
    double power_dbm = 0.0;
    double rolloff = 0.0;
    int spans = 0;
    std::size_t n_fft = 0;
    std::size_t overlap = 0;
    std::size_t discard = 0;
    double s_t = 0.0;
    double phi_nl = 0.0;
    KernelEnergies energies;
    std::vector<ModelOutcome> models;
    double kernel_seconds = 0.0;
    double ssfm_seconds = 0.0;
    double power_offset_db = 0.0;
    bool kernel_cache_hit = false;
    std::string error;
};

// Kernel build, every configured model, SSFM reference and MSE on the interior.
PointResult run_point(const RunConfig& cfg, KernelCache& cache);

std::string config_hash(const RunConfig& cfg);

struct SweepResult {
    std::vector<PointResult> rows; // grid order
    bool all_completed() const;
};

std::vector<RunConfig> expand_sweep(const RunConfig& base, const SweepSpec& spec);
SweepResult run_sweep(const RunConfig& base, const SweepSpec& spec, KernelCache& cache);

inline constexpr int kCsvVersion = 1;
void emit_csv(const SweepResult& result, const std::string& path);
std::string csv_header();
std::vector<std::string> csv_rows(const PointResult& r);

} // namespace fiberpert
