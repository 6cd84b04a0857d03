#pragma once

#include "fiberpert/jones.hpp"
#include "fiberpert/link.hpp"

#include <string>
#include <vector>

namespace fiberpert {

// Sampled dual-polarization field in sqrt(W), periodic in time.
struct FieldGrid {
    JonesSequence samples;
    double sample_rate = 0.0; // Hz
    double z = 0.0;           // m

    std::size_t size() const { return samples.size(); }
    double mean_power() const;
    // Angular frequency of DFT bin m on this grid.
    double omega(std::size_t m) const;
};

struct StepPolicy {
    double phi_max = 3.5e-4; // rad
    void validate() const;
};

struct PropagationStats {
    std::size_t steps = 0;
    double max_phase = 0.0; // largest nonlinear phase applied in one step
};

// Nearest frequency offset (rad/s) that is periodic on an n-sample grid at sample_rate.
double snap_offset(double offset, double sample_rate, std::size_t n);

// Sum of channels shifted by exp(j dw t). Offsets must lie on the grid's DFT bins and
// each shifted band (half width occupied_bandwidth / 2) must stay inside the Nyquist band.
FieldGrid wdm_mux(const std::vector<FieldGrid>& fields, const std::vector<double>& offsets,
                  double occupied_bandwidth);

FieldGrid propagate(FieldGrid u0, const LinkSpec& link, const StepPolicy& policy,
                    PropagationStats* stats = nullptr);

// u <- u exp(-j (8/9) gamma h_eff ||u||^2), pointwise.
void nonlinear_step(FieldGrid& u, double gamma, double h_eff);

// Spectrum per polarization, x in [0, n) and y in [n, 2n); multiplies by
// exp((delta_g - j omega^2 delta_b) / 2).
void linear_step(std::vector<cplx>& spectrum, double sample_rate, double delta_g, double delta_b);

// Binary field dump: "FSIG", version, N_samp, sample_rate, z, then x re, x im, y re, y im per sample.
void write_field(const std::string& path, const FieldGrid& field);
FieldGrid read_field(const std::string& path);

} // namespace fiberpert
