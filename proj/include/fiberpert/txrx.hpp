#pragma once

#include "fiberpert/jones.hpp"
#include "fiberpert/link.hpp"
#include "fiberpert/pulse.hpp"
#include "fiberpert/ssfm.hpp"

#include <cstdint>

namespace fiberpert {

// Square QAM on each polarization, scaled so that E||a||^2 = 1 over the 4-D symbol.
struct ConstellationSpec {
    int order = 64; // points per polarization

    int levels() const; // sqrt(order), throws for invalid orders
    double scale() const;
};

JonesSequence generate_symbols(const ConstellationSpec& spec, std::size_t n_sym, std::uint64_t seed);

// s(t) = sum_k a[k] g(t - kT), with G(omega) = T sqrt(P) rrc(omega), built in the DFT domain.
FieldGrid modulate(const JonesSequence& symbols, const PulseSpec& pulse, double symbol_rate,
                   std::size_t oversampling);

// Linear-channel inverse, matched RRC filter and T-spaced sampling, scaled so that a
// linear run returns the transmitted symbols.
JonesSequence receiver_frontend(const FieldGrid& field, const LinkSpec& link, const PulseSpec& pulse,
                                double symbol_rate);

inline constexpr double kMseFloorDb = -300.0;

// Mean ||y1[k] - y2[k]||^2 over [discard, n - discard), in dB; zero maps to kMseFloorDb.
double mse_db(const JonesSequence& y1, const JonesSequence& y2, std::size_t discard_edges);
double mse_linear(const JonesSequence& y1, const JonesSequence& y2, std::size_t discard_edges);

} // namespace fiberpert
