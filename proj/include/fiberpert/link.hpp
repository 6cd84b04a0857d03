#pragma once

#include <complex>
#include <optional>
#include <vector>

namespace fiberpert {

// Unit conversions. Attenuation is a power coefficient: P(z) = P(0) exp(-alpha z).
double db_per_km_to_alpha(double db_per_km);
double ps2_per_km_to_beta2(double ps2_per_km);
double per_w_km_to_gamma(double per_w_km);
double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

struct SpanSpec {
    double length = 0.0; // m
    double alpha = 0.0;  // 1/m
    double beta2 = 0.0;  // s^2/m
    double gamma = 0.0;  // 1/(W m)
};

enum class Amplification { Lossless, Lumped };

// Span with its position along the link and the dispersion accumulated at its input.
struct SpanSegment {
    double z0 = 0.0;
    double length = 0.0;
    double alpha = 0.0; // zero for lossless links
    double beta2 = 0.0;
    double gamma = 0.0;
    double b0 = 0.0;    // B(z0)
};

struct LinkSpec {
    std::vector<SpanSpec> spans;
    Amplification amplification = Amplification::Lumped;
    double pre_dispersion = 0.0; // s^2

    void validate() const;
    double total_length() const;
    bool homogeneous() const;
    std::vector<SpanSegment> segments() const;
    // Index of the span containing z; a boundary belongs to the following span.
    std::size_t span_at(double z) const;
};

LinkSpec make_homogeneous_link(int n_spans, const SpanSpec& span, Amplification amp,
                               double pre_dispersion = 0.0);

struct Channel {
    double launch_power = 0.0; // W
    double freq_offset = 0.0;  // rad/s
};

struct ChannelPlan {
    double symbol_rate = 0.0; // Hz
    double rolloff = 0.0;
    std::vector<Channel> channels;
    std::size_t probe = 0;

    double symbol_period() const { return 1.0 / symbol_rate; }
    void validate() const;
};

double accumulated_dispersion(const LinkSpec& link, double z);
double log_power_profile(const LinkSpec& link, double z); // G(z)
double power_profile(const LinkSpec& link, double z);     // P~(z)
// P~ integrated over [z1, z2]; the interval may cross amplifiers.
double integrated_power(const LinkSpec& link, double z1, double z2);
double effective_length(const LinkSpec& link);

// Length-weighted mean dispersion and L_eff-weighted mean nonlinearity.
double mean_beta2(const LinkSpec& link);
double mean_gamma(const LinkSpec& link);

struct CharacteristicQuantities {
    double l_eff = 0.0;
    double l_d = 0.0;
    double s_t = 0.0;
    std::vector<std::optional<double>> l_wo; // empty for the probe
    std::vector<double> l_nl;
    std::vector<double> s_t_nu;              // zero for the probe
    std::vector<double> phi_nl;
};

CharacteristicQuantities characteristic_quantities(const LinkSpec& link, const ChannelPlan& plan);

std::complex<double> linear_transfer(const LinkSpec& link, double z, double omega);

} // namespace fiberpert
