#include "fiberpert/link.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fiberpert {

double db_per_km_to_alpha(double db_per_km) {
    return db_per_km / (10.0 * std::log10(std::numbers::e)) / 1000.0;
}

double ps2_per_km_to_beta2(double ps2_per_km) {
    return ps2_per_km * 1e-24 / 1e3;
}

double per_w_km_to_gamma(double per_w_km) {
    return per_w_km / 1e3;
}

double dbm_to_watt(double dbm) {
    return 1e-3 * std::pow(10.0, dbm / 10.0);
}

double watt_to_dbm(double watt) {
    return 10.0 * std::log10(watt / 1e-3);
}

void LinkSpec::validate() const {
    if (spans.empty()) throw std::invalid_argument("link has no spans");
    for (std::size_t i = 0; i < spans.size(); ++i) {
        const auto& s = spans[i];
        if (!(s.length > 0.0) || !std::isfinite(s.length))
            throw std::invalid_argument("span " + std::to_string(i) + ": length must be positive");
        if (!(s.alpha >= 0.0))
            throw std::invalid_argument("span " + std::to_string(i) + ": alpha must be non-negative");
        if (!std::isfinite(s.beta2) || !std::isfinite(s.gamma))
            throw std::invalid_argument("span " + std::to_string(i) + ": non-finite parameter");
    }
}

double LinkSpec::total_length() const {
    double l = 0.0;
    for (const auto& s : spans) l += s.length;
    return l;
}

bool LinkSpec::homogeneous() const {
    for (const auto& s : spans) {
        const auto& f = spans.front();
        if (s.length != f.length || s.alpha != f.alpha || s.beta2 != f.beta2 || s.gamma != f.gamma)
            return false;
    }
    return true;
}

std::vector<SpanSegment> LinkSpec::segments() const {
    std::vector<SpanSegment> out;
    out.reserve(spans.size());
    double z = 0.0;
    double b = pre_dispersion;
    for (const auto& s : spans) {
        SpanSegment seg;
        seg.z0 = z;
        seg.length = s.length;
        seg.alpha = amplification == Amplification::Lossless ? 0.0 : s.alpha;
        seg.beta2 = s.beta2;
        seg.gamma = s.gamma;
        seg.b0 = b;
        out.push_back(seg);
        z += s.length;
        b += s.beta2 * s.length;
    }
    return out;
}

std::size_t LinkSpec::span_at(double z) const {
    double z0 = 0.0;
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (z < z0 + spans[i].length) return i;
        z0 += spans[i].length;
    }
    return spans.size() - 1;
}

LinkSpec make_homogeneous_link(int n_spans, const SpanSpec& span, Amplification amp,
                               double pre_dispersion) {
    if (n_spans < 1) throw std::invalid_argument("number of spans must be at least 1");
    LinkSpec link;
    link.spans.assign(static_cast<std::size_t>(n_spans), span);
    link.amplification = amp;
    link.pre_dispersion = pre_dispersion;
    link.validate();
    return link;
}

void ChannelPlan::validate() const {
    if (!(symbol_rate > 0.0)) throw std::invalid_argument("symbol rate must be positive");
    if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw std::invalid_argument("rolloff must lie in [0, 1]");
    if (channels.empty()) throw std::invalid_argument("channel plan is empty");
    if (probe >= channels.size()) throw std::invalid_argument("probe index out of range");
    if (channels[probe].freq_offset != 0.0) throw std::invalid_argument("probe must sit at zero offset");
    for (const auto& c : channels)
        if (!(c.launch_power >= 0.0)) throw std::invalid_argument("launch power must be non-negative");
}

namespace {

void check_range(const LinkSpec& link, double z) {
    const double l = link.total_length();
    if (!(z >= 0.0 && z <= l * (1.0 + 1e-12)))
        throw std::out_of_range("position " + std::to_string(z) + " m outside link [0, " +
                                std::to_string(l) + "]");
}

// Integral of exp(-alpha x) over [0, d].
double decay_integral(double alpha, double d) {
    if (alpha * d < 1e-12) return d * (1.0 - 0.5 * alpha * d);
    return -std::expm1(-alpha * d) / alpha;
}

} // namespace

double accumulated_dispersion(const LinkSpec& link, double z) {
    check_range(link, z);
    double b = link.pre_dispersion;
    double z0 = 0.0;
    for (const auto& s : link.spans) {
        const double d = std::min(std::max(z - z0, 0.0), s.length);
        b += s.beta2 * d;
        z0 += s.length;
    }
    return b;
}

double log_power_profile(const LinkSpec& link, double z) {
    check_range(link, z);
    if (link.amplification == Amplification::Lossless) return 0.0;
    if (z >= link.total_length()) return 0.0;
    const auto segs = link.segments();
    const auto& s = segs[link.span_at(z)];
    return -s.alpha * (z - s.z0);
}

double power_profile(const LinkSpec& link, double z) {
    return std::exp(log_power_profile(link, z));
}

double integrated_power(const LinkSpec& link, double z1, double z2) {
    check_range(link, z1);
    check_range(link, z2);
    if (z2 < z1) throw std::invalid_argument("integration bounds reversed");
    double acc = 0.0;
    for (const auto& s : link.segments()) {
        const double a = std::max(z1, s.z0);
        const double b = std::min(z2, s.z0 + s.length);
        if (b <= a) continue;
        acc += std::exp(-s.alpha * (a - s.z0)) * decay_integral(s.alpha, b - a);
    }
    return acc;
}

double effective_length(const LinkSpec& link) {
    double acc = 0.0;
    for (const auto& s : link.segments()) acc += decay_integral(s.alpha, s.length);
    return acc;
}

double mean_beta2(const LinkSpec& link) {
    double acc = 0.0;
    for (const auto& s : link.spans) acc += s.beta2 * s.length;
    return acc / link.total_length();
}

double mean_gamma(const LinkSpec& link) {
    double acc = 0.0;
    for (const auto& s : link.segments()) acc += s.gamma * decay_integral(s.alpha, s.length);
    return acc / effective_length(link);
}

CharacteristicQuantities characteristic_quantities(const LinkSpec& link, const ChannelPlan& plan) {
    link.validate();
    plan.validate();
    CharacteristicQuantities q;
    const double b2 = std::abs(mean_beta2(link));
    const double rs = plan.symbol_rate;
    const double gamma = mean_gamma(link);
    q.l_eff = effective_length(link);
    q.l_d = b2 > 0.0 ? 1.0 / (2.0 * std::numbers::pi * b2 * rs * rs)
                     : std::numeric_limits<double>::infinity();
    q.s_t = q.l_eff / q.l_d;
    for (std::size_t i = 0; i < plan.channels.size(); ++i) {
        const auto& c = plan.channels[i];
        const double dw = std::abs(c.freq_offset);
        if (i == plan.probe || dw == 0.0) {
            q.l_wo.emplace_back(std::nullopt);
            q.s_t_nu.push_back(0.0);
        } else {
            const double lwo = b2 > 0.0 ? 1.0 / (dw * b2 * rs) : std::numeric_limits<double>::infinity();
            q.l_wo.emplace_back(lwo);
            q.s_t_nu.push_back(q.l_eff / lwo);
        }
        const double lnl = 1.0 / (gamma * c.launch_power);
        q.l_nl.push_back(lnl);
        q.phi_nl.push_back(8.0 / 9.0 * gamma * c.launch_power * q.l_eff);
    }
    return q;
}

std::complex<double> linear_transfer(const LinkSpec& link, double z, double omega) {
    const double g = log_power_profile(link, z);
    const double b = accumulated_dispersion(link, z);
    return std::exp(std::complex<double>(0.5 * g, -0.5 * omega * omega * b));
}

} // namespace fiberpert
