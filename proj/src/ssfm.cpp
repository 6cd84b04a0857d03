#include "fiberpert/ssfm.hpp"

#include "fiberpert/fft.hpp"
#include "fiberpert/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fiberpert {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kKerr = 8.0 / 9.0;

std::vector<cplx> split_pols(const JonesSequence& s) {
    const std::size_t n = s.size();
    std::vector<cplx> buf(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        buf[i] = s[i].x;
        buf[n + i] = s[i].y;
    }
    return buf;
}

void merge_pols(const std::vector<cplx>& buf, JonesSequence& s) {
    const std::size_t n = s.size();
    for (std::size_t i = 0; i < n; ++i) s[i] = {buf[i], buf[n + i]};
}

void to_freq(std::vector<cplx>& buf, std::size_t n) {
    dft_many(buf.data(), n, 2, 1, static_cast<std::ptrdiff_t>(n), FftSign::Forward);
}

void to_time(std::vector<cplx>& buf, std::size_t n) {
    dft_many(buf.data(), n, 2, 1, static_cast<std::ptrdiff_t>(n), FftSign::Backward);
    const double s = 1.0 / static_cast<double>(n);
    for (auto& v : buf) v *= s;
}

void check_finite(const JonesSequence& s, double z) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& v = s[i];
        if (!std::isfinite(v.x.real()) || !std::isfinite(v.x.imag()) || !std::isfinite(v.y.real()) ||
            !std::isfinite(v.y.imag())) {
            std::ostringstream os;
            os << "non-finite field sample " << i << " at z=" << z << " m";
            throw std::runtime_error(os.str());
        }
    }
}

double peak_power(const JonesSequence& s) {
    double m = 0.0;
    for (const auto& v : s) m = std::max(m, v.norm2());
    return m;
}

// Integral of exp(-alpha x) over [x0, x0 + h].
double decay_integral(double alpha, double x0, double h) {
    if (alpha == 0.0) return h;
    return std::exp(-alpha * x0) * (-std::expm1(-alpha * h)) / alpha;
}

// Largest h with gamma (8/9) peak * integral <= phi_max, starting at local position x0.
double step_length(double alpha, double x0, double limit, double budget) {
    if (!std::isfinite(budget)) return limit;
    if (alpha == 0.0) return std::min(limit, budget);
    const double c = alpha * budget * std::exp(alpha * x0);
    if (c >= 1.0) return limit;
    return std::min(limit, -std::log1p(-c) / alpha);
}

} // namespace

double FieldGrid::mean_power() const {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& v : samples) acc += v.norm2();
    return acc / static_cast<double>(samples.size());
}

double FieldGrid::omega(std::size_t m) const {
    const long n = static_cast<long>(samples.size());
    return 2.0 * kPi * sample_rate * static_cast<double>(fold_index(static_cast<long>(m), n)) /
           static_cast<double>(n);
}

void StepPolicy::validate() const {
    if (!(phi_max > 0.0) || !std::isfinite(phi_max)) throw std::invalid_argument("phi_max must be positive");
}

double snap_offset(double offset, double sample_rate, std::size_t n) {
    const double bin = 2.0 * kPi * sample_rate / static_cast<double>(n);
    return std::round(offset / bin) * bin;
}

FieldGrid wdm_mux(const std::vector<FieldGrid>& fields, const std::vector<double>& offsets,
                  double occupied_bandwidth) {
    if (fields.empty()) throw std::invalid_argument("no channels to multiplex");
    if (fields.size() != offsets.size()) throw std::invalid_argument("one offset per channel required");
    const std::size_t n = fields.front().size();
    const double fs = fields.front().sample_rate;
    FieldGrid out;
    out.sample_rate = fs;
    out.z = 0.0;
    out.samples.assign(n, JonesVec{});
    for (std::size_t c = 0; c < fields.size(); ++c) {
        const auto& f = fields[c];
        if (f.size() != n || f.sample_rate != fs) throw std::invalid_argument("channels use different sampling grids");
        const double df = offsets[c] / (2.0 * kPi);
        if (std::abs(df) + 0.5 * occupied_bandwidth > 0.5 * fs) {
            std::ostringstream os;
            os << "channel " << c << " at " << df * 1e-9 << " GHz exceeds the simulation band of "
               << fs * 1e-9 << " GHz";
            throw std::invalid_argument(os.str());
        }
        const double bins = df * static_cast<double>(n) / fs;
        const long ibin = std::lround(bins);
        if (std::abs(bins - static_cast<double>(ibin)) > 1e-6)
            throw std::invalid_argument("channel offset is not a multiple of the frequency resolution");
        for (std::size_t i = 0; i < n; ++i) {
            // Exact phase from the integer bin keeps the carrier periodic on the grid.
            const long r = static_cast<long>((static_cast<long long>(ibin) * static_cast<long long>(i)) %
                                             static_cast<long long>(n));
            const cplx ph = std::polar(1.0, 2.0 * kPi * static_cast<double>(r) / static_cast<double>(n));
            out.samples[i] += ph * f.samples[i];
        }
    }
    return out;
}

void nonlinear_step(FieldGrid& u, double gamma, double h_eff) {
    const double g = kKerr * gamma * h_eff;
    if (g == 0.0) return;
    for (auto& v : u.samples) v *= std::polar(1.0, -g * v.norm2());
}

void linear_step(std::vector<cplx>& spectrum, double sample_rate, double delta_g, double delta_b) {
    if (spectrum.size() % 2 != 0) throw std::invalid_argument("spectrum must hold two polarizations");
    const std::size_t n = spectrum.size() / 2;
    const long nl = static_cast<long>(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double w = 2.0 * kPi * sample_rate * static_cast<double>(fold_index(static_cast<long>(m), nl)) /
                         static_cast<double>(n);
        const cplx h = std::exp(cplx(0.5 * delta_g, -0.5 * w * w * delta_b));
        spectrum[m] *= h;
        spectrum[n + m] *= h;
    }
}

FieldGrid propagate(FieldGrid u, const LinkSpec& link, const StepPolicy& policy, PropagationStats* stats) {
    link.validate();
    policy.validate();
    const std::size_t n = u.size();
    if (n == 0) throw std::invalid_argument("empty field");
    check_finite(u.samples, u.z);
    PropagationStats st;

    std::vector<cplx> buf;
    if (link.pre_dispersion != 0.0) {
        buf = split_pols(u.samples);
        to_freq(buf, n);
        linear_step(buf, u.sample_rate, 0.0, link.pre_dispersion);
        to_time(buf, n);
        merge_pols(buf, u.samples);
    }

    // The field is tracked as u / sqrt(P~), so the linear step is pure dispersion and
    // the lumped amplifier at each span end leaves it unchanged.
    for (const auto& seg : link.segments()) {
        double x = 0.0;
        while (x < seg.length) {
            const double remaining = seg.length - x;
            const double peak = peak_power(u.samples);
            const double rate = kKerr * seg.gamma * peak;
            const double budget = rate > 0.0 ? policy.phi_max / rate : std::numeric_limits<double>::infinity();
            double h = step_length(seg.alpha, x, remaining, budget);
            if (remaining - h < 1e-9 * seg.length) h = remaining;
            const double h_eff = decay_integral(seg.alpha, x, h);

            buf = split_pols(u.samples);
            to_freq(buf, n);
            linear_step(buf, u.sample_rate, 0.0, 0.5 * h * seg.beta2);
            to_time(buf, n);
            merge_pols(buf, u.samples);

            nonlinear_step(u, seg.gamma, h_eff);
            st.max_phase = std::max(st.max_phase, rate * h_eff);

            buf = split_pols(u.samples);
            to_freq(buf, n);
            linear_step(buf, u.sample_rate, 0.0, 0.5 * h * seg.beta2);
            to_time(buf, n);
            merge_pols(buf, u.samples);

            x = (h == remaining) ? seg.length : x + h;
            ++st.steps;
            check_finite(u.samples, seg.z0 + x);
        }
    }
    u.z = link.total_length();
    if (stats) *stats = st;
    return u;
}

void write_field(const std::string& path, const FieldGrid& field) {
    BinaryWriter w(path);
    w.bytes("FSIG", 4);
    w.u32(1);
    w.u64(field.size());
    w.f64(field.sample_rate);
    w.f64(field.z);
    for (const auto& v : field.samples) {
        w.f64(v.x.real());
        w.f64(v.x.imag());
        w.f64(v.y.real());
        w.f64(v.y.imag());
    }
    w.close();
}

FieldGrid read_field(const std::string& path) {
    BinaryReader r(path);
    r.expect_magic("FSIG");
    const auto version = r.u32();
    if (version != 1) throw std::runtime_error(path + ": unsupported field file version " + std::to_string(version));
    FieldGrid f;
    const auto n = r.u64();
    f.sample_rate = r.f64();
    f.z = r.f64();
    f.samples.resize(n);
    for (auto& v : f.samples) {
        const double xr = r.f64(), xi = r.f64(), yr = r.f64(), yi = r.f64();
        v = {cplx(xr, xi), cplx(yr, yi)};
    }
    return f;
}

} // namespace fiberpert
