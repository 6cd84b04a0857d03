#include "fiberpert/txrx.hpp"

#include "fiberpert/fft.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace fiberpert {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t integer_ratio(double a, double b, const char* what) {
    const double r = a / b;
    const double ri = std::round(r);
    if (ri < 1.0 || std::abs(r - ri) > 1e-9 * ri) throw std::invalid_argument(std::string(what) + " must be an integer");
    return static_cast<std::size_t>(ri);
}

} // namespace

int ConstellationSpec::levels() const {
    if (order < 4) throw std::invalid_argument("constellation order must be at least 4");
    const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(order))));
    if (m * m != order || (order & (order - 1)) != 0)
        throw std::invalid_argument("constellation order " + std::to_string(order) +
                                    " is not a square power of two");
    return m;
}

double ConstellationSpec::scale() const {
    // E|a_pol|^2 = 2 (M - 1) / 3 for levels +-1, +-3, ...
    const double e_pol = 2.0 * (order - 1) / 3.0;
    return 1.0 / std::sqrt(2.0 * e_pol);
}

JonesSequence generate_symbols(const ConstellationSpec& spec, std::size_t n_sym, std::uint64_t seed) {
    const int m = spec.levels();
    const double s = spec.scale();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, m - 1);
    auto level = [&] { return static_cast<double>(2 * pick(rng) - (m - 1)) * s; };
    JonesSequence out(n_sym);
    for (auto& a : out) {
        const double xr = level(), xi = level(), yr = level(), yi = level();
        a = {cplx(xr, xi), cplx(yr, yi)};
    }
    return out;
}

FieldGrid modulate(const JonesSequence& symbols, const PulseSpec& pulse, double symbol_rate,
                   std::size_t oversampling) {
    if (oversampling < 1 || static_cast<double>(oversampling) < 1.0 + pulse.rolloff)
        throw std::invalid_argument("oversampling must cover the pulse bandwidth");
    if (!(symbol_rate > 0.0)) throw std::invalid_argument("symbol rate must be positive");
    const std::size_t n = symbols.size() * oversampling;
    const double t = 1.0 / symbol_rate;
    const double amp = std::sqrt(pulse.energy / t) * static_cast<double>(oversampling);

    std::vector<cplx> buf(2 * n, cplx(0.0));
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        buf[k * oversampling] = symbols[k].x;
        buf[n + k * oversampling] = symbols[k].y;
    }
    dft_many(buf.data(), n, 2, 1, static_cast<std::ptrdiff_t>(n), FftSign::Forward);
    FieldGrid f;
    f.sample_rate = symbol_rate * static_cast<double>(oversampling);
    f.z = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double w = 2.0 * kPi * f.sample_rate * static_cast<double>(fold_index(static_cast<long>(m), static_cast<long>(n))) /
                         static_cast<double>(n);
        const double g = amp * rrc_shape(w, t, pulse.rolloff) / static_cast<double>(n);
        buf[m] *= g;
        buf[n + m] *= g;
    }
    dft_many(buf.data(), n, 2, 1, static_cast<std::ptrdiff_t>(n), FftSign::Backward);
    f.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.samples[i] = {buf[i], buf[n + i]};
    return f;
}

JonesSequence receiver_frontend(const FieldGrid& field, const LinkSpec& link, const PulseSpec& pulse,
                                double symbol_rate) {
    const std::size_t n = field.size();
    const std::size_t os = integer_ratio(field.sample_rate, symbol_rate, "oversampling factor");
    if (static_cast<double>(os) < 1.0 + pulse.rolloff)
        throw std::invalid_argument("field sample rate below the pulse bandwidth");
    if (n % os != 0) throw std::invalid_argument("field length is not a whole number of symbols");
    if (!(pulse.energy > 0.0)) throw std::invalid_argument("pulse energy must be positive");
    const double t = 1.0 / symbol_rate;
    const double z = link.total_length();
    const double norm = 1.0 / (std::sqrt(pulse.energy / t) * static_cast<double>(n));

    std::vector<cplx> buf(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        buf[i] = field.samples[i].x;
        buf[n + i] = field.samples[i].y;
    }
    dft_many(buf.data(), n, 2, 1, static_cast<std::ptrdiff_t>(n), FftSign::Forward);
    for (std::size_t m = 0; m < n; ++m) {
        const double w = field.omega(m);
        const double s = rrc_shape(w, t, pulse.rolloff);
        const cplx h = s == 0.0 ? cplx(0.0) : std::conj(linear_transfer(link, z, w)) * (s * norm);
        buf[m] *= h;
        buf[n + m] *= h;
    }
    dft_many(buf.data(), n, 2, 1, static_cast<std::ptrdiff_t>(n), FftSign::Backward);
    JonesSequence y(n / os);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = {buf[k * os], buf[n + k * os]};
    return y;
}

double mse_linear(const JonesSequence& y1, const JonesSequence& y2, std::size_t discard_edges) {
    if (y1.size() != y2.size()) throw std::invalid_argument("sequences differ in length");
    if (2 * discard_edges >= y1.size()) throw std::invalid_argument("edge discard leaves an empty interior");
    double acc = 0.0;
    for (std::size_t k = discard_edges; k < y1.size() - discard_edges; ++k) acc += (y1[k] - y2[k]).norm2();
    return acc / static_cast<double>(y1.size() - 2 * discard_edges);
}

double mse_db(const JonesSequence& y1, const JonesSequence& y2, std::size_t discard_edges) {
    const double v = mse_linear(y1, y2, discard_edges);
    if (!(v > 0.0)) return kMseFloorDb;
    return std::max(kMseFloorDb, 10.0 * std::log10(v));
}

} // namespace fiberpert
