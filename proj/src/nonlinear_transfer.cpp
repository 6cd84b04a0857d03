#include "fiberpert/nonlinear_transfer.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fiberpert {

using cplx = std::complex<double>;

namespace {

constexpr int kGaussOrder = 20;

struct GaussLegendre {
    std::array<double, kGaussOrder> x{};
    std::array<double, kGaussOrder> w{};

    GaussLegendre() {
        const int n = kGaussOrder;
        for (int i = 0; i < n; ++i) {
            double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int k = 1; k <= n; ++k) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
                }
                dp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / dp;
                z -= dz;
                if (std::abs(dz) < 1e-16) break;
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
    }
};

const GaussLegendre& gauss() {
    static const GaussLegendre g;
    return g;
}

template <class F>
cplx gl_panel(const F& f, double a, double b) {
    const auto& g = gauss();
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    cplx acc = 0.0;
    for (int i = 0; i < kGaussOrder; ++i) acc += g.w[i] * f(c + h * g.x[i]);
    return h * acc;
}

template <class F>
bool adaptive(const F& f, double a, double b, cplx whole, double tol, int depth, cplx& out) {
    const double m = 0.5 * (a + b);
    const cplx left = gl_panel(f, a, m);
    const cplx right = gl_panel(f, m, b);
    if (std::abs(left + right - whole) <= tol) {
        out += left + right;
        return true;
    }
    if (depth == 0) return false;
    return adaptive(f, a, m, left, 0.5 * tol, depth - 1, out) &&
           adaptive(f, m, b, right, 0.5 * tol, depth - 1, out);
}

// Integral of exp(-alpha x + j Omega beta2 x) over one span, relative to its start.
cplx span_primitive(const SpanSegment& s, double omega_product) {
    const cplx c(-s.alpha, omega_product * s.beta2);
    return s.length * expm1_ratio(c * s.length);
}

} // namespace

cplx expm1_complex(cplx x) {
    const double a = x.real();
    const double b = x.imag();
    const double sb = std::sin(0.5 * b);
    const double re = std::expm1(a) * std::cos(b) - 2.0 * sb * sb;
    const double im = std::exp(a) * std::sin(b);
    return {re, im};
}

cplx expm1_ratio(cplx x) {
    if (std::abs(x) < 1e-3) {
        return 1.0 + x * (1.0 / 2.0 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x * (1.0 / 120.0 + x / 720.0))));
    }
    return expm1_complex(x) / x;
}

cplx hnl_quadrature(const LinkSpec& link, double upsilon1, double upsilon2, double rel_tol) {
    link.validate();
    const double omega = upsilon1 * upsilon2;
    const double l_eff = effective_length(link);
    if (!(l_eff > 0.0)) throw std::invalid_argument("effective length must be positive");
    if (omega == 0.0) return 1.0;

    cplx total = 0.0;
    for (const auto& s : link.segments()) {
        auto f = [&](double x) {
            return std::exp(cplx(-s.alpha * x, omega * (s.b0 + s.beta2 * x)));
        };
        // Tolerance relative to the integral of |integrand| over the span.
        const double scale = -std::expm1(-s.alpha * s.length) / (s.alpha > 0.0 ? s.alpha : 1.0);
        const double span_scale = s.alpha > 0.0 ? scale : s.length;
        const double tol = rel_tol * span_scale;
        // Start from panels short enough to resolve the oscillation.
        const double cycles = std::abs(omega * s.beta2) * s.length / (2.0 * std::numbers::pi);
        const int panels = std::max(1, static_cast<int>(std::ceil(cycles / 2.0)));
        const double w = s.length / panels;
        cplx span_acc = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double a = p * w;
            const double b = (p + 1 == panels) ? s.length : a + w;
            const cplx whole = gl_panel(f, a, b);
            if (!adaptive(f, a, b, whole, tol / panels, 40, span_acc))
                throw std::runtime_error("H_NL quadrature did not converge at Omega=" +
                                         std::to_string(omega));
        }
        total += span_acc;
    }
    return total / l_eff;
}

cplx hnl_closed_form(const LinkSpec& link, double omega_product) {
    link.validate();
    if (!link.homogeneous()) throw std::invalid_argument("closed form requires identical spans");
    const auto segs = link.segments();
    const auto& s = segs.front();
    const double n = static_cast<double>(segs.size());
    const double l_eff = effective_length(link);
    if (omega_product == 0.0) return 1.0;

    const cplx one_span = span_primitive(s, omega_product);
    // Sum over spans of exp(j Omega beta2 Lsp (n-1)) as a geometric series.
    const double theta = omega_product * s.beta2 * s.length;
    cplx series;
    const cplx denom = expm1_complex(cplx(0.0, theta));
    if (std::abs(denom) < 1e-12 * n) {
        series = n;
    } else {
        series = expm1_complex(cplx(0.0, n * theta)) / denom;
    }
    return std::exp(cplx(0.0, omega_product * link.pre_dispersion)) * one_span * series / l_eff;
}

NonlinearTransfer::NonlinearTransfer(const LinkSpec& link) {
    link.validate();
    segs_ = link.segments();
    l_eff_ = fiberpert::effective_length(link);
    if (!(l_eff_ > 0.0)) throw std::invalid_argument("effective length must be positive");
}

cplx NonlinearTransfer::operator()(double omega_product) const {
    if (omega_product == 0.0) return 1.0;
    cplx acc = 0.0;
    for (const auto& s : segs_)
        acc += std::exp(cplx(0.0, omega_product * s.b0)) * span_primitive(s, omega_product);
    return acc / l_eff_;
}

} // namespace fiberpert
