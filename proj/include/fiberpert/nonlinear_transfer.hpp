#pragma once

#include "fiberpert/link.hpp"

#include <complex>

namespace fiberpert {

// Phase-matching function H_NL = (1/L_eff) * integral of exp(G(z) + j Omega B(z)) dz,
// with Omega = upsilon1 * upsilon2.

// Adaptive Gauss-Legendre quadrature per span; throws std::runtime_error if the
// 1e-10 relative tolerance cannot be met.
std::complex<double> hnl_quadrature(const LinkSpec& link, double upsilon1, double upsilon2,
                                    double rel_tol = 1e-10);

// Homogeneous links only: one span primitive times a geometric series over spans.
std::complex<double> hnl_closed_form(const LinkSpec& link, double omega_product);

// Exact per-span primitives summed over an arbitrary (possibly heterogeneous) link.
class NonlinearTransfer {
public:
    explicit NonlinearTransfer(const LinkSpec& link);
    std::complex<double> operator()(double omega_product) const;
    double effective_length() const { return l_eff_; }

private:
    std::vector<SpanSegment> segs_;
    double l_eff_ = 0.0;
};

// (exp(x) - 1) / x, accurate near zero.
std::complex<double> expm1_ratio(std::complex<double> x);
// exp(x) - 1 without cancellation for small |x|.
std::complex<double> expm1_complex(std::complex<double> x);

} // namespace fiberpert
