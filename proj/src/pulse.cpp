#include "fiberpert/pulse.hpp"

#include <cmath>
#include <numbers>

namespace fiberpert {

double rrc_shape(double omega, double period, double rolloff) {
    const double pi = std::numbers::pi;
    const double edge = pi / period;
    if (rolloff <= 0.0) return (omega >= -edge && omega < edge) ? 1.0 : 0.0;
    const double w = std::abs(omega);
    const double lo = (1.0 - rolloff) * edge;
    const double hi = (1.0 + rolloff) * edge;
    if (w <= lo) return 1.0;
    if (w >= hi) return 0.0;
    return std::cos(period / (4.0 * rolloff) * (w - lo));
}

} // namespace fiberpert
