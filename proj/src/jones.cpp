#include "fiberpert/jones.hpp"

#include <cmath>
#include <stdexcept>

namespace fiberpert {

namespace {
constexpr cplx J{0.0, 1.0};
}

double StokesVec::norm() const {
    return std::sqrt(s1 * s1 + s2 * s2 + s3 * s3);
}

Matrix2c outer(const JonesVec& u, const JonesVec& v) {
    return Matrix2c{{u.x * std::conj(v.x), u.x * std::conj(v.y),
                     u.y * std::conj(v.x), u.y * std::conj(v.y)}};
}

Matrix2c pauli(int i) {
    switch (i) {
    case 1: return Matrix2c{{cplx(1), cplx(0), cplx(0), cplx(-1)}};
    case 2: return Matrix2c{{cplx(0), cplx(1), cplx(1), cplx(0)}};
    case 3: return Matrix2c{{cplx(0), -J, J, cplx(0)}};
    default: throw std::out_of_range("pauli index must be 1, 2 or 3");
    }
}

StokesVec jones_to_stokes(const JonesVec& u) {
    const cplx xy = std::conj(u.x) * u.y;
    return {std::norm(u.x) - std::norm(u.y), 2.0 * xy.real(), 2.0 * xy.imag()};
}

Matrix2c pauli_expand(const StokesVec& s) {
    return Matrix2c{{cplx(s.s1), cplx(s.s2, -s.s3), cplx(s.s2, s.s3), cplx(-s.s1)}};
}

StokesVec pauli_project(const Matrix2c& m) {
    return {0.5 * (m(0, 0) - m(1, 1)).real(),
            0.5 * (m(0, 1) + m(1, 0)).real(),
            0.5 * (m(1, 0).imag() - m(0, 1).imag())};
}

OuterDecomposition outer_decompose(const JonesVec& u) {
    return {u.norm2(), jones_to_stokes(u)};
}

Matrix2c unitary_rotation(double phi, const StokesVec& s) {
    const cplx ph = std::polar(1.0, phi);
    const double n = s.norm();
    if (n < 1e-30) return ph * Matrix2c::identity();
    const double c = std::cos(n);
    const double sn = std::sin(n) / n;
    Matrix2c r = (J * sn) * pauli_expand(s);
    r(0, 0) += c;
    r(1, 1) += c;
    return ph * r;
}

} // namespace fiberpert
