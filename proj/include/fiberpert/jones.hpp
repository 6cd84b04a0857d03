#pragma once

#include <array>
#include <complex>
#include <vector>

namespace fiberpert {

using cplx = std::complex<double>;

// Dual-polarization field sample or symbol [x, y]^T.
struct JonesVec {
    cplx x{};
    cplx y{};

    double norm2() const { return std::norm(x) + std::norm(y); }

    JonesVec& operator+=(const JonesVec& o) { x += o.x; y += o.y; return *this; }
    JonesVec& operator-=(const JonesVec& o) { x -= o.x; y -= o.y; return *this; }
    JonesVec& operator*=(cplx c) { x *= c; y *= c; return *this; }
};

inline JonesVec operator+(JonesVec a, const JonesVec& b) { return a += b; }
inline JonesVec operator-(JonesVec a, const JonesVec& b) { return a -= b; }
inline JonesVec operator*(cplx c, JonesVec a) { return a *= c; }
inline JonesVec operator*(JonesVec a, cplx c) { return a *= c; }
inline bool operator==(const JonesVec& a, const JonesVec& b) { return a.x == b.x && a.y == b.y; }

// u^H v
inline cplx inner(const JonesVec& u, const JonesVec& v) {
    return std::conj(u.x) * v.x + std::conj(u.y) * v.y;
}

using JonesSequence = std::vector<JonesVec>;

struct StokesVec {
    double s1 = 0.0;
    double s2 = 0.0;
    double s3 = 0.0;

    double norm() const;
    StokesVec& operator+=(const StokesVec& o) { s1 += o.s1; s2 += o.s2; s3 += o.s3; return *this; }
};

inline StokesVec operator+(StokesVec a, const StokesVec& b) { return a += b; }
inline StokesVec operator-(const StokesVec& a) { return {-a.s1, -a.s2, -a.s3}; }

// Row-major 2x2 complex matrix.
struct Matrix2c {
    std::array<cplx, 4> m{};

    cplx& operator()(int r, int c) { return m[2 * r + c]; }
    const cplx& operator()(int r, int c) const { return m[2 * r + c]; }

    static Matrix2c identity() { return Matrix2c{{cplx(1), cplx(0), cplx(0), cplx(1)}}; }
    static Matrix2c zero() { return Matrix2c{}; }

    Matrix2c& operator+=(const Matrix2c& o) {
        for (int i = 0; i < 4; ++i) m[i] += o.m[i];
        return *this;
    }
    Matrix2c& operator*=(cplx c) {
        for (auto& v : m) v *= c;
        return *this;
    }

    cplx trace() const { return m[0] + m[3]; }
    Matrix2c adjoint() const {
        return Matrix2c{{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}};
    }
};

inline Matrix2c operator+(Matrix2c a, const Matrix2c& b) { return a += b; }
inline Matrix2c operator*(cplx c, Matrix2c a) { return a *= c; }

inline Matrix2c operator*(const Matrix2c& a, const Matrix2c& b) {
    Matrix2c r;
    r(0, 0) = a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0);
    r(0, 1) = a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1);
    r(1, 0) = a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0);
    r(1, 1) = a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1);
    return r;
}

inline JonesVec operator*(const Matrix2c& a, const JonesVec& v) {
    return {a(0, 0) * v.x + a(0, 1) * v.y, a(1, 0) * v.x + a(1, 1) * v.y};
}

// u v^H
Matrix2c outer(const JonesVec& u, const JonesVec& v);

// Pauli basis: sigma1 = diag(1,-1), sigma2 = [[0,1],[1,0]], sigma3 = [[0,-j],[j,0]].
Matrix2c pauli(int i);

StokesVec jones_to_stokes(const JonesVec& u);

// s1*sigma1 + s2*sigma2 + s3*sigma3
Matrix2c pauli_expand(const StokesVec& s);

// Coefficients of the Hermitian traceless part of m in the Pauli basis.
StokesVec pauli_project(const Matrix2c& m);

struct OuterDecomposition {
    double power = 0.0;
    StokesVec s;
};

// u u^H = (power I + s.sigma) / 2
OuterDecomposition outer_decompose(const JonesVec& u);

// exp(j phi I + j s.sigma) in closed form.
Matrix2c unitary_rotation(double phi, const StokesVec& s);

} // namespace fiberpert
