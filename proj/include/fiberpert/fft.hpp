#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace fiberpert {

using cplx = std::complex<double>;

// Forward uses exp(-j2pi nk/N), Backward exp(+j2pi nk/N). No normalization is applied.
enum class FftSign { Forward = -1, Backward = +1 };

// Batched 1-D transform over `howmany` contiguous or strided sequences of length n.
// Plans are cached process-wide; execution is thread-safe.
void dft_many(cplx* data, std::size_t n, std::size_t howmany, std::ptrdiff_t stride,
              std::ptrdiff_t dist, FftSign sign);

inline void dft(cplx* data, std::size_t n, FftSign sign) { dft_many(data, n, 1, 1, 0, sign); }
inline void dft(std::vector<cplx>& v, FftSign sign) { dft(v.data(), v.size(), sign); }

// Transform one axis of a row-major n^3 cube.
void dft_cube_axis(cplx* data, std::size_t n, int axis, FftSign sign);

// Per-axis signed 3-D transform of a row-major n^3 cube.
void dft_cube(std::vector<cplx>& data, std::size_t n, const std::array<FftSign, 3>& signs);

// Signed index in [-n/2, n/2) for a DFT bin in [0, n).
inline long fold_index(long mu, long n) { return mu < (n + 1) / 2 ? mu : mu - n; }
inline std::size_t wrap_index(long k, long n) {
    const long r = k % n;
    return static_cast<std::size_t>(r < 0 ? r + n : r);
}

} // namespace fiberpert
