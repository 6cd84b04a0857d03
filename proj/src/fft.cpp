#include "fiberpert/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace fiberpert {

namespace {

struct PlanKey {
    std::size_t n, howmany;
    std::ptrdiff_t stride, dist;
    std::size_t outer_n;
    std::ptrdiff_t outer_stride;
    int sign;
    auto tie() const { return std::tie(n, howmany, stride, dist, outer_n, outer_stride, sign); }
    bool operator<(const PlanKey& o) const { return tie() < o.tie(); }
};

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [k, p] : plans_) fftw_destroy_plan(p);
    }

    fftw_plan get(const PlanKey& key) {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;

        fftw_iodim dim{static_cast<int>(key.n), static_cast<int>(key.stride), static_cast<int>(key.stride)};
        fftw_iodim hm[2];
        int rank_hm = 0;
        hm[rank_hm++] = {static_cast<int>(key.howmany), static_cast<int>(key.dist), static_cast<int>(key.dist)};
        if (key.outer_n > 1)
            hm[rank_hm++] = {static_cast<int>(key.outer_n), static_cast<int>(key.outer_stride),
                             static_cast<int>(key.outer_stride)};

        std::size_t extent = 1 + (key.n - 1) * key.stride + (key.howmany - 1) * key.dist +
                             (key.outer_n - 1) * key.outer_stride;
        auto* buf = fftw_alloc_complex(extent);
        fftw_plan p = fftw_plan_guru_dft(1, &dim, rank_hm, hm, buf, buf, key.sign,
                                         FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        if (!p) throw std::runtime_error("FFTW failed to create a plan");
        plans_.emplace(key, p);
        return p;
    }

private:
    std::mutex mu_;
    std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

void run(const PlanKey& key, cplx* data) {
    fftw_plan p = cache().get(key);
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, d, d);
}

} // namespace

void dft_many(cplx* data, std::size_t n, std::size_t howmany, std::ptrdiff_t stride,
              std::ptrdiff_t dist, FftSign sign) {
    if (n == 0 || howmany == 0) return;
    run(PlanKey{n, howmany, stride, dist, 1, 0, static_cast<int>(sign)}, data);
}

void dft_cube_axis(cplx* data, std::size_t n, int axis, FftSign sign) {
    const auto nn = static_cast<std::ptrdiff_t>(n);
    PlanKey key{n, n, 1, 1, n, nn * nn, static_cast<int>(sign)};
    switch (axis) {
    case 0: key.stride = nn * nn; key.dist = 1; key.outer_stride = nn; break;
    case 1: key.stride = nn; key.dist = 1; key.outer_stride = nn * nn; break;
    case 2: key.stride = 1; key.dist = nn; key.outer_stride = nn * nn; break;
    default: throw std::out_of_range("cube axis must be 0, 1 or 2");
    }
    run(key, data);
}

void dft_cube(std::vector<cplx>& data, std::size_t n, const std::array<FftSign, 3>& signs) {
    if (data.size() != n * n * n) throw std::invalid_argument("cube size mismatch");
    for (int a = 0; a < 3; ++a) dft_cube_axis(data.data(), n, a, signs[a]);
}

} // namespace fiberpert
