#include "fiberpert/models.hpp"

#include "fiberpert/fft.hpp"
#include "fiberpert/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fiberpert {

namespace {

constexpr cplx J{0.0, 1.0};

void check_kernel(const ChannelKernel& k, bool need_td, bool need_fd, const std::string& who) {
    if (need_td && !k.td) throw std::invalid_argument("missing time-domain kernel for " + who);
    if (need_fd && !k.fd) throw std::invalid_argument("missing frequency-domain kernel for " + who);
}

// Zero-extended copy: padded[k + pad] = seq[k].
struct Padded {
    std::vector<JonesVec> data;
    long pad = 0;
    const JonesVec& operator()(long k) const { return data[static_cast<std::size_t>(k + pad)]; }
};

Padded make_padded(const JonesSequence& seq, int memory) {
    Padded p;
    p.pad = memory;
    p.data.assign(seq.size() + 2 * static_cast<std::size_t>(memory), JonesVec{});
    std::copy(seq.begin(), seq.end(), p.data.begin() + memory);
    return p;
}

int max_memory(const ModelInput& in) {
    int m = in.self.td ? in.self.td->memory() : 0;
    for (const auto& i : in.interferers) m = std::max(m, i.kernel.td ? i.kernel.td->memory() : 0);
    return m;
}

// a1 (a2^H a3)
inline JonesVec sci_term(const JonesVec& a1, const JonesVec& a2, const JonesVec& a3) {
    return inner(a2, a3) * a1;
}

// (b1 b2^H + b2^H b1 I) a3
inline JonesVec xci_term(const JonesVec& b1, const JonesVec& b2, const JonesVec& a3) {
    return inner(b2, a3) * b1 + inner(b2, b1) * a3;
}

// (2 u v^H - v^H u I) expressed through its Pauli coefficients.
inline Matrix2c stokes_pair(const JonesVec& u, const JonesVec& v) {
    Matrix2c m = outer(u, v);
    m *= 2.0;
    const cplx c = inner(v, u);
    m(0, 0) -= c;
    m(1, 1) -= c;
    return m;
}

JonesSequence dft_block(const JonesSequence& blk, FftSign sign) {
    const std::size_t n = blk.size();
    std::vector<cplx> buf(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        buf[i] = blk[i].x;
        buf[n + i] = blk[i].y;
    }
    dft_many(buf.data(), n, 2, 1, static_cast<std::ptrdiff_t>(n), sign);
    JonesSequence out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = {buf[i], buf[n + i]};
    return out;
}

JonesSequence idft_block(const JonesSequence& spec) {
    auto out = dft_block(spec, FftSign::Backward);
    const double s = 1.0 / static_cast<double>(spec.size());
    for (auto& v : out) v *= s;
    return out;
}

using GramMatrix = std::vector<cplx>; // row-major, entry [i * n + j] = u[i]^H v[j]

GramMatrix gram(const JonesSequence& u, const JonesSequence& v) {
    const std::size_t n = u.size();
    GramMatrix g(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] = inner(u[i], v[j]);
    return g;
}

// Spectral perturbation of one block before the -j phi / N^2 factor.
// exclude_degenerate drops the index sets handled by the multiplicative term.
JonesSequence fd_sci_sum(const JonesSequence& a, const FreqKernelGrid& h, bool exclude_degenerate) {
    const std::size_t n = a.size();
    const GramMatrix g = gram(a, a);
    JonesSequence out(n);
    for (std::size_t mu = 0; mu < n; ++mu) {
        JonesVec acc{};
        for (std::size_t m1 = 0; m1 < n; ++m1) {
            cplx s = 0.0;
            const cplx* hrow = &h.values[m1 * n * n];
            for (std::size_t m2 = 0; m2 < n; ++m2) {
                const std::size_t m3 = (mu + n - m1 + m2) % n;
                if (exclude_degenerate && (m2 == m1 || m2 == m3)) continue;
                s += g[m2 * n + m3] * hrow[m2 * n + m3];
            }
            acc += s * a[m1];
        }
        out[mu] = acc;
    }
    return out;
}

JonesSequence fd_xci_sum(const JonesSequence& a, const JonesSequence& b, const FreqKernelGrid& h,
                         bool exclude_degenerate) {
    const std::size_t n = a.size();
    const GramMatrix gba = gram(b, a);
    const GramMatrix gbb = gram(b, b);
    JonesSequence out(n);
    for (std::size_t mu = 0; mu < n; ++mu) {
        JonesVec acc{};
        for (std::size_t m1 = 0; m1 < n; ++m1) {
            cplx s = 0.0;
            JonesVec v{};
            const cplx* hrow = &h.values[m1 * n * n];
            for (std::size_t m2 = 0; m2 < n; ++m2) {
                if (exclude_degenerate && m2 == m1) continue;
                const std::size_t m3 = (mu + n - m1 + m2) % n;
                const cplx hv = hrow[m2 * n + m3];
                s += gba[m2 * n + m3] * hv;
                v += (gbb[m2 * n + m1] * hv) * a[m3];
            }
            acc += s * b[m1];
            acc += v;
        }
        out[mu] = acc;
    }
    return out;
}

void check_grid(const FreqKernelGrid& g, const BlockFrame& frame, const std::string& who) {
    if (g.n_fft != frame.n_fft)
        throw std::invalid_argument("kernel grid for " + who + " has n_fft " + std::to_string(g.n_fft) +
                                    ", block uses " + std::to_string(frame.n_fft));
    const double leak = overlap_leakage(g, frame);
    if (leak > frame.max_leakage) {
        std::ostringstream os;
        os << "overlap K=" << frame.overlap << " too small for kernel memory of " << who
           << ": leaked energy fraction " << leak << " exceeds " << frame.max_leakage;
        throw std::domain_error(os.str());
    }
}

template <class PerBlock>
JonesSequence run_blocks(const ModelInput& in, const BlockFrame& frame, PerBlock&& per_block) {
    frame.validate();
    check_grid(*in.self.fd, frame, "probe");
    for (const auto& i : in.interferers) check_grid(*i.kernel.fd, frame, "channel " + std::to_string(i.nu));

    const auto a_blocks = overlap_save_split(in.probe, frame);
    std::vector<std::vector<JonesSequence>> b_blocks;
    for (const auto& i : in.interferers) b_blocks.push_back(overlap_save_split(i.symbols, frame));

    std::vector<JonesSequence> y_blocks(a_blocks.size());
    parallel_for(a_blocks.size(), [&](std::size_t l) {
        std::vector<const JonesSequence*> bl;
        for (const auto& b : b_blocks) bl.push_back(&b[l]);
        y_blocks[l] = per_block(a_blocks[l], bl);
    });
    return overlap_save_append(y_blocks, frame, in.probe.size());
}

} // namespace

void ModelInput::validate(bool need_td, bool need_fd) const {
    check_kernel(self, need_td, need_fd, "probe");
    for (const auto& i : interferers) {
        if (i.symbols.size() != probe.size())
            throw std::invalid_argument("interferer " + std::to_string(i.nu) + " sequence length differs from probe");
        check_kernel(i.kernel, need_td, need_fd, "channel " + std::to_string(i.nu));
    }
}

void BlockFrame::validate() const {
    if (n_fft < 2) throw std::invalid_argument("block length must be at least 2");
    if (overlap == 0 || overlap >= n_fft) throw std::invalid_argument("overlap must satisfy 0 < K < n_fft");
}

double overlap_leakage(const FreqKernelGrid& grid, const BlockFrame& frame) {
    const auto h = kernel_time_dense(grid);
    const long n = static_cast<long>(grid.n_fft);
    const long lo = -static_cast<long>(frame.head());
    const long hi = static_cast<long>(frame.overlap - frame.head());
    auto outside = [&](long k) { return k < lo || k > hi; };
    double total = 0.0, leak = 0.0;
    for (long k1 = -n / 2; k1 < n / 2; ++k1)
        for (long k2 = -n / 2; k2 < n / 2; ++k2)
            for (long k3 = -n / 2; k3 < n / 2; ++k3) {
                const double p = std::norm(h[(wrap_index(k1, n) * n + wrap_index(k2, n)) * n + wrap_index(k3, n)]);
                total += p;
                if (outside(k1) || outside(k2) || outside(k3)) leak += p;
            }
    return total > 0.0 ? leak / total : 0.0;
}

JonesSequence reg_td(const ModelInput& in) {
    in.validate(true, false);
    const long n = static_cast<long>(in.probe.size());
    const int mem = max_memory(in);
    const Padded a = make_padded(in.probe, mem);
    std::vector<Padded> b;
    for (const auto& i : in.interferers) b.push_back(make_padded(i.symbols, mem));

    JonesSequence y(in.probe);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ku) {
        const long k = static_cast<long>(ku);
        JonesVec d{};
        JonesVec acc{};
        for (const auto& e : in.self.td->entries)
            acc += e.h * sci_term(a(k + e.k1), a(k + e.k2), a(k + e.k3));
        d += (-J * in.self.phi_nl) * acc;
        for (std::size_t i = 0; i < in.interferers.size(); ++i) {
            const auto& it = in.interferers[i];
            JonesVec ax{};
            for (const auto& e : it.kernel.td->entries)
                ax += e.h * xci_term(b[i](k + e.k1), b[i](k + e.k2), a(k + e.k3));
            d += (-J * it.kernel.phi_nl) * ax;
        }
        y[ku] += d;
    });
    return y;
}

JonesSequence reglog_td(const ModelInput& in) {
    in.validate(true, false);
    const long n = static_cast<long>(in.probe.size());
    const int mem = max_memory(in);
    const Padded a = make_padded(in.probe, mem);
    std::vector<Padded> b;
    for (const auto& i : in.interferers) b.push_back(make_padded(i.symbols, mem));

    struct Split {
        std::vector<KernelEntry> additive;
        std::vector<KernelEntry> rotation; // entries driving phase and Stokes terms
        cplx center = 0.0;
    };
    auto split = [](const TimeKernelSparse& k, bool is_probe) {
        Split s;
        for (const auto& e : k.entries) {
            if (!is_multiplicative_td(e.k1, e.k2, e.k3, is_probe)) {
                s.additive.push_back(e);
            } else if (is_probe && e.k1 == 0 && e.k2 == 0 && e.k3 == 0) {
                s.center = e.h;
            } else if (e.k3 == 0) {
                s.rotation.push_back(e);
            }
        }
        return s;
    };
    const Split self = split(*in.self.td, true);
    std::vector<Split> xs;
    for (const auto& i : in.interferers) xs.push_back(split(*i.kernel.td, false));

    JonesSequence y(in.probe.size());
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ku) {
        const long k = static_cast<long>(ku);
        const double phi_p = in.self.phi_nl;

        JonesVec add{};
        for (const auto& e : self.additive) add += e.h * sci_term(a(k + e.k1), a(k + e.k2), a(k + e.k3));
        JonesVec delta = (-J * phi_p) * add;

        cplx ph = 0.0;
        Matrix2c m = Matrix2c::zero();
        for (const auto& e : self.rotation) {
            const JonesVec& a1 = a(k + e.k1);
            const JonesVec& a2 = a(k + e.k2);
            ph += inner(a2, a1) * e.h;
            m += e.h * stokes_pair(a1, a2);
        }
        double phase = -1.5 * phi_p * ph.real() - phi_p * a(k).norm2() * self.center.real();
        Matrix2c ms = (-0.5 * phi_p) * m;

        for (std::size_t i = 0; i < in.interferers.size(); ++i) {
            const double phi_x = in.interferers[i].kernel.phi_nl;
            const auto& bs = b[i];
            JonesVec ax{};
            for (const auto& e : xs[i].additive) ax += e.h * xci_term(bs(k + e.k1), bs(k + e.k2), a(k + e.k3));
            delta += (-J * phi_x) * ax;

            cplx xp = 0.0;
            Matrix2c xm = Matrix2c::zero();
            for (const auto& e : xs[i].rotation) {
                const JonesVec& b1 = bs(k + e.k1);
                const JonesVec& b2 = bs(k + e.k2);
                xp += inner(b2, b1) * e.h;
                xm += e.h * stokes_pair(b1, b2);
            }
            phase += -1.5 * phi_x * xp.real();
            ms += (-0.5 * phi_x) * xm;
        }
        const Matrix2c r = unitary_rotation(phase, pauli_project(ms));
        y[ku] = r * (a(k) + delta);
    });
    return y;
}

JonesSequence reg_fd(const ModelInput& in, const BlockFrame& frame) {
    in.validate(false, true);
    const double n = static_cast<double>(frame.n_fft);
    return run_blocks(in, frame, [&](const JonesSequence& blk, const std::vector<const JonesSequence*>& bl) {
        const JonesSequence a = dft_block(blk, FftSign::Forward);
        JonesSequence d = fd_sci_sum(a, *in.self.fd, false);
        for (auto& v : d) v *= -J * in.self.phi_nl / (n * n);
        for (std::size_t i = 0; i < bl.size(); ++i) {
            const JonesSequence b = dft_block(*bl[i], FftSign::Forward);
            const JonesSequence dx = fd_xci_sum(a, b, *in.interferers[i].kernel.fd, false);
            const cplx f = -J * in.interferers[i].kernel.phi_nl / (n * n);
            for (std::size_t mu = 0; mu < d.size(); ++mu) d[mu] += f * dx[mu];
        }
        JonesSequence y = idft_block(d);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += blk[i];
        return y;
    });
}

JonesSequence reglog_fd(const ModelInput& in, const BlockFrame& frame) {
    in.validate(false, true);
    const double n = static_cast<double>(frame.n_fft);
    return run_blocks(in, frame, [&](const JonesSequence& blk, const std::vector<const JonesSequence*>& bl) {
        const JonesSequence a = dft_block(blk, FftSign::Forward);
        const double phi_p = in.self.phi_nl;
        JonesSequence d = fd_sci_sum(a, *in.self.fd, true);
        for (auto& v : d) v *= -J * phi_p / (n * n);

        double power = 0.0;
        StokesVec stokes;
        for (const auto& v : a) {
            power += v.norm2();
            stokes += jones_to_stokes(v);
        }
        double phase = -1.5 * phi_p / (n * n) * power;
        const double sf = -0.5 * phi_p / (n * n);
        StokesVec s{sf * stokes.s1, sf * stokes.s2, sf * stokes.s3};

        for (std::size_t i = 0; i < bl.size(); ++i) {
            const double phi_x = in.interferers[i].kernel.phi_nl;
            const JonesSequence b = dft_block(*bl[i], FftSign::Forward);
            const JonesSequence dx = fd_xci_sum(a, b, *in.interferers[i].kernel.fd, true);
            const cplx f = -J * phi_x / (n * n);
            for (std::size_t mu = 0; mu < d.size(); ++mu) d[mu] += f * dx[mu];

            double pb = 0.0;
            StokesVec sb;
            for (const auto& v : b) {
                pb += v.norm2();
                sb += jones_to_stokes(v);
            }
            phase += -1.5 * phi_x / (n * n) * pb;
            const double xf = -0.5 * phi_x / (n * n);
            s += StokesVec{xf * sb.s1, xf * sb.s2, xf * sb.s3};
        }
        const Matrix2c r = unitary_rotation(phase, s);
        JonesSequence y = idft_block(d);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] = r * (blk[i] + y[i]);
        return y;
    });
}

ModelKind parse_model_kind(const std::string& name) {
    std::string s;
    for (char c : name) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::replace(s.begin(), s.end(), '_', '-');
    if (s == "reg-td") return ModelKind::RegTd;
    if (s == "reg-fd") return ModelKind::RegFd;
    if (s == "reglog-td") return ModelKind::ReglogTd;
    if (s == "reglog-fd") return ModelKind::ReglogFd;
    throw std::invalid_argument("unknown model '" + name + "' (expected reg-td, reg-fd, reglog-td, reglog-fd)");
}

std::string model_name(ModelKind kind) {
    switch (kind) {
    case ModelKind::RegTd: return "reg-td";
    case ModelKind::RegFd: return "reg-fd";
    case ModelKind::ReglogTd: return "reglog-td";
    case ModelKind::ReglogFd: return "reglog-fd";
    }
    return "?";
}

bool uses_fd(ModelKind kind) {
    return kind == ModelKind::RegFd || kind == ModelKind::ReglogFd;
}

JonesSequence run_model(ModelKind kind, const ModelInput& input, const BlockFrame& frame) {
    switch (kind) {
    case ModelKind::RegTd: return reg_td(input);
    case ModelKind::RegFd: return reg_fd(input, frame);
    case ModelKind::ReglogTd: return reglog_td(input);
    case ModelKind::ReglogFd: return reglog_fd(input, frame);
    }
    throw std::invalid_argument("unknown model kind");
}

} // namespace fiberpert
