#include "fiberpert/sweep.hpp"

#include "fiberpert/parallel.hpp"
#include "fiberpert/ssfm.hpp"
#include "fiberpert/txrx.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fiberpert {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double db_to_ratio(double db) {
    return std::pow(10.0, db / 10.0);
}

std::string fmt(double v, int digits) {
    if (!std::isfinite(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

} // namespace

std::size_t resolve_fft_size(const RunConfig& cfg) {
    if (cfg.n_fft != 0) return cfg.n_fft;
    const auto q = characteristic_quantities(cfg.link, cfg.plan());
    double st = q.s_t;
    for (double s : q.s_t_nu) st = std::max(st, s);
    return default_fft_size(st);
}

std::size_t resolve_overlap(const RunConfig& cfg, std::size_t n_fft) {
    return cfg.overlap != 0 ? cfg.overlap : n_fft / 2;
}

KernelBundle build_kernels(const RunConfig& cfg, KernelCache& cache) {
    const auto t0 = Clock::now();
    const ChannelPlan plan = cfg.plan();
    KernelBundle b;
    b.n_fft = resolve_fft_size(cfg);
    if (cfg.n_sym < b.n_fft)
        throw std::invalid_argument("n_sym " + std::to_string(cfg.n_sym) + " is below n_fft " + std::to_string(b.n_fft));
    for (std::size_t nu = 0; nu < plan.channels.size(); ++nu) {
        auto look = cache.get(cfg.link, plan, nu, b.n_fft, cfg.kernel_oversample);
        b.cache_hit = b.cache_hit && look.hit;
        const double clip = db_to_ratio(nu == plan.probe ? cfg.clip_sci_db : cfg.clip_xci_db);
        auto td = std::make_shared<const TimeKernelSparse>(kernel_time_domain(*look.grid, clip));
        b.memory = std::max(b.memory, td->memory());
        b.grids.push_back(look.grid);
        b.kernels.push_back(td);
    }
    b.probe_energies = kernel_energies(*b.kernels[plan.probe], *b.grids[plan.probe], true);
    b.seconds = seconds_since(t0);
    return b;
}

TransmitData make_transmit_data(const RunConfig& cfg) {
    TransmitData tx;
    for (std::size_t nu = 0; nu < cfg.channels.size(); ++nu)
        tx.symbols.push_back(generate_symbols(cfg.constellation, cfg.n_sym, cfg.channel_seed(nu)));
    return tx;
}

ModelInput make_model_input(const RunConfig& cfg, const TransmitData& tx, const KernelBundle& kernels) {
    const ChannelPlan plan = cfg.plan();
    const auto q = characteristic_quantities(cfg.link, plan);
    ModelInput in;
    in.probe = tx.symbols[plan.probe];
    in.self = {q.phi_nl[plan.probe], kernels.kernels[plan.probe], kernels.grids[plan.probe]};
    for (std::size_t nu = 0; nu < plan.channels.size(); ++nu) {
        if (nu == plan.probe) continue;
        in.interferers.push_back({static_cast<int>(nu), tx.symbols[nu],
                                  {q.phi_nl[nu], kernels.kernels[nu], kernels.grids[nu]}});
    }
    return in;
}

SsfmRun run_ssfm_reference(const RunConfig& cfg, const TransmitData& tx) {
    const auto t0 = Clock::now();
    const ChannelPlan plan = cfg.plan();
    const std::size_t os = cfg.ssfm_oversampling();
    std::vector<FieldGrid> fields;
    std::vector<double> offsets;
    for (std::size_t nu = 0; nu < plan.channels.size(); ++nu) {
        const auto pulse = PulseSpec::from_power(plan.channels[nu].launch_power, plan.symbol_rate, plan.rolloff);
        fields.push_back(modulate(tx.symbols[nu], pulse, plan.symbol_rate, os));
        offsets.push_back(plan.channels[nu].freq_offset);
    }
    FieldGrid u0 = wdm_mux(fields, offsets, (1.0 + plan.rolloff) * plan.symbol_rate);
    fields.clear();
    PropagationStats stats;
    const FieldGrid u1 = propagate(std::move(u0), cfg.link, cfg.ssfm, &stats);
    const auto probe_pulse =
        PulseSpec::from_power(plan.channels[plan.probe].launch_power, plan.symbol_rate, plan.rolloff);

    SsfmRun run;
    run.received = receiver_frontend(u1, cfg.link, probe_pulse, plan.symbol_rate);
    run.steps = stats.steps;
    double p_tx = 0.0, p_rx = 0.0;
    for (std::size_t k = 0; k < run.received.size(); ++k) {
        p_tx += tx.symbols[plan.probe][k].norm2();
        p_rx += run.received[k].norm2();
    }
    run.power_offset_db = 10.0 * std::log10(p_rx / p_tx);
    run.seconds = seconds_since(t0);
    return run;
}

std::string config_hash(const RunConfig& cfg) {
    return to_hex(sha256(cfg.canonical())).substr(0, 16);
}

PointResult run_point(const RunConfig& cfg, KernelCache& cache) {
    PointResult r;
    r.config_hash = config_hash(cfg);
    r.symbol_rate_gbd = cfg.symbol_rate * 1e-9;
    r.power_dbm = cfg.channels.front().power_dbm;
    r.rolloff = cfg.rolloff;
    r.spans = static_cast<int>(cfg.link.spans.size());
    try {
        cfg.validate();
        const auto q = characteristic_quantities(cfg.link, cfg.plan());
        r.s_t = q.s_t;
        r.phi_nl = q.phi_nl.front();

        const KernelBundle kb = build_kernels(cfg, cache);
        r.n_fft = kb.n_fft;
        r.overlap = resolve_overlap(cfg, kb.n_fft);
        r.energies = kb.probe_energies;
        r.kernel_seconds = kb.seconds;
        r.kernel_cache_hit = kb.cache_hit;
        r.discard = std::max<std::size_t>(2 * static_cast<std::size_t>(kb.memory), r.overlap);

        const TransmitData tx = make_transmit_data(cfg);
        const ModelInput in = make_model_input(cfg, tx, kb);
        const BlockFrame frame{kb.n_fft, r.overlap};

        std::vector<JonesSequence> outputs;
        for (auto kind : cfg.models) {
            const auto t0 = Clock::now();
            outputs.push_back(run_model(kind, in, frame));
            r.models.push_back({kind, std::nan(""), seconds_since(t0)});
        }
        if (cfg.run_ssfm) {
            const SsfmRun ref = run_ssfm_reference(cfg, tx);
            r.ssfm_seconds = ref.seconds;
            r.power_offset_db = ref.power_offset_db;
            for (std::size_t i = 0; i < outputs.size(); ++i)
                r.models[i].mse_db = mse_db(ref.received, outputs[i], r.discard);
        }
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

bool SweepResult::all_completed() const {
    return std::all_of(rows.begin(), rows.end(), [](const PointResult& r) { return r.error.empty(); });
}

std::vector<RunConfig> expand_sweep(const RunConfig& base, const SweepSpec& spec) {
    std::vector<RunConfig> out;
    for (int spans : spec.spans)
        for (double rho : spec.rolloff)
            for (double rs : spec.symbol_rate_gbd)
                for (double p : spec.power_dbm) {
                    RunConfig c = base;
                    if (static_cast<std::size_t>(spans) != c.link.spans.size()) set_span_count(c.link, spans);
                    c.rolloff = rho;
                    c.symbol_rate = rs * 1e9;
                    set_launch_power(c, p);
                    out.push_back(std::move(c));
                }
    return out;
}

SweepResult run_sweep(const RunConfig& base, const SweepSpec& spec, KernelCache& cache) {
    const auto points = expand_sweep(base, spec);
    SweepResult res;
    res.rows.resize(points.size());
    parallel_for(points.size(), [&](std::size_t i) { res.rows[i] = run_point(points[i], cache); }, spec.jobs);
    return res;
}

std::string csv_header() {
    return "config_hash,csv_version,model,symbol_rate[GBd],power[dBm],rolloff[1],spans[1],n_fft[1],"
           "overlap[sym],discard[sym],map_strength[1],phi_nl[rad],sigma_e2[dB],"
           "E_h_total[1],E_h_additive[1],E_h_multiplicative[1],E_H_total[1],E_H_additive[1],"
           "E_H_multiplicative[1],power_offset[dB],kernel_time[s],model_time[s],ssfm_time[s],"
           "kernel_cache_hit,error";
}

std::vector<std::string> csv_rows(const PointResult& r) {
    auto row = [&](const ModelOutcome* m) {
        std::ostringstream os;
        os << r.config_hash << ',' << kCsvVersion << ',' << (m ? model_name(m->kind) : "") << ','
           << fmt_g(r.symbol_rate_gbd) << ',' << fmt(r.power_dbm, 2) << ',' << fmt_g(r.rolloff) << ',' << r.spans
           << ',' << r.n_fft << ',' << r.overlap << ',' << r.discard << ',' << fmt(r.s_t, 4) << ','
           << fmt(r.phi_nl, 6) << ',' << (m ? fmt(m->mse_db, 2) : "") << ',' << fmt(r.energies.td.total, 6)
           << ',' << fmt(r.energies.td.additive, 6) << ',' << fmt(r.energies.td.multiplicative, 6) << ','
           << fmt(r.energies.fd.total, 6) << ',' << fmt(r.energies.fd.additive, 6) << ','
           << fmt(r.energies.fd.multiplicative, 6) << ',' << fmt(r.power_offset_db, 2) << ','
           << fmt(r.kernel_seconds, 3) << ',' << (m ? fmt(m->seconds, 3) : "") << ',' << fmt(r.ssfm_seconds, 3)
           << ',' << (r.kernel_cache_hit ? 1 : 0) << ',' << csv_escape(r.error);
        return os.str();
    };
    std::vector<std::string> out;
    if (r.models.empty()) {
        out.push_back(row(nullptr));
    } else {
        for (const auto& m : r.models) out.push_back(row(&m));
    }
    return out;
}

void emit_csv(const SweepResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << csv_header() << '\n';
    for (const auto& r : result.rows)
        for (const auto& line : csv_rows(r)) out << line << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace fiberpert
