#include "fiberpert/config.hpp"
#include "fiberpert/kernel.hpp"
#include "fiberpert/kernel_io.hpp"
#include "fiberpert/models.hpp"
#include "fiberpert/ssfm.hpp"
#include "fiberpert/sweep.hpp"
#include "fiberpert/txrx.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

using namespace fiberpert;

namespace {

struct Overrides {
    std::optional<double> power_dbm, rs_gbd, rolloff, clip_db;
    std::optional<std::size_t> n_sym, n_fft, overlap;
    std::optional<std::uint64_t> seed;
    std::optional<int> spans;
    std::optional<unsigned> jobs;

    void add_to(CLI::App* app) {
        app->add_option("--power-dbm", power_dbm, "Launch power of every channel [dBm]");
        app->add_option("--rs-gbd", rs_gbd, "Symbol rate [GBd]");
        app->add_option("--rolloff", rolloff, "RRC roll-off factor");
        app->add_option("--n-sym", n_sym, "Symbols per run (power of two)");
        app->add_option("--seed", seed, "Symbol seed");
        app->add_option("--n-fft", n_fft, "Kernel grid size (0 = map-strength rule)");
        app->add_option("--overlap", overlap, "Overlap-save K (0 = n_fft/2)");
        app->add_option("--clip-db", clip_db, "Time-domain kernel clipping threshold [dB]");
        app->add_option("--spans", spans, "Number of identical spans");
        app->add_option("--jobs", jobs, "Worker threads for sweeps");
    }

    void apply(RunConfig& c) const {
        if (power_dbm) set_launch_power(c, *power_dbm);
        if (rs_gbd) c.symbol_rate = *rs_gbd * 1e9;
        if (rolloff) c.rolloff = *rolloff;
        if (n_sym) c.n_sym = *n_sym;
        if (seed) c.seed = *seed;
        if (n_fft) c.n_fft = *n_fft;
        if (overlap) c.overlap = *overlap;
        if (clip_db) c.clip_sci_db = c.clip_xci_db = *clip_db;
        if (spans) set_span_count(c.link, *spans);
        c.validate();
    }

    void apply(SweepSpec& s) const {
        if (power_dbm) s.power_dbm = {*power_dbm};
        if (rs_gbd) s.symbol_rate_gbd = {*rs_gbd};
        if (rolloff) s.rolloff = {*rolloff};
        if (spans) s.spans = {*spans};
        if (jobs) s.jobs = *jobs;
    }
};

struct Options {
    std::string config;
    std::string cache_dir;
    std::string out;
    std::string emit_kernel;
    std::string emit_td;
    std::string dump;
    std::string model;
    std::string symbols;
    Overrides ov;
};

ConfigDocument load_document(const Options& o) {
    return o.config.empty() ? ConfigDocument{} : ConfigDocument::load(o.config);
}

RunConfig load_config(const Options& o) {
    RunConfig c = load_run_config(load_document(o));
    o.ov.apply(c);
    return c;
}

void write_symbols(const std::string& path, const JonesSequence& y) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "k,x_re[1],x_im[1],y_re[1],y_im[1]\n";
    out.precision(17);
    for (std::size_t k = 0; k < y.size(); ++k)
        out << k << ',' << y[k].x.real() << ',' << y[k].x.imag() << ',' << y[k].y.real() << ',' << y[k].y.imag() << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

JonesSequence read_symbols(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::getline(in, line);
    JonesSequence s;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        std::size_t k = 0;
        double xr = 0, xi = 0, yr = 0, yi = 0;
        if (!(ls >> k >> xr >> xi >> yr >> yi)) throw std::runtime_error(path + ": malformed row '" + line + "'");
        s.push_back({cplx(xr, xi), cplx(yr, yi)});
    }
    return s;
}

void print_quantities(const RunConfig& c) {
    const auto q = characteristic_quantities(c.link, c.plan());
    std::printf("link: %zu span(s), %.3f km, L_eff %.3f km, L_D %.3f km, S_T %.4f\n", c.link.spans.size(),
                c.link.total_length() * 1e-3, q.l_eff * 1e-3, q.l_d * 1e-3, q.s_t);
    for (std::size_t nu = 0; nu < q.phi_nl.size(); ++nu)
        std::printf("channel %zu: phi_NL %.6f rad\n", nu, q.phi_nl[nu]);
}

int cmd_kernel(const Options& o) {
    const RunConfig c = load_config(o);
    print_quantities(c);
    KernelCache cache(o.cache_dir);
    const KernelBundle kb = build_kernels(c, cache);
    std::printf("n_fft %zu, overlap %zu, memory %d, %s in %.3f s\n", kb.n_fft, resolve_overlap(c, kb.n_fft), kb.memory,
                kb.cache_hit ? "cache hit" : "built", kb.seconds);
    const auto& e = kb.probe_energies;
    std::printf("E_h  total %.6f additive %.6f multiplicative %.6f\n", e.td.total, e.td.additive, e.td.multiplicative);
    std::printf("E_H  total %.6f additive %.6f multiplicative %.6f\n", e.fd.total, e.fd.additive, e.fd.multiplicative);
    for (std::size_t nu = 0; nu < kb.kernels.size(); ++nu) {
        std::printf("channel %zu: %zu TD entries, |h0| %.6e\n", nu, kb.kernels[nu]->entries.size(),
                    std::abs(kb.kernels[nu]->center()));
        const Digest key = kernel_key(c.link, c.plan(), nu, kb.n_fft, c.kernel_oversample);
        const std::string suffix = kb.kernels.size() > 1 ? "." + std::to_string(nu) : "";
        if (!o.emit_kernel.empty()) write_kernel_grid(o.emit_kernel + suffix, *kb.grids[nu], key);
        if (!o.emit_td.empty()) write_kernel_td(o.emit_td + suffix, *kb.kernels[nu], key);
    }
    return 0;
}

int cmd_model(const Options& o) {
    RunConfig c = load_config(o);
    if (!o.model.empty()) c.models = {parse_model_kind(o.model)};
    KernelCache cache(o.cache_dir);
    const KernelBundle kb = build_kernels(c, cache);
    TransmitData tx = make_transmit_data(c);
    if (!o.symbols.empty()) {
        tx.symbols[0] = read_symbols(o.symbols);
        if (tx.symbols[0].size() != c.n_sym) throw std::runtime_error("symbol file length differs from n_sym");
    }
    if (!o.dump.empty()) write_symbols(o.dump, tx.symbols[0]);
    const ModelInput in = make_model_input(c, tx, kb);
    const BlockFrame frame{kb.n_fft, resolve_overlap(c, kb.n_fft)};
    for (auto kind : c.models) {
        const JonesSequence y = run_model(kind, in, frame);
        const double d = mse_db(tx.symbols[0], y, std::max<std::size_t>(2 * kb.memory, frame.overlap));
        std::printf("%s: distortion relative to input %.2f dB\n", model_name(kind).c_str(), d);
        if (!o.out.empty()) {
            const std::string path = c.models.size() > 1 ? o.out + "." + model_name(kind) : o.out;
            write_symbols(path, y);
        }
    }
    return 0;
}

int cmd_ssfm(const Options& o) {
    const RunConfig c = load_config(o);
    print_quantities(c);
    const TransmitData tx = make_transmit_data(c);
    if (!o.dump.empty()) write_symbols(o.dump, tx.symbols[0]);
    const SsfmRun r = run_ssfm_reference(c, tx);
    std::printf("ssfm: %zu steps in %.3f s, received power offset %.4f dB\n", r.steps, r.seconds, r.power_offset_db);
    if (!o.out.empty()) write_symbols(o.out, r.received);
    return 0;
}

void print_point(const PointResult& r) {
    if (!r.error.empty()) {
        std::printf("%s: error: %s\n", r.config_hash.c_str(), r.error.c_str());
        return;
    }
    std::printf("%s: %.4g GBd, %.2f dBm, rolloff %.3g, %d span(s), n_fft %zu, K %zu, S_T %.3f, phi_NL %.5f\n",
                r.config_hash.c_str(), r.symbol_rate_gbd, r.power_dbm, r.rolloff, r.spans, r.n_fft, r.overlap, r.s_t,
                r.phi_nl);
    for (const auto& m : r.models)
        std::printf("  %-9s sigma_e^2 %8.2f dB  (%.3f s)\n", model_name(m.kind).c_str(), m.mse_db, m.seconds);
}

int cmd_validate(const Options& o) {
    RunConfig c = load_config(o);
    if (!o.model.empty()) c.models = {parse_model_kind(o.model)};
    c.run_ssfm = true;
    KernelCache cache(o.cache_dir);
    const PointResult r = run_point(c, cache);
    print_point(r);
    if (!o.out.empty()) emit_csv(SweepResult{{r}}, o.out);
    return r.error.empty() ? 0 : 1;
}

int cmd_sweep(const Options& o) {
    const ConfigDocument doc = load_document(o);
    RunConfig c = load_run_config(doc);
    if (!o.model.empty()) c.models = {parse_model_kind(o.model)};
    Overrides base = o.ov;
    base.power_dbm.reset();
    base.rs_gbd.reset();
    base.rolloff.reset();
    base.spans.reset();
    base.apply(c);
    SweepSpec spec = load_sweep_spec(doc, c);
    o.ov.apply(spec);
    KernelCache cache(o.cache_dir);
    const SweepResult res = run_sweep(c, spec, cache);
    for (const auto& r : res.rows) print_point(r);
    if (!o.out.empty()) emit_csv(res, o.out);
    return res.all_completed() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"First-order perturbation channel models with a split-step reference"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", o.config, "Configuration file")->check(CLI::ExistingFile);
        sub->add_option("--cache-dir", o.cache_dir, "Directory for cached kernel grids");
        o.ov.add_to(sub);
    };

    auto* kernel = app.add_subcommand("kernel", "Build or load kernels and report their energies");
    common(kernel);
    kernel->add_option("--emit-kernel", o.emit_kernel, "Write the frequency-domain grid (FKRN)");
    kernel->add_option("--emit-td", o.emit_td, "Write the clipped time-domain kernel (TKRN)");

    auto* model = app.add_subcommand("model", "Apply a channel model to the transmitted symbols");
    common(model);
    model->add_option("--model", o.model, "reg-td, reg-fd, reglog-td or reglog-fd");
    model->add_option("--symbols", o.symbols, "Probe symbols from a CSV file instead of the generator");
    model->add_option("-o,--out", o.out, "Output symbol CSV");
    model->add_option("--dump", o.dump, "Write the transmitted probe symbols as CSV");

    auto* ssfm = app.add_subcommand("ssfm", "Run the split-step reference and the receiver");
    common(ssfm);
    ssfm->add_option("-o,--out", o.out, "Received symbol CSV");
    ssfm->add_option("--dump", o.dump, "Write the transmitted probe symbols as CSV");

    auto* validate = app.add_subcommand("validate", "Compare models against the split-step reference");
    common(validate);
    validate->add_option("--model", o.model, "Restrict to one model");
    validate->add_option("-o,--out", o.out, "Result CSV");

    auto* sweep = app.add_subcommand("sweep", "Evaluate a parameter grid and write a CSV");
    common(sweep);
    sweep->add_option("--model", o.model, "Restrict to one model");
    sweep->add_option("-o,--out", o.out, "Result CSV");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*kernel) return cmd_kernel(o);
        if (*model) return cmd_model(o);
        if (*ssfm) return cmd_ssfm(o);
        if (*validate) return cmd_validate(o);
        if (*sweep) return cmd_sweep(o);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fiberpert: %s\n", e.what());
        return 2;
    }
    return 0;
}
