#include "fiberpert/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fiberpert {

namespace {

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
    throw std::runtime_error(source + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

class ValueParser {
public:
    ValueParser(const std::string& s, const std::string& source, int line) : s_(s), src_(source), line_(line) {}

    ConfigValue parse() {
        ConfigValue v = value();
        skip();
        if (pos_ != s_.size()) fail(src_, line_, "unexpected trailing text '" + s_.substr(pos_) + "'");
        return v;
    }

private:
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    ConfigValue value() {
        skip();
        if (pos_ >= s_.size()) fail(src_, line_, "missing value");
        ConfigValue v;
        const char c = s_[pos_];
        if (c == '"') {
            const auto end = s_.find('"', pos_ + 1);
            if (end == std::string::npos) fail(src_, line_, "unterminated string");
            v.kind = ConfigValue::Kind::String;
            v.text = s_.substr(pos_ + 1, end - pos_ - 1);
            pos_ = end + 1;
        } else if (c == '[') {
            ++pos_;
            v.kind = ConfigValue::Kind::Array;
            skip();
            if (pos_ < s_.size() && s_[pos_] == ']') {
                ++pos_;
                return v;
            }
            for (;;) {
                v.items.push_back(value());
                if (v.items.back().kind == ConfigValue::Kind::Array) fail(src_, line_, "nested arrays are not supported");
                skip();
                if (pos_ >= s_.size()) fail(src_, line_, "unterminated array");
                if (s_[pos_] == ',') {
                    ++pos_;
                    skip();
                    if (pos_ < s_.size() && s_[pos_] == ']') {
                        ++pos_;
                        break;
                    }
                    continue;
                }
                if (s_[pos_] == ']') {
                    ++pos_;
                    break;
                }
                fail(src_, line_, "expected ',' or ']' in array");
            }
        } else if (s_.compare(pos_, 4, "true") == 0) {
            v.kind = ConfigValue::Kind::Bool;
            v.flag = true;
            pos_ += 4;
        } else if (s_.compare(pos_, 5, "false") == 0) {
            v.kind = ConfigValue::Kind::Bool;
            v.flag = false;
            pos_ += 5;
        } else {
            std::size_t end = pos_;
            while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                                       s_[end] == '-' || s_[end] == '+' || s_[end] == '_'))
                ++end;
            std::string tok = s_.substr(pos_, end - pos_);
            tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
            std::size_t used = 0;
            try {
                v.number = std::stod(tok, &used);
            } catch (const std::exception&) {
                fail(src_, line_, "invalid value '" + tok + "'");
            }
            if (used != tok.size()) fail(src_, line_, "invalid number '" + tok + "'");
            v.kind = ConfigValue::Kind::Number;
            pos_ = end;
        }
        return v;
    }

    const std::string& s_;
    std::string src_;
    int line_;
    std::size_t pos_ = 0;
};

const char* kind_name(ConfigValue::Kind k) {
    switch (k) {
    case ConfigValue::Kind::Number: return "number";
    case ConfigValue::Kind::String: return "string";
    case ConfigValue::Kind::Bool: return "boolean";
    case ConfigValue::Kind::Array: return "array";
    }
    return "?";
}

// Reads keys from one table and rejects anything it was not asked about.
class TableReader {
public:
    TableReader(const ConfigDocument& doc, const std::string& name) : name_(name) {
        auto it = doc.tables.find(name);
        if (it != doc.tables.end()) table_ = &it->second;
    }
    ~TableReader() noexcept(false) {
        if (!table_ || std::uncaught_exceptions() > 0) return;
        for (const auto& [k, v] : *table_)
            if (!seen_.count(k)) throw std::runtime_error("unknown key '" + k + "' in [" + name_ + "]");
    }

    const ConfigValue* get(const std::string& key) {
        seen_.insert(key);
        if (!table_) return nullptr;
        auto it = table_->find(key);
        return it == table_->end() ? nullptr : &it->second;
    }
    std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

    void number(const std::string& key, double& out) {
        if (auto* v = get(key)) out = v->as_number(where(key));
    }
    template <class I>
    void integer(const std::string& key, I& out) {
        if (auto* v = get(key)) {
            const long x = v->as_integer(where(key));
            if (std::is_unsigned_v<I> && x < 0) throw std::runtime_error(where(key) + " must be non-negative");
            out = static_cast<I>(x);
        }
    }

private:
    std::string name_;
    const ConfigTable* table_ = nullptr;
    std::set<std::string> seen_;
};

std::string hexd(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

} // namespace

double ConfigValue::as_number(const std::string& where) const {
    if (kind != Kind::Number) throw std::runtime_error(where + ": expected number, got " + kind_name(kind));
    return number;
}

long ConfigValue::as_integer(const std::string& where) const {
    const double x = as_number(where);
    if (std::floor(x) != x || std::abs(x) > 9.0e15) throw std::runtime_error(where + ": expected integer");
    return static_cast<long>(x);
}

const std::string& ConfigValue::as_string(const std::string& where) const {
    if (kind != Kind::String) throw std::runtime_error(where + ": expected string, got " + kind_name(kind));
    return text;
}

bool ConfigValue::as_bool(const std::string& where) const {
    if (kind != Kind::Bool) throw std::runtime_error(where + ": expected boolean, got " + kind_name(kind));
    return flag;
}

std::vector<ConfigValue> ConfigValue::as_list() const {
    if (kind == Kind::Array) return items;
    return {*this};
}

ConfigDocument ConfigDocument::parse(const std::string& text, const std::string& source) {
    ConfigDocument doc;
    std::istringstream in(text);
    std::string raw;
    std::string table;
    doc.tables[table];
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(strip_comment(raw));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(source, line, "malformed table header");
            table = trim(s.substr(1, s.size() - 2));
            if (table.empty()) fail(source, line, "empty table name");
            if (doc.tables.count(table) && !doc.tables[table].empty()) fail(source, line, "duplicate table [" + table + "]");
            doc.tables[table];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) fail(source, line, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        if (key.empty()) fail(source, line, "empty key");
        const std::string rhs = trim(s.substr(eq + 1));
        auto& t = doc.tables[table];
        if (t.count(key)) fail(source, line, "duplicate key '" + key + "'");
        t[key] = ValueParser(rhs, source, line).parse();
    }
    if (doc.tables[""].empty()) doc.tables.erase("");
    return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

void RunConfig::validate() const {
    link.validate();
    plan().validate();
    constellation.levels();
    if (n_sym == 0 || (n_sym & (n_sym - 1)) != 0) throw std::invalid_argument("n_sym must be a power of two");
    if (n_fft != 0 && n_sym < n_fft) throw std::invalid_argument("n_sym must be at least n_fft");
    if (n_fft != 0 && overlap != 0 && overlap >= n_fft) throw std::invalid_argument("overlap must be below n_fft");
    if (models.empty()) throw std::invalid_argument("no model selected");
    if (kernel_oversample < 1) throw std::invalid_argument("kernel_oversample must be at least 1");
    ssfm.validate();
}

ChannelPlan RunConfig::plan() const {
    ChannelPlan p;
    p.symbol_rate = symbol_rate;
    p.rolloff = rolloff;
    p.probe = 0;
    for (const auto& c : channels) {
        const double w = 2.0 * std::numbers::pi * c.offset_ghz * 1e9;
        p.channels.push_back({dbm_to_watt(c.power_dbm), snap_offset(w, symbol_rate, n_sym)});
    }
    return p;
}

std::size_t RunConfig::ssfm_oversampling() const {
    if (oversampling != 0) return oversampling;
    return channels.size() > 1 ? 16 : 8;
}

std::uint64_t RunConfig::channel_seed(std::size_t nu) const {
    if (nu < channels.size() && channels[nu].seed >= 0) return static_cast<std::uint64_t>(channels[nu].seed);
    return seed + 7919u * nu;
}

std::string RunConfig::canonical() const {
    std::ostringstream os;
    os << "amp=" << static_cast<int>(link.amplification) << ";b0=" << hexd(link.pre_dispersion);
    for (const auto& s : link.spans)
        os << ";span=" << hexd(s.length) << ',' << hexd(s.alpha) << ',' << hexd(s.beta2) << ',' << hexd(s.gamma);
    os << ";rs=" << hexd(symbol_rate) << ";rho=" << hexd(rolloff);
    for (std::size_t i = 0; i < channels.size(); ++i)
        os << ";ch=" << hexd(channels[i].power_dbm) << ',' << hexd(channels[i].offset_ghz) << ',' << channel_seed(i);
    os << ";qam=" << constellation.order << ";nsym=" << n_sym << ";seed=" << seed << ";models=";
    for (auto m : models) os << model_name(m) << ',';
    os << ";nfft=" << n_fft << ";K=" << overlap << ";clip=" << hexd(clip_sci_db) << ',' << hexd(clip_xci_db)
       << ";kos=" << kernel_oversample << ";phimax=" << hexd(ssfm.phi_max) << ";os=" << ssfm_oversampling()
       << ";ssfm=" << run_ssfm;
    return os.str();
}

void set_span_count(LinkSpec& link, int spans) {
    if (spans < 1) throw std::invalid_argument("span count must be at least 1");
    if (link.spans.empty()) throw std::invalid_argument("link has no span template");
    link.spans.assign(static_cast<std::size_t>(spans), link.spans.front());
}

void set_launch_power(RunConfig& cfg, double power_dbm) {
    for (auto& c : cfg.channels) c.power_dbm = power_dbm;
}

RunConfig load_run_config(const ConfigDocument& doc) {
    RunConfig cfg;
    {
        TableReader t(doc, "link");
        int spans = 1;
        double length_km = 100.0, alpha_db = 0.2, beta2_ps2 = -21.0, gamma_wkm = 1.1, b0_ps2 = 0.0;
        t.integer("spans", spans);
        t.number("span_length_km", length_km);
        t.number("alpha_db_km", alpha_db);
        t.number("beta2_ps2_km", beta2_ps2);
        t.number("gamma_per_w_km", gamma_wkm);
        t.number("pre_dispersion_ps2", b0_ps2);
        std::string amp = "lumped";
        if (auto* v = t.get("amplification")) amp = v->as_string(t.where("amplification"));
        Amplification a;
        if (amp == "lumped") a = Amplification::Lumped;
        else if (amp == "lossless") a = Amplification::Lossless;
        else throw std::runtime_error("[link] amplification must be \"lumped\" or \"lossless\"");

        SpanSpec base{length_km * 1e3, db_per_km_to_alpha(alpha_db), ps2_per_km_to_beta2(beta2_ps2),
                      per_w_km_to_gamma(gamma_wkm)};
        cfg.link = make_homogeneous_link(spans, base, a, b0_ps2 * 1e-24);

        // Optional per-span overrides: [span.0], [span.1], ...
        std::vector<SpanSpec> custom;
        for (int i = 0; doc.has("span." + std::to_string(i)); ++i) {
            TableReader s(doc, "span." + std::to_string(i));
            double l = length_km, al = alpha_db, b2 = beta2_ps2, g = gamma_wkm;
            s.number("length_km", l);
            s.number("alpha_db_km", al);
            s.number("beta2_ps2_km", b2);
            s.number("gamma_per_w_km", g);
            custom.push_back({l * 1e3, db_per_km_to_alpha(al), ps2_per_km_to_beta2(b2), per_w_km_to_gamma(g)});
        }
        if (!custom.empty()) cfg.link.spans = custom;
    }
    for (const auto& [name, table] : doc.tables) {
        if (name.rfind("span.", 0) == 0) {
            const std::string idx = name.substr(5);
            const int i = std::stoi(idx);
            if (i < 0 || !doc.has("span." + std::to_string(i)) || !doc.has("span.0"))
                throw std::runtime_error("span tables must be numbered consecutively from 0");
        }
    }
    {
        std::vector<ChannelConfig> chans;
        for (int i = 0; doc.has("channels." + std::to_string(i)); ++i) {
            TableReader t(doc, "channels." + std::to_string(i));
            ChannelConfig c;
            t.number("power_dbm", c.power_dbm);
            t.number("offset_ghz", c.offset_ghz);
            t.integer("seed", c.seed);
            chans.push_back(c);
        }
        for (const auto& [name, table] : doc.tables)
            if (name.rfind("channels.", 0) == 0 && std::stoul(name.substr(9)) >= chans.size())
                throw std::runtime_error("channel tables must be numbered consecutively from 0");
        if (!chans.empty()) cfg.channels = chans;
        if (cfg.channels.front().offset_ghz != 0.0) throw std::runtime_error("[channels.0] is the probe and must have offset_ghz = 0");
    }
    {
        TableReader t(doc, "model");
        if (auto* v = t.get("kind")) {
            cfg.models.clear();
            for (const auto& m : v->as_list()) cfg.models.push_back(parse_model_kind(m.as_string(t.where("kind"))));
        }
        double rs_gbd = cfg.symbol_rate * 1e-9;
        t.number("symbol_rate_gbd", rs_gbd);
        cfg.symbol_rate = rs_gbd * 1e9;
        t.number("rolloff", cfg.rolloff);
        t.integer("n_sym", cfg.n_sym);
        t.integer("seed", cfg.seed);
        t.integer("constellation", cfg.constellation.order);
        t.integer("n_fft", cfg.n_fft);
        t.integer("overlap", cfg.overlap);
        t.number("clip_db", cfg.clip_sci_db);
        cfg.clip_xci_db = cfg.clip_sci_db;
        t.number("clip_xci_db", cfg.clip_xci_db);
        t.integer("kernel_oversample", cfg.kernel_oversample);
    }
    {
        TableReader t(doc, "ssfm");
        t.number("phi_max", cfg.ssfm.phi_max);
        t.integer("oversampling", cfg.oversampling);
        if (auto* v = t.get("enabled")) cfg.run_ssfm = v->as_bool(t.where("enabled"));
    }
    for (const auto& [name, table] : doc.tables) {
        static const std::set<std::string> known{"link", "model", "ssfm", "sweep"};
        if (known.count(name) || name.rfind("span.", 0) == 0 || name.rfind("channels.", 0) == 0) continue;
        throw std::runtime_error("unknown table [" + name + "]");
    }
    cfg.validate();
    return cfg;
}

SweepSpec load_sweep_spec(const ConfigDocument& doc, const RunConfig& base) {
    SweepSpec s;
    TableReader t(doc, "sweep");
    auto numbers = [&](const std::string& key, std::vector<double>& out) {
        if (auto* v = t.get(key))
            for (const auto& x : v->as_list()) out.push_back(x.as_number(t.where(key)));
    };
    numbers("symbol_rate_gbd", s.symbol_rate_gbd);
    numbers("power_dbm", s.power_dbm);
    numbers("rolloff", s.rolloff);
    if (auto* v = t.get("spans"))
        for (const auto& x : v->as_list()) s.spans.push_back(static_cast<int>(x.as_integer(t.where("spans"))));
    t.integer("jobs", s.jobs);
    if (s.jobs == 0) s.jobs = 1;

    if (s.symbol_rate_gbd.empty()) s.symbol_rate_gbd.push_back(base.symbol_rate * 1e-9);
    if (s.power_dbm.empty()) s.power_dbm.push_back(base.channels.front().power_dbm);
    if (s.rolloff.empty()) s.rolloff.push_back(base.rolloff);
    if (s.spans.empty()) s.spans.push_back(static_cast<int>(base.link.spans.size()));
    return s;
}

} // namespace fiberpert
