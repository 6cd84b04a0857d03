#pragma once

#include "fiberpert/link.hpp"
#include "fiberpert/models.hpp"
#include "fiberpert/ssfm.hpp"
#include "fiberpert/txrx.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fiberpert {

// Minimal TOML subset: [table] headers with dotted names, key = value pairs with
// numbers, quoted strings, booleans and flat arrays, '#' comments.
struct ConfigValue {
    enum class Kind { Number, String, Bool, Array } kind = Kind::Number;
    double number = 0.0;
    std::string text;
    bool flag = false;
    std::vector<ConfigValue> items;

    double as_number(const std::string& where) const;
    long as_integer(const std::string& where) const;
    const std::string& as_string(const std::string& where) const;
    bool as_bool(const std::string& where) const;
    std::vector<ConfigValue> as_list() const; // scalars become one-element lists
};

using ConfigTable = std::map<std::string, ConfigValue>;

struct ConfigDocument {
    std::map<std::string, ConfigTable> tables;

    static ConfigDocument parse(const std::string& text, const std::string& source = "<config>");
    static ConfigDocument load(const std::string& path);
    bool has(const std::string& table) const { return tables.count(table) != 0; }
};

struct ChannelConfig {
    double power_dbm = 0.0;
    double offset_ghz = 0.0;
    std::int64_t seed = -1; // negative: derived from the run seed
};

struct RunConfig {
    LinkSpec link;
    double symbol_rate = 64e9; // Hz
    double rolloff = 0.2;
    std::vector<ChannelConfig> channels{ChannelConfig{}};
    ConstellationSpec constellation;
    std::size_t n_sym = 8192;
    std::uint64_t seed = 1;
    std::vector<ModelKind> models{ModelKind::RegTd};
    std::size_t n_fft = 0;   // 0: map-strength rule
    std::size_t overlap = 0; // 0: n_fft / 2
    double clip_sci_db = -60.0;
    double clip_xci_db = -60.0;
    std::size_t kernel_oversample = 1;
    StepPolicy ssfm;
    std::size_t oversampling = 0; // 0: 8 for one channel, 16 otherwise
    bool run_ssfm = true;

    void validate() const;
    // Channel plan with offsets snapped to the symbol-sequence frequency resolution.
    ChannelPlan plan() const;
    std::size_t ssfm_oversampling() const;
    std::uint64_t channel_seed(std::size_t nu) const;
    std::string canonical() const; // stable text form for hashing
};

struct SweepSpec {
    std::vector<double> symbol_rate_gbd;
    std::vector<double> power_dbm;
    std::vector<double> rolloff;
    std::vector<int> spans;
    unsigned jobs = 1;
};

// Base run configuration; missing tables keep defaults. Unknown keys are errors.
RunConfig load_run_config(const ConfigDocument& doc);
SweepSpec load_sweep_spec(const ConfigDocument& doc, const RunConfig& base);

// Replace every span count while keeping the span parameters of the first span.
void set_span_count(LinkSpec& link, int spans);
void set_launch_power(RunConfig& cfg, double power_dbm);

} // namespace fiberpert
