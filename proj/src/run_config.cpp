// SPDX-License-Identifier: Apache-2.0
#include "d2dra/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <utility>
#include <vector>
#include <sstream>

#include "d2dra/errors.hpp"

namespace d2dra {

namespace {

struct Field {
    std::string section;
    std::string key;
    std::string help;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Shortest %g form that parses back to the same double.
std::string fmt_double(double v)
{
    char buf[32];
    for (int digits = 15; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v)
            break;
    }
    return buf;
}

template <typename T>
T parse_number(const std::string& text, const std::string& key)
{
    T value{};
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || text.empty())
        throw ConfigError("invalid value '" + text + "' for " + key);
    return value;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!trim(item).empty())
            out.push_back(trim(item));
    return out;
}

template <typename T, typename Access>
Field number(std::string section, std::string key, std::string help, Access access)
{
    Field f{std::move(section), std::move(key), std::move(help), {}, {}};
    const std::string name = f.section + "." + f.key;
    f.get = [access](const RunConfig& c) {
        RunConfig copy = c;
        const T v = access(copy);
        if constexpr (std::is_floating_point_v<T>)
            return fmt_double(v);
        else
            return std::to_string(v);
    };
    f.set = [access, name](RunConfig& c, const std::string& text) { access(c) = parse_number<T>(text, name); };
    return f;
}

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = [] {
        std::vector<Field> t;
        // [system]
        t.push_back(number<int>("system", "n_tps", "number of D2D transmit pairs N",
                                [](RunConfig& c) -> int& { return c.system.n_tps; }));
        t.push_back(number<int>("system", "n_channels", "number of cellular channels K",
                                [](RunConfig& c) -> int& { return c.system.n_channels; }));
        t.push_back(number<int>("system", "n_power_levels", "number of discrete power levels N_P",
                                [](RunConfig& c) -> int& { return c.system.n_power_levels; }));
        t.push_back({"system", "power_levels", "comma-separated levels in watts (default: equally spaced 0..P_M)",
                     [](const RunConfig& c) {
                         std::string s;
                         for (std::size_t j = 0; j < c.system.power_levels.size(); ++j)
                             s += (j ? ", " : "") + fmt_double(c.system.power_levels[j]);
                         return s;
                     },
                     [](RunConfig& c, const std::string& text) {
                         c.system.power_levels.clear();
                         for (const auto& item : split_list(text))
                             c.system.power_levels.push_back(parse_number<double>(item, "system.power_levels"));
                     }});
        t.push_back(number<double>("system", "p_max_watts", "maximum D2D transmit power P_M",
                                   [](RunConfig& c) -> double& { return c.system.p_max_watts; }));
        t.push_back(number<double>("system", "p_cue_watts", "CUE transmit power P_C",
                                   [](RunConfig& c) -> double& { return c.system.p_cue_watts; }));
        t.push_back(number<double>("system", "bandwidth_hz", "channel bandwidth W",
                                   [](RunConfig& c) -> double& { return c.system.bandwidth_hz; }));
        t.push_back(number<double>("system", "noise_psd_w_per_hz", "noise spectral density N_0",
                                   [](RunConfig& c) -> double& { return c.system.noise_psd_w_per_hz; }));
        t.push_back(number<double>("system", "se_threshold", "CUE QoS threshold SE_thr in b/s/Hz",
                                   [](RunConfig& c) -> double& { return c.system.se_threshold; }));
        t.push_back(number<int>("system", "bf_bits", "feedback bits per TP B_F",
                                [](RunConfig& c) -> int& { return c.system.bf_bits; }));
        t.push_back(number<int>("system", "bb_bits", "broadcast bits B_B",
                                [](RunConfig& c) -> int& { return c.system.bb_bits; }));
        t.push_back(number<double>("system", "area_side_m", "side of the square cell area",
                                   [](RunConfig& c) -> double& { return c.system.area_side_m; }));
        t.push_back(number<double>("system", "pair_max_dist_m", "maximum transmitter-receiver distance",
                                   [](RunConfig& c) -> double& { return c.system.pair_max_dist_m; }));
        t.push_back(number<double>("system", "pl_coeff_log10", "path gain 10^-coeff d^-exponent, coefficient",
                                   [](RunConfig& c) -> double& { return c.system.pl_coeff_log10; }));
        t.push_back(number<double>("system", "pl_exponent", "path-loss exponent",
                                   [](RunConfig& c) -> double& { return c.system.pl_exponent; }));
        t.push_back(number<double>("system", "p_cir_watts", "circuit power for EE",
                                   [](RunConfig& c) -> double& { return c.system.p_cir_watts; }));
        t.push_back(number<double>("system", "d_min_m", "distance floor for path gain",
                                   [](RunConfig& c) -> double& { return c.system.d_min_m; }));
        t.push_back(number<std::uint64_t>("system", "master_seed", "seed for topology, fading, random baseline",
                                          [](RunConfig& c) -> std::uint64_t& { return c.system.master_seed; }));
        // [train]
        t.push_back({"train", "mode", "centralized or distributed",
                     [](const RunConfig& c) {
                         return std::string(c.train.mode == ModelMode::Centralized ? "centralized" : "distributed");
                     },
                     [](RunConfig& c, const std::string& text) {
                         ModelMode mode;
                         if (text == "centralized")
                             mode = ModelMode::Centralized;
                         else if (text == "distributed")
                             mode = ModelMode::Distributed;
                         else
                             throw ConfigError("train.mode must be centralized or distributed");
                         // a default-sized network follows the mode's default size
                         const ArchConfig old_default = default_arch(c.train.mode);
                         if (c.train.arch.units == old_default.units && c.train.arch.width == old_default.width) {
                             c.train.arch.units = default_arch(mode).units;
                             c.train.arch.width = default_arch(mode).width;
                         }
                         c.train.mode = mode;
                     }});
        t.push_back({"train", "objective", "se (sum SE) or ee (sum EE)",
                     [](const RunConfig& c) { return objective_name(c.train.objective); },
                     [](RunConfig& c, const std::string& text) { c.train.objective = parse_objective(text); }});
        t.push_back(number<double>("train", "zeta_ct", "labeled fraction used by coarse tuning",
                                   [](RunConfig& c) -> double& { return c.train.zeta_ct; }));
        t.push_back(number<double>("train", "lr_ct", "coarse-tuning learning rate",
                                   [](RunConfig& c) -> double& { return c.train.lr_ct; }));
        t.push_back(number<double>("train", "lr_ft", "fine-tuning learning rate",
                                   [](RunConfig& c) -> double& { return c.train.lr_ft; }));
        t.push_back(number<int>("train", "epochs_ct", "coarse-tuning epochs",
                                [](RunConfig& c) -> int& { return c.train.epochs_ct; }));
        t.push_back(number<int>("train", "epochs_ft", "fine-tuning epochs",
                                [](RunConfig& c) -> int& { return c.train.epochs_ft; }));
        t.push_back(number<int>("train", "batch_size", "mini-batch size",
                                [](RunConfig& c) -> int& { return c.train.batch_size; }));
        t.push_back(number<double>("train", "kappa", "binarization penalty exponent",
                                   [](RunConfig& c) -> double& { return c.train.weights.kappa; }));
        t.push_back(number<double>("train", "rho_1", "CT weight of the decision binarization penalty",
                                   [](RunConfig& c) -> double& { return c.train.weights.rho_1; }));
        t.push_back(number<double>("train", "rho_2", "CT weight of the feedback binarization penalty",
                                   [](RunConfig& c) -> double& { return c.train.weights.rho_2; }));
        t.push_back(number<double>("train", "lambda_1", "FT weight of the QoS hinge",
                                   [](RunConfig& c) -> double& { return c.train.weights.lambda_1; }));
        t.push_back(number<double>("train", "lambda_2", "FT weight of the decision binarization penalty",
                                   [](RunConfig& c) -> double& { return c.train.weights.lambda_2; }));
        t.push_back(number<double>("train", "lambda_3", "FT weight of the feedback binarization penalty",
                                   [](RunConfig& c) -> double& { return c.train.weights.lambda_3; }));
        t.push_back(number<double>("train", "delta_ft", "hinge normalization constant",
                                   [](RunConfig& c) -> double& { return c.train.weights.delta_ft; }));
        t.push_back(number<int>("train", "units", "units per basic module (default 8 when distributed)",
                                [](RunConfig& c) -> int& { return c.train.arch.units; }));
        t.push_back(number<int>("train", "width", "hidden width per unit (default 150 when distributed)",
                                [](RunConfig& c) -> int& { return c.train.arch.width; }));
        t.push_back(number<double>("train", "dropout_rate", "dropout rate in hidden units",
                                   [](RunConfig& c) -> double& { return c.train.arch.dropout_rate; }));
        t.push_back(number<std::uint64_t>("train", "seed", "seed for weight init, shuffling, dropout",
                                          [](RunConfig& c) -> std::uint64_t& { return c.train.seed; }));
        // [eval]
        t.push_back({"eval", "schemes", "comma-separated subset of oracle, centralized, distributed, naive, random",
                     [](const RunConfig& c) {
                         std::string s;
                         for (std::size_t j = 0; j < c.eval.schemes.size(); ++j)
                             s += (j ? ", " : "") + scheme_name(c.eval.schemes[j]);
                         return s;
                     },
                     [](RunConfig& c, const std::string& text) {
                         c.eval.schemes.clear();
                         for (const auto& item : split_list(text))
                             c.eval.schemes.push_back(parse_scheme(item));
                     }});
        t.push_back(number<std::uint64_t>("eval", "oracle_budget", "largest candidate count the oracle scans",
                                          [](RunConfig& c) -> std::uint64_t& { return c.eval.oracle_budget; }));
        t.push_back(number<std::size_t>("eval", "timing_samples", "samples timed single-threaded per scheme",
                                        [](RunConfig& c) -> std::size_t& { return c.eval.timing_samples; }));
        return t;
    }();
    return table;
}

const Field& find_field(const std::string& section, const std::string& key)
{
    for (const auto& f : fields())
        if (f.section == section && f.key == key)
            return f;
    throw ConfigError("unknown key '" + key + "' in section [" + section + "]");
}

void set_field(RunConfig& config, const std::string& section, const std::string& key, const std::string& value)
{
    find_field(section, key).set(config, value);
    if (section == "system" && (key == "n_power_levels" || key == "p_max_watts"))
        config.system.power_levels.clear();
}

void finish(RunConfig& config)
{
    finalize(config.system);
    config.train.validate();
    if (config.eval.oracle_budget == 0)
        throw ConfigError("eval.oracle_budget must be positive");
}

}  // namespace

RunConfig parse_run_config(const std::string& text)
{
    RunConfig config;
    std::vector<std::pair<std::string, std::string>> deferred;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "system" && section != "train" && section != "eval")
                throw ConfigError("unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        find_field(section, key);
        // explicit values must survive a later line that resets them
        if ((section == "system" && key == "power_levels") || (section == "train" && (key == "units" || key == "width")))
            deferred.emplace_back(section, key + "=" + value);
        else
            set_field(config, section, key, value);
    }
    for (const auto& [section, assignment] : deferred) {
        const auto eq = assignment.find('=');
        set_field(config, section, assignment.substr(0, eq), assignment.substr(eq + 1));
    }
    finish(config);
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

void apply_override(RunConfig& config, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override '" + assignment + "' must look like section.key=value");
    set_field(config, trim(assignment.substr(0, dot)), trim(assignment.substr(dot + 1, eq - dot - 1)),
              trim(assignment.substr(eq + 1)));
    finish(config);
}

std::string print_run_config(const RunConfig& config)
{
    std::ostringstream os;
    std::string section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            os << (section.empty() ? "" : "\n") << '[' << f.section << "]\n";
            section = f.section;
        }
        os << f.key << " = " << f.get(config) << '\n';
    }
    return os.str();
}

std::string describe_run_config_keys()
{
    RunConfig defaults;
    finalize(defaults.system);
    std::ostringstream os;
    for (const auto& f : fields())
        os << "  " << f.section << '.' << f.key << " (default " << f.get(defaults) << "): " << f.help << '\n';
    return os.str();
}

}  // namespace d2dra
