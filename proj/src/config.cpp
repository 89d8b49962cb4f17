#include "rmpc/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rmpc/errors.hpp"

namespace rmpc {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "plant",          "controller",        "c",
        "duration",       "sample_time",       "seed",
        "inject_noise",   "substeps",          "randomized_perturbation",
        "reference.type", "reference.period",  "reference.duty",
        "reference.low",  "reference.high",    "reference.level",
        "mpc.hp",         "mpc.hu",            "mpc.qk",
        "mpc.rk",         "mpc.penalize",      "noise.process_std",
        "noise.meas_std", "input_scale",   "reference_preview",
    };
    return keys;
}

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    auto end = s.find_last_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double d = 0.0;
    try {
        d = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "': not a number: '" + value + "'");
    }
    if (pos != value.size()) {
        throw ConfigError("config: key '" + key + "': trailing characters in '" + value + "'");
    }
    return d;
}

long parse_long(const std::string& key, const std::string& value) {
    const double d = parse_double(key, value);
    const long l = std::lround(d);
    if (static_cast<double>(l) != d) {
        throw ConfigError("config: key '" + key + "': expected an integer, got '" + value + "'");
    }
    return l;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config: key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<double> parse_vector(const std::string& key, const std::string& value) {
    std::istringstream is(value);
    std::vector<double> out;
    std::string token;
    while (is >> token) out.push_back(parse_double(key, token));
    if (out.empty()) throw ConfigError("config: key '" + key + "': empty vector");
    return out;
}

using KvMap = std::map<std::string, std::string>;

Scenario scenario_from(const std::string& name, const KvMap& kv) {
    Scenario sc;
    sc.name = name;
    sc.mpc = MpcConfig::uniform_scalar(10, 3, 0.1, 0.1);

    double ref_period = 50.0, ref_duty = 0.5, ref_low = 0.0, ref_high = M_PI, ref_level = 0.0;
    bool constant_ref = false;

    double mpc_qk = 0.1, mpc_rk = 0.1;
    int mpc_hp = 10, mpc_hu = 3;
    InputPenalty penalize = InputPenalty::DeltaU;
    NoiseSpec noise = NoiseSpec::servo_default();
    bool controller_set = false;

    for (const auto& [key, value] : kv) {
        if (key == "plant") {
            if (value == "linear-nominal") {
                sc.plant = PlantKind::LinearNominal;
            } else if (value == "nonlinear-perturbed") {
                sc.plant = PlantKind::NonlinearPerturbed;
            } else {
                throw ConfigError("config: key 'plant': unknown plant '" + value + "'");
            }
        } else if (key == "controller") {
            if (value == "smpc") {
                sc.controller = ControllerKind::Smpc;
            } else if (value == "rmpc") {
                sc.controller = ControllerKind::Rmpc;
            } else {
                throw ConfigError("config: key 'controller': unknown controller '" + value + "'");
            }
            controller_set = true;
        } else if (key == "c") {
            sc.c = parse_double(key, value);
        } else if (key == "duration") {
            sc.duration = parse_double(key, value);
        } else if (key == "sample_time") {
            sc.sample_time = parse_double(key, value);
        } else if (key == "seed") {
            sc.seed = static_cast<std::uint64_t>(parse_long(key, value));
        } else if (key == "inject_noise") {
            sc.inject_noise = parse_bool(key, value);
        } else if (key == "substeps") {
            sc.substeps = static_cast<int>(parse_long(key, value));
        } else if (key == "randomized_perturbation") {
            sc.randomized_perturbation = parse_bool(key, value);
        } else if (key == "reference.type") {
            if (value == "square") {
                constant_ref = false;
            } else if (value == "constant") {
                constant_ref = true;
            } else {
                throw ConfigError("config: key 'reference.type': unknown type '" + value + "'");
            }
        } else if (key == "reference.period") {
            ref_period = parse_double(key, value);
        } else if (key == "reference.duty") {
            ref_duty = parse_double(key, value);
        } else if (key == "reference.low") {
            ref_low = parse_double(key, value);
        } else if (key == "reference.high") {
            ref_high = parse_double(key, value);
        } else if (key == "reference.level") {
            ref_level = parse_double(key, value);
        } else if (key == "mpc.hp") {
            mpc_hp = static_cast<int>(parse_long(key, value));
        } else if (key == "mpc.hu") {
            mpc_hu = static_cast<int>(parse_long(key, value));
        } else if (key == "mpc.qk") {
            mpc_qk = parse_double(key, value);
        } else if (key == "mpc.rk") {
            mpc_rk = parse_double(key, value);
        } else if (key == "mpc.penalize") {
            if (value == "delta_u") {
                penalize = InputPenalty::DeltaU;
            } else if (value == "u") {
                penalize = InputPenalty::U;
            } else {
                throw ConfigError("config: key 'mpc.penalize': expected delta_u or u");
            }
        } else if (key == "noise.process_std") {
            const std::vector<double> v = parse_vector(key, value);
            noise.process_std = Eigen::Map<const Eigen::VectorXd>(v.data(),
                                                                  static_cast<long>(v.size()));
        } else if (key == "noise.meas_std") {
            noise.meas_std = parse_double(key, value);
        } else if (key == "input_scale") {
            sc.input_scale = parse_double(key, value);
        } else if (key == "reference_preview") {
            sc.preview_reference = parse_bool(key, value);
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }

    if (!controller_set) {
        throw ConfigError("config: scenario '" + name + "' does not set 'controller'");
    }
    sc.reference = constant_ref ? Waveform::constant(ref_level)
                                : Waveform::square(ref_period, ref_duty, ref_low, ref_high);
    sc.mpc = MpcConfig::uniform_scalar(mpc_hp, mpc_hu, mpc_qk, mpc_rk, penalize);
    sc.noise = noise;

    try {
        sc.validate();
        sc.mpc.validate(1, 1);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: scenario '") + name + "': " + e.what());
    }
    return sc;
}

}  // namespace

std::vector<Scenario> parse_scenarios(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides,
    std::optional<std::uint64_t> seed_override) {
    KvMap common;
    std::vector<std::pair<std::string, KvMap>> sections;
    KvMap* current = &common;

    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("config: line " + std::to_string(lineno) +
                                  ": unterminated section header");
            }
            const std::string header = trim(line.substr(1, line.size() - 2));
            if (header == "common") {
                current = &common;
            } else if (header.rfind("scenario", 0) == 0) {
                std::string name = trim(header.substr(8));
                if (name.empty()) name = "scenario" + std::to_string(sections.size() + 1);
                sections.emplace_back(name, KvMap{});
                current = &sections.back().second;
            } else {
                throw ConfigError("config: line " + std::to_string(lineno) +
                                  ": unknown section '" + header + "'");
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known_keys().count(key)) {
            throw ConfigError("config: unknown key '" + key + "'");
        }
        (*current)[key] = value;
    }

    for (const auto& [key, value] : overrides) {
        if (!known_keys().count(key)) {
            throw ConfigError("config: unknown override key '" + key + "'");
        }
        common[key] = value;
        for (auto& [name, kv] : sections) kv.erase(key);  // overrides beat section values
    }
    if (seed_override) common["seed"] = std::to_string(*seed_override);

    std::vector<Scenario> out;
    if (sections.empty()) {
        out.push_back(scenario_from("scenario", common));
        return out;
    }
    for (const auto& [name, kv] : sections) {
        KvMap merged = common;
        for (const auto& [k, v] : kv) merged[k] = v;
        out.push_back(scenario_from(name, merged));
    }
    return out;
}

std::vector<Scenario> load_scenarios(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides,
    std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenarios(buf.str(), overrides, seed_override);
}

}  // namespace rmpc
