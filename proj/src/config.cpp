#include "arb/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace arb {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) throw ConfigError("config key '" + key + "' is not a number: '" + text + "'");
    return v;
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
    KeyValueConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        cfg.entries_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse(in, path.string());
}

void KeyValueConfig::set(const std::string& key, double value) { entries_[key] = format_double(value); }

void KeyValueConfig::merge(const KeyValueConfig& overrides) {
    for (const auto& [k, v] : overrides.entries_) entries_[k] = v;
}

const std::string& KeyValueConfig::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const { return parse_double(key, get(key)); }

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> KeyValueConfig::find_double(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return parse_double(key, it->second);
}

double KeyValueConfig::get_double_or(const std::string& key, double fallback) const {
    return find_double(key).value_or(fallback);
}

void KeyValueConfig::write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

std::shared_ptr<const NoiseLaw> noise_from_config(const KeyValueConfig& cfg) {
    const std::string kind = cfg.find("noise").value_or("gaussian");
    if (kind == "gaussian") return gaussian_noise();
    if (kind == "laplace") return std::make_shared<const LaplaceNoise>();
    if (kind == "student_t") {
        try {
            return std::make_shared<const StudentTNoise>(cfg.get_double("noise_dof"));
        } catch (const InvalidArgument& e) {
            throw ConfigError(e.what());
        }
    }
    throw ConfigError("unknown noise law '" + kind + "' (expected gaussian, student_t or laplace)");
}

ModelParams model_params_from_config(const KeyValueConfig& cfg) {
    DailyParams d;
    d.mu_daily = cfg.get_double("mu_daily");
    d.sigma_daily = cfg.get_double("sigma_daily");
    d.q_step = cfg.get_double("q_step");
    d.jump_mean_daily = cfg.get_double("jump_mean_daily");
    d.jump_std_daily = cfg.get_double("jump_std_daily");
    d.p = cfg.get_double("p");
    d.step_seconds = cfg.get_double("step_seconds");

    ModelParams m = from_daily(d, noise_from_config(cfg));
    try {
        m.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    return m;
}

FeeBand fee_band_from_config(const KeyValueConfig& cfg) {
    FeeBand band;
    const double gamma = cfg.get_double("gamma_bp");
    band.gamma_plus = cfg.get_double_or("gamma_plus_bp", gamma) * kBasisPoint;
    band.gamma_minus = cfg.get_double_or("gamma_minus_bp", gamma) * kBasisPoint;
    band.gamma_cex = cfg.get_double("gamma_cex_bp") * kBasisPoint;
    try {
        band.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    return band;
}

void put_model_params(KeyValueConfig& cfg, const ModelParams& params) {
    const DailyParams d = to_daily(params);
    cfg.set("mu_daily", d.mu_daily);
    cfg.set("sigma_daily", d.sigma_daily);
    cfg.set("q_step", d.q_step);
    cfg.set("jump_mean_daily", d.jump_mean_daily);
    cfg.set("jump_std_daily", d.jump_std_daily);
    cfg.set("p", d.p);
    cfg.set("step_seconds", d.step_seconds);
    const NoiseLaw& noise = params.noise_law();
    cfg.set("noise", noise.name());
    if (const auto* t = dynamic_cast<const StudentTNoise*>(&noise)) cfg.set("noise_dof", t->dof());
}

void put_fee_band(KeyValueConfig& cfg, const FeeBand& band) {
    cfg.set("gamma_bp", band.gamma_plus / kBasisPoint);
    if (!band.is_symmetric()) {
        cfg.set("gamma_plus_bp", band.gamma_plus / kBasisPoint);
        cfg.set("gamma_minus_bp", band.gamma_minus / kBasisPoint);
    }
    cfg.set("gamma_cex_bp", band.gamma_cex / kBasisPoint);
}

}  // namespace arb
