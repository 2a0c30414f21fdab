#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "arb/kernel.hpp"

namespace arb {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flat `key = value` file. Blank lines and `#` comments are ignored; later
// assignments override earlier ones.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in, const std::string& source = "<stream>");
    static KeyValueConfig load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value) { entries_[key] = value; }
    void set(const std::string& key, double value);
    void merge(const KeyValueConfig& overrides);
    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::optional<std::string> find(const std::string& key) const;
    std::optional<double> find_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }
    void write(std::ostream& out) const;

private:
    std::map<std::string, std::string> entries_;
};

// Key `noise` (gaussian | student_t | laplace, default gaussian) and, for
// student_t, `noise_dof`.
std::shared_ptr<const NoiseLaw> noise_from_config(const KeyValueConfig& cfg);
// Model keys: mu_daily, sigma_daily, q_step, jump_mean_daily, jump_std_daily,
// p, step_seconds; plus the noise keys.
ModelParams model_params_from_config(const KeyValueConfig& cfg);
// Band keys: gamma_bp, gamma_cex_bp; optional gamma_plus_bp / gamma_minus_bp.
FeeBand fee_band_from_config(const KeyValueConfig& cfg);

void put_model_params(KeyValueConfig& cfg, const ModelParams& params);
void put_fee_band(KeyValueConfig& cfg, const FeeBand& band);

}  // namespace arb
