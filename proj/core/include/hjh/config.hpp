#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hjh/model.hpp"

namespace hjh {

/**
 * Flat key-value configuration with named sections:
 *
 *   [section]
 *   key = value        # comment
 *
 * Values are strings; lists are comma-separated. Serialization emits
 * sections and keys in sorted order so a resolved config has one byte
 * representation.
 */
class Config {
  public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    std::string serialize() const;
    void save(const std::string& path, const std::string& header_comment = "") const;

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback);
    double get_double(const std::string& section, const std::string& key);
    double get_double_or(const std::string& section, const std::string& key, double fallback);
    int get_int_or(const std::string& section, const std::string& key, int fallback);
    std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                             std::uint64_t fallback);
    std::vector<double> get_list_or(const std::string& section, const std::string& key,
                                    const std::vector<double>& fallback);

    void set(const std::string& section, const std::string& key, const std::string& value);
    void set_double(const std::string& section, const std::string& key, double value);
    void set_int(const std::string& section, const std::string& key, long long value);
    void set_list(const std::string& section, const std::string& key,
                  const std::vector<double>& values);

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

    /** Field-by-field validation problems; empty means valid. */
    std::vector<std::string> validate_model_section() const;

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

/** Builds the Hamiltonian model described by the [model] section. */
HamiltonianModel model_from_config(Config& cfg);

/** Round-trip exact float formatting (17 significant digits). */
std::string format_double(double x);

}  // namespace hjh
