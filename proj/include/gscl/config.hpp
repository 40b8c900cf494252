#pragma once
#include <map>
#include <string>
#include <vector>

namespace gscl {

// Flat key=value experiment-config text: one pair per line, '#' starts a
// comment line, blank lines are ignored. Keys are [a-z0-9_]+. Dumps are
// sorted by key, so dump -> parse -> dump is byte-stable and configs diff
// cleanly between experiments.
class KeyValueConfig {
  public:
    static KeyValueConfig parse(const std::string& text);
    static KeyValueConfig load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    // All getters throw ConfigError on a missing key or unparsable value.
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    unsigned long long get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;  // strict true/false

    std::vector<std::string> keys() const;  // sorted
    std::string dump() const;               // sorted key=value lines

    // Rejects any key outside `allowed` (unknown-key safety net).
    void check_known(const std::vector<std::string>& allowed) const;

  private:
    std::map<std::string, std::string> kv_;
};

}  // namespace gscl
