#include "gscl/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "gscl/errors.hpp"

namespace gscl {

namespace {

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_'))
            return false;
    return true;
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream ss(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(ss, raw)) {
        ++lineno;
        std::string line = strip(raw);
        if (line.empty() || line[0] == '#') continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              " has no '=': " + line);
        std::string key = strip(line.substr(0, eq));
        std::string value = strip(line.substr(eq + 1));
        if (!valid_key(key))
            throw ConfigError("bad config key on line " +
                              std::to_string(lineno) + ": '" + key + "'");
        if (cfg.kv_.count(key))
            throw ConfigError("duplicate config key: " + key);
        cfg.kv_[key] = value;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    if (!valid_key(key)) throw ConfigError("bad config key: '" + key + "'");
    kv_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const {
    return kv_.count(key) != 0;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
    std::string v = get_string(key);
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not a number: " + v);
    }
}

int KeyValueConfig::get_int(const std::string& key) const {
    std::string v = get_string(key);
    try {
        std::size_t used = 0;
        int i = std::stoi(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not an integer: " + v);
    }
}

unsigned long long KeyValueConfig::get_u64(const std::string& key) const {
    std::string v = get_string(key);
    try {
        std::size_t used = 0;
        unsigned long long u = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key +
                          " is not an unsigned integer: " + v);
    }
}

bool KeyValueConfig::get_bool(const std::string& key) const {
    std::string v = get_string(key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("config key " + key + " must be true or false: " + v);
}

std::vector<std::string> KeyValueConfig::keys() const {
    std::vector<std::string> out;
    out.reserve(kv_.size());
    for (const auto& [k, v] : kv_) out.push_back(k);
    return out;  // map iteration is already sorted
}

std::string KeyValueConfig::dump() const {
    std::string out;
    for (const auto& [k, v] : kv_) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

void KeyValueConfig::check_known(
    const std::vector<std::string>& allowed) const {
    for (const auto& [k, v] : kv_)
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw ConfigError("unknown config key: " + k);
}

}  // namespace gscl
