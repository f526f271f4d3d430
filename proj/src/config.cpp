#include "wpharm/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wpharm {

const std::map<std::string, std::string>& Config::registry() {
    static const std::map<std::string, std::string> keys = {
        {"seed", "20240809"},
        {"outdir", "out"},
        {"geo.step", "1e-3"},
        {"geo.tol", "1e-12"},
        {"geo.rho_floor", "1e-6"},
        {"solve.tol", "1e-8"},
        {"solve.max_sweeps", "400"},
        {"solve.damping", "0.5"},
        {"solve.mode", "sequential"},
        {"solve.accelerate", "true"},
        {"analysis.radii", "0.25,0.375,0.5,0.625,0.75"},
        {"analysis.samples", "720"},
        {"analysis.threshold", "0.1"},
        {"analysis.delta_margin", "1e-8"},
        {"coords.branch_width", "3.14159265358979323846"},
    };
    return keys;
}

Config::Config() : values_(registry()) {}

void Config::set(const std::string& key, const std::string& value) {
    if (!registry().count(key))
        throw std::invalid_argument("unknown config key: " + key);
    values_[key] = value;
}

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        const auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected key=value");
        set(strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
    }
}

std::string Config::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end())
        throw std::invalid_argument("unknown config key: " + key);
    return it->second;
}

double Config::get_double(const std::string& key) const {
    return std::stod(get(key));
}

int Config::get_int(const std::string& key) const { return std::stoi(get(key)); }

bool Config::get_bool(const std::string& key) const {
    const std::string v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config key " + key + " is not boolean: " + v);
}

std::string Config::resolved_text() const {
    std::ostringstream out;
    for (const auto& [k, v] : values_) out << k << "=" << v << "\n";
    return out.str();
}

std::uint64_t Config::hash() const {
    const std::string text = resolved_text();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string Config::hash_hex() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(hash()));
    return buf;
}

void Config::write_snapshot(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config snapshot " + path);
    out << "# resolved configuration, hash=" << hash_hex() << "\n"
        << resolved_text();
}

} // namespace wpharm
