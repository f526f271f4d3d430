#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace wpharm {

// Layered flat key=value configuration with section dots. Unknown keys are
// rejected against the registry; every run writes the resolved snapshot
// next to its outputs, and every output carries the snapshot hash.
class Config {
public:
    Config(); // defaults for all registered keys

    static const std::map<std::string, std::string>& registry();

    void load_file(const std::string& path);        // throws on unknown keys
    void set(const std::string& key, const std::string& value);

    std::string get(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    std::string resolved_text() const; // sorted key=value lines
    std::uint64_t hash() const;        // FNV-1a of the resolved text
    std::string hash_hex() const;
    void write_snapshot(const std::string& path) const;

private:
    std::map<std::string, std::string> values_;
};

} // namespace wpharm
