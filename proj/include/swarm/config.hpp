#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace swarm::config {

/// Declarative key-value text with [section] headers, '#' comments, and
/// comma-separated lists. Unknown keys are hard errors: every key must be
/// consumed through a Reader before finish().
struct File {
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::string raw_text;

    static File parse(const std::string& text);
    static File load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
};

class Reader {
public:
    explicit Reader(const File& f) : f_(f) {}

    double number(const std::string& sec, const std::string& key);
    double number_or(const std::string& sec, const std::string& key, double fallback);
    long long integer(const std::string& sec, const std::string& key);
    long long integer_or(const std::string& sec, const std::string& key, long long fallback);
    std::string str(const std::string& sec, const std::string& key);
    std::string str_or(const std::string& sec, const std::string& key, std::string fallback);
    bool flag_or(const std::string& sec, const std::string& key, bool fallback);
    std::vector<double> list(const std::string& sec, const std::string& key);
    std::vector<double> list_or(const std::string& sec, const std::string& key,
                                std::vector<double> fallback);
    bool present(const std::string& sec, const std::string& key) const;

    /// Throws ConfigError naming any key that was never consumed.
    void finish() const;

private:
    const std::string& raw(const std::string& sec, const std::string& key);
    const File& f_;
    std::set<std::pair<std::string, std::string>> consumed_;
};

/// FNV-1a 64-bit hash of the canonical config text (the reproducibility
/// stamp embedded in run manifests).
std::string fnv1a_hex(const std::string& text);

} // namespace swarm::config
