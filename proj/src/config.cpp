#include "swarm/config.hpp"

#include "swarm/errors.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace swarm::config {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_number(const std::string& sec, const std::string& key, const std::string& raw) {
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0')
        throw ConfigError("config: [" + sec + "] " + key + " = '" + raw + "' is not a number");
    return v;
}

} // namespace

File File::parse(const std::string& text) {
    File f;
    f.raw_text = text;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
            section = trim(line.substr(1, line.size() - 2));
            f.sections.try_emplace(section);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        auto& sec = f.sections[section];
        if (!sec.try_emplace(key, val).second)
            throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key +
                              "' in section [" + section + "]");
    }
    return f;
}

File File::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

bool File::has(const std::string& section, const std::string& key) const {
    auto it = sections.find(section);
    return it != sections.end() && it->second.count(key) > 0;
}

const std::string& Reader::raw(const std::string& sec, const std::string& key) {
    auto sit = f_.sections.find(sec);
    if (sit == f_.sections.end() || !sit->second.count(key))
        throw ConfigError("config: missing required key '" + key + "' in section [" + sec + "]");
    consumed_.insert({sec, key});
    return sit->second.at(key);
}

bool Reader::present(const std::string& sec, const std::string& key) const {
    return f_.has(sec, key);
}

double Reader::number(const std::string& sec, const std::string& key) {
    return parse_number(sec, key, raw(sec, key));
}

double Reader::number_or(const std::string& sec, const std::string& key, double fallback) {
    return f_.has(sec, key) ? number(sec, key) : fallback;
}

long long Reader::integer(const std::string& sec, const std::string& key) {
    const double v = number(sec, key);
    const long long i = static_cast<long long>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError("config: [" + sec + "] " + key + " must be an integer");
    return i;
}

long long Reader::integer_or(const std::string& sec, const std::string& key, long long fallback) {
    return f_.has(sec, key) ? integer(sec, key) : fallback;
}

std::string Reader::str(const std::string& sec, const std::string& key) { return raw(sec, key); }

std::string Reader::str_or(const std::string& sec, const std::string& key, std::string fallback) {
    return f_.has(sec, key) ? raw(sec, key) : std::move(fallback);
}

bool Reader::flag_or(const std::string& sec, const std::string& key, bool fallback) {
    if (!f_.has(sec, key)) return fallback;
    const std::string v = raw(sec, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: [" + sec + "] " + key + " must be a boolean");
}

std::vector<double> Reader::list(const std::string& sec, const std::string& key) {
    const std::string& v = raw(sec, key);
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= v.size()) {
        const auto comma = v.find(',', pos);
        const std::string item = trim(v.substr(pos, comma == std::string::npos ? std::string::npos
                                                                               : comma - pos));
        if (!item.empty()) out.push_back(parse_number(sec, key, item));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("config: [" + sec + "] " + key + " is an empty list");
    return out;
}

std::vector<double> Reader::list_or(const std::string& sec, const std::string& key,
                                    std::vector<double> fallback) {
    return f_.has(sec, key) ? list(sec, key) : std::move(fallback);
}

void Reader::finish() const {
    std::string unknown;
    for (const auto& [sec, kv] : f_.sections)
        for (const auto& [key, val] : kv)
            if (!consumed_.count({sec, key}))
                unknown += (unknown.empty() ? "" : ", ") + ("[" + sec + "] " + key);
    if (!unknown.empty()) throw ConfigError("config: unknown keys: " + unknown);
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace swarm::config
