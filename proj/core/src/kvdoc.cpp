#include "spl/kvdoc.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "spl/errors.hpp"

namespace spl {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

KvDoc KvDoc::parse(std::istream& in) {
    KvDoc doc;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::string t = trim(line);
        if (t.empty()) continue;
        std::size_t colon = t.find(':');
        if (colon == std::string::npos)
            throw ConfigError("kv parse error at line " + std::to_string(lineno) +
                              ": expected 'key: value'");
        std::string key = trim(t.substr(0, colon));
        std::string value = trim(t.substr(colon + 1));
        if (key.empty())
            throw ConfigError("kv parse error at line " + std::to_string(lineno) + ": empty key");
        doc.entries_.emplace_back(std::move(key), std::move(value));
    }
    return doc;
}

KvDoc KvDoc::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

KvDoc KvDoc::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse(in);
}

bool KvDoc::has(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return true;
    return false;
}

const std::string& KvDoc::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    throw ConfigError("missing required key: " + key);
}

std::string KvDoc::get_or(const std::string& key, const std::string& fallback) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    return fallback;
}

double KvDoc::get_double(const std::string& key) const {
    const std::string& v = get(key);
    char* end = nullptr;
    errno = 0;
    double d = std::strtod(v.c_str(), &end);
    if (errno != 0 || end == v.c_str() || *end != '\0')
        throw ConfigError("key '" + key + "': not a number: " + v);
    return d;
}

double KvDoc::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::int64_t KvDoc::get_int(const std::string& key) const {
    const std::string& v = get(key);
    char* end = nullptr;
    errno = 0;
    long long i = std::strtoll(v.c_str(), &end, 10);
    if (errno != 0 || end == v.c_str() || *end != '\0')
        throw ConfigError("key '" + key + "': not an integer: " + v);
    return i;
}

std::int64_t KvDoc::get_int_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool KvDoc::get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "': not a boolean: " + v);
}

std::vector<std::string> KvDoc::all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
        if (k == key) out.push_back(v);
    return out;
}

void KvDoc::add(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
}

void KvDoc::add_double(const std::string& key, double value) { add(key, format_double(value)); }

void KvDoc::add_int(const std::string& key, std::int64_t value) {
    add(key, std::to_string(value));
}

void KvDoc::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    add(key, value);
}

std::string KvDoc::to_string() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += ": ";
        out += v;
        out += '\n';
    }
    return out;
}

void KvDoc::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << to_string();
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_sig(double v, int sig) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", sig, v);
    return buf;
}

}  // namespace spl
