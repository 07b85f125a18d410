#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace spl {

/// Line-oriented "key: value" document used for grammar configs, experiment
/// specs, run manifests and dataset sidecars. Rules:
///   - one entry per line, `key: value`
///   - repeated keys accumulate in order (that is how lists are written)
///   - `#` starts a comment, blank lines ignored
/// Entry order is preserved so serialization is deterministic.
class KvDoc {
  public:
    KvDoc() = default;

    static KvDoc parse(std::istream& in);
    static KvDoc parse_string(const std::string& text);
    static KvDoc load(const std::string& path);

    bool has(const std::string& key) const;

    /// First value for key; throws ConfigError when absent.
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;

    /// All values for key, in document order.
    std::vector<std::string> all(const std::string& key) const;

    void add(const std::string& key, const std::string& value);
    void add_double(const std::string& key, double value);
    void add_int(const std::string& key, std::int64_t value);

    /// Replace first occurrence (or append when absent).
    void set(const std::string& key, const std::string& value);

    std::string to_string() const;
    void save(const std::string& path) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Split a whitespace-separated value list ("x y z" -> {"x","y","z"}).
std::vector<std::string> split_ws(const std::string& s);

/// Format a double with enough digits to round-trip exactly.
std::string format_double(double v);

/// Format with `sig` significant digits (expression rendering uses 6).
std::string format_sig(double v, int sig);

}  // namespace spl
