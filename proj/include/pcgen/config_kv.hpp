#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pcgen {

// Flat key=value text: one pair per line, '#' starts a comment, blank lines
// ignored. Duplicate keys and lines without '=' are config_errors.
std::map<std::string, std::string> parse_kv_text(const std::string& text);
std::map<std::string, std::string> parse_kv_file(const std::string& path);
std::string serialize_kv(const std::map<std::string, std::string>& kv);

// Typed getters; parse failures throw config_error naming the key.
bool kv_has(const std::map<std::string, std::string>& kv,
            const std::string& key);
std::string kv_get(const std::map<std::string, std::string>& kv,
                   const std::string& key);  // throws when missing
std::string kv_get_or(const std::map<std::string, std::string>& kv,
                      const std::string& key, const std::string& fallback);
int kv_get_int(const std::map<std::string, std::string>& kv,
               const std::string& key, int fallback);
std::uint64_t kv_get_u64(const std::map<std::string, std::string>& kv,
                         const std::string& key, std::uint64_t fallback);
double kv_get_double(const std::map<std::string, std::string>& kv,
                     const std::string& key, double fallback);
bool kv_get_bool(const std::map<std::string, std::string>& kv,
                 const std::string& key, bool fallback);
std::vector<int> kv_get_int_list(const std::map<std::string, std::string>& kv,
                                 const std::string& key,
                                 const std::vector<int>& fallback);

std::string format_double(double v);             // %.17g, round-trip exact
std::string format_int_list(const std::vector<int>& v);  // comma-separated

}  // namespace pcgen
