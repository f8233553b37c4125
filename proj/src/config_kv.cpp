#include "pcgen/config_kv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pcgen/errors.hpp"

namespace pcgen {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return "";
  }
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("config line " + std::to_string(line_no) +
                         ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw config_error("config line " + std::to_string(line_no) +
                         ": empty key");
    }
    if (!kv.emplace(key, value).second) {
      throw config_error("config: duplicate key '" + key + "'");
    }
  }
  return kv;
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("config: cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_kv_text(buf.str());
}

std::string serialize_kv(const std::map<std::string, std::string>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

bool kv_has(const std::map<std::string, std::string>& kv,
            const std::string& key) {
  return kv.find(key) != kv.end();
}

std::string kv_get(const std::map<std::string, std::string>& kv,
                   const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    throw config_error("config: missing required key '" + key + "'");
  }
  return it->second;
}

std::string kv_get_or(const std::map<std::string, std::string>& kv,
                      const std::string& key, const std::string& fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

int kv_get_int(const std::map<std::string, std::string>& kv,
               const std::string& key, int fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    return fallback;
  }
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(it->second.c_str(), &end, 10);
  if (errno != 0 || end == it->second.c_str() || *end != '\0') {
    throw config_error("config: key '" + key + "' is not an integer: '" +
                       it->second + "'");
  }
  return static_cast<int>(v);
}

std::uint64_t kv_get_u64(const std::map<std::string, std::string>& kv,
                         const std::string& key, std::uint64_t fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    return fallback;
  }
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (errno != 0 || end == it->second.c_str() || *end != '\0') {
    throw config_error("config: key '" + key + "' is not an unsigned integer: '" +
                       it->second + "'");
  }
  return static_cast<std::uint64_t>(v);
}

double kv_get_double(const std::map<std::string, std::string>& kv,
                     const std::string& key, double fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    return fallback;
  }
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(it->second.c_str(), &end);
  if (errno != 0 || end == it->second.c_str() || *end != '\0') {
    throw config_error("config: key '" + key + "' is not a number: '" +
                       it->second + "'");
  }
  return v;
}

bool kv_get_bool(const std::map<std::string, std::string>& kv,
                 const std::string& key, bool fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    return fallback;
  }
  if (it->second == "true" || it->second == "1") {
    return true;
  }
  if (it->second == "false" || it->second == "0") {
    return false;
  }
  throw config_error("config: key '" + key + "' is not a boolean: '" +
                     it->second + "'");
}

std::vector<int> kv_get_int_list(const std::map<std::string, std::string>& kv,
                                 const std::string& key,
                                 const std::vector<int>& fallback) {
  auto it = kv.find(key);
  if (it == kv.end()) {
    return fallback;
  }
  std::vector<int> out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(item.c_str(), &end, 10);
    if (errno != 0 || end == item.c_str() || *end != '\0') {
      throw config_error("config: key '" + key +
                         "' has a non-integer element: '" + item + "'");
    }
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) {
    throw config_error("config: key '" + key + "' is an empty list");
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::string format_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) {
      out += ',';
    }
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace pcgen
