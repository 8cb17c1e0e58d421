#pragma once

// Flat key = value run configuration with dotted section prefixes.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cfp/error.hpp"

namespace cfp {

class ConfigFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  /// Every key that may appear; anything else is rejected.
  static const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "model.alpha", "model.beta", "model.lambda",
        "grid.n_cells",
        "initial.family", "initial.mass", "initial.energy", "initial.width", "initial.center", "initial.table",
        "controls.dt", "controls.t_end", "controls.record_every", "controls.negativity_tol",
        "controls.blowup_l2_threshold", "controls.blowup_cell_fraction", "controls.max_steps",
        "output.directory", "output.snapshots",
        "figure1.alphas", "figure1.lambdas", "figure1.beta", "figure1.mass", "figure1.points",
        "figure1.e0_min", "figure1.e0_max",
        "sweep.alphas", "sweep.betas", "sweep.lambdas", "sweep.masses", "sweep.energies", "sweep.simulate",
        "sweep.threads",
        "inequalities.seed", "inequalities.count", "inequalities.max_degree", "inequalities.max_modes",
        "inequalities.coeff_range", "inequalities.cells",
    };
    return keys;
  }

  static ConfigFile parse(std::istream& in, const std::string& source = "<config>") {
    ConfigFile cfg;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      const auto hash = raw.find('#');
      std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (text.empty()) continue;
      const auto eq = text.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::Config, source + ":" + std::to_string(line) + ": expected 'key = value'");
      }
      const std::string key = trim(text.substr(0, eq));
      const std::string value = trim(text.substr(eq + 1));
      if (key.empty()) throw Error(ErrorKind::Config, source + ":" + std::to_string(line) + ": empty key");
      if (!known_keys().contains(key)) {
        throw Error(ErrorKind::Config, source + ":" + std::to_string(line) + ": unknown key '" + key + "'");
      }
      if (cfg.entries_.contains(key)) {
        throw Error(ErrorKind::Config, source + ":" + std::to_string(line) + ": duplicate key '" + key +
                                           "' (first set on line " + std::to_string(cfg.entries_[key].line) + ")");
      }
      cfg.entries_[key] = Entry{value, line};
    }
    cfg.source_ = source;
    return cfg;
  }

  static ConfigFile parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static ConfigFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
    return parse(in, path);
  }

  bool has(const std::string& key) const { return entries_.contains(key); }

  /// Overrides from the command line carry line 0.
  void set(const std::string& key, const std::string& value) {
    if (!known_keys().contains(key)) throw Error(ErrorKind::Config, "unknown key '" + key + "'");
    entries_[key] = Entry{value, 0};
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second.value;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    return to_double(it->second, key);
  }

  std::optional<double> get_optional_double(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return to_double(it->second, key);
  }

  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second.value;
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) fail(it->second, key, "expected a non-negative integer");
    return out;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second.value;
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    fail(it->second, key, "expected true or false");
  }

  /// Comma-separated list; an empty value gives an empty list.
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::vector<double> out;
    if (it->second.value.empty()) return out;
    std::stringstream ss(it->second.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      out.push_back(to_double(Entry{trim(item), it->second.line}, key));
    }
    return out;
  }

  /// Prefixes a message with the location of `key`.
  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw Error(ErrorKind::Config, source_ + ": " + key + ": " + message);
    fail(it->second, key, message);
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  [[noreturn]] void fail(const Entry& e, const std::string& key, const std::string& message) const {
    const std::string where = e.line > 0 ? source_ + ":" + std::to_string(e.line) : std::string("command line");
    throw Error(ErrorKind::Config, where + ": " + key + ": " + message);
  }

  double to_double(const Entry& e, const std::string& key) const {
    const std::string& v = e.value;
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) fail(e, key, "expected a number, got '" + v + "'");
    return out;
  }

  std::map<std::string, Entry> entries_;
  std::string source_ = "<config>";
};

}  // namespace cfp
