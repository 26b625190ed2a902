// Copyright 2026 the hop-predict authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <sstream>

#include "hop/csv.hpp"

namespace hop {

// Experiment configs are flat `key = value` text: one assignment per line,
// `#` starts a comment, matrices and lists are bracketed comma lists
// (matrices row-major). Zero-dependency and diff-friendly.

struct ConfigError : std::runtime_error {
  ConfigError(const std::string& file, int line, const std::string& message)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + message) {}
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

struct RawEntry {
  std::string value;
  int line = 0;
  mutable bool used = false;
};

class RawConfig {
 public:
  RawConfig(std::istream& in, std::string filename) : file_(std::move(filename)) {
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string text = trim(line);
      if (text.empty()) continue;
      const auto eq = text.find('=');
      if (eq == std::string::npos)
        throw ConfigError(file_, number, "expected `key = value`");
      const std::string key = trim(text.substr(0, eq));
      const std::string value = trim(text.substr(eq + 1));
      if (key.empty()) throw ConfigError(file_, number, "empty key");
      if (value.empty()) throw ConfigError(file_, number, "empty value for key `" + key + "`");
      if (entries_.count(key))
        throw ConfigError(file_, number, "duplicate key `" + key + "`");
      entries_[key] = RawEntry{value, number};
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  const RawEntry& at(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(file_, 0, "missing key `" + key + "`");
    it->second.used = true;
    return it->second;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    auto it = entries_.find(key);
    throw ConfigError(file_, it == entries_.end() ? 0 : it->second.line,
                      "key `" + key + "`: " + message);
  }

  void reject_unused() const {
    for (const auto& [key, entry] : entries_)
      if (!entry.used) throw ConfigError(file_, entry.line, "unknown key `" + key + "`");
  }

  const std::string& file() const { return file_; }

 private:
  std::string file_;
  std::map<std::string, RawEntry> entries_;
};

inline bool parse_double(const std::string& text, double& out) {
  std::size_t used = 0;
  try {
    out = std::stod(text, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == text.size();
}

inline bool parse_longlong(const std::string& text, long long& out) {
  std::size_t used = 0;
  try {
    out = std::stoll(text, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == text.size();
}

inline std::vector<std::string> split_list(const RawConfig& raw,
                                           const std::string& key) {
  const std::string& value = raw.at(key).value;
  if (value.front() != '[' || value.back() != ']')
    raw.fail(key, "expected a bracketed list");
  std::vector<std::string> items;
  std::string body = value.substr(1, value.size() - 2);
  std::stringstream stream(body);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (item.empty()) raw.fail(key, "empty list element");
    items.push_back(item);
  }
  return items;
}

}  // namespace config_detail

inline ExperimentConfig parse_config(std::istream& in,
                                     const std::string& filename = "<config>") {
  using config_detail::RawConfig;
  const RawConfig raw(in, filename);
  ExperimentConfig cfg;

  auto get_double = [&](const std::string& key, double fallback, bool positive) {
    if (!raw.has(key)) return fallback;
    double v;
    if (!config_detail::parse_double(raw.at(key).value, v))
      raw.fail(key, "not a number");
    if (positive && !(v > 0)) raw.fail(key, "must be positive");
    return v;
  };
  auto get_int = [&](const std::string& key, long long fallback, long long minimum) {
    if (!raw.has(key)) return fallback;
    long long v;
    if (!config_detail::parse_longlong(raw.at(key).value, v))
      raw.fail(key, "not an integer");
    if (v < minimum)
      raw.fail(key, "must be >= " + std::to_string(minimum));
    return v;
  };
  auto get_bool = [&](const std::string& key, bool fallback) {
    if (!raw.has(key)) return fallback;
    const std::string& v = raw.at(key).value;
    if (v == "true") return true;
    if (v == "false") return false;
    raw.fail(key, "expected true or false");
  };
  auto get_int_list = [&](const std::string& key) {
    std::vector<int> out;
    for (const std::string& item : config_detail::split_list(raw, key)) {
      long long v;
      if (!config_detail::parse_longlong(item, v) || v < 1)
        raw.fail(key, "list elements must be positive integers");
      out.push_back(static_cast<int>(v));
    }
    return out;
  };

  if (raw.has("system")) cfg.system = raw.at("system").value;
  if (raw.has("systems")) cfg.systems = config_detail::split_list(raw, "systems");
  cfg.H = static_cast<int>(get_int("H", cfg.H, 1));
  if (raw.has("H_list")) cfg.horizons = get_int_list("H_list");
  cfg.beta = get_double("beta", cfg.beta, /*positive=*/true);
  cfg.lambda = get_double("lambda", cfg.lambda, /*positive=*/true);
  cfg.T_init = static_cast<Index>(get_int("T_init", cfg.T_init, 1));
  cfg.N_E = static_cast<int>(get_int("N_E", cfg.N_E, 1));
  cfg.kappa = static_cast<int>(get_int("kappa", cfg.kappa, -1));
  cfg.trace = get_bool("trace", cfg.trace);

  if (raw.has("seeds")) {
    const std::string& value = raw.at("seeds").value;
    cfg.seeds.clear();
    if (value.front() == '[') {
      for (const std::string& item : config_detail::split_list(raw, "seeds")) {
        long long v;
        if (!config_detail::parse_longlong(item, v) || v < 0)
          raw.fail("seeds", "list elements must be nonnegative integers");
        cfg.seeds.push_back(static_cast<std::uint64_t>(v));
      }
    } else {
      long long count;
      if (!config_detail::parse_longlong(value, count) || count < 1)
        raw.fail("seeds", "expected a positive count or a bracketed list");
      for (long long s = 1; s <= count; ++s)
        cfg.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (cfg.seeds.empty()) raw.fail("seeds", "seed list must not be empty");
  }

  // Custom plant matrices.
  bool wants_custom = cfg.system == "custom";
  for (const std::string& name : cfg.systems)
    wants_custom = wants_custom || name == "custom";
  if (wants_custom) {
    const Index n = static_cast<Index>(get_int("n", 0, 1));
    const Index m = static_cast<Index>(get_int("m", 0, 1));
    const Index n_u = static_cast<Index>(get_int("n_u", 0, 1));
    if (n == 0 || m == 0 || n_u == 0)
      throw ConfigError(raw.file(), 0, "custom system requires n, m, n_u");
    auto get_matrix = [&](const std::string& key, Index rows, Index cols) {
      if (!raw.has(key)) raw.fail(key, "required for a custom system");
      const auto items = config_detail::split_list(raw, key);
      if (static_cast<Index>(items.size()) != rows * cols)
        raw.fail(key, "expected " + std::to_string(rows * cols) +
                          " entries (row-major " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ")");
      Matrix M(rows, cols);
      for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) {
          double v;
          if (!config_detail::parse_double(items[static_cast<std::size_t>(i * cols + j)], v))
            raw.fail(key, "matrix entries must be numbers");
          M(i, j) = v;
        }
      return M;
    };
    cfg.A = get_matrix("A", n, n);
    cfg.B = get_matrix("B", n, n_u);
    cfg.C = get_matrix("C", m, n);
    cfg.Q = get_matrix("Q", n, n);
    cfg.R = get_matrix("R", m, m);
  }

  raw.reject_unused();

  for (const std::string& name : cfg.system_grid())
    if (name != "marginally_stable" && name != "stable" && name != "custom")
      throw ConfigError(raw.file(), 0, "unknown system selector `" + name + "`");
  for (int h : cfg.horizon_grid())
    if (h < 1) throw ConfigError(raw.file(), 0, "horizons must be >= 1");
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in, path);
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto list_ints = [&](const auto& values) {
    std::string s = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(values[i]);
    }
    return s + "]";
  };
  auto list_strings = [&](const std::vector<std::string>& values) {
    std::string s = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) s += ", ";
      s += values[i];
    }
    return s + "]";
  };
  auto matrix_row_major = [&](const Matrix& M) {
    std::string s = "[";
    for (Index i = 0; i < M.rows(); ++i)
      for (Index j = 0; j < M.cols(); ++j) {
        if (i + j) s += ", ";
        s += format_double_exact(M(i, j));
      }
    return s + "]";
  };

  out << "system = " << cfg.system << '\n';
  if (!cfg.systems.empty()) out << "systems = " << list_strings(cfg.systems) << '\n';
  out << "H = " << cfg.H << '\n';
  if (!cfg.horizons.empty()) out << "H_list = " << list_ints(cfg.horizons) << '\n';
  out << "beta = " << format_double_exact(cfg.beta) << '\n';
  out << "lambda = " << format_double_exact(cfg.lambda) << '\n';
  out << "T_init = " << cfg.T_init << '\n';
  out << "N_E = " << cfg.N_E << '\n';
  out << "seeds = " << list_ints(cfg.seeds) << '\n';
  out << "kappa = " << cfg.kappa << '\n';
  out << "trace = " << (cfg.trace ? "true" : "false") << '\n';
  if (cfg.A.size() > 0) {
    out << "n = " << cfg.A.rows() << '\n';
    out << "m = " << cfg.C.rows() << '\n';
    out << "n_u = " << cfg.B.cols() << '\n';
    out << "A = " << matrix_row_major(cfg.A) << '\n';
    out << "B = " << matrix_row_major(cfg.B) << '\n';
    out << "C = " << matrix_row_major(cfg.C) << '\n';
    out << "Q = " << matrix_row_major(cfg.Q) << '\n';
    out << "R = " << matrix_row_major(cfg.R) << '\n';
  }
  return out.str();
}

}  // namespace hop
