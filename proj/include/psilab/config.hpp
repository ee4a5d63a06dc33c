#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "psilab/errors.hpp"

namespace psilab {

/// Parse or validation failure with the source position of the offending entry.
struct ConfigError : ConfigurationError {
  int line = 0;
  std::string field;
  ConfigError(const std::string& source, int line, const std::string& field, const std::string& message);
};

/// Strict INI document: `[section]` headers and `key = value` lines, `#` or `;`
/// comments. Every key must be consumed by the reader; leftovers are rejected
/// by check_all_used.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& source = "<string>");

  const std::string& source() const { return source_; }
  bool has(const std::string& field) const;

  /// Typed accessors keyed by "section.key". Reading marks the field used.
  std::string get_string(const std::string& field, const std::string& fallback) const;
  double get_double(const std::string& field, double fallback) const;
  long get_int(const std::string& field, long fallback) const;
  std::vector<double> get_doubles(const std::string& field, const std::vector<double>& fallback) const;
  std::vector<long> get_ints(const std::string& field, const std::vector<long>& fallback) const;

  /// Overrides or inserts a value (command line overrides, sweeps).
  void set(const std::string& field, const std::string& value);

  /// Throws ConfigError naming the first field that was never read.
  void check_all_used() const;

  /// Error for a field that was read but holds an invalid value.
  [[noreturn]] void reject(const std::string& field, const std::string& message) const;

  /// Resolved configuration (values read, defaults included) as INI text.
  std::string resolved_text() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry* find(const std::string& field) const;
  void record(const std::string& field, const std::string& value) const;

  std::string source_;
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
  mutable std::map<std::string, std::string> resolved_;
};

}  // namespace psilab
