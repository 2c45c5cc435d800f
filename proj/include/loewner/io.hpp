#pragma once

// Declarative run configuration, JSON writing with 17 significant digits,
// and the grid (JSON) and Beltrami trace (CSV) exchange formats.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "loewner/grids.hpp"

namespace loewner {

using Json = nlohmann::ordered_json;

/// Line-oriented configuration:
///
///   # comment
///   command = extend
///   k = 0.5
///   [grid]
///   radii = 0.5, 0.9, 1.2
///   n = 128
///
/// Keys inside a [section] are stored as "section.key". Later assignments
/// override earlier ones. Serialization is sorted and round-trips exactly.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);
  std::string serialize() const;

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  long integer_or(const std::string& key, long fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  /// Comma-separated numbers.
  std::vector<double> numbers(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  friend bool operator==(const Config&, const Config&) = default;

 private:
  std::map<std::string, std::string> values_;
};

double parse_number(const std::string& text, const std::string& what);
std::vector<double> parse_number_list(const std::string& text, const std::string& what);
/// "re" or "re,im".
cplx parse_complex(const std::string& text, const std::string& what);

/// Compact or indented JSON; doubles printed with %.17g, non-finite as null.
std::string dump_json(const Json& value, int indent = 2);
Json complex_json(cplx z);

/// {"grid": {"radii": [...], "angular_count": N}, "values": [[re, im], ...]}
Json grid_to_json(const QCExtensionGrid& grid);
QCExtensionGrid grid_from_json(const Json& doc);

/// Header rho,theta_index,re,im; one row per sample, circle by circle.
std::string field_to_csv(const BeltramiField& field);
/// Also accepts the header rho,theta_index,re_mu,im_mu.
BeltramiField field_from_csv(const std::string& text, bool exact = false);

std::string read_text_file(const std::string& path);
/// Writes to a temporary sibling and renames it into place.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace loewner
