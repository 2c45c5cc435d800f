#include "loewner/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace loewner {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  return std::all_of(key.begin(), key.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

// -----------------------------------------------------------------------------
// Config

Config Config::parse(const std::string& text) {
  Config cfg;
  std::string section;
  std::istringstream is(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(ErrorKind::validation, "config line " + std::to_string(line_no) + ": unclosed section");
      section = trim(line.substr(1, line.size() - 2));
      if (!section.empty() && !valid_key(section)) {
        fail(ErrorKind::validation, "config line " + std::to_string(line_no) + ": bad section name");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::validation, "config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) fail(ErrorKind::validation, "config line " + std::to_string(line_no) + ": bad key '" + key + "'");
    cfg.set(section.empty() ? key : section + "." + key, trim(line.substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const std::string& path) { return parse(read_text_file(path)); }

std::string Config::serialize() const {
  std::ostringstream os;
  std::string current;
  // Top-level keys first, then one block per section.
  for (const auto& [key, value] : values_) {
    if (key.find('.') == std::string::npos) os << key << " = " << value << '\n';
  }
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) continue;
    const std::string section = key.substr(0, dot);
    if (section != current) {
      os << '[' << section << "]\n";
      current = section;
    }
    os << key.substr(dot + 1) << " = " << value << '\n';
  }
  return os.str();
}

void Config::set(const std::string& key, std::string value) {
  if (!valid_key(key)) fail(ErrorKind::validation, "bad config key '" + key + "'");
  if (value.find('\n') != std::string::npos || value.find('#') != std::string::npos) {
    fail(ErrorKind::validation, "config value for '" + key + "' may not contain newlines or '#'");
  }
  values_[key] = trim(value);
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorKind::validation, "missing required setting '" + key + "'");
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::number(const std::string& key) const { return parse_number(get(key), key); }

double Config::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long Config::integer_or(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 1e15) fail(ErrorKind::validation, "'" + key + "' must be an integer");
  return static_cast<long>(v);
}

bool Config::flag_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorKind::validation, "'" + key + "' must be true or false");
}

std::vector<double> Config::numbers(const std::string& key) const { return parse_number_list(get(key), key); }

double parse_number(const std::string& text, const std::string& what) {
  const std::string s = trim(text);
  if (s.empty()) fail(ErrorKind::validation, "empty number for '" + what + "'");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
    fail(ErrorKind::validation, "'" + what + "' is not a finite number: " + s);
  }
  return v;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, ',')) out.push_back(parse_number(part, what));
  return out;
}

cplx parse_complex(const std::string& text, const std::string& what) {
  const auto parts = parse_number_list(text, what);
  if (parts.size() == 1) return {parts[0], 0.0};
  if (parts.size() == 2) return {parts[0], parts[1]};
  fail(ErrorKind::validation, "'" + what + "' must be re or re,im");
}

// -----------------------------------------------------------------------------
// JSON

namespace {

std::string number_text(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool is_scalar(const Json& v) { return !v.is_object() && !v.is_array(); }

void write(std::ostringstream& os, const Json& v, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (v.type()) {
    case Json::value_t::number_float:
      os << number_text(v.get<double>());
      return;
    case Json::value_t::object: {
      if (v.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
        write(os, it.value(), indent, depth + 1);
      }
      os << nl << close_pad << '}';
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      if (std::all_of(v.begin(), v.end(), is_scalar)) {
        os << '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) os << (indent > 0 ? ", " : ",");
          write(os, v[i], indent, depth + 1);
        }
        os << ']';
        return;
      }
      os << '[' << nl;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ',' << nl;
        os << pad;
        write(os, v[i], indent, depth + 1);
      }
      os << nl << close_pad << ']';
      return;
    }
    default:
      os << v.dump();
  }
}

}  // namespace

std::string dump_json(const Json& value, int indent) {
  std::ostringstream os;
  write(os, value, std::max(indent, 0), 0);
  return os.str();
}

Json complex_json(cplx z) { return Json::array({z.real(), z.imag()}); }

Json grid_to_json(const QCExtensionGrid& grid) {
  Json doc;
  doc["grid"]["radii"] = grid.grid.radii();
  doc["grid"]["angular_count"] = grid.grid.angular_count();
  Json values = Json::array();
  for (cplx v : grid.values) values.push_back(complex_json(v));
  doc["values"] = std::move(values);
  return doc;
}

QCExtensionGrid grid_from_json(const Json& doc) {
  try {
    const auto& g = doc.at("grid");
    std::vector<double> radii = g.at("radii").get<std::vector<double>>();
    const auto n = g.at("angular_count").get<std::size_t>();
    QCExtensionGrid out{PolarGrid(std::move(radii), n)};
    const auto& values = doc.at("values");
    if (values.size() != out.grid.size()) {
      fail(ErrorKind::validation, "grid JSON has the wrong number of values",
           {{"expected", static_cast<double>(out.grid.size())}, {"found", static_cast<double>(values.size())}});
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto& pair = values[i];
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
        fail(ErrorKind::validation, "grid value " + std::to_string(i) + " is not a [re, im] pair");
      }
      out.values[i] = {pair[0].get<double>(), pair[1].get<double>()};
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::validation, std::string("malformed grid JSON: ") + e.what());
  }
}

// -----------------------------------------------------------------------------
// CSV traces

std::string field_to_csv(const BeltramiField& field) {
  std::ostringstream os;
  os << "rho,theta_index,re,im\n";
  for (std::size_t i = 0; i < field.radii.size(); ++i) {
    for (std::size_t j = 0; j < field.traces[i].size(); ++j) {
      const cplx m = field.traces[i][j];
      os << number_text(field.radii[i]) << ',' << j << ',' << number_text(m.real()) << ',' << number_text(m.imag())
         << '\n';
    }
  }
  return os.str();
}

BeltramiField field_from_csv(const std::string& text, bool exact) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) fail(ErrorKind::validation, "empty CSV trace");
  const auto header = split(trim(line), ',');
  const bool ok = header.size() == 4 && header[0] == "rho" && header[1] == "theta_index" &&
                  ((header[2] == "re" && header[3] == "im") || (header[2] == "re_mu" && header[3] == "im_mu"));
  if (!ok) fail(ErrorKind::validation, "CSV header must be rho,theta_index,re,im (or re_mu,im_mu)");

  std::vector<double> radii;
  std::vector<std::vector<std::pair<std::size_t, cplx>>> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    const std::string where = "CSV line " + std::to_string(line_no);
    if (cells.size() != 4) fail(ErrorKind::validation, where + ": expected 4 columns");
    const double rho = parse_number(cells[0], where + " rho");
    const double idx = parse_number(cells[1], where + " theta_index");
    if (idx < 0 || idx != std::floor(idx)) fail(ErrorKind::validation, where + ": theta_index must be a non-negative integer");
    const cplx mu{parse_number(cells[2], where + " re"), parse_number(cells[3], where + " im")};
    auto it = std::find(radii.begin(), radii.end(), rho);
    std::size_t c = static_cast<std::size_t>(it - radii.begin());
    if (it == radii.end()) {
      radii.push_back(rho);
      rows.emplace_back();
    }
    rows[c].emplace_back(static_cast<std::size_t>(idx), mu);
  }
  if (radii.empty()) fail(ErrorKind::validation, "CSV trace has no rows");
  std::vector<std::size_t> order(radii.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radii[a] < radii[b]; });
  std::vector<double> sorted;
  std::vector<std::vector<cplx>> traces;
  for (std::size_t c : order) {
    sorted.push_back(radii[c]);
    const std::size_t n = rows[c].size();
    std::vector<cplx> tr(n);
    std::vector<bool> seen(n, false);
    for (const auto& [j, mu] : rows[c]) {
      if (j >= n || seen[j]) {
        fail(ErrorKind::validation, "theta indices of each circle must be 0..N-1 without repeats", {{"rho", radii[c]}});
      }
      seen[j] = true;
      tr[j] = mu;
    }
    traces.push_back(std::move(tr));
  }
  return BeltramiField::from_traces(std::move(sorted), std::move(traces), exact);
}

// -----------------------------------------------------------------------------
// Files

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write '" + path + "'");
    out << text;
    out.flush();
    if (!out) fail(ErrorKind::io, "write to '" + path + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorKind::io, "cannot move output into '" + path + "'");
  }
}

}  // namespace loewner
