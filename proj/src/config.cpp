#include "psilab/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace psilab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string format(const std::string& source, int line, const std::string& field, const std::string& message) {
  std::ostringstream out;
  out << source;
  if (line > 0) out << ":" << line;
  if (!field.empty()) out << ": field '" << field << "'";
  out << ": " << message;
  return out.str();
}

// Line number of every "section.key" entry, for diagnostics.
std::map<std::string, int> line_index(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string raw, section;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    lines.emplace(section + "." + trim(line.substr(0, eq)), number);
  }
  return lines;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line_, const std::string& field_,
                         const std::string& message)
    : ConfigurationError(format(source, line_, field_, message)), line(line_), field(field_) {}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "", "cannot open file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_string(text.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source, static_cast<int>(e.line()), "", e.message());
  }
  const std::map<std::string, int> lines = line_index(text);
  Config c;
  c.source_ = source;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      const std::string field = "." + section;
      const auto it = lines.find(field);
      throw ConfigError(source, it == lines.end() ? 0 : it->second, section, "key outside of any section");
    }
    for (const auto& [key, value] : body) {
      const std::string field = section + "." + key;
      const auto it = lines.find(field);
      c.entries_[field] = Entry{trim(value.data()), it == lines.end() ? 0 : it->second};
    }
  }
  return c;
}

const Config::Entry* Config::find(const std::string& field) const {
  const auto it = entries_.find(field);
  if (it == entries_.end()) return nullptr;
  used_.insert(field);
  return &it->second;
}

void Config::record(const std::string& field, const std::string& value) const { resolved_[field] = value; }

bool Config::has(const std::string& field) const { return entries_.count(field) != 0; }

void Config::reject(const std::string& field, const std::string& message) const {
  const auto it = entries_.find(field);
  throw ConfigError(source_, it == entries_.end() ? 0 : it->second.line, field, message);
}

std::string Config::get_string(const std::string& field, const std::string& fallback) const {
  const Entry* e = find(field);
  const std::string v = e ? e->value : fallback;
  record(field, v);
  return v;
}

namespace {

bool parse_double(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

bool parse_long(const std::string& s, long& out) {
  const char* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, out);
  return r.ec == std::errc() && r.ptr == end;
}

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

double Config::get_double(const std::string& field, double fallback) const {
  const Entry* e = find(field);
  double v = fallback;
  if (e && !parse_double(e->value, v)) reject(field, "expected a real number, got '" + e->value + "'");
  record(field, shortest(v));
  return v;
}

long Config::get_int(const std::string& field, long fallback) const {
  const Entry* e = find(field);
  long v = fallback;
  if (e && !parse_long(e->value, v)) reject(field, "expected an integer, got '" + e->value + "'");
  record(field, std::to_string(v));
  return v;
}

std::vector<double> Config::get_doubles(const std::string& field, const std::vector<double>& fallback) const {
  const Entry* e = find(field);
  std::vector<double> v = fallback;
  if (e) {
    v.clear();
    for (const std::string& item : split_list(e->value)) {
      double x = 0.0;
      if (!parse_double(item, x)) reject(field, "expected a comma-separated list of reals, got '" + item + "'");
      v.push_back(x);
    }
  }
  std::string text;
  for (std::size_t i = 0; i < v.size(); ++i) text += (i ? ", " : "") + shortest(v[i]);
  record(field, text);
  return v;
}

std::vector<long> Config::get_ints(const std::string& field, const std::vector<long>& fallback) const {
  const Entry* e = find(field);
  std::vector<long> v = fallback;
  if (e) {
    v.clear();
    for (const std::string& item : split_list(e->value)) {
      long x = 0;
      if (!parse_long(item, x)) reject(field, "expected a comma-separated list of integers, got '" + item + "'");
      v.push_back(x);
    }
  }
  std::string text;
  for (std::size_t i = 0; i < v.size(); ++i) text += (i ? ", " : "") + std::to_string(v[i]);
  record(field, text);
  return v;
}

void Config::set(const std::string& field, const std::string& value) {
  const auto dot = field.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == field.size())
    throw ConfigError(source_, 0, field, "override must be written as section.key");
  auto it = entries_.find(field);
  const int line = it == entries_.end() ? 0 : it->second.line;
  entries_[field] = Entry{trim(value), line};
}

void Config::check_all_used() const {
  for (const auto& [field, entry] : entries_)
    if (!used_.count(field)) throw ConfigError(source_, entry.line, field, "unknown field for this experiment");
}

std::string Config::resolved_text() const {
  std::ostringstream out;
  std::string section;
  for (const auto& [field, value] : resolved_) {
    const auto dot = field.find('.');
    const std::string s = field.substr(0, dot);
    if (s != section) {
      if (!section.empty()) out << "\n";
      out << "[" << s << "]\n";
      section = s;
    }
    out << field.substr(dot + 1) << " = " << value << "\n";
  }
  return out.str();
}

}  // namespace psilab
