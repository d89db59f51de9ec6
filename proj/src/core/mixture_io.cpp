#include "glasskit/mixture_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "glasskit/error.hpp"

namespace glasskit {

namespace {

constexpr double kAssertedNormTol = 1e-3;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view strip_comment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::InvalidMixture, what); }

double parse_number(std::string_view v, const std::string& key) {
  std::string text(v);
  std::erase(text, '_');
  double out = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    fail("key '" + key + "': expected a finite number, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view v, const std::string& key) {
  if (v == "true") return true;
  if (v == "false") return false;
  fail("key '" + key + "': expected true or false, got '" + std::string(v) + "'");
}

int parse_degree(const std::string& key) {
  int k = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), k);
  if (ec != std::errc() || ptr != key.data() + key.size()) {
    fail("key '" + key + "': not a degree (expected an integer >= 2)");
  }
  if (k < 2) fail("key '" + key + "': degree must be >= 2");
  return k;
}

}  // namespace

MixtureFile parse_mixture(std::string_view text, const std::string& id) {
  std::map<int, double> coeffs;
  std::string name = id;
  bool asserted_normalized = false;
  bool saw_table = false;
  std::string table;

  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    line = trim(strip_comment(line));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail("line " + std::to_string(line_no) + ": malformed table header");
      table = std::string(trim(line.substr(1, line.size() - 2)));
      if (table == "mixture") saw_table = true;
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = unquote(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) fail("line " + std::to_string(line_no) + ": empty key");

    if (key == "normalized") {
      asserted_normalized = parse_bool(value, key);
    } else if (key == "id" || key == "name") {
      name = unquote(value);
    } else if (table == "mixture") {
      const int k = parse_degree(key);
      const double g = parse_number(value, key);
      if (g < 0.0) fail("key '" + key + "': coefficient must be >= 0");
      if (coeffs.count(k)) fail("key '" + key + "': duplicate degree");
      coeffs[k] = g;
    } else {
      fail("key '" + key + "': unknown key outside the [mixture] table");
    }
  }

  if (!saw_table) fail("missing [mixture] table");
  if (coeffs.empty()) fail("[mixture] table has no degree entries");

  double total = 0.0;
  for (const auto& [k, g] : coeffs) total += g * g;
  if (asserted_normalized && std::abs(total - 1.0) > kAssertedNormTol) {
    std::ostringstream os;
    os << "key 'normalized': file asserts xi(1) = 1 but the coefficients give xi(1) = " << total;
    fail(os.str());
  }

  NormalizedMixture nm = normalize(coeffs);
  return {name, nm.mixture, nm.scale};
}

MixtureFile load_mixture_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read mixture file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_mixture(buf.str(), std::filesystem::path(path).stem().string());
}

}  // namespace glasskit
