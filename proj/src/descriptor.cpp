#include "cap/descriptor.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cap {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::runtime_error(where.empty() ? what : where + ": " + what);
}

double parse_double(const std::string& text, const std::string& where) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') fail(where, "expected a number, got '" + text + "'");
  if (!std::isfinite(v)) fail(where, "non-finite value '" + text + "'");
  return v;
}

std::vector<double> parse_numbers(const std::string& text, const std::string& where) {
  std::string cleaned = text;
  for (char& c : cleaned)
    if (c == ',') c = ' ';
  std::istringstream in(cleaned);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, where));
  return out;
}

}  // namespace

const std::string* KvSection::find(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return &v;
  return nullptr;
}

std::string KvSection::get_string(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) fail("[" + name + "]", "missing required key '" + key + "'");
  return *v;
}

std::string KvSection::get_string_or(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double KvSection::get_double(const std::string& key) const {
  return parse_double(get_string(key), "[" + name + "] " + key);
}

double KvSection::get_double_or(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  return v ? parse_double(*v, "[" + name + "] " + key) : fallback;
}

int KvSection::get_int_or(const std::string& key, int fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  double d = parse_double(*v, "[" + name + "] " + key);
  int i = static_cast<int>(d);
  if (double(i) != d) fail("[" + name + "] " + key, "expected an integer, got '" + *v + "'");
  return i;
}

bool KvSection::get_bool_or(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  fail("[" + name + "] " + key, "expected a boolean, got '" + *v + "'");
}

Vec3 KvSection::get_vec3(const std::string& key) const {
  std::string where = "[" + name + "] " + key;
  std::vector<double> v = parse_numbers(get_string(key), where);
  if (v.size() != 3) fail(where, "expected 3 components");
  return {v[0], v[1], v[2]};
}

std::vector<std::pair<double, double>> KvSection::get_pairs(const std::string& key) const {
  std::string where = "[" + name + "] " + key;
  std::vector<double> v = parse_numbers(get_string(key), where);
  if (v.size() < 4 || v.size() % 2 != 0) fail(where, "expected an even list of at least 4 numbers");
  std::vector<std::pair<double, double>> out;
  for (size_t i = 0; i + 1 < v.size(); i += 2) out.emplace_back(v[i], v[i + 1]);
  return out;
}

const KvSection* KvDocument::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

std::vector<const KvSection*> KvDocument::find_all(const std::string& name) const {
  std::vector<const KvSection*> out;
  for (const auto& s : sections)
    if (s.name == name) out.push_back(&s);
  return out;
}

KvDocument parse_kv_text(const std::string& text, const std::string& source_path) {
  KvDocument doc;
  doc.raw = text;
  doc.source_path = source_path;
  doc.sections.push_back({"", {}});

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (size_t hash = t.find('#'); hash != std::string::npos) t = trim(t.substr(0, hash));
    std::string where =
        (source_path.empty() ? std::string("line ") : source_path + ":") + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']') fail(where, "unterminated section header");
      std::string name = trim(t.substr(1, t.size() - 2));
      if (name.empty()) fail(where, "empty section name");
      doc.sections.push_back({name, {}});
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos) fail(where, "expected 'key = value' or '[section]'");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) fail(where, "empty key");
    doc.sections.back().entries.emplace_back(key, value);
  }
  if (doc.sections.front().entries.empty() && doc.sections.size() > 1)
    doc.sections.erase(doc.sections.begin());
  return doc;
}

KvDocument load_kv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_kv_text(buf.str(), path);
}

namespace {

ConvexBody body_from_section(const KvSection& s, bool as_component) {
  std::string kind = s.get_string("kind");
  if (kind == "ball") {
    double radius = s.get_double("radius");
    if (radius <= 0.0) fail("[" + s.name + "] radius", "must be positive");
    Vec3 center = s.has("center") ? s.get_vec3("center") : Vec3{0, 0, 0};
    return ConvexBody::ball(center, radius, s.get_int_or("dimension", 3));
  }
  if (kind == "ellipsoid") {
    Vec3 semi = s.get_vec3("semi_axes");
    if (semi.x <= 0 || semi.y <= 0 || semi.z <= 0)
      fail("[" + s.name + "] semi_axes", "must be positive");
    Vec3 center = s.has("center") ? s.get_vec3("center") : Vec3{0, 0, 0};
    return ConvexBody::ellipsoid(center, semi);
  }
  if (kind == "halfspace-slab") {
    if (!as_component)
      fail("[" + s.name + "]", "halfspace-slab is only valid as an intersection component");
    double lo = s.get_double("lo"), hi = s.get_double("hi");
    if (!(lo < hi)) fail("[" + s.name + "]", "slab needs lo < hi");
    return ConvexBody::slab(s.get_vec3("normal"), lo, hi);
  }
  if (kind == "intersection")
    fail("[" + s.name + "]", "nested intersections are not supported");
  fail("[" + s.name + "] kind", "unknown body kind '" + kind + "'");
}

}  // namespace

ConvexBody build_body(const KvDocument& doc) {
  const KvSection* body = doc.find("body");
  if (!body) fail(doc.source_path, "missing [body] section");
  ConvexBody out = [&] {
    if (body->get_string("kind") != "intersection") return body_from_section(*body, false);
    std::vector<ConvexBody> members;
    for (const KvSection* c : doc.find_all("component"))
      members.push_back(body_from_section(*c, true));
    if (members.size() < 2)
      fail(doc.source_path, "intersection needs at least 2 [component] sections");
    return ConvexBody::intersection(std::move(members));
  }();
  out.set_descriptor_text(doc.raw);
  return out;
}

WarpedModel build_model(const KvSection& s) {
  int n = s.get_int_or("n", 2);
  if (n < 2) fail("[" + s.name + "] n", "fiber dimension must be >= 2");
  std::string kind = s.get_string_or("kind", "closed");
  std::string profile = s.get_string("profile");
  if (s.has("H0") && s.get_double("H0") <= 0.0) fail("[" + s.name + "] H0", "must be positive");

  if (kind == "exterior") {
    double area = s.get_double("boundary_area");
    if (area <= 0.0) fail("[" + s.name + "] boundary_area", "must be positive");
    if (profile == "euclidean") return WarpedModel::exterior_equality(n, s.get_double("H0"), area);
    if (profile == "tabulated") {
      WarpedModel m = WarpedModel::tabulated(n, s.get_pairs("points"));
      if (std::abs(m.t_min) > 1e-12 || std::abs(m.g(0.0) - 1.0) > 1e-9)
        fail("[" + s.name + "] points", "exterior profile must start at (0, 1)");
      m.kind = WarpedModel::Kind::Exterior;
      m.boundary_area = area;
      return m;
    }
    fail("[" + s.name + "] profile", "exterior kind supports euclidean or tabulated, got '" +
                                         profile + "'");
  }
  if (kind != "closed") fail("[" + s.name + "] kind", "expected closed or exterior");

  if (profile == "euclidean") return WarpedModel::euclidean(n);
  if (profile == "hyperbolic") return WarpedModel::hyperbolic(n);
  if (profile == "remark-splice")
    return WarpedModel::remark_splice(s.get_double("t0"), s.get_double("H0"), n);
  if (profile == "tabulated") return WarpedModel::tabulated(n, s.get_pairs("points"));
  fail("[" + s.name + "] profile", "unknown profile '" + profile + "'");
}

CurvatureProfile build_profile(const KvSection& s) {
  std::string qs = s.get_string("quantity");
  CurvatureProfile::Quantity q;
  if (qs == "sectional")
    q = CurvatureProfile::Quantity::Sectional;
  else if (qs == "ricci")
    q = CurvatureProfile::Quantity::Ricci;
  else
    fail("[" + s.name + "] quantity", "expected sectional or ricci");

  double r_max = s.get_double("r_max");
  if (r_max <= 0.0) fail("[" + s.name + "] r_max", "must be positive");

  std::string shape = s.get_string("shape");
  if (shape == "flat") return CurvatureProfile::constant(q, 0.0, r_max);
  if (shape == "hyperbolic-const") {
    double c = s.get_double_or("c", -1.0);
    return CurvatureProfile::constant(q, c, r_max);
  }
  if (shape == "table") return CurvatureProfile::table(q, s.get_pairs("points"), r_max);
  fail("[" + s.name + "] shape", "unknown profile shape '" + shape + "'");
}

}  // namespace cap
