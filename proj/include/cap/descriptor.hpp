#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cap/comparison.hpp"
#include "cap/geometry.hpp"
#include "cap/warped_model.hpp"

namespace cap {

/// One [section] of a key-value document. Keys keep their raw value text;
/// typed access parses on demand so malformed values fail with the section
/// and key named in the message.
struct KvSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(const std::string& key) const;
  bool has(const std::string& key) const { return find(key) != nullptr; }

  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  int get_int_or(const std::string& key, int fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  Vec3 get_vec3(const std::string& key) const;
  /// Flat list of numbers "t0 g0 t1 g1 ..." folded into pairs.
  std::vector<std::pair<double, double>> get_pairs(const std::string& key) const;
};

/// Plain-text key-value document: `key = value` lines grouped under
/// `[section]` headers, `#` comments, blank lines ignored. Keys before the
/// first header form the unnamed section "". The raw file text is kept
/// verbatim so reports can echo their inputs byte for byte.
struct KvDocument {
  std::string raw;
  std::string source_path;
  std::vector<KvSection> sections;

  const KvSection* find(const std::string& name) const;
  std::vector<const KvSection*> find_all(const std::string& name) const;
};

KvDocument parse_kv_text(const std::string& text, const std::string& source_path = "");
KvDocument load_kv_file(const std::string& path);

/// Builds the body described by the document's [body] section; intersection
/// bodies list their parts as [component] sections after it. The document's
/// raw text is stored as the body's descriptor. Throws std::runtime_error
/// with the offending key on validation failures.
ConvexBody build_body(const KvDocument& doc);

/// Builds the model from a [model] section: kind (closed | exterior),
/// n, profile (euclidean | hyperbolic | remark-splice | tabulated) with
/// profile-specific parameters (t0/H0 for the splice, points for tabulated,
/// H0/boundary_area for the exterior kind).
WarpedModel build_model(const KvSection& s);

/// Builds a curvature profile from a [profile] section: quantity
/// (sectional | ricci), shape (flat | hyperbolic-const | table), value c
/// for the constant shapes, points for table, r_max.
CurvatureProfile build_profile(const KvSection& s);

}  // namespace cap
