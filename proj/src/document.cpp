#include "affthermo/document.hpp"

#include "affthermo/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace affthermo {

namespace {

using nlohmann::json;

struct Position {
  int line = 1;
  int column = 1;
};

Position position_of(const std::string& text, std::size_t byte) {
  Position p;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

// JSON values carry no source positions, so semantic errors point at the
// first occurrence of the key they concern.
class Locator {
 public:
  explicit Locator(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::string& detail, std::string_view key = {}) const {
    if (!key.empty()) {
      const auto at = text_.find("\"" + std::string(key) + "\"");
      if (at != std::string::npos) {
        const auto p = position_of(text_, at);
        throw ParseError(detail, p.line, p.column);
      }
    }
    throw ParseError(detail, 1, 1);
  }

  json parse() const {
    try {
      return json::parse(text_);
    } catch (const json::parse_error& e) {
      const auto p = position_of(text_, e.byte > 0 ? e.byte - 1 : 0);
      std::string what = e.what();
      const auto colon = what.find("]: ");
      throw ParseError(colon == std::string::npos ? what : what.substr(colon + 3), p.line, p.column);
    }
  }

 private:
  const std::string& text_;
};

DocumentEntry read_entry(const json& v, const Locator& loc, const std::string& what, std::string_view key) {
  DocumentEntry e;
  if (v.is_number_integer()) {
    e.form = DocumentEntry::Form::Integer;
    e.text = v.dump();
    e.value = v.get<double>();
  } else if (v.is_number()) {
    e.form = DocumentEntry::Form::Float;
    e.value = v.get<double>();
  } else if (v.is_string()) {
    e.form = DocumentEntry::Form::Text;
    e.text = v.get<std::string>();
    try {
      e.value = to_double(parse_rational(e.text));
    } catch (const std::exception&) {
      loc.fail(what + ": \"" + e.text + "\" is not a rational", key);
    }
  } else {
    loc.fail(what + " must be a number or a \"p/q\" string", key);
  }
  if (!std::isfinite(e.value)) loc.fail(what + " is not finite", key);
  return e;
}

json write_entry(const DocumentEntry& e) {
  switch (e.form) {
    case DocumentEntry::Form::Integer:
      return json::parse(e.text);
    case DocumentEntry::Form::Text:
      return e.text;
    case DocumentEntry::Form::Float:
      break;
  }
  return e.value;
}

}  // namespace

IfsDocument IfsDocument::parse(const std::string& text) {
  Locator loc(text);
  const json root = loc.parse();
  if (!root.is_object()) loc.fail("document must be an object");

  IfsDocument doc;
  if (auto it = root.find("name"); it != root.end()) {
    if (!it->is_string()) loc.fail("name must be a string", "name");
    doc.name = it->get<std::string>();
  }
  const auto maps = root.find("maps");
  if (maps == root.end() || !maps->is_array() || maps->empty()) {
    loc.fail("maps must be a non-empty array", "maps");
  }
  if (maps->size() > 255) loc.fail("at most 255 maps are supported", "maps");
  for (std::size_t i = 0; i < maps->size(); ++i) {
    const json& m = (*maps)[i];
    const std::string label = "map " + std::to_string(i);
    if (!m.is_object()) loc.fail(label + " must be an object", "maps");
    const auto matrix = m.find("matrix");
    if (matrix == m.end() || !matrix->is_array() || matrix->size() != 2) {
      loc.fail(label + ": matrix must be a 2x2 row-major array", "matrix");
    }
    DocumentMap dm;
    for (int r = 0; r < 2; ++r) {
      const json& row = (*matrix)[r];
      if (!row.is_array() || row.size() != 2) loc.fail(label + ": matrix rows need two entries", "matrix");
      for (int c = 0; c < 2; ++c) dm.matrix[2 * r + c] = read_entry(row[c], loc, label + " matrix entry", "matrix");
    }
    dm.translation = {DocumentEntry::number(0.0), DocumentEntry::number(0.0)};
    if (auto t = m.find("translation"); t != m.end()) {
      if (!t->is_array() || t->size() != 2) loc.fail(label + ": translation must have two entries", "translation");
      for (int k = 0; k < 2; ++k) dm.translation[k] = read_entry((*t)[k], loc, label + " translation", "translation");
    }
    doc.maps.push_back(dm);
  }
  if (auto o = root.find("options"); o != root.end()) {
    if (!o->is_object()) loc.fail("options must be an object", "options");
    if (auto v = o->find("rankTolerance"); v != o->end()) {
      if (!v->is_number() || !(v->get<double>() >= 0.0)) loc.fail("rankTolerance must be >= 0", "rankTolerance");
      doc.options.rank_tolerance = v->get<double>();
    }
    if (auto v = o->find("budget"); v != o->end()) {
      if (!v->is_number_unsigned()) loc.fail("budget must be a positive integer", "budget");
      doc.options.budget = v->get<std::uint64_t>();
    }
    if (auto v = o->find("seed"); v != o->end()) {
      if (!v->is_number_unsigned()) loc.fail("seed must be a non-negative integer", "seed");
      doc.options.seed = v->get<std::uint64_t>();
    }
  }
  return doc;
}

IfsDocument IfsDocument::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Io, "cli", "OpenFailed", "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

IfsDocument IfsDocument::from_ifs(const AffineIFS& ifs) {
  IfsDocument doc;
  doc.name = ifs.name();
  for (const auto& m : ifs.maps()) {
    DocumentMap dm;
    const Mat2& a = m.linear;
    dm.matrix = {DocumentEntry::number(a.a), DocumentEntry::number(a.b), DocumentEntry::number(a.c),
                 DocumentEntry::number(a.d)};
    dm.translation = {DocumentEntry::number(m.translation.x), DocumentEntry::number(m.translation.y)};
    doc.maps.push_back(dm);
  }
  if (ifs.rank_tolerance() != kDefaultRankTolerance) doc.options.rank_tolerance = ifs.rank_tolerance();
  return doc;
}

std::string IfsDocument::serialize() const {
  // One map per line keeps diffs readable.
  std::ostringstream out;
  out << "{\n  \"name\": " << json(name).dump() << ",\n  \"maps\": [\n";
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto& m = maps[i];
    json matrix = json::array({json::array({write_entry(m.matrix[0]), write_entry(m.matrix[1])}),
                               json::array({write_entry(m.matrix[2]), write_entry(m.matrix[3])})});
    json translation = json::array({write_entry(m.translation[0]), write_entry(m.translation[1])});
    out << "    {\"matrix\": " << matrix.dump() << ", \"translation\": " << translation.dump() << "}"
        << (i + 1 < maps.size() ? ",\n" : "\n");
  }
  out << "  ]";
  json opts = json::object();
  if (options.rank_tolerance) opts["rankTolerance"] = *options.rank_tolerance;
  if (options.budget) opts["budget"] = *options.budget;
  if (options.seed) opts["seed"] = *options.seed;
  if (!opts.empty()) out << ",\n  \"options\": " << opts.dump();
  out << "\n}\n";
  return out.str();
}

AffineIFS IfsDocument::to_ifs() const {
  std::vector<AffineMap> out;
  for (const auto& m : maps) {
    AffineMap am;
    am.linear = {m.matrix[0].value, m.matrix[1].value, m.matrix[2].value, m.matrix[3].value};
    am.translation = {m.translation[0].value, m.translation[1].value};
    const bool exact = std::all_of(m.matrix.begin(), m.matrix.end(),
                                   [](const DocumentEntry& e) { return e.form != DocumentEntry::Form::Float; });
    if (exact) {
      am.exact = ExactMat2{parse_rational(m.matrix[0].text), parse_rational(m.matrix[1].text),
                           parse_rational(m.matrix[2].text), parse_rational(m.matrix[3].text)};
    }
    out.push_back(std::move(am));
  }
  return AffineIFS(std::move(out), name, options.rank_tolerance.value_or(kDefaultRankTolerance));
}

}  // namespace affthermo
