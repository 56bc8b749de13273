#pragma once

// IFS description documents (JSON syntax).
//
//   {
//     "name": "sierpinski",
//     "maps": [
//       {"matrix": [["1/2", 0], [0, "1/2"]], "translation": [0, 0]},
//       ...
//     ],
//     "options": {"rankTolerance": 1e-10, "budget": 50000000, "seed": 7}
//   }
//
// Matrix entries are floats, integers, or exact rationals written as "p/q"
// strings. A tuple whose entries are all integers or strings is exact.

#include "affthermo/ifs.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace affthermo {

struct DocumentEntry {
  enum class Form { Float, Integer, Text };
  Form form = Form::Float;
  double value = 0.0;
  std::string text;  ///< Integer and Text forms: the exact literal

  static DocumentEntry number(double v) { return {Form::Float, v, {}}; }
  bool operator==(const DocumentEntry&) const = default;
};

struct DocumentMap {
  std::array<DocumentEntry, 4> matrix;  ///< row-major
  std::array<DocumentEntry, 2> translation;
  bool operator==(const DocumentMap&) const = default;
};

struct DocumentOptions {
  std::optional<double> rank_tolerance;
  std::optional<std::uint64_t> budget;
  std::optional<std::uint64_t> seed;
  bool operator==(const DocumentOptions&) const = default;
};

struct IfsDocument {
  std::string name;
  std::vector<DocumentMap> maps;
  DocumentOptions options;

  bool operator==(const IfsDocument&) const = default;

  /// Throws ParseError with line and column of the offending token.
  static IfsDocument parse(const std::string& text);
  static IfsDocument load(const std::string& path);
  /// From a tuple; entries are written as floats.
  static IfsDocument from_ifs(const AffineIFS& ifs);

  std::string serialize() const;
  AffineIFS to_ifs() const;
};

}  // namespace affthermo
