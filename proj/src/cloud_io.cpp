#include "affthermo/cloud_io.hpp"

#include "affthermo/errors.hpp"
#include "affthermo/format.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace affthermo {

namespace {

constexpr std::array<char, 5> kMagic{'A', 'F', 'P', 'C', '1'};

std::string exact_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 8 || sizeof(T) == 1);
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
    throw Error(ErrorCategory::Io, "geometry", "TruncatedCloud", "binary cloud ended early");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_cloud_csv(std::ostream& out, const PointCloud& cloud) {
  out << "x,y\n";
  for (const auto& p : cloud.points) out << exact_number(p.x) << ',' << exact_number(p.y) << '\n';
}

PointCloud read_cloud_csv(std::istream& in) {
  PointCloud cloud;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || (row == 1 && line.rfind("x", 0) == 0)) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("cloud row needs two columns", row, 1);
    try {
      cloud.points.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::logic_error&) {
      throw ParseError("cloud row is not numeric", row, 1);
    }
  }
  return cloud;
}

void write_cloud_binary(std::ostream& out, const PointCloud& cloud) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(cloud.source));
  put_le<double>(out, cloud.resolution);
  put_le<std::uint64_t>(out, cloud.points.size());
  for (const auto& p : cloud.points) {
    put_le<double>(out, p.x);
    put_le<double>(out, p.y);
  }
}

PointCloud read_cloud_binary(std::istream& in) {
  std::array<char, 5> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw Error(ErrorCategory::Io, "geometry", "BadMagic", "binary cloud must start with AFPC1");
  }
  PointCloud cloud;
  const auto source = get_le<std::uint8_t>(in);
  if (source > static_cast<std::uint8_t>(SourceSet::Sample)) {
    throw Error(ErrorCategory::Io, "geometry", "BadSource", "unknown source tag " + std::to_string(source));
  }
  cloud.source = static_cast<SourceSet>(source);
  cloud.resolution = get_le<double>(in);
  const auto count = get_le<std::uint64_t>(in);
  cloud.points.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 24)));
  for (std::uint64_t i = 0; i < count; ++i) {
    const double x = get_le<double>(in);
    const double y = get_le<double>(in);
    cloud.points.push_back({x, y});
  }
  return cloud;
}

PointCloud load_cloud(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::Io, "cli", "OpenFailed", "cannot read " + path);
  std::array<char, 5> head{};
  in.read(head.data(), head.size());
  const bool binary = in.gcount() == 5 && head == kMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_cloud_binary(in) : read_cloud_csv(in);
}

void save_cloud(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCategory::Io, "cli", "OpenFailed", "cannot write " + path);
  const bool binary = path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0;
  if (binary) {
    write_cloud_binary(out, cloud);
  } else {
    write_cloud_csv(out, cloud);
  }
}

void write_projection_csv(std::ostream& out, const ProjectedSet& set) {
  out << "t\n";
  for (double t : set.values) out << exact_number(t) << '\n';
}

void write_box_table_csv(std::ostream& out, const BoxDimEstimate& estimate) {
  out << "scale,count,offsetId\n";
  for (const auto& row : estimate.table) {
    out << format_number(row.scale) << ',' << row.count << ',' << row.offset_id << '\n';
  }
}

}  // namespace affthermo
