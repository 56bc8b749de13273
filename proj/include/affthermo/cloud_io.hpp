#pragma once

// Point cloud and box table serialization.

#include "affthermo/geometry.hpp"

#include <iosfwd>
#include <string>

namespace affthermo {

/// "x,y" header then one row per point, 17 significant digits so that a
/// read-back is lossless.
void write_cloud_csv(std::ostream& out, const PointCloud& cloud);
PointCloud read_cloud_csv(std::istream& in);

/// "AFPC1" magic, uint8 source, float64 resolution, uint64 count, then
/// little-endian float64 pairs.
void write_cloud_binary(std::ostream& out, const PointCloud& cloud);
PointCloud read_cloud_binary(std::istream& in);

/// Loads either format, detected from the magic bytes.
PointCloud load_cloud(const std::string& path);
void save_cloud(const std::string& path, const PointCloud& cloud);

void write_projection_csv(std::ostream& out, const ProjectedSet& set);
/// "scale,count,offsetId".
void write_box_table_csv(std::ostream& out, const BoxDimEstimate& estimate);

}  // namespace affthermo
