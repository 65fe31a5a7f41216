#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace lxm::report {

/// Row of an MDS file ("sample_id,label,x,y").
struct MdsPoint {
  std::size_t sample_id = 0;
  std::string label;
  double x = 0.0;
  double y = 0.0;
};

/// Row of a GDV file ("layer,gdv,n_points,n_classes,d").
struct GdvRow {
  int layer = 0;
  double gdv = 0.0;
  std::size_t n_points = 0;
  std::size_t n_classes = 0;
  std::size_t dims = 0;
};

void write_mds_csv(std::span<const MdsPoint> points, const std::filesystem::path& path);
std::vector<MdsPoint> read_mds_csv(const std::filesystem::path& path);

void write_gdv_csv(std::span<const GdvRow> rows, const std::filesystem::path& path);
std::vector<GdvRow> read_gdv_csv(const std::filesystem::path& path);

/// Class -> "#rrggbb". The thirteen UPOS tags have fixed colours; other
/// names take colours from a fallback cycle in sorted order.
std::map<std::string, std::string> class_palette(std::span<const std::string> classes);

/// 2D scatter with one marker per point and a legend, on a fixed canvas.
/// Both axes share one scale so distances stay comparable.
std::string render_scatter(std::span<const MdsPoint> points, const std::string& title);

/// Layer index against GDV, points connected. `layer_names` may be empty.
std::string render_gdv_curve(std::span<const GdvRow> rows, std::span<const std::string> layer_names,
                             const std::string& title);

std::string xml_escape(std::string_view text);

}  // namespace lxm::report
