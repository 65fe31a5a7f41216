#include "lxm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "lxm/error.hpp"
#include "lxm/util.hpp"

namespace lxm::report {

namespace {

const std::map<std::string, std::string>& upos_colors() {
  static const std::map<std::string, std::string> colors = {
      {"NOUN", "#1f77b4"}, {"VERB", "#d62728"}, {"DET", "#2ca02c"},  {"ADJ", "#ff7f0e"}, {"ADV", "#9467bd"},
      {"PRON", "#8c564b"}, {"ADP", "#e377c2"},  {"CONJ", "#17becf"}, {"SCONJ", "#bcbd22"}, {"AUX", "#393b79"},
      {"PART", "#637939"}, {"NUM", "#8c6d31"},  {"X", "#843c39"},
  };
  return colors;
}

constexpr const char* kFallback[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
                                     "#b07aa1", "#ff9da7", "#9c755f", "#1b9e77", "#d95f02", "#7570b3",
                                     "#e7298a", "#66a61e", "#e6ab02", "#a6761d"};
constexpr const char* kOther = "#b0b0b0";

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::vector<std::string_view> csv_lines(const std::string& text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& l : lines)
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  return lines;
}

std::string svg_open(int width, int height) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
         std::to_string(width) + ' ' + std::to_string(height) +
         "\">\n<style>text{font-family:sans-serif;font-size:12px;fill:#222}"
         ".title{font-size:15px}.axis{stroke:#444;fill:none}.grid{stroke:#ddd}</style>\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
}

}  // namespace

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_mds_csv(std::span<const MdsPoint> points, const std::filesystem::path& path) {
  std::string out = "sample_id,label,x,y\n";
  for (const auto& p : points) {
    if (p.label.find_first_of(",\n\r") != std::string::npos) throw ContractError("label contains a CSV delimiter");
    out += std::to_string(p.sample_id) + ',' + p.label + ',' + format_double(p.x) + ',' + format_double(p.y) + '\n';
  }
  write_file(path, out);
}

std::vector<MdsPoint> read_mds_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto lines = csv_lines(text);
  if (lines.empty() || lines[0] != "sample_id,label,x,y") throw ParseError(path.string(), 1, "expected header sample_id,label,x,y");
  std::vector<MdsPoint> points;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    MdsPoint p;
    long long id;
    if (f.size() != 4 || !parse_int(f[0], id) || id < 0 || f[1].empty() || !parse_double(f[2], p.x) ||
        !parse_double(f[3], p.y))
      throw ParseError(path.string(), i + 1, "malformed MDS row");
    p.sample_id = static_cast<std::size_t>(id);
    p.label = std::string(f[1]);
    points.push_back(std::move(p));
  }
  return points;
}

void write_gdv_csv(std::span<const GdvRow> rows, const std::filesystem::path& path) {
  std::string out = "layer,gdv,n_points,n_classes,d\n";
  for (const auto& r : rows)
    out += std::to_string(r.layer) + ',' + format_double(r.gdv) + ',' + std::to_string(r.n_points) + ',' +
           std::to_string(r.n_classes) + ',' + std::to_string(r.dims) + '\n';
  write_file(path, out);
}

std::vector<GdvRow> read_gdv_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto lines = csv_lines(text);
  if (lines.empty() || lines[0] != "layer,gdv,n_points,n_classes,d")
    throw ParseError(path.string(), 1, "expected header layer,gdv,n_points,n_classes,d");
  std::vector<GdvRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    GdvRow r;
    long long layer, n, c, d;
    if (f.size() != 5 || !parse_int(f[0], layer) || !parse_double(f[1], r.gdv) || !parse_int(f[2], n) ||
        !parse_int(f[3], c) || !parse_int(f[4], d) || layer < 0 || n < 0 || c < 0 || d < 0)
      throw ParseError(path.string(), i + 1, "malformed GDV row");
    r.layer = static_cast<int>(layer);
    r.n_points = static_cast<std::size_t>(n);
    r.n_classes = static_cast<std::size_t>(c);
    r.dims = static_cast<std::size_t>(d);
    rows.push_back(r);
  }
  return rows;
}

std::map<std::string, std::string> class_palette(std::span<const std::string> classes) {
  std::set<std::string> sorted(classes.begin(), classes.end());
  std::map<std::string, std::string> palette;
  std::size_t next = 0;
  for (const auto& name : sorted) {
    if (auto it = upos_colors().find(name); it != upos_colors().end()) {
      palette[name] = it->second;
    } else if (name == "OTHER") {
      palette[name] = kOther;
    } else {
      palette[name] = kFallback[next++ % std::size(kFallback)];
    }
  }
  return palette;
}

std::string render_scatter(std::span<const MdsPoint> points, const std::string& title) {
  constexpr int kWidth = 760, kHeight = 560;
  constexpr double kLeft = 50, kTop = 50, kSide = 460, kPad = 12;

  std::map<std::string, std::size_t> counts;
  for (const auto& p : points) ++counts[p.label];
  std::vector<std::string> names;
  for (const auto& [name, n] : counts) names.push_back(name);
  const auto palette = class_palette(names);

  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  if (!points.empty()) {
    min_x = max_x = points[0].x;
    min_y = max_y = points[0].y;
  }
  for (const auto& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  double span = std::max(max_x - min_x, max_y - min_y);
  if (!(span > 0)) span = 1.0;
  const double scale = (kSide - 2 * kPad) / span;
  const double cx = 0.5 * (min_x + max_x), cy = 0.5 * (min_y + max_y);

  std::string s = svg_open(kWidth, kHeight);
  s += "<text class=\"title\" x=\"" + fixed(kLeft, 0) + "\" y=\"30\">" + xml_escape(title) + "</text>\n";
  s += "<rect class=\"axis\" x=\"" + fixed(kLeft, 0) + "\" y=\"" + fixed(kTop, 0) + "\" width=\"" + fixed(kSide, 0) +
       "\" height=\"" + fixed(kSide, 0) + "\"/>\n";
  s += "<text x=\"" + fixed(kLeft + kSide / 2, 0) + "\" y=\"" + fixed(kTop + kSide + 24, 0) +
       "\" text-anchor=\"middle\">MDS 1</text>\n";
  s += "<text x=\"" + fixed(kLeft - 14, 0) + "\" y=\"" + fixed(kTop + kSide / 2, 0) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 " + fixed(kLeft - 14, 0) + ' ' + fixed(kTop + kSide / 2, 0) +
       ")\">MDS 2</text>\n";

  s += "<g fill-opacity=\"0.75\">\n";
  for (const auto& p : points) {
    const double px = kLeft + kSide / 2 + (p.x - cx) * scale;
    const double py = kTop + kSide / 2 - (p.y - cy) * scale;
    s += "<circle cx=\"" + fixed(px) + "\" cy=\"" + fixed(py) + "\" r=\"2.5\" fill=\"" + palette.at(p.label) + "\"/>\n";
  }
  s += "</g>\n";

  const double row = std::min(18.0, kSide / std::max<double>(1.0, static_cast<double>(names.size())));
  const double lx = kLeft + kSide + 24;
  s += "<g>\n";
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double y = kTop + 8 + row * static_cast<double>(i);
    s += "<rect x=\"" + fixed(lx) + "\" y=\"" + fixed(y - 5) + "\" width=\"10\" height=\"10\" fill=\"" +
         palette.at(names[i]) + "\"/>\n";
    s += "<text x=\"" + fixed(lx + 16) + "\" y=\"" + fixed(y + 4) + "\">" + xml_escape(names[i]) + " (" +
         std::to_string(counts.at(names[i])) + ")</text>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

std::string render_gdv_curve(std::span<const GdvRow> rows, std::span<const std::string> layer_names,
                             const std::string& title) {
  constexpr int kWidth = 640, kHeight = 420;
  constexpr double kLeft = 70, kTop = 50, kPlotW = 530, kPlotH = 300;
  if (rows.empty()) throw AnalysisError("no GDV rows to plot");

  double lo = 0.0, hi = 0.0;
  for (const auto& r : rows) {
    lo = std::min(lo, r.gdv);
    hi = std::max(hi, r.gdv);
  }
  const double pad = 0.08 * std::max(hi - lo, 0.1);
  lo -= pad;
  hi += pad;
  const auto n = static_cast<double>(rows.size());
  auto px = [&](std::size_t i) { return kLeft + (n > 1 ? kPlotW * static_cast<double>(i) / (n - 1) : kPlotW / 2); };
  auto py = [&](double v) { return kTop + kPlotH * (hi - v) / (hi - lo); };

  std::string s = svg_open(kWidth, kHeight);
  s += "<text class=\"title\" x=\"" + fixed(kLeft, 0) + "\" y=\"30\">" + xml_escape(title) + "</text>\n";

  // five horizontal grid lines with value labels
  for (int g = 0; g <= 4; ++g) {
    const double v = lo + (hi - lo) * g / 4.0;
    const double y = py(v);
    s += "<line class=\"grid\" x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(y) + "\" x2=\"" + fixed(kLeft + kPlotW) +
         "\" y2=\"" + fixed(y) + "\"/>\n";
    s += "<text x=\"" + fixed(kLeft - 8) + "\" y=\"" + fixed(y + 4) + "\" text-anchor=\"end\">" + fixed(v, 3) +
         "</text>\n";
  }
  s += "<line class=\"axis\" stroke-dasharray=\"4 3\" x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(py(0.0)) +
       "\" x2=\"" + fixed(kLeft + kPlotW) + "\" y2=\"" + fixed(py(0.0)) + "\"/>\n";
  s += "<rect class=\"axis\" x=\"" + fixed(kLeft) + "\" y=\"" + fixed(kTop) + "\" width=\"" + fixed(kPlotW) +
       "\" height=\"" + fixed(kPlotH) + "\"/>\n";

  std::string poly;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) poly += ' ';
    poly += fixed(px(i)) + ',' + fixed(py(rows[i].gdv));
  }
  s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"" + poly + "\"/>\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s += "<circle cx=\"" + fixed(px(i)) + "\" cy=\"" + fixed(py(rows[i].gdv)) + "\" r=\"4\" fill=\"#1f77b4\"/>\n";
    s += "<text x=\"" + fixed(px(i)) + "\" y=\"" + fixed(py(rows[i].gdv) - 9) + "\" text-anchor=\"middle\">" +
         fixed(rows[i].gdv, 3) + "</text>\n";
    const std::string tick = i < layer_names.size() ? layer_names[i] : std::to_string(rows[i].layer);
    s += "<text x=\"" + fixed(px(i)) + "\" y=\"" + fixed(kTop + kPlotH + 18) + "\" text-anchor=\"middle\">" +
         xml_escape(tick) + "</text>\n";
  }
  s += "<text x=\"" + fixed(kLeft + kPlotW / 2) + "\" y=\"" + fixed(kTop + kPlotH + 44) +
       "\" text-anchor=\"middle\">layer</text>\n";
  s += "<text x=\"20\" y=\"" + fixed(kTop + kPlotH / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
       fixed(kTop + kPlotH / 2) + ")\">GDV</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace lxm::report
