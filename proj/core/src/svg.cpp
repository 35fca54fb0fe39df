#include "hypdyn/svg.hpp"

#include <cstdio>

namespace hypdyn {

namespace {

constexpr double kScale = 360.0;
constexpr double kOffset = 400.0;

std::string pt(Complex z) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f,%.2f", kOffset + kScale * z.real(),
                kOffset - kScale * z.imag());
  return buf;
}

std::string circle(Complex c, double r, const char* style) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "<circle cx='%.2f' cy='%.2f' r='%.2f' %s/>\n",
                kOffset + kScale * c.real(), kOffset - kScale * c.imag(), kScale * r, style);
  return buf;
}

std::string polyline(const std::vector<Complex>& pts, const char* style) {
  std::string out = "<polyline points='";
  size_t stride = std::max<size_t>(1, pts.size() / 1024);
  for (size_t i = 0; i < pts.size(); i += stride) out += pt(pts[i]) + " ";
  out += pt(pts.back());
  out += std::string("' ") + style + "/>\n";
  return out;
}

const char* palette(int i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return colors[i % 8];
}

}  // namespace

std::string svg_model_level(const ModelTower& s, int level) {
  std::string out =
      "<svg xmlns='http://www.w3.org/2000/svg' width='800' height='800' "
      "viewBox='0 0 800 800'>\n<rect width='800' height='800' fill='white'/>\n";
  out += circle(Complex(0.0), 1.0, "fill='none' stroke='black' stroke-width='1.5'");
  if (level < int(s.levels.size()))
    out += circle(Complex(0.0), s.levels[level].r,
                  "fill='none' stroke='#999999' stroke-width='0.8' stroke-dasharray='6,4'");
  for (int k = level; k <= s.built_stages(); ++k) {
    if (level >= int(s.table[k].size())) continue;
    char style[128];
    std::snprintf(style, sizeof style,
                  "fill='%s' fill-opacity='0.25' stroke='%s' stroke-width='0.7'", palette(k),
                  palette(k));
    for (const Region& r : s.table[k][level].components) out += polyline(r.pts, style);
  }
  for (int m = 0; m <= s.built_stages(); ++m)
    out += circle(Complex(s.levels[m].c, 0.0), 0.006, "fill='black'");
  out += "</svg>\n";
  return out;
}

std::string svg_foliation(const SurfaceModel& s0, const std::vector<FoliationDescriptor>& fs) {
  std::string out =
      "<svg xmlns='http://www.w3.org/2000/svg' width='800' height='800' "
      "viewBox='0 0 800 800'>\n<rect width='800' height='800' fill='white'/>\n";
  out += circle(Complex(0.0), 1.0, "fill='none' stroke='black' stroke-width='1.5'");
  if (s0.kind() == SurfaceKind::round_annulus && s0.log_inv_inner_radius() < 700.0)
    out += circle(Complex(0.0), s0.inner_radius(),
                  "fill='none' stroke='black' stroke-width='1.5'");
  int ci = 0;
  for (const auto& f : fs) {
    char style[128];
    std::snprintf(style, sizeof style, "fill='none' stroke='%s' stroke-width='1.2'",
                  f.kind == FoliationDescriptor::Kind::contracting ? "#1f77b4" : "#d62728");
    for (const auto& leaf : f.leaves)
      if (leaf.points.size() > 1) out += polyline(leaf.points, style);
    ++ci;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace hypdyn
