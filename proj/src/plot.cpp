#include "cmokg/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cmokg {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string fmt(double v) {
  double rounded = std::round(v * 100.0) / 100.0;
  if (rounded == 0.0) rounded = 0.0;  // avoid "-0"
  std::ostringstream os;
  os << rounded;
  return os.str();
}

std::string fmt_tick(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2"};

}  // namespace

ParsedAggregate parse_aggregate_csv(const std::string& text) {
  ParsedAggregate out;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("aggregate CSV: empty input");
  auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "mode") {
    throw std::runtime_error("aggregate CSV: unexpected header");
  }
  int ci_col = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "ci95_halfwidth") ci_col = static_cast<int>(i);
  }
  if (ci_col < 0) out.warnings.push_back("no ci95_halfwidth column; bands omitted");

  auto series_for = [&](const std::string& label) -> PlotSeries& {
    for (auto& s : out.series) {
      if (s.label == label) return s;
    }
    out.series.push_back(PlotSeries{label, {}, {}, {}});
    return out.series.back();
  };

  bool missing_ci_values = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() < 3) throw std::runtime_error("aggregate CSV: short row: " + line);
    PlotSeries& s = series_for(fields[0]);
    s.x.push_back(std::stod(fields[1]));
    s.y.push_back(std::stod(fields[2]));
    if (ci_col >= 0 && ci_col < static_cast<int>(fields.size()) &&
        !fields[ci_col].empty()) {
      s.ci.push_back(std::stod(fields[ci_col]));
    } else if (ci_col >= 0) {
      missing_ci_values = true;
    }
  }
  if (out.series.empty()) throw std::runtime_error("aggregate CSV: no data rows");
  for (auto& s : out.series) {
    if (s.ci.size() != s.x.size()) {
      if (!s.ci.empty() || missing_ci_values) {
        out.warnings.push_back("series " + s.label +
                               ": incomplete CI values; band omitted");
      }
      s.ci.clear();
    }
  }
  return out;
}

std::string render_regret_svg(const std::vector<PlotSeries>& series) {
  if (series.empty()) throw std::invalid_argument("render_regret_svg: no series");
  const double width = 800, height = 520;
  const double ml = 80, mr = 24, mt = 24, mb = 60;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      const double lo = s.ci.empty() ? s.y[i] : s.y[i] - s.ci[i];
      const double hi = s.ci.empty() ? s.y[i] : s.y[i] + s.ci[i];
      ymin = std::min(ymin, lo);
      ymax = std::max(ymax, hi);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
  auto py = [&](double y) {
    return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) +
         "\" height=\"" + fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " +
         fmt(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Axes and ticks.
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(height - mb) + "\" x2=\"" +
         fmt(width - mr) + "\" y2=\"" + fmt(height - mb) + "\"/>\n";
  svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(mt) + "\" x2=\"" + fmt(ml) +
         "\" y2=\"" + fmt(height - mb) + "\"/>\n";
  svg += "</g>\n";
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double tx = xmin + (xmax - xmin) * i / ticks;
    const double ty = ymin + (ymax - ymin) * i / ticks;
    svg += "<line x1=\"" + fmt(px(tx)) + "\" y1=\"" + fmt(height - mb) + "\" x2=\"" +
           fmt(px(tx)) + "\" y2=\"" + fmt(height - mb + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(px(tx)) + "\" y=\"" + fmt(height - mb + 20) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + fmt_tick(tx) + "</text>\n";
    svg += "<line x1=\"" + fmt(ml - 5) + "\" y1=\"" + fmt(py(ty)) + "\" x2=\"" + fmt(ml) +
           "\" y2=\"" + fmt(py(ty)) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + fmt(ml - 8) + "\" y=\"" + fmt(py(ty) + 4) +
           "\" font-size=\"12\" text-anchor=\"end\">" + fmt_tick(ty) + "</text>\n";
  }
  svg += "<text x=\"" + fmt((ml + width - mr) / 2) + "\" y=\"" + fmt(height - 15) +
         "\" font-size=\"14\" text-anchor=\"middle\">cumulative cost</text>\n";
  svg += "<text x=\"20\" y=\"" + fmt((mt + height - mb) / 2) +
         "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
         fmt((mt + height - mb) / 2) + ")\">mean Bayesian regret</text>\n";

  for (size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (!s.ci.empty() && s.x.size() > 1) {
      std::string pts;
      for (size_t i = 0; i < s.x.size(); ++i) {
        pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i] + s.ci[i])) + " ";
      }
      for (size_t i = s.x.size(); i-- > 0;) {
        pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i] - s.ci[i])) + " ";
      }
      svg += "<polygon points=\"" + pts + "\" fill=\"" + color +
             "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    }
    std::string pts;
    for (size_t i = 0; i < s.x.size(); ++i) {
      pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i])) + " ";
    }
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    const double ly = mt + 18.0 * (k + 1);
    svg += "<line x1=\"" + fmt(width - mr - 150) + "\" y1=\"" + fmt(ly) + "\" x2=\"" +
           fmt(width - mr - 120) + "\" y2=\"" + fmt(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt(width - mr - 114) + "\" y=\"" + fmt(ly + 4) +
           "\" font-size=\"12\">" + s.label + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace cmokg
