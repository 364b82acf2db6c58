#include "bnslab/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bnslab/errors.hpp"

namespace bnslab {

namespace {

std::string fixed(double v, int digits) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed,
                                 digits);
  return {buf.data(), res.ptr};
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string render_cell(const CsvCell& cell) {
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  const auto& s = std::get<std::string>(cell);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + "\"";
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

void CsvTable::add_row(std::vector<CsvCell> row) {
  if (row.size() != columns.size()) {
    throw InternalError("CSV row has " + std::to_string(row.size()) + " cells, expected " +
                        std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string CsvTable::render() const {
  std::string out;
  for (const auto& [key, value] : comments) out += "# " + key + "=" + value + "\n";
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c > 0) out += ',';
    out += columns[c];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out += ',';
      out += render_cell(row[c]);
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ParameterError("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw ParameterError("failed writing " + path.string());
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  write_text(path, table.render());
}

CsvTable points_table(const Mat& points,
                      std::vector<std::pair<std::string, std::string>> comments) {
  CsvTable t;
  t.comments = std::move(comments);
  for (Eigen::Index c = 0; c < points.cols(); ++c) t.columns.push_back("x" + std::to_string(c));
  t.rows.reserve(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    std::vector<CsvCell> row;
    for (Eigen::Index c = 0; c < points.cols(); ++c) row.emplace_back(points(r, c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable sample_batch_table(const SampleBatch& batch) {
  const SamplerConfig& c = batch.config;
  return points_table(batch.points,
                      {{"mode", to_string(c.mode)},
                       {"dynamics", to_string(c.dynamics)},
                       {"gamma", format_number(c.gamma)},
                       {"delta_skip", std::to_string(c.delta_skip)},
                       {"tau", format_number(c.tau)},
                       {"n_samples", std::to_string(c.n_samples)},
                       {"seed", std::to_string(c.seed)},
                       {"start_index", std::to_string(batch.start_index)},
                       {"schedule_fingerprint", std::to_string(batch.schedule_fingerprint)},
                       {"score_field", batch.field_tag}});
}

CsvTable labeled_points_table(const LabeledPoints& data,
                              std::vector<std::pair<std::string, std::string>> comments) {
  CsvTable t = points_table(data.points, std::move(comments));
  t.columns.emplace_back("label");
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    t.rows[r].emplace_back(std::string(data.labels[r] == RingLabel::minor ? "minor" : "major"));
  }
  return t;
}

Mat read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParameterError("cannot open " + path.string());
  std::string line;
  bool header_seen = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw ParameterError("non-numeric cell '" + cell + "' in " + path.string());
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParameterError("ragged rows in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  Mat m(static_cast<Eigen::Index>(rows.size()),
        rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

std::string render_svg(const std::vector<SvgPanel>& panels, int columns, int panel_width,
                       int panel_height) {
  if (columns < 1 || panel_width < 80 || panel_height < 80) {
    throw ParameterError("invalid SVG layout");
  }
  const int n = static_cast<int>(panels.size());
  const int rows = std::max(1, (n + columns - 1) / columns);
  const int total_w = columns * panel_width;
  const int total_h = rows * panel_height;
  constexpr double margin_l = 44.0;
  constexpr double margin_r = 10.0;
  constexpr double margin_t = 24.0;
  constexpr double margin_b = 34.0;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total_w << "\" height=\""
     << total_h << "\" viewBox=\"0 0 " << total_w << ' ' << total_h
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int p = 0; p < n; ++p) {
    const SvgPanel& panel = panels[static_cast<std::size_t>(p)];
    const double ox = (p % columns) * panel_width;
    const double oy = (p / columns) * panel_height;
    const double pw = panel_width - margin_l - margin_r;
    const double ph = panel_height - margin_t - margin_b;
    const double x0 = ox + margin_l;
    const double y0 = oy + margin_t;
    auto sx = [&](double x) { return x0 + (x - panel.x_min) / (panel.x_max - panel.x_min) * pw; };
    auto sy = [&](double y) {
      return y0 + ph - (y - panel.y_min) / (panel.y_max - panel.y_min) * ph;
    };
    auto inside = [&](double x, double y) {
      return x >= panel.x_min && x <= panel.x_max && y >= panel.y_min && y <= panel.y_max;
    };
    const std::string clip = "clip" + std::to_string(p);
    os << "<clipPath id=\"" << clip << "\"><rect x=\"" << fixed(x0, 2) << "\" y=\""
       << fixed(y0, 2) << "\" width=\"" << fixed(pw, 2) << "\" height=\"" << fixed(ph, 2)
       << "\"/></clipPath>\n";
    os << "<rect x=\"" << fixed(x0, 2) << "\" y=\"" << fixed(y0, 2) << "\" width=\""
       << fixed(pw, 2) << "\" height=\"" << fixed(ph, 2)
       << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"0.8\"/>\n";
    os << "<text x=\"" << fixed(x0 + pw / 2, 2) << "\" y=\"" << fixed(oy + 15, 2)
       << "\" text-anchor=\"middle\" font-size=\"12\">" << escape_xml(panel.title) << "</text>\n";
    os << "<text x=\"" << fixed(x0 + pw / 2, 2) << "\" y=\"" << fixed(y0 + ph + 28, 2)
       << "\" text-anchor=\"middle\">" << escape_xml(panel.x_label) << "</text>\n";
    os << "<text x=\"" << fixed(ox + 12, 2) << "\" y=\"" << fixed(y0 + ph / 2, 2)
       << "\" text-anchor=\"middle\" transform=\"rotate(-90 " << fixed(ox + 12, 2) << ' '
       << fixed(y0 + ph / 2, 2) << ")\">" << escape_xml(panel.y_label) << "</text>\n";
    os << "<text x=\"" << fixed(x0, 2) << "\" y=\"" << fixed(y0 + ph + 13, 2)
       << "\" text-anchor=\"start\" fill=\"#666\">" << format_number(panel.x_min) << "</text>\n";
    os << "<text x=\"" << fixed(x0 + pw, 2) << "\" y=\"" << fixed(y0 + ph + 13, 2)
       << "\" text-anchor=\"end\" fill=\"#666\">" << format_number(panel.x_max) << "</text>\n";
    os << "<text x=\"" << fixed(x0 - 3, 2) << "\" y=\"" << fixed(y0 + ph, 2)
       << "\" text-anchor=\"end\" fill=\"#666\">" << format_number(panel.y_min) << "</text>\n";
    os << "<text x=\"" << fixed(x0 - 3, 2) << "\" y=\"" << fixed(y0 + 9, 2)
       << "\" text-anchor=\"end\" fill=\"#666\">" << format_number(panel.y_max) << "</text>\n";

    os << "<g clip-path=\"url(#" << clip << ")\">\n";
    for (double h : panel.h_rules) {
      os << "<line x1=\"" << fixed(x0, 2) << "\" x2=\"" << fixed(x0 + pw, 2) << "\" y1=\""
         << fixed(sy(h), 2) << "\" y2=\"" << fixed(sy(h), 2)
         << "\" stroke=\"#999\" stroke-dasharray=\"3,3\"/>\n";
    }
    for (double v : panel.v_rules) {
      os << "<line x1=\"" << fixed(sx(v), 2) << "\" x2=\"" << fixed(sx(v), 2) << "\" y1=\""
         << fixed(y0, 2) << "\" y2=\"" << fixed(y0 + ph, 2)
         << "\" stroke=\"#999\" stroke-dasharray=\"3,3\"/>\n";
    }
    for (const ScatterSeries& s : panel.scatters) {
      os << "<g fill=\"" << s.color << "\" fill-opacity=\"0.6\">\n";
      for (Eigen::Index r = 0; r < s.points.rows(); ++r) {
        const double x = s.points(r, 0);
        const double y = s.points(r, 1);
        if (!inside(x, y)) continue;
        os << "<circle cx=\"" << fixed(sx(x), 2) << "\" cy=\"" << fixed(sy(y), 2) << "\" r=\""
           << fixed(s.radius, 2) << "\"/>\n";
      }
      os << "</g>\n";
    }
    for (const LineSeries& l : panel.lines) {
      os << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1.4\"";
      if (l.dashed) os << " stroke-dasharray=\"5,3\"";
      os << " points=\"";
      for (std::size_t k = 0; k < std::min(l.x.size(), l.y.size()); ++k) {
        if (!std::isfinite(l.x[k]) || !std::isfinite(l.y[k])) continue;
        os << fixed(sx(l.x[k]), 2) << ',' << fixed(sy(l.y[k]), 2) << ' ';
      }
      os << "\"/>\n";
    }
    os << "</g>\n";
    double ly = y0 + 12;
    auto legend = [&](const std::string& label, const std::string& color) {
      if (label.empty()) return;
      os << "<rect x=\"" << fixed(x0 + 6, 2) << "\" y=\"" << fixed(ly - 8, 2)
         << "\" width=\"10\" height=\"3\" fill=\"" << color << "\"/>";
      os << "<text x=\"" << fixed(x0 + 20, 2) << "\" y=\"" << fixed(ly - 3, 2) << "\">"
         << escape_xml(label) << "</text>\n";
      ly += 13;
    };
    for (const ScatterSeries& s : panel.scatters) legend(s.label, s.color);
    for (const LineSeries& l : panel.lines) legend(l.label, l.color);
  }
  os << "</svg>\n";
  return os.str();
}

void write_svg(const std::filesystem::path& path, const std::vector<SvgPanel>& panels, int columns,
               int panel_width, int panel_height) {
  write_text(path, render_svg(panels, columns, panel_width, panel_height));
}

}  // namespace bnslab
