#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bnslab/linalg.hpp"
#include "bnslab/samplers.hpp"
#include "bnslab/toydata.hpp"

namespace bnslab {

/// Shortest round-trip decimal form of a double ("nan", "inf", "-inf" for
/// non-finite values).
std::string format_number(double v);

using CsvCell = std::variant<double, std::int64_t, std::string>;

/// In-memory table written as `# key=value` comment lines, a header row and
/// comma-separated data rows.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> comments;
  std::vector<std::string> columns;
  std::vector<std::vector<CsvCell>> rows;

  void add_row(std::vector<CsvCell> row);
  std::string render() const;
};

/// Creates missing parent directories, then overwrites the file.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Points as columns x0..x{d-1}; provenance as comment lines.
CsvTable points_table(const Mat& points,
                      std::vector<std::pair<std::string, std::string>> comments = {});
CsvTable sample_batch_table(const SampleBatch& batch);
CsvTable labeled_points_table(const LabeledPoints& data,
                              std::vector<std::pair<std::string, std::string>> comments = {});

/// Reads the numeric body of a CSV written by write_csv (comment lines and
/// the header are skipped; non-numeric columns are rejected).
Mat read_matrix_csv(const std::filesystem::path& path);

struct ScatterSeries {
  Mat points;  // n x 2
  std::string color = "#1f77b4";
  double radius = 1.2;
  std::string label;
};

struct LineSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
  bool dashed = false;
};

struct SvgPanel {
  std::string title;
  double x_min = -1.0;
  double x_max = 1.0;
  double y_min = -1.0;
  double y_max = 1.0;
  std::string x_label;
  std::string y_label;
  std::vector<ScatterSeries> scatters;
  std::vector<LineSeries> lines;
  std::vector<double> h_rules;  // horizontal reference lines
  std::vector<double> v_rules;  // vertical reference lines
};

/// Grid of panels with a fixed viewport; points outside a panel are clipped.
std::string render_svg(const std::vector<SvgPanel>& panels, int columns, int panel_width = 320,
                       int panel_height = 320);
void write_svg(const std::filesystem::path& path, const std::vector<SvgPanel>& panels, int columns,
               int panel_width = 320, int panel_height = 320);

}  // namespace bnslab
