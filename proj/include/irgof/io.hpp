#pragma once

// Data ingestion (CSV tables, grayscale images) and report/trace exports.

#include <filesystem>
#include <string>

#include <Eigen/Core>

#include "irgof/estimation.hpp"
#include "irgof/khmaladze.hpp"
#include "irgof/simulation.hpp"

namespace irgof {

inline constexpr int kReportSchemaVersion = 1;

/// Variance-stabilizing map 2 sqrt(y + 3/8) for Poisson counts; y >= 0.
double anscombe(double y);
/// (z / 2)^2 - 3/8.
double inverse_anscombe(double z);

/// Reads a header `x1,...,xm,y` followed by numeric rows.
Dataset load_csv(const std::filesystem::path& path);
/// Writes the same layout with round-trip precision.
void write_csv(const std::filesystem::path& path, const Dataset& data);

/// Plain PGM (P2 or P5, maxval <= 65535) or a comma-separated numeric matrix.
Eigen::MatrixXd load_image(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& image, int maxval = 255);

/// size x size section starting at (row0, col0), 0-based. Pixel (i, j),
/// 1-based within the section, maps to ((i - 0.5)/size, (j - 0.5)/size) with
/// response anscombe(intensity).
Dataset image_section(const Eigen::MatrixXd& image, Eigen::Index row0, Eigen::Index col0,
                      Eigen::Index size);
Dataset load_image_section(const std::filesystem::path& path, Eigen::Index row0,
                           Eigen::Index col0, Eigen::Index size);

/// Provenance carried into the JSON report next to the test results.
struct ReportContext {
  std::string command;
  std::string input;
  std::string null_name;
  std::uint64_t seed = 0;
  double floor = kDefaultDensityFloor;
  Eigen::Index scan_grid = 0;
  int dim = 0;
  std::vector<std::string> caveats;
};

std::string report_json(const Analysis& analysis, const ReportContext& context);
std::string error_json(const std::string& kind, const std::string& message);

void write_text(const std::filesystem::path& path, const std::string& text);
/// Two columns t, xi.
void write_trace_csv(const std::filesystem::path& path, const ProcessTrace& trace);
/// Sorted standardized residuals against null quantiles at (j - 0.5)/n.
void write_qq_csv(const std::filesystem::path& path, const StandardizedResiduals& residuals,
                  const NullModel& null);
std::string power_csv(const PowerTable& table);
void write_power_csv(const std::filesystem::path& path, const PowerTable& table);
std::string power_json(const PowerTable& table, double alpha);

}  // namespace irgof
