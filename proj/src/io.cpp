#include "irgof/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "irgof/error.hpp"

namespace irgof {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Resource: return "resource";
    case ErrorKind::InsufficientData: return "insufficient_data";
    case ErrorKind::DegenerateFit: return "degenerate_fit";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::EvaluationRange: return "evaluation_range";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Singularity: return "singularity";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Range: return "range";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

double anscombe(double y) {
  if (!(y >= 0.0)) fail(ErrorKind::Domain, "the Anscombe transform needs a nonnegative count");
  return 2.0 * std::sqrt(y + 0.375);
}

double inverse_anscombe(double z) { return 0.25 * z * z - 0.375; }

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view cell, const std::filesystem::path& path, std::size_t line,
                    std::size_t column) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    std::ostringstream msg;
    msg << path.string() << ":" << line << ": column " << column << ": '" << cell
        << "' is not a number";
    fail(ErrorKind::Parse, msg.str());
  }
  return value;
}

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header_line = line;
      header = split(header_line);
      break;
    }
  }
  if (header.size() < 2) {
    fail(ErrorKind::Parse, path.string() + ": expected a header x1,...,xm,y");
  }
  const std::size_t m = header.size() - 1;
  for (std::size_t l = 0; l < m; ++l) {
    if (header[l] != "x" + std::to_string(l + 1)) {
      fail(ErrorKind::Parse, path.string() + ": header column " + std::to_string(l + 1) +
                                 " should be x" + std::to_string(l + 1) + ", found '" +
                                 std::string(header[l]) + "'");
    }
  }
  if (header[m] != "y") {
    fail(ErrorKind::Parse, path.string() + ": last header column should be y");
  }

  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != m + 1) {
      std::ostringstream msg;
      msg << path.string() << ":" << line_no << ": expected " << (m + 1) << " columns, found "
          << cells.size();
      fail(ErrorKind::Parse, msg.str());
    }
    for (std::size_t c = 0; c < cells.size(); ++c) values.push_back(parse_number(cells[c], path, line_no, c + 1));
    ++rows;
  }
  if (rows < 2) {
    fail(ErrorKind::InsufficientData, path.string() + ": needs at least 2 data rows, found " + std::to_string(rows));
  }
  const auto n = static_cast<Eigen::Index>(rows);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> table(
      values.data(), n, static_cast<Eigen::Index>(m + 1));
  try {
    return make_dataset(table.leftCols(static_cast<Eigen::Index>(m)), table.col(static_cast<Eigen::Index>(m)));
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ostringstream out;
  for (int l = 0; l < data.dim(); ++l) out << 'x' << (l + 1) << ',';
  out << "y\n";
  char buffer[32];
  auto put = [&](double v) {
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, v);
    out.write(buffer, ptr - buffer);
  };
  for (Eigen::Index j = 0; j < data.size(); ++j) {
    for (int l = 0; l < data.dim(); ++l) {
      put(data.X(j, l));
      out << ',';
    }
    put(data.Y[j]);
    out << '\n';
  }
  write_text(path, out.str());
}

// --- images -------------------------------------------------------------------

namespace {

// Next whitespace-delimited PGM header token, skipping # comments.
std::string pgm_token(std::istream& in) {
  std::string token;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) return token;
      continue;
    }
    token.push_back(c);
  }
  return token;
}

long pgm_integer(std::istream& in, const std::filesystem::path& path, const char* what) {
  const std::string token = pgm_token(in);
  long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size() || value < 0) {
    fail(ErrorKind::Parse, path.string() + ": malformed PGM " + what + " '" + token + "'");
  }
  return value;
}

Eigen::MatrixXd load_pgm(const std::filesystem::path& path) {
  std::ifstream in = open_input(path, std::ios::in | std::ios::binary);
  const std::string magic = pgm_token(in);
  const bool binary = magic == "P5";
  if (!binary && magic != "P2") fail(ErrorKind::Parse, path.string() + ": not a P2/P5 PGM file");
  const long width = pgm_integer(in, path, "width");
  const long height = pgm_integer(in, path, "height");
  const long maxval = pgm_integer(in, path, "maxval");
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535) {
    fail(ErrorKind::Parse, path.string() + ": PGM header out of range");
  }
  Eigen::MatrixXd image(height, width);
  if (binary) {
    // pgm_token consumed exactly one whitespace byte after maxval.
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(static_cast<std::size_t>(width * height * bytes));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      fail(ErrorKind::Parse, path.string() + ": truncated PGM raster");
    }
    for (long i = 0; i < height; ++i) {
      for (long j = 0; j < width; ++j) {
        const std::size_t p = static_cast<std::size_t>((i * width + j) * bytes);
        image(i, j) = bytes == 1 ? raw[p] : (raw[p] << 8 | raw[p + 1]);
      }
    }
  } else {
    for (long i = 0; i < height; ++i) {
      for (long j = 0; j < width; ++j) image(i, j) = static_cast<double>(pgm_integer(in, path, "pixel"));
    }
  }
  if ((image.array() > static_cast<double>(maxval)).any()) {
    fail(ErrorKind::Parse, path.string() + ": pixel value above maxval");
  }
  return image;
}

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cols == 0) cols = cells.size();
    if (cells.size() != cols) fail(ErrorKind::Parse, path.string() + ":" + std::to_string(line_no) + ": ragged matrix row");
    for (std::size_t c = 0; c < cells.size(); ++c) values.push_back(parse_number(cells[c], path, line_no, c + 1));
    ++rows;
  }
  if (rows == 0) fail(ErrorKind::Parse, path.string() + ": empty image matrix");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

}  // namespace

Eigen::MatrixXd load_image(const std::filesystem::path& path) {
  std::ifstream probe = open_input(path, std::ios::in | std::ios::binary);
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) return load_pgm(path);
  return load_matrix_csv(path);
}

void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& image, int maxval) {
  std::ostringstream out;
  out << "P2\n" << image.cols() << ' ' << image.rows() << '\n' << maxval << '\n';
  for (Eigen::Index i = 0; i < image.rows(); ++i) {
    for (Eigen::Index j = 0; j < image.cols(); ++j) {
      const long v = std::lround(std::clamp(image(i, j), 0.0, static_cast<double>(maxval)));
      out << v << (j + 1 == image.cols() ? '\n' : ' ');
    }
  }
  write_text(path, out.str());
}

Dataset image_section(const Eigen::MatrixXd& image, Eigen::Index row0, Eigen::Index col0,
                      Eigen::Index size) {
  if (size < 1 || row0 < 0 || col0 < 0 || row0 + size > image.rows() || col0 + size > image.cols()) {
    std::ostringstream msg;
    msg << "section of size " << size << " at (" << row0 << ", " << col0
        << ") does not fit an image of " << image.rows() << " x " << image.cols() << " pixels";
    fail(ErrorKind::Range, msg.str());
  }
  const Eigen::Index n = size * size;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd Y(n);
  const auto s = static_cast<double>(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j < size; ++j) {
      const Eigen::Index r = i * size + j;
      X(r, 0) = (static_cast<double>(i + 1) - 0.5) / s;
      X(r, 1) = (static_cast<double>(j + 1) - 0.5) / s;
      Y[r] = anscombe(image(row0 + i, col0 + j));
    }
  }
  return make_dataset(std::move(X), std::move(Y));
}

Dataset load_image_section(const std::filesystem::path& path, Eigen::Index row0, Eigen::Index col0,
                           Eigen::Index size) {
  return image_section(load_image(path), row0, col0, size);
}

// --- reports ------------------------------------------------------------------

std::string report_json(const Analysis& analysis, const ReportContext& context) {
  const TestReport& r = analysis.report;
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["command"] = context.command;
  j["input"] = context.input;
  j["null"] = context.null_name;
  j["statistic"] = r.statistic;
  j["t0"] = r.t0;
  j["ecdf_t0"] = r.ecdf_t0;
  j["alpha"] = r.alpha;
  j["q_alpha"] = r.q_alpha;
  j["reject"] = r.reject;
  j["n"] = r.n;
  j["dim"] = context.dim;
  j["sigma_hat"] = r.sigma_hat;
  j["chosen_radius"] = analysis.radius;
  j["seed"] = context.seed;
  j["density_floor"] = context.floor;
  j["clamped_density_points"] = analysis.fit.clamped_count();
  j["scan_grid"] = context.scan_grid;
  j["ks_distance"] = r.ks_distance;
  nlohmann::ordered_json cv = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < analysis.cv_radii.size(); ++i) {
    cv.push_back({{"radius", analysis.cv_radii[i]}, {"score", analysis.cv_scores[i]}});
  }
  j["cv"] = {{"candidates", cv}, {"chosen", analysis.radius}};
  j["caveats"] = context.caveats;
  return j.dump(2) + "\n";
}

std::string error_json(const std::string& kind, const std::string& message) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["error"] = kind;
  j["message"] = message;
  return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::out | std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) fail(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

void write_trace_csv(const std::filesystem::path& path, const ProcessTrace& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "t,xi\n";
  for (std::size_t i = 0; i < trace.values.size(); ++i) {
    out << trace.eval_points[i] << ',' << trace.values[i] << '\n';
  }
  write_text(path, out.str());
}

void write_qq_csv(const std::filesystem::path& path, const StandardizedResiduals& residuals,
                  const NullModel& null) {
  std::ostringstream out;
  out.precision(17);
  out << "theoretical,sample\n";
  const std::vector<double>& z = residuals.sorted();
  const auto n = static_cast<double>(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    out << null.quantile((static_cast<double>(j) + 0.5) / n) << ',' << z[j] << '\n';
  }
  write_text(path, out.str());
}

std::string power_csv(const PowerTable& table) {
  std::ostringstream out;
  out.precision(10);
  out << "errors,design,n,reps,rejections,failures,rate,band_low,band_high,seed\n";
  for (const PowerRow& r : table.rows) {
    out << r.errors << ',' << r.design << ',' << r.n << ',' << r.reps << ',' << r.rejections << ','
        << r.failures << ',' << r.rate << ',' << r.band_low << ',' << r.band_high << ',' << r.seed << '\n';
  }
  return out.str();
}

void write_power_csv(const std::filesystem::path& path, const PowerTable& table) {
  write_text(path, power_csv(table));
}

std::string power_json(const PowerTable& table, double alpha) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["alpha"] = alpha;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const PowerRow& r : table.rows) {
    rows.push_back({{"errors", r.errors},
                    {"design", r.design},
                    {"n", r.n},
                    {"reps", r.reps},
                    {"rejections", r.rejections},
                    {"failures", r.failures},
                    {"rate", r.rate},
                    {"band_low", r.band_low},
                    {"band_high", r.band_high},
                    {"seed", r.seed}});
  }
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

}  // namespace irgof
