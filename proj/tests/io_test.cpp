#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "irgof/error.hpp"
#include "irgof/io.hpp"

using namespace irgof;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ("irgof_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path file(const std::string& name, const std::string& content) const {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static std::vector<std::string> lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
  }

  template <typename F>
  static ErrorKind kind_of(F&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::Io;
  }

  fs::path dir_;
};

Analysis small_analysis() {
  const SyntheticModel model = benchmark_model(Design::Uniform, normal_errors(0.5));
  Rng rng = stream_rng(3, 0, 0);
  return analyze(generate(model, 120, rng), {});
}

}  // namespace

TEST(Anscombe, Examples) {
  EXPECT_NEAR(anscombe(0.0), 1.2247449, 5e-8);
  EXPECT_NEAR(anscombe(1.0), 2.3452079, 5e-8);
  for (double y : {0.0, 1.0, 255.0}) EXPECT_NEAR(inverse_anscombe(anscombe(y)), y, 1e-12);
  EXPECT_THROW(anscombe(-1.0), Error);
  EXPECT_EQ(to_string(ErrorKind::InsufficientData), "insufficient_data");
}

TEST_F(IoTest, LoadCsv) {
  const Dataset d = load_csv(file("a.csv", "x1,x2,y\n0.1,0.2,3.5\n0.9,0,-1\n1,0.5,2e-3\n"));
  EXPECT_EQ(d.size(), 3);
  EXPECT_EQ(d.dim(), 2);
  EXPECT_EQ(d.X(1, 0), 0.9);
  EXPECT_EQ(d.Y[2], 2e-3);
  const Dataset crlf = load_csv(file("b.csv", "x1,y\r\n0.25,1\r\n0.75,2\r\n"));
  EXPECT_EQ(crlf.size(), 2);
  EXPECT_EQ(crlf.Y[1], 2.0);
}

TEST_F(IoTest, LoadCsvErrors) {
  EXPECT_EQ(kind_of([&] { load_csv(file("e.csv", "x1,x2,y\n")); }), ErrorKind::InsufficientData);
  EXPECT_EQ(kind_of([&] { load_csv(dir_ / "missing.csv"); }), ErrorKind::Io);
  EXPECT_EQ(kind_of([&] { load_csv(file("h.csv", "a,b,c\n0,0,1\n1,1,2\n")); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { load_csv(file("r.csv", "x1,y\n0.1,1\n0.2\n")); }), ErrorKind::Parse);
  try {
    load_csv(file("range.csv", "x1,x2,y\n0.1,0.2,1\n1.5,0.2,1\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Range);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
  try {
    load_csv(file("nan.csv", "x1,y\n0.1,1\n0.2,abc\n"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    const std::string what = e.what();
    EXPECT_NE(what.find(":3: column 2"), std::string::npos) << what;
    EXPECT_NE(what.find("'abc'"), std::string::npos) << what;
  }
}

TEST_F(IoTest, CsvRoundTripIsBitIdentical) {
  const SyntheticModel model = benchmark_model(Design::NontrivialG, laplace_errors(0.5));
  Rng rng(11);
  Dataset d = generate(model, 300, rng);
  d.Y[0] = 1.0 / 3.0;
  d.Y[1] = -5e-310;
  d.X(2, 0) = 1.0;
  d.X(3, 1) = 0.0;
  write_csv(dir_ / "d.csv", d);
  const Dataset back = load_csv(dir_ / "d.csv");
  EXPECT_EQ(back.X, d.X);
  EXPECT_EQ(back.Y, d.Y);
}

TEST_F(IoTest, PgmFormats) {
  const Eigen::MatrixXd p2 = load_image(file("a.pgm", "P2\n# comment\n3 2\n# another\n255\n0 1 2\n3 4 255\n"));
  ASSERT_EQ(p2.rows(), 2);
  ASSERT_EQ(p2.cols(), 3);
  EXPECT_EQ(p2(0, 1), 1.0);
  EXPECT_EQ(p2(1, 2), 255.0);

  std::string raw = "P5\n2 2\n255\n";
  raw += std::string{'\x00', '\x07', '\x80', '\xff'};
  const Eigen::MatrixXd p5 = load_image(file("b.pgm", raw));
  EXPECT_EQ(p5(0, 1), 7.0);
  EXPECT_EQ(p5(1, 0), 128.0);
  EXPECT_EQ(p5(1, 1), 255.0);

  std::string wide = "P5 2 1 65535\n";
  wide += std::string{'\x01', '\x02', '\xff', '\xfe'};
  const Eigen::MatrixXd p16 = load_image(file("c.pgm", wide));
  EXPECT_EQ(p16(0, 0), 258.0);
  EXPECT_EQ(p16(0, 1), 65534.0);

  Eigen::MatrixXd img(3, 4);
  img << 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11;
  write_pgm(dir_ / "w.pgm", img, 15);
  EXPECT_EQ(load_image(dir_ / "w.pgm"), img);

  const Eigen::MatrixXd csv = load_image(file("m.csv", "1,2,3\n4,5,6\n"));
  EXPECT_EQ(csv.rows(), 2);
  EXPECT_EQ(csv(1, 2), 6.0);
}

TEST_F(IoTest, PgmErrors) {
  EXPECT_EQ(kind_of([&] { load_image(file("a.pgm", "P2\n3 x\n255\n")); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { load_image(file("b.pgm", "P2\n2 1\n70000\n1 2\n")); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { load_image(file("c.pgm", "P2\n2 2\n255\n1 2 3\n")); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { load_image(file("d.pgm", "P2\n1 1\n10\n11\n")); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { load_image(file("e.pgm", "P5\n2 2\n255\nab")); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { load_image(file("f.csv", "1,2\n3\n")); }), ErrorKind::Parse);
}

TEST_F(IoTest, ImageSections) {
  Eigen::MatrixXd image(70, 80);
  for (Eigen::Index i = 0; i < 70; ++i) {
    for (Eigen::Index j = 0; j < 80; ++j) image(i, j) = static_cast<double>((i * 7 + j * 3) % 256);
  }
  const Dataset s32 = image_section(image, 5, 10, 32);
  EXPECT_EQ(s32.size(), 1024);
  EXPECT_EQ(s32.dim(), 2);
  EXPECT_EQ(s32.X(0, 0), 0.015625);
  EXPECT_EQ(s32.X(0, 1), 0.015625);
  EXPECT_EQ(s32.Y[0], anscombe(image(5, 10)));
  // row index i * size + j
  EXPECT_EQ(s32.X(33, 0), 1.5 / 32);
  EXPECT_EQ(s32.X(33, 1), 1.5 / 32);
  EXPECT_EQ(s32.Y[32 * 3 + 7], anscombe(image(5 + 3, 10 + 7)));
  EXPECT_EQ(image_section(image, 0, 0, 64).size(), 4096);
  EXPECT_EQ(kind_of([&] { image_section(image, 40, 0, 32); }), ErrorKind::Range);
  EXPECT_EQ(kind_of([&] { image_section(image, -1, 0, 8); }), ErrorKind::Range);

  write_pgm(dir_ / "img.pgm", image);
  const Dataset loaded = load_image_section(dir_ / "img.pgm", 5, 10, 32);
  EXPECT_EQ(loaded.Y, s32.Y);
  EXPECT_EQ(loaded.X, s32.X);
}

TEST_F(IoTest, ReportJson) {
  const Analysis a = small_analysis();
  ReportContext ctx{"test", "data.csv", "gaussian", 42, 0.05, 4096, 2, {"a caveat"}};
  const auto j = nlohmann::json::parse(report_json(a, ctx));
  for (const char* key : {"schema_version", "statistic", "t0", "q_alpha", "alpha", "reject", "n", "sigma_hat",
                          "chosen_radius", "seed", "cv", "caveats", "clamped_density_points", "ks_distance"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["statistic"].get<double>(), a.report.statistic);
  EXPECT_EQ(j["n"], 120);
  EXPECT_EQ(j["seed"], 42);
  EXPECT_EQ(j["reject"].get<bool>(), a.report.reject);
  EXPECT_EQ(j["cv"]["candidates"].size(), a.cv_radii.size());
  EXPECT_EQ(j["caveats"][0], "a caveat");

  const auto e = nlohmann::json::parse(error_json("parse", "bad \"cell\""));
  EXPECT_EQ(e["error"], "parse");
  EXPECT_EQ(e["message"], "bad \"cell\"");
}

TEST_F(IoTest, TraceAndQqExports) {
  const Analysis a = small_analysis();
  write_trace_csv(dir_ / "trace.csv", a.report.trace);
  const auto trace = lines(dir_ / "trace.csv");
  EXPECT_EQ(trace.front(), "t,xi");
  EXPECT_EQ(trace.size(), a.report.trace.values.size() + 1);

  const NullPtr g = gaussian_null();
  write_qq_csv(dir_ / "qq.csv", a.fit.residuals(), *g);
  const auto qq = lines(dir_ / "qq.csv");
  ASSERT_EQ(qq.size(), 121u);
  EXPECT_EQ(qq.front(), "theoretical,sample");
  double theo = 0.0;
  double sample = 0.0;
  char comma = 0;
  std::istringstream(qq[1]) >> theo >> comma >> sample;
  EXPECT_NEAR(theo, g->quantile(0.5 / 120.0), 1e-12);
  EXPECT_EQ(sample, a.fit.residuals().sorted()[0]);
  EXPECT_EQ(kind_of([&] { write_text(dir_ / "no" / "such" / "file.txt", "x"); }), ErrorKind::Io);
}

TEST_F(IoTest, PowerExports) {
  PowerTable t;
  PowerRow row;
  row.errors = "laplace";
  row.design = "uniform";
  row.n = 300;
  row.reps = 2;
  row.rejections = 1;
  row.rate = 0.5;
  row.band_low = 0.1;
  row.band_high = 0.9;
  row.seed = 7;
  t.rows.push_back(row);
  const std::string csv = power_csv(t);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "errors,design,n,reps,rejections,failures,rate,band_low,band_high,seed");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_NE(csv.find("laplace,uniform,300,2,1,0,0.5,0.1,0.9,7"), std::string::npos) << csv;
  write_power_csv(dir_ / "p.csv", t);
  EXPECT_EQ(slurp(dir_ / "p.csv"), csv);
  const auto j = nlohmann::json::parse(power_json(t, 0.05));
  EXPECT_EQ(j["alpha"], 0.05);
  ASSERT_EQ(j["rows"].size(), 1u);
  EXPECT_EQ(j["rows"][0]["n"], 300);
}
