#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "lassorec/errors.hpp"
#include "lassorec/io.hpp"
#include "support/tempdir.hpp"

namespace lassorec {
namespace {

TEST(FormatReal, ZeroAndShortValues) {
  EXPECT_EQ(format_real(0.0), "0");
  EXPECT_EQ(format_real(-0.0), "0");
  EXPECT_EQ(format_real(2.0), "2");
  EXPECT_EQ(format_real(-0.5), "-0.5");
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
}

TEST(FormatReal, RoundTripsExactly) {
  for (double v : {1.0 / 3.0, -2.718281828459045, 1e-300, 6.02214076e23,
                   std::nextafter(1.0, 2.0)}) {
    EXPECT_EQ(std::stod(format_real(v)), v) << format_real(v);
  }
}

TEST(FormatReal, RefusesNonFinite) {
  EXPECT_THROW(format_real(std::numeric_limits<double>::quiet_NaN()), Error);
  EXPECT_THROW(format_real(std::numeric_limits<double>::infinity()), Error);
}

TEST(CoefficientsCsv, DocumentedLayout) {
  Vector v(3);
  v << 2, 0, -0.5;
  EXPECT_EQ(to_csv(coefficients_table(v)), "index,value\n1,2\n2,0\n3,-0.5\n");
}

TEST(CoefficientsCsv, ReadBack) {
  TempDir dir;
  Vector v(4);
  v << 1.0 / 3.0, 0, -1e-17, 12345.678;
  write_report(coefficients_table(v), dir / "c.csv");
  Vector back = read_vector_csv(dir / "c.csv");
  ASSERT_EQ(back.size(), 4);
  for (int k = 0; k < 4; ++k) EXPECT_EQ(back(k), v(k));
}

TEST(WriteReport, RewriteIsByteIdentical) {
  TempDir dir;
  Json j;
  j["lambda"] = 0.1;
  j["support"] = to_json_indices({0, 4});
  j["name"] = "fit";
  Vector v(2);
  v << 1.0 / 7.0, -3;
  j["coefficients"] = to_json(v);
  write_report(j, dir / "a.json");
  std::string first = slurp(dir / "a.json");
  write_report(j, dir / "a.json");
  EXPECT_EQ(slurp(dir / "a.json"), first);
  write_report(coefficients_table(v), dir / "a.csv");
  first = slurp(dir / "a.csv");
  write_report(coefficients_table(v), dir / "a.csv");
  EXPECT_EQ(slurp(dir / "a.csv"), first);
}

TEST(WriteReport, KeyOrderIsInsertionOrder) {
  Json j;
  j["zeta"] = 1;
  j["alpha"] = 2;
  EXPECT_EQ(to_json_text(j), "{\n  \"zeta\": 1,\n  \"alpha\": 2\n}\n");
}

TEST(WriteReport, NanIsRefused) {
  TempDir dir;
  Json j;
  j["nested"]["value"] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(write_report(j, dir / "bad.json"), Error);
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "bad.json"));
}

TEST(WriteReport, MissingDirectoryIsIoError) {
  TempDir dir;
  try {
    write_report(Json{{"a", 1}}, dir.path() / "nope" / "x.json");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("nope"), std::string::npos);
  }
}

TEST(ReadDesign, HeaderIsOptional) {
  TempDir dir;
  spit(dir.path() / "a.csv", "x1,x2\n1,2\n3,4\n");
  spit(dir.path() / "b.csv", "1,2\n3,4\n");
  DesignMatrix a = read_design_csv(dir / "a.csv");
  DesignMatrix b = read_design_csv(dir / "b.csv");
  EXPECT_EQ(a.entries(), b.entries());
  ASSERT_EQ(a.labels().size(), 2u);
  EXPECT_EQ(a.labels()[1], "x2");
  EXPECT_EQ(a.entries()(1, 0), 3.0);
}

TEST(ReadDesign, RaggedAndNonFiniteRejected) {
  TempDir dir;
  spit(dir.path() / "r.csv", "1,2\n3\n");
  spit(dir.path() / "n.csv", "1,2\n3,nan\n");
  EXPECT_THROW(read_design_csv(dir / "r.csv"), InputError);
  EXPECT_THROW(read_design_csv(dir / "n.csv"), InputError);
  EXPECT_THROW(read_design_csv(dir / "missing.csv"), IoError);
}

TEST(KeyValueFile, CommentsAndOrder) {
  TempDir dir;
  spit(dir.path() / "c.cfg", "# header\nseed = 7\n\n  sigmas = 0, 0.1  # trailing\nn=200\n");
  auto kv = read_key_value_file(dir / "c.cfg");
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"seed", "7"}));
  EXPECT_EQ(kv[1].second, "0, 0.1");
  EXPECT_EQ(kv[2].first, "n");
}

TEST(KeyValueFile, MalformedLineNamesLine) {
  TempDir dir;
  spit(dir.path() / "c.cfg", "seed = 7\nthreads 4\n");
  try {
    read_key_value_file(dir / "c.cfg");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

}  // namespace
}  // namespace lassorec
