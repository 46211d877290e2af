#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "fairflow/csv.hpp"
#include "fairflow/sim.hpp"

using namespace fairflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fairflow_csv_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(ParseCsv, QuotesAndLineNumbers) {
  const CsvTable t = parse_csv("a,b\r\n\"x,1\",\"he said \"\"hi\"\"\"\n\n3,4\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "x,1");
  EXPECT_EQ(t.rows[0][1], "he said \"hi\"");
  EXPECT_EQ(t.line_numbers[1], 4u);
}

TEST(ParseCsv, Errors) {
  EXPECT_THROW(parse_csv(""), DataError);
  EXPECT_THROW(parse_csv("a,b\n1\n"), DataError);
  EXPECT_THROW(parse_csv("a,b\n\"1,2\n"), DataError);
  EXPECT_THROW(parse_csv("a,b\n1\"x\",2\n"), DataError);
}

TEST(ParseCsv, EscapeRoundTrip) {
  CsvTable t;
  t.header = {"plain", "with,comma", "with\"quote"};
  t.rows = {{"1", "a\nb", ""}};
  const CsvTable back = parse_csv(to_csv(t));
  EXPECT_EQ(back.header, t.header);
  EXPECT_EQ(back.rows, t.rows);
}

TEST(LoadCsv, DropsRowsWithMissingCells) {
  const Dataset d = load_csv(fs::path(FAIRFLOW_FIXTURES) / "missing_cells.csv", "label", {"sex"}, false);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"age", "income"}));
  EXPECT_EQ(d.labels, (std::vector<int>{1, 0}));
  EXPECT_EQ(d.protected_attributes.at("sex"), (std::vector<int>{0, 1}));
  EXPECT_EQ(d.features(1, 1), 31000.0);
}

TEST(LoadCsv, MissingMarkers) {
  const std::string text = "x,y,g\n1,1,0\n?,0,1\nNA,0,1\nnan,1,0\n2,0,1\n";
  const Dataset d = dataset_from_table(parse_csv(text), {"y", {"g"}, {}}, false);
  EXPECT_EQ(d.size(), 2u);
}

TEST(LoadCsv, StandardizesNonBinaryColumns) {
  const std::string text = "x,flag,c,y\n1,0,5,0\n2,1,5,1\n3,1,5,0\n6,0,5,1\n";
  const Dataset d = dataset_from_table(parse_csv(text), {"y", {}, {}}, true);
  ASSERT_TRUE(d.standardization.has_value());
  double mean = 0, sq = 0;
  for (std::size_t i = 0; i < 4; ++i) mean += d.features(i, 0);
  mean /= 4;
  for (std::size_t i = 0; i < 4; ++i) sq += (d.features(i, 0) - mean) * (d.features(i, 0) - mean);
  EXPECT_NEAR(mean, 0.0, 1e-15);
  EXPECT_NEAR(std::sqrt(sq / 4), 1.0, 1e-12);
  EXPECT_EQ(d.features(1, 1), 1.0);           // binary column untouched
  EXPECT_EQ(d.features(0, 2), 0.0);           // constant column centred, sd 1
  EXPECT_EQ(d.standardization->sd[2], 1.0);
  EXPECT_DOUBLE_EQ(d.standardization->mean[0], 3.0);
}

TEST(LoadCsv, ApplyStandardizationChecksColumns) {
  Dataset d = dataset_from_table(parse_csv("x,y\n1,0\n3,1\n"), {"y", {}, {}}, false);
  Standardization st{{"other"}, {0.0}, {1.0}};
  EXPECT_THROW(apply_standardization(d, st), DataError);
  st.columns = {"x"};
  st.mean = {1.0};
  st.sd = {2.0};
  apply_standardization(d, st);
  EXPECT_EQ(d.features(1, 0), 1.0);
}

TEST(LoadCsv, SchemaErrors) {
  EXPECT_THROW(dataset_from_table(parse_csv("x,y\n1,0\n"), {"label", {}, {}}, false), DataError);
  EXPECT_THROW(dataset_from_table(parse_csv("x,x,y\n1,2,0\n"), {"y", {}, {}}, false), DataError);
  EXPECT_THROW(dataset_from_table(parse_csv("x,y\n1,2\n"), {"y", {}, {}}, false), DataError);
  EXPECT_THROW(dataset_from_table(parse_csv("x,y\nabc,1\n"), {"y", {}, {}}, false), DataError);
  try {
    dataset_from_table(parse_csv("x,y\n1,0\n1.5e,1\n"), {"y", {}, {}}, false);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(LoadCsv, IgnoredColumnsAreNotFeatures) {
  const Dataset d = dataset_from_table(parse_csv("id,x,y\n7,1,0\n8,2,1\n"), {"y", {}, {"id"}}, false);
  EXPECT_EQ(d.feature_names, std::vector<std::string>{"x"});
}

TEST(SaveCsv, ByteIdenticalRoundTrip) {
  SimConfig sc;
  sc.n_samples = 50;
  sc.seed = 13;
  const Dataset d = generate(sc);
  const fs::path dir = scratch_dir("roundtrip");
  save_csv(d, "y", dir / "a.csv");
  const Dataset back = load_csv(dir / "a.csv", "y", {"group"}, false);
  EXPECT_EQ(back, d);
  save_csv(back, "y", dir / "b.csv");
  EXPECT_EQ(read_file(dir / "a.csv"), read_file(dir / "b.csv"));
  EXPECT_FALSE(fs::exists(dir / "a.csv.tmp"));
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-0.0), "-0");
  EXPECT_EQ(format_double(1e-300), "1e-300");
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(ReadFile, MissingIsIoError) { EXPECT_THROW(read_file("/nonexistent/fairflow/x.csv"), IoError); }
