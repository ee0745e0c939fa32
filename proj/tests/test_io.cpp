#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <random>

#include "wecs/error.hpp"
#include "wecs/io/keyvalue.hpp"
#include "wecs/io/labeled_matrix.hpp"
#include "wecs/io/number.hpp"
#include "wecs/io/svg_plot.hpp"

using namespace wecs;
using namespace wecs::io;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(KeyValue, ParsesCommentsAndDottedKeys) {
  const auto kv = KeyValueFile::parse("# header\n\nrotor_inertia = 5.5e4\n  piflc.ke =3 # gain\nname = fig9\n");
  EXPECT_EQ(*kv.get_double("rotor_inertia"), 5.5e4);
  EXPECT_EQ(*kv.get_double("piflc.ke"), 3.0);
  EXPECT_EQ(*kv.get("name"), "fig9");
  EXPECT_FALSE(kv.get("missing").has_value());
  EXPECT_EQ(kv.keys().size(), 3u);
  EXPECT_THROW(kv.get_double("name"), ParseError);
}

TEST(KeyValue, ErrorsNameTheLine) {
  EXPECT_NE(message_of([] { KeyValueFile::parse("a = 1\nb = 2\na = 3\n", "f.txt"); }).find("f.txt:3"),
            std::string::npos);
  EXPECT_NE(message_of([] { KeyValueFile::parse("a = 1\nno equals here\n", "g.txt"); }).find("g.txt:2"),
            std::string::npos);
  EXPECT_THROW(KeyValueFile::parse(" = 4\n"), ParseError);
  const auto kv = KeyValueFile::parse("x = 1e999\ny = 2.5\nz = 3 4\n");
  EXPECT_THROW(kv.get_double("x"), ParseError);
  EXPECT_THROW(kv.get_int("y"), ParseError);
  EXPECT_THROW(kv.get_double("z"), ParseError);
}

TEST(Number, FormatRoundTrips) {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<std::uint64_t> bits;
  for (int i = 0; i < 20000; ++i) {
    const std::uint64_t b = bits(rng);
    double x;
    std::memcpy(&x, &b, sizeof x);
    if (!std::isfinite(x)) continue;
    double y = 0.0;
    ASSERT_TRUE(parse_double(format_double(x), y));
    ASSERT_EQ(std::memcmp(&x, &y, sizeof x), 0) << format_double(x);
  }
  double y;
  EXPECT_TRUE(parse_double(" +2.5\r", y));
  EXPECT_EQ(y, 2.5);
  EXPECT_FALSE(parse_double("2.5x", y));
  EXPECT_FALSE(parse_double("", y));
}

TEST(LabeledMatrix, RoundTrip) {
  std::mt19937_64 rng(62);
  std::normal_distribution<double> d(0.0, 1e3);
  LabeledMatrices lm;
  Eigen::MatrixXd a(3, 4), e(0, 2);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = d(rng);
  lm.add("A", a);
  lm.add("E", e);
  lm.set_meta("gamma", 1.1922961835316934);
  lm.set_meta("kind", "lpv");
  const LabeledMatrices back = LabeledMatrices::parse(lm.to_text());
  EXPECT_EQ(back.get("A"), a);
  EXPECT_EQ(back.get("E").rows(), 0);
  EXPECT_EQ(back.get("E").cols(), 2);
  EXPECT_EQ(back.meta_double("gamma"), 1.1922961835316934);
  EXPECT_EQ(back.meta("kind"), "lpv");
  EXPECT_FALSE(back.has("B"));
  EXPECT_THROW(back.get("B"), DomainError);
}

TEST(LabeledMatrix, MalformedInput) {
  EXPECT_THROW(LabeledMatrices::parse("matrix A 2 2\n1 2\n3\n"), ParseError);
  EXPECT_THROW(LabeledMatrices::parse("matrix A 2 2\n1 2\n"), ParseError);
  EXPECT_THROW(LabeledMatrices::parse("matrix A 1 1\nabc\n"), ParseError);
  EXPECT_THROW(LabeledMatrices::parse("matrix A -1 1\n"), ParseError);
  EXPECT_THROW(LabeledMatrices::parse("bogus line\n"), ParseError);
  EXPECT_THROW(LabeledMatrices::parse("matrix A 1 1\n1\nmatrix A 1 1\n2\n"), ParseError);
}

TEST(Svg, RendersPanelsAndSeries) {
  PlotPanel p{"Generator speed", "rad/s", {{"lpv", {0, 1, 2}, {105, 106, 105.5}}}};
  PlotPanel q{"Pitch", "deg", {{"a", {0, 1}, {1, 2}}, {"b", {0, 1}, {2, 3}}}};
  const std::string svg = render_svg({p, q}, "t [s]");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("Generator speed"), std::string::npos);
  EXPECT_NE(svg.find("t [s]"), std::string::npos);
  size_t lines = 0;
  for (size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos) ++lines;
  EXPECT_EQ(lines, 3u);
  // Degenerate range still renders.
  PlotPanel flat{"flat", "", {{"c", {0, 1}, {5, 5}}}};
  EXPECT_EQ(render_svg({flat}, "x").find("nan"), std::string::npos);
}
