#include <doctest.h>

#include <cmath>

#include "readability/corpus.hpp"
#include "readability/embeddings.hpp"
#include "readability/error.hpp"
#include "readability/rng.hpp"
#include "support/test_util.hpp"

using namespace readability;
using test_util::TempDir;
using test_util::write_file;

TEST_CASE("load_vec reads a minimal file") {
  TempDir dir("vec");
  const auto path = dir.path() / "tiny.vec";
  write_file(path, "2 3\na 1 0 0\nb 0 1 0\n");
  const auto table = load_vec(path);
  CHECK(table.dim() == 3);
  CHECK(table.size() == 2);
  REQUIRE(table.lookup("a").has_value());
  CHECK(*table.lookup("a") == 0);
  CHECK(table.row(1)[1] == doctest::Approx(1.0));
  CHECK_FALSE(table.lookup("missing").has_value());
}

TEST_CASE("load_vec accepts CRLF line endings") {
  TempDir dir("vec");
  const auto path = dir.path() / "crlf.vec";
  write_file(path, "1 2\r\ntok 0.5 -0.5\r\n");
  const auto table = load_vec(path);
  CHECK(table.size() == 1);
  CHECK(table.row(0)[0] == doctest::Approx(0.5));
}

TEST_CASE("load_vec reports row arity errors with the line number") {
  TempDir dir("vec");
  const auto path = dir.path() / "arity.vec";
  write_file(path, "2 3\na 1 0 0\nb 0 1\n");
  CHECK_THROWS_WITH_AS(load_vec(path), doctest::Contains("line 3"), ParseError);

  const auto extra = dir.path() / "extra.vec";
  write_file(extra, "1 2\na 1 0 9\n");
  CHECK_THROWS_AS(load_vec(extra), ParseError);
}

TEST_CASE("load_vec rejects malformed headers and non-finite values") {
  TempDir dir("vec");
  const auto bad_header = dir.path() / "h.vec";
  write_file(bad_header, "notanumber 3\na 1 0 0\n");
  CHECK_THROWS_WITH_AS(load_vec(bad_header), doctest::Contains("header"), ParseError);

  const auto nan_row = dir.path() / "nan.vec";
  write_file(nan_row, "1 2\na nan 0\n");
  CHECK_THROWS_AS(load_vec(nan_row), ParseError);

  const auto inf_row = dir.path() / "inf.vec";
  write_file(inf_row, "1 2\na inf 0\n");
  CHECK_THROWS_AS(load_vec(inf_row), ParseError);
}

TEST_CASE("load_vec truncates at max_vocab and keeps first duplicates") {
  TempDir dir("vec");
  const auto path = dir.path() / "cap.vec";
  std::string content = "10 1\n";
  for (int i = 0; i < 10; ++i) {
    content += "t" + std::to_string(i) + " " + std::to_string(i) + "\n";
  }
  write_file(path, content);
  VecLoadOptions options;
  options.max_vocab = 4;
  const auto table = load_vec(path, options);
  CHECK(table.size() == 4);
  CHECK(table.token(0) == "t0");
  CHECK(table.token(3) == "t3");

  const auto dup_path = dir.path() / "dup.vec";
  write_file(dup_path, "3 1\nx 1\nx 2\ny 3\n");
  const auto dup = load_vec(dup_path);
  CHECK(dup.size() == 2);
  CHECK(dup.row(*dup.lookup("x"))[0] == doctest::Approx(1.0));
}

TEST_CASE("l2 normalization rescales rows to unit norm") {
  TempDir dir("vec");
  const auto path = dir.path() / "norm.vec";
  write_file(path, "2 2\na 3 4\nb 0 0\n");
  VecLoadOptions options;
  options.l2_normalize = true;
  const auto table = load_vec(path, options);
  CHECK(table.row(0)[0] == doctest::Approx(0.6));
  CHECK(table.row(0)[1] == doctest::Approx(0.8));
  CHECK(table.row(1)[0] == doctest::Approx(0.0)); // zero vectors left alone
}

TEST_CASE("ground_cost is the euclidean distance") {
  auto table = test_util::make_table(2, {{0.0, 0.0}, {3.0, 4.0}, {0.0, 0.0}});
  CHECK(ground_cost(table, 0, 2) == doctest::Approx(0.0));
  CHECK(ground_cost(table, 0, 1) == doctest::Approx(5.0));
  CHECK_THROWS_AS(ground_cost(table, 0, 99), Error);
}

TEST_CASE("ground_cost matches a naive oracle on random pairs") {
  Rng rng(17);
  auto table = test_util::random_table(rng, 20, 50);
  for (int trial = 0; trial < 50; ++trial) {
    const auto i = static_cast<std::uint32_t>(rng.below(20));
    const auto j = static_cast<std::uint32_t>(rng.below(20));
    double sum = 0.0;
    for (std::size_t d = 0; d < 50; ++d) {
      const double diff = table.row(i)[d] - table.row(j)[d];
      sum += diff * diff;
    }
    const double naive = std::sqrt(sum);
    CHECK(std::abs(ground_cost(table, i, j) - naive) <= 1e-12);
    CHECK(ground_cost(table, i, j) == doctest::Approx(ground_cost(table, j, i)));
    CHECK(ground_cost(table, i, i) == doctest::Approx(0.0));
  }
}

TEST_CASE("triangle inequality holds on sampled triples") {
  Rng rng(18);
  auto table = test_util::random_table(rng, 12, 4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto i = static_cast<std::uint32_t>(rng.below(12));
    const auto j = static_cast<std::uint32_t>(rng.below(12));
    const auto k = static_cast<std::uint32_t>(rng.below(12));
    CHECK(ground_cost(table, i, k) <=
          ground_cost(table, i, j) + ground_cost(table, j, k) + 1e-12);
  }
}

TEST_CASE("cost_matrix matches the scalar oracle pointwise") {
  Rng rng(19);
  auto table = test_util::random_table(rng, 10, 3);
  auto a = test_util::random_nbow(rng, 10, 3);
  auto b = test_util::random_nbow(rng, 10, 2);
  const auto costs = cost_matrix(table, a, b);
  REQUIRE(costs.size() == 6);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(costs[i * 2 + j] ==
            doctest::Approx(ground_cost(table, a.token_ids[i], b.token_ids[j])));
    }
  }

  // identical documents put zeros on the diagonal
  const auto self_costs = cost_matrix(table, a, a);
  for (std::size_t i = 0; i < a.support(); ++i) {
    CHECK(self_costs[i * a.support() + i] == doctest::Approx(0.0));
  }

  // single-word documents give a 1x1 matrix equal to ground_cost
  auto single_a = test_util::make_nbow({0}, {1.0});
  auto single_b = test_util::make_nbow({1}, {1.0});
  const auto one = cost_matrix(table, single_a, single_b);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == doctest::Approx(ground_cost(table, 0, 1)));
}
