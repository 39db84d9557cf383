#include <doctest.h>

#include <random>

#include "linkopt/graph.hpp"
#include "support.hpp"

using namespace linkopt;

TEST_SUITE("graph") {

TEST_CASE("parse: minimal two-node graph") {
  LinkGraph g = parse_graph("n 2\no 0 1\nf 1 0\n");
  CHECK(g.n == 2);
  REQUIRE(g.obligatory.size() == 1);
  CHECK(g.obligatory[0] == Arc{0, 1});
  REQUIRE(g.facultative.size() == 1);
  CHECK(g.facultative[0] == Arc{1, 0});
}

TEST_CASE("parse: arc in two classes is rejected") {
  CHECK_THROWS_WITH_AS(parse_graph("n 2\no 0 1\np 0 1\n"), doctest::Contains("two classes"),
                       ParseError);
  CHECK_THROWS_AS(parse_graph("n 2\nf 0 1\no 0 1\n"), ParseError);
}

TEST_CASE("parse: errors carry line numbers") {
  try {
    parse_graph("n 2\no 0 1\no zero 1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_graph("n 2\no 0 5\n"), ParseError);   // index out of range
  CHECK_THROWS_AS(parse_graph("o 0 1\n"), ParseError);        // node count must come first
}

TEST_CASE("parse: duplicate identical lines collapse") {
  LinkGraph g = parse_graph("n 3\no 0 1\no 0 1\nf 1 2\nf 1 2\n");
  CHECK(g.obligatory.size() == 1);
  CHECK(g.facultative.size() == 1);
}

TEST_CASE("parse: facultative self-link rejected unless overridden") {
  CHECK_THROWS_AS(parse_graph("n 2\nf 1 1\n"), ParseError);
  ParseOptions opts;
  opts.allow_self_links = true;
  LinkGraph g = parse_graph("n 2\nf 1 1\n", opts);
  CHECK(g.facultative.size() == 1);
}

TEST_CASE("parse: comments and targets") {
  LinkGraph g = parse_graph("# heading\nn 3  # trailing\nt 2\no 0 1 # arc\nf 2 0\n");
  CHECK(g.n == 3);
  CHECK(g.target_set == std::vector<int>{2});
}

TEST_CASE("parse: the example web graph has 3 controlled pages") {
  LinkGraph g = load_graph(std::string(TEST_DATA_DIR) + "/example21.graph");
  CHECK(g.n == 21);
  CHECK(g.obligatory.size() == 41);
  CHECK(g.facultative.size() == 54);
  CHECK(g.controlled_pages() == std::vector<int>{16, 19, 20});
  CHECK(g.target_set == std::vector<int>{16, 19, 20});
}

TEST_CASE("round trip: parse(serialize(g)) == g") {
  testsupport::Rng rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    LinkGraph g = testsupport::random_instance(rng, 12, 8, 10);
    LinkGraph h = parse_graph(serialize(g));
    CHECK(h.n == g.n);
    CHECK(h.obligatory == g.obligatory);
    CHECK(h.facultative == g.facultative);
    CHECK(h.target_set == g.target_set);
  }
}

TEST_CASE("assemble: values and structural pattern") {
  LinkGraph g = parse_graph("n 2\no 0 1\nf 1 0\n");
  WeightVector x{{0.5}};
  SparseMatrix a = assemble(g, x);
  CHECK(a.nnz() == 2);
  std::vector<double> e{1.0, 1.0}, y(2);
  a.matvec(e, y);
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(0.5));

  SUBCASE("zero weight keeps the structural entry") {
    SparseMatrix a0 = assemble(g, WeightVector{{0.0}});
    CHECK(a0.nnz() == 2);  // pattern stable across weight vectors
    a0.matvec(e, y);
    CHECK(y[1] == 0.0);
  }
  SUBCASE("full weight") {
    SparseMatrix a1 = assemble(g, WeightVector{{1.0}});
    a1.matvec(e, y);
    CHECK(y[1] == 1.0);
  }
}

TEST_CASE("assemble: entries in box, |O|+|F| structural entries") {
  testsupport::Rng rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    LinkGraph g = testsupport::random_instance(rng, 15, 10, 12);
    std::uniform_real_distribution<double> wide(-1.0, 2.0);
    std::vector<double> raw(g.facultative.size());
    for (double& v : raw) v = wide(rng);
    WeightVector x = project_box(raw);
    SparseMatrix a = assemble(g, x);
    CHECK(a.nnz() == g.obligatory.size() + g.facultative.size());
    for (double v : a.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("project_box: clamp, idempotence, interior points kept") {
  WeightVector w = project_box(std::vector<double>{-0.3, 0.5, 1.7});
  CHECK(w.x == std::vector<double>{0.0, 0.5, 1.0});
  WeightVector w2 = project_box(w.x);
  CHECK(w2.x == w.x);
  CHECK(project_box(std::vector<double>{0.18}).x[0] == 0.18);
}

TEST_CASE("project_box is nonexpansive") {
  testsupport::Rng rng(11);
  std::uniform_real_distribution<double> wide(-3.0, 4.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> x(20), y(20);
    for (int i = 0; i < 20; ++i) {
      x[i] = wide(rng);
      y[i] = wide(rng);
    }
    WeightVector px = project_box(x), py = project_box(y);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 20; ++i) {
      num += (px.x[i] - py.x[i]) * (px.x[i] - py.x[i]);
      den += (x[i] - y[i]) * (x[i] - y[i]);
    }
    CHECK(num <= den + 1e-15);
  }
}

TEST_CASE("weights: order-checked round trip") {
  LinkGraph g = parse_graph("n 3\nf 0 1\nf 0 2\n");
  WeightVector x{{0.25, 1.0}};
  WeightVector y = parse_weights(g, serialize_weights(g, x));
  CHECK(y.x == x.x);
  CHECK_THROWS_AS(parse_weights(g, "0 2 0.5\n0 1 1\n"), ParseError);  // wrong order
  CHECK_THROWS_AS(parse_weights(g, "0 1 0.5\n"), ParseError);         // missing line
}

TEST_CASE("matvec matches row sums on e") {
  testsupport::Rng rng(5);
  LinkGraph g = testsupport::random_instance(rng, 10, 12, 8);
  SparseMatrix a = assemble(g, testsupport::random_weights(rng, g.facultative.size()));
  std::vector<double> e(10, 1.0), y(10);
  a.matvec(e, y);
  std::vector<double> rs = a.row_sums();
  for (int i = 0; i < 10; ++i) CHECK(y[i] == doctest::Approx(rs[i]).epsilon(1e-14));
}

}  // TEST_SUITE
