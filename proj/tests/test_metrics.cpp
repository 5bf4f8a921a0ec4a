#include <doctest.h>

#include <algorithm>
#include <random>

#include "eud/error.hpp"
#include "eud/metrics.hpp"
#include "generators.hpp"

using namespace eud;

namespace {

GraphArc arc(int h, int d, std::string label) { return {NodeId{h, 0}, NodeId{d, 0}, std::move(label)}; }

}  // namespace

TEST_CASE("identical graphs score one") {
  const DepGraph g{3, {}, {arc(0, 2, "root"), arc(2, 1, "nsubj"), arc(2, 3, "obj+xcomp")}};
  CHECK(elas({g}, {g}).f1 == 1.0);
  CHECK(lf1({g}, {g}).f1 == 1.0);
  CHECK(elas({g}, {g}).gold == 4);
  CHECK(lf1({g}, {g}).gold == 3);
}

TEST_CASE("two of three arcs correct") {
  const DepGraph gold{3, {}, {arc(0, 2, "root"), arc(2, 1, "nsubj"), arc(2, 3, "obj")}};
  const DepGraph pred{3, {}, {arc(0, 2, "root"), arc(2, 1, "nsubj"), arc(2, 3, "iobj")}};
  const ScoreReport r = elas({gold}, {pred});
  CHECK(r.precision == doctest::Approx(2.0 / 3.0));
  CHECK(r.recall == doctest::Approx(2.0 / 3.0));
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(r.correct == 2);
  CHECK(r.correct <= std::min(r.predicted, r.gold));
}

TEST_CASE("empty prediction") {
  const DepGraph gold{2, {}, {arc(0, 1, "root"), arc(1, 2, "obj")}};
  const ScoreReport r = elas({gold}, {DepGraph{2, {}, {}}});
  CHECK(r.precision == 0.0);
  CHECK(r.recall == 0.0);
  CHECK(r.f1 == 0.0);
  CHECK(r.connectivity_rate == 0.0);
}

TEST_CASE("merged labels are exact strings under lf1 but split under elas") {
  const DepGraph gold{2, {}, {arc(1, 2, "a+b")}};
  const DepGraph pred{2, {}, {arc(1, 2, "a")}};
  const ScoreReport l = lf1({gold}, {pred});
  const ScoreReport e = elas({gold}, {pred});
  CHECK(l.f1 == 0.0);
  CHECK(e.precision == 1.0);
  CHECK(e.recall == 0.5);
  CHECK(e.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(e.f1 > l.f1);
}

TEST_CASE("empty nodes are collapsed before scoring") {
  const NodeId e{2, 1};
  const DepGraph gold{3, {e}, {arc(0, 2, "root"), {NodeId{2, 0}, e, "conj"}, {e, NodeId{3, 0}, "nsubj"}}};
  const DepGraph pred{3, {}, {arc(0, 2, "root"), arc(2, 3, "conj>nsubj")}};
  CHECK(elas({gold}, {pred}).f1 == 1.0);
  CHECK(lf1({gold}, {pred}).f1 == 1.0);
}

TEST_CASE("labels compare as full strings") {
  const DepGraph gold{2, {}, {arc(0, 1, "root"), arc(1, 2, "nmod:poss")}};
  const DepGraph pred{2, {}, {arc(0, 1, "root"), arc(1, 2, "nmod")}};
  CHECK(elas({gold}, {pred}).correct == 1);
}

TEST_CASE("counts are micro-averaged over the corpus") {
  const DepGraph g1{1, {}, {arc(0, 1, "root")}};
  const DepGraph g2{3, {}, {arc(0, 1, "root"), arc(1, 2, "x"), arc(1, 3, "y")}};
  const DepGraph p2{3, {}, {arc(0, 1, "root")}};
  const ScoreReport r = elas({g1, g2}, {g1, p2});
  CHECK(r.precision == 1.0);
  CHECK(r.recall == doctest::Approx(0.5));
}

TEST_CASE("misaligned corpora are rejected") {
  const DepGraph g{2, {}, {}};
  CHECK_THROWS_AS(elas({g}, {}), AlignmentError);
  CHECK_THROWS_AS(lf1({g}, {DepGraph{3, {}, {}}}), AlignmentError);
}

TEST_CASE("swapping gold and prediction swaps precision and recall") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DepGraph> a, b;
    for (int s = 0; s < 4; ++s) {
      DepGraph x = testing::random_multigraph(rng);
      DepGraph y = testing::random_multigraph(rng);
      y.n_words = x.n_words;
      y.arcs.erase(std::remove_if(y.arcs.begin(), y.arcs.end(),
                                  [&](const GraphArc& arc) {
                                    return arc.head.word_index > x.n_words || arc.dep.word_index > x.n_words;
                                  }),
                   y.arcs.end());
      for (std::size_t k = 0; k < x.arcs.size(); k += 2) y.add(x.arcs[k]);
      a.push_back(x);
      b.push_back(y);
    }
    for (auto metric : {elas, lf1}) {
      const ScoreReport ab = metric(a, b);
      const ScoreReport ba = metric(b, a);
      CHECK(ab.precision == ba.recall);
      CHECK(ab.recall == ba.precision);
      CHECK(ab.f1 == doctest::Approx(ba.f1));
      CHECK(metric(a, a).f1 == (ab.gold == 0 ? 0.0 : 1.0));
    }
    std::vector<DepGraph> ra(a.rbegin(), a.rend()), rb(b.rbegin(), b.rend());
    CHECK(elas(ra, rb).f1 == elas(a, b).f1);
  }
}

TEST_CASE("connectivity") {
  const DepGraph connected{2, {}, {arc(0, 1, "root"), arc(1, 2, "obj")}};
  const DepGraph isolated{2, {}, {arc(0, 1, "root")}};
  CHECK(is_connected(connected));
  CHECK_FALSE(is_connected(isolated));
  CHECK(connectivity_rate({isolated}) == 0.0);
  CHECK(connectivity_rate({connected, connected, isolated, connected}) == 0.75);
  CHECK(connectivity_rate({}) == 1.0);

  const NodeId e{1, 1};
  CHECK(is_connected(DepGraph{2, {e}, {arc(0, 1, "root"), {NodeId{1, 0}, e, "conj"}, {e, NodeId{2, 0}, "obj"}}}));
  CHECK_FALSE(is_connected(DepGraph{2, {e}, {arc(0, 1, "root"), arc(1, 2, "obj"), {e, NodeId{2, 0}, "obj"}}}));
}

TEST_CASE("report formatting") {
  ScoreReport r;
  r.precision = 2.0 / 3.0;
  r.recall = 0.5;
  r.f1 = 4.0 / 7.0;
  r.correct = 2;
  r.predicted = 3;
  r.gold = 4;
  CHECK(format_report("ELAS", r) ==
        "ELAS\n  precision  0.6667\n  recall     0.5000\n  f1         0.5714\n  correct 2  predicted 3  gold 4\n");
  CHECK(format_report_machine("elas", r) ==
        "elas_p=0.6667 elas_r=0.5000 elas_f1=0.5714 elas_correct=2 elas_predicted=3 elas_gold=4");
}
