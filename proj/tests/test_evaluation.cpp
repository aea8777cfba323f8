#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lbsn/csv.hpp"
#include "lbsn/evaluation.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace lbsn;

namespace {

PredictorConfig with(Method m) {
  PredictorConfig c;
  c.method = m;
  return c;
}

std::vector<double> random_scores(std::mt19937_64& rng, std::size_t n, int levels) {
  std::vector<double> out(n);
  // few distinct levels so ties actually happen
  for (auto& x : out) x = static_cast<double>(rng() % static_cast<unsigned>(levels)) / 7.0;
  return out;
}

}  // namespace

TEST_CASE("AUC examples") {
  const std::vector<double> p = {0.8, 0.3}, n = {0.5, 0.1};
  const auto brute = oracle::auc(p, n);
  REQUIRE(brute.auc == 0.75);
  const auto a = auc_exact(p, n);
  CHECK(a.auc == 0.75);
  CHECK(a.n_wins == 3);
  CHECK(a.n_ties == 0);
  CHECK(a.n_comparisons == 4);
  CHECK(auc_exact(std::vector<double>{0.9, 0.8}, std::vector<double>{0.2, 0.1}).auc == 1.0);
  CHECK(auc_exact(std::vector<double>{1, 1, 1}, std::vector<double>{1, 1}).auc == 0.5);
  CHECK(auc_exact(std::vector<double>{0.0}, std::vector<double>{1.0}).auc == 0.0);
  CHECK_THROWS_AS(auc_exact({}, std::vector<double>{1.0}), EmptySample);
}

TEST_CASE("property: exact AUC equals brute force and is rank invariant") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = random_scores(rng, 1 + rng() % 40, 2 + static_cast<int>(rng() % 20));
    const auto n = random_scores(rng, 1 + rng() % 40, 2 + static_cast<int>(rng() % 20));
    const auto brute = oracle::auc(p, n);
    const auto got = auc_exact(p, n);
    CHECK(got.n_wins == brute.wins);
    CHECK(got.n_ties == brute.ties);
    CHECK(got.auc == brute.auc);
    std::vector<double> tp, tn;
    for (double x : p) tp.push_back(std::exp(3 * x) - 5);
    for (double x : n) tn.push_back(std::exp(3 * x) - 5);
    CHECK(auc_exact(tp, tn).auc == got.auc);
  }
}

TEST_CASE("sampled AUC converges to exact") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> pos(0.6, 1.0), neg(0.0, 1.0);
  std::vector<double> p(3000), n(3000);
  for (auto& x : p) x = pos(rng);
  for (auto& x : n) x = neg(rng);
  const auto exact = auc_exact(p, n).auc;
  const auto sampled = auc_sampled(p, n, 1'000'000, 9);
  CHECK(std::abs(sampled.auc - exact) < 0.005);
  CHECK(sampled.n_comparisons == 1'000'000);
  CHECK(auc_sampled(p, n, 1000, 9).auc == auc_sampled(p, n, 1000, 9).auc);
}

TEST_CASE("random-batch evaluation on a synthetic corpus") {
  synthetic::Spec spec;
  const auto g = BipartiteGraph::from_checkins(synthetic::generate(spec));
  const auto rs = sample_random(g, 0.1, 5);
  auto residual = rs.residual;
  const auto nbi = evaluate_auc(residual, rs.sample, with(Method::nbi));
  CHECK(nbi.n_pos == rs.sample.positives.size());
  CHECK(nbi.n_comparisons == nbi.n_pos * nbi.n_neg);
  CHECK(nbi.auc > 0.6);
  CHECK(nbi.sample_meta.parameter() == "0.1");

  // the evaluator's AUC equals a hand-scored brute force
  std::vector<double> p, n;
  for (const auto& e : rs.sample.positives) p.push_back(score_user(residual, e.user, with(Method::nbi)).scores[idx(e.venue)]);
  for (const auto& e : rs.sample.negatives) n.push_back(score_user(residual, e.user, with(Method::nbi)).scores[idx(e.venue)]);
  CHECK(nbi.auc == oracle::auc(p, n).auc);

  for (unsigned workers : {2u, 4u}) {
    EvalOptions o;
    o.workers = workers;
    CHECK(evaluate_auc(residual, rs.sample, with(Method::nbi), o).auc == nbi.auc);
  }
}

TEST_CASE("time-incremental evaluation restores the graph") {
  synthetic::Spec spec;
  spec.users = 30;
  auto g = BipartiteGraph::from_checkins(synthetic::generate(spec));
  const auto original = g;
  const TimeWindow w{spec.t0, spec.t0 + 7 * 86400};
  const auto s = sample_time(g, w, 3, 60);
  for (auto m : {Method::nbi, Method::nbi_time, Method::cf}) {
    for (unsigned workers : {1u, 3u}) {
      const auto scores = score_sample(g, s, with(m), workers);
      CHECK(g == original);
      CHECK(scores.positives.size() == s.positives.size());
    }
  }
  // each positive is scored with its own pair removed
  const auto& first = s.positives.front();
  auto removed = g;
  removed.remove_pair(first.user, first.venue);
  const auto expect = score_user(removed, first.user, with(Method::nbi)).scores[idx(first.venue)];
  CHECK(score_sample(g, s, with(Method::nbi)).positives.front() == expect);
  CHECK(score_sample(g, s, with(Method::nbi), 1).positives ==
        score_sample(g, s, with(Method::nbi), 4).positives);
}

TEST_CASE("grid evaluation") {
  synthetic::Spec spec;
  spec.users = 40;
  const auto g = BipartiteGraph::from_checkins(synthetic::generate(spec));
  std::vector<EvalSample> samples;
  for (double f : {0.05, 0.1, 0.2}) samples.push_back(sample_random(g, f, 1).sample);
  const std::vector<PredictorConfig> predictors = {with(Method::grm), with(Method::assort),
                                                   with(Method::cf), with(Method::nbi)};
  const auto reports = evaluate_grid(g, samples, predictors);
  REQUIRE(reports.size() == 12);
  CHECK(reports[5].method == predictors[1]);
  CHECK(reports[5].sample_meta.fraction == 0.1);

  auto residual = residual_graph(g, samples[1]);
  CHECK(evaluate_auc(residual, samples[1], predictors[1]).auc == reports[5].auc);

  // a time sample with nbi_time and a random sample with nbi_time: the latter fails alone
  const std::vector<PredictorConfig> timed = {with(Method::nbi_time)};
  const auto mixed = evaluate_grid(g, std::vector<EvalSample>{samples[0]}, timed);
  REQUIRE(mixed.size() == 1);
  CHECK(mixed[0].error.has_value());

  std::ostringstream csv_text;
  write_reports_csv(reports, csv_text);
  std::istringstream back(csv_text.str());
  const auto rows = read_reports_csv(back);
  REQUIRE(rows.size() == 12);
  CHECK(rows[3].method == "nbi");
  CHECK(rows[3].auc.value() == reports[3].auc);
  CHECK(rows[3].n_pos == reports[3].n_pos);
  csv::read(csv_text.str());
}

TEST_CASE("strict CSV reader") {
  CHECK(csv::read("a,b\n1,\"x,y\"\n") == std::vector<std::vector<std::string>>{{"a", "b"}, {"1", "x,y"}});
  CHECK(csv::read("a\n\"q\"\"q\"\n")[1][0] == "q\"q");
  CHECK_THROWS(csv::read("a,b\n1\n"));
  CHECK_THROWS(csv::read("a\n\"open\n"));
  CHECK_THROWS(csv::read("a\nx\"y\n"));
  CHECK(csv::escape("plain") == "plain");
  CHECK(csv::escape("a,b") == "\"a,b\"");
}
