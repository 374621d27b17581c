#include <doctest.h>

#include <random>
#include <sstream>
#include <thread>

#include "rewardkit/eval_harness.hpp"

using namespace rewardkit::eval;

namespace {

double kappa_value(const KappaResult& k) {
  REQUIRE(std::holds_alternative<double>(k));
  return std::get<double>(k);
}

}  // namespace

TEST_CASE("judge prompt") {
  const auto p = build_judge_prompt("user: hi", "alpha answer", "beta answer");
  for (const auto* criterion : {"Helpfulness", "Informativeness", "Reasoning", "Coverage"}) {
    CHECK(p.find(criterion) != std::string::npos);
  }
  CHECK(p.find("VERDICT: FIRST") != std::string::npos);
  CHECK(p.find("alpha answer") < p.find("beta answer"));
  const auto swapped = build_judge_prompt("user: hi", "beta answer", "alpha answer");
  CHECK(swapped.find("beta answer") < swapped.find("alpha answer"));
  CHECK(swapped.size() == p.size());
  CHECK(build_judge_prompt("user: hi", "same", "same") == build_judge_prompt("user: hi", "same", "same"));
  CHECK_NOTHROW(build_judge_prompt("", "a", "b"));
  CHECK_THROWS_AS(build_judge_prompt("h", "", "b"), std::invalid_argument);
}

TEST_CASE("judge reply parsing") {
  CHECK(parse_judge_reply("The first is better.\nVERDICT: FIRST") == Verdict::first);
  CHECK(parse_judge_reply("Both fine.\nVERDICT: TIE\n\n") == Verdict::tie);
  CHECK(parse_judge_reply("VERDICT: SECOND") == Verdict::second);
  CHECK_THROWS_AS(parse_judge_reply("I prefer the first one."), JudgeParseError);
  CHECK_THROWS_AS(parse_judge_reply("VERDICT: FIRST\nactually not sure"), JudgeParseError);
  try {
    parse_judge_reply("no verdict");
  } catch (const JudgeParseError& e) {
    CHECK(e.reply() == "no verdict");
  }
}

TEST_CASE("debiasing rule") {
  CHECK(debias(Verdict::first, Verdict::second) == Outcome::win);
  CHECK(debias(Verdict::second, Verdict::first) == Outcome::loss);
  CHECK(debias(Verdict::first, Verdict::first) == Outcome::tie);
  CHECK(debias(Verdict::tie, Verdict::tie) == Outcome::tie);
  CHECK(debias(Verdict::first, Verdict::tie) == Outcome::tie);
}

TEST_CASE("swapping model labels maps win to loss") {
  const Verdict all[] = {Verdict::first, Verdict::second, Verdict::tie};
  for (const auto ab : all) {
    for (const auto ba : all) {
      const JudgmentBallot b1{"p", Order::AB, ab, "r"};
      const JudgmentBallot b2{"p", Order::BA, ba, "r"};
      const auto s1 = swap_models(b1);
      const auto s2 = swap_models(b2);
      const auto before = debias(ab, ba);
      CHECK(s1.presentation_order == Order::BA);
      CHECK(s2.presentation_order == Order::AB);
      const auto after = debias(s2.verdict, s1.verdict);
      const auto expected = before == Outcome::win ? Outcome::loss : before == Outcome::loss ? Outcome::win : Outcome::tie;
      CHECK(after == expected);
    }
  }
}

TEST_CASE("aggregation") {
  std::vector<PairOutcome> outcomes;
  for (int i = 0; i < 30; ++i) outcomes.push_back({"w" + std::to_string(i), Outcome::win});
  for (int i = 0; i < 26; ++i) outcomes.push_back({"l" + std::to_string(i), Outcome::loss});
  for (int i = 0; i < 44; ++i) outcomes.push_back({"t" + std::to_string(i), Outcome::tie});
  const auto a = aggregate(outcomes);
  CHECK(a.wins + a.losses + a.ties == 100);
  CHECK(a.net_win_pct == doctest::Approx(4.0));
  CHECK(a.win_pct + a.loss_pct + a.tie_pct == doctest::Approx(100.0));
  CHECK(aggregate({{"a", Outcome::tie}, {"b", Outcome::tie}}).net_win_pct == 0.0);
  CHECK(aggregate({{"a", Outcome::win}, {"b", Outcome::loss}}).net_win_pct == 0.0);
  CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
}

TEST_CASE("fleiss kappa examples") {
  // three raters, two items: (W,W,W) and (W,W,L); P = 2/3, Pe = 13/18
  const auto worked = AgreementTable::from_labels({{0, 0, 0}, {0, 0, 1}}, 3);
  CHECK(kappa_value(fleiss_kappa(worked)) == doctest::Approx(-0.2).epsilon(1e-12));

  const auto perfect = AgreementTable::from_labels({{0, 0, 0}, {1, 1, 1}, {2, 2, 2}}, 3);
  CHECK(kappa_value(fleiss_kappa(perfect)) == doctest::Approx(1.0));

  const auto degenerate = AgreementTable::from_labels({{1, 1}, {1, 1}}, 3);
  CHECK(std::holds_alternative<PerfectDegenerate>(fleiss_kappa(degenerate)));

  CHECK_THROWS(AgreementTable({{1, 1}, {2, 1}}));
}

TEST_CASE("kappa never exceeds one") {
  std::mt19937_64 rng(41);
  for (int c = 0; c < 300; ++c) {
    const int items = 2 + static_cast<int>(rng() % 20);
    const int raters = 2 + static_cast<int>(rng() % 5);
    std::vector<std::vector<int>> labels(static_cast<std::size_t>(items));
    for (auto& row : labels) {
      for (int r = 0; r < raters; ++r) row.push_back(static_cast<int>(rng() % 3));
    }
    const auto k = fleiss_kappa(AgreementTable::from_labels(labels, 3));
    if (const auto* v = std::get_if<double>(&k)) CHECK(*v <= 1.0 + 1e-12);
  }
}

TEST_CASE("ballot box is idempotent and rejects conflicts") {
  BallotBox box;
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&box, t] {
      for (int i = 0; i < 100; ++i) {
        box.add({"p" + std::to_string(i), i % 2 ? Order::AB : Order::BA, Verdict::first, "r" + std::to_string(t % 2)});
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(box.ballots().size() == 200);
  CHECK_THROWS(box.add({"p1", Order::AB, Verdict::second, "r0"}));
}

TEST_CASE("replay transport and end-to-end evaluation") {
  const nlohmann::json fixture = {
      {"p1", {{"AB", "A is better\nVERDICT: FIRST"}, {"BA", "B slot wins\nVERDICT: SECOND"}}},
      {"p2", "VERDICT: TIE"},
      {"p3", {{"AB", "VERDICT: SECOND"}, {"BA", "VERDICT: FIRST"}}},
  };
  ReplayTransport transport(fixture);
  const std::vector<ComparisonItem> items = {
      {"p1", "h", "a1", "b1"}, {"p2", "h", "a2", "b2"}, {"p3", "h", "a3", "b3"}};
  const auto ballots = judge_pairs(items, transport, "gpt");
  REQUIRE(ballots.size() == 6);

  std::ostringstream out;
  write_ballots(out, ballots);
  std::istringstream in(out.str());
  const auto back = read_ballots(in);
  REQUIRE(back.size() == ballots.size());
  CHECK(back[0].pair_id == ballots[0].pair_id);

  const auto report = evaluate_ballots(back);
  CHECK(report.pooled.wins == 1);
  CHECK(report.pooled.losses == 1);
  CHECK(report.pooled.ties == 1);
  CHECK(report.pooled.net_win_pct == doctest::Approx(0.0));
  CHECK_FALSE(report.kappa.has_value());

  auto two_raters = back;
  for (auto b : back) {
    b.rater_id = "human";
    two_raters.push_back(b);
  }
  const auto agreed = evaluate_ballots(two_raters);
  REQUIRE(agreed.kappa.has_value());
  CHECK(kappa_value(*agreed.kappa) == doctest::Approx(1.0));
  CHECK(agreed.kappa_items == 3);

  std::vector<JudgmentBallot> swapped;
  for (const auto& b : back) swapped.push_back(swap_models(b));
  CHECK(evaluate_ballots(swapped).pooled.net_win_pct == doctest::Approx(-report.pooled.net_win_pct));
}
