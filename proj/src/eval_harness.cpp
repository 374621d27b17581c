#include "rewardkit/eval_harness.hpp"

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "rewardkit/text.hpp"

namespace rewardkit::eval {

std::string_view to_string(Order o) { return o == Order::AB ? "AB" : "BA"; }

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::first: return "first";
    case Verdict::second: return "second";
    case Verdict::tie: return "tie";
  }
  return "tie";
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::win: return "win";
    case Outcome::loss: return "loss";
    case Outcome::tie: return "tie";
  }
  return "tie";
}

std::optional<Order> parse_order(std::string_view s) {
  if (s == "AB") return Order::AB;
  if (s == "BA") return Order::BA;
  return std::nullopt;
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  if (s == "first") return Verdict::first;
  if (s == "second") return Verdict::second;
  if (s == "tie") return Verdict::tie;
  return std::nullopt;
}

std::string build_judge_prompt(std::string_view chat_history, std::string_view response_a,
                               std::string_view response_b) {
  if (text::trim(response_a).empty() || text::trim(response_b).empty()) {
    throw std::invalid_argument("judge prompt needs two nonempty responses");
  }
  std::string prompt;
  prompt +=
      "You are comparing two assistant responses to the same conversation.\n"
      "Judge which response serves the user better, weighing:\n"
      "  1. Helpfulness: does it directly and usefully address the request?\n"
      "  2. Informativeness: is the content accurate, specific and substantive?\n"
      "  3. Reasoning: is the argument coherent and well supported?\n"
      "  4. Coverage of user needs: does it handle every part of the request?\n"
      "The order of the two responses is random. Do not prefer a response for its\n"
      "position or its length.\n\n";
  prompt += "[Conversation]\n";
  prompt += chat_history;
  prompt += "\n[End of conversation]\n\n[Response 1]\n";
  prompt += response_a;
  prompt += "\n[End of response 1]\n\n[Response 2]\n";
  prompt += response_b;
  prompt +=
      "\n[End of response 2]\n\n"
      "Explain your assessment, then finish with exactly one line of the form\n"
      "VERDICT: FIRST, VERDICT: SECOND or VERDICT: TIE\n";
  return prompt;
}

Verdict parse_judge_reply(std::string_view reply) {
  static const std::regex kVerdictLine(R"(\s*VERDICT\s*:\s*(FIRST|SECOND|TIE)\s*)");
  std::string_view last;
  std::size_t start = 0;
  while (start <= reply.size()) {
    auto end = reply.find('\n', start);
    if (end == std::string_view::npos) end = reply.size();
    const auto line = reply.substr(start, end - start);
    if (!text::trim(line).empty()) last = line;
    start = end + 1;
  }
  std::match_results<std::string_view::const_iterator> match;
  if (!std::regex_match(last.begin(), last.end(), match, kVerdictLine)) {
    throw JudgeParseError(std::string(reply));
  }
  const auto token = match[1].str();
  if (token == "FIRST") return Verdict::first;
  if (token == "SECOND") return Verdict::second;
  return Verdict::tie;
}

ReplayTransport::ReplayTransport(const nlohmann::json& fixture) {
  if (!fixture.is_object()) throw std::invalid_argument("replay fixture must be a JSON object");
  for (const auto& [pair_id, value] : fixture.items()) {
    if (value.is_string()) {
      replies_[{pair_id, Order::AB}] = value.get<std::string>();
      replies_[{pair_id, Order::BA}] = value.get<std::string>();
    } else if (value.is_object()) {
      for (const auto& [order_name, reply] : value.items()) {
        const auto order = parse_order(order_name);
        if (!order) throw std::invalid_argument("replay fixture: bad order '" + order_name + "'");
        replies_[{pair_id, *order}] = reply.get<std::string>();
      }
    } else {
      throw std::invalid_argument("replay fixture: bad entry for pair '" + pair_id + "'");
    }
  }
}

ReplayTransport ReplayTransport::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open replay fixture " + path);
  return ReplayTransport(nlohmann::json::parse(in));
}

std::string ReplayTransport::complete(const JudgeRequest& request) {
  const auto it = replies_.find({request.pair_id, request.order});
  if (it == replies_.end()) {
    throw std::out_of_range("no canned reply for pair '" + request.pair_id + "' order " +
                            std::string(to_string(request.order)));
  }
  return it->second;
}

std::vector<JudgmentBallot> judge_pairs(const std::vector<ComparisonItem>& items, JudgeTransport& transport,
                                        const std::string& rater_id) {
  std::vector<JudgmentBallot> ballots;
  for (const auto& item : items) {
    for (const auto order : {Order::AB, Order::BA}) {
      const bool ab = order == Order::AB;
      JudgeRequest request{item.pair_id, order,
                           build_judge_prompt(item.chat_history, ab ? item.response_a : item.response_b,
                                              ab ? item.response_b : item.response_a)};
      ballots.push_back({item.pair_id, order, parse_judge_reply(transport.complete(request)), rater_id});
    }
  }
  return ballots;
}

namespace {

// Which model a verdict favours: +1 for A, -1 for B, 0 for neither.
int favours(Order order, Verdict v) {
  if (v == Verdict::tie) return 0;
  const int sign = v == Verdict::first ? 1 : -1;
  return order == Order::AB ? sign : -sign;
}

}  // namespace

Outcome debias(Verdict verdict_ab, Verdict verdict_ba) {
  const int ab = favours(Order::AB, verdict_ab);
  const int ba = favours(Order::BA, verdict_ba);
  if (ab == 1 && ba == 1) return Outcome::win;
  if (ab == -1 && ba == -1) return Outcome::loss;
  return Outcome::tie;
}

PairOutcome debias_pair(std::string_view pair_id, Verdict verdict_ab, Verdict verdict_ba) {
  return PairOutcome{std::string(pair_id), debias(verdict_ab, verdict_ba)};
}

JudgmentBallot swap_models(const JudgmentBallot& ballot) {
  // With A and B exchanged the same physical presentation is the other order.
  JudgmentBallot swapped = ballot;
  swapped.presentation_order = ballot.presentation_order == Order::AB ? Order::BA : Order::AB;
  return swapped;
}

Aggregate aggregate(const std::vector<PairOutcome>& outcomes) {
  if (outcomes.empty()) throw std::invalid_argument("aggregate: no outcomes");
  Aggregate a;
  for (const auto& o : outcomes) {
    switch (o.outcome) {
      case Outcome::win: ++a.wins; break;
      case Outcome::loss: ++a.losses; break;
      case Outcome::tie: ++a.ties; break;
    }
  }
  const double n = static_cast<double>(outcomes.size());
  a.win_pct = 100.0 * static_cast<double>(a.wins) / n;
  a.loss_pct = 100.0 * static_cast<double>(a.losses) / n;
  a.tie_pct = 100.0 * static_cast<double>(a.ties) / n;
  a.net_win_pct = 100.0 * (static_cast<double>(a.wins) - static_cast<double>(a.losses)) / n;
  return a;
}

AgreementTable::AgreementTable(std::vector<std::vector<int>> counts) : counts_(std::move(counts)) {
  if (counts_.size() < 2) throw std::invalid_argument("agreement table needs at least two items");
  const auto k = counts_.front().size();
  if (k < 1) throw std::invalid_argument("agreement table needs at least one category");
  raters_ = -1;
  for (const auto& row : counts_) {
    if (row.size() != k) throw std::invalid_argument("agreement table rows differ in category count");
    int total = 0;
    for (const int c : row) {
      if (c < 0) throw std::invalid_argument("agreement counts must be non-negative");
      total += c;
    }
    if (raters_ == -1) raters_ = total;
    if (total != raters_) throw std::invalid_argument("every item needs the same number of raters");
  }
  if (raters_ < 2) throw std::invalid_argument("agreement needs at least two raters per item");
}

AgreementTable AgreementTable::from_labels(const std::vector<std::vector<int>>& labels_per_item, int categories) {
  std::vector<std::vector<int>> counts;
  for (const auto& labels : labels_per_item) {
    std::vector<int> row(static_cast<std::size_t>(categories), 0);
    for (const int l : labels) {
      if (l < 0 || l >= categories) throw std::invalid_argument("label out of range");
      ++row[static_cast<std::size_t>(l)];
    }
    counts.push_back(std::move(row));
  }
  return AgreementTable(std::move(counts));
}

KappaResult fleiss_kappa(const AgreementTable& table) {
  const double n = table.raters();
  const double items = static_cast<double>(table.items());
  std::vector<double> marginal(table.categories(), 0.0);
  double mean_agreement = 0.0;
  for (const auto& row : table.counts()) {
    double sq = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      sq += static_cast<double>(row[j]) * row[j];
      marginal[j] += row[j];
    }
    mean_agreement += (sq - n) / (n * (n - 1.0));
  }
  mean_agreement /= items;
  double chance = 0.0;
  for (const double m : marginal) {
    const double p = m / (items * n);
    chance += p * p;
  }
  if (chance >= 1.0) return PerfectDegenerate{};
  return (mean_agreement - chance) / (1.0 - chance);
}

void BallotBox::add(const JudgmentBallot& ballot) {
  std::lock_guard lock(mutex_);
  const auto key = std::make_tuple(ballot.pair_id, ballot.presentation_order, ballot.rater_id);
  const auto [it, inserted] = entries_.try_emplace(key, ballot.verdict);
  if (!inserted && it->second != ballot.verdict) {
    throw std::invalid_argument("conflicting ballot for pair '" + ballot.pair_id + "' order " +
                                std::string(to_string(ballot.presentation_order)) + " rater '" + ballot.rater_id +
                                "'");
  }
}

std::vector<JudgmentBallot> BallotBox::ballots() const {
  std::lock_guard lock(mutex_);
  std::vector<JudgmentBallot> out;
  for (const auto& [key, verdict] : entries_) {
    out.push_back({std::get<0>(key), std::get<1>(key), verdict, std::get<2>(key)});
  }
  return out;
}

void to_json(nlohmann::json& j, const JudgmentBallot& b) {
  j = nlohmann::json{{"pair_id", b.pair_id},
                     {"presentation_order", to_string(b.presentation_order)},
                     {"verdict", to_string(b.verdict)},
                     {"rater_id", b.rater_id}};
}

void from_json(const nlohmann::json& j, JudgmentBallot& b) {
  j.at("pair_id").get_to(b.pair_id);
  j.at("rater_id").get_to(b.rater_id);
  const auto order = parse_order(j.at("presentation_order").get<std::string>());
  const auto verdict = parse_verdict(j.at("verdict").get<std::string>());
  if (!order) throw std::invalid_argument("ballot: presentation_order must be AB or BA");
  if (!verdict) throw std::invalid_argument("ballot: verdict must be first, second or tie");
  b.presentation_order = *order;
  b.verdict = *verdict;
}

std::vector<JudgmentBallot> read_ballots(std::istream& in) {
  std::vector<JudgmentBallot> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<JudgmentBallot>());
    } catch (const std::exception& e) {
      throw std::invalid_argument("ballot line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_ballots(std::ostream& out, const std::vector<JudgmentBallot>& ballots) {
  for (const auto& b : ballots) out << nlohmann::json(b).dump() << '\n';
}

EvalReport evaluate_ballots(const std::vector<JudgmentBallot>& ballots) {
  BallotBox box;
  for (const auto& b : ballots) box.add(b);

  // rater -> pair -> [AB verdict, BA verdict]
  std::map<std::string, std::map<std::string, std::pair<std::optional<Verdict>, std::optional<Verdict>>>> by_rater;
  for (const auto& b : box.ballots()) {
    auto& slot = by_rater[b.rater_id][b.pair_id];
    (b.presentation_order == Order::AB ? slot.first : slot.second) = b.verdict;
  }

  EvalReport report;
  std::vector<PairOutcome> pooled;
  std::map<std::string, std::map<std::string, Outcome>> outcomes;  // pair -> rater -> outcome
  std::set<std::string> incomplete;
  for (const auto& [rater, pairs] : by_rater) {
    std::vector<PairOutcome> mine;
    for (const auto& [pair, verdicts] : pairs) {
      if (!verdicts.first || !verdicts.second) {
        incomplete.insert(pair);
        continue;
      }
      auto o = debias_pair(pair, *verdicts.first, *verdicts.second);
      outcomes[pair][rater] = o.outcome;
      mine.push_back(o);
      pooled.push_back(std::move(o));
    }
    if (!mine.empty()) report.per_rater[rater] = aggregate(mine);
  }
  if (pooled.empty()) throw std::invalid_argument("no pair was judged in both orders");
  report.pooled = aggregate(pooled);
  report.incomplete_pairs.assign(incomplete.begin(), incomplete.end());

  if (by_rater.size() >= 2) {
    std::vector<std::vector<int>> labels;
    for (const auto& [pair, per_rater] : outcomes) {
      if (per_rater.size() != by_rater.size()) continue;
      std::vector<int> row;
      for (const auto& [rater, o] : per_rater) row.push_back(static_cast<int>(o));
      labels.push_back(std::move(row));
    }
    if (labels.size() >= 2) {
      report.kappa = fleiss_kappa(AgreementTable::from_labels(labels, 3));
      report.kappa_items = labels.size();
    }
  }
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  const auto agg = [](const Aggregate& a) {
    return nlohmann::json{{"wins", a.wins},       {"losses", a.losses},     {"ties", a.ties},
                          {"win_pct", a.win_pct}, {"loss_pct", a.loss_pct}, {"tie_pct", a.tie_pct},
                          {"net_win_pct", a.net_win_pct}};
  };
  nlohmann::json j;
  j["pooled"] = agg(report.pooled);
  j["per_rater"] = nlohmann::json::object();
  for (const auto& [rater, a] : report.per_rater) j["per_rater"][rater] = agg(a);
  if (report.kappa) {
    if (const auto* k = std::get_if<double>(&*report.kappa)) {
      j["fleiss_kappa"] = *k;
    } else {
      j["fleiss_kappa"] = "perfect_degenerate";
    }
    j["kappa_items"] = report.kappa_items;
  } else {
    j["fleiss_kappa"] = nullptr;
  }
  j["incomplete_pairs"] = report.incomplete_pairs;
  return j;
}

}  // namespace rewardkit::eval
