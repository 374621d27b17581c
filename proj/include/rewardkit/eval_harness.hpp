#pragma once

// Pairwise model comparison: judge prompts, order-swapped double evaluation,
// win/loss/tie aggregation and Fleiss' kappa.

#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace rewardkit::eval {

enum class Order { AB, BA };
enum class Verdict { first, second, tie };
enum class Outcome { win, loss, tie };  // from model A's point of view

std::string_view to_string(Order o);
std::string_view to_string(Verdict v);
std::string_view to_string(Outcome o);
std::optional<Order> parse_order(std::string_view s);
std::optional<Verdict> parse_verdict(std::string_view s);

struct JudgmentBallot {
  std::string pair_id;
  Order presentation_order = Order::AB;
  Verdict verdict = Verdict::tie;
  std::string rater_id;
};

struct PairOutcome {
  std::string pair_id;
  Outcome outcome = Outcome::tie;
};

// --- prompt and reply --------------------------------------------------------

/// Throws std::invalid_argument when either response is empty.
std::string build_judge_prompt(std::string_view chat_history, std::string_view response_a,
                               std::string_view response_b);

class JudgeParseError : public std::runtime_error {
 public:
  explicit JudgeParseError(std::string reply)
      : std::runtime_error("judge reply has no final 'VERDICT: FIRST|SECOND|TIE' line"), reply_(std::move(reply)) {}
  const std::string& reply() const { return reply_; }

 private:
  std::string reply_;
};

/// The last non-blank line must read "VERDICT: FIRST", "VERDICT: SECOND" or
/// "VERDICT: TIE". Anything else throws JudgeParseError.
Verdict parse_judge_reply(std::string_view reply);

// --- transport ---------------------------------------------------------------

struct JudgeRequest {
  std::string pair_id;
  Order order = Order::AB;
  std::string prompt;
};

class JudgeTransport {
 public:
  virtual ~JudgeTransport() = default;
  virtual std::string complete(const JudgeRequest& request) = 0;
};

/// Canned replies. The fixture is a JSON object keyed by pair_id whose values
/// are either one reply used for both orders or {"AB": reply, "BA": reply}.
class ReplayTransport final : public JudgeTransport {
 public:
  explicit ReplayTransport(const nlohmann::json& fixture);
  static ReplayTransport load(const std::string& path);
  std::string complete(const JudgeRequest& request) override;

 private:
  std::map<std::pair<std::string, Order>, std::string> replies_;
};

struct ComparisonItem {
  std::string pair_id;
  std::string chat_history;
  std::string response_a;
  std::string response_b;
};

/// Judges every item twice, once per order, and returns the two ballots.
std::vector<JudgmentBallot> judge_pairs(const std::vector<ComparisonItem>& items, JudgeTransport& transport,
                                        const std::string& rater_id);

// --- aggregation -------------------------------------------------------------

/// Both verdicts favour A -> win, both favour B -> loss, anything else -> tie.
PairOutcome debias_pair(std::string_view pair_id, Verdict verdict_ab, Verdict verdict_ba);
Outcome debias(Verdict verdict_ab, Verdict verdict_ba);

/// Relabels a ballot as if the two models had been swapped.
JudgmentBallot swap_models(const JudgmentBallot& ballot);

struct Aggregate {
  std::size_t wins = 0;
  std::size_t losses = 0;
  std::size_t ties = 0;
  double win_pct = 0.0;
  double loss_pct = 0.0;
  double tie_pct = 0.0;
  double net_win_pct = 0.0;
};

/// Throws std::invalid_argument on an empty list.
Aggregate aggregate(const std::vector<PairOutcome>& outcomes);

// --- agreement ---------------------------------------------------------------

/// items x categories count matrix with the same rater count on every row.
class AgreementTable {
 public:
  explicit AgreementTable(std::vector<std::vector<int>> counts);
  static AgreementTable from_labels(const std::vector<std::vector<int>>& labels_per_item, int categories);

  std::size_t items() const { return counts_.size(); }
  std::size_t categories() const { return counts_.front().size(); }
  int raters() const { return raters_; }
  const std::vector<std::vector<int>>& counts() const { return counts_; }

 private:
  std::vector<std::vector<int>> counts_;
  int raters_ = 0;
};

/// Every rating fell in one category on every item; chance agreement is 1 and
/// kappa is undefined.
struct PerfectDegenerate {};

using KappaResult = std::variant<double, PerfectDegenerate>;

KappaResult fleiss_kappa(const AgreementTable& table);

// --- ballots -----------------------------------------------------------------

/// Concurrent-append-safe ballot store keyed by (pair, order, rater).
/// Re-adding an identical ballot is a no-op; a conflicting verdict throws.
class BallotBox {
 public:
  void add(const JudgmentBallot& ballot);
  std::vector<JudgmentBallot> ballots() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::tuple<std::string, Order, std::string>, Verdict> entries_;
};

void to_json(nlohmann::json& j, const JudgmentBallot& b);
void from_json(const nlohmann::json& j, JudgmentBallot& b);

std::vector<JudgmentBallot> read_ballots(std::istream& in);
void write_ballots(std::ostream& out, const std::vector<JudgmentBallot>& ballots);

struct EvalReport {
  std::map<std::string, Aggregate> per_rater;
  Aggregate pooled;
  std::optional<KappaResult> kappa;  // only with two or more raters
  std::size_t kappa_items = 0;
  std::vector<std::string> incomplete_pairs;  // missing one of the two orders
};

/// Debiases each rater's ballots per pair, aggregates per rater and pooled,
/// and computes kappa over pairs every rater judged in both orders.
EvalReport evaluate_ballots(const std::vector<JudgmentBallot>& ballots);

nlohmann::json to_json(const EvalReport& report);

}  // namespace rewardkit::eval
