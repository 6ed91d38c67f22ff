#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "lodlog/rational.hpp"

namespace lodlog {

// The analyst's trust preferences: which labels score 1 per analyzer,
// the acceptance threshold, and the roster of analyzers that divide the
// degree (the formula's parameter count).
struct TrustPolicy {
  std::map<std::string, std::set<std::string>> favorable;
  Rational threshold{3, 4};
  std::vector<std::string> roster;

  // Eleven-analyzer roster with the favorable sets that reproduce the
  // published worked examples at threshold 0.75.
  static TrustPolicy default_policy();

  // Throws std::runtime_error when a roster analyzer lacks a favorable
  // set, the roster is empty, a label is outside its analyzer's
  // vocabulary, or the threshold leaves [0,1].
  void validate() const;
};

// Lines: "threshold <decimal>", "favorable <analyzer> <label,...>",
// "roster <analyzer,...>".
TrustPolicy parse_trust_policy(std::string_view content);
TrustPolicy load_trust_policy(const std::string& path);
std::string trust_policy_to_text(const TrustPolicy& policy);

struct TrustVerdict {
  Rational degree{0, 1};
  bool accepted = false;
  std::map<std::string, int> contributions;  // analyzer -> 0|1
};

// Uniform average of per-analyzer 0/1 scores; acceptance is strict
// (degree > threshold). A missing roster annotation is an error, never
// a silent zero.
TrustVerdict compute_trust(const std::map<std::string, std::string>& annotations,
                           const TrustPolicy& policy);

struct TrustStatistics {
  Rational mean{0, 1};
  Rational min{0, 1};
  Rational max{0, 1};
  Rational accepted_fraction{0, 1};
};

// Exact statistics over a non-empty verdict set.
TrustStatistics trust_statistics(const std::vector<TrustVerdict>& verdicts);

} // namespace lodlog
