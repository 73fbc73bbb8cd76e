#include <algorithm>
#include <map>
#include <set>

#include "xwalk/errors.hpp"
#include "xwalk/stats.hpp"

namespace xwalk::stats {

std::size_t default_majority(std::size_t ballots) { return (ballots + 1) / 2; }

std::vector<BucklinEntry> rpss_aggregate(const std::vector<Ballot>& ballots, std::size_t majority) {
  if (ballots.empty()) throw DegenerateInput("rpss_aggregate: no ballots");
  if (majority < 1) throw DegenerateInput("rpss_aggregate: majority must be at least 1");
  const std::set<std::string> candidates(ballots.front().begin(), ballots.front().end());
  const std::size_t k = ballots.front().size();
  if (candidates.size() != k) throw DegenerateInput("rpss_aggregate: ballot 1 ranks a candidate twice");
  for (std::size_t b = 1; b < ballots.size(); ++b) {
    const std::set<std::string> seen(ballots[b].begin(), ballots[b].end());
    if (ballots[b].size() != k || seen != candidates) {
      throw DegenerateInput("rpss_aggregate: ballot " + std::to_string(b + 1) + " is not a ranking of the same candidates");
    }
  }

  std::map<std::string, BucklinEntry> entries;
  for (const auto& c : candidates) {
    BucklinEntry e;
    e.label = c;
    e.cumulative.assign(k, 0);
    entries.emplace(c, std::move(e));
  }
  for (const Ballot& ballot : ballots) {
    for (std::size_t pos = 0; pos < k; ++pos) {
      BucklinEntry& e = entries.at(ballot[pos]);
      e.borda += pos + 1;
      for (std::size_t r = pos; r < k; ++r) ++e.cumulative[r];
    }
  }
  std::vector<BucklinEntry> out;
  for (auto& [label, e] : entries) {
    for (std::size_t r = 0; r < k; ++r) {
      if (e.cumulative[r] >= majority) {
        e.elect_round = r + 1;
        e.votes_at_round = e.cumulative[r];
        break;
      }
    }
    if (!e.elect_round) e.votes_at_round = e.cumulative.back();
    out.push_back(std::move(e));
  }
  std::sort(out.begin(), out.end(), [k](const BucklinEntry& a, const BucklinEntry& b) {
    const std::size_t ra = a.elect_round.value_or(k + 1);
    const std::size_t rb = b.elect_round.value_or(k + 1);
    if (ra != rb) return ra < rb;
    if (a.votes_at_round != b.votes_at_round) return a.votes_at_round > b.votes_at_round;
    if (a.borda != b.borda) return a.borda < b.borda;
    return a.label < b.label;
  });
  return out;
}

}  // namespace xwalk::stats
