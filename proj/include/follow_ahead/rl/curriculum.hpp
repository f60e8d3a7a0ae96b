#pragma once

#include <array>
#include <deque>
#include <numeric>
#include <stdexcept>

namespace follow_ahead::rl {

struct CurriculumConfig {
  std::array<double, 3> thresholds{25.0, 18.0, 14.0};   // for levels 1..3
  std::array<long long, 3> budgets{100000, 150000, 200000};  // env steps spent at levels 1..3
  std::size_t window = 50;
};

struct CurriculumState {
  int level = 1;
  long long steps_at_level = 0;
  std::deque<double> recent;  // exploiter episode rewards at this level

  void record_episode(double reward, std::size_t window) {
    recent.push_back(reward);
    while (recent.size() > window) recent.pop_front();
  }
  double moving_average() const {
    return recent.empty() ? 0.0 : std::accumulate(recent.begin(), recent.end(), 0.0) / recent.size();
  }
};

// Next level: promote when a full window averages at least the level's
// threshold, or when the level's step budget is spent. Never demotes.
inline int curriculum_advance(const CurriculumState& s, const CurriculumConfig& cfg) {
  if (s.level < 1 || s.level > 4) throw std::invalid_argument("curriculum_advance: level outside 1..4");
  if (s.level == 4) return 4;
  const auto i = static_cast<std::size_t>(s.level - 1);
  const bool good = s.recent.size() >= cfg.window && s.moving_average() >= cfg.thresholds[i];
  const bool spent = s.steps_at_level >= cfg.budgets[i];
  return good || spent ? s.level + 1 : s.level;
}

// Applies curriculum_advance and resets the per-level statistics on a
// promotion. Returns true when the level changed.
inline bool curriculum_update(CurriculumState& s, const CurriculumConfig& cfg) {
  const int next = curriculum_advance(s, cfg);
  if (next == s.level) return false;
  s.level = next;
  s.steps_at_level = 0;
  s.recent.clear();
  return true;
}

}  // namespace follow_ahead::rl
