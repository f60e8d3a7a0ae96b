#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <tuple>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "follow_ahead/reward.hpp"
#include "follow_ahead/sim.hpp"

namespace follow_ahead {

struct MetricsRow {
  std::string scenario;
  std::string controller;
  int episodes = 0;
  int steps = 0;
  double d_mean = 0.0, d_std = 0.0;
  double alpha_mean = 0.0, alpha_std = 0.0;  // degrees
  double reward = 0.0;             // accumulated, mean over episodes
  double reward_std = 0.0;         // across episodes
  double reward_discounted = 0.0;  // mean over episodes
  std::string termination;         // most frequent reason
  int too_close = 0;               // episodes ended by too_close
};

class EmptyLog : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

inline int severity(Termination t) {
  switch (t) {
    case Termination::kTooClose: return 3;
    case Termination::kTooFar: return 2;
    case Termination::kHorizon: return 1;
    case Termination::kContinue: return 0;
  }
  return 0;
}

}  // namespace detail

// Pools the steps of all episodes for the D and alpha statistics (population
// std); rewards are summed per episode and averaged over episodes.
inline MetricsRow aggregate_metrics(const std::vector<EpisodeLog>& logs, double gamma = 0.99) {
  if (logs.empty()) throw EmptyLog("metrics: no episodes");
  MetricsRow row;
  row.scenario = logs.front().meta_value("scenario");
  row.controller = logs.front().meta_value("controller");
  std::vector<double> d, a, rewards, discounted;
  std::map<Termination, int> ends;
  for (const auto& log : logs) {
    if (log.records.empty()) throw EmptyLog("metrics: empty episode log");
    double sum = 0.0, disc = 0.0, g = 1.0;
    for (const auto& r : log.records) {
      d.push_back(r.distance);
      a.push_back(r.alpha_deg);
      sum += r.reward;
      disc += g * r.reward;
      g *= gamma;
    }
    rewards.push_back(sum);
    discounted.push_back(disc);
    ++ends[log.records.back().terminal];
  }
  row.episodes = static_cast<int>(logs.size());
  row.steps = static_cast<int>(d.size());
  std::tie(row.d_mean, row.d_std) = detail::mean_std(d);
  std::tie(row.alpha_mean, row.alpha_std) = detail::mean_std(a);
  std::tie(row.reward, row.reward_std) = detail::mean_std(rewards);
  row.reward_discounted = detail::mean_std(discounted).first;
  Termination best = ends.begin()->first;
  for (const auto& [t, n] : ends) {
    const int bn = ends[best];
    if (n > bn || (n == bn && detail::severity(t) > detail::severity(best))) best = t;
  }
  row.termination = std::string(to_string(best));
  row.too_close = ends.count(Termination::kTooClose) ? ends.at(Termination::kTooClose) : 0;
  return row;
}

inline MetricsRow compute_metrics(const EpisodeLog& log, double gamma = 0.99) {
  return aggregate_metrics(std::vector<EpisodeLog>{log}, gamma);
}

// Groups logs by (scenario, controller) meta, preserving first appearance.
inline std::vector<MetricsRow> metrics_by_pair(const std::vector<EpisodeLog>& logs, double gamma = 0.99) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<EpisodeLog>> groups;
  for (const auto& l : logs) {
    const auto key = std::make_pair(l.meta_value("scenario"), l.meta_value("controller"));
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(l);
  }
  std::vector<MetricsRow> rows;
  for (const auto& k : order) rows.push_back(aggregate_metrics(groups[k], gamma));
  return rows;
}

inline constexpr const char* kTableHeader =
    "scenario,controller,episodes,steps,D_mean,D_std,alpha_mean_deg,alpha_std_deg,reward,reward_std,"
    "reward_discounted,termination,too_close";

// Rows sorted by scenario then controller; one row per pair.
inline void emit_table(std::ostream& out, std::vector<MetricsRow> rows) {
  if (rows.empty()) throw std::invalid_argument("emit_table: no rows");
  std::stable_sort(rows.begin(), rows.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return std::tie(a.scenario, a.controller) < std::tie(b.scenario, b.controller);
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].scenario == rows[i - 1].scenario && rows[i].controller == rows[i - 1].controller) {
      throw std::invalid_argument(fmt::format("emit_table: duplicate row {}/{}", rows[i].scenario, rows[i].controller));
    }
  }
  auto num = [](double x) {
    const std::string s = fmt::format("{:.4f}", x);
    return s == "-0.0000" ? std::string("0.0000") : s;
  };
  out << kTableHeader << "\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.scenario, r.controller, r.episodes, r.steps,
                       num(r.d_mean), num(r.d_std), num(r.alpha_mean), num(r.alpha_std), num(r.reward),
                       num(r.reward_std), num(r.reward_discounted), r.termination, r.too_close);
  }
}

inline void emit_table(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  emit_table(out, rows);
}

inline std::string log_file_name(const EpisodeLog& log) {
  std::string s = log.meta_value("scenario") + "__" + log.meta_value("controller") + "__seed" + log.meta_value("seed");
  std::replace(s.begin(), s.end(), '/', '-');
  return s + ".csv";
}

inline void save_episode_log(const EpisodeLog& log, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_episode_log(out, log);
}

inline EpisodeLog load_episode_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("episode log not found: " + path.string());
  return read_episode_log(in);
}

}  // namespace follow_ahead
