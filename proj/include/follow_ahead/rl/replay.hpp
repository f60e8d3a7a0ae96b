#pragma once

#include <cmath>
#include <deque>
#include <mutex>
#include <random>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "follow_ahead/sim.hpp"

namespace follow_ahead::rl {

inline constexpr std::size_t kMaxActionSize = 2;

struct Transition {
  Observation obs{};
  std::array<double, kMaxActionSize> action{};
  double reward = 0.0;  // n-step discounted return
  Observation next_obs{};
  bool done = false;  // true only on a real termination, not on horizon cut
  int n = 1;          // steps actually summed; bootstrap uses gamma^n

  bool valid(std::size_t action_size) const {
    if (!std::isfinite(reward) || n < 1) return false;
    for (std::size_t i = 0; i < action_size; ++i) {
      if (!(std::abs(action[i]) <= 1.0)) return false;
    }
    return true;
  }
};

// Fixed-capacity ring with uniform sampling. Appends and samples lock the
// same mutex, so a sampled transition is always fully written.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
  }

  void add(const Transition& t) {
    std::lock_guard lock(mu_);
    if (data_.size() < capacity_) {
      data_.push_back(t);
    } else {
      data_[next_] = t;
    }
    next_ = (next_ + 1) % capacity_;
    ++total_added_;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return data_.size();
  }
  std::size_t capacity() const { return capacity_; }
  std::size_t total_added() const {
    std::lock_guard lock(mu_);
    return total_added_;
  }

  template <class Rng>
  std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const {
    std::lock_guard lock(mu_);
    return sample_indices_locked(batch, rng);
  }

  template <class Rng>
  std::vector<Transition> sample(std::size_t batch, Rng& rng) const {
    std::lock_guard lock(mu_);
    const auto idx = sample_indices_locked(batch, rng);
    std::vector<Transition> out;
    out.reserve(batch);
    for (auto i : idx) out.push_back(data_[i]);
    return out;
  }

 private:
  template <class Rng>
  std::vector<std::size_t> sample_indices_locked(std::size_t batch, Rng& rng) const {
    if (batch == 0 || data_.size() < batch) {
      throw std::logic_error(fmt::format("ReplayBuffer: {} stored, batch of {} requested", data_.size(), batch));
    }
    std::uniform_int_distribution<std::size_t> u(0, data_.size() - 1);
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = u(rng);
    return idx;
  }

  std::size_t capacity_;
  std::vector<Transition> data_;
  std::size_t next_ = 0;
  std::size_t total_added_ = 0;
  mutable std::mutex mu_;
};

// Turns a stream of one-step experiences into n-step transitions. A real
// termination flushes every pending step with done set; a horizon cut
// flushes them as bootstrapped (done unset) from the last observation.
class NStepAccumulator {
 public:
  NStepAccumulator(int n, double gamma) : n_(n), gamma_(gamma) {
    if (n < 1) throw std::invalid_argument("NStepAccumulator: n must be >= 1");
  }

  template <class Sink>
  void push(const Observation& obs, const std::array<double, kMaxActionSize>& action, double reward,
            const Observation& next_obs, bool terminal, bool truncated, Sink&& sink) {
    pending_.push_back({obs, action, reward});
    if (terminal || truncated) {
      while (!pending_.empty()) emit(next_obs, terminal, sink);
      return;
    }
    if (static_cast<int>(pending_.size()) == n_) emit(next_obs, false, sink);
  }

  void reset() { pending_.clear(); }
  std::size_t pending() const { return pending_.size(); }

 private:
  struct Step {
    Observation obs;
    std::array<double, kMaxActionSize> action;
    double reward;
  };

  template <class Sink>
  void emit(const Observation& next_obs, bool done, Sink& sink) {
    Transition t;
    t.obs = pending_.front().obs;
    t.action = pending_.front().action;
    double g = 1.0, ret = 0.0;
    for (const auto& s : pending_) {
      ret += g * s.reward;
      g *= gamma_;
    }
    t.reward = ret;
    t.next_obs = next_obs;
    t.done = done;
    t.n = static_cast<int>(pending_.size());
    pending_.pop_front();
    sink(t);
  }

  int n_;
  double gamma_;
  std::deque<Step> pending_;
};

}  // namespace follow_ahead::rl
