#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "follow_ahead/rl/actions.hpp"
#include "follow_ahead/rl/distribution.hpp"
#include "follow_ahead/rl/mlp.hpp"
#include "follow_ahead/rl/replay.hpp"

namespace follow_ahead::rl {

struct AgentConfig {
  std::vector<int> actor_hidden{64, 64};
  std::vector<int> critic_hidden{64, 64};
  int action_size = 2;
  Support support{-100.0, 100.0, 51};
  double gamma = 0.99;
  int n_step = 5;
  int batch_size = 64;
  std::size_t buffer_capacity = 100000;
  double tau = 5e-3;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double grad_clip = 40.0;

  void validate() const {
    support.validate();
    if (action_size < 1 || action_size > static_cast<int>(kMaxActionSize)) {
      throw std::invalid_argument("AgentConfig: action_size out of range");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("AgentConfig: gamma must be in (0, 1]");
    if (n_step < 1 || batch_size < 1) throw std::invalid_argument("AgentConfig: n_step and batch_size must be >= 1");
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("AgentConfig: tau must be in [0, 1]");
  }
};

struct Agent {
  Mlp actor, critic;
  Mlp actor_target, critic_target;
  Adam actor_opt, critic_opt;
  long long updates = 0;
};

template <class Rng>
Agent make_agent(const AgentConfig& cfg, Rng& rng) {
  cfg.validate();
  const int obs = static_cast<int>(kObservationSize);
  std::vector<int> a{obs};
  a.insert(a.end(), cfg.actor_hidden.begin(), cfg.actor_hidden.end());
  a.push_back(cfg.action_size);
  std::vector<int> c{obs + cfg.action_size};
  c.insert(c.end(), cfg.critic_hidden.begin(), cfg.critic_hidden.end());
  c.push_back(cfg.support.atoms);
  Agent ag;
  ag.actor = make_mlp(a, Activation::kRelu, Activation::kTanh, rng);
  ag.critic = make_mlp(c, Activation::kRelu, Activation::kLinear, rng);
  ag.actor_target = ag.actor;
  ag.critic_target = ag.critic;
  ag.actor_opt = Adam(ag.actor, {cfg.actor_lr});
  ag.critic_opt = Adam(ag.critic, {cfg.critic_lr});
  return ag;
}

inline Eigen::VectorXd to_vector(const Observation& o) {
  return Eigen::Map<const Eigen::VectorXd>(o.data(), static_cast<Eigen::Index>(o.size()));
}

inline Action actor_forward(const Mlp& actor, const Observation& obs) {
  const Eigen::VectorXd y = forward(actor, to_vector(obs));
  Action a{};
  for (Eigen::Index i = 0; i < y.size() && i < static_cast<Eigen::Index>(a.size()); ++i) a[i] = y[i];
  return a;
}

inline Eigen::MatrixXd critic_input(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& act) {
  Eigen::MatrixXd x(obs.rows() + act.rows(), obs.cols());
  x << obs, act;
  return x;
}

inline ValueDistribution critic_forward(const Mlp& critic, const Observation& obs, const Action& a,
                                        const Support& support) {
  const int k = static_cast<int>(critic.input_size()) - static_cast<int>(kObservationSize);
  if (k < 1 || k > static_cast<int>(a.size())) throw ShapeMismatch("critic_forward: bad critic input size");
  Eigen::VectorXd x(kObservationSize + k);
  x << to_vector(obs), Eigen::Map<const Eigen::VectorXd>(a.data(), k);
  return {support, softmax_columns(forward(critic, Eigen::MatrixXd(x))).col(0)};
}

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;  // minus the mean expected value
  double critic_grad_norm = 0.0;
  double actor_grad_norm = 0.0;
};

// Gradient of the expected value sum_i p_i z_i with respect to the logits.
inline Eigen::MatrixXd expected_value_grad(const Eigen::MatrixXd& probs, const Eigen::VectorXd& z) {
  Eigen::MatrixXd g(probs.rows(), probs.cols());
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    const double q = probs.col(j).dot(z);
    g.col(j) = probs.col(j).cwiseProduct((z.array() - q).matrix());
  }
  return g;
}

struct Batch {
  Eigen::MatrixXd obs, next_obs, actions;
  std::vector<const Transition*> items;
};

inline Batch make_batch(const std::vector<Transition>& batch, int action_size) {
  const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
  if (B == 0) throw std::invalid_argument("train_step: empty batch");
  const Eigen::Index D = static_cast<Eigen::Index>(kObservationSize);
  Batch b;
  b.obs.resize(D, B);
  b.next_obs.resize(D, B);
  b.actions.resize(action_size, B);
  for (Eigen::Index j = 0; j < B; ++j) {
    const Transition& t = batch[j];
    b.obs.col(j) = to_vector(t.obs);
    b.next_obs.col(j) = to_vector(t.next_obs);
    for (int i = 0; i < action_size; ++i) b.actions(i, j) = t.action[i];
    b.items.push_back(&t);
  }
  return b;
}

// Distributional critic step: cross-entropy toward the projected n-step
// target built from the target networks.
inline double critic_step(Agent& ag, const Batch& b, const AgentConfig& cfg, double* grad_norm = nullptr) {
  const Eigen::Index B = b.obs.cols();
  const Eigen::MatrixXd An = forward(ag.actor_target, b.next_obs);
  const Eigen::MatrixXd Pn = softmax_columns(forward(ag.critic_target, critic_input(b.next_obs, An)));
  Eigen::MatrixXd M(cfg.support.atoms, B);
  for (Eigen::Index j = 0; j < B; ++j) {
    const Transition& t = *b.items[j];
    M.col(j) = categorical_project(t.reward, t.done, Pn.col(j), std::pow(cfg.gamma, t.n), cfg.support);
  }
  MlpCache cache;
  const Eigen::MatrixXd P = softmax_columns(forward(ag.critic, critic_input(b.obs, b.actions), &cache));
  const double loss = -(M.array() * (P.array().max(1e-300)).log()).sum() / B;
  if (!std::isfinite(loss)) throw TrainingDiverged(fmt::format("critic loss {} at update {}", loss, ag.updates));
  Mlp g = backward(ag.critic, cache, (P - M) / static_cast<double>(B));
  const double n = clip_grad_norm(g, cfg.grad_clip);
  if (grad_norm) *grad_norm = n;
  ag.critic_opt.step(ag.critic, g);
  return loss;
}

// Gradient of minus the mean expected value E[Z(s, pi(s))] with respect to
// the actor's parameters, through the critic's action input.
inline Mlp actor_gradient(const Mlp& actor, const Mlp& critic, const Eigen::MatrixXd& obs, const Support& support,
                          double* loss = nullptr) {
  const Eigen::Index B = obs.cols();
  const Eigen::VectorXd z = support.values();
  MlpCache acache, ccache;
  const Eigen::MatrixXd A = forward(actor, obs, &acache);
  const Eigen::MatrixXd P = softmax_columns(forward(critic, critic_input(obs, A), &ccache));
  if (loss) *loss = -(z.transpose() * P).sum() / B;
  Eigen::MatrixXd gin;
  backward(critic, ccache, -expected_value_grad(P, z) / static_cast<double>(B), &gin);
  return backward(actor, acache, gin.bottomRows(A.rows()));
}

inline double actor_step(Agent& ag, const Eigen::MatrixXd& obs, const AgentConfig& cfg, double* grad_norm = nullptr) {
  double loss = 0.0;
  Mlp g = actor_gradient(ag.actor, ag.critic, obs, cfg.support, &loss);
  if (!std::isfinite(loss)) throw TrainingDiverged(fmt::format("actor loss {} at update {}", loss, ag.updates));
  const double n = clip_grad_norm(g, cfg.grad_clip);
  if (grad_norm) *grad_norm = n;
  ag.actor_opt.step(ag.actor, g);
  return loss;
}

// One learner update: critic, then actor against the updated critic, then
// both targets.
inline TrainStats train_step(Agent& ag, const std::vector<Transition>& batch, const AgentConfig& cfg) {
  const Batch b = make_batch(batch, cfg.action_size);
  TrainStats st;
  st.critic_loss = critic_step(ag, b, cfg, &st.critic_grad_norm);
  st.actor_loss = actor_step(ag, b.obs, cfg, &st.actor_grad_norm);
  soft_update(ag.critic_target, ag.critic, cfg.tau);
  soft_update(ag.actor_target, ag.actor, cfg.tau);
  ++ag.updates;
  if (!ag.actor.finite() || !ag.critic.finite()) {
    throw TrainingDiverged(fmt::format("non-finite parameters after update {}", ag.updates));
  }
  return st;
}

}  // namespace follow_ahead::rl
