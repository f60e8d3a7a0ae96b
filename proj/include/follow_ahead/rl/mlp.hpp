#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace follow_ahead::rl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { kLinear, kRelu, kTanh };

inline const char* to_string(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "?";
}

class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Layer {
  Matrix w;  // out x in
  Vector b;
  Activation act = Activation::kLinear;
};

// Fully connected net; samples are columns.
struct Mlp {
  std::vector<Layer> layers;

  std::size_t input_size() const { return layers.empty() ? 0 : layers.front().w.cols(); }
  std::size_t output_size() const { return layers.empty() ? 0 : layers.back().w.rows(); }
  std::vector<int> sizes() const {
    std::vector<int> s;
    if (layers.empty()) return s;
    s.push_back(static_cast<int>(layers.front().w.cols()));
    for (const auto& l : layers) s.push_back(static_cast<int>(l.w.rows()));
    return s;
  }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }
  bool finite() const {
    for (const auto& l : layers) {
      if (!l.w.allFinite() || !l.b.allFinite()) return false;
    }
    return true;
  }
};

// Hidden layers use `hidden`, the last layer `output`. Weights are drawn
// uniform in +-1/sqrt(fan_in); the last layer is scaled down by
// `final_scale` so fresh policies start near the centre of the action box.
template <class Rng>
Mlp make_mlp(const std::vector<int>& sizes, Activation hidden, Activation output, Rng& rng,
             double final_scale = 1e-3) {
  if (sizes.size() < 2) throw ShapeMismatch("make_mlp: need at least input and output sizes");
  Mlp net;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    if (sizes[i] <= 0 || sizes[i + 1] <= 0) throw ShapeMismatch("make_mlp: layer sizes must be positive");
    const bool last = i + 2 == sizes.size();
    const double lim = (last ? final_scale : 1.0) / std::sqrt(static_cast<double>(sizes[i]));
    std::uniform_real_distribution<double> u(-lim, lim);
    Layer l;
    l.w.resize(sizes[i + 1], sizes[i]);
    l.b.resize(sizes[i + 1]);
    for (Eigen::Index k = 0; k < l.w.size(); ++k) l.w.data()[k] = u(rng);
    for (Eigen::Index k = 0; k < l.b.size(); ++k) l.b[k] = last ? 0.0 : u(rng);
    l.act = last ? output : hidden;
    net.layers.push_back(std::move(l));
  }
  return net;
}

inline Mlp zeros_like(const Mlp& net) {
  Mlp z = net;
  for (auto& l : z.layers) {
    l.w.setZero();
    l.b.setZero();
  }
  return z;
}

inline void check_same_shape(const Mlp& a, const Mlp& b, const char* what) {
  if (a.layers.size() != b.layers.size()) throw ShapeMismatch(fmt::format("{}: layer count differs", what));
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    if (a.layers[i].w.rows() != b.layers[i].w.rows() || a.layers[i].w.cols() != b.layers[i].w.cols()) {
      throw ShapeMismatch(fmt::format("{}: layer {} shape differs", what, i));
    }
  }
}

// Per-layer outputs kept for the backward pass. outputs[0] is the input.
struct MlpCache {
  std::vector<Matrix> outputs;
};

namespace detail {

inline void activate(Matrix& z, Activation a) {
  switch (a) {
    case Activation::kLinear: break;
    case Activation::kRelu: z = z.cwiseMax(0.0); break;
    case Activation::kTanh: z = z.array().tanh().matrix(); break;
  }
}

// d(out)/d(pre) expressed through the activation's output
inline void activation_backward(Matrix& g, const Matrix& out, Activation a) {
  switch (a) {
    case Activation::kLinear: break;
    case Activation::kRelu: g = (out.array() > 0.0).select(g, 0.0); break;
    case Activation::kTanh: g = (g.array() * (1.0 - out.array().square())).matrix(); break;
  }
}

}  // namespace detail

inline Matrix forward(const Mlp& net, const Matrix& x, MlpCache* cache = nullptr) {
  if (net.layers.empty()) throw ShapeMismatch("forward: empty net");
  if (static_cast<std::size_t>(x.rows()) != net.input_size()) {
    throw ShapeMismatch(fmt::format("forward: input has {} rows, net expects {}", x.rows(), net.input_size()));
  }
  if (cache) {
    cache->outputs.clear();
    cache->outputs.push_back(x);
  }
  Matrix h = x;
  for (const auto& l : net.layers) {
    Matrix z = l.w * h;
    z.colwise() += l.b;
    detail::activate(z, l.act);
    h = std::move(z);
    if (cache) cache->outputs.push_back(h);
  }
  return h;
}

inline Vector forward(const Mlp& net, const Vector& x) { return forward(net, Matrix(x)).col(0); }

// Parameter gradients of sum_j <grad_out_j, net(x_j)> and, optionally, the
// gradient with respect to the input.
inline Mlp backward(const Mlp& net, const MlpCache& cache, const Matrix& grad_out, Matrix* grad_in = nullptr) {
  if (cache.outputs.size() != net.layers.size() + 1) throw ShapeMismatch("backward: cache does not match net");
  const Matrix& y = cache.outputs.back();
  if (grad_out.rows() != y.rows() || grad_out.cols() != y.cols()) {
    throw ShapeMismatch(fmt::format("backward: output gradient is {}x{}, expected {}x{}", grad_out.rows(),
                                    grad_out.cols(), y.rows(), y.cols()));
  }
  Mlp grads = net;
  Matrix g = grad_out;
  for (std::size_t i = net.layers.size(); i-- > 0;) {
    const Layer& l = net.layers[i];
    detail::activation_backward(g, cache.outputs[i + 1], l.act);
    grads.layers[i].w.noalias() = g * cache.outputs[i].transpose();
    grads.layers[i].b = g.rowwise().sum();
    if (i > 0 || grad_in) g = l.w.transpose() * g;
  }
  if (grad_in) *grad_in = std::move(g);
  return grads;
}

inline double squared_norm(const Mlp& g) {
  double s = 0.0;
  for (const auto& l : g.layers) s += l.w.squaredNorm() + l.b.squaredNorm();
  return s;
}

// Rescales g so its global L2 norm is at most max_norm; returns the norm
// before clipping.
inline double clip_grad_norm(Mlp& g, double max_norm) {
  const double n = std::sqrt(squared_norm(g));
  if (max_norm > 0.0 && n > max_norm) {
    const double k = max_norm / n;
    for (auto& l : g.layers) {
      l.w *= k;
      l.b *= k;
    }
  }
  return n;
}

// target <- tau * online + (1 - tau) * target
inline void soft_update(Mlp& target, const Mlp& online, double tau) {
  check_same_shape(target, online, "soft_update");
  for (std::size_t i = 0; i < target.layers.size(); ++i) {
    target.layers[i].w = tau * online.layers[i].w + (1.0 - tau) * target.layers[i].w;
    target.layers[i].b = tau * online.layers[i].b + (1.0 - tau) * target.layers[i].b;
  }
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected first/second moment optimizer.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, AdamConfig cfg) : cfg_(cfg), m_(zeros_like(net)), v_(zeros_like(net)) {}

  void step(Mlp& net, const Mlp& grad) {
    check_same_shape(net, grad, "Adam::step");
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto upd = [&](auto& p, auto& m, auto& v, const auto& g) {
      m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
      v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
      p.array() -= cfg_.lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.eps);
    };
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      upd(net.layers[i].w, m_.layers[i].w, v_.layers[i].w, grad.layers[i].w);
      upd(net.layers[i].b, m_.layers[i].b, v_.layers[i].b, grad.layers[i].b);
    }
  }

  long long steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  const Mlp& first_moment() const { return m_; }
  const Mlp& second_moment() const { return v_; }
  void restore(long long t, Mlp m, Mlp v) {
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  AdamConfig cfg_;
  Mlp m_, v_;
  long long t_ = 0;
};

}  // namespace follow_ahead::rl
