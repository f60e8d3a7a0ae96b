#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "follow_ahead/rl/actions.hpp"
#include "follow_ahead/rl/d4pg.hpp"

namespace follow_ahead::rl {

// Binary checkpoint, little-endian:
//
//   char[8]  "FAHCKPT\0"
//   u32      version (1)
//   u32      policy kind (0 goal, 1 velocity)
//   i64      training step (env steps)
//   i64      learner updates
//   i32      curriculum level
//   f64 f64 i32   value support v_min, v_max, atoms
//   u32 + bytes   rng state (std::mt19937_64 text form)
//   u32      net count (4: actor, critic, actor target, critic target)
//   per net: u32 layer count, then per layer
//            u32 rows, u32 cols, u32 activation, rows*cols f64 (column-major), rows f64 bias

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kCheckpointMagic[8] = {'F', 'A', 'H', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  PolicyKind kind = PolicyKind::kGoal;
  long long step = 0;
  long long updates = 0;
  int level = 1;
  Support support;
  std::string rng_state;
  Mlp actor, critic, actor_target, critic_target;
};

namespace detail {

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw CheckpointError("checkpoint truncated");
  return v;
}

inline void put_net(std::ostream& out, const Mlp& net) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.layers.size()));
  for (const auto& l : net.layers) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(l.w.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(l.w.cols()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(l.act));
    out.write(reinterpret_cast<const char*>(l.w.data()), static_cast<std::streamsize>(l.w.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(l.b.data()), static_cast<std::streamsize>(l.b.size() * sizeof(double)));
  }
}

inline Mlp get_net(std::istream& in) {
  Mlp net;
  const auto n = get<std::uint32_t>(in);
  if (n == 0 || n > 64) throw CheckpointError(fmt::format("implausible layer count {}", n));
  std::uint32_t prev_rows = 0;
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto rows = get<std::uint32_t>(in);
    const auto cols = get<std::uint32_t>(in);
    const auto act = get<std::uint32_t>(in);
    if (rows == 0 || cols == 0 || rows > (1u << 16) || cols > (1u << 16) || act > 2) {
      throw CheckpointError(fmt::format("bad layer header {}x{} act {}", rows, cols, act));
    }
    if (i > 0 && cols != prev_rows) throw CheckpointError("layer shapes do not chain");
    prev_rows = rows;
    Layer l;
    l.w.resize(rows, cols);
    l.b.resize(rows);
    l.act = static_cast<Activation>(act);
    in.read(reinterpret_cast<char*>(l.w.data()), static_cast<std::streamsize>(l.w.size() * sizeof(double)));
    in.read(reinterpret_cast<char*>(l.b.data()), static_cast<std::streamsize>(l.b.size() * sizeof(double)));
    if (!in) throw CheckpointError("checkpoint truncated inside layer data");
    net.layers.push_back(std::move(l));
  }
  if (!net.finite()) throw CheckpointError("non-finite parameters");
  return net;
}

}  // namespace detail

inline void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put<std::uint32_t>(out, kCheckpointVersion);
  detail::put<std::uint32_t>(out, c.kind == PolicyKind::kGoal ? 0u : 1u);
  detail::put<std::int64_t>(out, c.step);
  detail::put<std::int64_t>(out, c.updates);
  detail::put<std::int32_t>(out, c.level);
  detail::put<double>(out, c.support.v_min);
  detail::put<double>(out, c.support.v_max);
  detail::put<std::int32_t>(out, c.support.atoms);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(c.rng_state.size()));
  out.write(c.rng_state.data(), static_cast<std::streamsize>(c.rng_state.size()));
  detail::put<std::uint32_t>(out, 4u);
  for (const Mlp* n : {&c.actor, &c.critic, &c.actor_target, &c.critic_target}) detail::put_net(out, *n);
}

inline Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::string(magic, 8) != std::string(kCheckpointMagic, 8)) throw CheckpointError("not a checkpoint");
  const auto version = detail::get<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw CheckpointError(fmt::format("unsupported checkpoint version {}", version));
  Checkpoint c;
  const auto kind = detail::get<std::uint32_t>(in);
  if (kind > 1) throw CheckpointError("bad policy kind");
  c.kind = kind == 0 ? PolicyKind::kGoal : PolicyKind::kVelocity;
  c.step = detail::get<std::int64_t>(in);
  c.updates = detail::get<std::int64_t>(in);
  c.level = detail::get<std::int32_t>(in);
  c.support.v_min = detail::get<double>(in);
  c.support.v_max = detail::get<double>(in);
  c.support.atoms = detail::get<std::int32_t>(in);
  const auto rng_len = detail::get<std::uint32_t>(in);
  if (rng_len > (1u << 20)) throw CheckpointError("implausible rng state length");
  c.rng_state.resize(rng_len);
  in.read(c.rng_state.data(), rng_len);
  if (!in) throw CheckpointError("checkpoint truncated in rng state");
  const auto nets = detail::get<std::uint32_t>(in);
  if (nets != 4) throw CheckpointError(fmt::format("expected 4 nets, found {}", nets));
  c.actor = detail::get_net(in);
  c.critic = detail::get_net(in);
  c.actor_target = detail::get_net(in);
  c.critic_target = detail::get_net(in);
  return c;
}

inline void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError(fmt::format("cannot write {}", path.string()));
  write_checkpoint(out, c);
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(fmt::format("checkpoint not found: {}", path.string()));
  return read_checkpoint(in);
}

}  // namespace follow_ahead::rl
