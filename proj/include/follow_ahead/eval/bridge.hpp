#pragma once

#include <chrono>
#include <climits>
#include <cstdio>
#include <cmath>
#include <deque>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "follow_ahead/eval/config.hpp"
#include "follow_ahead/eval/controllers.hpp"
#include "follow_ahead/recording.hpp"
#include "follow_ahead/reward.hpp"
#include "follow_ahead/sim.hpp"

namespace follow_ahead {

// Protocol, one JSON object per websocket text message.
//
// server -> client
//   {"type":"frame","step":n,"human":{"x","y","phi"},"robot":{"x","y","phi"},
//    "D":d,"alpha_deg":a,"reward":r,"goal":{"x","y"}|null,
//    "controller":name,"recording":bool,"terminal":reason}
//   {"type":"record","status":"started"|"saved","name":...[,"path","points","length"]}
//   {"type":"controller","name":...}
//   {"type":"error","message":...}
//
// client -> server
//   {"type":"cmd","v":v,"omega":w}
//   {"type":"record","action":"start"|"stop","name":...}
//   {"type":"select_controller","name":...}
//
// A message that fails validation gets an error reply; the session stays up.

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Recording names in progress across all connections of one server.
using RecordRegistry = std::set<std::string>;

// Simulation state for one connection: the client drives the person, the
// selected controller drives the robot.
class BridgeSession {
 public:
  BridgeSession(const Config& cfg, ControllerFactory& factory, RecordRegistry& records, std::uint64_t seed = 1)
      : cfg_(cfg), factory_(factory), records_(records), rng_(seed) {
    ep_ = cfg_.episode;
    ep_.max_steps = INT_MAX;
    controller_ = factory_.make(cfg_.bridge.controller);
    place_robot();
  }

  ~BridgeSession() {
    if (recorder_.active()) records_.erase(record_name_);
  }

  const WorldState& world() const { return w_; }
  std::string controller() const { return controller_->name(); }
  bool recording() const { return recorder_.active(); }
  const MotionCommand& person_command() const { return person_cmd_; }

  std::string frame() const {
    const double d = w_.distance();
    const double alpha = d > 0.0 ? deg(person_robot_angle(world_to_relative(w_.robot, w_.human))) : 0.0;
    nlohmann::json j = {{"type", "frame"},
                        {"step", w_.step},
                        {"human", {{"x", w_.human.x}, {"y", w_.human.y}, {"phi", w_.human.phi}}},
                        {"robot", {{"x", w_.robot.x}, {"y", w_.robot.y}, {"phi", w_.robot.phi}}},
                        {"D", d},
                        {"alpha_deg", alpha},
                        {"reward", step_reward(d, alpha).total},
                        {"goal", nullptr},
                        {"controller", controller_->name()},
                        {"recording", recorder_.active()},
                        {"terminal", std::string(to_string(last_))}};
    if (goal_) j["goal"] = {{"x", goal_->x}, {"y", goal_->y}};
    return j.dump();
  }

  // Advances one control step and returns the new frame. A terminal state
  // puts the robot back in front of the person; the person is untouched so
  // recordings stay continuous.
  std::string tick() {
    const ControlOutput out = controller_->act(w_, rng_);
    goal_ = out.goal;
    const StepResult r = env_step(w_, out.command, person_cmd_, ep_);
    recorder_.add(w_.human, ep_.dt);
    last_ = r.termination;
    std::string f = frame();
    if (r.terminal()) place_robot();
    return f;
  }

  std::optional<std::string> handle(const std::string& text) {
    try {
      return dispatch(text);
    } catch (const std::exception& e) {
      return nlohmann::json{{"type", "error"}, {"message", e.what()}}.dump();
    }
  }

 private:
  void place_robot() {
    const double d = cfg_.bridge.start_distance;
    const Pose& h = w_.human;
    w_.robot = Pose(h.x + d * std::cos(h.phi), h.y + d * std::sin(h.phi), h.phi);
    w_.history.clear();
    w_.push_history();
    controller_->reset();
  }

  static double number(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) throw ProtocolError(fmt::format("'{}' must be a number", key));
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) throw ProtocolError(fmt::format("'{}' must be finite", key));
    return v;
  }

  static std::string string(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string()) throw ProtocolError(fmt::format("'{}' must be a string", key));
    return j.at(key).get<std::string>();
  }

  std::optional<std::string> dispatch(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProtocolError("message is not a JSON object");
    const std::string type = string(j, "type");
    if (type == "cmd") {
      person_cmd_ = {number(j, "v"), number(j, "omega")};
      return std::nullopt;
    }
    if (type == "select_controller") {
      controller_ = factory_.make(string(j, "name"));
      goal_.reset();
      return nlohmann::json{{"type", "controller"}, {"name", controller_->name()}}.dump();
    }
    if (type == "record") return record(string(j, "action"), j);
    throw ProtocolError(fmt::format("unknown message type '{}'", type));
  }

  std::filesystem::path record_path(const std::string& name) const {
    static const std::regex ok("[A-Za-z0-9_-]{1,64}");
    if (!std::regex_match(name, ok)) throw ProtocolError("recording name must match [A-Za-z0-9_-]{1,64}");
    return std::filesystem::path(cfg_.bridge.record_dir) / (name + ".csv");
  }

  std::string record(const std::string& action, const nlohmann::json& j) {
    if (action == "start") {
      if (recorder_.active()) throw ProtocolError("a recording is already in progress");
      const std::string name = string(j, "name");
      const auto path = record_path(name);
      if (std::filesystem::exists(path) || records_.count(name)) {
        throw ProtocolError(fmt::format("recording '{}' already exists", name));
      }
      records_.insert(name);
      record_name_ = name;
      recorder_.start(name);
      recorder_.add(w_.human, ep_.dt);
      return nlohmann::json{{"type", "record"}, {"status", "started"}, {"name", name}}.dump();
    }
    if (action == "stop") {
      if (!recorder_.active()) throw ProtocolError("no recording in progress");
      const std::string name = record_name_;
      records_.erase(name);
      const Trajectory t = recorder_.stop();
      const auto path = record_path(name);
      std::filesystem::create_directories(path.parent_path());
      save_trajectory(t, path);
      return nlohmann::json{{"type", "record"}, {"status", "saved"}, {"name", name}, {"path", path.string()},
                            {"points", t.points.size()}, {"length", t.length()}}
          .dump();
    }
    throw ProtocolError(fmt::format("unknown record action '{}'", action));
  }

  Config cfg_;
  ControllerFactory& factory_;
  RecordRegistry& records_;
  std::mt19937_64 rng_;
  EpisodeConfig ep_;
  WorldState w_ = place_world(1.5, 0.0, 0.0);
  MotionCommand person_cmd_;
  std::unique_ptr<Controller> controller_;
  std::optional<BandPose> goal_;
  Termination last_ = Termination::kContinue;
  TrajectoryRecorder recorder_;
  std::string record_name_;
};

namespace bridge_detail {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, const Config& cfg, ControllerFactory& factory, RecordRegistry& records,
             std::uint64_t seed)
      : ws_(std::move(socket)), timer_(ws_.get_executor()), session_(cfg, factory, records, seed),
        period_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(cfg.bridge.frame_period))) {}

  void run() {
    ws_.read_message_max(1 << 16);
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->send(self->session_.frame());
      self->read();
      self->next_ = std::chrono::steady_clock::now() + self->period_;
      self->tick();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->timer_.cancel();
        return;
      }
      const std::string msg = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      if (auto reply = self->session_.handle(msg)) self->send(std::move(*reply));
      self->read();
    });
  }

  void tick() {
    timer_.expires_at(next_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->closed_) return;
      self->next_ += self->period_;
      self->send(self->session_.tick());
      self->tick();
    });
  }

  void send(std::string msg) {
    if (closed_) return;
    queue_.push_back(std::move(msg));
    if (queue_.size() == 1) write_next();
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->timer_.cancel();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) self->write_next();
    });
  }

  websocket::stream<tcp::socket> ws_;
  net::steady_timer timer_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  BridgeSession session_;
  std::chrono::steady_clock::duration period_;
  std::chrono::steady_clock::time_point next_;
  bool closed_ = false;
};

}  // namespace bridge_detail

// Websocket server; every connection owns one BridgeSession. All sessions
// run on a single io thread.
class BridgeServer {
 public:
  explicit BridgeServer(Config cfg) : cfg_(std::move(cfg)), factory_(cfg_), acceptor_(io_) {}
  ~BridgeServer() { stop(); }

  // Binds to 127.0.0.1:port (0 picks a free port) and returns the port.
  unsigned short listen(unsigned short port, const std::string& address = "127.0.0.1") {
    namespace net = boost::asio;
    factory_.make(cfg_.bridge.controller);
    const net::ip::tcp::endpoint ep(net::ip::make_address(address), port);
    boost::system::error_code ec;
    acceptor_.open(ep.protocol(), ec);
    if (!ec) acceptor_.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor_.bind(ep, ec);
    if (!ec) acceptor_.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw std::runtime_error(fmt::format("bridge: cannot listen on {}:{}: {}", address, port, ec.message()));
    accept();
    return acceptor_.local_endpoint().port();
  }

  void run() { io_.run(); }

  void start() {
    thread_ = std::thread([this] { io_.run(); });
  }

  void stop() {
    io_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  void accept() {
    acceptor_.async_accept([this](boost::system::error_code ec, boost::asio::ip::tcp::socket socket) {
      if (!ec) {
        std::make_shared<bridge_detail::Connection>(std::move(socket), cfg_, factory_, records_, ++connections_)
            ->run();
      }
      if (acceptor_.is_open()) accept();
    });
  }

  Config cfg_;
  ControllerFactory factory_;
  RecordRegistry records_;
  boost::asio::io_context io_;
  boost::asio::ip::tcp::acceptor acceptor_;
  std::thread thread_;
  std::uint64_t connections_ = 0;
};

// Serves until the process is interrupted.
inline void serve_bridge(unsigned short port, const Config& cfg, const std::string& address = "127.0.0.1") {
  BridgeServer server(cfg);
  const unsigned short p = server.listen(port, address);
  fmt::print("bridge listening on ws://{}:{}\n", address, p);
  std::fflush(stdout);
  server.run();
}

}  // namespace follow_ahead
