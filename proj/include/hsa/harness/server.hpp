#pragma once

#include <atomic>
#include <chrono>
#include <deque>
#include <memory>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "hsa/harness/telemetry.hpp"

namespace hsa {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

/// Live closed loop behind a websocket endpoint. The simulation runs on its
/// own thread and never waits on the network: client messages land in an
/// inbox drained once per step, and state frames are posted to the I/O thread.
class TelemetryServer {
public:
  struct Options {
    unsigned short port = 8765;
    double rate = 1.0;         // simulated seconds per wall-clock second
    double max_msg_hz = 60.0;  // state frame throttle
  };

  TelemetryServer(Scenario scenario, Options opts)
      : opts_(opts), acceptor_(ioc_) {
    if (!std::holds_alternative<Live>(scenario.command)) {
      scenario.command = Live{std::make_shared<LiveChannel>(scenario.dim, 2.0)};
    }
    channel_ = std::get<Live>(scenario.command).channel;
    sim_ = std::make_unique<Simulator>(std::move(scenario));

    tcp::endpoint ep(net::ip::make_address("127.0.0.1"), opts_.port);
    acceptor_.open(ep.protocol());
    acceptor_.set_option(net::socket_base::reuse_address(true));
    acceptor_.bind(ep);
    acceptor_.listen();
  }

  ~TelemetryServer() { stop(); }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  void start() {
    running_ = true;
    refresh_hello();
    do_accept();
    io_thread_ = std::thread([this] { ioc_.run(); });
    sim_thread_ = std::thread([this] { sim_loop(); });
  }

  void stop() {
    if (!running_.exchange(false)) return;
    if (sim_thread_.joinable()) sim_thread_.join();
    net::post(ioc_, [this] {
      beast::error_code ec;
      acceptor_.close(ec);
      for (auto& w : sessions_)
        if (auto s = w.lock()) s->close();
    });
    work_.reset();
    ioc_.stop();
    if (io_thread_.joinable()) io_thread_.join();
  }

  /// Blocks until stop() is called from elsewhere.
  void wait() {
    if (sim_thread_.joinable()) sim_thread_.join();
  }

private:
  class Session : public std::enable_shared_from_this<Session> {
  public:
    Session(tcp::socket socket, TelemetryServer& server)
        : ws_(std::move(socket)), server_(server) {}

    void start(std::string hello) {
      ws_.text(true);
      ws_.async_accept([self = shared_from_this(), hello = std::move(hello)](beast::error_code ec) {
        if (ec) return;
        self->open_ = true;
        self->send(hello);
        self->do_read();
      });
    }

    void send(std::string msg) {
      if (!open_) return;
      if (queue_.size() >= 64) queue_.pop_front();  // drop stale frames
      queue_.push_back(std::move(msg));
      if (queue_.size() == 1 && !writing_) do_write();
    }

    void close() {
      open_ = false;
      beast::error_code ec;
      beast::get_lowest_layer(ws_).close(ec);
    }

  private:
    void do_read() {
      ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
        if (ec) {
          self->open_ = false;
          return;
        }
        const auto text = beast::buffers_to_string(self->buffer_.data());
        self->buffer_.consume(self->buffer_.size());
        const auto msg = telemetry::parse_client_message(text);
        if (const auto* u = std::get_if<telemetry::Unknown>(&msg)) {
          self->send(telemetry::warning_message(u->reason));
        } else {
          self->server_.enqueue(msg);
        }
        self->do_read();
      });
    }

    void do_write() {
      if (queue_.empty() || !open_) return;
      writing_ = true;
      ws_.async_write(net::buffer(queue_.front()),
                      [self = shared_from_this()](beast::error_code ec, std::size_t) {
                        self->writing_ = false;
                        if (ec) {
                          self->open_ = false;
                          return;
                        }
                        self->queue_.pop_front();
                        self->do_write();
                      });
    }

    websocket::stream<tcp::socket> ws_;
    TelemetryServer& server_;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
    bool writing_ = false;
    bool open_ = false;
  };

  void do_accept() {
    acceptor_.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      auto s = std::make_shared<Session>(std::move(socket), *this);
      sessions_.push_back(s);
      std::string hello;
      {
        std::lock_guard lock(hello_mu_);
        hello = hello_;
      }
      s->start(std::move(hello));
      do_accept();
    });
  }

  void enqueue(telemetry::ClientMessage msg) {
    std::lock_guard lock(inbox_mu_);
    inbox_.push_back(std::move(msg));
  }

  void broadcast(std::string msg) {
    net::post(ioc_, [this, msg = std::move(msg)] {
      std::erase_if(sessions_, [](const std::weak_ptr<Session>& w) { return w.expired(); });
      for (auto& w : sessions_)
        if (auto s = w.lock()) s->send(msg);
    });
  }

  void drain_inbox() {
    std::deque<telemetry::ClientMessage> msgs;
    {
      std::lock_guard lock(inbox_mu_);
      msgs.swap(inbox_);
    }
    for (auto& m : msgs) {
      std::optional<std::string> err;
      if (auto* st = std::get_if<telemetry::Stylus>(&m)) {
        if (st->displacement_cm.size() != sim_->scenario().dim) {
          err = "stylus: dimension mismatch";
        } else {
          // Clamp to the +-5 cm virtual workspace.
          channel_->push_displacement_cm(st->displacement_cm.cwiseMax(-5.0).cwiseMin(5.0));
        }
      } else if (auto* p = std::get_if<telemetry::Param>(&m)) {
        err = telemetry::apply_param(sim_->mutable_scenario(), *p);
        if (!err) refresh_hello();
      } else if (auto* md = std::get_if<telemetry::Mode>(&m)) {
        err = telemetry::apply_mode(sim_->mutable_scenario(), *md);
        if (!err) refresh_hello();
      } else if (std::holds_alternative<telemetry::Reset>(m)) {
        sim_->reset();
      }
      if (err) broadcast(telemetry::warning_message(*err));
    }
  }

  void refresh_hello() {
    auto msg = telemetry::scenario_message(sim_->scenario());
    std::lock_guard lock(hello_mu_);
    hello_ = std::move(msg);
  }

  void sim_loop() {
    using clock = std::chrono::steady_clock;
    const double dt = sim_->scenario().dt;
    const auto tick = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(dt / opts_.rate));
    const auto min_gap = std::chrono::duration_cast<clock::duration>(
        std::chrono::duration<double>(1.0 / opts_.max_msg_hz));
    auto next = clock::now();
    auto last_sent = clock::time_point{};
    while (running_) {
      drain_inbox();
      std::string frame;
      try {
        const auto row = sim_->advance();
        frame = telemetry::state_message(row, sim_->scenario());
      } catch (const InfeasibleError& e) {
        broadcast(telemetry::warning_message(std::string("run aborted: ") + e.what()));
        sim_->reset();
      }
      const auto now = clock::now();
      if (!frame.empty() && now - last_sent >= min_gap) {
        broadcast(std::move(frame));
        last_sent = now;
      }
      next += tick;
      std::this_thread::sleep_until(next);
    }
  }

  Options opts_;
  net::io_context ioc_;
  net::executor_work_guard<net::io_context::executor_type> work_ = net::make_work_guard(ioc_);
  tcp::acceptor acceptor_;
  std::vector<std::weak_ptr<Session>> sessions_;  // I/O thread only
  std::unique_ptr<Simulator> sim_;                // simulation thread only
  std::shared_ptr<LiveChannel> channel_;
  std::mutex inbox_mu_;
  std::deque<telemetry::ClientMessage> inbox_;
  std::mutex hello_mu_;
  std::string hello_;
  std::atomic<bool> running_{false};
  std::thread io_thread_;
  std::thread sim_thread_;
};

}  // namespace hsa
