#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "usmask/pipeline.hpp"
#include "usmask/wire.hpp"

namespace usmask {

// Protocol state for one connection: owns the stream's FrameMasker. Transport
// free, so it can be driven directly by tests.
class MaskSession {
 public:
  explicit MaskSession(MaskerConfig defaults);

  // Returns the reply. Sets `close` when the connection must end (after an
  // ERROR reply).
  wire::Message handle(const wire::Message& request, bool& close);

 private:
  wire::Message on_frame(const wire::Message& request);
  wire::Message on_config(const wire::Message& request);

  FrameMasker masker_;
};

wire::ConfigPayload to_wire(const MaskerConfig& cfg);
MaskerConfig from_wire(const wire::ConfigPayload& p, const MaskerConfig& base);

// TCP front end: one thread per connection, each with a fresh MaskSession.
class MaskServer {
 public:
  explicit MaskServer(MaskerConfig defaults);
  ~MaskServer();

  MaskServer(const MaskServer&) = delete;
  MaskServer& operator=(const MaskServer&) = delete;

  // Binds and listens; port 0 picks an ephemeral port. Returns the bound port.
  std::uint16_t listen(const std::string& host, std::uint16_t port);
  // Accept loop; returns after stop().
  void serve();
  void start() { acceptor_ = std::thread([this] { serve(); }); }
  // Makes serve() return; async-signal-safe.
  void interrupt();
  // interrupt(), then close every connection and join all threads.
  void stop();

 private:
  void handle_connection(int fd);

  MaskerConfig defaults_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  bool stopped_ = false;
  std::thread acceptor_;
  std::mutex mu_;
  std::set<int> client_fds_;
  std::vector<std::thread> workers_;
};

// Blocking client, used by tests and tools.
class MaskClient {
 public:
  MaskClient(const std::string& host, std::uint16_t port);
  ~MaskClient();

  MaskClient(const MaskClient&) = delete;
  MaskClient& operator=(const MaskClient&) = delete;

  void send(const wire::Message& m);
  void send_raw(std::span<const std::uint8_t> bytes);
  // Reads one reply; throws kIo if the server closed the connection.
  wire::Message receive();
  wire::Message round_trip(const wire::Message& m) {
    send(m);
    return receive();
  }

  wire::MaskedPayload mask(const wire::FramePayload& frame);

 private:
  int fd_ = -1;
};

}  // namespace usmask
