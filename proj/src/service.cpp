#include "usmask/service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <iostream>

namespace usmask {
namespace {

bool read_exact(int fd, std::uint8_t* buf, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, buf + got, n - got, 0);
    if (r == 0) return false;
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

bool write_all(int fd, std::span<const std::uint8_t> bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t r = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    sent += static_cast<std::size_t>(r);
  }
  return true;
}

wire::Message error_message(ErrorCode code, const std::string& what) {
  return {wire::MsgType::kError, wire::encode_error({code, what})};
}

std::uint16_t to_u16(double v) {
  return static_cast<std::uint16_t>(std::clamp(v, 0.0, 65535.0));
}

}  // namespace

wire::ConfigPayload to_wire(const MaskerConfig& cfg) {
  wire::ConfigPayload p;
  p.conf_milli = static_cast<std::uint16_t>(std::lround(cfg.conf_thr * 1000));
  p.mode = cfg.hold.mode;
  p.hold_frames = static_cast<std::uint16_t>(std::clamp(cfg.hold.hold_frames, 0, 0xFFFF));
  p.ssim_threshold_milli = static_cast<std::uint16_t>(std::lround(cfg.hold.ssim_threshold * 1000));
  p.downsample = static_cast<std::uint8_t>(std::clamp(cfg.hold.ssim_params.downsample, 1, 255));
  return p;
}

MaskerConfig from_wire(const wire::ConfigPayload& p, const MaskerConfig& base) {
  MaskerConfig cfg = base;
  cfg.conf_thr = p.conf_milli / 1000.0;
  cfg.hold.mode = p.mode;
  cfg.hold.hold_frames = p.hold_frames;
  cfg.hold.ssim_threshold = p.ssim_threshold_milli / 1000.0;
  cfg.hold.ssim_params.downsample = p.downsample;
  return cfg;
}

MaskSession::MaskSession(MaskerConfig defaults) : masker_(std::move(defaults)) {}

wire::Message MaskSession::handle(const wire::Message& request, bool& close) {
  close = false;
  try {
    switch (request.type) {
      case wire::MsgType::kFrame: return on_frame(request);
      case wire::MsgType::kConfig: return on_config(request);
      default:
        close = true;
        return error_message(ErrorCode::kMalformed, "unexpected message type from client");
    }
  } catch (const Error& e) {
    close = true;
    return error_message(e.code(), e.what());
  }
}

wire::Message MaskSession::on_frame(const wire::Message& request) {
  const wire::FramePayload in = wire::decode_frame(request.payload);
  const GrayImage frame(in.width, in.height, in.pixels);
  std::vector<Detection> dets;
  dets.reserve(in.detections.size());
  for (const auto& d : in.detections) {
    dets.push_back({in.frame_index,
                    {double(d.box.x0), double(d.box.y0), double(d.box.x1), double(d.box.y1)},
                    d.box.category,
                    d.conf_milli / 1000.0});
  }
  FrameMasker::Output out = masker_.process(frame, dets);

  wire::MaskedPayload reply;
  reply.frame_index = in.frame_index;
  reply.source = out.decision.source;
  for (const auto& b : out.decision.boxes)
    reply.boxes.push_back({to_u16(std::floor(b.bbox.x_min)), to_u16(std::floor(b.bbox.y_min)),
                           to_u16(std::ceil(b.bbox.x_max)), to_u16(std::ceil(b.bbox.y_max)),
                           b.category});
  reply.pixels = std::move(out.masked.data);
  return {wire::MsgType::kMasked, wire::encode_masked(reply)};
}

wire::Message MaskSession::on_config(const wire::Message& request) {
  const wire::ConfigPayload p = wire::decode_config(request.payload);
  masker_.reconfigure(from_wire(p, masker_.config()));
  return {wire::MsgType::kConfig, wire::encode_config(to_wire(masker_.config()))};
}

MaskServer::MaskServer(MaskerConfig defaults) : defaults_(std::move(defaults)) { defaults_.validate(); }

MaskServer::~MaskServer() { stop(); }

std::uint16_t MaskServer::listen(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &res) != 0)
    throw Error(ErrorCode::kIo, "cannot resolve " + host);
  listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (listen_fd_ < 0) {
    ::freeaddrinfo(res);
    throw Error(ErrorCode::kIo, "socket() failed");
  }
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const int rc = ::bind(listen_fd_, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0 || ::listen(listen_fd_, 64) != 0)
    throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + service + ": " + std::strerror(errno));
  sockaddr_in bound{};
  socklen_t len = sizeof bound;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
  return ntohs(bound.sin_port);
}

void MaskServer::serve() {
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;  // listening socket shut down
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    client_fds_.insert(fd);
    workers_.emplace_back([this, fd] { handle_connection(fd); });
  }
}

void MaskServer::interrupt() {
  stopping_ = true;
  if (listen_fd_ >= 0) ::shutdown(listen_fd_, SHUT_RDWR);
}

void MaskServer::stop() {
  if (stopped_) return;
  stopped_ = true;
  interrupt();
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

void MaskServer::handle_connection(int fd) {
  MaskSession session(defaults_);
  std::vector<std::uint8_t> buf(wire::kHeaderSize);
  while (true) {
    buf.resize(wire::kHeaderSize);
    if (!read_exact(fd, buf.data(), wire::kHeaderSize)) break;
    wire::Header h;
    try {
      h = wire::decode_header(buf);
    } catch (const Error& e) {
      write_all(fd, wire::encode_message(error_message(e.code(), e.what())));
      break;
    }
    wire::Message request{h.type, std::vector<std::uint8_t>(h.payload_len)};
    if (!read_exact(fd, request.payload.data(), h.payload_len)) break;
    bool close = false;
    const wire::Message reply = session.handle(request, close);
    if (!write_all(fd, wire::encode_message(reply)) || close) break;
  }
  std::lock_guard lock(mu_);
  client_fds_.erase(fd);
  ::close(fd);
}

MaskClient::MaskClient(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0)
    throw Error(ErrorCode::kIo, "cannot resolve " + host);
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const int rc = fd_ < 0 ? -1 : ::connect(fd_, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0) throw Error(ErrorCode::kIo, "cannot connect to " + host + ":" + std::to_string(port));
  const int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

MaskClient::~MaskClient() {
  if (fd_ >= 0) ::close(fd_);
}

void MaskClient::send(const wire::Message& m) { send_raw(wire::encode_message(m)); }

void MaskClient::send_raw(std::span<const std::uint8_t> bytes) {
  if (!write_all(fd_, bytes)) throw Error(ErrorCode::kIo, "send failed");
}

wire::Message MaskClient::receive() {
  std::vector<std::uint8_t> buf(wire::kHeaderSize);
  if (!read_exact(fd_, buf.data(), buf.size())) throw Error(ErrorCode::kIo, "connection closed");
  const wire::Header h = wire::decode_header(buf);
  wire::Message m{h.type, std::vector<std::uint8_t>(h.payload_len)};
  if (!read_exact(fd_, m.payload.data(), h.payload_len)) throw Error(ErrorCode::kIo, "connection closed");
  return m;
}

wire::MaskedPayload MaskClient::mask(const wire::FramePayload& frame) {
  const wire::Message reply = round_trip({wire::MsgType::kFrame, wire::encode_frame(frame)});
  if (reply.type == wire::MsgType::kError) {
    const auto e = wire::decode_error(reply.payload);
    throw Error(e.code, "server: " + e.message);
  }
  if (reply.type != wire::MsgType::kMasked) throw Error(ErrorCode::kMalformed, "unexpected reply type");
  return wire::decode_masked(reply.payload);
}

}  // namespace usmask
