#include "zkqbf/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>

namespace zkq {

const char* tagName(Tag t) {
  switch (t) {
    case Tag::Hello: return "hello";
    case Tag::HelloAck: return "hello-ack";
    case Tag::Commit: return "commit";
    case Tag::Challenge: return "challenge";
    case Tag::Open: return "open";
    case Tag::Verdict: return "verdict";
    case Tag::Abort: return "abort";
  }
  return "?";
}

bool knownTag(std::uint8_t t) { return t >= 1 && t <= 7; }

std::vector<std::uint8_t> encodeFrame(const Frame& f) {
  if (f.payload.size() > kMaxPayload) throw FrameError(FrameError::Kind::Overflow, "payload too large");
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeader + f.payload.size());
  putU32(out, static_cast<std::uint32_t>(f.payload.size()));
  out.push_back(static_cast<std::uint8_t>(f.tag));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

Frame decodeFrame(const std::uint8_t* bytes, std::size_t size, std::size_t& consumed,
                  std::uint64_t limit) {
  if (size < kFrameHeader) throw FrameError(FrameError::Kind::Truncated, "truncated frame header");
  std::uint32_t len = getU32(bytes);
  if (len > limit) throw FrameError(FrameError::Kind::Overflow, "frame length exceeds limit");
  if (!knownTag(bytes[4])) throw FrameError(FrameError::Kind::UnknownTag, "unknown frame tag");
  if (size - kFrameHeader < len) throw FrameError(FrameError::Kind::Truncated, "truncated frame payload");
  Frame f;
  f.tag = static_cast<Tag>(bytes[4]);
  f.payload.assign(bytes + kFrameHeader, bytes + kFrameHeader + len);
  consumed = kFrameHeader + len;
  return f;
}

void putElem(std::vector<std::uint8_t>& out, Elem e, unsigned nbytes) {
  for (unsigned i = 0; i < nbytes; ++i) out.push_back(static_cast<std::uint8_t>(e >> (8 * i)));
}

Elem getElem(const std::uint8_t* p, unsigned nbytes) {
  Elem e = 0;
  for (unsigned i = 0; i < nbytes; ++i) e |= static_cast<Elem>(p[i]) << (8 * i);
  return e;
}

void putU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t getU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void putPoly(std::vector<std::uint8_t>& out, const Poly& p, unsigned nbytes) {
  putU32(out, static_cast<std::uint32_t>(p.c.size()));
  for (Elem e : p.c) putElem(out, e, nbytes);
}

Poly getPoly(const std::uint8_t* p, std::size_t size, std::size_t& consumed, unsigned nbytes) {
  if (size < 4) throw FrameError(FrameError::Kind::Truncated, "truncated polynomial length");
  std::uint32_t n = getU32(p);
  if ((size - 4) / nbytes < n) throw FrameError(FrameError::Kind::Truncated, "truncated polynomial");
  Poly out;
  out.c.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) out.c[i] = getElem(p + 4 + i * nbytes, nbytes);
  consumed = 4 + static_cast<std::size_t>(n) * nbytes;
  return out;
}

void Transport::send(const Frame& f) {
  auto bytes = encodeFrame(f);
  if (tamper_) tamper_(sentFrames_, bytes);
  ++sentFrames_;
  sent_ += bytes.size();
  log_.push_back({true, f.tag, f.payload.size()});
  if (capture_) raw_.insert(raw_.end(), bytes.begin(), bytes.end());
  writeBytes(std::move(bytes));
}

Frame Transport::recv() {
  Frame f = readFrame();
  received_ += kFrameHeader + f.payload.size();
  log_.push_back({false, f.tag, f.payload.size()});
  if (capture_) {
    auto bytes = encodeFrame(f);
    raw_.insert(raw_.end(), bytes.begin(), bytes.end());
  }
  return f;
}

std::pair<std::unique_ptr<MemoryTransport>, std::unique_ptr<MemoryTransport>> MemoryTransport::pair() {
  auto a = std::make_shared<Pipe>();
  auto b = std::make_shared<Pipe>();
  return {std::unique_ptr<MemoryTransport>(new MemoryTransport(a, b)),
          std::unique_ptr<MemoryTransport>(new MemoryTransport(b, a))};
}

void MemoryTransport::close() {
  for (auto* p : {in_.get(), out_.get()}) {
    std::lock_guard<std::mutex> g(p->m);
    p->closed = true;
    p->cv.notify_all();
  }
}

void MemoryTransport::writeBytes(std::vector<std::uint8_t> bytes) {
  std::lock_guard<std::mutex> g(out_->m);
  if (out_->closed) throw TransportError("peer closed");
  out_->q.push_back(std::move(bytes));
  out_->cv.notify_all();
}

Frame MemoryTransport::readFrame() {
  std::vector<std::uint8_t> bytes;
  {
    std::unique_lock<std::mutex> g(in_->m);
    in_->cv.wait(g, [&] { return !in_->q.empty() || in_->closed; });
    if (in_->q.empty()) throw TransportError("peer closed");
    bytes = std::move(in_->q.front());
    in_->q.pop_front();
  }
  std::size_t used = 0;
  Frame f = decodeFrame(bytes.data(), bytes.size(), used);
  if (used != bytes.size()) throw FrameError(FrameError::Kind::Overflow, "trailing bytes after frame");
  return f;
}

namespace {

std::pair<std::string, std::string> splitAddress(const std::string& address) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos) throw TransportError("address must be host:port");
  return {address.substr(0, colon), address.substr(colon + 1)};
}

addrinfo* resolve(const std::string& address, bool passive) {
  auto [host, port] = splitAddress(address);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) throw TransportError("cannot resolve " + address + ": " + gai_strerror(rc));
  return res;
}

void noDelay(int fd) {
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

std::unique_ptr<TcpTransport> TcpTransport::listen(const std::string& address) {
  addrinfo* res = resolve(address, true);
  int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    freeaddrinfo(res);
    throw TransportError("socket failed");
  }
  int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 1) != 0) {
    freeaddrinfo(res);
    ::close(fd);
    throw TransportError("cannot listen on " + address + ": " + std::strerror(errno));
  }
  freeaddrinfo(res);
  int conn = ::accept(fd, nullptr, nullptr);
  ::close(fd);
  if (conn < 0) throw TransportError("accept failed");
  noDelay(conn);
  return std::unique_ptr<TcpTransport>(new TcpTransport(conn));
}

std::unique_ptr<TcpTransport> TcpTransport::connect(const std::string& address, int retryMs) {
  auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(retryMs);
  while (true) {
    addrinfo* res = resolve(address, false);
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    int rc = fd >= 0 ? ::connect(fd, res->ai_addr, res->ai_addrlen) : -1;
    freeaddrinfo(res);
    if (rc == 0) {
      noDelay(fd);
      return std::unique_ptr<TcpTransport>(new TcpTransport(fd));
    }
    if (fd >= 0) ::close(fd);
    if (std::chrono::steady_clock::now() > deadline)
      throw TransportError("cannot connect to " + address);
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

TcpTransport::~TcpTransport() { close(); }

void TcpTransport::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

void TcpTransport::writeBytes(std::vector<std::uint8_t> bytes) {
  std::size_t off = 0;
  while (off < bytes.size()) {
    ssize_t n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      throw TransportError("send failed");
    }
    off += static_cast<std::size_t>(n);
  }
}

void TcpTransport::readExact(std::uint8_t* p, std::size_t n) {
  std::size_t off = 0;
  while (off < n) {
    ssize_t r = ::recv(fd_, p + off, n - off, 0);
    if (r <= 0) {
      if (r < 0 && errno == EINTR) continue;
      throw TransportError("connection closed");
    }
    off += static_cast<std::size_t>(r);
  }
}

Frame TcpTransport::readFrame() {
  std::uint8_t head[kFrameHeader];
  readExact(head, kFrameHeader);
  if (!knownTag(head[4])) throw FrameError(FrameError::Kind::UnknownTag, "unknown frame tag");
  std::uint32_t len = getU32(head);
  Frame f;
  f.tag = static_cast<Tag>(head[4]);
  f.payload.resize(len);
  if (len) readExact(f.payload.data(), len);
  return f;
}

}  // namespace zkq
