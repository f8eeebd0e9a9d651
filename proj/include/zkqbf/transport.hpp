#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "zkqbf/gf.hpp"

namespace zkq {

enum class Tag : std::uint8_t {
  Hello = 1,
  HelloAck = 2,
  Commit = 3,
  Challenge = 4,
  Open = 5,
  Verdict = 6,
  Abort = 7,
};

const char* tagName(Tag t);
bool knownTag(std::uint8_t t);

struct Frame {
  Tag tag = Tag::Commit;
  std::vector<std::uint8_t> payload;
  bool operator==(const Frame& o) const { return tag == o.tag && payload == o.payload; }
};

class FrameError : public std::runtime_error {
public:
  enum class Kind { Truncated, UnknownTag, Overflow };
  FrameError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

inline constexpr std::size_t kFrameHeader = 5;
inline constexpr std::uint64_t kMaxPayload = 0xFFFFFFFFull;

std::vector<std::uint8_t> encodeFrame(const Frame& f);
// Decodes one frame from the front of `bytes`; `limit` caps the accepted payload length.
Frame decodeFrame(const std::uint8_t* bytes, std::size_t size, std::size_t& consumed,
                  std::uint64_t limit = kMaxPayload);

// Little-endian field element and polynomial codecs.
void putElem(std::vector<std::uint8_t>& out, Elem e, unsigned nbytes);
Elem getElem(const std::uint8_t* p, unsigned nbytes);
void putU32(std::vector<std::uint8_t>& out, std::uint32_t v);
std::uint32_t getU32(const std::uint8_t* p);
void putPoly(std::vector<std::uint8_t>& out, const Poly& p, unsigned nbytes);
Poly getPoly(const std::uint8_t* p, std::size_t size, std::size_t& consumed, unsigned nbytes);

class TransportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct FrameRecord {
  bool sent;
  Tag tag;
  std::size_t length;
};

class Transport {
public:
  virtual ~Transport() = default;
  void send(const Frame& f);
  Frame recv();
  virtual void close() = 0;

  std::uint64_t bytesSent() const { return sent_; }
  std::uint64_t bytesReceived() const { return received_; }
  const std::vector<FrameRecord>& log() const { return log_; }
  // Raw bytes in both directions, kept only when capture is enabled.
  void setCapture(bool on) { capture_ = on; }
  const std::vector<std::uint8_t>& captured() const { return raw_; }
  // Applied to every outgoing encoded frame before it is written.
  void setTamper(std::function<void(std::size_t index, std::vector<std::uint8_t>&)> fn) {
    tamper_ = std::move(fn);
  }

protected:
  virtual void writeBytes(std::vector<std::uint8_t> bytes) = 0;
  virtual Frame readFrame() = 0;

private:
  std::uint64_t sent_ = 0;
  std::uint64_t received_ = 0;
  std::size_t sentFrames_ = 0;
  bool capture_ = false;
  std::vector<std::uint8_t> raw_;
  std::vector<FrameRecord> log_;
  std::function<void(std::size_t, std::vector<std::uint8_t>&)> tamper_;
};

// Two connected in-memory endpoints.
class MemoryTransport : public Transport {
public:
  static std::pair<std::unique_ptr<MemoryTransport>, std::unique_ptr<MemoryTransport>> pair();
  void close() override;

protected:
  void writeBytes(std::vector<std::uint8_t> bytes) override;
  Frame readFrame() override;

private:
  struct Pipe {
    std::mutex m;
    std::condition_variable cv;
    std::deque<std::vector<std::uint8_t>> q;
    bool closed = false;
  };
  MemoryTransport(std::shared_ptr<Pipe> in, std::shared_ptr<Pipe> out) : in_(in), out_(out) {}
  std::shared_ptr<Pipe> in_, out_;
};

class TcpTransport : public Transport {
public:
  // host:port; listen accepts exactly one connection.
  static std::unique_ptr<TcpTransport> listen(const std::string& address);
  static std::unique_ptr<TcpTransport> connect(const std::string& address, int retryMs = 5000);
  ~TcpTransport() override;
  void close() override;

protected:
  void writeBytes(std::vector<std::uint8_t> bytes) override;
  Frame readFrame() override;

private:
  explicit TcpTransport(int fd) : fd_(fd) {}
  void readExact(std::uint8_t* p, std::size_t n);
  int fd_;
};

}  // namespace zkq
