#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cstring>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "certrand/devices.hpp"
#include "certrand/verifier.hpp"
#include "certrand/wire.hpp"

namespace certrand::netcli {

namespace detail {

class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
    Socket& operator=(Socket&& other) noexcept {
        if (this != &other) {
            close_fd();
            fd_ = other.fd_;
            other.fd_ = -1;
        }
        return *this;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() { close_fd(); }

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    void close_fd() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
};

inline void write_all(int fd, const std::uint8_t* data, std::size_t size) {
    std::size_t sent = 0;
    while (sent < size) {
        ssize_t n = ::send(fd, data + sent, size - sent, MSG_NOSIGNAL);
        if (n <= 0) throw std::runtime_error("socket write failed");
        sent += static_cast<std::size_t>(n);
    }
}

inline void read_exact(int fd, std::uint8_t* data, std::size_t size) {
    std::size_t got = 0;
    while (got < size) {
        ssize_t n = ::recv(fd, data + got, size - got, 0);
        if (n == 0) throw std::runtime_error("peer closed connection");
        if (n < 0) {
            if (errno == EAGAIN || errno == EWOULDBLOCK)
                throw std::runtime_error("socket read timeout");
            throw std::runtime_error("socket read failed");
        }
        got += static_cast<std::size_t>(n);
    }
}

inline void send_message(int fd, const WireMessage& msg) {
    Bytes frame = encode_message(msg);
    write_all(fd, frame.data(), frame.size());
}

inline WireMessage recv_message(int fd) {
    std::uint8_t head[4];
    read_exact(fd, head, 4);
    std::size_t len = (std::size_t{head[0]} << 24) | (std::size_t{head[1]} << 16) |
                      (std::size_t{head[2]} << 8) | std::size_t{head[3]};
    if (len > kMaxFrameBytes) throw std::length_error("oversize frame");
    Bytes body(len);
    read_exact(fd, body.data(), len);
    return decode_body(body.data(), len);
}

inline void set_recv_timeout(int fd, int millis) {
    timeval tv{};
    tv.tv_sec = millis / 1000;
    tv.tv_usec = (millis % 1000) * 1000;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

struct Address {
    std::string host;
    std::uint16_t port = 0;
};

inline Address parse_address(const std::string& text) {
    auto colon = text.rfind(':');
    if (colon == std::string::npos) throw std::invalid_argument("address must be host:port");
    Address a;
    a.host = text.substr(0, colon);
    if (a.host.empty()) a.host = "127.0.0.1";
    a.port = static_cast<std::uint16_t>(std::stoul(text.substr(colon + 1)));
    return a;
}

}  // namespace detail

/// Server-side device proxy: each respond() turns into one challenge frame
/// and one response frame on the session socket.
class RemoteDevice final : public verifier::DeviceHandle {
public:
    RemoteDevice(int fd, std::array<std::uint8_t, 16> session_id)
        : fd_(fd), session_id_(session_id) {}

    void begin_epoch(const simcore::Circuit& circuit) override {
        pending_circuit_ = circuit;
        ++epoch_;
    }

    std::vector<std::uint64_t> respond(std::size_t k) override {
        WireMessage challenge;
        challenge.type = MessageType::Challenge;
        challenge.session_id = session_id_;
        challenge.round = round_++;
        challenge.payload = nlohmann::json{{"epoch", epoch_}, {"k", k}};
        if (pending_circuit_) {
            challenge.payload["circuit"] = *pending_circuit_;
            pending_circuit_.reset();
        }
        detail::send_message(fd_, challenge);
        WireMessage reply = detail::recv_message(fd_);
        if (reply.type == MessageType::Error)
            throw std::runtime_error("device reported error: " + reply.payload.dump());
        if (reply.type != MessageType::Response || reply.round != challenge.round)
            throw std::runtime_error("unexpected frame in place of response");
        return reply.payload.at("samples").get<std::vector<std::uint64_t>>();
    }

private:
    int fd_;
    std::array<std::uint8_t, 16> session_id_;
    std::optional<simcore::Circuit> pending_circuit_;
    std::uint64_t round_ = 0;
    std::uint64_t epoch_ = 0;
};

struct SessionResult {
    std::array<std::uint8_t, 16> session_id{};
    verifier::Transcript transcript;
};

/// TCP verifier service. Sessions are sequential state machines; the
/// service multiplexes them on one thread per connection. Session ids are
/// derived from the master key, so reruns with identical keys and devices
/// reproduce transcripts exactly.
class VerifierService {
public:
    VerifierService(verifier::ProtocolConfig config, int round_timeout_ms = 1000)
        : config_(std::move(config)), timeout_ms_(round_timeout_ms) {}

    /// Binds and starts accepting. Pass port 0 for an ephemeral port; the
    /// bound port is returned.
    std::uint16_t start(const std::string& host, std::uint16_t port, std::size_t max_sessions) {
        listener_ = detail::Socket(::socket(AF_INET, SOCK_STREAM, 0));
        if (!listener_.valid()) throw std::runtime_error("socket() failed");
        int one = 1;
        ::setsockopt(listener_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
            throw std::invalid_argument("bad listen host: " + host);
        if (::bind(listener_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
            throw std::runtime_error("bind failed");
        if (::listen(listener_.fd(), 16) != 0) throw std::runtime_error("listen failed");
        socklen_t len = sizeof(addr);
        ::getsockname(listener_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
        bound_port_ = ntohs(addr.sin_port);
        accept_thread_ = std::thread([this, max_sessions] { accept_loop(max_sessions); });
        return bound_port_;
    }

    void stop() {
        stopping_ = true;
        listener_.close_fd();
        if (accept_thread_.joinable()) accept_thread_.join();
        for (auto& t : session_threads_) t.join();
        session_threads_.clear();
    }

    /// Blocks until max_sessions sessions have completed (or stop()).
    void wait() {
        if (accept_thread_.joinable()) accept_thread_.join();
        for (auto& t : session_threads_) t.join();
        session_threads_.clear();
    }

    std::vector<SessionResult> results() {
        std::lock_guard<std::mutex> lock(results_mutex_);
        return results_;
    }

    ~VerifierService() {
        stopping_ = true;
        listener_.close_fd();
        if (accept_thread_.joinable()) accept_thread_.join();
        for (auto& t : session_threads_)
            if (t.joinable()) t.join();
    }

private:
    void accept_loop(std::size_t max_sessions) {
        for (std::size_t s = 0; s < max_sessions && !stopping_; ++s) {
            int fd = ::accept(listener_.fd(), nullptr, nullptr);
            if (fd < 0) break;
            std::size_t index = session_serial_++;
            session_threads_.emplace_back([this, fd, index] { run_session(fd, index); });
        }
        listener_.close_fd();
    }

    void run_session(int raw_fd, std::size_t index) {
        detail::Socket sock(raw_fd);
        detail::set_recv_timeout(sock.fd(), timeout_ms_);
        SessionResult result;
        PrfStream ids(config_.master_key, "session-id");
        auto block = ids.block_at(index);
        std::copy(block.begin(), block.begin() + 16, result.session_id.begin());
        try {
            WireMessage hello = detail::recv_message(sock.fd());
            if (hello.type != MessageType::Hello) throw std::runtime_error("expected hello");
            WireMessage greeting;
            greeting.type = MessageType::Hello;
            greeting.session_id = result.session_id;
            greeting.payload = nlohmann::json{{"n", config_.n}, {"m", config_.m}, {"k", config_.k}};
            detail::send_message(sock.fd(), greeting);

            RemoteDevice device(sock.fd(), result.session_id);
            result.transcript = verifier::run_protocol(config_, device);

            WireMessage decision;
            decision.type = MessageType::DecisionMsg;
            decision.session_id = result.session_id;
            decision.round = result.transcript.rounds.size();
            decision.payload = nlohmann::json{
                {"decision", verifier::decision_name(result.transcript.decision)},
                {"statistic", result.transcript.statistic}};
            detail::send_message(sock.fd(), decision);
        } catch (const std::exception& e) {
            result.transcript.config = config_;
            result.transcript.decision = verifier::Decision::ProtocolError;
            result.transcript.error = e.what();
        }
        std::lock_guard<std::mutex> lock(results_mutex_);
        results_.push_back(std::move(result));
    }

    verifier::ProtocolConfig config_;
    int timeout_ms_;
    detail::Socket listener_;
    std::uint16_t bound_port_ = 0;
    std::thread accept_thread_;
    std::vector<std::thread> session_threads_;
    std::atomic<bool> stopping_{false};
    std::atomic<std::size_t> session_serial_{0};
    std::mutex results_mutex_;
    std::vector<SessionResult> results_;
};

struct ClientOutcome {
    std::string decision;
    double statistic = 0.0;
    std::array<std::uint8_t, 16> session_id{};
};

/// Device client: connects, answers challenges with a local simulated
/// device, returns the verifier's decision.
inline ClientOutcome run_device_client(const std::string& host, std::uint16_t port,
                                       const devices::DeviceModel& model,
                                       int timeout_ms = 10000) {
    detail::Socket sock(::socket(AF_INET, SOCK_STREAM, 0));
    if (!sock.valid()) throw std::runtime_error("socket() failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw std::invalid_argument("bad host: " + host);
    if (::connect(sock.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw std::runtime_error("connect failed");
    detail::set_recv_timeout(sock.fd(), timeout_ms);

    WireMessage hello;
    hello.type = MessageType::Hello;
    hello.payload = nlohmann::json{{"model", model}};
    detail::send_message(sock.fd(), hello);
    WireMessage greeting = detail::recv_message(sock.fd());
    if (greeting.type != MessageType::Hello) throw std::runtime_error("expected hello reply");

    devices::Device device(model);
    ClientOutcome outcome;
    outcome.session_id = greeting.session_id;
    while (true) {
        WireMessage msg = detail::recv_message(sock.fd());
        if (msg.type == MessageType::DecisionMsg) {
            outcome.decision = msg.payload.at("decision").get<std::string>();
            outcome.statistic = msg.payload.at("statistic").get<double>();
            return outcome;
        }
        if (msg.type != MessageType::Challenge) throw std::runtime_error("unexpected frame");
        if (msg.payload.contains("circuit"))
            device.begin_epoch(msg.payload.at("circuit").get<simcore::Circuit>());
        WireMessage reply;
        reply.type = MessageType::Response;
        reply.session_id = msg.session_id;
        reply.round = msg.round;
        reply.payload =
            nlohmann::json{{"samples", device.respond(msg.payload.at("k").get<std::size_t>())}};
        detail::send_message(sock.fd(), reply);
    }
}

}  // namespace certrand::netcli
