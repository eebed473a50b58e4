#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstring>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "synlog/codec.hpp"
#include "synlog/error.hpp"
#include "synlog/record.hpp"

namespace synlog {

// Datagrams larger than this are recorded as malformed by the collector.
inline constexpr std::size_t max_datagram_bytes = 8 * 1024;

struct TransmissionReport {
    std::size_t sent = 0;
    std::size_t failed = 0;
};

namespace detail {

struct SocketHandle {
    int fd = -1;
    SocketHandle() = default;
    explicit SocketHandle(int fd) : fd(fd) {}
    SocketHandle(const SocketHandle&) = delete;
    SocketHandle& operator=(const SocketHandle&) = delete;
    SocketHandle(SocketHandle&& o) noexcept : fd(o.fd) { o.fd = -1; }
    ~SocketHandle() {
        if (fd >= 0) ::close(fd);
    }
};

inline sockaddr_in make_addr(const std::string& host, int port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw Error("not an IPv4 address: '" + host + "'");
    return addr;
}

}  // namespace detail

// Sends pre-rendered payload lines, one UDP datagram each, in order. Socket
// or address failures abort before any send; per-datagram send errors are
// counted and transmission continues.
inline TransmissionReport transmit_lines(std::span<const std::string> lines,
                                         const std::string& host, int port) {
    if (port < 1 || port > 65535) throw Error("port out of range: " + std::to_string(port));
    const sockaddr_in addr = detail::make_addr(host, port);
    detail::SocketHandle sock(::socket(AF_INET, SOCK_DGRAM, 0));
    if (sock.fd < 0) throw Error(std::string("socket: ") + std::strerror(errno));

    TransmissionReport report;
    for (const auto& line : lines) {
        const ssize_t n = ::sendto(sock.fd, line.data(), line.size(), 0,
                                   reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
        if (n == static_cast<ssize_t>(line.size()))
            ++report.sent;
        else
            ++report.failed;
        // Give a same-host receiver a chance to drain between bursts.
        if (report.sent % 64 == 0) std::this_thread::yield();
    }
    return report;
}

inline TransmissionReport transmit(std::span<const SyslogRecord> records, const std::string& host,
                                   int port, PayloadStyle style = PayloadStyle::flat_csv,
                                   bool with_pri = false) {
    std::vector<std::string> lines;
    lines.reserve(records.size());
    for (const auto& r : records) lines.push_back(render_rfc3164(r, style, with_pri));
    return transmit_lines(lines, host, port);
}

struct CollectorOptions {
    std::string bind_host = "0.0.0.0";
    int port = 514;  // 0 picks an ephemeral port
    std::optional<std::size_t> expected_count;
    std::chrono::milliseconds idle_timeout{5000};  // after the last datagram
    std::chrono::milliseconds startup_timeout{30000};  // before the first datagram
};

// UDP listener. Binds in the constructor; collect() yields datagram payloads
// as text in arrival order and stops on the expected count, idle timeout, or
// the stop flag.
class UdpCollector {
  public:
    explicit UdpCollector(const CollectorOptions& options)
        : options_(options), sock_(::socket(AF_INET, SOCK_DGRAM, 0)) {
        if (sock_.fd < 0) throw Error(std::string("socket: ") + std::strerror(errno));
        int one = 1;
        ::setsockopt(sock_.fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        // A fast sender can outrun the drain loop; ask for a receive buffer
        // big enough to absorb a whole dataset burst (kernel clamps as needed).
        int rcvbuf = 4 * 1024 * 1024;
        ::setsockopt(sock_.fd, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof rcvbuf);
        sockaddr_in addr = detail::make_addr(options.bind_host, options.port == 0 ? 1 : options.port);
        addr.sin_port = htons(static_cast<std::uint16_t>(options.port));
        if (::bind(sock_.fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
            throw Error("bind " + options.bind_host + ":" + std::to_string(options.port) + ": " +
                        std::strerror(errno));
        sockaddr_in bound{};
        socklen_t len = sizeof bound;
        ::getsockname(sock_.fd, reinterpret_cast<sockaddr*>(&bound), &len);
        port_ = ntohs(bound.sin_port);
    }

    int port() const { return port_; }

    std::vector<std::string> collect(const std::atomic<bool>* stop = nullptr) {
        std::vector<std::string> lines;
        std::vector<char> buf(max_datagram_bytes + 1);
        auto deadline = std::chrono::steady_clock::now() + options_.startup_timeout;
        while (true) {
            if (stop && stop->load()) break;
            if (options_.expected_count && lines.size() >= *options_.expected_count) break;
            if (std::chrono::steady_clock::now() >= deadline) break;

            pollfd pfd{sock_.fd, POLLIN, 0};
            const int ready = ::poll(&pfd, 1, 100);
            if (ready < 0) {
                if (errno == EINTR) continue;
                throw Error(std::string("poll: ") + std::strerror(errno));
            }
            if (ready == 0) continue;

            const ssize_t n = ::recv(sock_.fd, buf.data(), buf.size(), MSG_TRUNC);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw Error(std::string("recv: ") + std::strerror(errno));
            }
            // An over-limit datagram is kept (truncated) so it shows up in the
            // malformed tally instead of silently vanishing.
            lines.emplace_back(buf.data(),
                               std::min<std::size_t>(static_cast<std::size_t>(n), buf.size() - 1));
            oversized_ += static_cast<std::size_t>(n) > max_datagram_bytes ? 1 : 0;
            deadline = std::chrono::steady_clock::now() + options_.idle_timeout;
        }
        return lines;
    }

    std::size_t oversized() const { return oversized_; }

  private:
    CollectorOptions options_;
    detail::SocketHandle sock_;
    int port_ = 0;
    std::size_t oversized_ = 0;
};

}  // namespace synlog
