#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dpsnn/transport.hpp"

namespace dpsnn {

struct Endpoint
{
    std::string host;
    std::uint16_t port = 0;

    bool operator==(const Endpoint &) const = default;
};

/// Parses a cluster file: one `rank host:port` line per rank, ranks 0..P-1
/// each exactly once, blank lines and `#` comments ignored.
std::vector<Endpoint> parse_cluster(const std::string &text);
std::vector<Endpoint> read_cluster_file(const std::filesystem::path &path);

/// Bound, listening socket. Port 0 picks an ephemeral port.
class TcpListener
{
public:
    explicit TcpListener(std::uint16_t port, const std::string &bind_host = "0.0.0.0");
    TcpListener(TcpListener &&other) noexcept;
    TcpListener &operator=(TcpListener &&) = delete;
    ~TcpListener();

    std::uint16_t port() const { return port_; }
    int fd() const { return fd_; }

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

/// One duplex TCP connection per rank pair. Rank r dials every lower rank
/// and accepts every higher one; the dialling side introduces itself with
/// its rank as a little-endian u16. A reader thread per connection splits
/// the stream into frames using the header's count field.
class TcpTransport : public Transport
{
public:
    TcpTransport(std::uint16_t rank, std::vector<Endpoint> endpoints, TcpListener listener,
            std::chrono::milliseconds connect_timeout);
    /// Binds endpoints[rank].port itself.
    TcpTransport(std::uint16_t rank, std::vector<Endpoint> endpoints,
            std::chrono::milliseconds connect_timeout);
    ~TcpTransport() override;

    TcpTransport(const TcpTransport &) = delete;
    TcpTransport &operator=(const TcpTransport &) = delete;

    std::uint16_t rank() const override { return rank_; }
    std::uint16_t size() const override { return static_cast<std::uint16_t>(endpoints_.size()); }

    void send(std::uint16_t to, std::vector<std::uint8_t> frame) override;
    std::optional<Incoming> receive(std::chrono::milliseconds timeout) override;

private:
    void connect_peers(TcpListener &listener, std::chrono::milliseconds timeout);
    void read_loop(std::uint16_t peer, int fd);

    std::uint16_t rank_;
    std::vector<Endpoint> endpoints_;
    std::vector<int> sockets_;
    std::vector<std::unique_ptr<std::mutex>> send_locks_;
    Mailbox inbox_;
    std::atomic<bool> closing_{false};
    std::vector<std::thread> readers_;
};

} // namespace dpsnn
