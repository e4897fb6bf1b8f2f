#include "dpsnn/tcp_transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dpsnn/errors.hpp"
#include "dpsnn/frame.hpp"

namespace dpsnn {

std::vector<Endpoint> parse_cluster(const std::string &text)
{
    std::map<std::uint32_t, Endpoint> by_rank;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
        {
            line.erase(hash);
        }
        std::istringstream fields(line);
        std::string rank_text, address, extra;
        if (!(fields >> rank_text))
        {
            continue;
        }
        const auto bad = [&](const std::string &why) {
            return std::invalid_argument(
                    "cluster file line " + std::to_string(line_no) + ": " + why);
        };
        if (!(fields >> address) || (fields >> extra))
        {
            throw bad("expected `rank host:port`");
        }
        const auto colon = address.rfind(':');
        if (colon == std::string::npos || colon == 0)
        {
            throw bad("expected host:port, got `" + address + "`");
        }
        std::uint32_t rank = 0;
        unsigned long port = 0;
        try
        {
            std::size_t used = 0;
            rank = static_cast<std::uint32_t>(std::stoul(rank_text, &used));
            if (used != rank_text.size())
            {
                throw std::invalid_argument(rank_text);
            }
            port = std::stoul(address.substr(colon + 1), &used);
            if (used != address.size() - colon - 1 || port > 65535)
            {
                throw std::invalid_argument(address);
            }
        }
        catch (const std::logic_error &)
        {
            throw bad("malformed rank or port");
        }
        if (!by_rank.emplace(rank, Endpoint{address.substr(0, colon),
                                           static_cast<std::uint16_t>(port)})
                        .second)
        {
            throw bad("rank " + std::to_string(rank) + " listed twice");
        }
    }
    std::vector<Endpoint> endpoints;
    for (const auto &[rank, ep] : by_rank)
    {
        if (rank != endpoints.size())
        {
            throw std::invalid_argument("cluster file is missing rank " +
                    std::to_string(endpoints.size()));
        }
        endpoints.push_back(ep);
    }
    if (endpoints.empty())
    {
        throw std::invalid_argument("cluster file lists no ranks");
    }
    return endpoints;
}

std::vector<Endpoint> read_cluster_file(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open cluster file " + path.string());
    }
    std::stringstream text;
    text << in.rdbuf();
    return parse_cluster(text.str());
}

namespace {

std::runtime_error sys_error(const std::string &what)
{
    return std::runtime_error(what + ": " + std::strerror(errno));
}

bool write_all(int fd, const std::uint8_t *data, std::size_t size)
{
    while (size > 0)
    {
        const ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
        if (n < 0)
        {
            if (errno == EINTR)
            {
                continue;
            }
            return false;
        }
        data += n;
        size -= static_cast<std::size_t>(n);
    }
    return true;
}

/// False on orderly EOF or error before `size` bytes arrived.
bool read_all(int fd, std::uint8_t *data, std::size_t size)
{
    while (size > 0)
    {
        const ssize_t n = ::recv(fd, data, size, 0);
        if (n == 0)
        {
            return false;
        }
        if (n < 0)
        {
            if (errno == EINTR)
            {
                continue;
            }
            return false;
        }
        data += n;
        size -= static_cast<std::size_t>(n);
    }
    return true;
}

int dial(const Endpoint &ep, std::chrono::steady_clock::time_point deadline)
{
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo *found = nullptr;
    const std::string port = std::to_string(ep.port);
    if (const int rc = ::getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &found); rc != 0)
    {
        throw std::runtime_error("cannot resolve " + ep.host + ": " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, &::freeaddrinfo);
    while (true)
    {
        const int fd = ::socket(found->ai_family, found->ai_socktype, found->ai_protocol);
        if (fd < 0)
        {
            throw sys_error("socket");
        }
        if (::connect(fd, found->ai_addr, found->ai_addrlen) == 0)
        {
            return fd;
        }
        ::close(fd);
        if (std::chrono::steady_clock::now() >= deadline)
        {
            return -1;
        }
        // peer may not be listening yet
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
}

void tune(int fd)
{
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

} // namespace

TcpListener::TcpListener(std::uint16_t port, const std::string &bind_host)
{
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0)
    {
        throw sys_error("socket");
    }
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, bind_host.c_str(), &addr.sin_addr) != 1)
    {
        ::close(fd_);
        throw std::invalid_argument("bind address must be an IPv4 literal: " + bind_host);
    }
    if (::bind(fd_, reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) != 0 ||
            ::listen(fd_, 64) != 0)
    {
        const auto err = sys_error("cannot listen on port " + std::to_string(port));
        ::close(fd_);
        throw err;
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd_, reinterpret_cast<sockaddr *>(&addr), &len);
    port_ = ntohs(addr.sin_port);
}

TcpListener::TcpListener(TcpListener &&other) noexcept : fd_(other.fd_), port_(other.port_)
{
    other.fd_ = -1;
}

TcpListener::~TcpListener()
{
    if (fd_ >= 0)
    {
        ::close(fd_);
    }
}

TcpTransport::TcpTransport(std::uint16_t rank, std::vector<Endpoint> endpoints,
        TcpListener listener, std::chrono::milliseconds connect_timeout)
        : rank_(rank)
        , endpoints_(std::move(endpoints))
        , sockets_(endpoints_.size(), -1)
{
    if (rank_ >= endpoints_.size())
    {
        throw std::invalid_argument("rank " + std::to_string(rank_) + " not in cluster");
    }
    for (std::size_t i = 0; i < endpoints_.size(); ++i)
    {
        send_locks_.push_back(std::make_unique<std::mutex>());
    }
    try
    {
        connect_peers(listener, connect_timeout);
    }
    catch (...)
    {
        for (int fd : sockets_)
        {
            if (fd >= 0)
            {
                ::close(fd);
            }
        }
        throw;
    }
    for (std::uint16_t peer = 0; peer < endpoints_.size(); ++peer)
    {
        if (peer != rank_)
        {
            readers_.emplace_back([this, peer] { read_loop(peer, sockets_[peer]); });
        }
    }
}

TcpTransport::TcpTransport(std::uint16_t rank, std::vector<Endpoint> endpoints,
        std::chrono::milliseconds connect_timeout)
        : TcpTransport(rank, endpoints,
                  TcpListener(rank < endpoints.size() ? endpoints[rank].port : 0),
                  connect_timeout)
{
}

void TcpTransport::connect_peers(TcpListener &listener, std::chrono::milliseconds timeout)
{
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (std::uint16_t peer = 0; peer < rank_; ++peer)
    {
        const int fd = dial(endpoints_[peer], deadline);
        if (fd < 0)
        {
            throw ExchangeFailure("could not connect to rank " + std::to_string(peer) +
                            " at " + endpoints_[peer].host + ":" +
                            std::to_string(endpoints_[peer].port),
                    peer, 0);
        }
        tune(fd);
        const std::uint8_t hello[2] = {static_cast<std::uint8_t>(rank_),
                static_cast<std::uint8_t>(rank_ >> 8)};
        if (!write_all(fd, hello, sizeof(hello)))
        {
            ::close(fd);
            throw ExchangeFailure("handshake with rank " + std::to_string(peer) + " failed",
                    peer, 0);
        }
        sockets_[peer] = fd;
    }
    std::size_t expected = endpoints_.size() - rank_ - 1;
    while (expected > 0)
    {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
        pollfd pfd{listener.fd(), POLLIN, 0};
        const int ready = left.count() > 0 ? ::poll(&pfd, 1, static_cast<int>(left.count())) : 0;
        if (ready <= 0)
        {
            for (std::uint16_t peer = rank_ + 1; peer < endpoints_.size(); ++peer)
            {
                if (sockets_[peer] < 0)
                {
                    throw ExchangeFailure("rank " + std::to_string(peer) +
                                    " never connected to rank " + std::to_string(rank_),
                            peer, 0);
                }
            }
        }
        const int fd = ::accept(listener.fd(), nullptr, nullptr);
        if (fd < 0)
        {
            if (errno == EINTR)
            {
                continue;
            }
            throw sys_error("accept");
        }
        std::uint8_t hello[2];
        if (!read_all(fd, hello, sizeof(hello)))
        {
            ::close(fd);
            continue;
        }
        const auto peer = static_cast<std::uint16_t>(hello[0] | (hello[1] << 8));
        if (peer <= rank_ || peer >= endpoints_.size() || sockets_[peer] >= 0)
        {
            ::close(fd);
            throw ProtocolViolation("unexpected handshake from rank " + std::to_string(peer));
        }
        tune(fd);
        sockets_[peer] = fd;
        --expected;
    }
}

void TcpTransport::read_loop(std::uint16_t peer, int fd)
{
    while (true)
    {
        std::vector<std::uint8_t> frame(frame_header_size);
        if (!read_all(fd, frame.data(), frame.size()))
        {
            break;
        }
        std::size_t payload = 0;
        try
        {
            payload = frame_payload_size(frame);
        }
        catch (const FrameCorruption &)
        {
            // hand the bad header to the exchanger, which reports it
            inbox_.push({peer, false, std::move(frame)});
            break;
        }
        frame.resize(frame_header_size + payload);
        if (!read_all(fd, frame.data() + frame_header_size, payload))
        {
            break;
        }
        inbox_.push({peer, false, std::move(frame)});
    }
    if (!closing_)
    {
        inbox_.push({peer, true, {}});
    }
}

void TcpTransport::send(std::uint16_t to, std::vector<std::uint8_t> frame)
{
    if (to >= endpoints_.size() || to == rank_)
    {
        throw ExchangeFailure("no connection to rank " + std::to_string(to), to, 0);
    }
    std::lock_guard lock(*send_locks_[to]);
    if (!write_all(sockets_[to], frame.data(), frame.size()))
    {
        throw ExchangeFailure("send to rank " + std::to_string(to) + " failed", to, 0);
    }
}

std::optional<Incoming> TcpTransport::receive(std::chrono::milliseconds timeout)
{
    return inbox_.pop(timeout);
}

TcpTransport::~TcpTransport()
{
    closing_ = true;
    for (int fd : sockets_)
    {
        if (fd >= 0)
        {
            ::shutdown(fd, SHUT_RDWR);
        }
    }
    for (std::thread &t : readers_)
    {
        t.join();
    }
    for (int fd : sockets_)
    {
        if (fd >= 0)
        {
            ::close(fd);
        }
    }
}

} // namespace dpsnn
