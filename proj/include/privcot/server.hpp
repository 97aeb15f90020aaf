// Copyright 2026 The privcot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "privcot/errors.hpp"
#include "privcot/net.hpp"
#include "privcot/service.hpp"

namespace privcot {

// NDJSON-over-TCP rationale server. Connections are handled concurrently,
// each connection serially, so responses always come back in request order
// per connection. Stops on destruction.
class ServeHandle {
public:
    ServeHandle(const std::string& bind_host, std::uint16_t port,
                std::shared_ptr<GeneratorBackend> backend)
        : core_(std::move(backend)) {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) throw TransportError(std::string("socket: ") + std::strerror(errno));
        int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, bind_host.c_str(), &addr.sin_addr) != 1) {
            ::close(listen_fd_);
            throw TransportError("invalid bind address: " + bind_host);
        }
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            int err = errno;
            ::close(listen_fd_);
            throw TransportError(std::string("bind: ") + std::strerror(err));
        }
        if (::listen(listen_fd_, 16) != 0) {
            int err = errno;
            ::close(listen_fd_);
            throw TransportError(std::string("listen: ") + std::strerror(err));
        }
        sockaddr_in bound{};
        socklen_t len = sizeof(bound);
        ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
        port_ = ntohs(bound.sin_port);
        accept_thread_ = std::thread([this] { accept_loop(); });
    }

    ServeHandle(const ServeHandle&) = delete;
    ServeHandle& operator=(const ServeHandle&) = delete;

    ~ServeHandle() { stop(); }

    std::uint16_t port() const { return port_; }

    void stop() {
        bool was_running = !stopping_.exchange(true);
        if (!was_running) return;
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        if (accept_thread_.joinable()) accept_thread_.join();
        for (auto& t : workers_)
            if (t.joinable()) t.join();
    }

private:
    void accept_loop() {
        for (;;) {
            int fd = ::accept(listen_fd_, nullptr, nullptr);
            if (fd < 0) {
                if (errno == EINTR) continue;
                return;  // listen socket closed: shutting down
            }
            workers_.emplace_back([this, fd] { connection_loop(fd); });
        }
    }

    void connection_loop(int fd) {
        LineSocket sock(fd);
        // Short read deadlines so stop() is never held up by an idle client.
        while (!stopping_.load()) {
            std::string line;
            try {
                line = sock.read_line(std::chrono::milliseconds(200));
            } catch (const TimeoutError&) {
                continue;
            } catch (const TransportError&) {
                return;  // client closed or reset
            }
            if (line.empty()) continue;
            try {
                sock.write_line(core_.handle_line(line));
            } catch (const TransportError&) {
                return;  // client went away mid-reply
            }
        }
    }

    ServerCore core_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread accept_thread_;
    std::vector<std::thread> workers_;
};

inline std::unique_ptr<ServeHandle> serve(const std::string& bind_host, std::uint16_t port,
                                          std::shared_ptr<GeneratorBackend> backend) {
    return std::make_unique<ServeHandle>(bind_host, port, std::move(backend));
}

}  // namespace privcot
