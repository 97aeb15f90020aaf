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

#include <chrono>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "privcot/errors.hpp"
#include "privcot/net.hpp"
#include "privcot/service.hpp"

namespace privcot {

// One client-side connection: lines out, lines in, in order.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void write_line(const std::string& line) = 0;
    virtual std::string read_line(std::chrono::milliseconds deadline) = 0;
};

class TcpTransport final : public Transport {
public:
    TcpTransport(const std::string& host, std::uint16_t port)
        : socket_(LineSocket::connect(host, port)) {}

    void write_line(const std::string& line) override { socket_.write_line(line); }
    std::string read_line(std::chrono::milliseconds deadline) override {
        return socket_.read_line(deadline);
    }

private:
    LineSocket socket_;
};

// In-process transport that feeds lines straight into a ServerCore. Every
// frame in both directions is captured, which is what the privacy-boundary
// tests scan: whatever would have gone over the network is here, verbatim.
class LoopbackTransport final : public Transport {
public:
    explicit LoopbackTransport(std::shared_ptr<GeneratorBackend> backend)
        : core_(std::move(backend)) {}

    void write_line(const std::string& line) override {
        std::lock_guard<std::mutex> lock(mutex_);
        sent_.push_back(line);
        std::string reply = core_.handle_line(line);
        received_.push_back(reply);
        pending_.push_back(std::move(reply));
    }

    std::string read_line(std::chrono::milliseconds) override {
        std::lock_guard<std::mutex> lock(mutex_);
        if (pending_.empty()) throw TimeoutError("no pending loopback reply");
        std::string line = std::move(pending_.front());
        pending_.pop_front();
        return line;
    }

    // Every line the client wrote / the server answered, in order.
    std::vector<std::string> captured_client_frames() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return sent_;
    }
    std::vector<std::string> captured_server_frames() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return received_;
    }
    std::vector<std::string> captured_frames() const {
        std::lock_guard<std::mutex> lock(mutex_);
        std::vector<std::string> all = sent_;
        all.insert(all.end(), received_.begin(), received_.end());
        return all;
    }

private:
    ServerCore core_;
    mutable std::mutex mutex_;
    std::deque<std::string> pending_;
    std::vector<std::string> sent_;
    std::vector<std::string> received_;
};

}  // namespace privcot
