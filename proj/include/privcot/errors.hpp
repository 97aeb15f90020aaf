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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace privcot {

// Base type for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad arguments, bad configuration, violated preconditions. Maps to CLI exit 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed text input; carries the 1-based line number when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DuplicateTokenError : public Error {
public:
    using Error::Error;
};

class DegenerateVectorError : public Error {
public:
    using Error::Error;
};

class OutOfVocabularyError : public Error {
public:
    using Error::Error;
};

// Connection setup/teardown failures, broken pipes, unreachable peers.
class TransportError : public Error {
public:
    using Error::Error;
};

// Deadline expired while waiting for a peer. Deliberately not a TransportError
// so callers can tell "server slow" from "server gone".
class TimeoutError : public Error {
public:
    using Error::Error;
};

// An error frame returned by the server.
class ServerError : public Error {
public:
    ServerError(int code, const std::string& msg)
        : Error("server error " + std::to_string(code) + ": " + msg), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

// HTTP adapter failures (non-2xx after retries, schema mismatch).
class HttpError : public Error {
public:
    using Error::Error;
};

// Training loss went non-finite.
class DivergenceError : public Error {
public:
    using Error::Error;
};

// Metric has no defined value for the given input (e.g. empty word set).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

// Cooperative cancellation (SIGINT propagated into long-running loops).
class Interrupted : public Error {
public:
    Interrupted() : Error("interrupted") {}
};

}  // namespace privcot
