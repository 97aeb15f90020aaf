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

#include "privcot/generator.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "privcot/http_generator.hpp"
#include "privcot/metrics.hpp"
#include "testing/fixtures.hpp"

namespace privcot {
namespace {

using testing::toks;

TEST(MockGeneratorTest, IdenticalPromptsGiveIdenticalRationales) {
    auto gen = make_mock_generator(42);
    auto prompt = toks({"cats", "chase", "mice"});
    EXPECT_EQ(gen->generate(prompt), gen->generate(prompt));
    EXPECT_EQ(gen->id(), "mock-42");
}

// Golden output recorded once from the deterministic mock, then pinned.
TEST(MockGeneratorTest, GoldenRationale) {
    MockGenerator gen(7);
    EXPECT_EQ(strings_from_tokens(gen.generate(toks({"rivers", "flood"}))),
              (std::vector<std::string>{"the", "answer", "must", "relate", "to", "rivers", "plus",
                                        "flood", "because", "they", "appear", "together"}));
}

TEST(MockGeneratorTest, DisjointPromptsShareOnlyScaffold) {
    auto gen = make_mock_generator(1);
    auto r1 = gen->generate(toks({"apples", "oranges"}));
    auto r2 = gen->generate(toks({"trains", "planes"}));
    // Any shared word must come from the scaffold, i.e. appear in the
    // rationale of an empty-content prompt too.
    auto scaffold = gen->generate(toks({"apples"}));
    std::unordered_set<std::string> s2;
    for (const auto& t : r2) s2.insert(t.text);
    std::unordered_set<std::string> content1{"apples", "oranges"};
    for (const auto& t : r1) {
        if (s2.count(t.text)) EXPECT_FALSE(content1.count(t.text)) << t.text;
    }
}

// Rationale overlap is monotone in prompt overlap: 5 shared content words
// beats 4 beats 0.
TEST(MockGeneratorTest, OverlapIsMonotoneInPromptOverlap) {
    auto gen = make_mock_generator(3);
    auto base = toks({"ant", "bee", "cow", "dog", "elk"});
    auto one_off = toks({"ant", "bee", "cow", "dog", "fox"});
    auto disjoint = toks({"gnu", "hen", "ibis", "jay", "koi"});
    auto r_base = gen->generate(base);
    double same = token_ratio(gen->generate(base), r_base).value;
    double close = token_ratio(gen->generate(one_off), r_base).value;
    double far = token_ratio(gen->generate(disjoint), r_base).value;
    EXPECT_EQ(same, 100.0);
    EXPECT_LT(close, same);
    EXPECT_GT(close, far);
}

TEST(MockGeneratorTest, EmptyContentStillYieldsRationale) {
    auto gen = make_mock_generator(0);
    // Every word here is scaffold vocabulary.
    auto r = gen->generate(toks({"the", "and", "because"}));
    EXPECT_FALSE(r.empty());
}

class StubServer {
public:
    explicit StubServer(int fail_429_times) : remaining_429_(fail_429_times) {
        server_.Post("/v1/generate", [this](const httplib::Request& req, httplib::Response& res) {
            ++hits_;
            last_body_ = req.body;
            auto auth = req.get_header_value("Authorization");
            if (auth.rfind("Bearer ", 0) != 0) {
                res.status = 401;
                return;
            }
            if (remaining_429_ > 0) {
                --remaining_429_;
                res.status = 429;
                return;
            }
            res.set_content(R"({"text": "The answer is wooded areas."})", "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    int port() const { return port_; }
    int hits() const { return hits_; }
    std::string last_body() const { return last_body_; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> remaining_429_;
    std::atomic<int> hits_{0};
    std::string last_body_;
};

TEST(HttpGeneratorTest, MissingKeyFailsBeforeAnyNetworkCall) {
    ::unsetenv("PRIVCOT_TEST_MISSING_KEY");
    EXPECT_THROW(make_http_generator("http://127.0.0.1:1/v1/generate", "PRIVCOT_TEST_MISSING_KEY"),
                 ValidationError);
}

TEST(HttpGeneratorTest, HappyPathTokenizesResponse) {
    ::setenv("PRIVCOT_TEST_KEY", "sekret", 1);
    StubServer stub(0);
    auto gen = make_http_generator(
        "http://127.0.0.1:" + std::to_string(stub.port()) + "/v1/generate", "PRIVCOT_TEST_KEY");
    auto r = gen->generate(toks({"beaver", "supplies"}));
    EXPECT_EQ(strings_from_tokens(r),
              (std::vector<std::string>{"the", "answer", "is", "wooded", "areas"}));
    EXPECT_EQ(stub.hits(), 1);
    // The request body carries the prompt and a CoT instruction.
    EXPECT_NE(stub.last_body().find("beaver supplies"), std::string::npos);
    EXPECT_NE(stub.last_body().find("step by step"), std::string::npos);
}

TEST(HttpGeneratorTest, RetriesOn429ThenSucceeds) {
    ::setenv("PRIVCOT_TEST_KEY", "sekret", 1);
    StubServer stub(2);  // 429 twice, then 200
    HttpGeneratorOptions opts;
    opts.max_attempts = 3;
    opts.backoff_base = std::chrono::milliseconds(1);
    auto gen = make_http_generator(
        "http://127.0.0.1:" + std::to_string(stub.port()) + "/v1/generate", "PRIVCOT_TEST_KEY",
        opts);
    auto r = gen->generate(toks({"hello"}));
    EXPECT_FALSE(r.empty());
    EXPECT_EQ(stub.hits(), 3);
}

TEST(HttpGeneratorTest, GivesUpAfterRetryCap) {
    ::setenv("PRIVCOT_TEST_KEY", "sekret", 1);
    StubServer stub(100);
    HttpGeneratorOptions opts;
    opts.max_attempts = 3;
    opts.backoff_base = std::chrono::milliseconds(1);
    auto gen = make_http_generator(
        "http://127.0.0.1:" + std::to_string(stub.port()) + "/v1/generate", "PRIVCOT_TEST_KEY",
        opts);
    EXPECT_THROW(gen->generate(toks({"hello"})), HttpError);
    EXPECT_EQ(stub.hits(), 3);
}

TEST(HttpGeneratorTest, SchemaMismatchIsAnError) {
    ::setenv("PRIVCOT_TEST_KEY", "sekret", 1);
    httplib::Server server;
    server.Post("/gen", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"unexpected": 1})", "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    auto gen = make_http_generator("http://127.0.0.1:" + std::to_string(port) + "/gen",
                                   "PRIVCOT_TEST_KEY");
    EXPECT_THROW(gen->generate(toks({"x"})), HttpError);
    server.stop();
    t.join();
}

TEST(HttpGeneratorTest, RejectsNonHttpEndpoints) {
    ::setenv("PRIVCOT_TEST_KEY", "sekret", 1);
    EXPECT_THROW(make_http_generator("https://example.test/gen", "PRIVCOT_TEST_KEY"),
                 ValidationError);
    EXPECT_THROW(make_http_generator("ftp://example.test/gen", "PRIVCOT_TEST_KEY"),
                 ValidationError);
}

}  // namespace
}  // namespace privcot
