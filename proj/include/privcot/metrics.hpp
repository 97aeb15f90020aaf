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

#include <string>
#include <unordered_set>
#include <vector>

#include "privcot/errors.hpp"
#include "privcot/token.hpp"

namespace privcot {

// Percent of the unique words of a candidate rationale that also occur in
// the reference. Deliberately asymmetric: the candidate's unique-word count
// is the denominator.
struct TokenRatioReport {
    double value = 0.0;          // percent, in [0, 100]
    std::size_t unique_count = 0;        // |unique(r')|
    std::size_t intersection_count = 0;  // |unique(r') /\ unique(r)|
};

inline TokenRatioReport token_ratio(const std::vector<Token>& r_prime,
                                    const std::vector<Token>& r) {
    std::unordered_set<std::string> u;
    for (const auto& t : r_prime) u.insert(t.text);
    if (u.empty()) throw UndefinedMetricError("candidate rationale has no words");
    std::unordered_set<std::string> ref;
    for (const auto& t : r) ref.insert(t.text);
    std::size_t i = 0;
    for (const auto& w : u)
        if (ref.count(w)) ++i;
    TokenRatioReport report;
    report.unique_count = u.size();
    report.intersection_count = i;
    report.value = 100.0 * static_cast<double>(i) / static_cast<double>(u.size());
    return report;
}

// Exact-match fraction over aligned label lists.
inline double accuracy(const std::vector<std::vector<Token>>& predictions,
                       const std::vector<std::vector<Token>>& gold) {
    if (predictions.size() != gold.size())
        throw ValidationError("predictions and gold must have equal length");
    if (predictions.empty()) throw ValidationError("empty evaluation set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == gold[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

}  // namespace privcot
