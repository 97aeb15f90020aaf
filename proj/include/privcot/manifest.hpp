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

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "privcot/errors.hpp"

namespace privcot {

// FNV-1a 64 over raw file bytes; provenance fingerprint, not a MAC.
inline std::string fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open for hashing: " + path);
    std::uint64_t h = 1469598103934665603ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + hex;
}

// Records everything needed to reproduce a run with deterministic backends:
// seed, budget, backend id, input fingerprints. No timestamps on purpose —
// byte-identical reruns must produce byte-identical manifests.
struct Manifest {
    std::string command;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    std::vector<double> epsilons;  // sweep only
    std::string backend_id;
    std::map<std::string, std::string> input_hashes;
    std::map<std::string, std::int64_t> counts;
    bool complete = false;

    nlohmann::json to_json() const {
        return nlohmann::json{{"command", command},     {"seed", seed},
                              {"epsilon", epsilon},     {"epsilons", epsilons},
                              {"backend", backend_id},  {"inputs", input_hashes},
                              {"counts", counts},       {"complete", complete}};
    }

    static Manifest from_json(const nlohmann::json& j) {
        Manifest m;
        m.command = j.value("command", "");
        m.seed = j.value("seed", std::uint64_t{0});
        m.epsilon = j.value("epsilon", 0.0);
        if (j.contains("epsilons")) m.epsilons = j.at("epsilons").get<std::vector<double>>();
        m.backend_id = j.value("backend", "");
        if (j.contains("inputs"))
            m.input_hashes = j.at("inputs").get<std::map<std::string, std::string>>();
        if (j.contains("counts"))
            m.counts = j.at("counts").get<std::map<std::string, std::int64_t>>();
        m.complete = j.value("complete", false);
        return m;
    }
};

inline void write_manifest(const Manifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open for writing: " + path);
    out << m.to_json().dump(2) << '\n';
}

inline Manifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ParseError("invalid manifest JSON: " + path);
    return Manifest::from_json(j);
}

}  // namespace privcot
