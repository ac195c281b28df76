// Copyright 2026 The Ontocoder Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "ontocoder/error.hpp"
#include "ontocoder/hash.hpp"
#include "ontocoder/llm.hpp"

namespace ontocoder {

/// Cache key of a request: stable hash of (model_id, temperature,
/// system_text, user_text). Requests differing in any of those get
/// distinct keys.
inline std::string cache_key(const CompletionRequest& req) {
    char temp[64];
    std::snprintf(temp, sizeof(temp), "%.17g", req.temperature);
    std::string material = req.model_id;
    material.push_back('\x1f');
    material += temp;
    material.push_back('\x1f');
    material.push_back(req.system_text ? '1' : '0');
    if (req.system_text) material += *req.system_text;
    material.push_back('\x1f');
    material += req.user_text;
    return hex64(fnv1a64(material));
}

struct CacheEntry {
    std::string key;
    CompletionRequest request;
    std::string text;
    std::string backend_id;
    std::string timestamp; // ISO-8601 UTC, informational only
};

inline nlohmann::json cache_entry_to_json(const CacheEntry& e) {
    nlohmann::json req{
        {"model_id", e.request.model_id},
        {"temperature", e.request.temperature},
        {"system_text", e.request.system_text ? nlohmann::json(*e.request.system_text) : nlohmann::json(nullptr)},
        {"user_text", e.request.user_text},
        {"max_output_tokens", e.request.max_output_tokens},
    };
    return nlohmann::json{{"key", e.key},
                          {"request", req},
                          {"text", e.text},
                          {"backend_id", e.backend_id},
                          {"timestamp", e.timestamp}};
}

inline CacheEntry cache_entry_from_json(const nlohmann::json& j) {
    CacheEntry e;
    e.key = j.at("key").get<std::string>();
    const auto& req = j.at("request");
    e.request.model_id = req.at("model_id").get<std::string>();
    e.request.temperature = req.at("temperature").get<double>();
    if (!req.at("system_text").is_null()) e.request.system_text = req.at("system_text").get<std::string>();
    e.request.user_text = req.at("user_text").get<std::string>();
    e.request.max_output_tokens = req.at("max_output_tokens").get<int>();
    e.text = j.at("text").get<std::string>();
    e.backend_id = j.at("backend_id").get<std::string>();
    e.timestamp = j.value("timestamp", "");
    return e;
}

inline std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Content-addressed response cache wrapping any backend. One JSON file
/// per key under cache_dir; a hit returns the stored text with
/// cached=true, a miss delegates and stores. Writes are serialized per
/// key (sharded locks).
class CachedBackend : public Backend {
public:
    CachedBackend(Backend& inner, std::filesystem::path cache_dir)
        : inner_(&inner), dir_(std::move(cache_dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_)) {
            throw BackendError("cache directory not writable: " + dir_.string());
        }
    }

    using Backend::complete;

    std::string id() const override { return "cached(" + inner_->id() + ")"; }

    CompletionResponse complete(const CompletionRequest& req, const QueryContext& ctx) override {
        validate_request(req);
        const std::string key = cache_key(req);
        const auto path = entry_path(key);
        std::lock_guard<std::mutex> lock(shard(key));

        if (std::filesystem::exists(path)) {
            CacheEntry e = read_entry(path);
            if (e.request.model_id != req.model_id || e.request.user_text != req.user_text ||
                e.request.system_text != req.system_text) {
                throw BackendError("cache key collision at " + path.string());
            }
            return CompletionResponse{e.text, e.backend_id, true, 0};
        }

        CompletionResponse resp = inner_->complete(req, ctx);
        CacheEntry e{key, req, resp.text, resp.backend_id, utc_timestamp()};
        write_entry(path, e);
        return resp;
    }

    static CacheEntry read_entry(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw BackendError("cannot read cache entry: " + path.string());
        nlohmann::json j;
        try {
            in >> j;
            return cache_entry_from_json(j);
        } catch (const nlohmann::json::exception& ex) {
            throw BackendError("corrupt cache entry " + path.string() + ": " + ex.what());
        }
    }

private:
    std::filesystem::path entry_path(const std::string& key) const { return dir_ / (key + ".json"); }

    std::mutex& shard(const std::string& key) {
        return locks_[fnv1a64(key) % locks_.size()];
    }

    void write_entry(const std::filesystem::path& path, const CacheEntry& e) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw BackendError("cannot write cache entry: " + path.string());
        out << cache_entry_to_json(e).dump(2) << "\n";
        if (!out) throw BackendError("short write on cache entry: " + path.string());
    }

    Backend* inner_;
    std::filesystem::path dir_;
    std::array<std::mutex, 16> locks_;
};

/// Replays a directory of recorded cache entries. Unlike the cache
/// wrapper it has no inner backend: a prompt with no recorded answer is
/// an error.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(const std::filesystem::path& dir) {
        if (!std::filesystem::is_directory(dir)) {
            throw BackendError("replay directory does not exist: " + dir.string());
        }
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
            CacheEntry e = CachedBackend::read_entry(entry.path());
            entries_.emplace(e.key, std::move(e));
        }
    }

    explicit ReplayBackend(std::unordered_map<std::string, CacheEntry> entries)
        : entries_(std::move(entries)) {}

    using Backend::complete;

    std::string id() const override { return "replay"; }

    std::size_t size() const { return entries_.size(); }

    CompletionResponse complete(const CompletionRequest& req, const QueryContext&) override {
        validate_request(req);
        const std::string key = cache_key(req);
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            throw BackendError("replay miss: no recorded answer for key " + key +
                               " (model '" + req.model_id + "')");
        }
        return CompletionResponse{it->second.text, id(), false, 0};
    }

private:
    std::unordered_map<std::string, CacheEntry> entries_;
};

struct CacheStats {
    std::size_t entries = 0;
    std::uintmax_t bytes = 0;
};

inline CacheStats cache_stats(const std::filesystem::path& dir) {
    CacheStats stats;
    if (!std::filesystem::is_directory(dir)) return stats;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        ++stats.entries;
        stats.bytes += entry.file_size();
    }
    return stats;
}

inline std::size_t cache_clear(const std::filesystem::path& dir) {
    std::size_t removed = 0;
    if (!std::filesystem::is_directory(dir)) return removed;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        std::filesystem::remove(entry.path());
        ++removed;
    }
    return removed;
}

} // namespace ontocoder
