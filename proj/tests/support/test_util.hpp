#pragma once

// Shared helpers for the test binaries: scratch directories, instrumented
// backends, independent reference implementations used as oracles, and
// fixture builders.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rankpipe/backend.hpp"
#include "rankpipe/reranker.hpp"
#include "rankpipe/types.hpp"

namespace test_util {

/// Self-cleaning scratch directory under the system temp root.
class TempDir {
public:
    TempDir() {
        static std::atomic<std::uint64_t> counter{0};
        std::mt19937_64 rng(std::random_device{}());
        std::ostringstream name;
        name << "rankpipe_test_" << std::hex << rng() << "_" << counter.fetch_add(1);
        path_ = std::filesystem::temp_directory_path() / name.str();
        std::filesystem::create_directories(path_);
    }

    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_file(const std::filesystem::path& file, const std::string& content) {
    std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << content;
}

/// Classifies a request by its system message and counts calls per role.
/// Wraps any inner backend.
class CountingBackend : public rankpipe::ChatBackend {
public:
    explicit CountingBackend(rankpipe::ChatBackend& inner) : inner_(inner) {}

    rankpipe::Exchange complete(const std::vector<rankpipe::ChatMessage>& messages,
                                const rankpipe::CompletionParams& params) override {
        classify(messages);
        return inner_.complete(messages, params);
    }

    std::string name() const override { return inner_.name(); }

    int rewriter_calls() const { return rewriter_.load(); }
    int answerer_calls() const { return answerer_.load(); }
    int summarizer_calls() const { return summarizer_.load(); }
    int reranker_calls() const { return reranker_.load(); }
    int total_calls() const {
        return rewriter_ + answerer_ + summarizer_ + reranker_ + other_;
    }

private:
    void classify(const std::vector<rankpipe::ChatMessage>& messages) {
        if (messages.empty() || messages.front().role != rankpipe::Speaker::system) {
            ++other_;
            return;
        }
        const std::string& text = messages.front().text;
        if (text == rankpipe::reranker_prompt::kSystem) {
            ++reranker_;
        } else if (text.find("rewriting user queries") != std::string::npos) {
            ++rewriter_;
        } else if (text.find("retrieval expert") != std::string::npos) {
            ++answerer_;
        } else if (text.find("summarizing passages") != std::string::npos) {
            ++summarizer_;
        } else {
            ++other_;
        }
    }

    rankpipe::ChatBackend& inner_;
    std::atomic<int> rewriter_{0};
    std::atomic<int> answerer_{0};
    std::atomic<int> summarizer_{0};
    std::atomic<int> reranker_{0};
    std::atomic<int> other_{0};
};

/// Records the highest number of calls in flight at once. Each call dwells
/// briefly so overlap is observable.
class GaugeBackend : public rankpipe::ChatBackend {
public:
    explicit GaugeBackend(rankpipe::ChatBackend& inner) : inner_(inner) {}

    rankpipe::Exchange complete(const std::vector<rankpipe::ChatMessage>& messages,
                                const rankpipe::CompletionParams& params) override {
        const int now = current_.fetch_add(1) + 1;
        int peak = peak_.load();
        while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        auto exchange = inner_.complete(messages, params);
        current_.fetch_sub(1);
        return exchange;
    }

    std::string name() const override { return inner_.name(); }

    int peak_in_flight() const { return peak_.load(); }

private:
    rankpipe::ChatBackend& inner_;
    std::atomic<int> current_{0};
    std::atomic<int> peak_{0};
};

/// Replies to every request with a fixed string.
class FixedReplyBackend : public rankpipe::ChatBackend {
public:
    explicit FixedReplyBackend(std::string reply) : reply_(std::move(reply)) {}

    rankpipe::Exchange complete(const std::vector<rankpipe::ChatMessage>& messages,
                                const rankpipe::CompletionParams&) override {
        rankpipe::Exchange exchange;
        exchange.request_messages = messages;
        exchange.reply_text = reply_;
        exchange.input_tokens = rankpipe::estimate_tokens(messages);
        exchange.output_tokens = rankpipe::estimate_tokens(reply_);
        exchange.backend_name = "fixed";
        return exchange;
    }

    std::string name() const override { return "fixed"; }

private:
    std::string reply_;
};

/// Independent nDCG reference: same convention (gain 2^g - 1, discount
/// log2(rank + 1)), written directly from the formula.
inline double brute_ndcg(const std::vector<std::string>& ranking,
                         const std::map<std::string, int>& grades,
                         int k) {
    auto gain_at = [&](const std::string& doc) {
        auto it = grades.find(doc);
        const int g = it == grades.end() ? 0 : it->second;
        return std::pow(2.0, g) - 1.0;
    };
    double dcg = 0.0;
    for (int i = 0; i < k && i < static_cast<int>(ranking.size()); ++i) {
        dcg += gain_at(ranking[static_cast<std::size_t>(i)]) / (std::log(i + 2.0) / std::log(2.0));
    }
    std::vector<double> gains;
    for (const auto& [doc, g] : grades) {
        gains.push_back(std::pow(2.0, g) - 1.0);
    }
    std::sort(gains.rbegin(), gains.rend());
    double ideal = 0.0;
    for (int i = 0; i < k && i < static_cast<int>(gains.size()); ++i) {
        ideal += gains[static_cast<std::size_t>(i)] / (std::log(i + 2.0) / std::log(2.0));
    }
    return ideal == 0.0 ? 0.0 : dcg / ideal;
}

/// Independent sliding-pass reference: walks windows back to first and stable
/// sorts each window slice by grade, descending, which is exactly what a
/// grade-oracle ranker produces. Returns the ordering after every window.
inline std::vector<std::vector<std::string>> brute_pass_states(
    std::vector<std::string> ordering,
    const std::map<std::string, int>& grades,
    int w,
    int s) {
    const int n = static_cast<int>(ordering.size());
    std::vector<int> ends;
    if (n <= w) {
        ends.push_back(n);
    } else {
        int e = n;
        while (e - w + 1 > 1) {
            ends.push_back(e);
            e -= s;
        }
        ends.push_back(w);
    }
    std::vector<std::vector<std::string>> states;
    for (int end : ends) {
        const int start = std::max(1, end - w + 1);
        auto grade_of = [&](const std::string& doc) {
            auto it = grades.find(doc);
            return it == grades.end() ? 0 : it->second;
        };
        std::stable_sort(ordering.begin() + (start - 1), ordering.begin() + end,
                         [&](const std::string& a, const std::string& b) {
                             return grade_of(a) > grade_of(b);
                         });
        states.push_back(ordering);
    }
    return states;
}

/// Trace sink that keeps every record in memory, in order.
class CollectingTraceSink : public rankpipe::TraceSink {
public:
    void on_window(const rankpipe::WindowTraceRecord& record) override {
        std::lock_guard lock(mutex_);
        records_.push_back(record);
    }

    std::vector<rankpipe::WindowTraceRecord> records() const {
        std::lock_guard lock(mutex_);
        return records_;
    }

private:
    mutable std::mutex mutex_;
    std::vector<rankpipe::WindowTraceRecord> records_;
};

} // namespace test_util
