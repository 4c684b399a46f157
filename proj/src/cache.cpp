#include "rankpipe/cache.hpp"

#include <chrono>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rankpipe/digest.hpp"
#include "rankpipe/errors.hpp"

namespace rankpipe {

ResponseCache::ResponseCache(std::filesystem::path root) : root_(std::move(root)) {
    std::error_code ec;
    std::filesystem::create_directories(root_, ec);
    if (ec) {
        throw CacheError("cannot create cache root " + root_.string() + ": " + ec.message());
    }
}

std::string ResponseCache::make_key(Role role,
                                    const std::string& template_version,
                                    const std::string& input_text) {
    return sha256_hex(to_string(role) + "\n" + template_version + "\n" + input_text);
}

std::filesystem::path ResponseCache::entry_path(const std::string& key) const {
    // Two-level fan-out keeps directory sizes sane for large corpora.
    return root_ / key.substr(0, 2) / key.substr(2, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    std::ifstream in(entry_path(key), std::ios::binary);
    if (!in) return std::nullopt;
    nlohmann::json record;
    try {
        in >> record;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    if (!record.contains("value") || !record["value"].is_string()) {
        return std::nullopt;
    }
    return record["value"].get<std::string>();
}

void ResponseCache::put(const std::string& key,
                        const std::string& value,
                        long input_tokens,
                        long output_tokens) {
    const std::filesystem::path target = entry_path(key);
    std::error_code ec;
    std::filesystem::create_directories(target.parent_path(), ec);
    if (ec) {
        throw CacheError("cannot create cache directory " + target.parent_path().string() +
                         ": " + ec.message());
    }

    nlohmann::json record{
        {"key", key},
        {"value", value},
        {"created_at",
         std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
             .count()},
        {"usage", {{"input_tokens", input_tokens}, {"output_tokens", output_tokens}}},
    };

    // Unique temp name per writer; the final rename is atomic, so racing
    // writers of one key leave a single intact entry.
    const std::filesystem::path temp =
        target.parent_path() /
        (key + ".tmp." +
         std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    {
        std::ofstream out(temp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw CacheError("cannot write cache temp file " + temp.string());
        }
        out << record.dump(2) << '\n';
        if (!out) {
            throw CacheError("write to cache temp file " + temp.string() + " failed");
        }
    }
    std::filesystem::rename(temp, target, ec);
    if (ec) {
        std::filesystem::remove(temp);
        throw CacheError("cannot finalize cache entry " + target.string() + ": " + ec.message());
    }
}

} // namespace rankpipe
