#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "rankpipe/types.hpp"

namespace rankpipe {

/// Content-addressed store for role outputs: one JSON file per entry under a
/// two-level digest-prefix directory, written via temp file plus atomic
/// rename, so concurrent writers of the same key leave exactly one intact
/// value. Keys are pure functions of (role, template version, input text);
/// values are immutable once written.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path root);

    static std::string make_key(Role role,
                                const std::string& template_version,
                                const std::string& input_text);

    /// The exact value previously put for the key, or nothing. Unreadable or
    /// corrupt entries count as misses.
    std::optional<std::string> get(const std::string& key) const;

    /// Idempotent; throws CacheError on storage failure.
    void put(const std::string& key,
             const std::string& value,
             long input_tokens = 0,
             long output_tokens = 0);

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path entry_path(const std::string& key) const;

    std::filesystem::path root_;
};

} // namespace rankpipe
