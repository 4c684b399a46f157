#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rankpipe/types.hpp"

namespace rankpipe {

/// doc_id -> passage text resolver for the candidate pool.
struct Corpus {
    std::map<std::string, std::string> texts;

    bool contains(const std::string& doc_id) const { return texts.count(doc_id) > 0; }
    const std::string& text_for(const std::string& doc_id) const;

    /// JSON-lines {"doc_id": ..., "text": ...}; duplicate ids are a DataError.
    static Corpus load_jsonl(const std::filesystem::path& file);
};

/// "query_id<TAB>text" lines, order preserved. Blank query text is a
/// DataError.
std::vector<Query> load_queries_tsv(const std::filesystem::path& file);

} // namespace rankpipe
