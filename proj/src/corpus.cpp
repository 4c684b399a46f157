#include "rankpipe/corpus.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "rankpipe/errors.hpp"

namespace rankpipe {

const std::string& Corpus::text_for(const std::string& doc_id) const {
    auto it = texts.find(doc_id);
    if (it == texts.end()) {
        throw DataError("corpus has no passage with doc_id '" + doc_id + "'");
    }
    return it->second;
}

Corpus Corpus::load_jsonl(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw DataError("cannot read corpus file " + file.string());
    }
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("corpus " + file.string() + " line " + std::to_string(line_no) +
                            ": " + e.what());
        }
        if (!record.contains("doc_id") || !record["doc_id"].is_string() ||
            !record.contains("text") || !record["text"].is_string()) {
            throw DataError("corpus " + file.string() + " line " + std::to_string(line_no) +
                            ": expected string fields \"doc_id\" and \"text\"");
        }
        auto doc_id = record["doc_id"].get<std::string>();
        auto [it, inserted] = corpus.texts.emplace(doc_id, record["text"].get<std::string>());
        if (!inserted) {
            throw DataError("corpus " + file.string() + " line " + std::to_string(line_no) +
                            ": duplicate doc_id '" + doc_id + "'");
        }
    }
    return corpus;
}

std::vector<Query> load_queries_tsv(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw DataError("cannot read queries file " + file.string());
    }
    std::vector<Query> queries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw DataError("queries " + file.string() + " line " + std::to_string(line_no) +
                            ": expected \"query_id<TAB>text\"");
        }
        Query query;
        query.query_id = line.substr(0, tab);
        query.text = line.substr(tab + 1);
        if (query.query_id.empty() ||
            query.text.find_first_not_of(" \t") == std::string::npos) {
            throw DataError("queries " + file.string() + " line " + std::to_string(line_no) +
                            ": blank query id or text");
        }
        queries.push_back(std::move(query));
    }
    return queries;
}

} // namespace rankpipe
