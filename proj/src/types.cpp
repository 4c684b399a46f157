#include "rankpipe/types.hpp"

#include <sstream>

#include "rankpipe/chat.hpp"

namespace rankpipe {

std::string to_string(Speaker s) {
    switch (s) {
        case Speaker::system: return "system";
        case Speaker::user: return "user";
        case Speaker::assistant: return "assistant";
    }
    throw InternalError("unknown speaker value");
}

Speaker speaker_from_string(const std::string& s) {
    if (s == "system") return Speaker::system;
    if (s == "user") return Speaker::user;
    if (s == "assistant") return Speaker::assistant;
    throw InvalidInputError("unknown speaker role '" + s + "'");
}

std::string to_string(Role role) {
    switch (role) {
        case Role::rewriter: return "rewriter";
        case Role::answerer: return "answerer";
        case Role::summarizer: return "summarizer";
        case Role::reranker: return "reranker";
    }
    throw InternalError("unknown role value");
}

Role role_from_string(const std::string& name) {
    if (name == "rewriter") return Role::rewriter;
    if (name == "answerer") return Role::answerer;
    if (name == "summarizer") return Role::summarizer;
    if (name == "reranker") return Role::reranker;
    throw InvalidInputError("unknown role '" + name + "'");
}

FeatureSet FeatureSet::parse(const std::string& csv) {
    FeatureSet out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ',')) {
        // tolerate stray spaces around entries
        auto begin = item.find_first_not_of(" \t");
        auto end = item.find_last_not_of(" \t");
        if (begin == std::string::npos) continue;
        std::string name = item.substr(begin, end - begin + 1);
        if (name == "standard" || name == "relevance_standard") {
            out.relevance_standard = true;
        } else if (name == "cot") {
            out.cot = true;
        } else if (name == "format" || name == "format_requirement") {
            out.format_requirement = true;
        } else {
            throw ConfigError("unknown reranker prompt feature '" + name +
                              "' (expected standard, cot, format)");
        }
    }
    return out;
}

std::string FeatureSet::to_string() const {
    std::string out;
    auto add = [&out](const char* name) {
        if (!out.empty()) out += ',';
        out += name;
    };
    if (relevance_standard) add("standard");
    if (cot) add("cot");
    if (format_requirement) add("format");
    return out;
}

void PipelineConfig::validate() const {
    if (repeat_m < 1) {
        throw ConfigError("repeat_m must be >= 1, got " + std::to_string(repeat_m));
    }
    if (window_w < 1) {
        throw ConfigError("window_w must be >= 1, got " + std::to_string(window_w));
    }
    if (step_s < 1 || step_s > window_w) {
        throw ConfigError("step_s must satisfy 1 <= s <= w, got s=" + std::to_string(step_s) +
                          " w=" + std::to_string(window_w));
    }
    if (top_k < 1) {
        throw ConfigError("top_k must be >= 1, got " + std::to_string(top_k));
    }
    if (temperature < 0.0 || temperature > 2.0) {
        throw ConfigError("temperature must lie in [0, 2]");
    }
}

} // namespace rankpipe
