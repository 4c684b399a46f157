#include "rankpipe/compose.hpp"

#include "rankpipe/errors.hpp"

namespace rankpipe {

namespace {

bool is_blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

} // namespace

std::string repeat_query(const std::string& rewritten, int m) {
    if (is_blank(rewritten)) {
        throw InvalidInputError("cannot compose an empty query");
    }
    if (m < 1) {
        throw InvalidInputError("repetition count must be >= 1, got " + std::to_string(m));
    }
    std::string out;
    out.reserve(rewritten.size() * static_cast<std::size_t>(m) + static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        if (i > 0) out += ' ';
        out += rewritten;
    }
    return out;
}

std::string compose_new_query(const std::string& rewritten,
                              const std::string& pseudo_answer,
                              int m) {
    std::string out = repeat_query(rewritten, m);
    out += ' ';
    out += pseudo_answer;
    return out;
}

} // namespace rankpipe
