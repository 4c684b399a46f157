#pragma once

#include <string>

namespace rankpipe {

/// m copies of the query joined by single spaces.
/// Throws InvalidInputError when the query is blank or m < 1.
std::string repeat_query(const std::string& rewritten, int m);

/// Builds the enriched query: m space-joined copies of the rewritten query,
/// one space, then the pseudo-answer. Output length is always
/// m * len(rewritten) + len(pseudo_answer) + m.
std::string compose_new_query(const std::string& rewritten,
                              const std::string& pseudo_answer,
                              int m);

} // namespace rankpipe
