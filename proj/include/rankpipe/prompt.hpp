#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rankpipe/chat.hpp"
#include "rankpipe/types.hpp"

namespace rankpipe {

/// A role's chat prompt with `{name}` placeholders. The version string is
/// derived from the message content, so any edit to a template file yields a
/// new version and therefore new cache keys.
struct PromptTemplate {
    Role role = Role::rewriter;
    std::string version;
    std::vector<ChatMessage> messages;

    static PromptTemplate from_messages(Role role, std::vector<ChatMessage> messages);

    /// Loads the plain-text template format: a line holding exactly "@system",
    /// "@user", or "@assistant" starts a message; all following lines up to
    /// the next marker are that message's text.
    static PromptTemplate load(Role role, const std::filesystem::path& file);

    /// Serializes to the same plain-text format `load` reads.
    std::string serialize() const;
    void save(const std::filesystem::path& file) const;
};

/// Substitutes every `{name}` placeholder with its binding, verbatim, with no
/// escaping and no rescanning of substituted text. Identical inputs always
/// produce identical bytes. Throws RenderError naming the first placeholder
/// that has no binding.
std::vector<ChatMessage> render_prompt(const PromptTemplate& tpl,
                                       const std::map<std::string, std::string>& bindings);

// Shipped defaults for the three generation roles.
PromptTemplate default_rewriter_template();
PromptTemplate default_answerer_template();
PromptTemplate default_summarizer_template();

PromptTemplate default_template(Role role);

} // namespace rankpipe
