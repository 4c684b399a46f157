#pragma once

#include <string>
#include <vector>

#include "rankpipe/errors.hpp"

namespace rankpipe {

enum class Speaker { system, user, assistant };

std::string to_string(Speaker s);
Speaker speaker_from_string(const std::string& s);

/// One turn of a chat conversation. Assistant turns may carry empty text when
/// used as placeholders inside a scripted conversation.
struct ChatMessage {
    Speaker role = Speaker::user;
    std::string text;

    bool operator==(const ChatMessage&) const = default;
};

} // namespace rankpipe
