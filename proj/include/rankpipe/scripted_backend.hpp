#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rankpipe/backend.hpp"

namespace rankpipe {

/// Offline replay backend: a directory of `<digest>.json` files, one per
/// request, where the digest is `messages_digest` of the request messages.
/// Each file holds {"reply": ..., "input_tokens": ..., "output_tokens": ...,
/// "latency_ms": ...}; missing usage fields fall back to estimates.
/// Bit-deterministic and stateless after construction.
class ScriptedBackend : public ChatBackend {
public:
    explicit ScriptedBackend(std::filesystem::path dir);

    /// Throws BackendUnavailableError when no script exists for the request.
    Exchange complete(const std::vector<ChatMessage>& messages,
                      const CompletionParams& params) override;

    std::string name() const override { return "scripted"; }

    /// Fixture authoring helper: writes the script entry a later `complete`
    /// call with the same messages will replay. Negative token counts are
    /// omitted from the file and estimated at replay time.
    static void record(const std::filesystem::path& dir,
                       const std::vector<ChatMessage>& request,
                       const std::string& reply,
                       long input_tokens = -1,
                       long output_tokens = -1,
                       long latency_ms = 0);

private:
    std::filesystem::path dir_;
};

} // namespace rankpipe
