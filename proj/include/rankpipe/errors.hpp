#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rankpipe {

/// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid pipeline, window, or pricing configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An operation was called with input that violates its contract.
class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// A prompt template referenced a placeholder with no binding.
class RenderError : public Error {
public:
    explicit RenderError(std::string placeholder)
        : Error("unbound placeholder '" + placeholder + "' in prompt template"),
          placeholder_(std::move(placeholder)) {}

    const std::string& placeholder() const { return placeholder_; }

private:
    std::string placeholder_;
};

/// Malformed or unresolvable input data (run files, qrels, corpus, scripts).
class DataError : public Error {
public:
    using Error::Error;
};

/// Two data sets that must share queries have none in common.
class EmptyIntersectionError : public DataError {
public:
    using DataError::DataError;
};

class BackendError : public Error {
public:
    using Error::Error;
};

/// Transport failed, or the provider rejected the call, after the retry budget.
class BackendUnavailableError : public BackendError {
public:
    using BackendError::BackendError;
};

/// The provider returned a reply with no usable text.
class EmptyReplyError : public BackendError {
public:
    using BackendError::BackendError;
};

/// The provider rejected the request as too long. Carries the request size in
/// characters so callers can see how far over budget the prompt was.
class ContextOverflowError : public BackendError {
public:
    ContextOverflowError(const std::string& what, std::size_t request_chars)
        : BackendError(what), request_chars_(request_chars) {}

    std::size_t request_chars() const { return request_chars_; }

private:
    std::size_t request_chars_ = 0;
};

/// No rank list could be extracted from a reranker reply.
class UnparseableReplyError : public Error {
public:
    using Error::Error;
};

/// A role call produced nothing usable for a specific query or passage.
class RoleFailureError : public Error {
public:
    RoleFailureError(std::string role, std::string context, const std::string& what)
        : Error("role '" + role + "' failed for " + context + ": " + what),
          role_(std::move(role)),
          context_(std::move(context)) {}

    const std::string& role() const { return role_; }
    const std::string& context() const { return context_; }

private:
    std::string role_;
    std::string context_;
};

/// The response cache could not read or write its storage.
class CacheError : public Error {
public:
    using Error::Error;
};

/// An internal invariant was violated; indicates a bug, not bad input.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace rankpipe
