#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rankpipe/backend.hpp"
#include "rankpipe/errors.hpp"
#include "rankpipe/oracle_backend.hpp"
#include "rankpipe/prompt.hpp"
#include "rankpipe/reranker.hpp"
#include "rankpipe/scripted_backend.hpp"
#include "support/test_util.hpp"

using namespace rankpipe;

TEST_CASE("estimate_tokens rounds up at one token per four characters") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("abcd") == 1);
    CHECK(estimate_tokens("abcde") == 2);
    CHECK(estimate_tokens("12345678") == 2);
    CHECK(estimate_tokens(std::string(401, 'x')) == 101);

    std::vector<ChatMessage> messages{{Speaker::system, "abcd"}, {Speaker::user, "efgh"}};
    CHECK(estimate_tokens(messages) == 2);
}

TEST_CASE("messages_digest is order- and content-sensitive") {
    std::vector<ChatMessage> a{{Speaker::system, "s"}, {Speaker::user, "u"}};
    std::vector<ChatMessage> b{{Speaker::user, "u"}, {Speaker::system, "s"}};
    std::vector<ChatMessage> c{{Speaker::system, "s"}, {Speaker::user, "v"}};
    CHECK(messages_digest(a) == messages_digest(a));
    CHECK(messages_digest(a) != messages_digest(b));
    CHECK(messages_digest(a) != messages_digest(c));
    CHECK(messages_digest(a).size() == 64);
}

TEST_CASE("scripted backend replays recorded replies with usage") {
    test_util::TempDir dir;
    std::vector<ChatMessage> request{{Speaker::system, "sys"}, {Speaker::user, "hello"}};
    ScriptedBackend::record(dir.path(), request, "canned reply", 120, 34, 250);

    ScriptedBackend backend(dir.path());
    const Exchange exchange = backend.complete(request, {});
    CHECK(exchange.reply_text == "canned reply");
    CHECK(exchange.input_tokens == 120);
    CHECK(exchange.output_tokens == 34);
    CHECK(exchange.latency_ms == 250);
    CHECK(exchange.backend_name == "scripted");
    CHECK(exchange.request_messages == request);
}

TEST_CASE("scripted backend estimates usage when the script omits it") {
    test_util::TempDir dir;
    std::vector<ChatMessage> request{{Speaker::user, "abcdefgh"}};
    ScriptedBackend::record(dir.path(), request, "abcd");

    ScriptedBackend backend(dir.path());
    const Exchange exchange = backend.complete(request, {});
    CHECK(exchange.input_tokens == 2);
    CHECK(exchange.output_tokens == 1);
}

TEST_CASE("scripted backend refuses unknown requests and bad directories") {
    test_util::TempDir dir;
    ScriptedBackend backend(dir.path());
    CHECK_THROWS_AS(backend.complete({{Speaker::user, "never recorded"}}, {}),
                    BackendUnavailableError);
    CHECK_THROWS_AS(ScriptedBackend(dir.path() / "missing"), ConfigError);
}

TEST_CASE("oracle backend sorts a ranking prompt by planted relevance") {
    OracleBackend backend({{"pa", 0}, {"pb", 3}, {"pc", 1}});
    const auto messages = build_reranker_prompt("q", {"pa", "pb", "pc"}, {});
    CHECK(backend.complete(messages, {}).reply_text == "[2] > [3] > [1]");
}

TEST_CASE("oracle backend breaks grade ties by original window order") {
    OracleBackend backend({{"x", 1}, {"y", 1}, {"z", 2}});
    const auto messages = build_reranker_prompt("q", {"x", "y", "z"}, FeatureSet::all());
    CHECK(backend.complete(messages, {}).reply_text == "[3] > [1] > [2]");
}

TEST_CASE("oracle backend treats unplanted texts as grade zero") {
    OracleBackend backend({{"only this", 2}});
    const auto messages = build_reranker_prompt("q", {"stranger", "only this"}, {});
    CHECK(backend.complete(messages, {}).reply_text == "[2] > [1]");
}

TEST_CASE("oracle backend echoes role prompts") {
    OracleBackend backend({});

    const auto rewriter = render_prompt(default_rewriter_template(), {{"query", "orig query"}});
    CHECK(backend.complete(rewriter, {}).reply_text == "orig query");

    const auto answerer = render_prompt(default_answerer_template(), {{"query", "some question"}});
    CHECK(backend.complete(answerer, {}).reply_text == "some question");

    const auto summarizer =
        render_prompt(default_summarizer_template(), {{"passage", "the passage body"}});
    CHECK(backend.complete(summarizer, {}).reply_text == "the passage body");
}

TEST_CASE("call log appends and reads back entries") {
    test_util::TempDir dir;
    const auto file = dir / "calls.jsonl";
    {
        CallLog log(file);
        Exchange exchange;
        exchange.request_messages = {{Speaker::user, "ping"}};
        exchange.reply_text = "pong";
        exchange.input_tokens = 11;
        exchange.output_tokens = 7;
        exchange.latency_ms = 42;
        exchange.backend_name = "fixed";
        exchange.retries = 2;
        log.append(exchange, "q1");
        exchange.reply_text = "pong2";
        log.append(exchange, "q2");
    }
    const auto entries = CallLog::read(file);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].query_id == "q1");
    CHECK(entries[0].exchange.reply_text == "pong");
    CHECK(entries[0].exchange.input_tokens == 11);
    CHECK(entries[0].exchange.output_tokens == 7);
    CHECK(entries[0].exchange.latency_ms == 42);
    CHECK(entries[0].exchange.retries == 2);
    CHECK(entries[0].exchange.request_messages ==
          std::vector<ChatMessage>{{Speaker::user, "ping"}});
    CHECK(entries[1].query_id == "q2");
    CHECK(entries[1].exchange.reply_text == "pong2");
}

TEST_CASE("call log read rejects corrupt lines") {
    test_util::TempDir dir;
    const auto file = dir / "bad.jsonl";
    test_util::write_file(file, "{not json\n");
    CHECK_THROWS_AS(CallLog::read(file), DataError);
}

TEST_CASE("logging backend attributes exchanges to its query id") {
    test_util::TempDir dir;
    const auto file = dir / "log.jsonl";
    test_util::FixedReplyBackend inner("ok");
    {
        CallLog log(file);
        LoggingBackend logged(inner, &log, "query-7");
        logged.complete({{Speaker::user, "x"}}, {});
        logged.complete({{Speaker::user, "y"}}, {});
    }
    const auto entries = CallLog::read(file);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].query_id == "query-7");
    CHECK(entries[1].query_id == "query-7");
}
