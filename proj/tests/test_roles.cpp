#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rankpipe/errors.hpp"
#include "rankpipe/oracle_backend.hpp"
#include "rankpipe/roles.hpp"
#include "rankpipe/scripted_backend.hpp"
#include "support/test_util.hpp"

using namespace rankpipe;

TEST_CASE("trim, quote, and label stripping behave minimally") {
    CHECK(trim_copy("  a b \n") == "a b");
    CHECK(trim_copy("\t\r\n ") == "");
    CHECK(trim_copy("solid") == "solid");

    CHECK(strip_wrapping_quotes("\"quoted\"") == "quoted");
    CHECK(strip_wrapping_quotes("'single'") == "single");
    CHECK(strip_wrapping_quotes("\"unbalanced") == "\"unbalanced");
    CHECK(strip_wrapping_quotes("no quotes") == "no quotes");
    CHECK(strip_wrapping_quotes("a \"middle\" b") == "a \"middle\" b");

    CHECK(strip_leading_rewrite_label("Rewritten query: find X") == "find X");
    CHECK(strip_leading_rewrite_label("rewritten: find X") == "find X");
    CHECK(strip_leading_rewrite_label("Query: find X") == "find X");
    CHECK(strip_leading_rewrite_label("find X: a study") == "find X: a study");
    CHECK(strip_leading_rewrite_label("plain text") == "plain text");
}

TEST_CASE("role input digests are stable and input-sensitive") {
    const auto a = role_input_digest(Role::rewriter, "v1", "text");
    CHECK(a == role_input_digest(Role::rewriter, "v1", "text"));
    CHECK(a != role_input_digest(Role::answerer, "v1", "text"));
    CHECK(a != role_input_digest(Role::rewriter, "v2", "text"));
    CHECK(a != role_input_digest(Role::rewriter, "v1", "other"));
}

TEST_CASE("rewrite_query passes the query through an echo backend") {
    OracleBackend echo({});
    Query query{"q1", "what is wifi vs bluetooth"};
    CHECK(rewrite_query(query, echo, default_rewriter_template()) ==
          "what is wifi vs bluetooth");
}

TEST_CASE("rewrite_query strips quotes and a leading label from the reply") {
    const auto tpl = default_rewriter_template();
    Query query{"q1", "original"};
    const auto request = render_prompt(tpl, {{"query", query.text}});

    test_util::TempDir dir;
    ScriptedBackend::record(dir.path(), request,
                            "Rewritten query: \"A formal request about Wi-Fi.\"");
    ScriptedBackend backend(dir.path());
    CHECK(rewrite_query(query, backend, tpl) == "A formal request about Wi-Fi.");
}

TEST_CASE("rewrite_query replays the documented fixture rewrite") {
    const auto tpl = default_rewriter_template();
    Query query{"q1", "what is wifi vs bluetooth"};
    const auto request = render_prompt(tpl, {{"query", query.text}});

    test_util::TempDir dir;
    ScriptedBackend::record(dir.path(), request,
                            "Provide a comparative analysis of Wi-Fi and Bluetooth, detailing "
                            "their differences and similarities.");
    ScriptedBackend backend(dir.path());
    CHECK(rewrite_query(query, backend, tpl) ==
          "Provide a comparative analysis of Wi-Fi and Bluetooth, detailing their "
          "differences and similarities.");
}

TEST_CASE("role executors reject blank inputs and empty replies") {
    OracleBackend echo({});
    CHECK_THROWS_AS(rewrite_query({"q1", "   "}, echo, default_rewriter_template()),
                    InvalidInputError);
    CHECK_THROWS_AS(generate_answer("", echo, default_answerer_template()), InvalidInputError);
    Passage blank{"d1", " \n"};
    CHECK_THROWS_AS(summarize_passage(blank, echo, default_summarizer_template()),
                    InvalidInputError);

    test_util::FixedReplyBackend silent("   \n ");
    try {
        rewrite_query({"q9", "text"}, silent, default_rewriter_template());
        FAIL("expected RoleFailureError");
    } catch (const RoleFailureError& e) {
        CHECK(e.role() == "rewriter");
        CHECK(std::string(e.what()).find("q9") != std::string::npos);
    }
}

TEST_CASE("generate_answer returns the trimmed reply") {
    const auto tpl = default_answerer_template();
    const auto request = render_prompt(tpl, {{"query", "Q rewritten"}});
    test_util::TempDir dir;
    ScriptedBackend::record(dir.path(), request, "  A generated passage.  \n");
    ScriptedBackend backend(dir.path());
    CHECK(generate_answer("Q rewritten", backend, tpl) == "A generated passage.");
}

TEST_CASE("summarize_passage records both lengths and echoes through the oracle") {
    OracleBackend echo({});
    Passage passage{"d7", "a passage that resists compression"};
    const auto summary = summarize_passage(passage, echo, default_summarizer_template());
    CHECK(summary.doc_id == "d7");
    CHECK(summary.summary == passage.text);
    CHECK(summary.source_length_chars == passage.text.size());
    CHECK(summary.summary_length_chars == summary.summary.size());
}

TEST_CASE("summarize_passages preserves input order under concurrency") {
    OracleBackend echo({});
    std::vector<Passage> passages;
    for (int i = 0; i < 40; ++i) {
        passages.push_back({"d" + std::to_string(i), "text " + std::to_string(i)});
    }
    const auto results = summarize_passages(passages, echo, default_summarizer_template(), 8);
    REQUIRE(results.size() == passages.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].doc_id == passages[i].doc_id);
        CHECK(results[i].summary == passages[i].text);
    }
}

TEST_CASE("summarize_passages never exceeds its in-flight budget") {
    OracleBackend echo({});
    test_util::GaugeBackend gauge(echo);
    std::vector<Passage> passages;
    for (int i = 0; i < 100; ++i) {
        passages.push_back({"d" + std::to_string(i), "body " + std::to_string(i)});
    }
    const auto results = summarize_passages(passages, gauge, default_summarizer_template(), 8);
    CHECK(results.size() == 100);
    CHECK(gauge.peak_in_flight() <= 8);
    CHECK(gauge.peak_in_flight() >= 2); // the pool did overlap
    CHECK_THROWS_AS(summarize_passages(passages, gauge, default_summarizer_template(), 0),
                    ConfigError);
}

TEST_CASE("summarize_passages surfaces a backend failure") {
    test_util::TempDir dir;
    ScriptedBackend backend(dir.path()); // empty: every call fails
    std::vector<Passage> passages{{"d1", "text"}};
    CHECK_THROWS_AS(summarize_passages(passages, backend, default_summarizer_template(), 4),
                    BackendUnavailableError);
}
