#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "rankpipe/eval.hpp"
#include "support/test_util.hpp"

using namespace rankpipe;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string quoted(const std::string& text) { return "'" + text + "'"; }

/// Runs the installed binary with the given arguments, capturing both
/// streams. Arguments must not contain single quotes.
CliResult run_cli(const std::vector<std::string>& args) {
    static int invocation = 0;
    const test_util::TempDir streams;
    const auto out_file = streams / ("out" + std::to_string(++invocation));
    const auto err_file = streams / ("err" + std::to_string(invocation));

    std::string command = quoted(RANKPIPE_CLI);
    for (const auto& arg : args) command += " " + quoted(arg);
    command += " >" + quoted(out_file.string()) + " 2>" + quoted(err_file.string());

    const int status = std::system(command.c_str());
    CliResult result;
    result.code = WIFEXITED(status) ? WEXITSTATUS(status) : 128;
    result.out = test_util::read_file(out_file);
    result.err = test_util::read_file(err_file);
    return result;
}

/// Five-document fixture: input order d1..d5, graded so the oracle reorders
/// to d4 d3 d2 d1 d5 (ties keep input order).
struct Fixture {
    test_util::TempDir dir;
    std::string run = (dir / "input.run").string();
    std::string corpus = (dir / "corpus.jsonl").string();
    std::string queries = (dir / "queries.tsv").string();
    std::string qrels = (dir / "qrels.txt").string();

    Fixture() {
        std::string run_text;
        std::string corpus_text;
        std::string qrels_text;
        const int grades[] = {0, 1, 2, 3, 0};
        for (int i = 1; i <= 5; ++i) {
            const std::string doc = "d" + std::to_string(i);
            run_text += "q1 Q0 " + doc + " " + std::to_string(i) + " " +
                        std::to_string(1.0 - 0.1 * i) + " first\n";
            corpus_text += "{\"doc_id\": \"" + doc + "\", \"text\": \"Passage number " +
                           std::to_string(i) + " about topic " + doc + "\"}\n";
            qrels_text += "q1 0 " + doc + " " + std::to_string(grades[i - 1]) + "\n";
        }
        test_util::write_file(run, run_text);
        test_util::write_file(corpus, corpus_text);
        test_util::write_file(queries, "q1\twhich topic\n");
        test_util::write_file(qrels, qrels_text);
    }
};

} // namespace

TEST_CASE("oracle rerank, eval, compare, and cost run end to end") {
    Fixture f;
    const std::string out = (f.dir / "reranked.run").string();
    const std::string call_log = (f.dir / "calls.jsonl").string();

    const CliResult rerank = run_cli({"rerank", "--run", f.run, "--corpus", f.corpus,
                                      "--queries", f.queries, "--out", out, "--backend",
                                      "oracle", "--oracle-qrels", f.qrels, "--window", "5",
                                      "--step", "2", "--call-log", call_log, "--tag", "demo"});
    CHECK(rerank.code == 0);
    CHECK(rerank.out.find("reranked 1 queries") != std::string::npos);

    const RunFile reranked = RunFile::load(out);
    CHECK(reranked.ranking("q1") ==
          std::vector<std::string>{"d4", "d3", "d2", "d1", "d5"});
    const std::string raw = test_util::read_file(out);
    CHECK(raw.rfind("# config:", 0) == 0);
    CHECK(raw.find(" demo\n") != std::string::npos);

    const CliResult eval = run_cli(
        {"eval", "--run", out, "--qrels", f.qrels, "--cutoffs", "1,5", "--json"});
    CHECK(eval.code == 0);
    const auto eval_json = nlohmann::json::parse(eval.out);
    CHECK(eval_json["mean"]["1"].get<double>() == doctest::Approx(1.0));
    CHECK(eval_json["mean"]["5"].get<double>() == doctest::Approx(1.0));

    const CliResult eval_text = run_cli({"eval", "--run", out, "--qrels", f.qrels});
    CHECK(eval_text.code == 0);
    CHECK(eval_text.out.find("nDCG@10") != std::string::npos);
    CHECK(eval_text.out.find("mean") != std::string::npos);

    const CliResult compare = run_cli({"compare", "--run-a", f.run, "--run-b", out,
                                       "--qrels", f.qrels, "--cutoff", "5", "--json"});
    CHECK(compare.code == 0);
    const auto compare_json = nlohmann::json::parse(compare.out);
    CHECK(compare_json["mean_delta"].get<double>() > 0.0);
    CHECK(compare_json["per_query"]["q1"]["ndcg_b"].get<double>() == doctest::Approx(1.0));

    const CliResult cost = run_cli({"cost", "--log", call_log, "--json"});
    CHECK(cost.code == 0);
    const auto cost_json = nlohmann::json::parse(cost.out);
    CHECK(cost_json["query_count"].get<int>() == 1);
    CHECK(cost_json["total"]["input_tokens"].get<long>() > 0);
    CHECK(cost_json["total"]["usd"].get<double>() > 0.0);
}

TEST_CASE("cost accounting matches the posted price sheet") {
    test_util::TempDir dir;
    const auto log = dir / "calls.jsonl";
    test_util::write_file(log,
                          "{\"query_id\":\"q1\",\"input_tokens\":19890,"
                          "\"output_tokens\":732,\"latency_ms\":100}\n");
    const CliResult cost = run_cli({"cost", "--log", log.string(), "--json"});
    CHECK(cost.code == 0);
    const auto cost_json = nlohmann::json::parse(cost.out);
    CHECK(cost_json["total"]["usd"].get<double>() == doctest::Approx(0.641).epsilon(0.002));
    CHECK(cost_json["prices_per_1k"]["input"].get<double>() == doctest::Approx(0.03));
    CHECK(cost_json["prices_per_1k"]["output"].get<double>() == doctest::Approx(0.06));
}

TEST_CASE("usage problems exit 1") {
    Fixture f;
    CHECK(run_cli({}).code == 1);                             // subcommand required
    CHECK(run_cli({"rerank", "--nope"}).code == 1);           // unknown flag
    CHECK(run_cli({"rerank", "--run", f.run}).code == 1);     // missing required options
    CHECK(run_cli({"--help"}).code == 0);

    const std::string out = (f.dir / "out.run").string();
    const std::vector<std::string> base{"rerank", "--run",     f.run,  "--corpus",
                                        f.corpus, "--queries", f.queries, "--out",
                                        out,      "--backend", "oracle", "--oracle-qrels",
                                        f.qrels};
    auto with = [&base](std::initializer_list<std::string> extra) {
        std::vector<std::string> args = base;
        args.insert(args.end(), extra);
        return args;
    };
    CHECK(run_cli(with({"--window", "0"})).code == 1);
    CHECK(run_cli(with({"--step", "30"})).code == 1); // step exceeds window
    CHECK(run_cli(with({"--features", "telepathy"})).code == 1);
    CHECK(run_cli(with({"--roles", "oracle"})).code == 1);
    const CliResult bad_backend =
        run_cli({"rerank", "--run", f.run, "--corpus", f.corpus, "--queries", f.queries,
                 "--out", out, "--backend", "imaginary"});
    CHECK(bad_backend.code == 1);
    CHECK(bad_backend.err.find("imaginary") != std::string::npos);
}

TEST_CASE("data problems exit 2") {
    Fixture f;
    const std::string out = (f.dir / "out.run").string();
    const CliResult missing_run =
        run_cli({"rerank", "--run", (f.dir / "absent.run").string(), "--corpus", f.corpus,
                 "--queries", f.queries, "--out", out, "--backend", "oracle",
                 "--oracle-qrels", f.qrels});
    CHECK(missing_run.code == 2);
    CHECK(run_cli({"eval", "--run", f.run, "--qrels",
                   (f.dir / "absent.qrels").string()})
              .code == 2);

    // A qrels file sharing no queries with the run is a data error too.
    const std::string foreign = (f.dir / "foreign.qrels").string();
    test_util::write_file(foreign, "zz 0 d1 1\n");
    CHECK(run_cli({"eval", "--run", f.run, "--qrels", foreign}).code == 2);
}

TEST_CASE("backend failures exit 3 unless fail-soft is set") {
    Fixture f;
    const std::string out = (f.dir / "out.run").string();
    const std::string scripts = (f.dir / "scripts").string();
    std::filesystem::create_directories(scripts);

    const std::vector<std::string> base{"rerank", "--run",     f.run,     "--corpus",
                                        f.corpus, "--queries", f.queries, "--out",
                                        out,      "--backend", "scripted", "--scripts",
                                        scripts};
    const CliResult strict = run_cli(base);
    CHECK(strict.code == 3);

    std::vector<std::string> soft = base;
    soft.push_back("--fail-soft");
    const CliResult relaxed = run_cli(soft);
    CHECK(relaxed.code == 0);
    const RunFile fallback = RunFile::load(out);
    CHECK(fallback.ranking("q1") ==
          std::vector<std::string>{"d1", "d2", "d3", "d4", "d5"});
}
