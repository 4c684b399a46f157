#include "rankpipe/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rankpipe/errors.hpp"

namespace rankpipe {

namespace {

std::string fixed(double value, int decimals) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*f", decimals, value);
    return buffer;
}

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

} // namespace

int Qrels::grade(const std::string& query_id, const std::string& doc_id) const {
    auto q = judgments.find(query_id);
    if (q == judgments.end()) return 0;
    auto d = q->second.find(doc_id);
    return d == q->second.end() ? 0 : d->second;
}

bool Qrels::has_query(const std::string& query_id) const {
    return judgments.find(query_id) != judgments.end();
}

Qrels Qrels::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw DataError("cannot read qrels file " + file.string());
    }
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (tokens.size() != 4) {
            throw DataError("qrels " + file.string() + " line " + std::to_string(line_no) +
                            ": expected \"query_id 0 doc_id grade\", got " +
                            std::to_string(tokens.size()) + " fields");
        }
        int grade = 0;
        try {
            grade = std::stoi(tokens[3]);
        } catch (const std::exception&) {
            throw DataError("qrels " + file.string() + " line " + std::to_string(line_no) +
                            ": grade '" + tokens[3] + "' is not an integer");
        }
        if (grade < 0) {
            throw DataError("qrels " + file.string() + " line " + std::to_string(line_no) +
                            ": negative grade " + std::to_string(grade));
        }
        qrels.judgments[tokens[0]][tokens[2]] = grade;
    }
    return qrels;
}

const std::vector<RunEntry>& RunFile::for_query(const std::string& query_id) const {
    static const std::vector<RunEntry> empty;
    auto it = entries.find(query_id);
    return it == entries.end() ? empty : it->second;
}

std::vector<std::string> RunFile::ranking(const std::string& query_id) const {
    std::vector<std::string> ids;
    for (const auto& entry : for_query(query_id)) {
        ids.push_back(entry.doc_id);
    }
    return ids;
}

void RunFile::add(const std::string& query_id, RunEntry entry) {
    auto [it, inserted] = entries.try_emplace(query_id);
    if (inserted) {
        query_order.push_back(query_id);
    }
    it->second.push_back(std::move(entry));
}

RunFile RunFile::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw DataError("cannot read run file " + file.string());
    }
    RunFile run;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line[0] == '#') continue;
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (tokens.size() != 6) {
            throw DataError("run " + file.string() + " line " + std::to_string(line_no) +
                            ": expected \"query_id Q0 doc_id rank score tag\", got " +
                            std::to_string(tokens.size()) + " fields");
        }
        RunEntry entry;
        entry.doc_id = tokens[2];
        try {
            entry.rank = std::stoi(tokens[3]);
            entry.score = std::stod(tokens[4]);
        } catch (const std::exception&) {
            throw DataError("run " + file.string() + " line " + std::to_string(line_no) +
                            ": rank '" + tokens[3] + "' or score '" + tokens[4] +
                            "' is not numeric");
        }
        run.add(tokens[0], std::move(entry));
    }

    for (const auto& query_id : run.query_order) {
        auto& list = run.entries.at(query_id);
        std::stable_sort(list.begin(), list.end(),
                         [](const RunEntry& a, const RunEntry& b) { return a.rank < b.rank; });
        std::set<std::string> seen;
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (list[i].rank != static_cast<int>(i) + 1) {
                throw DataError("run " + file.string() + " query " + query_id +
                                ": ranks are not 1.." + std::to_string(list.size()) +
                                " without gaps");
            }
            if (i > 0 && list[i].score > list[i - 1].score) {
                throw DataError("run " + file.string() + " query " + query_id +
                                ": score increases at rank " + std::to_string(i + 1));
            }
            if (!seen.insert(list[i].doc_id).second) {
                throw DataError("run " + file.string() + " query " + query_id +
                                ": duplicate doc '" + list[i].doc_id + "'");
            }
        }
    }
    return run;
}

void RunFile::save(const std::filesystem::path& file,
                   const std::string& tag,
                   const std::vector<std::string>& header_lines) const {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write run file " + file.string());
    }
    for (const auto& header : header_lines) {
        out << "# " << header << '\n';
    }
    for (const auto& query_id : query_order) {
        for (const auto& entry : for_query(query_id)) {
            out << query_id << " Q0 " << entry.doc_id << ' ' << entry.rank << ' '
                << fixed(entry.score, 6) << ' ' << tag << '\n';
        }
    }
    if (!out) {
        throw DataError("write to run file " + file.string() + " failed");
    }
}

double ndcg_at_k(const std::vector<std::string>& ranking,
                 const Qrels& qrels,
                 const std::string& query_id,
                 int k) {
    if (k < 1) {
        throw InvalidInputError("nDCG cutoff must be positive, got " + std::to_string(k));
    }
    double dcg = 0.0;
    const std::size_t depth = std::min(ranking.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < depth; ++i) {
        const int grade = qrels.grade(query_id, ranking[i]);
        dcg += (std::exp2(grade) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }

    std::vector<int> grades;
    if (auto it = qrels.judgments.find(query_id); it != qrels.judgments.end()) {
        for (const auto& [doc_id, grade] : it->second) {
            grades.push_back(grade);
        }
    }
    std::sort(grades.rbegin(), grades.rend());
    double idcg = 0.0;
    const std::size_t ideal_depth = std::min(grades.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < ideal_depth; ++i) {
        idcg += (std::exp2(grades[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
    }
    if (idcg == 0.0) return 0.0;
    return dcg / idcg;
}

EvalReport evaluate_run(const RunFile& run, const Qrels& qrels, const std::vector<int>& cutoffs) {
    if (cutoffs.empty()) {
        throw ConfigError("evaluation needs at least one cutoff");
    }
    bool any_shared = false;
    for (const auto& query_id : run.query_order) {
        if (qrels.has_query(query_id)) {
            any_shared = true;
            break;
        }
    }
    if (!any_shared) {
        throw EmptyIntersectionError("run and qrels share no query");
    }

    EvalReport report;
    report.cutoffs = cutoffs;
    for (const auto& [query_id, judged] : qrels.judgments) {
        const auto ranking = run.ranking(query_id);
        for (int k : cutoffs) {
            report.per_query[query_id][k] = ndcg_at_k(ranking, qrels, query_id, k);
        }
    }
    for (int k : cutoffs) {
        double sum = 0.0;
        for (const auto& [query_id, by_cutoff] : report.per_query) {
            sum += by_cutoff.at(k);
        }
        report.mean[k] = report.per_query.empty() ? 0.0 : sum / report.per_query.size();
    }
    return report;
}

CompareReport compare_runs(const RunFile& a, const RunFile& b, const Qrels& qrels, int cutoff) {
    if (cutoff < 1) {
        throw InvalidInputError("comparison cutoff must be positive, got " + std::to_string(cutoff));
    }
    CompareReport report;
    report.cutoff = cutoff;
    double sum = 0.0;
    for (const auto& [query_id, judged] : qrels.judgments) {
        if (a.entries.find(query_id) == a.entries.end() ||
            b.entries.find(query_id) == b.entries.end()) {
            continue;
        }
        CompareReport::Row row;
        row.ndcg_a = ndcg_at_k(a.ranking(query_id), qrels, query_id, cutoff);
        row.ndcg_b = ndcg_at_k(b.ranking(query_id), qrels, query_id, cutoff);
        row.delta = row.ndcg_b - row.ndcg_a;
        sum += row.delta;
        report.per_query[query_id] = row;
    }
    if (report.per_query.empty()) {
        throw EmptyIntersectionError("the two runs and the qrels share no query");
    }
    report.mean_delta = sum / report.per_query.size();
    return report;
}

CostReport cost_report(const std::vector<Exchange>& call_log,
                       double price_per_1k_input,
                       double price_per_1k_output,
                       int query_count) {
    if (price_per_1k_input < 0.0 || price_per_1k_output < 0.0) {
        throw ConfigError("token prices must be nonnegative");
    }
    if (query_count < 1) {
        throw ConfigError("query count must be positive, got " + std::to_string(query_count));
    }
    CostReport report;
    report.price_per_1k_input = price_per_1k_input;
    report.price_per_1k_output = price_per_1k_output;
    report.query_count = query_count;
    for (const auto& exchange : call_log) {
        report.total_input_tokens += exchange.input_tokens;
        report.total_output_tokens += exchange.output_tokens;
        report.total_wall_ms += exchange.latency_ms;
    }
    report.total_usd = report.total_input_tokens / 1000.0 * price_per_1k_input +
                       report.total_output_tokens / 1000.0 * price_per_1k_output;
    report.per_query_input_tokens = static_cast<double>(report.total_input_tokens) / query_count;
    report.per_query_output_tokens = static_cast<double>(report.total_output_tokens) / query_count;
    report.per_query_wall_ms = static_cast<double>(report.total_wall_ms) / query_count;
    report.per_query_usd = report.total_usd / query_count;
    return report;
}

std::string format_text(const EvalReport& report) {
    std::size_t id_width = std::string("query").size();
    for (const auto& [query_id, by_cutoff] : report.per_query) {
        id_width = std::max(id_width, query_id.size());
    }
    std::ostringstream out;
    out << std::left;
    out.width(static_cast<std::streamsize>(id_width));
    out << "query";
    for (int k : report.cutoffs) {
        std::string header = "nDCG@" + std::to_string(k);
        out << "  ";
        out.width(9);
        out << std::right << header << std::left;
    }
    out << '\n';
    auto row = [&](const std::string& label, const std::map<int, double>& values) {
        out.width(static_cast<std::streamsize>(id_width));
        out << label;
        for (int k : report.cutoffs) {
            out << "  ";
            out.width(9);
            out << std::right << fixed(values.at(k), 4) << std::left;
        }
        out << '\n';
    };
    for (const auto& [query_id, by_cutoff] : report.per_query) {
        row(query_id, by_cutoff);
    }
    row("mean", report.mean);
    return out.str();
}

std::string format_text(const CompareReport& report) {
    std::size_t id_width = std::string("query").size();
    for (const auto& [query_id, value] : report.per_query) {
        id_width = std::max(id_width, query_id.size());
    }
    std::ostringstream out;
    const std::string metric = "nDCG@" + std::to_string(report.cutoff);
    out << std::left;
    out.width(static_cast<std::streamsize>(id_width));
    out << "query";
    for (const std::string& header : {metric + " a", metric + " b", std::string("delta")}) {
        out << "  ";
        out.width(10);
        out << std::right << header << std::left;
    }
    out << '\n';
    for (const auto& [query_id, value] : report.per_query) {
        out.width(static_cast<std::streamsize>(id_width));
        out << query_id;
        for (double number : {value.ndcg_a, value.ndcg_b, value.delta}) {
            out << "  ";
            out.width(10);
            out << std::right << fixed(number, 4) << std::left;
        }
        out << '\n';
    }
    out.width(static_cast<std::streamsize>(id_width));
    out << "mean";
    out << "  ";
    out.width(10);
    out << std::right << "" << std::left;
    out << "  ";
    out.width(10);
    out << std::right << "" << std::left;
    out << "  ";
    out.width(10);
    out << std::right << fixed(report.mean_delta, 4) << std::left;
    out << '\n';
    return out.str();
}

std::string format_text(const CostReport& report) {
    std::ostringstream out;
    out << "queries:        " << report.query_count << '\n';
    out << "input tokens:   " << report.total_input_tokens << " total, "
        << fixed(report.per_query_input_tokens, 1) << " per query\n";
    out << "output tokens:  " << report.total_output_tokens << " total, "
        << fixed(report.per_query_output_tokens, 1) << " per query\n";
    out << "wall time ms:   " << report.total_wall_ms << " total, "
        << fixed(report.per_query_wall_ms, 1) << " per query\n";
    out << "usd:            " << fixed(report.total_usd, 4) << " total, "
        << fixed(report.per_query_usd, 4) << " per query\n";
    out << "prices per 1K:  " << fixed(report.price_per_1k_input, 4) << " input, "
        << fixed(report.price_per_1k_output, 4) << " output\n";
    return out.str();
}

std::string format_json(const EvalReport& report) {
    nlohmann::json per_query = nlohmann::json::object();
    for (const auto& [query_id, by_cutoff] : report.per_query) {
        nlohmann::json row = nlohmann::json::object();
        for (const auto& [k, value] : by_cutoff) {
            row[std::to_string(k)] = value;
        }
        per_query[query_id] = std::move(row);
    }
    nlohmann::json mean = nlohmann::json::object();
    for (const auto& [k, value] : report.mean) {
        mean[std::to_string(k)] = value;
    }
    nlohmann::json object{
        {"cutoffs", report.cutoffs},
        {"per_query", std::move(per_query)},
        {"mean", std::move(mean)},
    };
    return object.dump(2) + "\n";
}

std::string format_json(const CompareReport& report) {
    nlohmann::json per_query = nlohmann::json::object();
    for (const auto& [query_id, row] : report.per_query) {
        per_query[query_id] = {
            {"ndcg_a", row.ndcg_a},
            {"ndcg_b", row.ndcg_b},
            {"delta", row.delta},
        };
    }
    nlohmann::json object{
        {"cutoff", report.cutoff},
        {"per_query", std::move(per_query)},
        {"mean_delta", report.mean_delta},
    };
    return object.dump(2) + "\n";
}

std::string format_json(const CostReport& report) {
    nlohmann::json object{
        {"query_count", report.query_count},
        {"total",
         {{"input_tokens", report.total_input_tokens},
          {"output_tokens", report.total_output_tokens},
          {"wall_ms", report.total_wall_ms},
          {"usd", report.total_usd}}},
        {"per_query",
         {{"input_tokens", report.per_query_input_tokens},
          {"output_tokens", report.per_query_output_tokens},
          {"wall_ms", report.per_query_wall_ms},
          {"usd", report.per_query_usd}}},
        {"prices_per_1k",
         {{"input", report.price_per_1k_input}, {"output", report.price_per_1k_output}}},
    };
    return object.dump(2) + "\n";
}

} // namespace rankpipe
