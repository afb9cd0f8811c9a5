#include "maha/eval.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "maha/errors.hpp"
#include "maha/text.hpp"

namespace maha {

using nlohmann::json;

std::vector<QAItem> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path.string());
    std::vector<QAItem> items;
    std::string line;
    bool saw_header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw format_error(path.string() + " line " + std::to_string(line_no) +
                               ": parse error: " + e.what());
        }
        try {
            const std::string record = j.at("record").get<std::string>();
            if (record == "dataset") {
                const int version = j.at("schema_version").get<int>();
                if (version != kDatasetSchemaVersion) {
                    throw format_error("unsupported dataset schema_version " +
                                       std::to_string(version));
                }
                saw_header = true;
            } else if (record == "query") {
                QAItem item;
                item.query_id = j.at("query_id").get<std::string>();
                item.question = j.at("question").get<std::string>();
                for (const auto& id : j.at("gold_chunk_ids")) {
                    item.gold_chunk_ids.insert(id.get<std::string>());
                }
                item.gold_answer = j.at("gold_answer").get<std::string>();
                for (const auto& m : j.at("required_modalities")) {
                    item.required_modalities.insert(modality_from_string(m.get<std::string>()));
                }
                if (item.gold_chunk_ids.empty()) {
                    throw format_error("query " + item.query_id + " has no gold chunks");
                }
                if (item.required_modalities.empty()) {
                    throw format_error("query " + item.query_id + " has no required modalities");
                }
                items.push_back(std::move(item));
            } else {
                throw format_error("unknown record type: " + record);
            }
        } catch (const json::exception& e) {
            throw format_error(path.string() + " line " + std::to_string(line_no) +
                               ": bad record: " + e.what());
        }
    }
    if (!saw_header) throw format_error(path.string() + ": missing dataset header");
    return items;
}

void save_dataset(const std::vector<QAItem>& items, const std::string& dataset_id,
                  const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open for writing: " + path.string());
    json header;
    header["record"] = "dataset";
    header["schema_version"] = kDatasetSchemaVersion;
    header["dataset_id"] = dataset_id;
    out << header.dump() << '\n';
    for (const auto& item : items) {
        json j;
        j["record"] = "query";
        j["query_id"] = item.query_id;
        j["question"] = item.question;
        j["gold_chunk_ids"] = item.gold_chunk_ids;
        j["gold_answer"] = item.gold_answer;
        std::vector<std::string> mods;
        for (auto m : item.required_modalities) mods.emplace_back(to_string(m));
        j["required_modalities"] = mods;
        out << j.dump() << '\n';
    }
    if (!out) throw io_error("write failed: " + path.string());
}

void validate_dataset(const std::vector<QAItem>& items, const Corpus& corpus) {
    std::unordered_map<std::string, Modality> modality_of;
    for (const auto& c : corpus.chunks) modality_of[c.chunk_id] = c.modality;
    for (const auto& item : items) {
        std::set<Modality> gold_modalities;
        for (const auto& id : item.gold_chunk_ids) {
            auto it = modality_of.find(id);
            if (it == modality_of.end()) {
                throw validation_error("dataset query " + item.query_id +
                                       ": gold chunk " + id + " not in corpus");
            }
            gold_modalities.insert(it->second);
        }
        for (auto m : item.required_modalities) {
            if (!gold_modalities.count(m)) {
                throw validation_error("dataset query " + item.query_id +
                                       ": required modality " + std::string(to_string(m)) +
                                       " not covered by gold chunks");
            }
        }
    }
}

int recall_at_k(const RetrievalResult& result, const std::set<std::string>& gold, int k,
                bool require_all) {
    if (k < 1) throw invalid_argument_error("recall_at_k: k must be >= 1");
    std::set<std::string> seen;
    for (const auto& hit : result.hits) {
        if (hit.rank > k) break;
        if (gold.count(hit.chunk_id)) seen.insert(hit.chunk_id);
    }
    if (require_all) return seen.size() == gold.size() ? 1 : 0;
    return seen.empty() ? 0 : 1;
}

double reciprocal_rank(const RetrievalResult& result, const std::set<std::string>& gold) {
    for (const auto& hit : result.hits) {
        if (gold.count(hit.chunk_id)) return 1.0 / hit.rank;
    }
    return 0.0;
}

RougeScore rouge_l(const std::string& hypothesis, const std::string& reference) {
    const auto hyp = tokenize(hypothesis);
    const auto ref = tokenize(reference);
    RougeScore score;
    if (hyp.empty() || ref.empty()) return score;

    // LCS dynamic program, rolling rows.
    std::vector<int> prev(ref.size() + 1, 0);
    std::vector<int> curr(ref.size() + 1, 0);
    for (std::size_t i = 1; i <= hyp.size(); ++i) {
        for (std::size_t j = 1; j <= ref.size(); ++j) {
            if (hyp[i - 1] == ref[j - 1]) {
                curr[j] = prev[j - 1] + 1;
            } else {
                curr[j] = std::max(prev[j], curr[j - 1]);
            }
        }
        std::swap(prev, curr);
    }
    const double lcs = prev[ref.size()];
    score.precision = lcs / static_cast<double>(hyp.size());
    score.recall = lcs / static_cast<double>(ref.size());
    if (score.precision + score.recall > 0) {
        score.f1 = 2.0 * score.precision * score.recall / (score.precision + score.recall);
    }
    return score;
}

double modality_coverage(const std::set<Modality>& required,
                         const std::set<Modality>& retrieved) {
    if (required.empty()) throw invalid_argument_error("modality_coverage: required set empty");
    std::size_t hit = 0;
    for (auto m : required) {
        if (retrieved.count(m)) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(required.size());
}

EvalReport run_benchmark(const RetrievalContext& ctx, const std::string& dataset_id,
                         const std::vector<QAItem>& items,
                         const std::vector<RetrieverSpec>& retrievers,
                         GenerationClient* generator, const BenchmarkOptions& options) {
    if (!ctx.corpus) throw invalid_argument_error("run_benchmark: corpus not available");
    validate_dataset(items, *ctx.corpus);

    std::unordered_map<std::string, Modality> modality_of;
    for (const auto& c : ctx.corpus->chunks) modality_of[c.chunk_id] = c.modality;

    EvalReport report;
    for (const auto& spec : retrievers) {
        EvalRow row;
        row.retriever_id = spec.retriever_id;
        row.dataset_id = dataset_id;
        row.n_queries = static_cast<int>(items.size());

        std::map<int, double> recall_sum;
        for (int k : options.ks) recall_sum[k] = 0.0;
        double rr_sum = 0.0;
        double rouge_sum = 0.0;
        double coverage_sum = 0.0;
        int ok = 0;

        for (const auto& item : items) {
            RetrievalResult result;
            Answer answer;
            try {
                result = run_retriever(ctx, spec.retriever_id, item.question, spec.params);
                result.query_id = item.query_id;
                auto assembled = assemble_context(item.question, result, *ctx.corpus,
                                                  *ctx.graph, options.token_budget);
                answer = generate_answer(assembled, generator, options.max_tokens);
            } catch (const provider_error&) {
                ++row.n_failed;
                continue;
            }
            ++ok;
            for (int k : options.ks) {
                recall_sum[k] += recall_at_k(result, item.gold_chunk_ids, k,
                                             options.recall_require_all);
            }
            rr_sum += reciprocal_rank(result, item.gold_chunk_ids);
            rouge_sum += rouge_l(answer.text, item.gold_answer).f1;

            std::set<Modality> retrieved;
            for (const auto& hit : result.hits) retrieved.insert(modality_of.at(hit.chunk_id));
            coverage_sum += modality_coverage(item.required_modalities, retrieved);
        }

        if (ok > 0) {
            for (int k : options.ks) row.recall_at[k] = recall_sum[k] / ok;
            row.mrr = rr_sum / ok;
            row.rouge_l_f = rouge_sum / ok;
            row.modality_coverage = coverage_sum / ok;
        } else {
            for (int k : options.ks) row.recall_at[k] = 0.0;
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string report_to_jsonl(const EvalReport& report) {
    std::string out;
    json header;
    header["record"] = "eval_report";
    header["schema_version"] = 1;
    header["config"] = report.config_snapshot;
    out += header.dump();
    out.push_back('\n');
    for (const auto& row : report.rows) {
        json j;
        j["record"] = "row";
        j["retriever_id"] = row.retriever_id;
        j["dataset_id"] = row.dataset_id;
        for (const auto& [k, v] : row.recall_at) {
            j["recall_at_" + std::to_string(k)] = v;
        }
        j["mrr"] = row.mrr;
        j["rouge_l_f"] = row.rouge_l_f;
        j["modality_coverage"] = row.modality_coverage;
        j["n_queries"] = row.n_queries;
        j["n_failed"] = row.n_failed;
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

std::string report_summary_text(const EvalReport& report) {
    std::ostringstream out;
    out << "retriever        dataset          ";
    std::vector<int> ks;
    if (!report.rows.empty()) {
        for (const auto& [k, _] : report.rows.front().recall_at) ks.push_back(k);
    }
    for (int k : ks) out << "R@" << k << "     ";
    out << "MRR     ROUGE-L coverage n\n";
    char buf[64];
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof(buf), "%-16s %-16s ", row.retriever_id.c_str(),
                      row.dataset_id.c_str());
        out << buf;
        for (int k : ks) {
            std::snprintf(buf, sizeof(buf), "%-7.4f ", row.recall_at.at(k));
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "%-7.4f %-7.4f %-8.4f %d", row.mrr, row.rouge_l_f,
                      row.modality_coverage, row.n_queries);
        out << buf;
        if (row.n_failed > 0) out << " (" << row.n_failed << " failed)";
        out << "\n";
    }
    return out.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& jsonl_path,
                  const std::filesystem::path& text_path) {
    {
        std::ofstream out(jsonl_path, std::ios::binary);
        if (!out) throw io_error("cannot open for writing: " + jsonl_path.string());
        out << report_to_jsonl(report);
        if (!out) throw io_error("write failed: " + jsonl_path.string());
    }
    {
        std::ofstream out(text_path, std::ios::binary);
        if (!out) throw io_error("cannot open for writing: " + text_path.string());
        out << report_summary_text(report);
        if (!out) throw io_error("write failed: " + text_path.string());
    }
}

} // namespace maha
