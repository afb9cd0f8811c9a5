#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "maha/generate.hpp"
#include "maha/retrieve.hpp"

namespace maha {

struct QAItem {
    std::string query_id;
    std::string question;
    std::set<std::string> gold_chunk_ids;
    std::string gold_answer;
    std::set<Modality> required_modalities;

    bool operator==(const QAItem&) const = default;
};

inline constexpr int kDatasetSchemaVersion = 1;

std::vector<QAItem> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::vector<QAItem>& items, const std::string& dataset_id,
                  const std::filesystem::path& path);

// Throws validation_error when gold ids do not resolve or required
// modalities are not covered by the gold chunks.
void validate_dataset(const std::vector<QAItem>& items, const Corpus& corpus);

// --- metrics ---

// 1 iff a gold chunk appears in the top k (ANY semantics; require_all
// switches to ALL gold chunks present).
int recall_at_k(const RetrievalResult& result, const std::set<std::string>& gold, int k,
                bool require_all = false);

// 1/rank of the first gold chunk, 0 when absent.
double reciprocal_rank(const RetrievalResult& result, const std::set<std::string>& gold);

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// LCS over shared-tokenizer token sequences; zero denominators give zeros.
RougeScore rouge_l(const std::string& hypothesis, const std::string& reference);

// |required ∩ retrieved| / |required|.
double modality_coverage(const std::set<Modality>& required,
                         const std::set<Modality>& retrieved);

// --- benchmark harness ---

struct RetrieverSpec {
    std::string retriever_id;
    FusionParams params;
};

struct EvalRow {
    std::string retriever_id;
    std::string dataset_id;
    std::map<int, double> recall_at; // k -> mean recall
    double mrr = 0.0;
    double rouge_l_f = 0.0;
    double modality_coverage = 0.0;
    int n_queries = 0;
    int n_failed = 0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    nlohmann::json config_snapshot;
};

struct BenchmarkOptions {
    std::vector<int> ks = {1, 3, 5};
    int token_budget = kDefaultTokenBudget;
    int max_tokens = 256;
    bool recall_require_all = false;
};

// Runs every retriever over every query: retrieval metrics from the hit
// lists, ROUGE-L from generated answers (stub generator when client is
// null). Queries whose provider calls fail are excluded and counted.
EvalReport run_benchmark(const RetrievalContext& ctx, const std::string& dataset_id,
                         const std::vector<QAItem>& items,
                         const std::vector<RetrieverSpec>& retrievers,
                         GenerationClient* generator = nullptr,
                         const BenchmarkOptions& options = {});

std::string report_to_jsonl(const EvalReport& report);
std::string report_summary_text(const EvalReport& report);
void write_report(const EvalReport& report, const std::filesystem::path& jsonl_path,
                  const std::filesystem::path& text_path);

} // namespace maha
