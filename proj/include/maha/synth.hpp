#pragma once

#include <random>
#include <string>
#include <vector>

#include "maha/eval.hpp"
#include "maha/ingest.hpp"

namespace maha {

// Synthetic documents and datasets for tests and the benchmark harness.

struct RandomDocOptions {
    int min_extra_blocks = 2;
    int max_extra_blocks = 10;
};

// Mixed-modality document; the first block is always a paragraph so every
// non-TEXT chunk has a text anchor.
SourceDocument random_source_document(std::mt19937_64& rng, const std::string& doc_id,
                                      const RandomDocOptions& options = {});

std::string random_query(std::mt19937_64& rng, int n_tokens);

// Cross-modal ablation suite: each item document pairs one anchor paragraph
// with one non-text block (table, image or equation) whose content shares no
// vocabulary with the queries, so the non-text evidence is reachable only
// through the graph. Half the queries name the document entity (the graph
// retriever can seed), half paraphrase without it.
struct AblationOptions {
    int items_per_modality = 20; // one third tables, one third images, one third equations
    int text_distractors = 20;
};

struct AblationSuite {
    std::string dataset_id;
    std::vector<SourceDocument> documents;
    std::vector<QAItem> items;
};

AblationSuite make_ablation_suite(const AblationOptions& options = {});

} // namespace maha
